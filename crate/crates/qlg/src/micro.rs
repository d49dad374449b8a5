//! Bit-level stochastic realizations, ensemble averaging, and shot noise.
//!
//! A realization stores one bit per site and channel. The classical rule
//! scatters a lone particle rightward with probability `(1+α)/2`, realized
//! as a biased bit (probability `α` forces `+`) followed by a fair bit, so
//! the expected change of the `+` occupation reproduces the classical
//! collision term exactly. The quantum mode replaces the collision by
//! measurement sampling: post-collision probabilities are computed from the
//! ensemble-averaged field (the device re-initializes its qubits from
//! measured averages) and each realization redraws its bits from them.
//!
//! Every random draw is keyed by
//! `(master_seed, realization, step, phase, site, draw)` through
//! [`CounterRng`], making ensembles bit-reproducible regardless of thread
//! count; ensemble averages are integer counts divided once by `N`, so the
//! reduction order cannot perturb them either.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::collision::{collide, CollisionModel};
use crate::error::{Error, Result};
use crate::field::OccupancyField;
use crate::rng::{pack_site_draw, CounterRng, Phase};

/// One microscopic realization: occupation bits for both channels.
#[derive(Debug, Clone, PartialEq)]
pub struct BitRealization {
    index: u64,
    bits_plus: Vec<u8>,
    bits_minus: Vec<u8>,
}

impl BitRealization {
    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn bits_plus(&self) -> &[u8] {
        &self.bits_plus
    }

    pub fn bits_minus(&self) -> &[u8] {
        &self.bits_minus
    }

    pub fn particle_count(&self) -> u64 {
        self.bits_plus.iter().map(|&b| b as u64).sum::<u64>()
            + self.bits_minus.iter().map(|&b| b as u64).sum::<u64>()
    }

    fn stream(&mut self) {
        self.bits_plus.rotate_right(1);
        self.bits_minus.rotate_left(1);
    }
}

/// Which microscopic dynamics the ensemble runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MicroMode {
    /// Bit-level collisions of the classical (or two-bit) rule.
    ClassicalBits,
    /// Measurement-sampled quantum dynamics.
    QuantumSampled,
}

/// How quantum realizations obtain their collision input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// Collision probabilities come from the ensemble-averaged field, the
    /// way a measured device would re-initialize its qubits.
    MeanField,
    /// Each realization collides its own bits, with no cross-realization
    /// coupling. Offered for comparison.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleSpec {
    pub n_realizations: usize,
    pub master_seed: u64,
    pub mode: MicroMode,
    pub coupling: Coupling,
}

impl EnsembleSpec {
    pub fn classical(n_realizations: usize, master_seed: u64) -> Self {
        Self {
            n_realizations,
            master_seed,
            mode: MicroMode::ClassicalBits,
            coupling: Coupling::MeanField,
        }
    }

    pub fn quantum(n_realizations: usize, master_seed: u64) -> Self {
        Self {
            n_realizations,
            master_seed,
            mode: MicroMode::QuantumSampled,
            coupling: Coupling::MeanField,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_realizations == 0 {
            return Err(Error::InvalidInput {
                what: "ensemble.n_realizations",
                value: 0.0,
                expected: ">= 1",
            });
        }
        Ok(())
    }
}

/// `N` independent realizations plus the step counter that keys their
/// random streams.
#[derive(Debug, Clone)]
pub struct BitEnsemble {
    spec: EnsembleSpec,
    realizations: Vec<BitRealization>,
    n_sites: usize,
    step: u64,
}

impl BitEnsemble {
    /// Draw initial bits site-wise from the field's occupation
    /// probabilities, independently per realization.
    pub fn sample_from_field(field: &OccupancyField, spec: EnsembleSpec) -> Result<Self> {
        spec.validate()?;
        let n_sites = field.n_sites();
        let master = CounterRng::new(spec.master_seed);
        let realizations: Vec<BitRealization> = (0..spec.n_realizations as u64)
            .into_par_iter()
            .map(|r| {
                let rng = master.stream(r);
                let mut bits_plus = vec![0u8; n_sites];
                let mut bits_minus = vec![0u8; n_sites];
                for i in 0..n_sites {
                    bits_plus[i] =
                        rng.bernoulli(0, pack_site_draw(Phase::Init, i, 0), field.plus()[i]) as u8;
                    bits_minus[i] =
                        rng.bernoulli(0, pack_site_draw(Phase::Init, i, 1), field.minus()[i]) as u8;
                }
                BitRealization {
                    index: r,
                    bits_plus,
                    bits_minus,
                }
            })
            .collect();
        Ok(Self {
            spec,
            realizations,
            n_sites,
            step: 0,
        })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_realizations(&self) -> usize {
        self.realizations.len()
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn realizations(&self) -> &[BitRealization] {
        &self.realizations
    }

    pub fn total_particles(&self) -> u64 {
        self.realizations
            .iter()
            .map(BitRealization::particle_count)
            .sum()
    }

    /// `p̂_±(x) = (1/N) Σ_r bits_±(x)`. Counts are summed as integers, so
    /// the result is identical for any evaluation order or thread count.
    pub fn ensemble_average(&self) -> OccupancyField {
        let n = self.n_sites;
        let (cp, cm) = self
            .realizations
            .par_iter()
            .map(|r| {
                let mut cp = vec![0u32; n];
                let mut cm = vec![0u32; n];
                for i in 0..n {
                    cp[i] += r.bits_plus[i] as u32;
                    cm[i] += r.bits_minus[i] as u32;
                }
                (cp, cm)
            })
            .reduce(
                || (vec![0u32; n], vec![0u32; n]),
                |(mut ap, mut am), (bp, bm)| {
                    for i in 0..n {
                        ap[i] += bp[i];
                        am[i] += bm[i];
                    }
                    (ap, am)
                },
            );
        let inv = 1.0 / self.realizations.len() as f64;
        OccupancyField::new(
            cp.into_iter().map(|c| c as f64 * inv).collect(),
            cm.into_iter().map(|c| c as f64 * inv).collect(),
        )
        .expect("counts/N lie in [0,1] by construction")
    }

    /// One step of the classical bit dynamics: collide every realization
    /// with the biased-bit rule, then stream. Conserves the particle count
    /// of each realization exactly.
    pub fn step_classical(&mut self, alpha: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidInput {
                what: "alpha",
                value: alpha,
                expected: "in [0, 1]",
            });
        }
        let master = CounterRng::new(self.spec.master_seed);
        let step = self.step;
        self.realizations.par_iter_mut().for_each(|real| {
            let rng = master.stream(real.index);
            classical_micro_collide(real, &rng, step, alpha);
            real.stream();
        });
        self.step += 1;
        Ok(())
    }

    /// One measurement-sampled quantum step. With [`Coupling::MeanField`]
    /// the post-collision probabilities are computed once from `estimate`
    /// (normally the current ensemble average); with
    /// [`Coupling::Independent`] each realization collides its own bits.
    /// Returns the re-estimated field after streaming.
    pub fn step_quantum(
        &mut self,
        model: &CollisionModel,
        estimate: &OccupancyField,
    ) -> Result<OccupancyField> {
        model.validate()?;
        let master = CounterRng::new(self.spec.master_seed);
        let step = self.step;
        match self.spec.coupling {
            Coupling::MeanField => {
                let collided = collide(estimate, model)?;
                self.realizations.par_iter_mut().for_each(|real| {
                    let rng = master.stream(real.index);
                    for i in 0..real.bits_plus.len() {
                        real.bits_plus[i] = rng.bernoulli(
                            step + 1,
                            pack_site_draw(Phase::Measure, i, 0),
                            collided.plus()[i],
                        ) as u8;
                        real.bits_minus[i] = rng.bernoulli(
                            step + 1,
                            pack_site_draw(Phase::Measure, i, 1),
                            collided.minus()[i],
                        ) as u8;
                    }
                    real.stream();
                });
            }
            Coupling::Independent => {
                self.realizations.par_iter_mut().for_each(|real| {
                    let rng = master.stream(real.index);
                    for i in 0..real.bits_plus.len() {
                        let p = real.bits_plus[i] as f64;
                        let m = real.bits_minus[i] as f64;
                        let w = model.omega_raw(p, m);
                        real.bits_plus[i] = rng.bernoulli(
                            step + 1,
                            pack_site_draw(Phase::Measure, i, 0),
                            (p + w).clamp(0.0, 1.0),
                        ) as u8;
                        real.bits_minus[i] = rng.bernoulli(
                            step + 1,
                            pack_site_draw(Phase::Measure, i, 1),
                            (m - w).clamp(0.0, 1.0),
                        ) as u8;
                    }
                    real.stream();
                });
            }
        }
        self.step += 1;
        Ok(self.ensemble_average())
    }

    /// Advance one step in the mode given by the spec, returning the new
    /// field estimate.
    pub fn advance(
        &mut self,
        model: &CollisionModel,
        estimate: &OccupancyField,
    ) -> Result<OccupancyField> {
        match self.spec.mode {
            MicroMode::ClassicalBits => {
                let alpha = match *model {
                    CollisionModel::ClassicalBl { alpha } => alpha,
                    CollisionModel::TwoBit => 1.0,
                    CollisionModel::Quantum { .. } => {
                        return Err(Error::UnsupportedModel {
                            model: "quantum",
                            what: "classical bit dynamics (use QuantumSampled mode)",
                        })
                    }
                };
                self.step_classical(alpha)?;
                Ok(self.ensemble_average())
            }
            MicroMode::QuantumSampled => self.step_quantum(model, estimate),
        }
    }
}

/// Collide one realization in place: at every site holding exactly one
/// particle, a biased bit (probability `alpha` of forcing `+`) and, failing
/// that, a fair bit choose the exit channel. Sites with zero or two
/// particles are fixed points.
pub fn classical_micro_collide(real: &mut BitRealization, rng: &CounterRng, step: u64, alpha: f64) {
    let n = real.bits_plus.len();
    for i in 0..n {
        let occupied = real.bits_plus[i] + real.bits_minus[i];
        if occupied != 1 {
            continue;
        }
        let forced = rng.bernoulli(step + 1, pack_site_draw(Phase::Collide, i, 0), alpha);
        let exit_plus =
            forced || rng.bernoulli(step + 1, pack_site_draw(Phase::Collide, i, 1), 0.5);
        real.bits_plus[i] = exit_plus as u8;
        real.bits_minus[i] = (!exit_plus) as u8;
    }
}

/// Sample one site-collision of the classical rule from scratch: draw the
/// two occupation bits from Bernoulli(`p_plus`), Bernoulli(`p_minus`),
/// collide, and return the change of the `+` occupation. The expectation of
/// the returned value over trials is the classical collision term; this is
/// the Monte Carlo oracle used to validate that correspondence.
pub fn classical_micro_collide_sample(
    rng: &CounterRng,
    trial: u64,
    p_plus: f64,
    p_minus: f64,
    alpha: f64,
) -> f64 {
    let bp = rng.bernoulli(trial, pack_site_draw(Phase::Init, 0, 0), p_plus) as u8;
    let bm = rng.bernoulli(trial, pack_site_draw(Phase::Init, 0, 1), p_minus) as u8;
    let mut real = BitRealization {
        index: 0,
        bits_plus: vec![bp],
        bits_minus: vec![bm],
    };
    classical_micro_collide(&mut real, rng, trial, alpha);
    real.bits_plus[0] as f64 - bp as f64
}

/// Deviation statistics between an ensemble estimate and a reference field.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseStats {
    /// Channel-pooled deviation per site, `sqrt((dp² + dm²)/2)`.
    pub per_site: Vec<f64>,
    pub rms_plus: f64,
    pub rms_minus: f64,
    /// Pooled rms over both channels.
    pub rms: f64,
    pub max_abs: f64,
}

pub fn measure_noise(estimate: &OccupancyField, reference: &OccupancyField) -> NoiseStats {
    let n = estimate.n_sites() as f64;
    let mut per_site = Vec::with_capacity(estimate.n_sites());
    let mut sp = 0.0;
    let mut sm = 0.0;
    let mut max_abs: f64 = 0.0;
    for i in 0..estimate.n_sites() {
        let dp = estimate.plus()[i] - reference.plus()[i];
        let dm = estimate.minus()[i] - reference.minus()[i];
        per_site.push((0.5 * (dp * dp + dm * dm)).sqrt());
        sp += dp * dp;
        sm += dm * dm;
        max_abs = max_abs.max(dp.abs()).max(dm.abs());
    }
    NoiseStats {
        per_site,
        rms_plus: (sp / n).sqrt(),
        rms_minus: (sm / n).sqrt(),
        rms: ((sp + sm) / (2.0 * n)).sqrt(),
        max_abs,
    }
}

/// rms deviation of the ensemble estimate from the mesoscopic trajectory
/// after `steps`, pooled over `seeds`, for each ensemble size in `ns`.
/// Returns the per-size deviations and the fitted exponent of
/// `rms ~ N^exponent`.
pub fn noise_scaling(
    model: &CollisionModel,
    field0: &OccupancyField,
    mode: MicroMode,
    ns: &[usize],
    steps: usize,
    seeds: &[u64],
) -> Result<(Vec<(usize, f64)>, f64)> {
    // mesoscopic reference trajectory
    let reference = crate::collision::evolve(field0, model, steps)?;

    let mut points = Vec::with_capacity(ns.len());
    for &n in ns {
        let mut pooled = 0.0;
        for &seed in seeds {
            let spec = EnsembleSpec {
                n_realizations: n,
                master_seed: seed,
                mode,
                coupling: Coupling::MeanField,
            };
            let mut ens = BitEnsemble::sample_from_field(field0, spec)?;
            let mut estimate = ens.ensemble_average();
            for _ in 0..steps {
                estimate = ens.advance(model, &estimate)?;
            }
            let stats = measure_noise(&estimate, &reference);
            pooled += stats.rms * stats.rms;
        }
        points.push((n, (pooled / seeds.len() as f64).sqrt()));
    }
    let logpts: Vec<(f64, f64)> = points
        .iter()
        .map(|&(n, r)| ((n as f64).ln(), r.ln()))
        .collect();
    let slope = crate::compare::linear_fit_slope(&logpts);
    Ok((points, slope))
}

const DUMP_MAGIC: &[u8; 4] = b"QLG1";

/// Write the ensemble in the packed binary dump format: magic `QLG1`,
/// little-endian `u32 N`, `u32 n_sites`, `u64 step`, then one row per
/// realization (plus bits packed LSB-first, then minus bits).
pub fn write_ensemble_dump<W: Write>(w: &mut W, ens: &BitEnsemble) -> std::io::Result<()> {
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&(ens.n_realizations() as u32).to_le_bytes())?;
    w.write_all(&(ens.n_sites() as u32).to_le_bytes())?;
    w.write_all(&ens.step_index().to_le_bytes())?;
    let packed_len = ens.n_sites().div_ceil(8);
    let mut buf = vec![0u8; packed_len];
    for real in ens.realizations() {
        for bits in [real.bits_plus(), real.bits_minus()] {
            buf.iter_mut().for_each(|b| *b = 0);
            for (i, &bit) in bits.iter().enumerate() {
                buf[i / 8] |= bit << (i % 8);
            }
            w.write_all(&buf)?;
        }
    }
    Ok(())
}

/// Read a dump written by [`write_ensemble_dump`]. The spec supplies the
/// seed/mode metadata the binary format does not carry; its realization
/// count must match the header.
pub fn read_ensemble_dump<R: Read>(r: &mut R, spec: EnsembleSpec) -> Result<BitEnsemble> {
    let mut head = [0u8; 20];
    r.read_exact(&mut head)
        .map_err(|e| Error::BadFormat(format!("dump header: {e}")))?;
    if &head[0..4] != DUMP_MAGIC {
        return Err(Error::BadFormat("bad magic (expected QLG1)".into()));
    }
    let n = u32::from_le_bytes(head[4..8].try_into().unwrap()) as usize;
    let n_sites = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    let step = u64::from_le_bytes(head[12..20].try_into().unwrap());
    if spec.n_realizations != n {
        return Err(Error::BadFormat(format!(
            "spec has {} realizations but dump holds {n}",
            spec.n_realizations
        )));
    }
    let packed_len = n_sites.div_ceil(8);
    let mut realizations = Vec::with_capacity(n);
    let mut buf = vec![0u8; packed_len];
    for index in 0..n as u64 {
        let mut channels = [Vec::new(), Vec::new()];
        for ch in &mut channels {
            r.read_exact(&mut buf)
                .map_err(|e| Error::BadFormat(format!("dump row: {e}")))?;
            let mut bits = vec![0u8; n_sites];
            for (i, bit) in bits.iter_mut().enumerate() {
                *bit = (buf[i / 8] >> (i % 8)) & 1;
            }
            *ch = bits;
        }
        let [bits_plus, bits_minus] = channels;
        realizations.push(BitRealization {
            index,
            bits_plus,
            bits_minus,
        });
    }
    Ok(BitEnsemble {
        spec,
        realizations,
        n_sites,
        step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::omega_classical;
    use crate::field::{init_from_density, DensityProfile, SplitMode};
    use crate::grid::GridSpec;

    fn realization_from(bits_plus: Vec<u8>, bits_minus: Vec<u8>) -> BitRealization {
        BitRealization {
            index: 0,
            bits_plus,
            bits_minus,
        }
    }

    #[test]
    fn doubly_occupied_and_empty_sites_are_fixed_points() {
        let rng = CounterRng::new(1);
        for step in 0..50 {
            let mut real = realization_from(vec![1, 0, 1, 0], vec![1, 0, 0, 1]);
            classical_micro_collide(&mut real, &rng, step, 0.5);
            // sites 0 (1,1) and 1 (0,0) untouched; sites 2 and 3 keep one particle
            assert_eq!((real.bits_plus[0], real.bits_minus[0]), (1, 1));
            assert_eq!((real.bits_plus[1], real.bits_minus[1]), (0, 0));
            assert_eq!(real.bits_plus[2] + real.bits_minus[2], 1);
            assert_eq!(real.bits_plus[3] + real.bits_minus[3], 1);
        }
    }

    #[test]
    fn full_bias_forces_rightward_exit() {
        let rng = CounterRng::new(2);
        for step in 0..50 {
            let mut real = realization_from(vec![0], vec![1]);
            classical_micro_collide(&mut real, &rng, step, 1.0);
            assert_eq!((real.bits_plus[0], real.bits_minus[0]), (1, 0));
        }
    }

    #[test]
    fn micro_collision_mean_matches_collision_term() {
        // Monte Carlo oracle for the rule-to-Omega correspondence at one
        // point; the acceptance suite repeats this at random points.
        let (p, m, alpha) = (0.9, 0.3, 0.707);
        let rng = CounterRng::new(77);
        let trials = 1_000_000u64;
        let mut sum = 0.0f64;
        let mut sumsq = 0.0f64;
        for t in 0..trials {
            let delta = classical_micro_collide_sample(&rng, t, p, m, alpha);
            sum += delta;
            sumsq += delta * delta;
        }
        let mean = sum / trials as f64;
        let var = sumsq / trials as f64 - mean * mean;
        let se = (var / trials as f64).sqrt();
        let expect = omega_classical(p, m, alpha).unwrap();
        assert!(
            (mean - expect).abs() < 3.0 * se,
            "mean {mean} vs omega {expect} (3 sigma = {})",
            3.0 * se
        );
    }

    #[test]
    fn particle_count_is_integer_invariant_under_classical_steps() {
        let g = GridSpec::new(64, 1.0, 1.0).unwrap();
        let rho = DensityProfile::sine(&g, 1.0, 0.4).unwrap();
        let model = CollisionModel::ClassicalBl { alpha: 0.707 };
        let f0 = init_from_density(&rho, &model, SplitMode::Equilibrium).unwrap();
        let mut ens = BitEnsemble::sample_from_field(&f0, EnsembleSpec::classical(32, 9)).unwrap();
        let before = ens.total_particles();
        for _ in 0..200 {
            ens.step_classical(0.707).unwrap();
            assert_eq!(ens.total_particles(), before);
        }
    }

    #[test]
    fn ensemble_average_of_single_realization_is_verbatim() {
        let f = OccupancyField::uniform(16, 0.5, 0.5).unwrap();
        let ens = BitEnsemble::sample_from_field(&f, EnsembleSpec::classical(1, 3)).unwrap();
        let avg = ens.ensemble_average();
        for i in 0..16 {
            assert_eq!(avg.plus()[i], ens.realizations()[0].bits_plus()[i] as f64);
            assert_eq!(avg.minus()[i], ens.realizations()[0].bits_minus()[i] as f64);
        }
    }

    #[test]
    fn ensemble_average_concentrates_at_binomial_rate() {
        let f = OccupancyField::uniform(256, 0.7, 0.7).unwrap();
        let ens = BitEnsemble::sample_from_field(&f, EnsembleSpec::classical(1024, 11)).unwrap();
        let avg = ens.ensemble_average();
        let sigma = (0.7f64 * 0.3 / 1024.0).sqrt();
        let mut worst = 0.0f64;
        for i in 0..256 {
            worst = worst.max((avg.plus()[i] - 0.7).abs());
        }
        // 512 per-site estimates; allow a 5-sigma envelope for the max
        assert!(
            worst < 5.0 * sigma,
            "worst deviation {worst}, sigma {sigma}"
        );

        let stats = measure_noise(&avg, &f);
        assert!(
            (stats.rms * stats.rms / (0.21 / 1024.0) - 1.0).abs() < 0.25,
            "rms^2 {}",
            stats.rms
        );
        // reference equal to the estimate itself: zero deviation
        let zero = measure_noise(&avg, &avg);
        assert_eq!(zero.rms, 0.0);
        assert_eq!(zero.max_abs, 0.0);
    }

    #[test]
    fn ensembles_are_bit_reproducible_across_thread_counts() {
        let g = GridSpec::new(32, 1.0, 1.0).unwrap();
        let rho = DensityProfile::sine(&g, 1.0, 0.3).unwrap();
        let model = CollisionModel::ClassicalBl { alpha: 0.5 };
        let f0 = init_from_density(&rho, &model, SplitMode::Symmetric).unwrap();
        let run = || {
            let mut ens =
                BitEnsemble::sample_from_field(&f0, EnsembleSpec::classical(17, 1234)).unwrap();
            for _ in 0..20 {
                ens.step_classical(0.5).unwrap();
            }
            ens
        };
        let a = run();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = single.install(run);
        assert_eq!(a.realizations().len(), b.realizations().len());
        for (ra, rb) in a.realizations().iter().zip(b.realizations()) {
            assert_eq!(ra, rb);
        }
    }

    #[test]
    fn quantum_identity_gate_preserves_means() {
        // theta = 0: collision is the identity, so the sampled dynamics is
        // free streaming of Bernoulli fields; the ensemble mean stays near
        // the (streamed) initial field.
        let f0 = OccupancyField::uniform(64, 0.6, 0.35).unwrap();
        let model = CollisionModel::Quantum {
            theta: 1e-9,
            zeta: 0.0,
            xi: 0.0,
        };
        let mut ens = BitEnsemble::sample_from_field(&f0, EnsembleSpec::quantum(2048, 5)).unwrap();
        let mut estimate = ens.ensemble_average();
        for _ in 0..3 {
            estimate = ens.step_quantum(&model, &estimate).unwrap();
        }
        let sigma = (0.6f64 * 0.4 / 2048.0).sqrt();
        for i in 0..64 {
            assert!((estimate.plus()[i] - 0.6).abs() < 6.0 * sigma);
            assert!((estimate.minus()[i] - 0.35).abs() < 6.0 * sigma);
        }
    }

    #[test]
    fn mean_field_estimate_tracks_mesoscopic_step() {
        let g = GridSpec::new(64, 1.0, 1.0).unwrap();
        let rho = DensityProfile::sine(&g, 1.0, 0.4).unwrap();
        let model = CollisionModel::Quantum {
            theta: std::f64::consts::FRAC_PI_4,
            zeta: 0.0,
            xi: 0.0,
        };
        let f0 = init_from_density(&rho, &model, SplitMode::Equilibrium).unwrap();
        let meso = crate::collision::step(&f0, &model).unwrap();

        let mut ens = BitEnsemble::sample_from_field(&f0, EnsembleSpec::quantum(4096, 21)).unwrap();
        let estimate = ens.step_quantum(&model, &f0).unwrap();
        let stats = measure_noise(&estimate, &meso);
        // one step from the exact field: deviation is pure sampling noise
        let sigma = (0.25f64 / 4096.0).sqrt();
        assert!(
            stats.rms < 2.0 * sigma,
            "rms {} vs sigma {}",
            stats.rms,
            sigma
        );
    }

    #[test]
    fn independent_coupling_with_identity_gate_is_pure_bit_streaming() {
        let f0 = OccupancyField::uniform(32, 0.5, 0.5).unwrap();
        let spec = EnsembleSpec {
            n_realizations: 8,
            master_seed: 4,
            mode: MicroMode::QuantumSampled,
            coupling: Coupling::Independent,
        };
        let mut ens = BitEnsemble::sample_from_field(&f0, spec).unwrap();
        let before: Vec<BitRealization> = ens.realizations().to_vec();
        // theta ~ 0: Omega on {0,1}-valued inputs is ~0, so each bit is
        // redrawn at probability ~0 or ~1 and the step reduces to streaming
        let model = CollisionModel::Quantum {
            theta: 1e-12,
            zeta: 0.0,
            xi: 0.0,
        };
        let estimate = ens.ensemble_average();
        ens.step_quantum(&model, &estimate).unwrap();
        for (a, b) in ens.realizations().iter().zip(&before) {
            let mut expect = b.clone();
            expect.stream();
            assert_eq!(a.bits_plus(), expect.bits_plus());
            assert_eq!(a.bits_minus(), expect.bits_minus());
        }
    }

    #[test]
    fn noise_shrinks_with_ensemble_size() {
        let g = GridSpec::new(64, 1.0, 1.0).unwrap();
        let rho = DensityProfile::sine(&g, 1.0, 0.4).unwrap();
        let model = CollisionModel::ClassicalBl { alpha: 0.707 };
        let f0 = init_from_density(&rho, &model, SplitMode::Equilibrium).unwrap();
        let (points, slope) = noise_scaling(
            &model,
            &f0,
            MicroMode::ClassicalBits,
            &[16, 256],
            8,
            &[1, 2],
        )
        .unwrap();
        assert!(points[1].1 < points[0].1);
        assert!(slope < -0.3, "slope {slope}");
    }

    #[test]
    fn dump_round_trips() {
        let f = OccupancyField::uniform(37, 0.4, 0.8).unwrap(); // odd width exercises bit packing
        let spec = EnsembleSpec::classical(5, 42);
        let mut ens = BitEnsemble::sample_from_field(&f, spec).unwrap();
        ens.step_classical(0.3).unwrap();
        let mut buf = Vec::new();
        write_ensemble_dump(&mut buf, &ens).unwrap();
        let back = read_ensemble_dump(&mut &buf[..], spec).unwrap();
        assert_eq!(back.step_index(), ens.step_index());
        for (a, b) in ens.realizations().iter().zip(back.realizations()) {
            assert_eq!(a, b);
        }
        // corrupt magic
        buf[0] = b'X';
        assert!(read_ensemble_dump(&mut &buf[..], spec).is_err());
    }
}
