//! Counter-based pseudorandom generator for reproducible parallel streams.
//!
//! Every draw is a pure function of `(seed, stream, counter words)`, so a
//! simulation's random numbers do not depend on evaluation order, thread
//! count, or how many draws other streams have consumed. The ensemble code
//! keys draws by `(master_seed, realization, step, phase, site, draw)`;
//! identical keys give identical bits on every platform (the mixer uses only
//! wrapping integer arithmetic).
//!
//! The mixer is the SplitMix64 finalizer applied after absorbing each
//! counter word with a distinct round constant. It is not cryptographic,
//! but it has full avalanche per word, which is what Monte Carlo sampling
//! needs here.

/// SplitMix64 finalizer (Stafford variant 13).
#[inline]
fn fmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const ROUND: [u64; 3] = [
    0x9e37_79b9_7f4a_7c15, // golden-ratio increment
    0xd1b5_4a32_d192_ed03,
    0x8cb9_2ba7_2f3d_8dd7,
];

/// A keyed, stateless generator. `stream` derives independent substreams;
/// `u64_at` evaluates the draw at a two-word counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self {
            key: fmix64(seed ^ ROUND[0]),
        }
    }

    /// Independent substream (used per ensemble realization).
    pub fn stream(&self, index: u64) -> Self {
        Self {
            key: fmix64(self.key ^ index.wrapping_mul(ROUND[1]) ^ ROUND[2]),
        }
    }

    #[inline]
    pub fn u64_at(&self, c0: u64, c1: u64) -> u64 {
        let h = fmix64(self.key ^ c0.wrapping_mul(ROUND[1]));
        fmix64(h ^ c1.wrapping_mul(ROUND[2]))
    }

    /// Uniform deviate in [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform(&self, c0: u64, c1: u64) -> f64 {
        (self.u64_at(c0, c1) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn bernoulli(&self, c0: u64, c1: u64, p: f64) -> bool {
        self.uniform(c0, c1) < p
    }
}

/// Counter word identifying what a draw is for, so different uses of the
/// same (step, site) never collide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Sampling the initial bits from the starting field.
    Init = 0,
    /// The collision decision bits of the classical rule.
    Collide = 1,
    /// Measurement sampling of post-collision probabilities.
    Measure = 2,
}

/// Pack `(phase, site, draw)` into the second counter word.
#[inline]
pub fn pack_site_draw(phase: Phase, site: usize, draw: u32) -> u64 {
    ((phase as u64) << 56) | ((site as u64) << 16) | draw as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_reproducible_and_stream_independent() {
        let a = CounterRng::new(42).stream(3);
        let b = CounterRng::new(42).stream(3);
        let c = CounterRng::new(42).stream(4);
        for i in 0..100 {
            assert_eq!(a.u64_at(i, 7), b.u64_at(i, 7));
            assert_ne!(a.u64_at(i, 7), c.u64_at(i, 7));
        }
    }

    #[test]
    fn golden_values_pin_the_key_schedule() {
        // Frozen outputs: any change to the mixing constants or word order
        // silently breaks reproducibility of archived runs, so pin them.
        let r = CounterRng::new(0);
        let s = CounterRng::new(0xdead_beef).stream(1);
        assert_eq!(r.u64_at(0, 0), 0x33fe_8bd4_f9c5_7863);
        assert_eq!(r.u64_at(1, 0), 0xf536_73d6_46f5_b4fb);
        assert_eq!(s.u64_at(0, 1), 0x3ca1_6117_54d9_94d5);
    }

    #[test]
    fn uniform_moments_look_uniform() {
        let rng = CounterRng::new(2024);
        let n = 200_000u64;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for i in 0..n {
            let u = rng.uniform(i, 0);
            sum += u;
            sumsq += u * u;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        // exact values 1/2 and 1/12; tolerances are ~5 sigma
        assert!(
            (mean - 0.5).abs() < 5.0 * (1.0f64 / 12.0 / n as f64).sqrt(),
            "mean {mean}"
        );
        assert!((var - 1.0 / 12.0).abs() < 0.002, "var {var}");
    }

    #[test]
    fn adjacent_counters_are_uncorrelated() {
        let rng = CounterRng::new(7);
        let n = 100_000u64;
        let mut corr = 0.0;
        for i in 0..n {
            let u = rng.uniform(i, 0) - 0.5;
            let v = rng.uniform(i + 1, 0) - 0.5;
            corr += u * v;
        }
        corr /= n as f64 / 12.0; // normalize by the variance
        assert!(corr.abs() < 0.02, "lag-1 correlation {corr}");
    }

    #[test]
    fn bernoulli_rate_matches_p() {
        let rng = CounterRng::new(5).stream(0);
        let n = 100_000u64;
        let p = 0.3;
        let hits = (0..n)
            .filter(|&i| rng.bernoulli(i, pack_site_draw(Phase::Collide, 3, 1), p))
            .count() as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits / n as f64 - p).abs() < 5.0 * se);
    }
}
