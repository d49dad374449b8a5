//! The two-component occupancy field, streaming, and macroscopic observables.

use std::io::{self, BufRead, Write};

use crate::collision::CollisionModel;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::theory;

/// Tolerance for snapping values that round-off pushed marginally outside
/// their range. Larger excursions are contract violations and are rejected.
pub(crate) const RANGE_TOL: f64 = 1e-12;

/// Per-site occupation probabilities of the right-moving (`plus`) and
/// left-moving (`minus`) particles. Immutable once constructed; operations
/// return new fields.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyField {
    plus: Vec<f64>,
    minus: Vec<f64>,
}

/// How to split a density profile into the two channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// `p_+ = p_- = rho/2`. Simple, but relaxes towards equilibrium over the
    /// first few steps whenever the model's equilibrium is asymmetric.
    Symmetric,
    /// `(p_+, p_-) = (d_+(rho), d_-(rho))`, the model's own equilibrium.
    /// Suppresses the initial transient.
    Equilibrium,
}

impl OccupancyField {
    /// Build a field from per-site probabilities. Entries must lie in [0, 1]
    /// (up to round-off, which is snapped).
    pub fn new(plus: Vec<f64>, minus: Vec<f64>) -> Result<Self> {
        if plus.len() != minus.len() {
            return Err(Error::InvalidInput {
                what: "field.minus.len",
                value: minus.len() as f64,
                expected: "same length as plus",
            });
        }
        let mut f = Self { plus, minus };
        f.snap_and_check()?;
        Ok(f)
    }

    pub fn uniform(n_sites: usize, p_plus: f64, p_minus: f64) -> Result<Self> {
        Self::new(vec![p_plus; n_sites], vec![p_minus; n_sites])
    }

    fn snap_and_check(&mut self) -> Result<()> {
        for (channel, values) in [("p_plus", &mut self.plus), ("p_minus", &mut self.minus)] {
            for (site, v) in values.iter_mut().enumerate() {
                if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(v) || v.is_nan() {
                    return Err(Error::RangeViolation {
                        site,
                        channel,
                        value: *v,
                    });
                }
                *v = v.clamp(0.0, 1.0);
            }
        }
        Ok(())
    }

    pub fn n_sites(&self) -> usize {
        self.plus.len()
    }

    pub fn plus(&self) -> &[f64] {
        &self.plus
    }

    pub fn minus(&self) -> &[f64] {
        &self.minus
    }

    /// Advect both channels by one cell with periodic wrap-around. This is a
    /// pure index rotation, so the multiset of stored values (and hence any
    /// order-independent reduction of them) is preserved bit-exactly.
    pub fn stream(&self) -> Self {
        let mut plus = self.plus.clone();
        let mut minus = self.minus.clone();
        plus.rotate_right(1);
        minus.rotate_left(1);
        Self { plus, minus }
    }

    /// Site densities `rho_i = p_+ + p_-`.
    pub fn density(&self) -> DensityProfile {
        DensityProfile {
            rho: self
                .plus
                .iter()
                .zip(&self.minus)
                .map(|(p, m)| p + m)
                .collect(),
        }
    }

    /// Macroscopic flow field `u_i = c (rho_i - 1)`.
    pub fn flow_velocity(&self, grid: &GridSpec) -> Vec<f64> {
        self.plus
            .iter()
            .zip(&self.minus)
            .map(|(p, m)| grid.c() * (p + m - 1.0))
            .collect()
    }

    pub fn total_plus(&self) -> f64 {
        self.plus.iter().sum()
    }

    pub fn total_minus(&self) -> f64 {
        self.minus.iter().sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.total_plus() + self.total_minus()
    }
}

/// Per-site particle number density, `rho_i` in [0, 2].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    rho: Vec<f64>,
}

impl DensityProfile {
    pub fn new(rho: Vec<f64>) -> Result<Self> {
        let mut rho = rho;
        for (site, r) in rho.iter_mut().enumerate() {
            if !(-RANGE_TOL..=2.0 + RANGE_TOL).contains(r) || r.is_nan() {
                return Err(Error::RangeViolation {
                    site,
                    channel: "rho",
                    value: *r,
                });
            }
            *r = r.clamp(0.0, 2.0);
        }
        Ok(Self { rho })
    }

    /// `rho(x) = mean + amplitude * sin(2 pi x / L)`.
    pub fn sine(grid: &GridSpec, mean: f64, amplitude: f64) -> Result<Self> {
        let n = grid.n_sites();
        let k = 2.0 * std::f64::consts::PI / grid.length();
        Self::new(
            (0..n)
                .map(|i| mean + amplitude * (k * grid.x(i)).sin())
                .collect(),
        )
    }

    /// Two plateaus: `hi` on the first half of the domain, `lo` on the second.
    pub fn step(grid: &GridSpec, lo: f64, hi: f64) -> Result<Self> {
        let n = grid.n_sites();
        Self::new((0..n).map(|i| if i < n / 2 { hi } else { lo }).collect())
    }

    /// Gaussian bump of the given width (in length units) centred mid-domain.
    pub fn gaussian(grid: &GridSpec, mean: f64, amplitude: f64, width: f64) -> Result<Self> {
        let n = grid.n_sites();
        let x0 = 0.5 * grid.length();
        Self::new(
            (0..n)
                .map(|i| {
                    let dx = grid.x(i) - x0;
                    mean + amplitude * (-0.5 * (dx / width).powi(2)).exp()
                })
                .collect(),
        )
    }

    pub fn values(&self) -> &[f64] {
        &self.rho
    }

    pub fn n_sites(&self) -> usize {
        self.rho.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.rho.iter().sum()
    }
}

/// Split a density profile into channel occupations. Every `rho_i` must lie
/// strictly inside (0, 2).
pub fn init_from_density(
    rho: &DensityProfile,
    model: &CollisionModel,
    split: SplitMode,
) -> Result<OccupancyField> {
    let n = rho.n_sites();
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for (site, &r) in rho.values().iter().enumerate() {
        if !(r > 0.0 && r < 2.0) {
            return Err(Error::RangeViolation {
                site,
                channel: "rho (must be in (0,2))",
                value: r,
            });
        }
        let (p, m) = match split {
            SplitMode::Symmetric => (0.5 * r, 0.5 * r),
            SplitMode::Equilibrium => {
                let eq = theory::equilibrium(model, r)?;
                (eq.d_plus, eq.d_minus)
            }
        };
        plus.push(p);
        minus.push(m);
    }
    OccupancyField::new(plus, minus)
}

/// Write a snapshot in the shared CSV schema
/// `site,x,p_plus,p_minus,rho,u`, one row per site.
///
/// Floats are printed with Rust's shortest round-trip formatting, so parsing
/// the file back recovers the exact stored values.
pub fn write_snapshot_csv<W: Write>(
    w: &mut W,
    field: &OccupancyField,
    grid: &GridSpec,
) -> io::Result<()> {
    writeln!(w, "site,x,p_plus,p_minus,rho,u")?;
    for i in 0..field.n_sites() {
        let p = field.plus[i];
        let m = field.minus[i];
        let rho = p + m;
        writeln!(
            w,
            "{},{},{},{},{},{}",
            i,
            grid.x(i),
            p,
            m,
            rho,
            grid.c() * (rho - 1.0)
        )?;
    }
    Ok(())
}

/// Snapshot of a density-only profile in the same schema, using the
/// symmetric decomposition `p_+ = p_- = rho/2` for the channel columns.
pub fn write_density_snapshot_csv<W: Write>(
    w: &mut W,
    rho: &DensityProfile,
    grid: &GridSpec,
) -> io::Result<()> {
    writeln!(w, "site,x,p_plus,p_minus,rho,u")?;
    for (i, &r) in rho.values().iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            i,
            grid.x(i),
            0.5 * r,
            0.5 * r,
            r,
            grid.c() * (r - 1.0)
        )?;
    }
    Ok(())
}

/// Read back a snapshot written by [`write_snapshot_csv`].
pub fn read_snapshot_csv<R: BufRead>(r: R) -> Result<OccupancyField> {
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::BadFormat(format!("read error: {e}")))?;
        if lineno == 0 {
            if line.trim() != "site,x,p_plus,p_minus,rho,u" {
                return Err(Error::BadFormat(format!("unexpected header: {line}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(Error::BadFormat(format!(
                "line {}: expected 6 columns",
                lineno + 1
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::BadFormat(format!("line {}: bad float {s:?}", lineno + 1)))
        };
        plus.push(parse(cols[2])?);
        minus.push(parse(cols[3])?);
    }
    OccupancyField::new(plus, minus)
}
