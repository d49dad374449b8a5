//! Profile norms, time-series comparison, and empirical coefficient fits.

use crate::error::{Error, Result};
use crate::field::DensityProfile;
use crate::grid::GridSpec;
use crate::pde::{solve, PdeSpec};

/// `||a - b||_2 / ||b||_2` over sites.
pub fn relative_l2(a: &DensityProfile, b: &DensityProfile) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.values().iter().zip(b.values()) {
        num += (x - y) * (x - y);
        den += y * y;
    }
    (num / den).sqrt()
}

/// `max|a - b| / max|b|`.
pub fn relative_linf(a: &DensityProfile, b: &DensityProfile) -> f64 {
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for (x, y) in a.values().iter().zip(b.values()) {
        num = num.max((x - y).abs());
        den = den.max(y.abs());
    }
    num / den
}

/// Amplitude of the `mode`-th Fourier component (translation-invariant).
pub fn mode_amplitude(p: &DensityProfile, mode: usize) -> f64 {
    let n = p.n_sites();
    let k = 2.0 * std::f64::consts::PI * mode as f64 / n as f64;
    let mut s = 0.0;
    let mut c = 0.0;
    for (i, &r) in p.values().iter().enumerate() {
        s += r * (k * i as f64).sin();
        c += r * (k * i as f64).cos();
    }
    2.0 * (s * s + c * c).sqrt() / n as f64
}

/// Least-squares slope of `y` against `x`.
pub fn linear_fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in points {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Time-aligned comparison of two profile series.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub times: Vec<f64>,
    pub l2: Vec<f64>,
    pub linf: Vec<f64>,
    /// |mass(end) - mass(start)| of the first series.
    pub mass_drift: f64,
    pub c_s_fit: Option<f64>,
    pub nu_fit: Option<f64>,
    /// Objective value (mean relative L2) at the fitted coefficients.
    pub fit_rel_l2: Option<f64>,
}

impl ComparisonReport {
    pub fn max_l2(&self) -> f64 {
        self.l2.iter().cloned().fold(0.0, f64::max)
    }
}

pub fn compare_series(
    times: &[f64],
    run: &[DensityProfile],
    reference: &[DensityProfile],
) -> Result<ComparisonReport> {
    if run.len() != reference.len() || run.len() != times.len() || run.is_empty() {
        return Err(Error::InvalidInput {
            what: "series length",
            value: run.len() as f64,
            expected: "equal, nonempty snapshot counts",
        });
    }
    let l2 = run
        .iter()
        .zip(reference)
        .map(|(a, b)| relative_l2(a, b))
        .collect();
    let linf = run
        .iter()
        .zip(reference)
        .map(|(a, b)| relative_linf(a, b))
        .collect();
    let mass_drift = (run.last().unwrap().total_mass() - run[0].total_mass()).abs();
    Ok(ComparisonReport {
        times: times.to_vec(),
        l2,
        linf,
        mass_drift,
        c_s_fit: None,
        nu_fit: None,
        fit_rel_l2: None,
    })
}

/// Result of fitting effective Burgers coefficients to a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientFit {
    pub c_s: f64,
    pub nu: f64,
    /// Mean relative L2 over the compared snapshots at the optimum.
    pub objective: f64,
}

/// Fit `(c_s, nu)` so the reference solver started from `profiles[0]`
/// matches the run's snapshots (uniform cadence `snapshot_every`), by
/// coordinate descent with golden-section line searches inside the given
/// ranges. The search stops once a full round improves the objective by
/// less than 1e-3 relative.
pub fn fit_burgers_coefficients(
    grid: &GridSpec,
    profiles: &[DensityProfile],
    snapshot_every: usize,
    c_s_range: (f64, f64),
    nu_range: (f64, f64),
) -> Result<CoefficientFit> {
    if profiles.len() < 2 {
        return Err(Error::InvalidInput {
            what: "profiles.len",
            value: profiles.len() as f64,
            expected: ">= 2 snapshots",
        });
    }
    let objective = |c_s: f64, nu: f64| -> f64 {
        let spec = match PdeSpec::burgers(grid.clone(), c_s, nu, 0.9) {
            Ok(s) => s,
            Err(_) => return f64::INFINITY,
        };
        let n_steps = (profiles.len() - 1) * snapshot_every;
        match solve(&spec, &profiles[0], n_steps, snapshot_every) {
            Ok(sol) => {
                let mut acc = 0.0;
                for (a, b) in profiles[1..].iter().zip(&sol.profiles[1..]) {
                    acc += relative_l2(a, b);
                }
                acc / (profiles.len() - 1) as f64
            }
            Err(_) => f64::INFINITY,
        }
    };

    let mut c_s = 0.5 * (c_s_range.0 + c_s_range.1);
    let mut nu = 0.5 * (nu_range.0 + nu_range.1);
    let mut best = objective(c_s, nu);
    for _round in 0..4 {
        let (c_new, f1) = golden_min(|x| objective(x, nu), c_s_range.0, c_s_range.1);
        c_s = c_new;
        let (nu_new, f2) = golden_min(|x| objective(c_s, x), nu_range.0, nu_range.1);
        nu = nu_new;
        let improved = best - f2.min(f1);
        let done = improved < 1e-3 * best.max(1e-30);
        best = best.min(f1).min(f2);
        if done {
            break;
        }
    }
    Ok(CoefficientFit {
        c_s,
        nu,
        objective: best,
    })
}

/// Golden-section minimum after a coarse bracketing scan; tolerant of mild
/// non-unimodality at the scan resolution.
fn golden_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> (f64, f64) {
    const SCAN: usize = 9;
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    let at = |i: usize| lo + (hi - lo) * i as f64 / (SCAN - 1) as f64;
    for i in 0..SCAN {
        let v = f(at(i));
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut a = at(best_i.saturating_sub(1));
    let mut b = at((best_i + 1).min(SCAN - 1));
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..40 {
        if (b - a).abs() < 1e-4 * (hi - lo).abs() {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
