//! Explicit finite-difference integration of the macroscopic targets.
//!
//! Two equations are integrated on the same periodic grid as the lattice
//! gas, in density form:
//!
//! * Burgers with prescribed coefficients:
//!   `∂_t ρ + c_s (1-ρ) ∂_x ρ = ν ∂_x² ρ`, whose advective part is the
//!   flux `F(ρ) = c_s (ρ - ρ²/2)`;
//! * the general second-order equation with a model's coefficient
//!   functions from [`crate::theory::eft_coefficients`], whose advective
//!   part is the flux `c Δ(ρ)`.
//!
//! The scheme is first-order upwind for advection (direction from the local
//! sign of the advection speed) with centred differences for the remaining
//! terms. Upwinding keeps shock fronts monotone at the price of a known
//! numerical diffusion `~|a| dx/2 (1 - |a| dt/dx)`, which is why the
//! comparison tooling fits effective coefficients instead of trusting
//! nominal ones. The PDE clock sub-steps each lattice step uniformly so the
//! solution lands exactly on the lattice time stamps.

use crate::collision::CollisionModel;
use crate::error::{Error, Result};
use crate::field::DensityProfile;
use crate::grid::GridSpec;
use crate::theory;

/// Hard cap on sub-steps per lattice step; beyond this the coefficients
/// have effectively diverged and the run is refused.
const SUBSTEP_LIMIT: u64 = 100_000;

#[derive(Debug, Clone)]
pub enum PdeKind {
    Burgers {
        c_s: f64,
        nu: f64,
    },
    /// Integrates the model's own effective field theory.
    GeneralEft {
        model: CollisionModel,
    },
}

#[derive(Debug, Clone)]
pub struct PdeSpec {
    pub kind: PdeKind,
    pub grid: GridSpec,
    /// Safety factor applied to the stability bound, in (0, 1].
    pub cfl_safety: f64,
}

impl PdeSpec {
    pub fn burgers(grid: GridSpec, c_s: f64, nu: f64, cfl_safety: f64) -> Result<Self> {
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::InvalidInput {
                what: "pde.nu",
                value: nu,
                expected: ">= 0",
            });
        }
        if !c_s.is_finite() {
            return Err(Error::InvalidInput {
                what: "pde.c_s",
                value: c_s,
                expected: "finite",
            });
        }
        let spec = Self {
            kind: PdeKind::Burgers { c_s, nu },
            grid,
            cfl_safety,
        };
        spec.check_safety()?;
        Ok(spec)
    }

    pub fn eft(grid: GridSpec, model: CollisionModel, cfl_safety: f64) -> Result<Self> {
        model.validate()?;
        let spec = Self {
            kind: PdeKind::GeneralEft { model },
            grid,
            cfl_safety,
        };
        spec.check_safety()?;
        Ok(spec)
    }

    fn check_safety(&self) -> Result<()> {
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidInput {
                what: "pde.cfl_safety",
                value: self.cfl_safety,
                expected: "in (0, 1]",
            });
        }
        Ok(())
    }
}

/// Trajectory sampled at lattice time stamps.
#[derive(Debug, Clone)]
pub struct PdeSolution {
    /// Sampled times, starting at 0.
    pub times: Vec<f64>,
    pub profiles: Vec<DensityProfile>,
    /// |Σρ(end) - Σρ(0)|.
    pub mass_drift: f64,
    pub total_substeps: u64,
}

impl PdeSolution {
    pub fn last(&self) -> &DensityProfile {
        self.profiles
            .last()
            .expect("solution holds at least the initial profile")
    }
}

/// Integrate for `n_steps` lattice steps, sampling every `snapshot_every`
/// steps (the initial profile is always included). Refuses to run if the
/// stability bound would require more than `100_000` sub-steps per lattice
/// step, reporting the admissible step size.
pub fn solve(
    spec: &PdeSpec,
    rho0: &DensityProfile,
    n_steps: usize,
    snapshot_every: usize,
) -> Result<PdeSolution> {
    spec.check_safety()?;
    let n = spec.grid.n_sites();
    if rho0.n_sites() != n {
        return Err(Error::InvalidInput {
            what: "rho0.n_sites",
            value: rho0.n_sites() as f64,
            expected: "matching grid.n_sites",
        });
    }
    let every = snapshot_every.max(1);
    let dt = spec.grid.dt();
    let mut rho: Vec<f64> = rho0.values().to_vec();
    let mass0: f64 = rho.iter().sum();

    let mut times = vec![0.0];
    let mut profiles = vec![rho0.clone()];
    let mut total_substeps = 0u64;

    for step in 1..=n_steps {
        let dt_adm = admissible_dt(spec, &rho)?;
        let substeps = (dt / dt_adm).ceil().max(1.0);
        if substeps > SUBSTEP_LIMIT as f64 {
            return Err(Error::CflViolation {
                dt,
                dt_admissible: dt_adm,
                substeps_required: substeps as u64,
                substeps_limit: SUBSTEP_LIMIT,
            });
        }
        let substeps = substeps as u64;
        let dt_sub = dt / substeps as f64;
        for _ in 0..substeps {
            advance(spec, &mut rho, dt_sub)?;
        }
        total_substeps += substeps;
        if step % every == 0 {
            times.push(step as f64 * dt);
            profiles.push(DensityProfile::new(rho.clone())?);
        }
    }

    let mass_drift = (rho.iter().sum::<f64>() - mass0).abs();
    Ok(PdeSolution {
        times,
        profiles,
        mass_drift,
        total_substeps,
    })
}

/// Integrate a model's effective field theory (see [`PdeSpec::eft`]).
pub fn solve_eft(
    model: &CollisionModel,
    grid: &GridSpec,
    rho0: &DensityProfile,
    n_steps: usize,
    snapshot_every: usize,
    cfl_safety: f64,
) -> Result<PdeSolution> {
    let spec = PdeSpec::eft(grid.clone(), *model, cfl_safety)?;
    solve(&spec, rho0, n_steps, snapshot_every)
}

fn admissible_dt(spec: &PdeSpec, rho: &[f64]) -> Result<f64> {
    let dx = spec.grid.dx();
    let (max_speed, max_nu) = match &spec.kind {
        PdeKind::Burgers { c_s, nu } => {
            let max_speed = rho
                .iter()
                .map(|r| (c_s * (1.0 - r)).abs())
                .fold(0.0, f64::max);
            (max_speed, *nu)
        }
        PdeKind::GeneralEft { model } => {
            let mut max_speed = 0.0f64;
            let mut max_nu = 0.0f64;
            for (site, &r) in rho.iter().enumerate() {
                let c = eft_at(model, &spec.grid, site, r)?;
                max_speed = max_speed.max(c.advection.abs());
                max_nu = max_nu.max(-c.diffusion);
            }
            (max_speed, max_nu)
        }
    };
    // combined explicit bound: the update stays a convex combination of
    // neighbour values only while (|a| dt/dx + 2 nu dt/dx^2) <= 1. This is
    // stricter than min(dx/|a|, dx^2/2nu) and reduces to each pure bound
    // when the other coefficient vanishes.
    let rate = max_speed / dx + 2.0 * max_nu / (dx * dx);
    if rate <= 0.0 {
        return Ok(spec.grid.dt()); // all coefficients vanish; one idle sub-step
    }
    Ok(spec.cfl_safety / rate)
}

fn eft_at(
    model: &CollisionModel,
    grid: &GridSpec,
    site: usize,
    rho: f64,
) -> Result<theory::EftCoefficients> {
    match theory::eft_coefficients(model, grid, rho) {
        Ok(c) => {
            if c.diffusion > 1e-12 {
                // anti-diffusive coefficients never arise for the three
                // models in-range; refuse rather than integrate garbage
                return Err(Error::EftSingularity {
                    site,
                    rho,
                    lambda2: c.lambda2,
                });
            }
            Ok(c)
        }
        Err(Error::SingularJacobian { lambda2 }) => {
            Err(Error::EftSingularity { site, rho, lambda2 })
        }
        Err(e) => Err(e),
    }
}

fn advance(spec: &PdeSpec, rho: &mut [f64], dt_sub: f64) -> Result<()> {
    let n = rho.len();
    let dx = spec.grid.dx();
    match &spec.kind {
        PdeKind::Burgers { c_s, nu } => {
            let flux_fn = |r: f64| c_s * (r - 0.5 * r * r);
            let mut flux = vec![0.0; n]; // flux[i] is the interface between i and i+1
            for i in 0..n {
                let j = (i + 1) % n;
                let a = c_s * (1.0 - 0.5 * (rho[i] + rho[j]));
                flux[i] = if a >= 0.0 {
                    flux_fn(rho[i])
                } else {
                    flux_fn(rho[j])
                };
            }
            let old = rho.to_vec();
            for i in 0..n {
                let im = (i + n - 1) % n;
                let ip = (i + 1) % n;
                let div = (flux[i] - flux[im]) / dx;
                let lap = (old[ip] - 2.0 * old[i] + old[im]) / (dx * dx);
                rho[i] = old[i] + dt_sub * (-div + nu * lap);
            }
        }
        PdeKind::GeneralEft { model } => {
            let c = spec.grid.c();
            let mut coeff = Vec::with_capacity(n);
            for (site, &r) in rho.iter().enumerate() {
                coeff.push(eft_at(model, &spec.grid, site, r)?);
            }
            let mut flux = vec![0.0; n];
            for i in 0..n {
                let j = (i + 1) % n;
                let a = 0.5 * (coeff[i].advection + coeff[j].advection);
                flux[i] = c * if a >= 0.0 {
                    coeff[i].delta
                } else {
                    coeff[j].delta
                };
            }
            let old = rho.to_vec();
            for i in 0..n {
                let im = (i + n - 1) % n;
                let ip = (i + 1) % n;
                let div = (flux[i] - flux[im]) / dx;
                let grad = (old[ip] - old[im]) / (2.0 * dx);
                let lap = (old[ip] - 2.0 * old[i] + old[im]) / (dx * dx);
                rho[i] = old[i]
                    - dt_sub * (div + coeff[i].grad_sq * grad * grad + coeff[i].diffusion * lap);
            }
        }
    }
    Ok(())
}
