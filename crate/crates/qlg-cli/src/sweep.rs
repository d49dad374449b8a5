//! Parameter sweeps: shot-noise scaling, grid convergence, and the map
//! from Euler angles to fitted transport coefficients.

use std::io::Write;

use anyhow::Result;
use qlg::compare::fit_burgers_coefficients;
use qlg::field::init_from_density;
use qlg::micro::{noise_scaling, MicroMode};
use qlg::{CollisionModel, DensityProfile, GridSpec, SplitMode};

/// Deviation-vs-ensemble-size sweep; the last line records the fitted
/// exponent (expected near -1/2).
pub fn ensemble_noise<W: Write>(
    model: &CollisionModel,
    ns: &[usize],
    steps: usize,
    seeds: &[u64],
    w: &mut W,
) -> Result<()> {
    let grid = GridSpec::default_256();
    let rho0 = DensityProfile::sine(&grid, 1.0, 0.4)?;
    let f0 = init_from_density(&rho0, model, SplitMode::Equilibrium)?;
    let mode = match model {
        CollisionModel::Quantum { .. } => MicroMode::QuantumSampled,
        _ => MicroMode::ClassicalBits,
    };
    let (points, exponent) = noise_scaling(model, &f0, mode, ns, steps, seeds)?;
    writeln!(w, "n_realizations,rms_deviation")?;
    for (n, rms) in &points {
        writeln!(w, "{n},{rms}")?;
    }
    writeln!(w, "# fitted_exponent = {exponent}")?;
    Ok(())
}

/// Lattice-vs-fitted-reference error as the grid refines at fixed physical
/// parameters (domain length, initial profile, physical end time).
pub fn grid_convergence<W: Write>(
    alpha: f64,
    nxs: &[usize],
    t_final: f64,
    w: &mut W,
) -> Result<()> {
    let length = 256.0;
    let model = CollisionModel::ClassicalBl { alpha };
    writeln!(w, "n_sites,dx,steps,mean_rel_l2,c_s_fit,nu_fit")?;
    for &nx in nxs {
        let dx = length / nx as f64;
        let grid = GridSpec::new(nx, dx, dx)?; // c = 1
        let rho0 = DensityProfile::sine(&grid, 1.0, 0.4)?;
        let steps_total = (t_final / grid.dt()).round() as usize;
        let every = (steps_total / 6).max(1);
        let steps_total = every * 6;

        let mut field = init_from_density(&rho0, &model, SplitMode::Equilibrium)?;
        let mut profiles = vec![field.density()];
        for s in 1..=steps_total {
            field = qlg::collision::step(&field, &model)?;
            if s % every == 0 {
                profiles.push(field.density());
            }
        }
        let fit = fit_burgers_coefficients(&grid, &profiles, every, (0.0, 1.6), (0.0, 1.2))?;
        writeln!(
            w,
            "{nx},{dx},{steps_total},{},{},{}",
            fit.objective, fit.c_s, fit.nu
        )?;
    }
    Ok(())
}

/// Fitted sound speed and viscosity versus the gate angle theta (at
/// zeta = xi = 0), alongside the nominal `c cot(theta)`.
pub fn angle_scan<W: Write>(thetas: &[f64], w: &mut W) -> Result<()> {
    let grid = GridSpec::default_256();
    let amp = 0.4;
    let rho0 = DensityProfile::sine(&grid, 1.0, amp)?;
    writeln!(w, "theta,c_s_nominal,c_s_fit,nu_fit,c_s_rel_err")?;
    for &theta in thetas {
        let model = CollisionModel::Quantum {
            theta,
            zeta: 0.0,
            xi: 0.0,
        };
        let c_nom = grid.c() * model.alpha_eff();

        let k = 2.0 * std::f64::consts::PI / grid.length();
        let t_star = 1.0 / (c_nom.abs() * amp * k);
        let t = (0.55 * t_star).clamp(30.0, 900.0);
        let every = ((t / 6.0).floor() as usize).max(5);
        let steps = every * 6;

        let mut field = init_from_density(&rho0, &model, SplitMode::Equilibrium)?;
        let mut profiles = vec![field.density()];
        for s in 1..=steps {
            field = qlg::collision::step(&field, &model)?;
            if s % every == 0 {
                profiles.push(field.density());
            }
        }
        let fit = fit_burgers_coefficients(&grid, &profiles, every, (0.0, 1.6), (0.0, 1.2))?;
        let rel = (fit.c_s - c_nom).abs() / c_nom.abs().max(1e-12);
        writeln!(w, "{theta},{c_nom},{},{},{rel}", fit.c_s, fit.nu)?;
    }
    Ok(())
}
