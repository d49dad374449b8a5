//! Execute one experiment and write its run directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use qlg::compare::{self, fit_burgers_coefficients, mode_amplitude, ComparisonReport};
use qlg::field::{init_from_density, write_snapshot_csv};
use qlg::micro::{write_ensemble_dump, BitEnsemble, EnsembleSpec, MicroMode};
use qlg::pde::{solve, solve_eft, PdeSpec};
use qlg::theory::TheoryReport;
use qlg::{CollisionModel, DensityProfile, OccupancyField};

use crate::config::{ExperimentConfig, Mode, ReferenceMode};

pub struct RunOutput {
    pub dir: PathBuf,
    pub times: Vec<f64>,
    pub profiles: Vec<DensityProfile>,
    pub comparison: Option<ComparisonReport>,
}

pub fn run(config: &ExperimentConfig, output_root: &Path) -> Result<RunOutput> {
    let dir = if config.output.is_empty() {
        output_root.join(&config.name)
    } else {
        PathBuf::from(&config.output)
    };
    fs::create_dir_all(dir.join("snapshots"))
        .with_context(|| format!("creating run directory {}", dir.display()))?;

    // provenance first: a run directory always explains itself
    {
        let mut f = BufWriter::new(File::create(dir.join("config.txt"))?);
        config.write_kv(&mut f)?;
    }
    {
        let report = TheoryReport::new(&config.model, &config.grid, 99)?;
        let mut f = BufWriter::new(File::create(dir.join("provenance.txt"))?);
        writeln!(f, "# resolved configuration")?;
        writeln!(f, "version = {}", env!("CARGO_PKG_VERSION"))?;
        config.write_kv(&mut f)?;
        writeln!(f, "\n# model theory")?;
        report.write_kv(&mut f)?;
        drop(f);
        let mut f = BufWriter::new(File::create(dir.join("theory_table.csv"))?);
        report.write_table_csv(&mut f)?;
    }

    let rho0 = config.initial_profile()?;
    let f0 = init_from_density(&rho0, &config.model, config.split)?;
    let (times, profiles) = match config.mode {
        Mode::Mesoscopic => run_mesoscopic(config, &dir, &f0)?,
        Mode::Microscopic => run_microscopic(config, &dir, &f0)?,
    };

    write_series(&dir, &times, &profiles)?;
    let comparison = match config.reference.enabled {
        true => Some(write_comparison(config, &dir, &times, &profiles)?),
        false => None,
    };
    write_plot_script(&dir, config, &times)?;

    Ok(RunOutput {
        dir,
        times,
        profiles,
        comparison,
    })
}

fn snapshot_path(dir: &Path, step: usize) -> PathBuf {
    dir.join("snapshots").join(format!("step_{step:07}.csv"))
}

fn write_snapshot(
    config: &ExperimentConfig,
    dir: &Path,
    step: usize,
    field: &OccupancyField,
) -> Result<()> {
    let mut f = BufWriter::new(File::create(snapshot_path(dir, step))?);
    write_snapshot_csv(&mut f, field, &config.grid)?;
    Ok(())
}

fn run_mesoscopic(
    config: &ExperimentConfig,
    dir: &Path,
    f0: &OccupancyField,
) -> Result<(Vec<f64>, Vec<DensityProfile>)> {
    let mut field = f0.clone();
    let mut times = vec![0.0];
    let mut profiles = vec![field.density()];
    write_snapshot(config, dir, 0, &field)?;
    for s in 1..=config.steps {
        field = qlg::collision::step(&field, &config.model)?;
        if s % config.snapshot_every == 0 {
            write_snapshot(config, dir, s, &field)?;
            times.push(s as f64 * config.grid.dt());
            profiles.push(field.density());
        }
    }
    Ok((times, profiles))
}

fn run_microscopic(
    config: &ExperimentConfig,
    dir: &Path,
    f0: &OccupancyField,
) -> Result<(Vec<f64>, Vec<DensityProfile>)> {
    let mode = match config.model {
        CollisionModel::Quantum { .. } => MicroMode::QuantumSampled,
        _ => MicroMode::ClassicalBits,
    };
    let spec = EnsembleSpec {
        n_realizations: config.ensemble_n,
        master_seed: config.seed,
        mode,
        coupling: config.coupling,
    };
    let mut ens = BitEnsemble::sample_from_field(f0, spec)?;
    let mut estimate = ens.ensemble_average();
    let mut times = vec![0.0];
    let mut profiles = vec![estimate.density()];
    write_snapshot(config, dir, 0, &estimate)?;
    if config.dump_every != 0 {
        fs::create_dir_all(dir.join("dumps"))?;
        dump(dir, &ens)?;
    }
    for s in 1..=config.steps {
        estimate = ens.advance(&config.model, &estimate)?;
        if s % config.snapshot_every == 0 {
            write_snapshot(config, dir, s, &estimate)?;
            times.push(s as f64 * config.grid.dt());
            profiles.push(estimate.density());
        }
        if config.dump_every != 0 && s % config.dump_every == 0 {
            dump(dir, &ens)?;
        }
    }
    Ok((times, profiles))
}

fn dump(dir: &Path, ens: &BitEnsemble) -> Result<()> {
    let path = dir
        .join("dumps")
        .join(format!("step_{:07}.qlg1", ens.step_index()));
    let mut f = BufWriter::new(File::create(path)?);
    write_ensemble_dump(&mut f, ens)?;
    Ok(())
}

fn write_series(dir: &Path, times: &[f64], profiles: &[DensityProfile]) -> Result<()> {
    let mut f = BufWriter::new(File::create(dir.join("series.csv"))?);
    writeln!(f, "time,mass,rho_min,rho_max,mode1_amplitude")?;
    for (t, p) in times.iter().zip(profiles) {
        let min = p.values().iter().cloned().fold(f64::INFINITY, f64::min);
        let max = p.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        writeln!(
            f,
            "{},{},{},{},{}",
            t,
            p.total_mass(),
            min,
            max,
            mode_amplitude(p, 1)
        )?;
    }
    Ok(())
}

/// Build the reference trajectory and write `comparison.csv` /
/// `comparison.txt`.
fn write_comparison(
    config: &ExperimentConfig,
    dir: &Path,
    times: &[f64],
    profiles: &[DensityProfile],
) -> Result<ComparisonReport> {
    let every = config.snapshot_every;
    let n_steps = config.steps;
    let grid = &config.grid;
    let (label, c_s, nu, fit_obj, reference) = match config.reference.mode {
        ReferenceMode::Eft => {
            let sol = solve_eft(
                &config.model,
                grid,
                &profiles[0],
                n_steps,
                every,
                config.reference.cfl_safety,
            )?;
            ("eft", f64::NAN, f64::NAN, None, sol.profiles)
        }
        mode => {
            let (c_s, nu, obj) = match mode {
                ReferenceMode::Fitted => {
                    let fit =
                        fit_burgers_coefficients(grid, profiles, every, (0.0, 1.6), (0.0, 1.2))?;
                    (fit.c_s, fit.nu, Some(fit.objective))
                }
                ReferenceMode::Nominal => {
                    let t = qlg::theory::transport_coefficients(&config.model, grid)?;
                    (t.c_s, t.nu, None)
                }
                ReferenceMode::Fixed => (config.reference.c_s, config.reference.nu, None),
                ReferenceMode::Eft => unreachable!(),
            };
            let spec = PdeSpec::burgers(grid.clone(), c_s, nu, config.reference.cfl_safety)?;
            let sol = solve(&spec, &profiles[0], n_steps, every)?;
            let label = match mode {
                ReferenceMode::Fitted => "fitted",
                ReferenceMode::Nominal => "nominal",
                _ => "fixed",
            };
            (label, c_s, nu, obj, sol.profiles)
        }
    };

    // the reference trajectory in the shared snapshot schema
    fs::create_dir_all(dir.join("reference"))?;
    for (profile, t) in reference.iter().zip(times) {
        let step = (t / grid.dt()).round() as usize;
        let mut f = BufWriter::new(File::create(
            dir.join("reference").join(format!("step_{step:07}.csv")),
        )?);
        qlg::field::write_density_snapshot_csv(&mut f, profile, grid)?;
    }

    let mut report = compare::compare_series(times, profiles, &reference)?;
    if label == "fitted" {
        report.c_s_fit = Some(c_s);
        report.nu_fit = Some(nu);
        report.fit_rel_l2 = fit_obj;
    }

    let mut f = BufWriter::new(File::create(dir.join("comparison.csv"))?);
    writeln!(f, "time,l2,linf")?;
    for ((t, l2), linf) in report.times.iter().zip(&report.l2).zip(&report.linf) {
        writeln!(f, "{},{},{}", t, l2, linf)?;
    }
    drop(f);

    let mut f = BufWriter::new(File::create(dir.join("comparison.txt"))?);
    writeln!(f, "reference.mode = {label}")?;
    writeln!(f, "reference.c_s = {c_s}")?;
    writeln!(f, "reference.nu = {nu}")?;
    if let Some(obj) = fit_obj {
        writeln!(f, "fit.mean_rel_l2 = {obj}")?;
    }
    writeln!(f, "max_l2 = {}", report.max_l2())?;
    writeln!(
        f,
        "max_linf = {}",
        report.linf.iter().cloned().fold(0.0, f64::max)
    )?;
    writeln!(f, "mass_drift = {}", report.mass_drift)?;
    if let CollisionModel::Quantum { .. } | CollisionModel::ClassicalBl { .. } = config.model {
        if let Ok(t) = qlg::theory::transport_coefficients(&config.model, grid) {
            writeln!(f, "nominal.c_s = {}", t.c_s)?;
            writeln!(f, "nominal.nu = {}", t.nu)?;
        }
    }
    Ok(report)
}

fn write_plot_script(dir: &Path, config: &ExperimentConfig, times: &[f64]) -> Result<()> {
    let mut f = BufWriter::new(File::create(dir.join("plot.gp"))?);
    writeln!(
        f,
        "# gnuplot script: density snapshots of run {:?}",
        config.name
    )?;
    writeln!(f, "set datafile separator \",\"")?;
    writeln!(f, "set xlabel \"x\"")?;
    writeln!(f, "set ylabel \"rho\"")?;
    writeln!(f, "set key top right")?;
    writeln!(f, "set terminal pngcairo size 900,600")?;
    writeln!(f, "set output \"{}.png\"", config.name)?;
    write!(f, "plot ")?;
    for (i, t) in times.iter().enumerate() {
        let step = (t / config.grid.dt()).round() as usize;
        if i > 0 {
            write!(f, ", \\\n     ")?;
        }
        write!(
            f,
            "\"snapshots/step_{step:07}.csv\" skip 1 using 2:5 with lines title \"t = {t}\""
        )?;
    }
    writeln!(f)?;
    Ok(())
}
