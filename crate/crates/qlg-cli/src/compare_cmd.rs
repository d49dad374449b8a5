//! Compare two run directories, or a run directory against a freshly
//! fitted reference solution.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use qlg::compare::{compare_series, fit_burgers_coefficients, ComparisonReport};
use qlg::field::read_snapshot_csv;
use qlg::pde::{solve, PdeSpec};
use qlg::{DensityProfile, GridSpec};

use crate::config::parse_kv;

pub struct LoadedRun {
    pub grid: GridSpec,
    pub steps: Vec<usize>,
    pub profiles: Vec<DensityProfile>,
}

pub fn load_run(dir: &Path) -> Result<LoadedRun> {
    let cfg_text = std::fs::read_to_string(dir.join("config.txt")).with_context(|| {
        format!(
            "{} is not a run directory (missing config.txt)",
            dir.display()
        )
    })?;
    let map: BTreeMap<String, String> = parse_kv(&cfg_text)?;
    let get = |k: &str| -> Result<f64> {
        map.get(k)
            .with_context(|| format!("config.txt missing {k}"))?
            .parse::<f64>()
            .with_context(|| format!("bad {k} in config.txt"))
    };
    let grid = GridSpec::new(
        get("grid.n_sites")? as usize,
        get("grid.dx")?,
        get("grid.dt")?,
    )?;

    let mut entries: Vec<(usize, std::path::PathBuf)> = Vec::new();
    for e in std::fs::read_dir(dir.join("snapshots"))? {
        let path = e?.path();
        let name = path
            .file_name()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        if let Some(num) = name
            .strip_prefix("step_")
            .and_then(|s| s.strip_suffix(".csv"))
        {
            entries.push((
                num.parse::<usize>()
                    .with_context(|| format!("bad snapshot name {name}"))?,
                path,
            ));
        }
    }
    entries.sort();
    if entries.is_empty() {
        bail!("{}: no snapshots found", dir.display());
    }
    let mut steps = Vec::new();
    let mut profiles = Vec::new();
    for (step, path) in entries {
        let field = read_snapshot_csv(BufReader::new(File::open(&path)?))?;
        steps.push(step);
        profiles.push(field.density());
    }
    Ok(LoadedRun {
        grid,
        steps,
        profiles,
    })
}

fn print_report<W: Write>(w: &mut W, report: &ComparisonReport) -> Result<()> {
    if let (Some(c_s), Some(nu)) = (report.c_s_fit, report.nu_fit) {
        writeln!(w, "c_s_fit = {c_s}")?;
        writeln!(w, "nu_fit = {nu}")?;
    }
    if let Some(obj) = report.fit_rel_l2 {
        writeln!(w, "fit.mean_rel_l2 = {obj}")?;
    }
    writeln!(w, "max_l2 = {}", report.max_l2())?;
    writeln!(w, "mass_drift = {}", report.mass_drift)?;
    writeln!(w, "time,l2,linf")?;
    for ((t, l2), linf) in report.times.iter().zip(&report.l2).zip(&report.linf) {
        writeln!(w, "{t},{l2},{linf}")?;
    }
    Ok(())
}

/// Time-aligned comparison of the snapshots two runs have in common.
pub fn compare_dirs<W: Write>(a: &Path, b: &Path, w: &mut W) -> Result<()> {
    let ra = load_run(a)?;
    let rb = load_run(b)?;
    if ra.grid != rb.grid {
        bail!("runs use different grids");
    }
    let common: Vec<usize> = ra
        .steps
        .iter()
        .cloned()
        .filter(|s| rb.steps.contains(s))
        .collect();
    if common.is_empty() {
        bail!("runs share no snapshot steps");
    }
    let pick = |run: &LoadedRun, steps: &[usize]| -> Vec<DensityProfile> {
        steps
            .iter()
            .map(|s| run.profiles[run.steps.iter().position(|x| x == s).unwrap()].clone())
            .collect()
    };
    let times: Vec<f64> = common.iter().map(|&s| s as f64 * ra.grid.dt()).collect();
    let report = compare_series(&times, &pick(&ra, &common), &pick(&rb, &common))?;
    print_report(w, &report)
}

/// Fit Burgers coefficients to a run and compare it to the fitted
/// reference.
pub fn compare_fit<W: Write>(dir: &Path, w: &mut W) -> Result<()> {
    let run = load_run(dir)?;
    if run.steps.len() < 2 {
        bail!("need at least two snapshots to fit");
    }
    let every = run.steps[1] - run.steps[0];
    if every == 0 || run.steps.windows(2).any(|w| w[1] - w[0] != every) || run.steps[0] != 0 {
        bail!("snapshots are not uniformly spaced from step 0; cannot fit");
    }
    let fit = fit_burgers_coefficients(&run.grid, &run.profiles, every, (0.0, 1.6), (0.0, 1.2))?;
    let spec = PdeSpec::burgers(run.grid.clone(), fit.c_s, fit.nu, 0.9)?;
    let sol = solve(
        &spec,
        &run.profiles[0],
        every * (run.profiles.len() - 1),
        every,
    )?;
    let times: Vec<f64> = run
        .steps
        .iter()
        .map(|&s| s as f64 * run.grid.dt())
        .collect();
    let mut report = compare_series(&times, &run.profiles, &sol.profiles)?;
    report.c_s_fit = Some(fit.c_s);
    report.nu_fit = Some(fit.nu);
    report.fit_rel_l2 = Some(fit.objective);
    print_report(w, &report)
}
