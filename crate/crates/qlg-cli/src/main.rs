//! `qlg` — experiments with one-dimensional two-speed lattice gases for the
//! Burgers equation.
//!
//! Exit codes: 0 success, 2 configuration/usage error, 3 numerical-contract
//! violation (conservation or probability range), 4 stability refusal
//! (CFL bound or coefficient singularity).

mod compare_cmd;
mod config;
mod presets;
mod run;
mod sweep;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use config::{parse_overrides, ConfigError, ExperimentConfig};
use qlg::CollisionModel;

#[derive(Parser)]
#[command(
    name = "qlg",
    version,
    about = "Lattice-gas models of the Burgers equation"
)]
struct Cli {
    /// Root directory for run outputs (env: QLG_OUTPUT_ROOT, default `runs`).
    #[arg(long, global = true)]
    output_root: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment from a config file and/or key=value overrides.
    Run(RunArgs),
    /// Compare two run directories, or one run against a fitted reference.
    Compare(CompareArgs),
    /// Parameter sweeps (ensemble-noise, grid-convergence, angle-scan).
    Sweep(SweepArgs),
    /// Run a standard comparison experiment group (fig1 or fig2).
    Preset(PresetArgs),
    /// Print equilibria, Jacobians, transport and EFT coefficients.
    TheoryReport(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file (`key = value` lines, dotted keys).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Overrides: `key=value`, `--dotted.key value`, or `--set key=value`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    overrides: Vec<String>,
}

#[derive(Args)]
struct CompareArgs {
    /// First run directory.
    run_a: PathBuf,
    /// Second run directory; omit with --fit-reference.
    run_b: Option<PathBuf>,
    /// Fit Burgers coefficients to RUN_A and compare against them.
    #[arg(long)]
    fit_reference: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// ensemble-noise | grid-convergence | angle-scan
    kind: String,
    #[command(flatten)]
    model: ModelArgs,
    /// Ensemble sizes for ensemble-noise.
    #[arg(long, value_delimiter = ',', default_value = "16,64,256,1024")]
    ns: Vec<usize>,
    /// Steps per run for ensemble-noise.
    #[arg(long, default_value_t = 32)]
    steps: usize,
    /// Master seeds to pool for ensemble-noise.
    #[arg(long, value_delimiter = ',', default_value = "11,12,13")]
    seeds: Vec<u64>,
    /// Lattice sizes for grid-convergence.
    #[arg(long, value_delimiter = ',', default_value = "128,256,512,1024")]
    nx: Vec<usize>,
    /// Physical end time for grid-convergence.
    #[arg(long, default_value_t = 60.0)]
    t_final: f64,
    /// Gate angles for angle-scan.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "1.0,1.2,0.7853981633974483,1.5"
    )]
    thetas: Vec<f64>,
    /// Write the summary CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PresetArgs {
    /// fig1 | fig2
    which: String,
    /// Override the preset's step count.
    #[arg(long)]
    steps: Option<usize>,
    /// Run the bit-ensemble dynamics instead of the mesoscopic one.
    #[arg(long)]
    microscopic: bool,
    /// Ensemble size for --microscopic.
    #[arg(long, default_value_t = 256)]
    ensemble_n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Density samples across (0.05, 1.95).
    #[arg(long, default_value_t = 99)]
    points: usize,
    /// Also print the sampled coefficient table.
    #[arg(long)]
    table: bool,
    /// Write report.txt and theory_table.csv into this directory.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    /// classical | twobit | quantum
    #[arg(long, default_value = "quantum")]
    model: String,
    #[arg(long, default_value_t = 0.707)]
    alpha: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    theta: f64,
    #[arg(long, default_value_t = 0.0)]
    zeta: f64,
    #[arg(long, default_value_t = 0.0)]
    xi: f64,
}

impl ModelArgs {
    fn to_model(&self) -> Result<CollisionModel, ConfigError> {
        let model = match self.model.as_str() {
            "classical" => CollisionModel::ClassicalBl { alpha: self.alpha },
            "twobit" => CollisionModel::TwoBit,
            "quantum" => CollisionModel::Quantum {
                theta: self.theta,
                zeta: self.zeta,
                xi: self.xi,
            },
            other => return Err(ConfigError(format!("unknown model {other:?}"))),
        };
        model.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(model)
    }
}

fn output_root(cli: &Cli) -> PathBuf {
    cli.output_root
        .clone()
        .or_else(|| std::env::var_os("QLG_OUTPUT_ROOT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(io) = e.downcast_ref::<std::io::Error>() {
                if io.kind() == std::io::ErrorKind::BrokenPipe {
                    return ExitCode::SUCCESS; // stdout consumer went away
                }
            }
            eprintln!("error: {e:#}");
            ExitCode::from(classify(&e))
        }
    }
}

fn classify(e: &anyhow::Error) -> u8 {
    if let Some(engine) = e.downcast_ref::<qlg::Error>() {
        return match engine {
            qlg::Error::CflViolation { .. } | qlg::Error::EftSingularity { .. } => 4,
            _ => 3,
        };
    }
    if e.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    1
}

fn dispatch(cli: &Cli) -> anyhow::Result<()> {
    let root = output_root(cli);
    match &cli.cmd {
        Cmd::Run(args) => {
            let overrides = parse_overrides(&args.overrides)?;
            let cfg = ExperimentConfig::resolve(args.config.as_deref(), &overrides)?;
            let out = run::run(&cfg, &root)?;
            println!(
                "run {:?}: {} snapshots in {}",
                cfg.name,
                out.profiles.len(),
                out.dir.display()
            );
            if let Some(rep) = &out.comparison {
                if let (Some(c_s), Some(nu)) = (rep.c_s_fit, rep.nu_fit) {
                    println!("fitted coefficients: c_s = {c_s:.6}, nu = {nu:.6}");
                }
                println!("max rel L2 vs reference = {:.4}%", 100.0 * rep.max_l2());
            }
            Ok(())
        }
        Cmd::Compare(args) => {
            let mut stdout = std::io::stdout().lock();
            match (&args.run_b, args.fit_reference) {
                (Some(b), false) => compare_cmd::compare_dirs(&args.run_a, b, &mut stdout),
                (None, true) => compare_cmd::compare_fit(&args.run_a, &mut stdout),
                _ => Err(ConfigError("give either RUN_B or --fit-reference".into()).into()),
            }
        }
        Cmd::Sweep(args) => {
            let mut out: Box<dyn Write> = match &args.output {
                Some(path) => Box::new(std::fs::File::create(path)?),
                None => Box::new(std::io::stdout().lock()),
            };
            match args.kind.as_str() {
                "ensemble-noise" => sweep::ensemble_noise(
                    &args.model.to_model()?,
                    &args.ns,
                    args.steps,
                    &args.seeds,
                    &mut out,
                ),
                "grid-convergence" => {
                    sweep::grid_convergence(args.model.alpha, &args.nx, args.t_final, &mut out)
                }
                "angle-scan" => sweep::angle_scan(&args.thetas, &mut out),
                other => Err(ConfigError(format!("unknown sweep {other:?}")).into()),
            }
        }
        Cmd::Preset(args) => {
            std::fs::create_dir_all(&root)?;
            let opts = presets::PresetOptions {
                steps: args.steps,
                microscopic: args.microscopic,
                ensemble_n: args.ensemble_n,
                seed: args.seed,
            };
            presets::preset(&args.which, &root, &opts)
        }
        Cmd::TheoryReport(args) => {
            let model = args.model.to_model()?;
            let report =
                qlg::theory::TheoryReport::new(&model, &qlg::GridSpec::default_256(), args.points)?;
            let mut stdout = std::io::stdout().lock();
            report.write_kv(&mut stdout)?;
            if args.table {
                writeln!(stdout)?;
                report.write_table_csv(&mut stdout)?;
            }
            if let Some(dir) = &args.output {
                std::fs::create_dir_all(dir)?;
                let mut f = std::fs::File::create(dir.join("report.txt"))?;
                report.write_kv(&mut f)?;
                let mut f = std::fs::File::create(dir.join("theory_table.csv"))?;
                report.write_table_csv(&mut f)?;
            }
            Ok(())
        }
    }
}
