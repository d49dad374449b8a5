//! Experiment configuration: flat `key = value` files with dotted sections,
//! plus command-line overrides in the same key space.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use qlg::micro::Coupling;
use qlg::{CollisionModel, GridSpec, SplitMode};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Mesoscopic,
    Microscopic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Initial {
    Sine {
        mean: f64,
        amplitude: f64,
    },
    Step {
        lo: f64,
        hi: f64,
    },
    Gaussian {
        mean: f64,
        amplitude: f64,
        width: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceMode {
    /// Fit (c_s, nu) to the run, then compare.
    Fitted,
    /// Use the model's nominal transport coefficients.
    Nominal,
    /// Use explicitly configured (c_s, nu).
    Fixed,
    /// Integrate the model's own effective field theory.
    Eft,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceConfig {
    pub enabled: bool,
    pub mode: ReferenceMode,
    pub c_s: f64,
    pub nu: f64,
    pub cfl_safety: f64,
}

/// A fully resolved experiment. `write_kv` serializes it such that parsing
/// the output reproduces the experiment exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: CollisionModel,
    pub grid: GridSpec,
    pub mode: Mode,
    pub ensemble_n: usize,
    pub coupling: Coupling,
    pub initial: Initial,
    pub split: SplitMode,
    pub steps: usize,
    pub snapshot_every: usize,
    pub seed: u64,
    pub dump_every: usize,
    pub reference: ReferenceConfig,
    /// Output directory override; the run command falls back to
    /// `<output root>/<name>` when empty.
    pub output: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "run".into(),
            model: CollisionModel::Quantum {
                theta: std::f64::consts::FRAC_PI_4,
                zeta: 0.0,
                xi: 0.0,
            },
            grid: GridSpec::default_256(),
            mode: Mode::Mesoscopic,
            ensemble_n: 256,
            coupling: Coupling::MeanField,
            initial: Initial::Sine {
                mean: 1.0,
                amplitude: 0.4,
            },
            split: SplitMode::Equilibrium,
            steps: 400,
            snapshot_every: 50,
            seed: 42,
            dump_every: 0,
            reference: ReferenceConfig {
                enabled: false,
                mode: ReferenceMode::Fitted,
                c_s: 0.0,
                nu: 0.0,
                cfl_safety: 0.9,
            },
            output: String::new(),
        }
    }
}

/// Parse `key = value` lines; `#` starts a comment, blank lines ignored.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return err(format!(
                "line {}: expected `key = value`, got {raw:?}",
                lineno + 1
            ));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Parse command-line overrides: `key=value` tokens or `--dotted.key value`
/// pairs (`--set key=value` also works).
pub fn parse_overrides(tokens: &[String]) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    let mut it = tokens.iter().peekable();
    while let Some(tok) = it.next() {
        if tok == "--set" {
            let Some(kv) = it.next() else {
                return err("--set needs key=value");
            };
            let Some((k, v)) = kv.split_once('=') else {
                return err(format!("--set {kv:?}: expected key=value"));
            };
            map.insert(k.trim().into(), v.trim().into());
        } else if let Some(key) = tok.strip_prefix("--") {
            if let Some((k, v)) = key.split_once('=') {
                map.insert(k.trim().into(), v.trim().into());
            } else {
                let Some(v) = it.next() else {
                    return err(format!("flag --{key} needs a value"));
                };
                map.insert(key.trim().into(), v.trim().into());
            }
        } else if let Some((k, v)) = tok.split_once('=') {
            map.insert(k.trim().into(), v.trim().into());
        } else {
            return err(format!(
                "unrecognized override {tok:?} (use key=value or --key value)"
            ));
        }
    }
    Ok(map)
}

struct Fields(BTreeMap<String, String>);

impl Fields {
    fn take(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }

    fn f64(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => match v.parse::<f64>() {
                Ok(x) => Ok(Some(x)),
                Err(_) => err(format!("field {key}: bad number {v:?}")),
            },
        }
    }

    fn usize(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => match v.parse::<usize>() {
                Ok(x) => Ok(Some(x)),
                Err(_) => err(format!("field {key}: bad integer {v:?}")),
            },
        }
    }

    fn u64(&mut self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => match v.parse::<u64>() {
                Ok(x) => Ok(Some(x)),
                Err(_) => err(format!("field {key}: bad integer {v:?}")),
            },
        }
    }
}

impl ExperimentConfig {
    /// Resolve a config from defaults, an optional file, and overrides
    /// (later sources win key-by-key).
    pub fn resolve(
        file: Option<&Path>,
        overrides: &BTreeMap<String, String>,
    ) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
            map.extend(parse_kv(&text)?);
        }
        map.extend(overrides.clone());
        Self::from_map(map)
    }

    pub fn from_map(map: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let mut f = Fields(map);
        let d = Self::default();

        let kind = f.take("model.kind").unwrap_or_else(|| "quantum".into());
        let model = match kind.as_str() {
            "classical" => CollisionModel::ClassicalBl {
                alpha: f.f64("model.alpha")?.unwrap_or(0.707),
            },
            "twobit" => CollisionModel::TwoBit,
            "quantum" => CollisionModel::Quantum {
                theta: f.f64("model.theta")?.unwrap_or(std::f64::consts::FRAC_PI_4),
                zeta: f.f64("model.zeta")?.unwrap_or(0.0),
                xi: f.f64("model.xi")?.unwrap_or(0.0),
            },
            other => return err(format!("field model.kind: unknown model {other:?}")),
        };
        model
            .validate()
            .map_err(|e| ConfigError(format!("field model.*: {e}")))?;

        let n_sites = f.usize("grid.n_sites")?.unwrap_or(256);
        let dx = f.f64("grid.dx")?.unwrap_or(1.0);
        let dt = f.f64("grid.dt")?.unwrap_or(1.0);
        let grid = GridSpec::new(n_sites, dx, dt)
            .map_err(|e| ConfigError(format!("field grid.*: {e}")))?;

        let mode = match f.take("mode").as_deref() {
            None | Some("mesoscopic") => Mode::Mesoscopic,
            Some("microscopic") => Mode::Microscopic,
            Some(other) => return err(format!("field mode: {other:?} (mesoscopic|microscopic)")),
        };
        let ensemble_n = f.usize("ensemble.n")?.unwrap_or(d.ensemble_n);
        if ensemble_n == 0 {
            return err("field ensemble.n: must be >= 1");
        }
        let coupling = match f.take("ensemble.coupling").as_deref() {
            None | Some("mean-field") => Coupling::MeanField,
            Some("independent") => Coupling::Independent,
            Some(other) => {
                return err(format!(
                    "field ensemble.coupling: {other:?} (mean-field|independent)"
                ))
            }
        };

        let initial = match f.take("initial.kind").as_deref().unwrap_or("sine") {
            "sine" => Initial::Sine {
                mean: f.f64("initial.mean")?.unwrap_or(1.0),
                amplitude: f.f64("initial.amplitude")?.unwrap_or(0.4),
            },
            "step" => Initial::Step {
                lo: f.f64("initial.lo")?.unwrap_or(0.8),
                hi: f.f64("initial.hi")?.unwrap_or(1.2),
            },
            "gaussian" => Initial::Gaussian {
                mean: f.f64("initial.mean")?.unwrap_or(1.0),
                amplitude: f.f64("initial.amplitude")?.unwrap_or(0.4),
                width: f.f64("initial.width")?.unwrap_or(8.0),
            },
            other => {
                return err(format!(
                    "field initial.kind: {other:?} (sine|step|gaussian)"
                ))
            }
        };
        match initial {
            Initial::Sine { mean, amplitude }
            | Initial::Gaussian {
                mean, amplitude, ..
            } => {
                if mean - amplitude.abs() <= 0.0 || mean + amplitude.abs() >= 2.0 {
                    return err(format!(
                        "field initial.amplitude: profile leaves (0, 2) (mean {mean}, amplitude {amplitude})"
                    ));
                }
            }
            Initial::Step { lo, hi } => {
                if !(lo > 0.0 && lo < 2.0 && hi > 0.0 && hi < 2.0) {
                    return err(format!(
                        "field initial.lo/hi: levels must lie in (0, 2), got ({lo}, {hi})"
                    ));
                }
            }
        }

        let split = match f.take("initial.split").as_deref() {
            None | Some("equilibrium") => SplitMode::Equilibrium,
            Some("symmetric") => SplitMode::Symmetric,
            Some(other) => {
                return err(format!(
                    "field initial.split: {other:?} (equilibrium|symmetric)"
                ))
            }
        };

        let steps = f.usize("steps")?.unwrap_or(d.steps);
        if steps == 0 {
            return err("field steps: must be >= 1");
        }
        let snapshot_every = f
            .usize("snapshot_every")?
            .unwrap_or_else(|| steps.div_euclid(8).max(1));
        if snapshot_every == 0 || steps % snapshot_every != 0 {
            return err(format!(
                "field snapshot_every: cadence {snapshot_every} must divide steps {steps}"
            ));
        }

        let seed = f.u64("seed")?.unwrap_or(d.seed);
        let dump_every = f.usize("dump_every")?.unwrap_or(0);
        if dump_every != 0 && steps % dump_every != 0 {
            return err(format!(
                "field dump_every: cadence {dump_every} must divide steps {steps}"
            ));
        }

        let ref_enabled = match f.take("reference.enabled").as_deref() {
            None => false,
            Some("true") => true,
            Some("false") => false,
            Some(other) => return err(format!("field reference.enabled: {other:?} (true|false)")),
        };
        let ref_mode = match f.take("reference.mode").as_deref() {
            None | Some("fitted") => ReferenceMode::Fitted,
            Some("nominal") => ReferenceMode::Nominal,
            Some("fixed") => ReferenceMode::Fixed,
            Some("eft") => ReferenceMode::Eft,
            Some(other) => {
                return err(format!(
                    "field reference.mode: {other:?} (fitted|nominal|fixed|eft)"
                ))
            }
        };
        let reference = ReferenceConfig {
            enabled: ref_enabled,
            mode: ref_mode,
            c_s: f.f64("reference.c_s")?.unwrap_or(0.0),
            nu: f.f64("reference.nu")?.unwrap_or(0.0),
            cfl_safety: f.f64("reference.cfl_safety")?.unwrap_or(0.9),
        };
        if reference.enabled
            && reference.mode == ReferenceMode::Nominal
            && matches!(model, CollisionModel::TwoBit)
        {
            return err("field reference.mode: the twobit model has no nominal Burgers coefficients (use eft or fitted)");
        }

        let name = f.take("name").unwrap_or_else(|| model.name().to_string());
        let output = f.take("output").unwrap_or_default();

        if let Some((key, _)) = f.0.iter().next() {
            return err(format!("unknown field {key:?}"));
        }

        Ok(Self {
            name,
            model,
            grid,
            mode,
            ensemble_n,
            coupling,
            initial,
            split,
            steps,
            snapshot_every,
            seed,
            dump_every,
            reference,
            output,
        })
    }

    /// Serialize so that `from_map(parse_kv(out))` reproduces this config.
    pub fn write_kv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "name = {}", self.name)?;
        writeln!(w, "model.kind = {}", self.model.name())?;
        match self.model {
            CollisionModel::ClassicalBl { alpha } => writeln!(w, "model.alpha = {alpha}")?,
            CollisionModel::TwoBit => {}
            CollisionModel::Quantum { theta, zeta, xi } => {
                writeln!(w, "model.theta = {theta}")?;
                writeln!(w, "model.zeta = {zeta}")?;
                writeln!(w, "model.xi = {xi}")?;
            }
        }
        writeln!(w, "grid.n_sites = {}", self.grid.n_sites())?;
        writeln!(w, "grid.dx = {}", self.grid.dx())?;
        writeln!(w, "grid.dt = {}", self.grid.dt())?;
        writeln!(
            w,
            "mode = {}",
            match self.mode {
                Mode::Mesoscopic => "mesoscopic",
                Mode::Microscopic => "microscopic",
            }
        )?;
        writeln!(w, "ensemble.n = {}", self.ensemble_n)?;
        writeln!(
            w,
            "ensemble.coupling = {}",
            match self.coupling {
                Coupling::MeanField => "mean-field",
                Coupling::Independent => "independent",
            }
        )?;
        match self.initial {
            Initial::Sine { mean, amplitude } => {
                writeln!(w, "initial.kind = sine")?;
                writeln!(w, "initial.mean = {mean}")?;
                writeln!(w, "initial.amplitude = {amplitude}")?;
            }
            Initial::Step { lo, hi } => {
                writeln!(w, "initial.kind = step")?;
                writeln!(w, "initial.lo = {lo}")?;
                writeln!(w, "initial.hi = {hi}")?;
            }
            Initial::Gaussian {
                mean,
                amplitude,
                width,
            } => {
                writeln!(w, "initial.kind = gaussian")?;
                writeln!(w, "initial.mean = {mean}")?;
                writeln!(w, "initial.amplitude = {amplitude}")?;
                writeln!(w, "initial.width = {width}")?;
            }
        }
        writeln!(
            w,
            "initial.split = {}",
            match self.split {
                SplitMode::Equilibrium => "equilibrium",
                SplitMode::Symmetric => "symmetric",
            }
        )?;
        writeln!(w, "steps = {}", self.steps)?;
        writeln!(w, "snapshot_every = {}", self.snapshot_every)?;
        writeln!(w, "seed = {}", self.seed)?;
        writeln!(w, "dump_every = {}", self.dump_every)?;
        writeln!(w, "reference.enabled = {}", self.reference.enabled)?;
        writeln!(
            w,
            "reference.mode = {}",
            match self.reference.mode {
                ReferenceMode::Fitted => "fitted",
                ReferenceMode::Nominal => "nominal",
                ReferenceMode::Fixed => "fixed",
                ReferenceMode::Eft => "eft",
            }
        )?;
        writeln!(w, "reference.c_s = {}", self.reference.c_s)?;
        writeln!(w, "reference.nu = {}", self.reference.nu)?;
        writeln!(w, "reference.cfl_safety = {}", self.reference.cfl_safety)?;
        if !self.output.is_empty() {
            writeln!(w, "output = {}", self.output)?;
        }
        Ok(())
    }

    pub fn initial_profile(&self) -> Result<qlg::DensityProfile, qlg::Error> {
        match self.initial {
            Initial::Sine { mean, amplitude } => {
                qlg::DensityProfile::sine(&self.grid, mean, amplitude)
            }
            Initial::Step { lo, hi } => qlg::DensityProfile::step(&self.grid, lo, hi),
            Initial::Gaussian {
                mean,
                amplitude,
                width,
            } => qlg::DensityProfile::gaussian(&self.grid, mean, amplitude, width),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_kv() {
        let c = ExperimentConfig::default();
        let mut buf = Vec::new();
        c.write_kv(&mut buf).unwrap();
        let map = parse_kv(std::str::from_utf8(&buf).unwrap()).unwrap();
        let back = ExperimentConfig::from_map(map).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn overrides_accept_both_syntaxes() {
        let toks: Vec<String> = ["--model.theta", "1.5", "steps=100", "--set", "seed=7"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let map = parse_overrides(&toks).unwrap();
        assert_eq!(map["model.theta"], "1.5");
        assert_eq!(map["steps"], "100");
        assert_eq!(map["seed"], "7");
    }

    #[test]
    fn rejects_unknown_fields_and_bad_cadence() {
        let mut map = BTreeMap::new();
        map.insert("bogus.key".to_string(), "1".to_string());
        let e = ExperimentConfig::from_map(map).unwrap_err();
        assert!(e.0.contains("bogus.key"), "{e}");

        let mut map = BTreeMap::new();
        map.insert("steps".to_string(), "100".to_string());
        map.insert("snapshot_every".to_string(), "33".to_string());
        let e = ExperimentConfig::from_map(map).unwrap_err();
        assert!(e.0.contains("snapshot_every"), "{e}");

        let mut map = BTreeMap::new();
        map.insert("steps".to_string(), "0".to_string());
        assert!(ExperimentConfig::from_map(map).is_err());
    }

    #[test]
    fn single_step_runs_get_a_unit_cadence() {
        let mut map = BTreeMap::new();
        map.insert("steps".to_string(), "1".to_string());
        let c = ExperimentConfig::from_map(map).unwrap();
        assert_eq!(c.snapshot_every, 1); // exactly one post-step snapshot
    }

    #[test]
    fn rejects_profiles_leaving_the_density_range() {
        let mut map = BTreeMap::new();
        map.insert("initial.amplitude".to_string(), "1.2".to_string());
        let e = ExperimentConfig::from_map(map).unwrap_err();
        assert!(e.0.contains("initial.amplitude"), "{e}");
    }

    #[test]
    fn field_name_appears_in_model_errors() {
        let mut map = BTreeMap::new();
        map.insert("model.kind".to_string(), "classical".to_string());
        map.insert("model.alpha".to_string(), "1.5".to_string());
        let e = ExperimentConfig::from_map(map).unwrap_err();
        assert!(e.0.contains("model"), "{e}");
    }
}
