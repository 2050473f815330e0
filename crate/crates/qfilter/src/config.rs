//! Scenario configuration.
//!
//! A config is a JSON object whose keys mirror [`ScenarioConfig`]; every key
//! is optional and unknown keys are rejected. Command-line flags override
//! file values. Example:
//!
//! ```json
//! { "scenario": "dephasing-diffusive", "seed": 7, "dt": 0.001,
//!   "trajectories": 10000, "gamma": 1.0 }
//! ```

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use qfilter_core::fft::is_power_of_two;
use qfilter_core::rng::DEFAULT_SEED;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::schema::{OperatorJson, StateJson};

/// Directory used when neither `--output` nor the config names one.
pub const OUTPUT_DIR_ENV: &str = "QFILTER_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "qfilter-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Cat,
    ItoTables,
    DephasingDiffusive,
    DephasingCounting,
    CentralLimit,
    PositionCollapse,
    AppendixFigure,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Cat => "cat",
            Scenario::ItoTables => "ito-tables",
            Scenario::DephasingDiffusive => "dephasing-diffusive",
            Scenario::DephasingCounting => "dephasing-counting",
            Scenario::CentralLimit => "central-limit",
            Scenario::PositionCollapse => "position-collapse",
            Scenario::AppendixFigure => "appendix-figure",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Option<Scenario>,
    pub seed: u64,
    /// Step size; each scenario has its own default.
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    /// Ensemble size M.
    pub trajectories: Option<usize>,
    /// Worker threads; defaults to the available parallelism.
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Format,
    /// Rows kept per time series.
    pub samples: usize,
    pub hbar: f64,

    /// Atom amplitudes of the cat scenario (normalized before use).
    pub amp0: f64,
    pub amp1: f64,

    /// Dephasing rate: `L = sqrt(gamma) sigma_z` unless `coupling` is given.
    pub gamma: f64,
    pub hamiltonian: Option<OperatorJson>,
    pub coupling: Option<OperatorJson>,
    pub initial_state: Option<StateJson>,
    /// Counting intensity of the dephasing-counting scenario.
    pub nu: f64,
    /// Intensities compared by the central-limit scenario.
    pub nus: Vec<f64>,
    /// Ensemble size per entry of `nus`; overrides `trajectories`.
    pub trajectories_per_nu: Option<Vec<usize>>,

    pub mass: f64,
    /// Observation accuracy.
    pub lambda: f64,
    pub grid_n: usize,
    pub x_min: f64,
    pub x_max: f64,
    /// Initial posterior mean and velocity.
    pub q0: f64,
    pub v0: f64,
    /// Observed path `y(t) = u t - q`.
    pub u: f64,
    pub q: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            scenario: None,
            seed: DEFAULT_SEED,
            dt: None,
            t_end: None,
            trajectories: None,
            workers: None,
            output: None,
            format: Format::Csv,
            samples: 101,
            hbar: 1.0,
            amp0: h,
            amp1: h,
            gamma: 1.0,
            hamiltonian: None,
            coupling: None,
            initial_state: None,
            nu: 1.0,
            nus: vec![1e2, 1e4],
            trajectories_per_nu: None,
            mass: 1.0,
            lambda: 2.0,
            grid_n: 256,
            x_min: -25.0,
            x_max: 25.0,
            q0: 0.0,
            v0: 5.5,
            u: 0.5,
            q: 1.0,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn from_json_str(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| invalid(format!("config: {e}")))
    }

    pub fn from_json_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn scenario(&self) -> CliResult<Scenario> {
        self.scenario.ok_or_else(|| invalid("no scenario given"))
    }

    pub fn dt_or(&self, default: f64) -> f64 {
        self.dt.unwrap_or(default)
    }

    pub fn t_end_or(&self, default: f64) -> f64 {
        self.t_end.unwrap_or(default)
    }

    pub fn trajectories_or(&self, default: usize) -> usize {
        self.trajectories.unwrap_or(default)
    }

    /// `--output`, then the environment variable, then `qfilter-out`.
    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| {
            std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
        })
    }

    /// Checks every parameter the selected scenario reads. Model-level
    /// preconditions (stability, grid resolution, jump probability) are
    /// checked again by the core when the model is built.
    pub fn validate(&self) -> CliResult<()> {
        let scenario = self.scenario()?;
        positive("hbar", self.hbar)?;
        if let Some(dt) = self.dt {
            positive("dt", dt)?;
        }
        if let Some(t) = self.t_end {
            positive("t_end", t)?;
        }
        if let (Some(dt), Some(t)) = (self.dt, self.t_end) {
            if t < dt {
                return Err(invalid(format!("t_end ({t}) must be at least dt ({dt})")));
            }
        }
        if self.trajectories == Some(0) {
            return Err(invalid("trajectories must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(invalid("workers must be at least 1"));
        }
        if self.samples < 2 {
            return Err(invalid("samples must be at least 2"));
        }
        match scenario {
            Scenario::Cat => {
                finite("amp0", self.amp0)?;
                finite("amp1", self.amp1)?;
                if self.amp0 == 0.0 && self.amp1 == 0.0 && self.initial_state.is_none() {
                    return Err(invalid("amp0 and amp1 cannot both vanish"));
                }
            }
            Scenario::ItoTables => positive("lambda", self.lambda)?,
            Scenario::DephasingDiffusive => positive("gamma", self.gamma)?,
            Scenario::DephasingCounting => {
                positive("gamma", self.gamma)?;
                positive("nu", self.nu)?;
            }
            Scenario::CentralLimit => {
                positive("gamma", self.gamma)?;
                if self.nus.is_empty() {
                    return Err(invalid("nus must list at least one intensity"));
                }
                for (i, nu) in self.nus.iter().enumerate() {
                    positive("nus", *nu)?;
                    if i > 0 && *nu <= self.nus[i - 1] {
                        return Err(invalid("nus must be strictly increasing"));
                    }
                }
                if let Some(per) = &self.trajectories_per_nu {
                    if per.len() != self.nus.len() || per.contains(&0) {
                        return Err(invalid("trajectories_per_nu needs one positive entry per element of nus"));
                    }
                }
            }
            Scenario::PositionCollapse | Scenario::AppendixFigure => {
                positive("mass", self.mass)?;
                positive("lambda", self.lambda)?;
                for (name, v) in [("q0", self.q0), ("v0", self.v0), ("u", self.u), ("q", self.q)] {
                    finite(name, v)?;
                }
                if scenario == Scenario::PositionCollapse {
                    if !is_power_of_two(self.grid_n) || self.grid_n < 4 {
                        return Err(invalid(format!("grid_n must be a power of two >= 4, got {}", self.grid_n)));
                    }
                    if !(self.x_min < self.x_max) || !self.x_min.is_finite() || !self.x_max.is_finite() {
                        return Err(invalid("x_min must be below x_max"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Flags shared by `run` and `verify`; each one overrides the config file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Scenario to run (alternative to the positional argument).
    #[arg(long = "scenario", value_enum)]
    pub scenario: Option<Scenario>,
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Ensemble size M.
    #[arg(short = 'M', long)]
    pub trajectories: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory (default: $QFILTER_OUTPUT_DIR or ./qfilter-out).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub amp0: Option<f64>,
    #[arg(long)]
    pub amp1: Option<f64>,
}

impl Overrides {
    /// Loads the config file (if any), applies the flags and validates.
    pub fn resolve(&self, positional: Option<Scenario>) -> CliResult<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::from_json_file(path)?,
            None => ScenarioConfig::default(),
        };
        if let (Some(a), Some(b)) = (positional, self.scenario) {
            if a != b {
                return Err(invalid(format!("scenario given twice: {} and {}", a.name(), b.name())));
            }
        }
        if let Some(s) = positional.or(self.scenario) {
            cfg.scenario = Some(s);
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if self.dt.is_some() {
            cfg.dt = self.dt;
        }
        if self.t_end.is_some() {
            cfg.t_end = self.t_end;
        }
        if self.trajectories.is_some() {
            cfg.trajectories = self.trajectories;
            cfg.trajectories_per_nu = None;
        }
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        if self.output.is_some() {
            cfg.output = self.output.clone();
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        if let Some(v) = self.amp0 {
            cfg.amp0 = v;
        }
        if let Some(v) = self.amp1 {
            cfg.amp1 = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_keys_are_optional() {
        let cfg = ScenarioConfig::from_json_str(r#"{"scenario": "central-limit", "nus": [10, 1000]}"#).unwrap();
        assert_eq!(cfg.scenario, Some(Scenario::CentralLimit));
        assert_eq!(cfg.nus, vec![10.0, 1000.0]);
        assert_eq!(cfg.seed, DEFAULT_SEED);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ScenarioConfig::from_json_str(r#"{"scenario": "cat", "gama": 1}"#).unwrap_err();
        assert!(matches!(err, CliError::Validation(m) if m.contains("gama")));
    }

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"scenario": "dephasing-diffusive", "seed": 3, "dt": 0.01}"#).unwrap();
        let flags = Overrides { config: Some(path), seed: Some(9), ..Default::default() };
        let cfg = flags.resolve(None).unwrap();
        assert_eq!((cfg.seed, cfg.dt), (9, Some(0.01)));
    }

    #[test]
    fn validation_names_the_parameter() {
        let flags = Overrides { dt: Some(-1.0), ..Default::default() };
        let err = flags.resolve(Some(Scenario::DephasingDiffusive)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("dt"));
        let cfg = ScenarioConfig { scenario: Some(Scenario::PositionCollapse), grid_n: 100, ..Default::default() };
        assert!(cfg.validate().unwrap_err().to_string().contains("grid_n"));
        let missing = Overrides::default().resolve(None).unwrap_err();
        assert!(missing.to_string().contains("scenario"));
    }

    #[test]
    fn missing_config_file_is_io() {
        let flags = Overrides { config: Some("/nonexistent/q.json".into()), ..Default::default() };
        assert_eq!(flags.resolve(Some(Scenario::Cat)).unwrap_err().exit_code(), 3);
    }
}
