//! Experiment configuration: command-line flags layered over an optional
//! TOML file (`[model]`, `[simulate]`, `[tail]`, `[hittime]`, `[constants]`
//! tables with the flag names in snake case). Flags win.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use super::{config_err, CliError};
use crate::birth_death::{bd_envelope, BDSpec, DEFAULT_EVENT_BUDGET};
use crate::envelope::RateEnvelope;
use crate::queues::{gig1_envelope, mmm_envelope, Dist, GiG1Spec, MMmSpec};
use crate::regen::{DeterministicCycles, TimeGrid};
use crate::rng::DEFAULT_MASTER_SEED;

/// Field-wise `flag.or(file)` for structs made only of `Option`s.
macro_rules! layer {
    ($ty:ident { $($f:ident),* $(,)? }) => {
        impl $ty {
            pub fn layered(self, file: Option<$ty>) -> $ty {
                let file = file.unwrap_or_default();
                $ty { $($f: self.$f.or(file.$f)),* }
            }
        }
    };
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelArgs {
    /// Model id: mm1, md1, gig1, mmm, bd or det.
    #[arg(long)]
    #[serde(rename = "id")]
    pub model: Option<String>,
    /// Arrival rate (mm1, md1, mmm) or per-capita birth rate (bd).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Service rate (mm1, mmm) or per-capita death rate (bd).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Immigration rate (bd).
    #[arg(long = "a")]
    pub a: Option<f64>,
    /// Number of servers (mmm).
    #[arg(long)]
    pub servers: Option<u32>,
    /// Deterministic service time (md1).
    #[arg(long)]
    pub service_time: Option<f64>,
    /// Interarrival law for gig1, e.g. exp:0.5, det:2, uniform:1:3, erlang:2:1, weibull:2:1.
    #[arg(long)]
    pub arrival: Option<String>,
    /// Service law for gig1, same syntax as --arrival.
    #[arg(long)]
    pub service: Option<String>,
    /// Cycle length (det).
    #[arg(long)]
    pub duration: Option<f64>,
    /// Cycle maximum (det).
    #[arg(long)]
    pub value: Option<f64>,
}

layer!(ModelArgs { model, lambda, mu, a, servers, service_time, arrival, service, duration, value });

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateArgs {
    /// Horizon of each replica.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// First checkpoint time.
    #[arg(long)]
    pub t_min: Option<f64>,
    /// Ratio of the geometric checkpoint grid.
    #[arg(long)]
    pub grid_ratio: Option<f64>,
    #[arg(long)]
    pub replicas: Option<u64>,
    /// Master seed; replica r uses stream r.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Where to write run metadata (JSON); stderr if absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

layer!(SimulateArgs { t_max, t_min, grid_ratio, replicas, seed, output, summary, format });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailArgs {
    #[arg(long)]
    pub n_min: Option<u64>,
    #[arg(long)]
    pub n_max: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

layer!(TailArgs { n_min, n_max, output, format });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HittimeArgs {
    /// Target level of the hitting time.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub replicas: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial state of every replica.
    #[arg(long)]
    pub start: Option<u64>,
    /// Cap on the projected total number of simulated events.
    #[arg(long)]
    pub budget: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

layer!(HittimeArgs { n, replicas, seed, start, budget, output, summary });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsArgs {
    /// Seed for constants that need a Monte Carlo estimate.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

layer!(ConstantsArgs { seed, output });

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<ModelArgs>,
    pub simulate: Option<SimulateArgs>,
    pub tail: Option<TailArgs>,
    pub hittime: Option<HittimeArgs>,
    pub constants: Option<ConstantsArgs>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| config_err(format!("bad config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// A validated model.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    GiG1 { id: &'static str, spec: GiG1Spec },
    MMm(MMmSpec),
    BirthDeath(BDSpec),
    Deterministic(DeterministicCycles),
}

fn need<T>(v: Option<T>, name: &str, model: &str) -> Result<T, CliError> {
    v.ok_or_else(|| config_err(format!("model {model} needs --{}", name.replace('_', "-"))))
}

impl Model {
    pub fn from_args(m: &ModelArgs) -> Result<Self, CliError> {
        let id = m.model.as_deref().ok_or_else(|| config_err("no model given (--model)"))?;
        let model = match id {
            "mm1" => Model::GiG1 {
                id: "mm1",
                spec: GiG1Spec::mm1(need(m.lambda, "lambda", id)?, need(m.mu, "mu", id)?)?,
            },
            "md1" => Model::GiG1 {
                id: "md1",
                spec: GiG1Spec::md1(need(m.lambda, "lambda", id)?, need(m.service_time, "service_time", id)?)?,
            },
            "gig1" => {
                let arrival: Dist = need(m.arrival.as_deref(), "arrival", id)?.parse()?;
                let service: Dist = need(m.service.as_deref(), "service", id)?.parse()?;
                Model::GiG1 {
                    id: "gig1",
                    spec: GiG1Spec::new(arrival, service)?,
                }
            }
            "mmm" => Model::MMm(MMmSpec::new(
                need(m.lambda, "lambda", id)?,
                need(m.mu, "mu", id)?,
                need(m.servers, "servers", id)?,
            )?),
            "bd" => Model::BirthDeath(BDSpec::new(need(m.lambda, "lambda", id)?, need(m.mu, "mu", id)?, need(m.a, "a", id)?)?),
            "det" => {
                let duration = need(m.duration, "duration", id)?;
                let value = m.value.unwrap_or(0.0);
                if !(duration > 0.0 && duration.is_finite()) || !value.is_finite() {
                    return Err(config_err("det needs a positive finite --duration and a finite --value"));
                }
                Model::Deterministic(DeterministicCycles { duration, value })
            }
            other => return Err(config_err(format!("unknown model '{other}' (mm1, md1, gig1, mmm, bd, det)"))),
        };
        Ok(model)
    }

    pub fn id(&self) -> &'static str {
        match self {
            Model::GiG1 { id, .. } => id,
            Model::MMm(_) => "mmm",
            Model::BirthDeath(_) => "bd",
            Model::Deterministic(_) => "det",
        }
    }

    pub fn params(&self) -> Value {
        match self {
            Model::GiG1 { spec, .. } => json!({
                "arrival": spec.interarrival.to_string(),
                "service": spec.service.to_string(),
                "rho": spec.rho(),
            }),
            Model::MMm(s) => json!({ "lambda": s.lambda, "mu": s.mu, "servers": s.servers, "rho": s.rho() }),
            Model::BirthDeath(s) => json!({ "lambda": s.lambda, "mu": s.mu, "a": s.a, "rho": s.rho() }),
            Model::Deterministic(d) => json!({ "duration": d.duration, "value": d.value }),
        }
    }

    /// Envelope used to normalise the running maximum.
    pub fn envelope(&self) -> Result<RateEnvelope, CliError> {
        Ok(match self {
            Model::GiG1 { spec, .. } => gig1_envelope(spec)?,
            Model::MMm(s) => mmm_envelope(s)?,
            Model::BirthDeath(s) => bd_envelope(s)?,
            // the maximum is constant; any envelope gives a well-defined smoke run
            Model::Deterministic(_) => RateEnvelope::linear(1.0)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub model: Model,
    pub t_max: f64,
    pub grid: TimeGrid,
    pub replicas: u64,
    pub seed: u64,
    pub format: Format,
}

pub const DEFAULT_T_MAX: f64 = 1e6;

impl SimulateConfig {
    pub fn resolve(model: &ModelArgs, run: &SimulateArgs) -> Result<Self, CliError> {
        let grid = TimeGrid {
            t_min: run.t_min.unwrap_or(TimeGrid::default().t_min),
            ratio: run.grid_ratio.unwrap_or(TimeGrid::default().ratio),
        };
        let e_e = std::f64::consts::E.exp();
        if !(grid.ratio > 1.0) || !(grid.t_min > e_e) || !grid.t_min.is_finite() {
            return Err(config_err(format!(
                "grid needs t_min > e^e and ratio > 1 (got {}, {})",
                grid.t_min, grid.ratio
            )));
        }
        let t_max = run.t_max.unwrap_or(DEFAULT_T_MAX);
        if !(t_max > grid.t_min) || !t_max.is_finite() {
            return Err(config_err(format!("t_max = {t_max} must be finite and > t_min = {}", grid.t_min)));
        }
        let replicas = run.replicas.unwrap_or(1);
        if replicas == 0 {
            return Err(config_err("replicas must be >= 1"));
        }
        Ok(Self {
            model: Model::from_args(model)?,
            t_max,
            grid,
            replicas,
            seed: run.seed.unwrap_or(DEFAULT_MASTER_SEED),
            format: run.format.unwrap_or_default(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct TailConfig {
    pub model: Model,
    pub n_min: u64,
    pub n_max: u64,
    pub format: Format,
}

impl TailConfig {
    pub fn resolve(model: &ModelArgs, run: &TailArgs) -> Result<Self, CliError> {
        let n_min = run.n_min.unwrap_or(0);
        let n_max = run.n_max.unwrap_or(200);
        if n_min > n_max {
            return Err(config_err(format!("n_min = {n_min} exceeds n_max = {n_max}")));
        }
        Ok(Self {
            model: Model::from_args(model)?,
            n_min,
            n_max,
            format: run.format.unwrap_or_default(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct HittimeConfig {
    pub spec: BDSpec,
    pub n: u64,
    pub replicas: u64,
    pub seed: u64,
    pub start: u64,
    pub budget: f64,
}

impl HittimeConfig {
    pub fn resolve(model: &ModelArgs, run: &HittimeArgs) -> Result<Self, CliError> {
        let Model::BirthDeath(spec) = Model::from_args(model)? else {
            return Err(config_err("hittime is defined for the birth-death model only (--model bd)"));
        };
        let n = run.n.ok_or_else(|| config_err("hittime needs --n"))?;
        if n < 2 {
            return Err(config_err(format!("--n must be >= 2, got {n}")));
        }
        let replicas = run.replicas.unwrap_or(1000);
        if replicas == 0 {
            return Err(config_err("replicas must be >= 1"));
        }
        let budget = run.budget.unwrap_or(DEFAULT_EVENT_BUDGET);
        if !(budget > 0.0) {
            return Err(config_err("budget must be positive"));
        }
        Ok(Self {
            spec,
            n,
            replicas,
            seed: run.seed.unwrap_or(DEFAULT_MASTER_SEED),
            start: run.start.unwrap_or(0),
            budget,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = FileConfig::parse(
            r#"
            [model]
            id = "bd"
            lambda = 0.5
            mu = 1.0
            a = 0.5

            [simulate]
            t_max = 1e5
            replicas = 3
            "#,
        )
        .unwrap();
        let flags = SimulateArgs { replicas: Some(7), ..Default::default() };
        let run = flags.layered(file.simulate.clone());
        let model = ModelArgs::default().layered(file.model.clone());
        let cfg = SimulateConfig::resolve(&model, &run).unwrap();
        assert_eq!(cfg.replicas, 7);
        assert_eq!(cfg.t_max, 1e5);
        assert_eq!(cfg.seed, DEFAULT_MASTER_SEED);
        assert_eq!(cfg.model.id(), "bd");
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(FileConfig::parse("[model]\nfoo = 1\n").is_err());
        let m = ModelArgs { model: Some("mm1".into()), lambda: Some(1.0), mu: Some(1.0), ..Default::default() };
        let err = Model::from_args(&m).unwrap_err();
        assert_eq!(err.exit_code(), super::super::EXIT_CONFIG);
        let m = ModelArgs { model: Some("mm1".into()), lambda: Some(0.5), ..Default::default() };
        assert!(Model::from_args(&m).is_err());
        let m = ModelArgs { model: Some("mm1".into()), lambda: Some(0.5), mu: Some(1.0), ..Default::default() };
        let bad_grid = SimulateArgs { grid_ratio: Some(1.0), ..Default::default() };
        assert!(SimulateConfig::resolve(&m, &bad_grid).is_err());
        let zero = SimulateArgs { replicas: Some(0), ..Default::default() };
        assert!(SimulateConfig::resolve(&m, &zero).is_err());
        assert!(HittimeConfig::resolve(&m, &HittimeArgs { n: Some(5), ..Default::default() }).is_err());
    }

    #[test]
    fn gig1_from_strings() {
        let m = ModelArgs {
            model: Some("gig1".into()),
            arrival: Some("uniform:1:3".into()),
            service: Some("erlang:2:2".into()),
            ..Default::default()
        };
        let Model::GiG1 { spec, .. } = Model::from_args(&m).unwrap() else { panic!() };
        assert!((spec.rho() - 0.5).abs() < 1e-15);
    }
}
