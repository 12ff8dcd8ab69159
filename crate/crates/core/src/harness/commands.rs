//! The `tail`, `simulate`, `hittime`, `constants` and `verify` commands.
//! Each returns its main output and, where relevant, a JSON summary.

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::config::{Format, HittimeConfig, Model, SimulateConfig, TailConfig};
use super::output::{constant, Cell, Table};
use super::{config_err, CliError};
use crate::birth_death::{corollary3_stats, hitting_time_stat, BDSpec, HittingConfig};
use crate::envelope::{lemma5_sum, RateEnvelope};
use crate::error::Result;
use crate::queues::{cramer_gamma, estimate_tail_constant, lindley_cycle, x_rho_root, Dist};
use crate::regen::{resolve_alpha_t, run_cycles, theorem1_trace, AlphaSource, CycleModel, DeterministicCycles, TimeGrid};
use crate::rng::{aux_rng, replica_rng};

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub body: String,
    pub summary: Option<String>,
}

fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialise");
    s.push('\n');
    s
}

/// Largest `n_max` accepted by `tail` (each row is an O(n) sum).
pub const TAIL_N_LIMIT: u64 = 10_000;

/// Exact and asymptotic cycle-maximum tails with the envelope split
/// `−log q(n) = R₀(n) + R₁(n)`.
pub fn cmd_tail(cfg: &TailConfig) -> Result<CommandOutput, CliError> {
    if cfg.n_max > TAIL_N_LIMIT {
        return Err(config_err(format!("n_max is limited to {TAIL_N_LIMIT}")));
    }
    type Row = (f64, f64, f64);
    // (log q_exact, log q_asymptotic, R0) per n
    let row: Box<dyn Fn(u64) -> Result<Row>> = match &cfg.model {
        Model::BirthDeath(spec) => {
            let c = spec.c_constant()?.value;
            let spec = *spec;
            Box::new(move |n| {
                let asym = if n == 0 { f64::NAN } else { spec.log_q_asymptotic(n, c)? };
                let r0 = if n == 0 { f64::NAN } else { spec.r0(n as f64) };
                Ok((spec.log_q_exact(n), asym, r0))
            })
        }
        Model::MMm(spec) => {
            let spec = *spec;
            Box::new(move |n| Ok((-spec.neg_log_tail_exact(n), spec.log_tail_asymptotic(n), -(n as f64) * spec.rho().ln())))
        }
        other => {
            return Err(config_err(format!(
                "tail needs a model with an exact cycle-maximum law (bd or mmm), got {}",
                other.id()
            )))
        }
    };
    let mut table = Table::new(vec!["n", "q_exact", "q_asymptotic", "ratio", "R0", "R1", "local_slope"]);
    let mut prev_log_q = if cfg.n_min == 0 { f64::NAN } else { row(cfg.n_min - 1)?.0 };
    for n in cfg.n_min..=cfg.n_max {
        let (log_q, log_asym, r0) = row(n)?;
        table.push(vec![
            Cell::Int(n),
            Cell::Float(log_q.exp()),
            Cell::Float(log_asym.exp()),
            Cell::Float((log_q - log_asym).exp()),
            Cell::Float(r0),
            Cell::Float(-log_q - r0),
            Cell::Float(prev_log_q - log_q),
        ]);
        prev_log_q = log_q;
    }
    Ok(CommandOutput {
        body: render(&table, cfg.format),
        summary: None,
    })
}

/// Replica rows plus the run metadata that goes into the summary.
fn simulate_model<M: CycleModel + Sync>(
    model: &M,
    env: &RateEnvelope,
    bd: Option<&BDSpec>,
    cfg: &SimulateConfig,
) -> Result<(Table, Map<String, Value>)> {
    let (alpha_t, source) = resolve_alpha_t(model, &mut aux_rng(cfg.seed, 0))?;
    let per_replica: Vec<(Vec<Vec<Cell>>, f64, bool)> = (0..cfg.replicas)
        .into_par_iter()
        .map(|r| {
            let (path, summary) = run_cycles(model, cfg.t_max, cfg.grid, &mut replica_rng(cfg.seed, r))?;
            path.check_invariants()?;
            let stats = theorem1_trace(&path, env, alpha_t)?;
            let extra = bd.map(|s| corollary3_stats(&path, s)).transpose()?;
            let rows = path
                .checkpoints
                .iter()
                .zip(&stats)
                .enumerate()
                .map(|(i, (c, s))| {
                    let mut row = vec![
                        Cell::Int(r),
                        Cell::Float(c.t),
                        Cell::Float(c.xbar),
                        Cell::Int(c.n_cycles),
                        Cell::Float(s.s2),
                        Cell::Float(s.s3),
                    ];
                    if let Some(u) = &extra {
                        row.push(Cell::Float(u[i].u2));
                        row.push(Cell::Float(u[i].u3));
                    }
                    row
                })
                .collect();
            Ok((rows, summary.alpha_t_hat, path.exact))
        })
        .collect::<Result<_>>()?;

    let mut columns = vec!["seed", "t", "xbar", "n_cycles", "s2", "s3"];
    if bd.is_some() {
        columns.extend(["u2", "u3"]);
    }
    let mut table = Table::new(columns);
    let mut exact = true;
    let mut alpha_hat_sum = 0.0;
    for (rows, alpha_hat, ex) in per_replica {
        table.rows.extend(rows);
        alpha_hat_sum += alpha_hat;
        exact &= ex;
    }
    let route = match source {
        AlphaSource::ClosedForm => "closed_form".to_string(),
        AlphaSource::BurnIn => format!("burn_in({} cycles, aux stream 0)", crate::regen::ALPHA_T_BURN_IN),
    };
    let mut constants = Map::new();
    constants.insert("alpha_t".into(), constant(alpha_t, &route));
    constants.insert(
        "alpha_t_hat".into(),
        constant(alpha_hat_sum / cfg.replicas as f64, "mean over replicas of elapsed/cycles"),
    );
    let mut meta = Map::new();
    meta.insert("constants".into(), Value::Object(constants));
    meta.insert("path_mode".into(), json!(if exact { "exact" } else { "bracket" }));
    Ok((table, meta))
}

/// Per-replica running maxima and normalised statistics on the time grid.
pub fn cmd_simulate(cfg: &SimulateConfig) -> Result<CommandOutput, CliError> {
    let env = cfg.model.envelope()?;
    let (table, mut meta) = match &cfg.model {
        Model::GiG1 { spec, .. } => simulate_model(spec, &env, None, cfg)?,
        Model::MMm(spec) => simulate_model(spec, &env, None, cfg)?,
        Model::BirthDeath(spec) => simulate_model(spec, &env, Some(spec), cfg)?,
        Model::Deterministic(d) => simulate_model(d, &env, None, cfg)?,
    };
    if let Some(Value::Object(c)) = meta.get_mut("constants") {
        c.insert("envelope".into(), json!(env.name()));
        c.insert("x0".into(), constant(env.x0(), "analytic"));
        c.insert("r1_bound".into(), constant(env.r1_bound(), "max |R1(n)| over n in [1, 300] (0 if unmeasured)"));
    }
    let mut summary = Map::new();
    summary.insert("model".into(), json!(cfg.model.id()));
    summary.insert("params".into(), cfg.model.params());
    summary.append(&mut meta);
    summary.insert("replicas".into(), json!(cfg.replicas));
    summary.insert("master_seed".into(), json!(cfg.seed));
    summary.insert("t_max".into(), json!(cfg.t_max));
    summary.insert("grid".into(), json!({ "t_min": cfg.grid.t_min, "ratio": cfg.grid.ratio }));
    Ok(CommandOutput {
        body: render(&table, cfg.format),
        summary: Some(pretty(&Value::Object(summary))),
    })
}

/// Scaled birth–death hitting times and their distance to the exponential limit.
pub fn cmd_hittime(cfg: &HittimeConfig) -> Result<CommandOutput, CliError> {
    let spec = &cfg.spec;
    let hc = HittingConfig {
        n: cfg.n,
        replicas: cfg.replicas,
        seed: cfg.seed,
        start: cfg.start,
        event_budget: cfg.budget,
    };
    let sample = hitting_time_stat(spec, &hc)?;
    let mut table = Table::new(vec!["seed", "replica", "raw_time", "scaled_time"]);
    for (i, (raw, scaled)) in sample.raw.iter().zip(&sample.scaled).enumerate() {
        table.push(vec![Cell::Int(cfg.seed), Cell::Int(i as u64), Cell::Float(*raw), Cell::Float(*scaled)]);
    }
    let p0 = spec.p0();
    let summary = json!({
        "model": "bd",
        "params": Model::BirthDeath(*spec).params(),
        "constants": {
            "p0": constant(p0, "stationary series"),
            "a_p0": constant(sample.limit_rate, "a * p0"),
            "C": constant(sample.c_constant, "richardson on n^(a/lambda) beta_n"),
            "scale": constant(sample.scale, "(1/rho - 1) rho^n n^(a/lambda) / C"),
            "alpha_t": constant(spec.alpha_t(), "closed_form 1/(a p0)"),
            "expected_raw_time": constant(spec.expected_hitting_time(cfg.n, cfg.start), "exact first-passage recursion"),
        },
        "n": cfg.n,
        "start": cfg.start,
        "replicas": cfg.replicas,
        "master_seed": cfg.seed,
        "ks_distance": sample.ks_distance,
        "mean_scaled": sample.mean_scaled,
    });
    Ok(CommandOutput {
        body: table.to_csv(),
        summary: Some(pretty(&summary)),
    })
}

/// Cycles used for the Monte Carlo tail constant of GI/G/1 waiting times.
pub const TAIL_CONSTANT_CYCLES: u64 = 100_000;

/// Every model constant with the route used to obtain it.
pub fn cmd_constants(model: &Model, seed: u64) -> Result<CommandOutput, CliError> {
    let mut c = Map::new();
    match model {
        Model::GiG1 { spec, .. } => {
            let rho = spec.rho();
            c.insert("rho".into(), constant(rho, "b/a"));
            let root = cramer_gamma(spec)?;
            c.insert("gamma".into(), constant(root.gamma, "cramer root, doubling + bisection"));
            c.insert("tilted_mean".into(), constant(root.tilted_mean, "central difference of the tilted mgf"));
            if let (Dist::Exponential { rate: lambda }, Dist::Exponential { rate: mu }) = (spec.interarrival, spec.service) {
                c.insert("gamma_closed_form".into(), constant(mu - lambda, "mu - lambda"));
            }
            if let (Dist::Exponential { rate: lambda }, Dist::Deterministic { value: d }) = (spec.interarrival, spec.service) {
                let x = x_rho_root(lambda * d)?;
                c.insert("x_rho".into(), constant(x, "root of e^x = 1 + x/rho"));
                c.insert("gamma_via_x_rho".into(), constant(x / d, "x_rho / d"));
            }
            let (alpha_t, source) = resolve_alpha_t(spec, &mut aux_rng(seed, 0))?;
            c.insert("alpha_t".into(), constant(alpha_t, source.as_str()));
            let mut rng = aux_rng(seed, 1);
            let maxima = (0..TAIL_CONSTANT_CYCLES)
                .map(|_| Ok(lindley_cycle(spec, &mut rng, None)?.sample.cycle_max))
                .collect::<Result<Vec<f64>>>()?;
            // levels where the empirical tail is still well populated
            let grid: Vec<f64> = (1..=8).map(|k| k as f64 / root.gamma).collect();
            if let Some(tc) = estimate_tail_constant(&maxima, root.gamma, &grid) {
                c.insert(
                    "tail_constant".into(),
                    constant(tc, &format!("monte_carlo({TAIL_CONSTANT_CYCLES} cycles): P(max > x) e^(gamma x)")),
                );
            }
            c.insert("x0".into(), constant(0.0, "analytic"));
        }
        Model::MMm(spec) => {
            c.insert("rho".into(), constant(spec.rho(), "lambda/(m mu)"));
            c.insert("gamma".into(), constant(-spec.rho().ln(), "-log rho"));
            c.insert("p0".into(), constant(spec.p0(), "erlang normalisation"));
            c.insert("alpha_t".into(), constant(CycleModel::alpha_t(spec).unwrap_or(f64::NAN), "closed_form 1/(lambda p0)"));
            let env = model.envelope()?;
            c.insert("r1_bound".into(), constant(env.r1_bound(), "max |R1(n)| over n in [1, 300]"));
            c.insert("x0".into(), constant(0.0, "analytic"));
        }
        Model::BirthDeath(spec) => {
            c.insert("rho".into(), constant(spec.rho(), "lambda/mu"));
            c.insert("p0".into(), constant(spec.p0(), "stationary series"));
            let cc = spec.c_constant()?;
            c.insert("C".into(), constant(cc.value, "richardson on n^(a/lambda) beta_n, n = 2^10..2^20"));
            c.insert("C_error".into(), constant(cc.error, "richardson diagonal gap"));
            c.insert("C_harmonic".into(), constant(spec.c_constant_harmonic()?.value, "euler-gamma split of log beta_n"));
            c.insert("alpha_t".into(), constant(spec.alpha_t(), "closed_form 1/(a p0)"));
            c.insert("x0".into(), constant(spec.x0(), "-a/(lambda log rho)"));
            let env = model.envelope()?;
            c.insert("r1_bound".into(), constant(env.r1_bound(), "max |R1(n)| over n in [1, 300]"));
        }
        Model::Deterministic(d) => {
            c.insert("alpha_t".into(), constant(d.duration, "closed_form"));
        }
    }
    let out = json!({
        "model": model.id(),
        "params": model.params(),
        "constants": Value::Object(c),
    });
    Ok(CommandOutput {
        body: pretty(&out),
        summary: None,
    })
}

/// Fast deterministic self-checks; one PASS/FAIL line each.
pub fn cmd_verify() -> Result<CommandOutput, CliError> {
    let mut lines = Vec::new();
    let mut failed = Vec::new();
    let mut check = |name: &str, ok: Result<bool>, detail: String| {
        let pass = matches!(ok, Ok(true));
        lines.push(format!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" }));
        if !pass {
            failed.push(name.to_string());
        }
    };

    let x = x_rho_root(0.5);
    check(
        "x_rho(0.5) solves e^x = 1 + 2x",
        x.clone().map(|x| (x.exp() - 1.0 - 2.0 * x).abs() < 1e-9),
        format!("{x:?}"),
    );
    let g = crate::queues::GiG1Spec::mm1(0.5, 1.0).and_then(|s| cramer_gamma(&s));
    check(
        "M/M/1(0.5, 1) Cramer exponent = 0.5",
        g.clone().map(|r| (r.gamma - 0.5).abs() < 1e-10),
        format!("{:?}", g.map(|r| r.gamma)),
    );
    let bd = BDSpec::new(0.5, 1.0, 0.5)?;
    check("BD q(0) = 1", Ok(bd.q_exact(0) == 1.0), format!("{}", bd.q_exact(0)));
    check("BD q(2) = 3/10", Ok((bd.q_exact(2) - 0.3).abs() < 1e-15), format!("{}", bd.q_exact(2)));
    let c1 = bd.c_constant();
    check(
        "BD C = 1 at a = lambda",
        c1.clone().map(|c| (c.value - 1.0).abs() < 1e-6),
        format!("{c1:?}"),
    );
    let c2 = BDSpec::new(0.5, 1.0, 1.0)?.c_constant();
    check(
        "BD C = 2 at a = 2 lambda",
        c2.clone().map(|c| (c.value - 2.0).abs() < 1e-6),
        format!("{c2:?}"),
    );
    check("BD p0 = 1/2", Ok((bd.p0() - 0.5).abs() < 1e-14), format!("{}", bd.p0()));
    let r200 = bd.q_asymptotic(200).map(|a| bd.q_exact(200) / a);
    check(
        "BD q_exact/q_asymptotic at n = 200 in [0.95, 1.05]",
        r200.clone().map(|r| (0.95..=1.05).contains(&r)),
        format!("{r200:?}"),
    );
    let l5 = lemma5_sum(2.0, 0.0, 200);
    check(
        "geometric sum ratio (p = 2, b = 0, n = 200) = 1",
        l5.clone().map(|s| (s.ratio() - 1.0).abs() < 1e-12),
        format!("{:?}", l5.map(|s| s.ratio())),
    );
    let det = DeterministicCycles { duration: 1.0, value: 1.0 };
    let grid = TimeGrid { t_min: 16.5, ratio: 2.0 };
    let n = run_cycles(&det, 100.0, grid, &mut replica_rng(0, 0)).map(|(p, _)| p.checkpoints[0].n_cycles);
    check("unit cycles give N(16.5) = 16", n.clone().map(|n| n == 16), format!("{n:?}"));

    let body = lines.join("\n") + "\n";
    if failed.is_empty() {
        Ok(CommandOutput { body, summary: None })
    } else {
        Err(CliError::Verify(format!("{}\n{}", body, failed.join(", "))))
    }
}
