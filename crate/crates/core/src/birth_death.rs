//! Linear-growth birth–death process with immigration: rates
//! `λ_n = λn + a`, `μ_n = μn`.

use std::sync::Arc;

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::envelope::{l2, l3, RateEnvelope};
use crate::error::{domain, Error, Result};
use crate::numeric::{ks_distance, richardson, KahanSum, LogSumExp};
use crate::regen::{CycleModel, CycleSample, MaxPath, Record};
use crate::rng::replica_rng;

/// Indices at or below this use a compensated linear-domain sum.
const LINEAR_SUM_MAX: u64 = 50;

/// Event cap for one simulated cycle or hitting-time replica.
pub const EVENT_LIMIT: u64 = 1_000_000_000;

/// Default cap on the projected total event count of a hitting-time campaign.
pub const DEFAULT_EVENT_BUDGET: f64 = 1e9;

/// `−log q(n)` where `q(n) = 1/Σ_{k=0}^n α_k` and `log α_k = Σ_{i=1}^k log_ratio(i)`.
///
/// This is the probability that a birth–death chain started at 1 reaches
/// `n + 1` before 0, with `log_ratio(i) = log(μ_i/λ_i)`.
pub fn escape_log_tail<F: Fn(u64) -> f64>(n: u64, log_ratio: F) -> f64 {
    let mut log_alpha = 0.0f64;
    if n <= LINEAR_SUM_MAX {
        let mut sum = KahanSum::new();
        sum.add(1.0);
        for k in 1..=n {
            log_alpha += log_ratio(k);
            sum.add(log_alpha.exp());
        }
        sum.value().ln()
    } else {
        let mut lse = LogSumExp::new();
        lse.add(0.0);
        for k in 1..=n {
            log_alpha += log_ratio(k);
            lse.add(log_alpha);
        }
        lse.value()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BDSpec {
    pub lambda: f64,
    pub mu: f64,
    pub a: f64,
}

/// Stationary law truncated for output; `p0` uses the whole series.
#[derive(Debug, Clone, PartialEq)]
pub struct Stationary {
    pub theta: Vec<f64>,
    pub p0: f64,
    pub p: Vec<f64>,
}

/// Limit `C = lim n^{a/λ} β_n` with its extrapolation error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CConstant {
    pub value: f64,
    pub error: f64,
}

/// Tolerance on successive extrapolants of `C`.
pub const C_CONSTANT_TOL: f64 = 1e-6;

impl BDSpec {
    pub fn new(lambda: f64, mu: f64, a: f64) -> Result<Self> {
        if !(lambda > 0.0 && mu > 0.0 && a > 0.0) || !(lambda.is_finite() && mu.is_finite() && a.is_finite()) {
            return Err(Error::Model(format!(
                "birth-death rates must be positive and finite (lambda={lambda}, mu={mu}, a={a})"
            )));
        }
        let spec = Self { lambda, mu, a };
        if !(spec.rho() < 1.0) {
            return Err(Error::Model(format!("birth-death needs rho = lambda/mu < 1, got {}", spec.rho())));
        }
        Ok(spec)
    }

    pub fn rho(&self) -> f64 {
        self.lambda / self.mu
    }

    /// `a/λ`, the polynomial correction exponent.
    pub fn ratio(&self) -> f64 {
        self.a / self.lambda
    }

    pub fn birth_rate(&self, n: u64) -> f64 {
        self.lambda * n as f64 + self.a
    }

    pub fn death_rate(&self, n: u64) -> f64 {
        self.mu * n as f64
    }

    /// `θ_k = Π_{i=1}^k λ_{i−1}/μ_i` for `k ≤ k_max`, and `p_k = θ_k p₀`.
    pub fn stationary(&self, k_max: usize) -> Stationary {
        let mut theta = Vec::with_capacity(k_max + 1);
        let mut th = 1.0f64;
        theta.push(th);
        let mut sum = KahanSum::new();
        sum.add(1.0);
        let mut k = 0u64;
        loop {
            let ratio = self.birth_rate(k) / self.death_rate(k + 1);
            th *= ratio;
            k += 1;
            if (k as usize) <= k_max {
                theta.push(th);
            }
            sum.add(th);
            // ratios move monotonically toward ρ, so the rest of the series is
            // dominated by a geometric one with ratio max(next, ρ)
            let r = (self.birth_rate(k) / self.death_rate(k + 1)).max(self.rho());
            if (k as usize) >= k_max && r < 1.0 && th * r / (1.0 - r) < 1e-17 * sum.value() {
                break;
            }
        }
        let p0 = 1.0 / sum.value();
        let p = theta.iter().map(|t| t * p0).collect();
        Stationary { theta, p0, p }
    }

    pub fn p0(&self) -> f64 {
        self.stationary(0).p0
    }

    /// Mean cycle length `1/(a p₀)`.
    pub fn alpha_t(&self) -> f64 {
        1.0 / (self.a * self.p0())
    }

    /// `log α_k` with `α_k = Π_{i=1}^k μ_i/λ_i`.
    pub fn log_alpha(&self, k: u64) -> f64 {
        (1..=k).map(|i| (self.death_rate(i) / self.birth_rate(i)).ln()).sum()
    }

    /// `log P(X̄(T₁) > n)`.
    pub fn log_q_exact(&self, n: u64) -> f64 {
        -escape_log_tail(n, |i| (self.death_rate(i) / self.birth_rate(i)).ln())
    }

    /// `P(X̄(T₁) > n) = 1/Σ_{k=0}^n α_k`.
    pub fn q_exact(&self, n: u64) -> f64 {
        self.log_q_exact(n).exp()
    }

    /// `C` from `g(n) = n^{a/λ} β_n` at `n = 2^10 … 2^20`, Richardson order 2 in `1/n`.
    pub fn c_constant(&self) -> Result<CConstant> {
        let c = self.ratio();
        let mut log_beta = KahanSum::new();
        let mut samples = Vec::new();
        let mut next_pow = 1u64 << 10;
        for i in 1..=(1u64 << 20) {
            // β_i / β_{i−1} = 1 − 1/(1 + iλ/a) = iλ/(iλ + a)
            log_beta.add((-self.a / self.birth_rate(i)).ln_1p());
            if i == next_pow {
                samples.push((c * (i as f64).ln() + log_beta.value()).exp());
                next_pow <<= 1;
            }
        }
        let (value, error) = richardson(&samples, 2);
        if !(error <= C_CONSTANT_TOL) || !value.is_finite() {
            return Err(Error::Convergence(format!(
                "C extrapolants differ by {error} (> {C_CONSTANT_TOL})"
            )));
        }
        Ok(CConstant { value, error })
    }

    /// `C` through the harmonic split `log C = −γ_E a/λ + Σ_{i≥1} (c/i − log(1 + c/i))`,
    /// `c = a/λ`, with the partial sums extrapolated in `1/n`.
    pub fn c_constant_harmonic(&self) -> Result<CConstant> {
        const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
        let c = self.ratio();
        let mut s = KahanSum::new();
        let mut samples = Vec::new();
        let mut next_pow = 1u64 << 10;
        for i in 1..=(1u64 << 20) {
            let x = c / i as f64;
            s.add(x - x.ln_1p());
            if i == next_pow {
                samples.push(s.value());
                next_pow <<= 1;
            }
        }
        let (sum, err) = richardson(&samples, 2);
        let value = (-EULER_GAMMA * c + sum).exp();
        let error = value * err;
        if !(error <= C_CONSTANT_TOL) {
            return Err(Error::Convergence(format!("harmonic route for C stalled at error {error}")));
        }
        Ok(CConstant { value, error })
    }

    /// `log` of `((1/ρ − 1)/C) ρ^{n+1} n^{a/λ}`.
    pub fn log_q_asymptotic(&self, n: u64, c_const: f64) -> Result<f64> {
        if n == 0 {
            return Err(domain("asymptotic tail needs n >= 1"));
        }
        let rho = self.rho();
        Ok((1.0 / rho - 1.0).ln() - c_const.ln() + (n as f64 + 1.0) * rho.ln() + self.ratio() * (n as f64).ln())
    }

    pub fn q_asymptotic(&self, n: u64) -> Result<f64> {
        let c = self.c_constant()?.value;
        Ok(self.log_q_asymptotic(n, c)?.exp())
    }

    /// `R₀(x) = −x log ρ − (a/λ) log x`.
    pub fn r0(&self, x: f64) -> f64 {
        -x * self.rho().ln() - self.ratio() * x.ln()
    }

    /// `x₀ = −a/(λ log ρ)`, where `R₀` starts increasing.
    pub fn x0(&self) -> f64 {
        -self.ratio() / self.rho().ln()
    }

    /// `E X⁻¹(n)` from state `start`: sum of mean up-crossing times
    /// `m_k = (1 + μ_k m_{k−1})/λ_k`, `m_0 = 1/a`.
    pub fn expected_hitting_time(&self, n: u64, start: u64) -> f64 {
        let mut m = 0.0f64;
        let mut total = 0.0f64;
        for k in 0..n {
            m = (1.0 + self.death_rate(k) * m) / self.birth_rate(k);
            if k >= start {
                total += m;
            }
        }
        total
    }

    /// Expected number of jumps to first reach `n` from `start`.
    pub fn expected_hitting_events(&self, n: u64, start: u64) -> f64 {
        let mut e = 0.0f64;
        let mut total = 0.0f64;
        for k in 0..n {
            let (up, down) = (self.birth_rate(k), self.death_rate(k));
            let p = up / (up + down);
            e = (1.0 + (1.0 - p) * e) / p;
            if k >= start {
                total += e;
            }
        }
        total
    }

    /// `C⁻¹(1/ρ − 1) ρⁿ n^{a/λ}`: the factor turning `X⁻¹(n)` into an
    /// asymptotically `Exp(a p₀)` variable.
    pub fn hitting_scale(&self, n: u64, c_const: f64) -> f64 {
        let rho = self.rho();
        ((1.0 / rho - 1.0).ln() - c_const.ln() + n as f64 * rho.ln() + self.ratio() * (n as f64).ln()).exp()
    }
}

/// `R₀` envelope with numeric inverse and `C₁` measured on `n ∈ [1, 300]`.
pub fn bd_envelope(spec: &BDSpec) -> Result<RateEnvelope> {
    let (lr, c) = (-spec.rho().ln(), spec.ratio());
    let env = RateEnvelope::new(
        format!("birth_death(lambda={}, mu={}, a={})", spec.lambda, spec.mu, spec.a),
        Arc::new(move |x: f64| lr * x - c * x.ln()),
        Arc::new(move |x: f64| lr - c / x),
        None,
        0.0,
        spec.x0(),
    )?;
    Ok(env.with_r1_bound(r1_profile(spec, 1, 300).into_iter().fold(0.0, |m, d| m.max(d.abs()))))
}

/// `−log q_exact(n) − R₀(n)` for `n ∈ [lo, hi]`.
pub fn r1_profile(spec: &BDSpec, lo: u64, hi: u64) -> Vec<f64> {
    let rate = |i: u64| (spec.death_rate(i) / spec.birth_rate(i)).ln();
    // accumulate once instead of calling escape_log_tail per n
    let mut out = Vec::new();
    let mut log_alpha = 0.0f64;
    let mut lse = LogSumExp::new();
    lse.add(0.0);
    for n in 1..=hi {
        log_alpha += rate(n);
        lse.add(log_alpha);
        if n >= lo {
            out.push(lse.value() - spec.r0(n as f64));
        }
    }
    out
}

/// One return-to-zero cycle: idle `Exp(a)` in state 0, then jumps until 0 is hit again.
pub fn bd_cycle<R: Rng + ?Sized>(
    spec: &BDSpec,
    rng: &mut R,
    mut records: Option<&mut Vec<Record>>,
) -> Result<CycleSample> {
    if let Some(r) = records.as_deref_mut() {
        r.push(Record { offset: 0.0, value: 0.0 });
    }
    let mut t = rng.sample::<f64, _>(Exp1) / spec.a;
    let mut k = 1u64;
    let mut max = 1u64;
    if let Some(r) = records.as_deref_mut() {
        r.push(Record { offset: t, value: 1.0 });
    }
    let mut events = 1u64;
    while k > 0 {
        let (up, down) = (spec.birth_rate(k), spec.death_rate(k));
        let total = up + down;
        t += rng.sample::<f64, _>(Exp1) / total;
        if rng.random::<f64>() * total < up {
            k += 1;
            if k > max {
                max = k;
                if let Some(r) = records.as_deref_mut() {
                    r.push(Record { offset: t, value: k as f64 });
                }
            }
        } else {
            k -= 1;
        }
        events += 1;
        if events > EVENT_LIMIT {
            return Err(Error::CycleOverflow { limit: EVENT_LIMIT });
        }
    }
    Ok(CycleSample {
        duration: t,
        cycle_max: max as f64,
    })
}

impl CycleModel for BDSpec {
    fn next_cycle<R: Rng + ?Sized>(&self, rng: &mut R, records: Option<&mut Vec<Record>>) -> Result<CycleSample> {
        bd_cycle(self, rng, records)
    }

    fn alpha_t(&self) -> Option<f64> {
        Some(BDSpec::alpha_t(self))
    }
}

/// Direct statistics for the birth–death maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectStats {
    pub t: f64,
    /// `(X̄ log(1/ρ) − log t)/L₂(t)`, limsup `1 + a/λ`.
    pub u2: f64,
    /// `(X̄ log(1/ρ) − log t − (a/λ)L₂(t))/L₃(t)`, liminf −1.
    pub u3: f64,
}

pub fn direct_stats_at(spec: &BDSpec, t: f64, xbar: f64) -> Result<DirectStats> {
    let (l2v, l3v) = (l2(t)?, l3(t)?);
    let dev = xbar * (1.0 / spec.rho()).ln() - t.ln();
    Ok(DirectStats {
        t,
        u2: dev / l2v,
        u3: (dev - spec.ratio() * l2v) / l3v,
    })
}

pub fn corollary3_stats(path: &MaxPath, spec: &BDSpec) -> Result<Vec<DirectStats>> {
    path.checkpoints.iter().map(|c| direct_stats_at(spec, c.t, c.xbar)).collect()
}

/// First time the chain started at `start` reaches `n`.
pub fn hitting_time<R: Rng + ?Sized>(spec: &BDSpec, n: u64, start: u64, rng: &mut R) -> Result<f64> {
    let mut k = start;
    let mut t = 0.0f64;
    let mut events = 0u64;
    while k < n {
        let (up, down) = (spec.birth_rate(k), spec.death_rate(k));
        let total = up + down;
        t += rng.sample::<f64, _>(Exp1) / total;
        if rng.random::<f64>() * total < up {
            k += 1;
        } else {
            k -= 1;
        }
        events += 1;
        if events > EVENT_LIMIT {
            return Err(Error::Budget(format!("hitting time replica exceeded {EVENT_LIMIT} events")));
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HittingConfig {
    pub n: u64,
    pub replicas: u64,
    pub seed: u64,
    pub start: u64,
    /// Cap on `replicas × E[events per replica]`.
    pub event_budget: f64,
}

impl HittingConfig {
    pub fn new(n: u64, replicas: u64, seed: u64) -> Self {
        Self {
            n,
            replicas,
            seed,
            start: 0,
            event_budget: DEFAULT_EVENT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HittingSample {
    pub raw: Vec<f64>,
    pub scaled: Vec<f64>,
    pub scale: f64,
    /// `a p₀`, the rate of the limiting exponential.
    pub limit_rate: f64,
    pub c_constant: f64,
    pub ks_distance: f64,
    pub mean_scaled: f64,
}

/// Scaled hitting times `C⁻¹(1/ρ−1)ρⁿ n^{a/λ} X⁻¹(n)` over independent
/// replicas, with the KS distance to `Exp(a p₀)`.
pub fn hitting_time_stat(spec: &BDSpec, cfg: &HittingConfig) -> Result<HittingSample> {
    if cfg.n < 2 {
        return Err(domain(format!("hitting level must be >= 2, got {}", cfg.n)));
    }
    if cfg.replicas == 0 {
        return Err(domain("need at least one replica"));
    }
    let projected = cfg.replicas as f64 * spec.expected_hitting_events(cfg.n, cfg.start);
    if projected > cfg.event_budget {
        return Err(Error::Budget(format!(
            "projected {projected:.3e} events exceeds the budget of {:.3e}",
            cfg.event_budget
        )));
    }
    let c = spec.c_constant()?.value;
    let scale = spec.hitting_scale(cfg.n, c);
    let raw: Vec<f64> = (0..cfg.replicas)
        .into_par_iter()
        .map(|i| hitting_time(spec, cfg.n, cfg.start, &mut replica_rng(cfg.seed, i)))
        .collect::<Result<_>>()?;
    let scaled: Vec<f64> = raw.iter().map(|x| x * scale).collect();
    let limit_rate = spec.a * spec.p0();
    let mut sorted = scaled.clone();
    let ks = ks_distance(&mut sorted, |x| 1.0 - (-limit_rate * x).exp());
    let mean_scaled = scaled.iter().copied().collect::<KahanSum>().value() / scaled.len() as f64;
    Ok(HittingSample {
        raw,
        scaled,
        scale,
        limit_rate,
        c_constant: c,
        ks_distance: ks,
        mean_scaled,
    })
}
