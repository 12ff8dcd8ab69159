//! Single-server GI/G/1 waiting times and M/M/m queue lengths as
//! regenerative processes.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp, Exp1, Gamma, Uniform, Weibull};

use crate::birth_death::escape_log_tail;
use crate::envelope::RateEnvelope;
use crate::error::{domain, Error, Result};
use crate::numeric::{bisect_root, integrate_to_infinity};
use crate::regen::{CycleModel, CycleSample, Record};

/// Hard cap on customers (or CTMC events) in a single cycle.
pub const CYCLE_EVENT_LIMIT: u64 = 1_000_000_000;

/// Absolute tolerance for numerically integrated moment generating functions.
pub const MGF_QUAD_TOL: f64 = 1e-12;

/// Nonnegative interarrival / service distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dist {
    Exponential { rate: f64 },
    Deterministic { value: f64 },
    Uniform { lo: f64, hi: f64 },
    Erlang { shape: u32, rate: f64 },
    /// Shape ≥ 1 only: lighter-than-exponential or exponential tail.
    Weibull { shape: f64, scale: f64 },
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Exponential { rate } => write!(f, "exp:{rate}"),
            Dist::Deterministic { value } => write!(f, "det:{value}"),
            Dist::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
            Dist::Erlang { shape, rate } => write!(f, "erlang:{shape}:{rate}"),
            Dist::Weibull { shape, scale } => write!(f, "weibull:{shape}:{scale}"),
        }
    }
}

impl std::str::FromStr for Dist {
    type Err = Error;

    /// `exp:RATE`, `det:VALUE`, `uniform:LO:HI`, `erlang:K:RATE`, `weibull:SHAPE:SCALE`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| Error::Model(format!("missing parameter in '{s}'")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Model(format!("bad number in '{s}': {e}")))
        };
        let d = match (parts[0].trim(), parts.len()) {
            ("exp", 2) => Dist::Exponential { rate: num(1)? },
            ("det", 2) => Dist::Deterministic { value: num(1)? },
            ("uniform", 3) => Dist::Uniform { lo: num(1)?, hi: num(2)? },
            ("erlang", 3) => {
                let k = num(1)?;
                if k.fract() != 0.0 || k < 1.0 {
                    return Err(Error::Model(format!("erlang shape must be a positive integer in '{s}'")));
                }
                Dist::Erlang { shape: k as u32, rate: num(2)? }
            }
            ("weibull", 3) => Dist::Weibull { shape: num(1)?, scale: num(2)? },
            _ => return Err(Error::Model(format!("unrecognised distribution '{s}'"))),
        };
        d.validate()?;
        Ok(d)
    }
}

impl Dist {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Dist::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            Dist::Deterministic { value } => value >= 0.0 && value.is_finite(),
            Dist::Uniform { lo, hi } => lo >= 0.0 && hi > lo && hi.is_finite(),
            Dist::Erlang { shape, rate } => shape >= 1 && rate > 0.0 && rate.is_finite(),
            Dist::Weibull { shape, scale } => shape >= 1.0 && shape.is_finite() && scale > 0.0 && scale.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Model(format!("invalid distribution parameters: {self}")))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Dist::Exponential { rate } => 1.0 / rate,
            Dist::Deterministic { value } => value,
            Dist::Uniform { lo, hi } => 0.5 * (lo + hi),
            Dist::Erlang { shape, rate } => shape as f64 / rate,
            Dist::Weibull { shape, scale } => scale * gamma_fn(1.0 + 1.0 / shape),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Dist::Exponential { rate } => rng.sample::<f64, _>(Exp1) / rate,
            Dist::Deterministic { value } => value,
            Dist::Uniform { lo, hi } => Uniform::new(lo, hi).expect("validated").sample(rng),
            Dist::Erlang { shape, rate } => Gamma::new(shape as f64, 1.0 / rate).expect("validated").sample(rng),
            Dist::Weibull { shape, scale } => Weibull::new(scale, shape).expect("validated").sample(rng),
        }
    }

    /// Probability density; `None` for the point mass.
    pub fn density(&self, x: f64) -> Option<f64> {
        if x < 0.0 {
            return Some(0.0);
        }
        Some(match *self {
            Dist::Exponential { rate } => rate * (-rate * x).exp(),
            Dist::Deterministic { .. } => return None,
            Dist::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Dist::Erlang { shape, rate } => {
                let k = shape as f64;
                let log = k * rate.ln() + (k - 1.0) * x.max(f64::MIN_POSITIVE).ln() - rate * x - ln_gamma_fn(k);
                if shape == 1 { rate * (-rate * x).exp() } else { log.exp() }
            }
            Dist::Weibull { shape, scale } => {
                let z = x / scale;
                let poly = if shape == 1.0 { 1.0 } else { z.powf(shape - 1.0) };
                shape / scale * poly * (-z.powf(shape)).exp()
            }
        })
    }

    /// `E e^{sX}` in closed form where available; `Ok(None)` when infinite.
    /// Weibull falls back to quadrature.
    pub fn mgf(&self, s: f64) -> Result<Option<f64>> {
        Ok(match *self {
            Dist::Exponential { rate } => (s < rate).then(|| rate / (rate - s)),
            Dist::Deterministic { value } => Some((s * value).exp()),
            Dist::Uniform { lo, hi } => {
                if s == 0.0 {
                    Some(1.0)
                } else {
                    Some(((s * hi).exp() - (s * lo).exp()) / (s * (hi - lo)))
                }
            }
            Dist::Erlang { shape, rate } => (s < rate).then(|| (rate / (rate - s)).powi(shape as i32)),
            Dist::Weibull { shape, scale } => {
                if shape == 1.0 && s * scale >= 1.0 {
                    None
                } else {
                    self.mgf_by_quadrature(s)?
                }
            }
        })
    }

    /// `E e^{sX}` by adaptive Gauss–Kronrod on the density.
    ///
    /// Returns `Ok(None)` if the integral diverges.
    pub fn mgf_by_quadrature(&self, s: f64) -> Result<Option<f64>> {
        if let Dist::Deterministic { value } = *self {
            return Ok(Some((s * value).exp()));
        }
        let f = |x: f64| {
            let d = self.density(x).unwrap_or(0.0);
            if d == 0.0 { 0.0 } else { (s * x).exp() * d }
        };
        let res = match *self {
            Dist::Uniform { lo, hi } => crate::numeric::integrate(f, lo, hi, MGF_QUAD_TOL),
            _ => integrate_to_infinity(f, 0.0, MGF_QUAD_TOL),
        };
        match res {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            Ok(_) | Err(Error::Convergence(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// Lanczos approximation (g = 7, n = 9).
fn ln_gamma_fn(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma_fn(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, &c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn gamma_fn(x: f64) -> f64 {
    ln_gamma_fn(x).exp()
}

/// GI/G/1 queue: interarrival law ζ (mean a) and service law η (mean b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GiG1Spec {
    pub interarrival: Dist,
    pub service: Dist,
}

impl GiG1Spec {
    /// Validated spec; rejects `ρ = b/a ≥ 1`.
    pub fn new(interarrival: Dist, service: Dist) -> Result<Self> {
        let spec = Self::new_unchecked(interarrival, service);
        interarrival.validate()?;
        service.validate()?;
        if !(spec.rho() < 1.0) {
            return Err(Error::Model(format!("GI/G/1 needs rho = b/a < 1, got {}", spec.rho())));
        }
        Ok(spec)
    }

    /// Spec without the stability check.
    pub fn new_unchecked(interarrival: Dist, service: Dist) -> Self {
        Self { interarrival, service }
    }

    /// M/M/1 with arrival rate λ and service rate μ.
    pub fn mm1(lambda: f64, mu: f64) -> Result<Self> {
        Self::new(Dist::Exponential { rate: lambda }, Dist::Exponential { rate: mu })
    }

    /// M/D/1 with arrival rate λ and service time d.
    pub fn md1(lambda: f64, d: f64) -> Result<Self> {
        Self::new(Dist::Exponential { rate: lambda }, Dist::Deterministic { value: d })
    }

    pub fn rho(&self) -> f64 {
        self.service.mean() / self.interarrival.mean()
    }

    /// `E exp(γ(η − ζ)) = M_η(γ) M_ζ(−γ)`; `None` past the MGF domain.
    pub fn tilted_mgf(&self, gamma: f64) -> Result<Option<f64>> {
        let Some(me) = self.service.mgf(gamma)? else {
            return Ok(None);
        };
        let Some(mz) = self.interarrival.mgf(-gamma)? else {
            return Ok(None);
        };
        Ok(Some(me * mz))
    }
}

/// Positive solution of `E exp(γ(η − ζ)) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CramerRoot {
    pub gamma: f64,
    /// `E(η − ζ) exp(γ(η − ζ))` at the root; must be finite.
    pub tilted_mean: f64,
}

const CRAMER_START: f64 = 1e-6;
const CRAMER_MAX: f64 = 1e6;

/// Cramér exponent by doubling from 1e-6 and bisection.
pub fn cramer_gamma(spec: &GiG1Spec) -> Result<CramerRoot> {
    let drift = spec.service.mean() - spec.interarrival.mean();
    if !(drift < 0.0) {
        return Err(Error::NoRoot(format!("E(eta - zeta) = {drift} >= 0: no positive exponent")));
    }
    // excess(γ) = f(γ) − 1 with +∞ past the MGF domain
    let excess = |g: f64| -> Result<f64> {
        Ok(match spec.tilted_mgf(g)? {
            Some(v) => v - 1.0,
            None => f64::INFINITY,
        })
    };
    let mut lo = CRAMER_START;
    if !(excess(lo)? < 0.0) {
        return Err(Error::NoRoot("tilted MGF does not dip below 1 near 0".into()));
    }
    let mut hi = 2.0 * lo;
    loop {
        let e = excess(hi)?;
        if e >= 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > CRAMER_MAX {
            return Err(Error::NoRoot(format!("tilted MGF stays below 1 up to gamma = {CRAMER_MAX}")));
        }
    }
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let gamma = 0.5 * (lo + hi);
    let at_root = spec.tilted_mgf(gamma)?;
    match at_root {
        Some(v) if (v - 1.0).abs() < 1e-6 => {}
        _ => {
            return Err(Error::NoRoot(format!(
                "MGF domain ends near gamma = {gamma} before reaching 1"
            )))
        }
    }
    let h = 1e-6 * gamma;
    let (Some(up), Some(down)) = (spec.tilted_mgf(gamma + h)?, spec.tilted_mgf(gamma - h)?) else {
        return Err(Error::NoRoot(format!("tilted mean is infinite at gamma = {gamma}")));
    };
    let tilted_mean = (up - down) / (2.0 * h);
    if !tilted_mean.is_finite() {
        return Err(Error::NoRoot(format!("tilted mean is infinite at gamma = {gamma}")));
    }
    Ok(CramerRoot { gamma, tilted_mean })
}

/// Unique positive root of `e^x = 1 + x/ρ`, `0 < ρ < 1`.
pub fn x_rho_root(rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(domain(format!("x_rho needs 0 < rho < 1, got {rho}")));
    }
    let gap = 1.0 / rho - 1.0;
    // x − log(1 + x/ρ) has the same sign as e^x − 1 − x/ρ and cannot overflow
    let g = |x: f64| x - (x / rho).ln_1p();
    let lo = (0.25 * gap).min(1e-3);
    let hi = 2.0 / rho;
    if !(g(lo) < 0.0) {
        return Err(domain(format!("rho = {rho} too close to 1 to bracket the root")));
    }
    bisect_root(g, lo, hi, 1e-13)
}

/// Outcome of one GI/G/1 regeneration cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindleyCycle {
    pub sample: CycleSample,
    /// Customers served in the cycle, the first included.
    pub customers: u64,
    pub service_total: f64,
}

/// One busy-plus-idle cycle of the Lindley recursion
/// `W_k = max(0, W_{k−1} + η_{k−1} − ζ_k)`, started by a customer arriving
/// to an empty system and ended by the next such arrival.
pub fn lindley_cycle<R: Rng + ?Sized>(
    spec: &GiG1Spec,
    rng: &mut R,
    mut records: Option<&mut Vec<Record>>,
) -> Result<LindleyCycle> {
    let mut w = 0.0f64;
    let mut offset = 0.0f64;
    let mut customers = 1u64;
    let mut max = 0.0f64;
    let mut service_total = 0.0f64;
    if let Some(r) = records.as_deref_mut() {
        r.push(Record { offset: 0.0, value: 0.0 });
    }
    loop {
        let eta = spec.service.sample(rng);
        let zeta = spec.interarrival.sample(rng);
        service_total += eta;
        offset += zeta;
        w += eta - zeta;
        if w <= 0.0 {
            break;
        }
        customers += 1;
        if customers > CYCLE_EVENT_LIMIT {
            return Err(Error::CycleOverflow { limit: CYCLE_EVENT_LIMIT });
        }
        if w > max {
            max = w;
            if let Some(r) = records.as_deref_mut() {
                r.push(Record { offset, value: w });
            }
        }
    }
    Ok(LindleyCycle {
        sample: CycleSample {
            duration: offset,
            cycle_max: max,
        },
        customers,
        service_total,
    })
}

/// Arrival times and waiting times of the first `n` customers, starting from
/// an empty system at time 0.
pub fn lindley_customers<R: Rng + ?Sized>(spec: &GiG1Spec, n: usize, rng: &mut R) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    let (mut t, mut w) = (0.0f64, 0.0f64);
    for _ in 0..n {
        out.push((t, w));
        let eta = spec.service.sample(rng);
        let zeta = spec.interarrival.sample(rng);
        t += zeta;
        w = (w + eta - zeta).max(0.0);
    }
    out
}

impl CycleModel for GiG1Spec {
    fn next_cycle<R: Rng + ?Sized>(&self, rng: &mut R, records: Option<&mut Vec<Record>>) -> Result<CycleSample> {
        Ok(lindley_cycle(self, rng, records)?.sample)
    }

    /// Known for Poisson arrivals: a busy period serves `1/(1−ρ)` customers
    /// on average, so `α_T = a/(1−ρ)`.
    fn alpha_t(&self) -> Option<f64> {
        match self.interarrival {
            Dist::Exponential { .. } => Some(self.interarrival.mean() / (1.0 - self.rho())),
            _ => None,
        }
    }
}

/// `R₀(x) = γx` with γ the Cramér exponent.
pub fn gig1_envelope(spec: &GiG1Spec) -> Result<RateEnvelope> {
    let root = cramer_gamma(spec)?;
    RateEnvelope::linear(root.gamma)
}

/// Empirical `C` in `P(W̄(T₁) > x) ≈ C e^{−γx}`: geometric mean of
/// `P̂(M > x) e^{γx}` over `grid`.
pub fn estimate_tail_constant(maxima: &[f64], gamma: f64, grid: &[f64]) -> Option<f64> {
    let n = maxima.len() as f64;
    let mut logs = Vec::new();
    for &x in grid {
        let above = maxima.iter().filter(|&&m| m > x).count();
        if above > 0 {
            logs.push((above as f64 / n).ln() + gamma * x);
        }
    }
    if logs.is_empty() {
        None
    } else {
        Some((logs.iter().sum::<f64>() / logs.len() as f64).exp())
    }
}

/// M/M/m queue with Poisson(λ) arrivals, Exp(μ) services and m servers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MMmSpec {
    pub lambda: f64,
    pub mu: f64,
    pub servers: u32,
}

impl MMmSpec {
    pub fn new(lambda: f64, mu: f64, servers: u32) -> Result<Self> {
        if !(lambda > 0.0 && mu > 0.0 && lambda.is_finite() && mu.is_finite()) || servers == 0 {
            return Err(Error::Model(format!(
                "M/M/m needs lambda, mu > 0 and m >= 1 (got {lambda}, {mu}, {servers})"
            )));
        }
        let spec = Self { lambda, mu, servers };
        if !(spec.rho() < 1.0) {
            return Err(Error::Model(format!("M/M/m needs rho = lambda/(m mu) < 1, got {}", spec.rho())));
        }
        Ok(spec)
    }

    pub fn rho(&self) -> f64 {
        self.lambda / (self.servers as f64 * self.mu)
    }

    fn death_rate(&self, k: u64) -> f64 {
        k.min(self.servers as u64) as f64 * self.mu
    }

    /// Stationary probability of the empty system.
    pub fn p0(&self) -> f64 {
        let m = self.servers as f64;
        let a = self.lambda / self.mu;
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 0..self.servers {
            if k > 0 {
                term *= a / k as f64;
            }
            sum += term;
        }
        // term holds a^{m-1}/(m-1)!
        sum += term * a / m / (1.0 - self.rho());
        1.0 / sum
    }

    /// `−log P(Q̄(T₁) > n)` from the embedded birth–death chain started at 1.
    pub fn neg_log_tail_exact(&self, n: u64) -> f64 {
        escape_log_tail(n, |i| (self.death_rate(i) / self.lambda).ln())
    }

    pub fn tail_exact(&self, n: u64) -> f64 {
        (-self.neg_log_tail_exact(n)).exp()
    }

    /// `log((1/ρ − 1) ρ^{n+1−m} / α_m)` with `α_m = m! (μ/λ)^m`: the geometric
    /// law the exact tail approaches once `n ≥ m`.
    pub fn log_tail_asymptotic(&self, n: u64) -> f64 {
        let rho = self.rho();
        let log_alpha_m: f64 = (1..=self.servers as u64).map(|i| (self.death_rate(i) / self.lambda).ln()).sum();
        (1.0 / rho - 1.0).ln() + (n as f64 + 1.0 - self.servers as f64) * rho.ln() - log_alpha_m
    }
}

/// One M/M/m busy period from a single customer plus the idle gap after it.
pub fn mmm_cycle<R: Rng + ?Sized>(
    spec: &MMmSpec,
    rng: &mut R,
    mut records: Option<&mut Vec<Record>>,
) -> Result<CycleSample> {
    let mut k = 1u64;
    let mut t = 0.0f64;
    let mut max = 1u64;
    let mut events = 0u64;
    if let Some(r) = records.as_deref_mut() {
        r.push(Record { offset: 0.0, value: 1.0 });
    }
    while k > 0 {
        let down = spec.death_rate(k);
        let total = spec.lambda + down;
        t += rng.sample::<f64, _>(Exp1) / total;
        if rng.random::<f64>() * total < spec.lambda {
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
        if events > CYCLE_EVENT_LIMIT {
            return Err(Error::CycleOverflow { limit: CYCLE_EVENT_LIMIT });
        }
    }
    t += Exp::new(spec.lambda).expect("validated").sample(rng);
    Ok(CycleSample {
        duration: t,
        cycle_max: max as f64,
    })
}

impl CycleModel for MMmSpec {
    fn next_cycle<R: Rng + ?Sized>(&self, rng: &mut R, records: Option<&mut Vec<Record>>) -> Result<CycleSample> {
        mmm_cycle(self, rng, records)
    }

    /// Arrivals to an empty system occur at rate `λ p₀`.
    fn alpha_t(&self) -> Option<f64> {
        Some(1.0 / (self.lambda * self.p0()))
    }
}

/// `R₀(x) = −x log ρ`, with `C₁` measured from the exact tail on `n ∈ [1, 300]`.
pub fn mmm_envelope(spec: &MMmSpec) -> Result<RateEnvelope> {
    let c = -spec.rho().ln();
    let r1 = (1..=300u64)
        .map(|n| (spec.neg_log_tail_exact(n) - c * n as f64).abs())
        .fold(0.0, f64::max);
    Ok(RateEnvelope::linear(c)?.with_r1_bound(r1))
}
