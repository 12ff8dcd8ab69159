//! Normalisation machinery for running maxima.
//!
//! A [`RateEnvelope`] carries the smooth part `R₀` of a log-tail
//! `R(x) = -log P(M > x)` together with its derivative, inverse and the
//! regular-variation index of `(R₀⁻¹)'`. From it we build the centering
//! `A₀(t) = R₀⁻¹(log(t/α_T))` and the two normalised statistics whose
//! limsup / liminf are `+1` at the `log log t` scale and `-1` at the
//! `log log log t` scale.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::numeric::{KahanSum, LogSumExp};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Relative stopping rule for numeric inversion.
pub const INVERSE_REL_TOL: f64 = 1e-10;

/// `inf { x in [lo, hi] : h(x) > y }` by bisection.
///
/// `h` must be nondecreasing on the bracket. Bisection stops once the
/// bracket is within [`INVERSE_REL_TOL`] of the larger endpoint magnitude,
/// so steep `h` near a root at 0 still gets a relative answer.
pub fn generalized_inverse<H: Fn(f64) -> f64>(h: H, y: f64, bracket: (f64, f64)) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(domain(format!("invalid bracket [{lo}, {hi}]")));
    }
    if !(h(hi) > y) {
        return Err(Error::Bracket { lo, hi, level: y });
    }
    if h(lo) > y {
        return Ok(lo);
    }
    while hi - lo > INVERSE_REL_TOL * lo.abs().max(hi.abs()) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > y {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `log log t`, defined for `t > e`.
pub fn l2(t: f64) -> Result<f64> {
    if !(t > std::f64::consts::E) {
        return Err(domain(format!("L2 needs t > e, got {t}")));
    }
    Ok(t.ln().ln())
}

/// `log log log t`, defined for `t > e^e`.
pub fn l3(t: f64) -> Result<f64> {
    let ee = std::f64::consts::E.exp();
    if !(t > ee) {
        return Err(domain(format!("L3 needs t > e^e, got {t}")));
    }
    Ok(t.ln().ln().ln())
}

/// Smooth log-tail component `R₀` with everything needed to normalise maxima.
#[derive(Clone)]
pub struct RateEnvelope {
    name: String,
    r0: RealFn,
    r0_deriv: RealFn,
    r0_inv: Option<RealFn>,
    kappa: f64,
    x0: f64,
    r1_bound: f64,
}

impl fmt::Debug for RateEnvelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RateEnvelope")
            .field("name", &self.name)
            .field("kappa", &self.kappa)
            .field("x0", &self.x0)
            .field("r1_bound", &self.r1_bound)
            .field("analytic_inverse", &self.r0_inv.is_some())
            .finish()
    }
}

impl RateEnvelope {
    /// Envelope from user-supplied pieces. Pass `r0_inv = None` to invert
    /// numerically on `[x0, ∞)`.
    pub fn new(
        name: impl Into<String>,
        r0: RealFn,
        r0_deriv: RealFn,
        r0_inv: Option<RealFn>,
        kappa: f64,
        x0: f64,
    ) -> Result<Self> {
        if !x0.is_finite() || !kappa.is_finite() {
            return Err(domain("x0 and kappa must be finite"));
        }
        // r₀(x₀) may be a rounding error below zero when x₀ is its root
        if !(r0_deriv(x0.max(f64::MIN_POSITIVE)) >= -1e-12) {
            return Err(domain(format!("r0 must be nonnegative at x0 = {x0}")));
        }
        Ok(Self {
            name: name.into(),
            r0,
            r0_deriv,
            r0_inv,
            kappa,
            x0,
            r1_bound: 0.0,
        })
    }

    /// Exponential-type tail `R₀(x) = γx` (GI/G/1 waiting times, M/M/m queue length).
    pub fn linear(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(domain(format!("linear envelope needs gamma > 0, got {gamma}")));
        }
        Self::new(
            format!("linear(gamma={gamma})"),
            Arc::new(move |x| gamma * x),
            Arc::new(move |_| gamma),
            Some(Arc::new(move |y| y / gamma)),
            0.0,
            0.0,
        )
    }

    /// Weibull-type tail `R₀(x) = x^β`, β > 0.
    pub fn power(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(domain(format!("power envelope needs beta > 0, got {beta}")));
        }
        Self::new(
            format!("power(beta={beta})"),
            Arc::new(move |x: f64| x.max(0.0).powf(beta)),
            Arc::new(move |x: f64| beta * x.max(0.0).powf(beta - 1.0)),
            Some(Arc::new(move |y: f64| y.max(0.0).powf(1.0 / beta))),
            1.0 / beta - 1.0,
            0.0,
        )
    }

    pub fn with_r1_bound(mut self, c1: f64) -> Self {
        self.r1_bound = c1.abs();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn r1_bound(&self) -> f64 {
        self.r1_bound
    }

    pub fn has_analytic_inverse(&self) -> bool {
        self.r0_inv.is_some()
    }

    /// `R₀(x)`.
    pub fn rate(&self, x: f64) -> f64 {
        (self.r0)(x)
    }

    /// `r₀(x) = R₀'(x)`.
    pub fn rate_deriv(&self, x: f64) -> f64 {
        (self.r0_deriv)(x)
    }

    /// Smallest level the inverse is defined for.
    pub fn min_level(&self) -> f64 {
        self.rate(self.x0)
    }

    /// `R₀⁻¹(y)` for `y ≥ R₀(x₀)`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !(y >= self.min_level()) || !y.is_finite() {
            return Err(domain(format!(
                "{}: inverse needs y >= R0(x0) = {}, got {y}",
                self.name,
                self.min_level()
            )));
        }
        if let Some(inv) = &self.r0_inv {
            return Ok(inv(y));
        }
        let lo = self.x0;
        let mut step = self.x0.abs().max(1.0);
        let mut hi = lo + step;
        let mut tries = 0;
        while !(self.rate(hi) > y) {
            step *= 2.0;
            hi = lo + step;
            tries += 1;
            if tries > 1100 || !hi.is_finite() {
                return Err(Error::Bracket { lo, hi, level: y });
            }
        }
        generalized_inverse(|x| self.rate(x), y, (lo, hi))
    }

    /// `(R₀⁻¹)'(y) = 1 / r₀(R₀⁻¹(y))`.
    pub fn inverse_deriv(&self, y: f64) -> Result<f64> {
        let x = self.inverse(y)?;
        let r = self.rate_deriv(x);
        if !(r > 0.0) {
            return Err(domain(format!("{}: r0 vanishes at {x}", self.name)));
        }
        Ok(1.0 / r)
    }
}

/// Values of the two normalised statistics at one horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedStats {
    pub t: f64,
    /// `r₀(A₀(t))(X̄(t) − A₀(t)) / L₂(t)`, limsup 1.
    pub s2: f64,
    /// Same deviation over `L₃(t)`, liminf −1.
    pub s3: f64,
}

/// Centering `A₀(t) = R₀⁻¹(log(t/α_T))`.
pub fn a0_of_t(env: &RateEnvelope, alpha_t: f64, t: f64) -> Result<f64> {
    if !(alpha_t > 0.0) || !(t > 0.0) {
        return Err(domain(format!("need alpha_T > 0 and t > 0, got {alpha_t}, {t}")));
    }
    let level = (t / alpha_t).ln();
    if !(level > env.min_level()) {
        return Err(domain(format!(
            "log(t/alpha_T) = {level} is below the validity level R0(x0) = {}",
            env.min_level()
        )));
    }
    env.inverse(level)
}

/// Normalised deviation of `xbar` from the centering at horizon `t`.
pub fn normalized_stats(env: &RateEnvelope, alpha_t: f64, t: f64, xbar: f64) -> Result<NormalizedStats> {
    let a0 = a0_of_t(env, alpha_t, t)?;
    centered_stats(env, a0, t, xbar)
}

/// Statistics for an explicit centering value `center` at scale index `t`.
pub(crate) fn centered_stats(env: &RateEnvelope, center: f64, t: f64, xbar: f64) -> Result<NormalizedStats> {
    let (l2v, l3v) = (l2(t)?, l3(t)?);
    let dev = env.rate_deriv(center) * (xbar - center);
    Ok(NormalizedStats {
        t,
        s2: dev / l2v,
        s3: dev / l3v,
    })
}

/// Worst departure of `f(tx) / (f(t) x^κ)` from 1 over the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularVariationReport {
    pub max_deviation: f64,
    pub worst_t: f64,
    pub worst_x: f64,
}

pub fn check_regular_variation<F: Fn(f64) -> f64>(
    f: F,
    kappa: f64,
    t_grid: &[f64],
    x_grid: &[f64],
) -> Result<RegularVariationReport> {
    let mut report = RegularVariationReport {
        max_deviation: 0.0,
        worst_t: f64::NAN,
        worst_x: f64::NAN,
    };
    for &t in t_grid {
        let ft = f(t);
        if !(ft > 0.0) {
            return Err(domain(format!("f({t}) = {ft} is not positive")));
        }
        for &x in x_grid {
            let ftx = f(t * x);
            if !(ftx > 0.0) {
                return Err(domain(format!("f({}) = {ftx} is not positive", t * x)));
            }
            let dev = (ftx / (ft * x.powf(kappa)) - 1.0).abs();
            if dev > report.max_deviation || report.worst_t.is_nan() {
                report = RegularVariationReport {
                    max_deviation: dev,
                    worst_t: t,
                    worst_x: x,
                };
            }
        }
    }
    Ok(report)
}

/// `Σ_{k=1}^n p^k / k^b` next to its leading asymptotic `p^{n+1} / ((p−1) n^b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSum {
    pub exact: f64,
    pub asymptotic: f64,
}

impl PowerSum {
    pub fn ratio(&self) -> f64 {
        self.exact / self.asymptotic
    }
}

fn check_power_sum_args(p: f64, n: u64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(domain(format!("power sum needs p > 1, got {p}")));
    }
    if n == 0 {
        return Err(domain("power sum needs n >= 1"));
    }
    Ok(())
}

pub fn lemma5_sum(p: f64, b: f64, n: u64) -> Result<PowerSum> {
    check_power_sum_args(p, n)?;
    let top = p.powf(n as f64 + 1.0);
    if !top.is_finite() {
        return Err(Error::Overflow(format!(
            "p^(n+1) overflows for p = {p}, n = {n}; use log_lemma5_sum"
        )));
    }
    let exact: KahanSum = (1..=n).map(|k| p.powf(k as f64) / (k as f64).powf(b)).collect();
    let asymptotic = top / ((p - 1.0) * (n as f64).powf(b));
    if !exact.value().is_finite() || !asymptotic.is_finite() {
        return Err(Error::Overflow(format!("power sum overflows at n = {n}")));
    }
    Ok(PowerSum {
        exact: exact.value(),
        asymptotic,
    })
}

/// Log-domain variant of [`lemma5_sum`]; never overflows.
pub fn log_lemma5_sum(p: f64, b: f64, n: u64) -> Result<PowerSum> {
    check_power_sum_args(p, n)?;
    let lp = p.ln();
    let mut acc = LogSumExp::new();
    for k in 1..=n {
        let kf = k as f64;
        acc.add(kf * lp - b * kf.ln());
    }
    let log_asym = (n as f64 + 1.0) * lp - (p - 1.0).ln() - b * (n as f64).ln();
    Ok(PowerSum {
        exact: acc.value(),
        asymptotic: log_asym,
    })
}

/// Finite-grid diagnostic for the two growth conditions on `r₀(R₀⁻¹(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub x: Vec<f64>,
    /// `r₀(R₀⁻¹(x)) / log x`.
    pub ratio_log: Vec<f64>,
    /// `r₀(R₀⁻¹(x)) / log log x`.
    pub ratio_loglog: Vec<f64>,
    pub log_growth_ok: bool,
    pub loglog_growth_ok: bool,
}

/// Levels `10^1 .. 10^12`.
pub fn default_growth_grid() -> Vec<f64> {
    (1..=12).map(|k| 10f64.powi(k)).collect()
}

fn trending_down(v: &[f64]) -> bool {
    v.len() >= 2
        && v.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9))
        && v[v.len() - 1] < v[0]
}

pub fn theorem2_growth_conditions(env: &RateEnvelope, x_grid: &[f64]) -> Result<GrowthReport> {
    let mut ratio_log = Vec::with_capacity(x_grid.len());
    let mut ratio_loglog = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        if !(x > std::f64::consts::E) {
            return Err(domain(format!("growth grid needs x > e, got {x}")));
        }
        let r = env.rate_deriv(env.inverse(x)?);
        ratio_log.push(r / x.ln());
        ratio_loglog.push(r / x.ln().ln());
    }
    Ok(GrowthReport {
        x: x_grid.to_vec(),
        log_growth_ok: trending_down(&ratio_log),
        loglog_growth_ok: trending_down(&ratio_loglog),
        ratio_log,
        ratio_loglog,
    })
}
