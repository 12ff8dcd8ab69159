//! Small numeric kernels shared by the model modules.

use crate::error::{Error, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Streaming `log Σ exp(x_i)` that rescales on the fly.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: KahanSum,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: KahanSum::new(),
        }
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, log_term: f64) {
        if log_term == f64::NEG_INFINITY {
            return;
        }
        if log_term > self.max {
            let rescale = (self.max - log_term).exp();
            let mut s = KahanSum::new();
            s.add(self.scaled.value() * rescale);
            s.add(1.0);
            self.scaled = s;
            self.max = log_term;
        } else {
            self.scaled.add((log_term - self.max).exp());
        }
    }

    pub fn value(&self) -> f64 {
        self.max + self.scaled.value().ln()
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `abs_tol` or can no longer be
/// split in floating point.
pub fn bisect_root<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, abs_tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::Bracket { lo, hi, level: 0.0 });
    }
    while hi - lo > abs_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One-sample Kolmogorov–Smirnov distance between `sample` and `cdf`.
///
/// The sample is sorted in place.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &mut [f64], cdf: F) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sample.iter().enumerate() {
        let c = cdf(x);
        d = d.max((i as f64 + 1.0) / n - c).max(c - i as f64 / n);
    }
    d
}

/// Two-sample Kolmogorov–Smirnov distance. Both samples are sorted in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Ordinary least-squares slope and intercept of `y` on `x`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Slope of `-log P̂(M > x)` against `x` for the empirical tail of `maxima`.
///
/// Grid points whose empirical tail is empty are dropped.
pub fn tail_slope(maxima: &[f64], grid: &[f64]) -> f64 {
    let n = maxima.len() as f64;
    let mut sorted = maxima.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &x in grid {
        let above = sorted.len() - sorted.partition_point(|&m| m <= x);
        if above > 0 {
            xs.push(x);
            ys.push(-((above as f64) / n).ln());
        }
    }
    ols(&xs, &ys).0
}

/// Richardson table for a sequence sampled at step sizes `h, h/2, h/4, ...`
/// whose error expands in integer powers of `h`.
///
/// Returns the most refined extrapolant together with the gap to its
/// predecessor on the diagonal, used as an error estimate.
pub fn richardson(values: &[f64], order: usize) -> (f64, f64) {
    assert!(values.len() >= 2, "need at least two refinements");
    let mut table: Vec<Vec<f64>> = vec![values.to_vec()];
    for k in 1..=order.min(values.len() - 1) {
        let prev = &table[k - 1];
        let factor = 2f64.powi(k as i32);
        let next: Vec<f64> = prev
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        table.push(next);
    }
    let last = table.last().unwrap();
    let best = *last.last().unwrap();
    let err = if last.len() >= 2 {
        (best - last[last.len() - 2]).abs()
    } else {
        let prev = &table[table.len() - 2];
        (best - prev[prev.len() - 1]).abs()
    };
    (best, err)
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_2,
    0.063_092_092_629_978_6,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * GK_WK[7];
    let mut gauss = fc * GK_WG[3];
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let s = f(c - dx) + f(c + dx);
        kron += GK_WK[i] * s;
        if i % 2 == 1 {
            gauss += GK_WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    let (val, err) = gk15(f, a, b);
    if !val.is_finite() {
        return Err(Error::Convergence(format!("non-finite integrand on [{a}, {b}]")));
    }
    if err <= tol.max(1e-15 * val.abs()) {
        return Ok(val);
    }
    if depth == 0 {
        return Err(Error::Convergence(format!(
            "quadrature did not reach tolerance {tol:e} on [{a}, {b}] (err {err:e})"
        )));
    }
    let m = 0.5 * (a + b);
    Ok(adapt(f, a, m, 0.5 * tol, depth - 1)? + adapt(f, m, b, 0.5 * tol, depth - 1)?)
}

/// Adaptive Gauss–Kronrod integral of `f` over `[a, b]` (finite).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    adapt(&f, a, b, tol, 40)
}

/// Integral of `f` over `[a, ∞)` via `x = a + u/(1-u)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> Result<f64> {
    let g = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - u;
        let v = f(a + u / w) / (w * w);
        if v.is_finite() { v } else { f64::INFINITY }
    };
    adapt(&g, 0.0, 1.0, tol, 40)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_beats_naive_on_cancellation() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        let s: KahanSum = xs.iter().copied().collect();
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn log_sum_exp_matches_direct() {
        let xs = [0.1, -3.0, 2.5, 700.0, 699.0];
        let mut acc = LogSumExp::new();
        for &x in &xs {
            acc.add(x);
        }
        let direct = 700.0 + (xs.iter().map(|x| (x - 700.0f64).exp()).sum::<f64>()).ln();
        assert!((acc.value() - direct).abs() < 1e-12);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect_root(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect_root(|x| x * x + 1.0, 0.0, 2.0, 1e-14).is_err());
    }

    #[test]
    fn ks_of_uniform_grid_is_half_step() {
        let mut s: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5) / 10.0).collect();
        let d = ks_distance(&mut s, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.05).abs() < 1e-12);
    }

    #[test]
    fn ks_two_sample_identical_is_zero() {
        let mut a = vec![3.0, 1.0, 2.0];
        let mut b = a.clone();
        assert_eq!(ks_two_sample(&mut a, &mut b), 0.0);
        let mut c = vec![10.0, 11.0, 12.0];
        assert_eq!(ks_two_sample(&mut a, &mut c), 1.0);
    }

    #[test]
    fn ols_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let (m, c) = ols(&x, &y);
        assert!((m - 3.0).abs() < 1e-12 && (c + 1.0).abs() < 1e-12);
    }

    #[test]
    fn richardson_kills_polynomial_error() {
        // g(h) = 2 + 3h - 5h^2 sampled at h = 1, 1/2, 1/4, 1/8
        let vals: Vec<f64> = (0..4)
            .map(|j| {
                let h = 0.5f64.powi(j);
                2.0 + 3.0 * h - 5.0 * h * h
            })
            .collect();
        let (best, _) = richardson(&vals, 2);
        assert!((best - 2.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_known_integrals() {
        let v = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let w = integrate_to_infinity(|x| (-x).exp(), 0.0, 1e-12).unwrap();
        assert!((w - 1.0).abs() < 1e-11);
        let g = integrate_to_infinity(|x| (-x * x).exp(), 0.0, 1e-12).unwrap();
        assert!((g - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }
}
