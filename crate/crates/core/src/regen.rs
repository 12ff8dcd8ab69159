//! Regenerative-process engine.
//!
//! Streams i.i.d. cycles `(T_k, Y_k)`, tracks `S_k`, `N(t)` and the running
//! maximum `X̄(t)`, and evaluates the normalised statistics on a geometric
//! time grid.

use rand::Rng;

use crate::envelope::{centered_stats, normalized_stats, RateEnvelope, NormalizedStats};
use crate::error::{domain, Error, Result};
use crate::iid::{index_grid, MIN_STAT_INDEX};

/// One regeneration cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleSample {
    pub duration: f64,
    pub cycle_max: f64,
}

/// Increase of the within-cycle running maximum, `offset` measured from the
/// start of the cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub offset: f64,
    pub value: f64,
}

/// Source of i.i.d. regeneration cycles.
pub trait CycleModel {
    /// Draws one cycle. When `records` is given, every increase of the
    /// within-cycle running maximum is pushed to it, the first at offset 0.
    fn next_cycle<R: Rng + ?Sized>(&self, rng: &mut R, records: Option<&mut Vec<Record>>) -> Result<CycleSample>;

    /// Whether [`CycleModel::next_cycle`] fills `records`. Opaque generators
    /// return `false` and the engine falls back to the `Z_N / Z_{N+1}` bracket.
    fn tracks_path(&self) -> bool {
        true
    }

    /// Closed-form mean cycle duration `α_T`, if known.
    fn alpha_t(&self) -> Option<f64> {
        None
    }
}

impl<M: CycleModel + ?Sized> CycleModel for &M {
    fn next_cycle<R: Rng + ?Sized>(&self, rng: &mut R, records: Option<&mut Vec<Record>>) -> Result<CycleSample> {
        (**self).next_cycle(rng, records)
    }
    fn tracks_path(&self) -> bool {
        (**self).tracks_path()
    }
    fn alpha_t(&self) -> Option<f64> {
        (**self).alpha_t()
    }
}

/// Cycles of fixed length and fixed maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterministicCycles {
    pub duration: f64,
    pub value: f64,
}

impl CycleModel for DeterministicCycles {
    fn next_cycle<R: Rng + ?Sized>(&self, _rng: &mut R, records: Option<&mut Vec<Record>>) -> Result<CycleSample> {
        if let Some(r) = records {
            r.push(Record { offset: 0.0, value: self.value });
        }
        Ok(CycleSample {
            duration: self.duration,
            cycle_max: self.value,
        })
    }

    fn alpha_t(&self) -> Option<f64> {
        Some(self.duration)
    }
}

/// Geometric time grid `t_j = t_min · ratio^j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_min: f64,
    pub ratio: f64,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self { t_min: 1e2, ratio: 1.05 }
    }
}

impl TimeGrid {
    pub fn points(&self, t_max: f64) -> Result<Vec<f64>> {
        if !(self.t_min > 0.0) || !(self.ratio > 1.0) || !(t_max > self.t_min) {
            return Err(domain(format!(
                "grid needs t_max > t_min > 0 and ratio > 1 (t_min={}, ratio={}, t_max={t_max})",
                self.t_min, self.ratio
            )));
        }
        let mut pts = Vec::new();
        let mut j = 0i32;
        loop {
            let t = self.t_min * self.ratio.powi(j);
            if t > t_max {
                break;
            }
            pts.push(t);
            j += 1;
        }
        Ok(pts)
    }
}

/// State of the running maximum at one grid time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub t: f64,
    /// `X̄(t)`; equals `z_lower` in bracket mode.
    pub xbar: f64,
    /// `N(t) = max{k : S_k ≤ t}`.
    pub n_cycles: u64,
    /// `Z_{N(t)}`, the maximum over completed cycles.
    pub z_lower: f64,
    /// `Z_{N(t)+1}`, including the cycle in progress.
    pub z_upper: f64,
}

/// Checkpointed running-maximum trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxPath {
    pub checkpoints: Vec<Checkpoint>,
    /// `false` when the model did not expose within-cycle paths and `xbar`
    /// is the conservative lower bracket.
    pub exact: bool,
}

impl MaxPath {
    /// Monotonicity of `xbar` and `N`, and `Z_N ≤ X̄ ≤ Z_{N+1}` at every checkpoint.
    pub fn check_invariants(&self) -> Result<()> {
        for c in &self.checkpoints {
            if !(c.z_lower <= c.xbar && c.xbar <= c.z_upper) {
                return Err(Error::Model(format!("sandwich violated at t = {}: {c:?}", c.t)));
            }
        }
        for w in self.checkpoints.windows(2) {
            if w[1].xbar < w[0].xbar || w[1].n_cycles < w[0].n_cycles || w[1].t <= w[0].t {
                return Err(Error::Model(format!("path not monotone between t = {} and {}", w[0].t, w[1].t)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    /// Cycles generated, including the one that crossed `t_max`.
    pub total_cycles: u64,
    /// `N(t_max)`.
    pub cycles_by_t_max: u64,
    /// `S_K / K` over all generated cycles.
    pub alpha_t_hat: f64,
    pub mean_cycle_max: f64,
    /// `S_K`, the end of the last generated cycle.
    pub elapsed: f64,
}

/// Streams cycles until `S_k > t_max`, recording `X̄` on the grid.
pub fn run_cycles<M, R>(model: &M, t_max: f64, grid: TimeGrid, rng: &mut R) -> Result<(MaxPath, RunSummary)>
where
    M: CycleModel + ?Sized,
    R: Rng + ?Sized,
{
    let times = grid.points(t_max)?;
    let exact = model.tracks_path();
    let mut checkpoints = Vec::with_capacity(times.len());
    let mut records: Vec<Record> = Vec::new();
    let mut next = 0usize;

    let mut s = 0.0f64;
    let mut z = f64::NEG_INFINITY;
    let mut k = 0u64;
    let mut max_sum = 0.0f64;
    let mut n_at_t_max = 0u64;

    while s <= t_max {
        records.clear();
        let cycle = model.next_cycle(rng, exact.then_some(&mut records))?;
        if !(cycle.duration > 0.0) {
            return Err(Error::Model(format!("cycle duration must be positive, got {}", cycle.duration)));
        }
        let end = s + cycle.duration;
        let z_next = z.max(cycle.cycle_max);
        while next < times.len() && times[next] < end {
            let t = times[next];
            let xbar = if exact {
                let elapsed = t - s;
                records
                    .iter()
                    .take_while(|r| r.offset < elapsed)
                    .fold(z, |m, r| m.max(r.value))
            } else {
                z
            };
            let cp = Checkpoint {
                t,
                xbar,
                n_cycles: k,
                z_lower: z,
                z_upper: z_next,
            };
            debug_assert!(cp.z_lower <= cp.xbar && cp.xbar <= cp.z_upper, "sandwich: {cp:?}");
            checkpoints.push(cp);
            next += 1;
        }
        if end <= t_max {
            n_at_t_max = k + 1;
        }
        s = end;
        z = z_next;
        k += 1;
        max_sum += cycle.cycle_max;
    }

    let path = MaxPath { checkpoints, exact };
    debug_assert!(path.check_invariants().is_ok());
    Ok((
        path,
        RunSummary {
            total_cycles: k,
            cycles_by_t_max: n_at_t_max,
            alpha_t_hat: s / k as f64,
            mean_cycle_max: max_sum / k as f64,
            elapsed: s,
        },
    ))
}

/// Cycles drawn for the empirical `α_T` when no closed form exists.
pub const ALPHA_T_BURN_IN: u64 = 10_000;

/// Mean duration over `cycles` independent cycles.
pub fn estimate_alpha_t<M, R>(model: &M, cycles: u64, rng: &mut R) -> Result<f64>
where
    M: CycleModel + ?Sized,
    R: Rng + ?Sized,
{
    if cycles == 0 {
        return Err(domain("need at least one cycle"));
    }
    let mut total = 0.0;
    for _ in 0..cycles {
        total += model.next_cycle(rng, None)?.duration;
    }
    Ok(total / cycles as f64)
}

/// `α_T` from the model's closed form, else from a burn-in run.
pub fn resolve_alpha_t<M, R>(model: &M, rng: &mut R) -> Result<(f64, AlphaSource)>
where
    M: CycleModel + ?Sized,
    R: Rng + ?Sized,
{
    match model.alpha_t() {
        Some(a) => Ok((a, AlphaSource::ClosedForm)),
        None => Ok((estimate_alpha_t(model, ALPHA_T_BURN_IN, rng)?, AlphaSource::BurnIn)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaSource {
    ClosedForm,
    BurnIn,
}

impl AlphaSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlphaSource::ClosedForm => "closed_form",
            AlphaSource::BurnIn => "burn_in",
        }
    }
}

/// Normalised statistics along a path.
pub fn theorem1_trace(path: &MaxPath, env: &RateEnvelope, alpha_t: f64) -> Result<Vec<NormalizedStats>> {
    path.checkpoints
        .iter()
        .map(|c| normalized_stats(env, alpha_t, c.t, c.xbar))
        .collect()
}

/// Statistics indexed by observation count for a process observed at event
/// times `t_1 < t_2 < ...`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventStats {
    pub n: u64,
    pub t_n: f64,
    pub xbar_n: f64,
    pub s2: f64,
    pub s3: f64,
}

/// Event-indexed statistics with centering `A(n) = R₀⁻¹(log(αn/α_T))`,
/// where `α = lim t_n/n`. Evaluated on a geometric index grid with `n ≥ 16`.
///
/// The running maximum over the events must coincide with the continuous
/// running maximum (true for GI/G/1 waiting times observed at arrivals).
pub fn proposition1_trace(
    events: &[(f64, f64)],
    env: &RateEnvelope,
    alpha: f64,
    alpha_t: f64,
    grid_ratio: f64,
) -> Result<Vec<EventStats>> {
    if !(alpha > 0.0) || !(alpha_t > 0.0) {
        return Err(domain(format!("need alpha > 0 and alpha_T > 0, got {alpha}, {alpha_t}")));
    }
    if events.len() < MIN_STAT_INDEX as usize {
        return Err(domain(format!("need at least {MIN_STAT_INDEX} events")));
    }
    let grid = index_grid(events.len() as u64, grid_ratio)?;
    let mut out = Vec::new();
    let mut xbar = f64::NEG_INFINITY;
    let mut prev_t = f64::NEG_INFINITY;
    let mut gi = 0usize;
    for (i, &(t, x)) in events.iter().enumerate() {
        if t < prev_t {
            return Err(domain(format!("event times must be nondecreasing (t[{i}] = {t} < {prev_t})")));
        }
        prev_t = t;
        xbar = xbar.max(x);
        let n = i as u64 + 1;
        if gi < grid.len() && grid[gi] == n {
            gi += 1;
            if n < MIN_STAT_INDEX {
                continue;
            }
            let nf = n as f64;
            let center = env.inverse((alpha * nf / alpha_t).ln())?;
            let s = centered_stats(env, center, nf, xbar)?;
            out.push(EventStats {
                n,
                t_n: t,
                xbar_n: xbar,
                s2: s.s2,
                s3: s.s3,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iid::{lemma1_stats, running_max_series};
    use crate::rng::replica_rng;
    use rand_distr::Exp1;

    /// Cycles with random length and max but no path information.
    struct Opaque;

    impl CycleModel for Opaque {
        fn next_cycle<R: Rng + ?Sized>(&self, rng: &mut R, _records: Option<&mut Vec<Record>>) -> Result<CycleSample> {
            Ok(CycleSample {
                duration: 0.5 + rng.sample::<f64, _>(Exp1),
                cycle_max: rng.sample(Exp1),
            })
        }
        fn tracks_path(&self) -> bool {
            false
        }
    }

    #[test]
    fn deterministic_cycles() {
        let model = DeterministicCycles { duration: 1.0, value: 3.0 };
        let grid = TimeGrid { t_min: 10.5, ratio: 2.0 };
        let (path, summary) = run_cycles(&model, 100.0, grid, &mut replica_rng(0, 0)).unwrap();
        let first = path.checkpoints[0];
        assert_eq!(first.t, 10.5);
        assert_eq!(first.n_cycles, 10);
        assert_eq!(first.xbar, 3.0);
        assert_eq!(summary.alpha_t_hat, 1.0);
        assert_eq!(summary.cycles_by_t_max, 100);
        assert!(path.exact);
        for c in &path.checkpoints {
            assert_eq!(c.n_cycles as f64, c.t.floor());
        }
    }

    #[test]
    fn bracket_mode_is_flagged_and_sandwiched() {
        let (path, _) = run_cycles(&Opaque, 1e4, TimeGrid::default(), &mut replica_rng(3, 0)).unwrap();
        assert!(!path.exact);
        path.check_invariants().unwrap();
        assert!(path.checkpoints.iter().all(|c| c.xbar == c.z_lower));
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid { t_min: 0.0, ratio: 1.05 }.points(10.0).is_err());
        assert!(TimeGrid { t_min: 1.0, ratio: 1.0 }.points(10.0).is_err());
        assert!(TimeGrid { t_min: 100.0, ratio: 1.05 }.points(10.0).is_err());
    }

    #[test]
    fn run_is_deterministic() {
        let a = run_cycles(&Opaque, 1e4, TimeGrid::default(), &mut replica_rng(9, 4)).unwrap();
        let b = run_cycles(&Opaque, 1e4, TimeGrid::default(), &mut replica_rng(9, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn centered_path_has_zero_stats() {
        let env = RateEnvelope::linear(0.5).unwrap();
        let alpha_t = 4.0;
        let checkpoints = TimeGrid::default()
            .points(1e6)
            .unwrap()
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                let a0 = crate::envelope::a0_of_t(&env, alpha_t, t).unwrap();
                Checkpoint { t, xbar: a0, n_cycles: i as u64, z_lower: a0, z_upper: a0 }
            })
            .collect();
        let path = MaxPath { checkpoints, exact: true };
        for s in theorem1_trace(&path, &env, alpha_t).unwrap() {
            assert!(s.s2.abs() < 1e-12 && s.s3.abs() < 1e-12);
        }
    }

    #[test]
    fn event_trace_reduces_to_iid_stats() {
        let env = RateEnvelope::linear(1.0).unwrap();
        let mut rng = replica_rng(21, 0);
        let xs: Vec<f64> = (0..50_000).map(|_| rng.sample(Exp1)).collect();
        let events: Vec<(f64, f64)> = xs.iter().enumerate().map(|(i, &x)| ((i + 1) as f64, x)).collect();
        let prop = proposition1_trace(&events, &env, 1.0, 1.0, 1.1).unwrap();

        let mut it = xs.iter();
        let series = running_max_series(|_| Ok(*it.next().unwrap()), xs.len() as u64, 1.1, &mut rng).unwrap();
        let iid = lemma1_stats(&env, &series).unwrap();
        assert_eq!(prop.len(), iid.len());
        for (p, q) in prop.iter().zip(&iid) {
            assert_eq!(p.n, q.n);
            assert_eq!(p.s2, q.s2);
            assert_eq!(p.s3, q.s3);
        }
    }

    #[test]
    fn event_trace_misspecified_rate_shift_vanishes() {
        // Doubling α shifts the centering by log 2 / γ, so s2 moves by log 2 / L2(n).
        let env = RateEnvelope::linear(1.0).unwrap();
        let events: Vec<(f64, f64)> = (1..=1_000_000u64).map(|i| (i as f64, (i as f64).ln())).collect();
        let a = proposition1_trace(&events, &env, 1.0, 1.0, 1.5).unwrap();
        let b = proposition1_trace(&events, &env, 2.0, 1.0, 1.5).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let expect = std::f64::consts::LN_2 / (x.n as f64).ln().ln();
            assert!(((x.s2 - y.s2) - expect).abs() < 1e-9);
        }
        let last = (a.last().unwrap().s2 - b.last().unwrap().s2).abs();
        let first = (a[0].s2 - b[0].s2).abs();
        assert!(last < first);
    }

    #[test]
    fn event_trace_rejects_bad_input() {
        let env = RateEnvelope::linear(1.0).unwrap();
        let short = vec![(1.0, 1.0); 5];
        assert!(proposition1_trace(&short, &env, 1.0, 1.0, 1.1).is_err());
        let mut back: Vec<(f64, f64)> = (1..=40).map(|i| (i as f64, 1.0)).collect();
        back[30].0 = 0.5;
        assert!(proposition1_trace(&back, &env, 1.0, 1.0, 1.1).is_err());
    }
}
