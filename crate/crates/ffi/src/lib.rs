//! C ABI over `regen-extremes`.
//!
//! Every fallible call returns a [`RegenStatus`] and writes results through
//! out-pointers. On failure the message is kept per thread and can be read
//! with [`regen_last_error_message`]. Objects are opaque handles released by
//! the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use regen_extremes::birth_death::{bd_envelope, hitting_time_stat, BDSpec, HittingConfig, DEFAULT_EVENT_BUDGET};
use regen_extremes::envelope::{a0_of_t, generalized_inverse, lemma5_sum, normalized_stats, RateEnvelope};
use regen_extremes::queues::{cramer_gamma, x_rho_root, Dist, GiG1Spec, MMmSpec};
use regen_extremes::regen::{resolve_alpha_t, run_cycles, CycleModel, MaxPath, TimeGrid};
use regen_extremes::rng::{aux_rng, replica_rng};
use regen_extremes::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegenStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    NoRoot = 4,
    Convergence = 5,
    Overflow = 6,
    Budget = 7,
    Bracket = 8,
    Model = 9,
    CycleOverflow = 10,
    Panic = 11,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn regen_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

struct Fail(RegenStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Bracket { .. } => RegenStatus::Bracket,
            Error::Domain(_) => RegenStatus::Domain,
            Error::Overflow(_) => RegenStatus::Overflow,
            Error::NoRoot(_) => RegenStatus::NoRoot,
            Error::Convergence(_) => RegenStatus::Convergence,
            Error::CycleOverflow { .. } => RegenStatus::CycleOverflow,
            Error::Model(_) => RegenStatus::Model,
            Error::Budget(_) => RegenStatus::Budget,
        };
        Fail(status, e.to_string())
    }
}

fn null(name: &str) -> Fail {
    Fail(RegenStatus::NullPointer, format!("{name} is NULL"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(RegenStatus::InvalidArgument, msg.into())
}

/// Runs `f`, converting errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> RegenStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RegenStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside regen-extremes".into());
            RegenStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be NULL or valid for writes.
unsafe fn write<T>(p: *mut T, v: T, name: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(name));
    }
    p.write(v);
    Ok(())
}

/// # Safety
/// `p` must be NULL or point to a live `T`.
unsafe fn borrow<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(name))
}

/// # Safety
/// `s` must be NULL or a NUL-terminated string.
unsafe fn c_str<'a>(s: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(s).to_str().map_err(|_| invalid(format!("{name} is not UTF-8")))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// # Safety
/// `p` must be NULL or a pointer obtained from `boxed`.
unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

// ---------------------------------------------------------------------------
// scalar routines

/// Positive root of `e^x = 1 + x/rho`, `0 < rho < 1`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_x_rho_root(rho: f64, out: *mut f64) -> RegenStatus {
    guard(|| write(out, x_rho_root(rho)?, "out"))
}

fn gamma_of(spec: Result<GiG1Spec, Error>) -> Result<f64, Fail> {
    Ok(cramer_gamma(&spec?)?.gamma)
}

/// Cramér exponent of the M/M/1 waiting time.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_cramer_gamma_mm1(lambda: f64, mu: f64, out: *mut f64) -> RegenStatus {
    guard(|| write(out, gamma_of(GiG1Spec::mm1(lambda, mu))?, "out"))
}

/// Cramér exponent of the M/D/1 waiting time with service time `d`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_cramer_gamma_md1(lambda: f64, d: f64, out: *mut f64) -> RegenStatus {
    guard(|| write(out, gamma_of(GiG1Spec::md1(lambda, d))?, "out"))
}

/// Cramér exponent of a GI/G/1 queue given distribution strings such as
/// `"exp:0.5"`, `"det:1"`, `"uniform:1:3"`, `"erlang:2:1"`, `"weibull:2:1"`.
///
/// # Safety
/// `arrival` and `service` must be NUL-terminated; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_cramer_gamma_gig1(
    arrival: *const c_char,
    service: *const c_char,
    out: *mut f64,
) -> RegenStatus {
    guard(|| {
        let a: Dist = c_str(arrival, "arrival")?.parse()?;
        let s: Dist = c_str(service, "service")?.parse()?;
        write(out, gamma_of(GiG1Spec::new(a, s))?, "out")
    })
}

/// `Σ_{k=1}^n p^k/k^b` and its asymptotic form `p^{n+1}/((p−1) n^b)`.
///
/// # Safety
/// `exact` and `asymptotic` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_lemma5_sum(
    p: f64,
    b: f64,
    n: u64,
    exact: *mut f64,
    asymptotic: *mut f64,
) -> RegenStatus {
    guard(|| {
        let s = lemma5_sum(p, b, n)?;
        write(exact, s.exact, "exact")?;
        write(asymptotic, s.asymptotic, "asymptotic")
    })
}

/// Nondecreasing function supplied from C.
pub type RegenRealFn = Option<unsafe extern "C" fn(x: f64, user_data: *mut c_void) -> f64>;

/// `inf{x in [lo, hi] : h(x) > y}` for a nondecreasing callback `h`.
///
/// # Safety
/// `h` must be safe to call with `user_data`; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_generalized_inverse(
    h: RegenRealFn,
    user_data: *mut c_void,
    y: f64,
    lo: f64,
    hi: f64,
    out: *mut f64,
) -> RegenStatus {
    guard(|| {
        let h = h.ok_or_else(|| null("h"))?;
        let x = generalized_inverse(|x| h(x, user_data), y, (lo, hi))?;
        write(out, x, "out")
    })
}

// ---------------------------------------------------------------------------
// envelopes

/// Opaque log-tail envelope `R₀`.
pub struct RegenEnvelope {
    inner: RateEnvelope,
}

fn new_envelope(env: Result<RateEnvelope, Error>, out: *mut *mut RegenEnvelope) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    let h = boxed(RegenEnvelope { inner: env? });
    unsafe { out.write(h) };
    Ok(())
}

/// `R₀(x) = γx`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_envelope_linear(gamma: f64, out: *mut *mut RegenEnvelope) -> RegenStatus {
    guard(|| new_envelope(RateEnvelope::linear(gamma), out))
}

/// `R₀(x) = x^β`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_envelope_power(beta: f64, out: *mut *mut RegenEnvelope) -> RegenStatus {
    guard(|| new_envelope(RateEnvelope::power(beta), out))
}

/// Birth–death envelope `R₀(x) = −x log ρ − (a/λ) log x`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_envelope_birth_death(
    lambda: f64,
    mu: f64,
    a: f64,
    out: *mut *mut RegenEnvelope,
) -> RegenStatus {
    guard(|| new_envelope(BDSpec::new(lambda, mu, a).and_then(|s| bd_envelope(&s)), out))
}

/// # Safety
/// `env` must be NULL or a handle from a `regen_envelope_*` constructor, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn regen_envelope_free(env: *mut RegenEnvelope) {
    free(env)
}

/// # Safety
/// `env` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_envelope_rate(env: *const RegenEnvelope, x: f64, out: *mut f64) -> RegenStatus {
    guard(|| write(out, borrow(env, "env")?.inner.rate(x), "out"))
}

/// `R₀⁻¹(y)`.
///
/// # Safety
/// `env` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_envelope_inverse(env: *const RegenEnvelope, y: f64, out: *mut f64) -> RegenStatus {
    guard(|| write(out, borrow(env, "env")?.inner.inverse(y)?, "out"))
}

/// Measured bound on `|R₁|` (0 when the envelope carries none).
///
/// # Safety
/// `env` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_envelope_r1_bound(env: *const RegenEnvelope, out: *mut f64) -> RegenStatus {
    guard(|| write(out, borrow(env, "env")?.inner.r1_bound(), "out"))
}

/// Centering `A₀(t) = R₀⁻¹(log(t/α_T))`.
///
/// # Safety
/// `env` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_envelope_a0(
    env: *const RegenEnvelope,
    alpha_t: f64,
    t: f64,
    out: *mut f64,
) -> RegenStatus {
    guard(|| write(out, a0_of_t(&borrow(env, "env")?.inner, alpha_t, t)?, "out"))
}

/// The `log log` and `log log log` normalised deviations of `xbar` at `t`.
///
/// # Safety
/// `env` must be a live handle; `s2` and `s3` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_normalized_stats(
    env: *const RegenEnvelope,
    alpha_t: f64,
    t: f64,
    xbar: f64,
    s2: *mut f64,
    s3: *mut f64,
) -> RegenStatus {
    guard(|| {
        let st = normalized_stats(&borrow(env, "env")?.inner, alpha_t, t, xbar)?;
        write(s2, st.s2, "s2")?;
        write(s3, st.s3, "s3")
    })
}

// ---------------------------------------------------------------------------
// birth–death formulas

/// Opaque birth–death model with rates `λn + a` up and `μn` down.
pub struct RegenBirthDeath {
    spec: BDSpec,
    c: Option<f64>,
}

impl RegenBirthDeath {
    fn c(&mut self) -> Result<f64, Fail> {
        if let Some(c) = self.c {
            return Ok(c);
        }
        let c = self.spec.c_constant()?.value;
        self.c = Some(c);
        Ok(c)
    }
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_bd_new(lambda: f64, mu: f64, a: f64, out: *mut *mut RegenBirthDeath) -> RegenStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = BDSpec::new(lambda, mu, a)?;
        out.write(boxed(RegenBirthDeath { spec, c: None }));
        Ok(())
    })
}

/// # Safety
/// `bd` must be NULL or a handle from [`regen_bd_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn regen_bd_free(bd: *mut RegenBirthDeath) {
    free(bd)
}

/// `P(cycle maximum > n)`.
///
/// # Safety
/// `bd` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_bd_q_exact(bd: *const RegenBirthDeath, n: u64, out: *mut f64) -> RegenStatus {
    guard(|| write(out, borrow(bd, "bd")?.spec.q_exact(n), "out"))
}

/// `log P(cycle maximum > n)`, usable where the probability underflows.
///
/// # Safety
/// `bd` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_bd_log_q_exact(bd: *const RegenBirthDeath, n: u64, out: *mut f64) -> RegenStatus {
    guard(|| write(out, borrow(bd, "bd")?.spec.log_q_exact(n), "out"))
}

/// `((1/ρ − 1)/C) ρ^{n+1} n^{a/λ}`, `n ≥ 1`. The first call computes `C`.
///
/// # Safety
/// `bd` must be a live handle not used concurrently; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_bd_q_asymptotic(bd: *mut RegenBirthDeath, n: u64, out: *mut f64) -> RegenStatus {
    guard(|| {
        let h = bd.as_mut().ok_or_else(|| null("bd"))?;
        let c = h.c()?;
        write(out, h.spec.log_q_asymptotic(n, c)?.exp(), "out")
    })
}

/// `C = lim n^{a/λ} β_n` and its extrapolation error.
///
/// # Safety
/// `bd` must be a live handle; `value` and `error` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_bd_c_constant(bd: *const RegenBirthDeath, value: *mut f64, error: *mut f64) -> RegenStatus {
    guard(|| {
        let c = borrow(bd, "bd")?.spec.c_constant()?;
        write(value, c.value, "value")?;
        write(error, c.error, "error")
    })
}

/// Stationary probability of state 0.
///
/// # Safety
/// `bd` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_bd_p0(bd: *const RegenBirthDeath, out: *mut f64) -> RegenStatus {
    guard(|| write(out, borrow(bd, "bd")?.spec.p0(), "out"))
}

/// Mean cycle length `1/(a p₀)`.
///
/// # Safety
/// `bd` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_bd_alpha_t(bd: *const RegenBirthDeath, out: *mut f64) -> RegenStatus {
    guard(|| write(out, borrow(bd, "bd")?.spec.alpha_t(), "out"))
}

/// Simulates `replicas` hitting times of level `n` from state 0 and writes
/// the scaled times into `scaled` (length `replicas`), the KS distance to
/// `Exp(a p₀)` and the sample mean. `event_budget <= 0` selects the default.
///
/// # Safety
/// `bd` must be a live handle; `scaled` valid for `replicas` writes;
/// `ks_distance` and `mean_scaled` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_bd_hitting_times(
    bd: *const RegenBirthDeath,
    n: u64,
    replicas: u64,
    seed: u64,
    event_budget: f64,
    scaled: *mut f64,
    ks_distance: *mut f64,
    mean_scaled: *mut f64,
) -> RegenStatus {
    guard(|| {
        let spec = borrow(bd, "bd")?.spec;
        if scaled.is_null() {
            return Err(null("scaled"));
        }
        let cfg = HittingConfig {
            event_budget: if event_budget > 0.0 { event_budget } else { DEFAULT_EVENT_BUDGET },
            ..HittingConfig::new(n, replicas, seed)
        };
        let sample = hitting_time_stat(&spec, &cfg)?;
        std::slice::from_raw_parts_mut(scaled, sample.scaled.len()).copy_from_slice(&sample.scaled);
        write(ks_distance, sample.ks_distance, "ks_distance")?;
        write(mean_scaled, sample.mean_scaled, "mean_scaled")
    })
}

// ---------------------------------------------------------------------------
// simulation

enum ModelKind {
    GiG1(GiG1Spec),
    MMm(MMmSpec),
    BirthDeath(BDSpec),
}

/// Opaque regenerative model for [`regen_run_cycles`].
pub struct RegenModel {
    kind: ModelKind,
}

fn new_model(kind: Result<ModelKind, Error>, out: *mut *mut RegenModel) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    let h = boxed(RegenModel { kind: kind? });
    unsafe { out.write(h) };
    Ok(())
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_model_mm1(lambda: f64, mu: f64, out: *mut *mut RegenModel) -> RegenStatus {
    guard(|| new_model(GiG1Spec::mm1(lambda, mu).map(ModelKind::GiG1), out))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_model_md1(lambda: f64, d: f64, out: *mut *mut RegenModel) -> RegenStatus {
    guard(|| new_model(GiG1Spec::md1(lambda, d).map(ModelKind::GiG1), out))
}

/// GI/G/1 from distribution strings (see [`regen_cramer_gamma_gig1`]).
///
/// # Safety
/// `arrival` and `service` must be NUL-terminated; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_model_gig1(
    arrival: *const c_char,
    service: *const c_char,
    out: *mut *mut RegenModel,
) -> RegenStatus {
    guard(|| {
        let a: Dist = c_str(arrival, "arrival")?.parse()?;
        let s: Dist = c_str(service, "service")?.parse()?;
        new_model(GiG1Spec::new(a, s).map(ModelKind::GiG1), out)
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_model_mmm(lambda: f64, mu: f64, servers: u32, out: *mut *mut RegenModel) -> RegenStatus {
    guard(|| new_model(MMmSpec::new(lambda, mu, servers).map(ModelKind::MMm), out))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_model_birth_death(lambda: f64, mu: f64, a: f64, out: *mut *mut RegenModel) -> RegenStatus {
    guard(|| new_model(BDSpec::new(lambda, mu, a).map(ModelKind::BirthDeath), out))
}

/// # Safety
/// `model` must be NULL or a handle from a `regen_model_*` constructor, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn regen_model_free(model: *mut RegenModel) {
    free(model)
}

/// Mean cycle length: closed form where known, else a burn-in estimate
/// drawn from an auxiliary stream of `seed`.
///
/// # Safety
/// `model` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_model_alpha_t(model: *const RegenModel, seed: u64, out: *mut f64) -> RegenStatus {
    guard(|| {
        let m = borrow(model, "model")?;
        let mut rng = aux_rng(seed, 0);
        let (a, _) = match &m.kind {
            ModelKind::GiG1(s) => resolve_alpha_t(s, &mut rng)?,
            ModelKind::MMm(s) => resolve_alpha_t(s, &mut rng)?,
            ModelKind::BirthDeath(s) => resolve_alpha_t(s, &mut rng)?,
        };
        write(out, a, "out")
    })
}

/// Running-maximum state at one checkpoint.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegenCheckpoint {
    pub t: f64,
    pub xbar: f64,
    pub n_cycles: u64,
    pub z_lower: f64,
    pub z_upper: f64,
}

/// Opaque checkpointed trajectory.
pub struct RegenPath {
    path: MaxPath,
}

fn run_model<M: CycleModel>(m: &M, t_max: f64, grid: TimeGrid, seed: u64, replica: u64) -> Result<MaxPath, Error> {
    Ok(run_cycles(m, t_max, grid, &mut replica_rng(seed, replica))?.0)
}

/// Simulates cycles of `model` up to `t_max` on the grid `t_min · ratio^j`,
/// using stream `replica` of `seed`.
///
/// # Safety
/// `model` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_run_cycles(
    model: *const RegenModel,
    t_max: f64,
    t_min: f64,
    ratio: f64,
    seed: u64,
    replica: u64,
    out: *mut *mut RegenPath,
) -> RegenStatus {
    guard(|| {
        let m = borrow(model, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = TimeGrid { t_min, ratio };
        let path = match &m.kind {
            ModelKind::GiG1(s) => run_model(s, t_max, grid, seed, replica)?,
            ModelKind::MMm(s) => run_model(s, t_max, grid, seed, replica)?,
            ModelKind::BirthDeath(s) => run_model(s, t_max, grid, seed, replica)?,
        };
        out.write(boxed(RegenPath { path }));
        Ok(())
    })
}

/// Number of checkpoints; 0 for NULL.
///
/// # Safety
/// `path` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn regen_path_len(path: *const RegenPath) -> usize {
    path.as_ref().map_or(0, |p| p.path.checkpoints.len())
}

/// # Safety
/// `path` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn regen_path_get(path: *const RegenPath, index: usize, out: *mut RegenCheckpoint) -> RegenStatus {
    guard(|| {
        let p = borrow(path, "path")?;
        let c = p
            .path
            .checkpoints
            .get(index)
            .ok_or_else(|| invalid(format!("index {index} out of range (len {})", p.path.checkpoints.len())))?;
        write(
            out,
            RegenCheckpoint {
                t: c.t,
                xbar: c.xbar,
                n_cycles: c.n_cycles,
                z_lower: c.z_lower,
                z_upper: c.z_upper,
            },
            "out",
        )
    })
}

/// # Safety
/// `path` must be NULL or a handle from [`regen_run_cycles`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn regen_path_free(path: *mut RegenPath) {
    free(path)
}
