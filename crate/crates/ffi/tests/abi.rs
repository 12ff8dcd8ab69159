use std::ffi::{c_void, CStr, CString};
use std::process::Command;
use std::ptr;

use regen_extremes_ffi::*;

fn last_error() -> String {
    let p = regen_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn x_rho_root_matches_its_equation() {
    let mut x = 0.0;
    assert_eq!(unsafe { regen_x_rho_root(0.5, &mut x) }, RegenStatus::Ok);
    assert!((x.exp() - 1.0 - x / 0.5).abs() < 1e-10);
    assert_eq!(unsafe { regen_x_rho_root(1.5, &mut x) }, RegenStatus::Domain);
    assert!(!last_error().is_empty());
}

#[test]
fn null_out_pointer_is_reported() {
    assert_eq!(unsafe { regen_x_rho_root(0.5, ptr::null_mut()) }, RegenStatus::NullPointer);
    assert!(last_error().contains("NULL"));
}

#[test]
fn cramer_routes() {
    let mut g = 0.0;
    assert_eq!(unsafe { regen_cramer_gamma_mm1(1.0, 2.0, &mut g) }, RegenStatus::Ok);
    assert!((g - 1.0).abs() < 1e-9);

    let (mut md1, mut x) = (0.0, 0.0);
    assert_eq!(unsafe { regen_cramer_gamma_md1(0.5, 1.0, &mut md1) }, RegenStatus::Ok);
    unsafe { regen_x_rho_root(0.5, &mut x) };
    assert!((md1 - x).abs() < 1e-9);

    let a = CString::new("exp:0.5").unwrap();
    let s = CString::new("det:1").unwrap();
    let mut gig = 0.0;
    assert_eq!(unsafe { regen_cramer_gamma_gig1(a.as_ptr(), s.as_ptr(), &mut gig) }, RegenStatus::Ok);
    assert!((gig - md1).abs() < 1e-9);

    let bad = CString::new("cauchy:1").unwrap();
    assert_ne!(unsafe { regen_cramer_gamma_gig1(bad.as_ptr(), s.as_ptr(), &mut gig) }, RegenStatus::Ok);
    assert_eq!(unsafe { regen_cramer_gamma_mm1(2.0, 1.0, &mut g) }, RegenStatus::Model);
}

#[test]
fn power_sum_by_hand() {
    let (mut exact, mut asym) = (0.0, 0.0);
    assert_eq!(unsafe { regen_lemma5_sum(2.0, 1.0, 3, &mut exact, &mut asym) }, RegenStatus::Ok);
    assert!((exact - (2.0 + 2.0 + 8.0 / 3.0)).abs() < 1e-12);
    assert!((asym - 16.0 / 3.0).abs() < 1e-12);
}

unsafe extern "C" fn floor_fn(x: f64, data: *mut c_void) -> f64 {
    *(data as *mut u32) += 1;
    x.floor()
}

#[test]
fn generalized_inverse_through_callback() {
    let mut calls = 0u32;
    let mut x = 0.0;
    let st = unsafe {
        regen_generalized_inverse(Some(floor_fn), &mut calls as *mut u32 as *mut c_void, 2.0, 0.0, 10.0, &mut x)
    };
    assert_eq!(st, RegenStatus::Ok);
    // inf{x : floor(x) > 2} = 3
    assert!((x - 3.0).abs() < 1e-9);
    assert!(calls > 0);
    assert_eq!(
        unsafe { regen_generalized_inverse(None, ptr::null_mut(), 2.0, 0.0, 10.0, &mut x) },
        RegenStatus::NullPointer
    );
}

#[test]
fn envelope_handle_lifecycle() {
    let mut env = ptr::null_mut();
    assert_eq!(unsafe { regen_envelope_linear(2.0, &mut env) }, RegenStatus::Ok);
    let (mut r, mut inv, mut a0) = (0.0, 0.0, 0.0);
    unsafe {
        regen_envelope_rate(env, 3.0, &mut r);
        regen_envelope_inverse(env, 6.0, &mut inv);
        regen_envelope_a0(env, 1.0, 1e4, &mut a0);
    }
    assert_eq!(r, 6.0);
    assert!((inv - 3.0).abs() < 1e-12);
    assert!((a0 - 1e4f64.ln() / 2.0).abs() < 1e-12);

    let (mut s2, mut s3) = (0.0, 0.0);
    assert_eq!(unsafe { regen_normalized_stats(env, 1.0, 1e4, a0, &mut s2, &mut s3) }, RegenStatus::Ok);
    assert_eq!(s2, 0.0);
    assert_eq!(unsafe { regen_normalized_stats(env, 1.0, 10.0, a0, &mut s2, &mut s3) }, RegenStatus::Domain);
    unsafe { regen_envelope_free(env) };
    unsafe { regen_envelope_free(ptr::null_mut()) };

    assert_eq!(unsafe { regen_envelope_linear(-1.0, &mut env) }, RegenStatus::Domain);
}

#[test]
fn birth_death_handle() {
    let mut bd = ptr::null_mut();
    assert_eq!(unsafe { regen_bd_new(1.0, 2.0, 1.0, &mut bd) }, RegenStatus::Ok);
    let (mut q2, mut p0, mut alpha, mut c, mut err) = (0.0, 0.0, 0.0, 0.0, 0.0);
    unsafe {
        regen_bd_q_exact(bd, 2, &mut q2);
        regen_bd_p0(bd, &mut p0);
        regen_bd_alpha_t(bd, &mut alpha);
        regen_bd_c_constant(bd, &mut c, &mut err);
    }
    // λ=1, μ=2, a=1: α_k = 2^k/(k+1), so q(2) = 1/(1 + 1 + 4/3)
    assert!((q2 - 0.3).abs() < 1e-12);
    assert!((p0 - 0.5).abs() < 1e-12);
    assert!((alpha - 2.0).abs() < 1e-12);
    assert!((c - 1.0).abs() < 1e-6 && err < 1e-6);

    let (mut qe, mut qa, mut lq) = (0.0, 0.0, 0.0);
    unsafe {
        regen_bd_q_exact(bd, 200, &mut qe);
        regen_bd_log_q_exact(bd, 200, &mut lq);
        regen_bd_q_asymptotic(bd, 200, &mut qa);
    }
    assert!((qe.ln() - lq).abs() < 1e-9);
    assert!((qa / qe - 1.0).abs() < 0.01);
    assert_eq!(unsafe { regen_bd_q_asymptotic(bd, 0, &mut qa) }, RegenStatus::Domain);
    unsafe { regen_bd_free(bd) };
}

#[test]
fn hitting_times_fill_the_buffer() {
    let mut bd = ptr::null_mut();
    unsafe { regen_bd_new(1.0, 2.0, 1.0, &mut bd) };
    let mut buf = vec![f64::NAN; 200];
    let (mut ks, mut mean) = (0.0, 0.0);
    let st = unsafe { regen_bd_hitting_times(bd, 8, 200, 7, 0.0, buf.as_mut_ptr(), &mut ks, &mut mean) };
    assert_eq!(st, RegenStatus::Ok, "{}", last_error());
    assert!(buf.iter().all(|x| x.is_finite() && *x > 0.0));
    let m = buf.iter().sum::<f64>() / buf.len() as f64;
    assert!((m - mean).abs() < 1e-12);
    assert!((0.0..=1.0).contains(&ks));

    let st = unsafe { regen_bd_hitting_times(bd, 60, 10, 7, 1e3, buf.as_mut_ptr(), &mut ks, &mut mean) };
    assert_eq!(st, RegenStatus::Budget);
    unsafe { regen_bd_free(bd) };
}

#[test]
fn run_cycles_is_reproducible() {
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { regen_model_mm1(0.5, 1.0, &mut model) }, RegenStatus::Ok);
    let mut alpha = 0.0;
    unsafe { regen_model_alpha_t(model, 1, &mut alpha) };
    assert!((alpha - 4.0).abs() < 1e-12);

    let collect = |seed: u64| {
        let mut path = ptr::null_mut();
        assert_eq!(unsafe { regen_run_cycles(model, 1e4, 100.0, 1.05, seed, 0, &mut path) }, RegenStatus::Ok);
        let n = unsafe { regen_path_len(path) };
        let pts: Vec<RegenCheckpoint> = (0..n)
            .map(|i| {
                let mut c = RegenCheckpoint { t: 0.0, xbar: 0.0, n_cycles: 0, z_lower: 0.0, z_upper: 0.0 };
                assert_eq!(unsafe { regen_path_get(path, i, &mut c) }, RegenStatus::Ok);
                c
            })
            .collect();
        let mut c = pts[0];
        assert_eq!(unsafe { regen_path_get(path, n, &mut c) }, RegenStatus::InvalidArgument);
        unsafe { regen_path_free(path) };
        pts
    };
    let a = collect(42);
    assert_eq!(a, collect(42));
    let expected = (1e4f64 / 100.0).ln().div_euclid(1.05f64.ln()) as usize + 1;
    assert_eq!(a.len(), expected);
    assert!(a.windows(2).all(|w| w[0].xbar <= w[1].xbar && w[0].t < w[1].t));
    assert_eq!(unsafe { regen_path_len(ptr::null()) }, 0);
    unsafe { regen_model_free(model) };
}

#[test]
fn header_compiles_as_c() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let src = dir.join("use_header.c");
    std::fs::write(
        &src,
        "#include \"regen_extremes.h\"\n\
         int main(void) { double x; RegenStatus s = regen_x_rho_root(0.5, &x); \
         RegenCheckpoint c; (void)c; return s == REGEN_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let status = match Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .status()
    {
        Ok(s) => s,
        Err(_) => {
            eprintln!("no C compiler; skipping header check");
            return;
        }
    };
    assert!(status.success());
}
