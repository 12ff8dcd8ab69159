//! End-to-end tests of the `regen` binary: golden files, exit codes,
//! determinism and config layering.
//!
//! Set `REGEN_UPDATE_GOLDEN=1` to rewrite the golden files after an
//! intentional output change.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn regen(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_regen"));
    cmd.args(args).env_remove("REGEN_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn regen")
}

fn ok(args: &[&str]) -> String {
    let out = regen(args, &[]);
    assert!(out.status.success(), "regen {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn assert_golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("REGEN_UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{name} differs from golden file {}", path.display());
}

const BD: [&str; 8] = ["--model", "bd", "--lambda", "0.5", "--mu", "1", "--a", "0.5"];
const MM1: [&str; 6] = ["--model", "mm1", "--lambda", "0.5", "--mu", "1"];

fn with<'a>(cmd: &'a str, model: &[&'a str], rest: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend_from_slice(model);
    v.extend_from_slice(rest);
    v
}

#[test]
fn golden_tail() {
    let body = ok(&with("tail", &BD, &["--n-max", "20"]));
    assert_golden("tail_bd.csv", &body);
    let first = body.lines().nth(1).unwrap();
    assert!(first.starts_with("0,1.0000000000000000e0,NaN,"), "{first}");

    let mmm = ok(&["tail", "--model", "mmm", "--lambda", "1", "--mu", "1", "--servers", "2", "--n-max", "10", "--format", "json"]);
    assert_golden("tail_mmm.json", &mmm);
}

#[test]
fn golden_simulate() {
    let dir = tempfile::tempdir().unwrap();
    for (name, model) in [("mm1", &MM1[..]), ("bd", &BD[..])] {
        let summary = dir.path().join(format!("{name}.json"));
        let body = ok(&with("simulate", model, &["--t-max", "2000", "--replicas", "2", "--summary", summary.to_str().unwrap()]));
        assert_golden(&format!("simulate_{name}.csv"), &body);
        assert_golden(&format!("simulate_{name}.json"), &std::fs::read_to_string(&summary).unwrap());
    }
    let det = ok(&["simulate", "--model", "det", "--duration", "1", "--value", "2", "--t-max", "200"]);
    assert_golden("simulate_det.csv", &det);
}

#[test]
fn golden_hittime() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("hit.json");
    let body = ok(&with("hittime", &BD, &["--n", "8", "--replicas", "25", "--summary", summary.to_str().unwrap()]));
    assert_golden("hittime_bd.csv", &body);
    assert_golden("hittime_bd.json", &std::fs::read_to_string(&summary).unwrap());
}

#[test]
fn golden_constants() {
    assert_golden("constants_mm1.json", &ok(&with("constants", &MM1, &[])));
    assert_golden("constants_md1.json", &ok(&["constants", "--model", "md1", "--lambda", "0.5", "--service-time", "1"]));
    assert_golden("constants_bd.json", &ok(&with("constants", &BD, &[])));
    assert_golden("constants_mmm.json", &ok(&["constants", "--model", "mmm", "--lambda", "1", "--mu", "1", "--servers", "2"]));
}

#[test]
fn constants_examples() {
    let v: serde_json::Value = serde_json::from_str(&ok(&with("constants", &BD, &[]))).unwrap();
    let c = &v["constants"];
    assert!((c["p0"]["value"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((c["C"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((c["alpha_t"]["value"].as_f64().unwrap() - 4.0).abs() < 1e-10);
    for (_, entry) in c.as_object().unwrap() {
        assert!(entry["route"].is_string(), "every constant carries its route");
    }
}

#[test]
fn simulate_is_bit_identical_and_thread_independent() {
    let args = with("simulate", &BD, &["--t-max", "5000", "--replicas", "4", "--seed", "9"]);
    let a = ok(&args);
    assert_eq!(a, ok(&args));
    let threaded = regen(&args, &[("REGEN_THREADS", "3")]);
    assert!(threaded.status.success());
    assert_eq!(a, String::from_utf8(threaded.stdout).unwrap());

    // rows sorted by (seed, t)
    let keys: Vec<(u64, f64)> = a
        .lines()
        .skip(1)
        .map(|l| {
            let mut f = l.split(',');
            (f.next().unwrap().parse().unwrap(), f.next().unwrap().parse().unwrap())
        })
        .collect();
    assert!(keys.windows(2).all(|w| w[0].0 < w[1].0 || (w[0].0 == w[1].0 && w[0].1 < w[1].1)));
    assert_eq!(keys.last().unwrap().0, 3);
}

#[test]
fn simulate_columns() {
    let mm1 = ok(&with("simulate", &MM1, &["--t-max", "500"]));
    assert_eq!(mm1.lines().next().unwrap(), "seed,t,xbar,n_cycles,s2,s3");
    let bd = ok(&with("simulate", &BD, &["--t-max", "500"]));
    assert_eq!(bd.lines().next().unwrap(), "seed,t,xbar,n_cycles,s2,s3,u2,u3");
    let json: serde_json::Value = serde_json::from_str(&ok(&with("simulate", &BD, &["--t-max", "500", "--format", "json"]))).unwrap();
    let rows = json.as_array().unwrap();
    assert_eq!(rows.len(), bd.lines().count() - 1);
    assert!(rows[0]["u2"].is_number());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "[model]\nid = \"bd\"\nlambda = 0.5\nmu = 1.0\na = 0.5\n\n[simulate]\nt_max = 400.0\nreplicas = 3\nseed = 11\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = ok(&["--config", cfg, "simulate"]);
    assert_eq!(from_file.lines().last().unwrap().split(',').next(), Some("2"));
    let overridden = ok(&["--config", cfg, "simulate", "--replicas", "1"]);
    assert!(overridden.lines().skip(1).all(|l| l.starts_with("0,")));
    // the override changes nothing else
    assert!(from_file.starts_with(&overridden));

    std::fs::write(dir.path().join("bad.toml"), "[simulate]\nbogus = 1\n").unwrap();
    let out = regen(&["--config", dir.path().join("bad.toml").to_str().unwrap(), "verify"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let code = |args: &[&str], envs: &[(&str, &str)]| regen(args, envs).status.code();
    assert_eq!(code(&["verify"], &[]), Some(0));
    assert_eq!(code(&["simulate", "--model", "nope"], &[]), Some(2));
    assert_eq!(code(&["simulate", "--model", "mm1", "--lambda", "1", "--mu", "1"], &[]), Some(2));
    assert_eq!(code(&with("simulate", &MM1, &["--t-min", "10"]), &[]), Some(2));
    assert_eq!(code(&with("hittime", &BD, &["--n", "1"]), &[]), Some(2));
    assert_eq!(code(&["constants", "--model", "gig1", "--arrival", "det:1", "--service", "det:0.5"], &[]), Some(3));
    assert_eq!(code(&with("hittime", &BD, &["--n", "40"]), &[]), Some(4));
    assert_eq!(code(&["verify"], &[("REGEN_THREADS", "0")]), Some(2));
    assert_eq!(code(&["--config", "/definitely/missing.toml", "verify"], &[]), Some(2));
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tail.csv");
    let out = regen(&with("tail", &BD, &["--n-max", "5", "--output", path.to_str().unwrap()]), &[]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(path).unwrap(), ok(&with("tail", &BD, &["--n-max", "5"])));
}
