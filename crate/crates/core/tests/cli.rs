//! End-to-end tests of the command-line tool.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64;
use serde_json::Value;
use toeplitz_density::density::{annulus_integral, Annulus};
use toeplitz_density::SymbolParams;

const BIN: &str = env!("CARGO_BIN_EXE_toeplitz-density");

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(BIN).args(args).arg("--out-dir").arg(out).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// JSON with the run-dependent `runtime` blocks removed.
fn without_runtime(mut v: Value) -> Value {
    fn strip(v: &mut Value) {
        match v {
            Value::Object(m) => {
                m.remove("runtime");
                m.values_mut().for_each(strip);
            }
            Value::Array(a) => a.iter_mut().for_each(strip),
            _ => {}
        }
    }
    strip(&mut v);
    v
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn spectrum_of_symmetric_three_by_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["spectrum", "--n", "3", "--a-re", "1", "--b-re", "1"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(text.starts_with("re,im,source\n"));
    assert!(!text.contains('\r'));
    let rows = csv_rows(&dir.path().join("spectrum.csv"));
    let analytic: Vec<f64> = rows.iter().filter(|r| r[2] == "analytic").map(|r| num(&r[0])).collect();
    let numeric: Vec<f64> = rows.iter().filter(|r| r[2] == "numeric").map(|r| num(&r[0])).collect();
    assert_eq!((analytic.len(), numeric.len()), (3, 3));
    for want in [2f64.sqrt(), 0.0, -(2f64.sqrt())] {
        assert!(analytic.iter().any(|x| (x - want).abs() < 1e-8));
        assert!(numeric.iter().any(|x| (x - want).abs() < 1e-8));
    }
    assert!(rows.iter().all(|r| num(&r[1]).abs() < 1e-12));
}

#[test]
fn spectrum_of_size_one_is_a_single_analytic_row() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["spectrum", "--n", "1"], dir.path())), 0);
    let rows = csv_rows(&dir.path().join("spectrum.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][2], "analytic");
    assert!(num(&rows[0][0]).abs() < 1e-15 && num(&rows[0][1]) == 0.0);
}

#[test]
fn spectrum_with_perturbation_uses_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["spectrum", "--n", "40", "--a-re", "0.5", "--b-im", "1", "--delta", "1e-12", "--seed", "7"];
    assert_eq!(code(&run(&args, &dir.path().join("a"))), 0);
    assert_eq!(code(&run(&args, &dir.path().join("b"))), 0);
    let mut other = args;
    other[10] = "8";
    assert_eq!(code(&run(&other, &dir.path().join("c"))), 0);
    let read = |d: &str| fs::read(dir.path().join(d).join("spectrum.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
}

#[test]
fn usage_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["spectrum", "--n", "x"], dir.path())), 2);
    assert_eq!(code(&run(&["nonsense"], dir.path())), 2);
    assert_eq!(code(&run(&["spectrum", "--a-re", "0", "--a-im", "0"], dir.path())), 2);
}

#[test]
fn density_integral_matches_quadrature() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["density", "--n", "101", "--delta", "1e-8", "--nx", "50", "--ny", "50", "--half-width", "1.5"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_json(&dir.path().join("density.json"));
    let params = SymbolParams::normalize(Complex64::new(1.0, 0.0), Complex64::new(0.25, 0.0)).unwrap();
    let inner = summary["annulus"]["inner"].as_f64().unwrap();
    let outer = summary["annulus"]["outer"].as_f64().unwrap();
    let oracle = annulus_integral(&params, Annulus::new(&params, inner, outer).unwrap(), |_| 1.0).unwrap();
    let reported = summary["annulus_integral"].as_f64().unwrap();
    assert!((reported - oracle).abs() <= 1e-6 * oracle);
    // the midpoint sum over cells approximates the same integral
    let grid = summary["grid_integral"].as_f64().unwrap();
    assert!((grid - oracle).abs() < 0.05 * oracle, "{grid} vs {oracle}");

    let rows = csv_rows(&dir.path().join("density.csv"));
    assert_eq!(rows.len() as u64, summary["masked_cells"].as_u64().unwrap());
    assert!(rows.iter().all(|r| num(&r[2]) > 0.0));
    assert!(dir.path().join("regime.json").exists());
    let pgm = fs::read_to_string(dir.path().join("density.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n50 50\n65535\n"));
    assert_eq!(pgm.lines().count(), 3 + 50);
}

#[test]
fn density_with_empty_mask_succeeds_with_no_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["density", "--n", "101", "--r0", "0.65", "--half-width", "0.01", "--nx", "4", "--ny", "4"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no grid cell"));
    assert!(csv_rows(&dir.path().join("density.csv")).is_empty());
    assert_eq!(read_json(&dir.path().join("density.json"))["masked_cells"], 0);
}

#[test]
fn density_refuses_bad_regime_unless_forced() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["density", "--n", "60", "--delta", "1e-3", "--nx", "10", "--ny", "10"];
    assert_eq!(code(&run(&args, dir.path())), 4);
    let regime = read_json(&dir.path().join("regime.json"));
    assert_eq!(regime["report"]["verdict"], "fail");
    assert!(!dir.path().join("density.csv").exists());
    let mut forced = args.to_vec();
    forced.push("--force");
    assert_eq!(code(&run(&forced, dir.path())), 0);
    assert!(dir.path().join("density.csv").exists());
}

#[test]
fn density_reproduces_jordan_limit() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["density", "--n", "101", "--b-re", "1e-9", "--r0", "0.9", "--nx", "40", "--ny", "40", "--half-width", "1.0", "--force"];
    let o = run(&args, dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&dir.path().join("density.csv"));
    let mut checked = 0;
    for r in rows {
        let z = Complex64::new(num(&r[0]), num(&r[1]));
        if z.norm() > 0.8 {
            continue;
        }
        let want = 2.0 / std::f64::consts::PI / (1.0 - z.norm_sqr()).powi(2);
        assert!((num(&r[2]) - want).abs() <= 1e-3 * want, "{z}");
        checked += 1;
    }
    assert!(checked > 100);
}

#[test]
fn unperturbed_ensemble_counts_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["ensemble", "--n", "50", "--delta", "0", "--trials", "1", "--inner", "0.6", "--outer", "0.8"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let e = read_json(&dir.path().join("ensemble.json"));
    assert_eq!(e["total_mean"], 0.0);
    assert_eq!(e["trials_used"], 1);
    assert!(e["aborted_trials"].as_array().unwrap().is_empty());
    for key in ["manifest", "theory_integral", "total_stderr", "per_cell", "truncated_trials"] {
        assert!(e.get(key).is_some(), "{key}");
    }
}

#[test]
fn regime_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["regime", "--n", "101", "--delta", "1e-8", "--r0", "0.8"], dir.path());
    assert_eq!(code(&o), 0);
    let r = read_json(&dir.path().join("regime.json"));
    assert!((r["report"]["term_growth"].as_f64().unwrap() - 0.0823).abs() < 1e-3);
    assert_eq!(code(&run(&["regime", "--n", "1000", "--delta", "1e-3", "--r0", "0.9"], dir.path())), 4);
    assert_eq!(code(&run(&["regime", "--n", "101", "--delta", "1e-2"], dir.path())), 4);
    assert!(read_json(&dir.path().join("regime.json"))["infeasible"].is_string());
}

#[test]
fn verify_passes_and_fails_as_configured() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--n-list", "2,8", "--samples", "20"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v = read_json(&dir.path().join("verify.json"));
    assert_eq!(v["pass"], true);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for want in ["branch_relations", "gram_identity_n2", "lower_bound_n2", "order_n8", "k_closed_form", "g0_roots"] {
        assert!(names.contains(&want), "{want}");
    }

    let o = run(&["verify", "--n-list", "8", "--samples", "5", "--tol", "1e-15"], dir.path());
    assert_eq!(code(&o), 1);
    let v = read_json(&dir.path().join("verify.json"));
    let failed: Vec<&Value> = v["checks"].as_array().unwrap().iter().filter(|c| c["pass"] == false).collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|c| !c["failures"].as_array().unwrap().is_empty()));
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &[&str]); 4] = [
        (&["spectrum", "--n", "60", "--delta", "1e-10", "--seed", "5"], &["spectrum.csv"]),
        (&["density", "--n", "101", "--nx", "30", "--ny", "30"], &["density.csv", "density.pgm", "density.json", "regime.json"]),
        (
            &["ensemble", "--n", "40", "--delta", "1e-6", "--trials", "16", "--seed", "9", "--nx", "20", "--ny", "20"],
            &["ensemble.json"],
        ),
        (&["verify", "--n-list", "2,8", "--samples", "8"], &["verify.json"]),
    ];
    for (k, (args, files)) in cases.iter().enumerate() {
        let mut outs = Vec::new();
        for workers in ["1", "8"] {
            let out = dir.path().join(format!("{k}-{workers}"));
            let mut full = args.to_vec();
            full.extend(["--workers", workers]);
            let o = run(&full, &out);
            assert!(matches!(code(&o), 0 | 4), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
            outs.push(out);
        }
        for f in *files {
            let (a, b) = (outs[0].join(f), outs[1].join(f));
            if f.ends_with(".json") {
                assert_eq!(without_runtime(read_json(&a)), without_runtime(read_json(&b)), "{f}");
            } else {
                assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "{f}");
            }
        }
        let m = read_json(&outs[0].join("manifest.json"));
        assert_eq!(without_runtime(m.clone()), without_runtime(read_json(&outs[1].join("manifest.json"))));
        assert!(m["runtime"]["duration_seconds"].is_number());
    }
}
