//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use sgd_nonconv::data::RngStream;
use sgd_nonconv::experiment::{run_experiment, ExperimentConfig, ExperimentReport, RunOptions};
use sgd_nonconv::objectives::{central_difference, eigcoord_partial, grad_matrix_quadratic, MatrixQuadratic};
use sgd_nonconv::optimizers::{moments_recursive, moments_summed_form};
use sgd_nonconv::prob_lab::scaled_variance_bound_check;
use sgd_nonconv::prob_lab::suite::{random_law, run_suite};

const BIN: &str = env!("CARGO_BIN_EXE_sgd-nonconv");

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn load(name: &str) -> ExperimentConfig {
    let text = std::fs::read_to_string(config_path(name)).expect("config readable");
    ExperimentConfig::from_json(&text).expect("config parses")
}

fn simulate(cfg: &ExperimentConfig) -> ExperimentReport {
    let setup = cfg.setup().expect("config validates");
    run_experiment(&setup, RunOptions::default()).expect("run succeeds").0
}

fn final_best_constant(report: &ExperimentReport) -> (f64, f64) {
    let last = report.steps;
    let row = report
        .second_moments
        .iter()
        .find(|r| r.xi == "best_constant" && r.step == last && r.coordinate == 0)
        .expect("best-constant row at the final probe");
    (row.estimate.mean, row.estimate.stderr)
}

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;
type Mutation = fn(&mut serde_json::Value);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn prob_lab_suite() -> Outcome {
    let start = Instant::now();
    let report = run_suite(2024, 200).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let worst = report.checks.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    check(
        report.instances >= 200 && report.passed() && elapsed < Duration::from_secs(10),
        format!(
            "{} instances, {} identities, worst discrepancy {worst:.3e} (tol 1e-12), {} inequality failures, {:.2?}",
            report.instances,
            report.checks.len(),
            report.inequality_failures,
            elapsed
        ),
    )
}

fn scaled_variance() -> Outcome {
    let start = Instant::now();
    let mut rng = RngStream::new(99, 0);
    let mut worst: f64 = f64::INFINITY;
    let mut fails = 0;
    for _ in 0..100 {
        let law = random_law(&mut rng, 12);
        let eps = 0.01 + 3.0 * rng.unit();
        let r = 5.0 * rng.unit();
        let c = scaled_variance_bound_check(&law, eps, r);
        // independent rhs
        let sup = law.sup_abs();
        let rhs = eps * eps * law.variance() / (eps + (r + sup * sup).sqrt()).powi(4);
        if (rhs - c.rhs).abs() > 1e-15 || c.lhs < rhs - 1e-12 {
            fails += 1;
        }
        worst = worst.min(c.lhs - rhs);
    }
    let elapsed = start.elapsed();
    check(
        fails == 0 && elapsed < Duration::from_secs(1),
        format!("100 laws, {fails} failures, min(lhs - rhs) = {worst:.3e}, {elapsed:.2?}"),
    )
}

fn representation_equivalence() -> Outcome {
    let mut rng = RngStream::new(3, 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = 3;
        let alpha = rng.unit();
        let beta = rng.unit();
        let m0: Vec<f64> = (0..p).map(|_| 2.0 * rng.unit() - 1.0).collect();
        let big_m0: Vec<f64> = (0..p).map(|_| rng.unit()).collect();
        let grads: Vec<Vec<f64>> = (0..1000)
            .map(|_| (0..p).map(|_| 4.0 * rng.unit() - 2.0).collect())
            .collect();
        for n in 1..=1000 {
            let (ms, bs) = moments_summed_form(&m0, &big_m0, alpha, beta, &grads[..n]);
            let (mr, br) = moments_recursive(&m0, &big_m0, alpha, beta, &grads[..n]);
            for (a, b) in ms.iter().zip(&mr).chain(bs.iter().zip(&br)) {
                let rel = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
                worst = worst.max(if a == b { 0.0 } else { rel });
            }
        }
    }
    check(
        worst <= 1e-9,
        format!("100 sequences x 1000 steps, worst relative gap {worst:.3e} (tol 1e-9)"),
    )
}

fn sgd_nonconvergence() -> Outcome {
    let start = Instant::now();
    let cfg = load("sgd_quadratic.json");
    assert_eq!((cfg.trajectories, cfg.steps), (10_000, 10_000));
    let report = simulate(&cfg);
    let (mean, se) = final_best_constant(&report);
    // theta' = (1 - 2 gamma) theta + 2 gamma X, X ~ U[0, 1]
    let gamma = 0.25;
    let phi = 1.0 - 2.0 * gamma;
    let oracle = (2.0 * gamma) * (2.0 * gamma) * (1.0 / 12.0) / (1.0 - phi * phi);
    let rel = (mean - oracle).abs() / oracle;
    let margin = mean / se;
    check(
        rel <= 0.05 && margin >= 10.0 && start.elapsed() <= Duration::from_secs(120),
        format!(
            "best-constant second moment {mean:.6e} +- {se:.2e} vs oracle {oracle:.6e} (rel {:.3}%), {margin:.1} SE above 0, {:.2?}",
            100.0 * rel,
            start.elapsed()
        ),
    )
}

fn adam_apriori() -> Outcome {
    let cfg = load("adam_apriori.json");
    assert_eq!((cfg.trajectories, cfg.steps), (10_000, 10_000));
    assert!(cfg.strict);
    let report = simulate(&cfg);
    let c = report.certification.as_ref().ok_or("no certification report")?;
    check(
        c.kind == "adaptive_sup" && c.violations.is_empty() && c.trajectories_checked == 10_000,
        format!(
            "{} trajectories, {} values, bound {:.6e}, {} violations",
            c.trajectories_checked,
            c.values_checked,
            c.bound,
            c.violations.len()
        ),
    )
}

fn adam_dominance() -> Outcome {
    let cfg = load("adam_lower_bound.json");
    assert_eq!(cfg.trajectories, 10_000);
    let report = simulate(&cfg);
    let v = report.lower_bound.as_ref().ok_or("no lower-bound verdict")?;
    // Var(2(theta - X)) = 4 Var(X) = 4, liminf gamma = 1
    let expected_bound = 1.0 * 4f64.sqrt() / 20736.0;
    let d_ok = (v.d - 20736.0).abs() <= 1e-9 * 20736.0;
    let b_ok = (v.bounds[0].value - expected_bound).abs() <= 1e-15 && (expected_bound - 9.645e-5).abs() < 1e-8;
    let has_both = v.rows.iter().any(|r| r.candidate == "best_constant")
        && v.rows.iter().any(|r| r.candidate == "cauchy_gap");
    let min_margin = v.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    check(
        d_ok && b_ok && has_both && v.pass && min_margin >= 0.0,
        format!(
            "D = {}, bound {:.4e}, {} rows, min(root - 2se - bound) = {min_margin:.4e}, slack x{:.1}",
            v.d,
            v.bounds[0].value,
            v.rows.len(),
            v.slack
        ),
    )
}

fn eigen_gradient() -> Outcome {
    let mut rng = RngStream::new(17, 0);
    let mut worst_exact = 0.0f64;
    let mut worst_fd = 0.0f64;
    for _ in 0..100 {
        let br = 1 + (rng.unit() * 4.0) as usize;
        let bc = 1 + (rng.unit() * 4.0) as usize;
        let b: Vec<f64> = (0..br * bc).map(|_| 4.0 * rng.unit() - 2.0).collect();
        let mu = 0.1 + 3.0 * rng.unit();
        let a = MatrixQuadratic::block(mu, br, bc, &b).map_err(|e| e.to_string())?;
        let theta: Vec<f64> = (0..a.cols()).map(|_| 4.0 * rng.unit() - 2.0).collect();
        let x: Vec<f64> = (0..a.rows()).map(|_| 2.0 * rng.unit() - 1.0).collect();
        let eig = eigcoord_partial(&a, &theta, &x).map_err(|e| e.to_string())?;
        let full = grad_matrix_quadratic(&a, &theta, &x).map_err(|e| e.to_string())?;
        // loss |A theta - x|^2 computed here, not through the library
        let loss = |t: &[f64]| -> f64 {
            (0..a.rows())
                .map(|r| {
                    let at: f64 = (0..a.cols()).map(|c| a.at(r, c) * t[c]).sum();
                    (at - x[r]).powi(2)
                })
                .sum()
        };
        let fd = central_difference(loss, &theta, 1e-5);
        worst_exact = worst_exact.max((eig - full[0]).abs());
        worst_fd = worst_fd.max((eig - fd[0]).abs());
    }
    check(
        worst_exact <= 1e-6 && worst_fd <= 1e-6,
        format!("100 block matrices, |eig - grad| <= {worst_exact:.2e}, |eig - fd| <= {worst_fd:.2e} (tol 1e-6)"),
    )
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .expect("out dir")
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for name in ["sgd_quadratic.json", "adam_lower_bound.json", "adam_apriori.json"] {
        let mut cfg = load(name);
        cfg.trajectories = 400;
        cfg.steps = 400;
        cfg.probes = None;
        cfg.dump_trajectories = 2;
        let path = tmp.path().join(name);
        std::fs::write(&path, cfg.to_json()).map_err(|e| e.to_string())?;
        let mut outputs = Vec::new();
        for threads in ["1", "4"] {
            let out = tmp.path().join(format!("{name}-{threads}"));
            let o = run_cli(&[
                "simulate",
                "--config",
                path.to_str().unwrap(),
                "--seed",
                "4242",
                "--threads",
                threads,
                "--out",
                out.to_str().unwrap(),
            ]);
            if !o.status.success() {
                return Err(format!("{name} with {threads} threads exited {:?}", o.status.code()));
            }
            outputs.push(read_dir_sorted(&out));
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{name}: outputs differ between 1 and 4 threads"));
        }
        compared += outputs[0].iter().filter(|(f, _)| f.ends_with(".csv")).count();
    }
    check(compared > 0, format!("{compared} CSV files byte-identical across --threads 1 / 4"))
}

fn hypothesis_gating() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = std::fs::read_to_string(config_path("adam_apriori.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&base).unwrap();
    let cases: [(&str, &str, Mutation); 3] = [
        ("alpha^2 >= beta", "alpha^2 < beta < 1", |v| v["optimizer"]["beta"] = 0.5.into()),
        ("kappa out of range", "kappa(n, i) in [1/c, c]", |v| {
            v["optimizer"]["kappa"]["value"] = 5.0.into()
        }),
        ("initial moment too large", "<= rho (|theta_0| + c)", |v| {
            v["initial"]["M"] = serde_json::json!([100.0])
        }),
    ];
    let mut seen = Vec::new();
    for (label, hypothesis, mutate) in cases {
        let mut v = value.clone();
        mutate(&mut v);
        let path = tmp.path().join(format!("{}.json", seen.len()));
        std::fs::write(&path, v.to_string()).unwrap();
        let o = run_cli(&["simulate", "--config", path.to_str().unwrap()]);
        let stderr = String::from_utf8_lossy(&o.stderr);
        if o.status.code() != Some(2) || !stderr.contains(hypothesis) {
            return Err(format!("{label}: exit {:?}, stderr {stderr:?}", o.status.code()));
        }
        seen.push(label);
    }
    check(true, format!("rejected with exit 2 and named hypothesis: {}", seen.join(", ")))
}

fn main() {
    let criteria: [(&str, Criterion); 9] = [
        ("exact prob-lab suite", prob_lab_suite),
        ("scaled-variance lower bound", scaled_variance),
        ("summed vs recursive moments", representation_equivalence),
        ("SGD non-convergence", sgd_nonconvergence),
        ("Adam pathwise a priori bound", adam_apriori),
        ("Adam non-convergence dominance", adam_dominance),
        ("eigen-coordinate gradient", eigen_gradient),
        ("determinism across --threads", determinism),
        ("hypothesis gating", hypothesis_gating),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(d) => println!("criterion {} [PASS] {name}: {d}", k + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} [FAIL] {name}: {d}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
