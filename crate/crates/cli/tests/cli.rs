use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rankkernel"));
    c.env_remove("RANKKERNEL_THREADS");
    c
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_matrix(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn full_rankings_give_pointwise_kernel_values() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("d.txt"), "n=4\n1>2>3>4\n2>1>4>3\n").unwrap();
    for est in ["exact", "mc", "antithetic"] {
        let o = run(
            &["gram", "--input", "d.txt", "--kernel", "mallows", "--bandwidth", "0.5",
              "--estimator", est, "--samples", "4", "--seed", "1", "--output", "g.csv"],
            dir.path(),
        );
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let g = read_matrix(&dir.path().join("g.csv"));
        // Kendall distance 2 between the two rankings
        assert_eq!(g[0][1], (-1.0f64).exp());
        assert_eq!(g[0][0], 1.0);
    }
}

#[test]
fn gram_sidecar_and_psd_check() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = run(
        &["sample", "--model", "mixture", "--degree", "6", "--count", "30", "--topk", "4",
          "--seed", "3", "--output", "d.txt"],
        p,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(
        &["gram", "--input", "d.txt", "--estimator", "antithetic", "--samples", "20",
          "--kernel", "mallows", "--bandwidth", "median", "--seed", "11", "--output", "g.csv",
          "--check-psd", "--distances", "dist.csv"],
        p,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p.join("g.json")).unwrap()).unwrap();
    assert_eq!(meta["estimator"], "antithetic");
    assert_eq!(meta["seed"], 11);
    assert_eq!(meta["samples_per_ranking"][0], 20);
    assert_eq!(meta["kernel"]["family"], "mallows");
    assert!(meta["kernel"]["bandwidth"].as_f64().unwrap() > 0.0);
    let d = read_matrix(&p.join("dist.csv"));
    assert_eq!(d.len(), 30);
    assert!(d.iter().flatten().all(|&x| x >= 0.0));
    assert!(p.join("dist.json").exists());
}

#[test]
fn infeasible_exact_request_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("d.txt"), "n=10\n1>2>3\n4>5|rest\n").unwrap();
    let o = run(&["gram", "--input", "d.txt", "--estimator", "exact", "--output", "g.csv"], dir.path());
    assert_eq!(code(&o), 2);
    // |R| = 10!/3! = 604800 for the first ranking
    let msg = stderr(&o);
    assert!(msg.contains("604800"), "{msg}");
    assert!(!dir.path().join("g.csv").exists());
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("d.txt"), "n=3\n1>2\n").unwrap();
    let cases: &[&[&str]] = &[
        &["gram", "--no-such-flag"],
        &["frobnicate"],
        &["gram", "--input", "d.txt", "--output", "g.csv", "--estimator", "mc"],
        &["gram", "--input", "d.txt", "--output", "g.csv", "--kernel", "nope"],
        &["gram", "--input", "missing.txt", "--output", "g.csv", "--estimator", "exact"],
        &["sample", "--degree", "3", "--count", "2", "--output", "s.txt"],
    ];
    for args in cases {
        assert_eq!(code(&run(args, dir.path())), 1, "{args:?}");
    }
    std::fs::write(dir.path().join("bad.txt"), "n=3\n1>2\n1>1\n").unwrap();
    let o = run(&["gram", "--input", "bad.txt", "--output", "g.csv", "--estimator", "exact"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    run(&["sample", "--model", "mixture", "--degree", "6", "--count", "25", "--topk", "3",
          "--seed", "5", "--output", "d.txt"], p);
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        for est in ["exact", "mc", "antithetic"] {
            let out = format!("g-{est}-{threads}.csv");
            let o = bin()
                .env("RANKKERNEL_THREADS", threads)
                .args(["gram", "--input", "d.txt", "--estimator", est, "--samples", "10",
                       "--seed", "8", "--output", &out])
                .current_dir(p)
                .output()
                .unwrap();
            assert_eq!(code(&o), 0, "{}", stderr(&o));
            outputs.push(std::fs::read(p.join(&out)).unwrap());
        }
    }
    assert_eq!(outputs[..3], outputs[3..]);
    let o = bin().env("RANKKERNEL_THREADS", "zero").args(["selfcheck"]).output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("d.txt"), "n=5\n1>2\n3|rest\n2>5>1\n").unwrap();
    std::fs::write(
        p.join("cfg.json"),
        r#"{"input": "d.txt", "estimator": "mc", "samples": 4, "seed": 2, "output": "g.csv"}"#,
    )
    .unwrap();
    let o = run(&["gram", "--config", "cfg.json", "--samples", "6"], p);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p.join("g.json")).unwrap()).unwrap();
    assert_eq!(meta["samples_per_ranking"], serde_json::json!([6, 6, 6]));
    assert_eq!(meta["estimator"], "monte_carlo");
    assert_eq!(meta["seed"], 2);
}

#[test]
fn mixture_against_uniform_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    for (model, seed, file) in [("mixture", "1", "x.txt"), ("uniform", "2", "y.txt")] {
        let o = run(&["sample", "--model", model, "--degree", "6", "--count", "40", "--topk", "3",
                      "--seed", seed, "--output", file], p);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let o = run(&["mmd", "--x", "x.txt", "--y", "y.txt", "--estimator", "antithetic", "--samples", "20",
                  "--seed", "4", "--shuffles", "199", "--output", "r.json"], p);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p.join("r.json")).unwrap()).unwrap();
    let pv = r["p_value"].as_f64().unwrap();
    assert!(pv <= 0.02, "p = {pv}");
    assert_eq!(r["num_shuffles"], 199);
    assert_eq!(r["sample_sizes"], serde_json::json!([40, 40]));
    let o = run(&["mmd", "--x", "x.txt", "--y", "y.txt", "--seed", "4", "--shuffles", "10"], p);
    assert_eq!(code(&o), 1);
}

#[test]
fn cluster_full_rankings_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("d.csv"), "1,2,3,4,a\n2,1,3,4,a\n4,3,2,1,b\n4,3,1,2,b\n1,2,4,3,a\n").unwrap();
    let o = run(&["cluster", "--input", "d.csv", "--format", "csv-permutations", "--estimator", "exact",
                  "--clusters", "5", "--output-dir", "out"], p);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p.join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["purity"], 1.0);
    let csv = std::fs::read_to_string(p.join("out/clusters.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    let tree: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p.join("out/dendrogram.json")).unwrap()).unwrap();
    assert_eq!(tree["merges"].as_array().unwrap().len(), 4);
}

#[test]
fn selfcheck_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["selfcheck", "--output", "report.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    assert_eq!(code(&run(&["selfcheck", "--max-degree", "9"], dir.path())), 1);
}
