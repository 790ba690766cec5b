use std::fs;
use std::path::Path;
use std::process::Command;

use pgls_bench::{compare, read_rows, run_excesses, run_experiment, write_rows, Algo, ExperimentConfig, RunRow, Summary, Target};
use pgls_core::coop::{CoopStrategy, TopologyKind};
use serde_json::Value;

fn pgls() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pgls"))
}

fn config(out: &Path) -> ExperimentConfig {
    ExperimentConfig {
        instance: "berlin52".into(),
        out: out.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

#[test]
fn gls_on_berlin52_solves_every_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        algo: Algo::Gls,
        reps: 10,
        max_seconds: Some(60.0),
        target: Target::Optimum,
        ..config(dir.path())
    };
    let s = run_experiment(&cfg).unwrap();
    assert_eq!(s.runs, 10);
    assert_eq!(s.success_count, 10);
    assert_eq!(s.median_excess, Some(0.0));
    assert_eq!(s.best_cost, 7542);
    let rows = read_rows(&dir.path().join("runs.csv")).unwrap();
    let seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
    assert_eq!(seeds, (0..10).collect::<Vec<_>>());
}

#[test]
fn summary_is_recomputable_from_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        algo: Algo::Parallel,
        strategy: CoopStrategy::EliteBiased,
        topology: TopologyKind::Ring,
        k: 3,
        seed_base: 40,
        reps: 3,
        u: 10,
        max_iterations: Some(60),
        target: Target::None,
        ..config(dir.path())
    };
    let s = run_experiment(&cfg).unwrap();
    let text = fs::read_to_string(dir.path().join("summary.json")).unwrap();
    let on_disk: Summary = serde_json::from_str(&text).unwrap();
    assert_eq!(on_disk, s);

    let rows = read_rows(&dir.path().join("runs.csv")).unwrap();
    assert_eq!(rows.len(), 9);
    for r in &rows {
        assert_eq!(r.seed, 40 + r.run_id * 3 + r.worker_id as u64);
        assert!(!r.success);
    }
    let ex = run_excesses(&rows);
    assert_eq!(ex.len(), 3);
    let mean = ex.iter().sum::<f64>() / 3.0;
    assert!((s.mean_excess.unwrap() - mean).abs() < 1e-12);
    let mut sorted = ex.clone();
    sorted.sort_by(f64::total_cmp);
    assert_eq!(s.median_excess, Some(sorted[1]));
    assert_eq!(s.best_cost, rows.iter().map(|r| r.final_cost).min().unwrap());
    assert_eq!(s.total_sends, rows.iter().map(|r| r.sends).sum::<u64>());
    assert_eq!(s.total_receives, rows.iter().map(|r| r.receives).sum::<u64>());
    assert_eq!(s.mean_iterations, 60.0);
    assert_eq!(s.success_count, 0);
    assert_eq!(s.workers, 3);
}

#[test]
fn trace_has_one_stop_per_worker() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traced");
    let status = pgls()
        .args(["run", "--instance", "berlin52", "--algo", "parallel", "--k", "4", "--topology", "ring"])
        .args(["--max-seconds", "30", "--reps", "1", "--trace", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let trace: Value = serde_json::from_str(&fs::read_to_string(out.join("trace/run_0000.json")).unwrap()).unwrap();
    let workers = trace["workers"].as_array().unwrap();
    assert_eq!(workers.len(), 4);
    for w in workers {
        let stops = w["events"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|e| e["kind"] == "stop")
            .count();
        assert_eq!(stops, 1);
    }
}

fn strip_wall_seconds(csv_text: &str) -> String {
    let mut lines = csv_text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "wall_seconds").unwrap();
    csv_text
        .lines()
        .map(|l| {
            l.split(',')
                .enumerate()
                .filter(|(i, _)| *i != col)
                .map(|(_, f)| f)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn independent_iteration_budget_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let status = pgls()
            .args(["run", "--instance", "berlin52", "--algo", "parallel", "--strategy", "independent"])
            .args(["--k", "4", "--seed-base", "17", "--max-iters", "150", "--target", "none", "--reps", "3", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        texts.push(fs::read_to_string(out.join("runs.csv")).unwrap());
    }
    assert_eq!(strip_wall_seconds(&texts[0]), strip_wall_seconds(&texts[1]));
    assert!(texts[0].starts_with(
        "run_id,worker_id,seed,final_cost,excess_pct,success,wall_seconds,iterations,sends,receives,penalizations\n"
    ));
}

fn row(run_id: u64, excess: f64) -> RunRow {
    RunRow {
        run_id,
        worker_id: 0,
        seed: run_id,
        final_cost: 0,
        excess_pct: Some(excess),
        success: excess == 0.0,
        wall_seconds: 1.0,
        iterations: 1,
        sends: 0,
        receives: 0,
        penalizations: 1,
    }
}

#[test]
fn compare_reports_u_and_p() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    write_rows(&a, &(0..50).map(|r| row(r, 0.01 * r as f64)).collect::<Vec<_>>()).unwrap();
    write_rows(&b, &(0..50).map(|r| row(r, 1.0 + 0.01 * r as f64)).collect::<Vec<_>>()).unwrap();

    let same = compare(&a, &a).unwrap();
    assert_eq!(same.p_value, 1.0);
    assert_eq!(same.u, 1250.0);

    let apart = compare(&a, &b).unwrap();
    assert_eq!(apart.u, 0.0);
    assert!(apart.p_value < 0.001);
    assert_eq!(apart.a.runs, 50);
    assert_eq!(apart.a.success_count, 1);

    let out = pgls().arg("compare").arg(&a).arg(&b).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Mann-Whitney U=0"), "{text}");
}

#[test]
fn compare_rejects_empty_and_mismatched_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let good = dir.path().join("good.csv");
    write_rows(&good, &[row(0, 0.5)]).unwrap();
    assert!(compare(&empty, &good).is_err());

    let mut paths = Vec::new();
    for (name, instance) in [("x", "berlin52"), ("y", "qa194")] {
        let out = dir.path().join(name);
        let cfg = ExperimentConfig {
            instance: instance.into(),
            algo: Algo::Gls,
            max_iterations: Some(5),
            target: Target::None,
            ..config(&out)
        };
        run_experiment(&cfg).unwrap();
        paths.push(out.join("runs.csv"));
    }
    let err = compare(&paths[0], &paths[1]).unwrap_err();
    assert!(err.to_string().contains("different instances"), "{err}");

    let out = pgls().arg("compare").arg(&empty).arg(&good).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn configuration_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = dir.path().join("mystery.tsp");
    fs::write(
        &unknown,
        "NAME : mystery\nTYPE : TSP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 3 0\n3 0 4\nEOF\n",
    )
    .unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["--instance".into(), dir.path().join("missing.tsp").display().to_string()],
        vec!["--instance".into(), unknown.display().to_string(), "--target".into(), "optimum".into()],
        vec![
            "--instance".into(),
            "berlin52".into(),
            "--algo".into(),
            "parallel".into(),
            "--topology".into(),
            "torus".into(),
            "--k".into(),
            "13".into(),
        ],
        vec!["--instance".into(), "berlin52".into(), "--algo".into(), "parallel".into(), "--k".into(), "1".into()],
    ];
    for args in cases {
        let out = pgls()
            .arg("run")
            .args(&args)
            .args(["--max-seconds", "1", "--out"])
            .arg(dir.path().join("out"))
            .output()
            .unwrap();
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(!out.stderr.is_empty());
    }

    let out = pgls()
        .args(["run", "--instance"])
        .arg(&unknown)
        .args(["--target", "none", "--max-iters", "3", "--out"])
        .arg(dir.path().join("ok"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_rows(&dir.path().join("ok/runs.csv")).unwrap();
    assert_eq!(rows[0].final_cost, 12);
    assert_eq!(rows[0].excess_pct, None);
}
