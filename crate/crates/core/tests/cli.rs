use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pentaheat(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pentaheat"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// The certificate text with the timing block removed.
fn without_timing(p: &Path) -> String {
    let text = std::fs::read_to_string(p).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v.as_object_mut().unwrap().remove("timing_ms");
    serde_json::to_string_pretty(&v).unwrap()
}

#[test]
fn verify_writes_reproducible_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let run = |p: &Path, threads: &str| {
        pentaheat(
            &["verify", "--growth-n", "2", "--seed", "11", "--out", p.to_str().unwrap()],
            &[("PENTAHEAT_THREADS", threads)],
        )
    };
    let oa = run(&a, "1");
    assert_eq!(oa.status.code(), Some(0), "{}", stderr(&oa));
    let ob = run(&b, "3");
    assert_eq!(ob.status.code(), Some(0), "{}", stderr(&ob));
    assert_eq!(without_timing(&a), without_timing(&b));

    let cert = read_json(&a);
    assert_eq!(cert["overall"], "pass");
    assert_eq!(cert["summary"]["lambda1"], "4");
    assert_eq!(cert["summary"]["lambda2"], "6");
    assert_eq!(cert["seeds"]["topdeg"], 11);
    let ids: Vec<&str> = cert["checks"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    assert_eq!(ids.len(), 15);
    assert_eq!(ids[7], "pullback-matrix");
    assert!(cert["assumptions"].as_array().unwrap().iter().any(|a| a.as_str().unwrap().contains("irreducible")));
    assert_eq!(cert["content_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn perturbed_matrix_fails_at_matrix_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = pentaheat(
        &["verify", "--growth-n", "1", "--perturb-matrix", "3", "1", "-1", "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("fail at check `pullback-matrix`"), "{}", stderr(&o));
    let cert = read_json(&out);
    assert_eq!(cert["failed_check"], "pullback-matrix");
    let rec = &cert["checks"][7];
    assert_eq!(rec["status"], "fail");
    assert_eq!(rec["payload"]["mismatches"][0]["computed"], -3);
    assert_eq!(cert["checks"][8]["status"], "not-run");
}

#[test]
fn skipping_topdeg_marks_lambda2_assumed() {
    let o = pentaheat(&["verify", "--growth-n", "1", "--skip", "topdeg"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cert: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(cert["summary"]["lambda2"], "6 (assumed)");
    assert_eq!(cert["checks"][12]["status"], "assumed");
    assert_eq!(cert["checks"][13]["payload"]["lambda2_source"], "assumed");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(pentaheat(&["verify", "--skip", "nonsense"], &[]).status.code(), Some(2));
    assert_eq!(pentaheat(&["frobnicate"], &[]).status.code(), Some(2));
    assert_eq!(pentaheat(&["compose", "--n", "9"], &[]).status.code(), Some(2));
    assert_eq!(pentaheat(&["render", "--size", "12by4"], &[]).status.code(), Some(2));
    assert_eq!(pentaheat(&["compose", "--n", "1"], &[("PENTAHEAT_THREADS", "zero")]).status.code(), Some(2));
}

#[test]
fn compose_prints_bidegree_table() {
    let o = pentaheat(&["compose", "--n", "3"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<Vec<String>> =
        stdout(&o).lines().skip(1).map(|l| l.split_whitespace().map(String::from).collect()).collect();
    let bideg: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(bideg, ["(3,4)", "(13,12)", "(51,52)"]);
    assert!(rows.iter().all(|r| r[1] == r[2]));
}

#[test]
fn topdeg_prints_root_tables() {
    let o = pentaheat(&["topdeg", "--samples", "2", "--seed", "5"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("topological degree: 6 (seed 5, 2 samples)"), "{text}");
    assert_eq!(text.matches("count 6").count(), 2);
    assert!(text.contains("reference target"));
}

#[test]
fn polygon_reads_file_and_random_batches() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("pentagons.txt");
    std::fs::write(
        &file,
        "# a convex pentagon\n0 0 1\n4 0 1\n5 3 1\n2 5 1\n-1 3 1\n\n# a hexagon\n0 0 1\n2 0 1\n3 1 1\n2 2 1\n0 2 1\n-1 1 1\n",
    )
    .unwrap();
    let o = pentaheat(&["polygon", file.to_str().unwrap(), "--steps", "1"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("converged: 1/1"), "{text}");
    assert!(text.contains("6-gon"));
    assert!(text.contains("step 1:"));

    let o = pentaheat(&["polygon", "--random-convex", "12", "--seed", "4"], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("converged: 12/12"));

    std::fs::write(&file, "1 2\n").unwrap();
    assert_eq!(pentaheat(&["polygon", file.to_str().unwrap()], &[]).status.code(), Some(2));
}

#[test]
fn render_is_thread_independent_and_writes_png() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    for (name, threads) in [("a.ppm", "1"), ("b.ppm", "4")] {
        let o = pentaheat(
            &["render", "--size", "80x60", "--region", "-3", "1", "-2", "0.5", "--threads", threads, "--out"],
            &[],
        );
        // --out needs its value; the call above must be rejected
        assert_eq!(o.status.code(), Some(2));
        let o = pentaheat(
            &[
                "render",
                "--size",
                "80x60",
                "--region",
                "-3",
                "1",
                "-2",
                "0.5",
                "--threads",
                threads,
                "--out",
                p(name).to_str().unwrap(),
            ],
            &[],
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let a = std::fs::read(p("a.ppm")).unwrap();
    assert_eq!(a, std::fs::read(p("b.ppm")).unwrap());
    assert!(a.starts_with(b"P6\n80 60\n255\n"));
    assert_eq!(a.len(), "P6\n80 60\n255\n".len() + 80 * 60 * 3);

    let o = pentaheat(&["render", "--size", "16x16", "--max-iter", "50", "--out", p("c.png").to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read(p("c.png")).unwrap().starts_with(b"\x89PNG\r\n\x1a\n"));
}
