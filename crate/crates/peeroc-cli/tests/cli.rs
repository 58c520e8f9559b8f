//! End-to-end checks of the binary: exit codes, artifact shapes, and
//! byte-level determinism.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_peeroc")
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("peeroc-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut map = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        map.insert(
            entry.file_name().to_string_lossy().into_owned(),
            fs::read(entry.path()).unwrap(),
        );
    }
    map
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    let out = run(&[], &[]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_method_is_a_usage_error() {
    let dir = scratch("bogus");
    let out = run(&["--out-dir", dir.to_str().unwrap(), "verify", "--method", "bogus"], &[]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_single_method_reports_published_row_and_reruns_identically() {
    let dir = scratch("verify-one");
    let args = ["--out-dir", dir.to_str().unwrap(), "verify", "--method", "AP4o43bdf"];
    let out = run(&args, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("alpha = 73.35"), "stdout: {text}");
    assert!(text.contains("err_4 = 0.000000e0"), "stdout: {text}");
    let indicators = fs::read_to_string(dir.join("verify_indicators.csv")).unwrap();
    assert_eq!(indicators.lines().count(), 2);
    let first = snapshot(&dir);
    let out2 = run(&args, &[]);
    assert_eq!(out2.status.code(), Some(0));
    assert_eq!(first, snapshot(&dir), "rerun changed artifact bytes");
}

#[test]
fn verify_all_methods_passes_and_writes_six_rows() {
    let dir = scratch("verify-all");
    let out = run(&["--out-dir", dir.to_str().unwrap(), "verify"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let indicators = fs::read_to_string(dir.join("verify_indicators.csv")).unwrap();
    assert_eq!(indicators.lines().count(), 7);
    let conditions = fs::read_to_string(dir.join("verify_conditions.csv")).unwrap();
    assert!(conditions.lines().count() > 6 * 10);
    // Informational (non-gating) rows may fail; gating rows must not.
    assert!(!conditions.contains(",true,false\n"), "a gating condition failed");
}

#[test]
fn stability_prints_indicators_and_dumps_full_locus() {
    let dir = scratch("stability");
    let out = run(
        &[
            "--out-dir",
            dir.to_str().unwrap(),
            "stability",
            "--method",
            "AP4o43dif",
            "--locus",
            "locus.csv",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("alpha = 84.0"), "stdout: {text}");
    assert!(text.contains("mu0 = 6.27"), "stdout: {text}");
    let locus = fs::read_to_string(dir.join("locus.csv")).unwrap();
    assert_eq!(locus.lines().count(), 1 + 3600 * 4);
    assert_eq!(locus.lines().next().unwrap(), "theta,re_z,im_z");
}

#[test]
fn solve_dumps_one_row_per_stage_plus_summary() {
    let dir = scratch("solve");
    let out = run(
        &[
            "--out-dir",
            dir.to_str().unwrap(),
            "solve",
            "--problem",
            "wave",
            "--method",
            "AP4o43dig",
            "--steps",
            "160",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.join("solve_wave_AP4o43dig_160.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 160 * 4 + 1);
    assert!(csv.lines().next().unwrap().starts_with("n,j,t_nj,y1"));
    assert!(csv.lines().last().unwrap().starts_with("# y_end="));
}

#[test]
fn solve_emits_json_when_asked() {
    let dir = scratch("solve-json");
    let out = run(
        &[
            "--out-dir",
            dir.to_str().unwrap(),
            "--format",
            "json",
            "solve",
            "--problem",
            "wave",
            "--method",
            "AP3o32f",
            "--steps",
            "20",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let body = fs::read_to_string(dir.join("solve_wave_AP3o32f_20.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(value["n_steps"], 20);
    assert_eq!(value["stage_y"].as_array().unwrap().len(), 20);
}

#[test]
fn stalled_solver_exits_with_code_two() {
    let dir = scratch("stall");
    let out = run(
        &[
            "--out-dir",
            dir.to_str().unwrap(),
            "solve",
            "--problem",
            "motion",
            "--method",
            "AP3o32f",
            "--steps",
            "10",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stalled"));
}

#[test]
fn converge_rejects_non_doubling_or_tiny_step_lists() {
    let dir = scratch("badsteps");
    let base = ["--out-dir", dir.to_str().unwrap(), "converge", "--problem", "wave"];
    let mut args = base.to_vec();
    args.extend(["--steps", "20,30"]);
    assert_eq!(run(&args, &[]).status.code(), Some(3));
    let mut args = base.to_vec();
    args.extend(["--steps", "2,4"]);
    assert_eq!(run(&args, &[]).status.code(), Some(3));
}

#[test]
fn converge_writes_tables_plot_and_manifest() {
    let dir = scratch("converge");
    let out = run(
        &[
            "--out-dir",
            dir.to_str().unwrap(),
            "converge",
            "--problem",
            "wave",
            "--methods",
            "AP4o43die,AP4o43sil",
            "--steps",
            "20,40",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["AP4o43die", "AP4o43sil"] {
        let csv = fs::read_to_string(dir.join(format!("converge_wave_{name}.csv"))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "n_steps,state_error,adjoint_error,state_order,adjoint_order"
        );
        assert_eq!(csv.lines().count(), 3);
        // The order columns must be the log2 ratio of the stored errors.
        let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
        let e1: f64 = rows[0][1].parse().unwrap();
        let e2: f64 = rows[1][1].parse().unwrap();
        let order: f64 = rows[1][3].parse().unwrap();
        assert!((order - (e1 / e2).log2()).abs() < 5e-4);
    }
    let svg = fs::read_to_string(dir.join("converge_wave.svg")).unwrap();
    assert!(svg.starts_with("<svg "));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert!(svg.matches("<polyline").count() >= 2);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest_converge.json")).unwrap())
            .unwrap();
    for output in manifest["outputs"].as_array().unwrap() {
        assert!(dir.join(output.as_str().unwrap()).exists(), "missing {output}");
    }
}

#[test]
fn artifact_bytes_do_not_depend_on_the_thread_cap() {
    let serial = scratch("threads-1");
    let parallel = scratch("threads-4");
    for (dir, cap) in [(&serial, "1"), (&parallel, "4")] {
        let out = run(
            &[
                "--out-dir",
                dir.to_str().unwrap(),
                "converge",
                "--problem",
                "wave",
                "--steps",
                "20,40",
            ],
            &[("PEEROC_THREADS", cap)],
        );
        assert_eq!(out.status.code(), Some(0));
    }
    let a = snapshot(&serial);
    let b = snapshot(&parallel);
    // Manifests embed the output directory, so compare the data artifacts.
    for (name, bytes) in &a {
        if !name.starts_with("manifest") {
            assert_eq!(Some(bytes), b.get(name), "artifact {name} differs");
        }
    }
}
