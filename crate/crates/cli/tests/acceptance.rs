//! CLI acceptance: end-to-end verdicts and byte-identical artifacts across
//! repeated runs. Run with
//! `cargo test -p coinwalk-cli --test acceptance -- --nocapture`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_coinwalk")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("coinwalk-acc-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).expect("create temp dir");
    dir
}

fn run_ok(dir: &Path, args: &[&str]) -> String {
    let output = Command::new(bin())
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn coinwalk");
    assert!(
        output.status.success(),
        "coinwalk {args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8_lossy(&output.stdout).trim().to_string()
}

#[test]
fn criterion_8_end_to_end_verdicts_and_determinism() {
    let dir = tmp_dir("criterion8");

    // decide: no_localization for the whole Fourier family d = 1..6
    for d in 1..=6usize {
        let coin = format!("fourier:{d}");
        let out = format!("verdict_f{d}.json");
        let summary = run_ok(&dir, &["decide", "--coin", &coin, "--out", &out]);
        assert!(summary.starts_with("no_localization"), "{coin}: {summary}");
        let artifact: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.join(&out)).unwrap()).unwrap();
        assert_eq!(artifact["status"], "no_localization", "{coin}");
    }

    // decide: localization for the Grover walk
    let summary = run_ok(
        &dir,
        &[
            "decide",
            "--coin",
            "grover2d",
            "--radius",
            "2",
            "--out",
            "verdict_g.json",
        ],
    );
    assert_eq!(summary, "localization (lambda=1)");

    // byte-identical artifacts across repeated runs with a fixed seed
    let first_run = tmp_dir("criterion8-run1");
    let second_run = tmp_dir("criterion8-run2");
    let artifact_sets: &[(&[&str], &[&str])] = &[
        (
            &["decide", "--coin", "grover2d", "--radius", "2"],
            &["verdict.json", "verdict.witness_state.json"],
        ),
        (&["decide", "--coin", "fourier:4"], &["verdict.json"]),
        (
            &[
                "simulate",
                "--coin",
                "fourier:2",
                "--steps",
                "60",
                "--site",
                "0,0",
                "--init",
                "random",
                "--seed",
                "7",
            ],
            &["simulate.csv"],
        ),
        (&["scan", "--coin", "grover2d"], &["scan.json"]),
        (
            &["search", "--coin", "grover2d", "--radius", "1"],
            &["search.json"],
        ),
    ];
    for (args, artifacts) in artifact_sets {
        for dir in [&first_run, &second_run] {
            run_ok(dir, args);
        }
        for artifact in *artifacts {
            let a = fs::read(first_run.join(artifact)).unwrap();
            let b = fs::read(second_run.join(artifact)).unwrap();
            assert_eq!(a, b, "{artifact} differs between runs of {args:?}");
        }
    }

    println!(
        "[acceptance] criterion 8 PASS: decide returns no_localization for fourier:1..6, \
         localization (lambda=1) for grover2d, and repeated runs produce byte-identical artifacts"
    );
}
