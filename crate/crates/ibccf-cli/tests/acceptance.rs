//! Determinism gate for the binary: tracking the same sequence twice must
//! produce byte-identical outputs.

mod common;

use std::fs;

use common::{code, ibccf, stderr, synth_demo};

fn report(criterion: &str, pass: bool, detail: &str) {
    println!("acceptance {criterion}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
}

#[test]
fn criterion_10_track_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    synth_demo(dir);

    for run in ["run1", "run2"] {
        let out = ibccf(dir, &["track", "--seq", "seqs/demo", "--out", run]);
        assert_eq!(code(&out), 0, "track failed: {}", stderr(&out));
    }

    let results1 = fs::read(dir.join("run1/results.txt")).unwrap();
    let results2 = fs::read(dir.join("run2/results.txt")).unwrap();
    let diag1 = fs::read(dir.join("run1/diagnostics.log")).unwrap();
    let diag2 = fs::read(dir.join("run2/diagnostics.log")).unwrap();

    let pass = results1 == results2 && diag1 == diag2;
    report(
        "10 byte-identical repeated tracking",
        pass,
        &format!(
            "results {} bytes, diagnostics {} bytes compared",
            results1.len(),
            diag1.len()
        ),
    );
    assert!(pass, "outputs differ between identical runs");
    assert!(!results1.is_empty() && !diag1.is_empty());
}
