//! Shared plumbing for the binary tests: spawn the built executable in a
//! scratch directory and synth one small deterministic sequence.

// each test target compiles its own copy, none uses every helper
#![allow(dead_code)]

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

pub fn ibccf(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ibccf"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn the cli binary")
}

pub fn ibccf_env(cwd: &Path, args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ibccf"))
        .args(args)
        .current_dir(cwd)
        .env(key, value)
        .output()
        .expect("spawn the cli binary")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("process not killed by a signal")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Small translating target, enough frames for the model to settle.
pub fn write_demo_spec(path: &Path) {
    fs::write(
        path,
        "name = demo\nrows = 96\ncols = 128\nframes = 8\n\
         start = 64,48,20,14\nschedule = linear\ndeltas = 1.5,0.5,0,0\nseed = 7\n",
    )
    .unwrap();
}

/// Synths the demo sequence under `dir/seqs` and returns its directory.
pub fn synth_demo(dir: &Path) -> std::path::PathBuf {
    let spec = dir.join("spec.txt");
    write_demo_spec(&spec);
    let out = ibccf(dir, &["synth", "spec.txt", "--out", "seqs"]);
    assert_eq!(code(&out), 0, "synth failed: {}", stderr(&out));
    dir.join("seqs").join("demo")
}
