//! The track, eval, and synth commands. Each run writes its outputs plus
//! exactly one `manifest.txt` recording the resolved configuration, the
//! input, and the output paths. Results and diagnostics files contain no
//! timestamps, so identical runs produce identical bytes; wall-clock times
//! live only in the manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use ibccf::eval::{self, synth_sequence, TrackRecord};
use ibccf::tracker::TrackerConfig;

use crate::config::{config_entries, parse_synth_spec, parse_tracker_config};
use crate::seqio;
use crate::{CliError, Log};

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn write_manifest(path: &Path, entries: &[(String, String)]) -> Result<(), CliError> {
    let mut text = String::new();
    for (key, value) in entries {
        let _ = writeln!(text, "{key}={value}");
    }
    fs::write(path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn base_entries(command: &str, started: u64) -> Vec<(String, String)> {
    vec![
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
        ("command".into(), command.into()),
        ("started_unix".into(), started.to_string()),
        ("finished_unix".into(), unix_now().to_string()),
    ]
}

fn ensure_out_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Data(format!("cannot create {}: {e}", out.display())))
}

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn format_angle(a: Option<f64>) -> String {
    match a {
        Some(v) => format!("{v:.4}"),
        None => "-".to_string(),
    }
}

fn diagnostics_text(rec: &TrackRecord) -> String {
    let mut out = String::new();
    for d in &rec.diags {
        let r = &d.report;
        let _ = writeln!(
            out,
            "frame={} box={} peak={:.6e} displacement={},{} shifts={},{},{},{} angles={},{},{},{}",
            d.index,
            seqio::format_box(&r.bbox),
            r.center_peak,
            r.center_displacement.0,
            r.center_displacement.1,
            r.boundary_shift[0],
            r.boundary_shift[1],
            r.boundary_shift[2],
            r.boundary_shift[3],
            format_angle(r.angles[0]),
            format_angle(r.angles[1]),
            format_angle(r.angles[2]),
            format_angle(r.angles[3]),
        );
        if let Some(admm) = &r.admm {
            out.push_str(&admm.to_log());
        }
    }
    if let Some((frame, why)) = &rec.failure {
        let _ = writeln!(out, "failure frame={frame} error={why}");
    }
    out
}

pub fn cmd_track(
    seq_dir: &Path,
    out: &Path,
    config: Option<&Path>,
    mu: Option<f64>,
    disable_boundaries: bool,
    log: Log,
) -> Result<(), CliError> {
    let started = unix_now();
    let mut cfg = match config {
        Some(p) => parse_tracker_config(&read_input(p)?, p)?,
        None => TrackerConfig::default(),
    };
    if let Some(mu) = mu {
        cfg.mu = mu;
    }
    if disable_boundaries {
        cfg.disable_boundaries = true;
    }

    let seq = seqio::load_sequence(seq_dir)?;
    if log.info() {
        eprintln!("loaded {} ({} frames of {}x{})", seq.name, seq.len(),
            seq.frames[0].data.dim().0, seq.frames[0].data.dim().1);
    }
    ensure_out_dir(out)?;

    let rec = eval::run_ope(&seq, &cfg)?;
    if log.debug() {
        for d in &rec.diags {
            eprintln!("frame {} -> {}", d.index, seqio::format_box(&d.report.bbox));
        }
    }

    let results_path = out.join("results.txt");
    let diag_path = out.join("diagnostics.log");
    seqio::write_boxes(&results_path, &rec.boxes)?;
    fs::write(&diag_path, diagnostics_text(&rec))
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", diag_path.display())))?;

    let mut entries = base_entries("track", started);
    entries.push(("sequence".into(), seq.name.clone()));
    entries.push(("seq_dir".into(), seq_dir.display().to_string()));
    entries.push(("out_dir".into(), out.display().to_string()));
    entries.push(("frames".into(), seq.len().to_string()));
    entries.push(("tracked".into(), rec.boxes.len().to_string()));
    entries.push((
        "failure".into(),
        rec.failure.as_ref().map_or("-".to_string(), |(f, why)| format!("frame {f}: {why}")),
    ));
    entries.push(("results".into(), results_path.display().to_string()));
    entries.push(("diagnostics".into(), diag_path.display().to_string()));
    for (key, value) in config_entries(&cfg) {
        entries.push((format!("config.{key}"), value));
    }
    write_manifest(&out.join("manifest.txt"), &entries)?;

    if let Some((frame, why)) = &rec.failure {
        return Err(CliError::Numerical(format!(
            "tracking failed at frame {frame}: {why} (partial results written to {})",
            out.display()
        )));
    }
    if log.info() {
        eprintln!("tracked {} frames, results in {}", rec.boxes.len(), out.display());
    }
    Ok(())
}

pub fn cmd_eval(results: &Path, seq_dir: &Path, out: &Path, log: Log) -> Result<(), CliError> {
    let started = unix_now();
    let gt = seqio::read_boxes(&seqio::groundtruth_path(seq_dir)?)?;
    let boxes = seqio::read_boxes(results)?;
    if gt.len() != boxes.len() {
        return Err(CliError::Data(format!(
            "{} has {} boxes but the ground truth has {}",
            results.display(),
            boxes.len(),
            gt.len()
        )));
    }

    let curve = eval::success_curve(&gt, &boxes);
    let op = eval::overlap_precision(&gt, &boxes, 0.5);
    let auc = eval::auc(&curve);
    println!("OP(0.50) = {op:.3}");
    println!("AUC = {auc:.3}");

    ensure_out_dir(out)?;
    let metrics_path = out.join("metrics.txt");
    fs::write(&metrics_path, format!("op_0.50={op}\nauc={auc}\n"))
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", metrics_path.display())))?;

    let curve_path = out.join("success_curve.csv");
    let mut csv = String::from("threshold,op\n");
    for (t, v) in &curve {
        let _ = writeln!(csv, "{t:.2},{v}");
    }
    fs::write(&curve_path, csv)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", curve_path.display())))?;

    let mut entries = base_entries("eval", started);
    entries.push(("results".into(), results.display().to_string()));
    entries.push(("seq_dir".into(), seq_dir.display().to_string()));
    entries.push(("out_dir".into(), out.display().to_string()));
    entries.push(("frames".into(), gt.len().to_string()));
    entries.push(("op_0.50".into(), op.to_string()));
    entries.push(("auc".into(), auc.to_string()));
    entries.push(("metrics".into(), metrics_path.display().to_string()));
    entries.push(("curve".into(), curve_path.display().to_string()));
    write_manifest(&out.join("manifest.txt"), &entries)?;

    if log.debug() {
        for (t, v) in &curve {
            eprintln!("op({t:.2}) = {v:.3}");
        }
    }
    Ok(())
}

pub fn cmd_synth(
    spec_path: &Path,
    out: &Path,
    seed: Option<u64>,
    log: Log,
) -> Result<(), CliError> {
    let started = unix_now();
    let mut spec = parse_synth_spec(&read_input(spec_path)?, spec_path)?;
    if let Some(s) = seed {
        spec = spec.seed(s);
    }
    let seq = synth_sequence(&spec)?;
    ensure_out_dir(out)?;
    let seq_dir = seqio::write_sequence(out, &seq)?;

    let mut entries = base_entries("synth", started);
    entries.push(("sequence".into(), seq.name.clone()));
    entries.push(("spec".into(), spec_path.display().to_string()));
    entries.push(("seq_dir".into(), seq_dir.display().to_string()));
    entries.push(("frames".into(), seq.len().to_string()));
    entries.push(("rows".into(), spec.rows.to_string()));
    entries.push(("cols".into(), spec.cols.to_string()));
    entries.push(("seed".into(), spec.seed.to_string()));
    entries.push(("noise".into(), spec.noise.to_string()));
    write_manifest(&seq_dir.join("manifest.txt"), &entries)?;

    if log.info() {
        eprintln!("wrote {} frames to {}", seq.len(), seq_dir.display());
    }
    Ok(())
}
