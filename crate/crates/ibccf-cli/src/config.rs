//! `key = value` parsers for the tracker configuration and the synthetic
//! schedule files. Lines are trimmed, `#` starts a comment, blank lines are
//! skipped, and unknown keys are rejected so typos do not silently fall
//! back to defaults.

use std::path::Path;
use std::str::FromStr;

use ibccf::eval::SynthSpec;
use ibccf::features::FeatureKind;
use ibccf::tracker::TrackerConfig;
use ibccf::CenterBox;

use crate::CliError;

fn split_line(raw: &str) -> Option<(&str, &str)> {
    let line = raw.split('#').next().unwrap_or("").trim();
    if line.is_empty() {
        return None;
    }
    let (key, value) = line.split_once('=')?;
    Some((key.trim(), value.trim()))
}

fn bad_line(path: &Path, lineno: usize, what: &str) -> CliError {
    CliError::Usage(format!("{}:{}: {}", path.display(), lineno, what))
}

fn parse_as<T: FromStr>(value: &str, key: &str, path: &Path, lineno: usize) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| bad_line(path, lineno, &format!("cannot parse `{value}` for key `{key}`")))
}

fn parse_csv<const N: usize>(
    value: &str,
    key: &str,
    path: &Path,
    lineno: usize,
) -> Result<[f64; N], CliError> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(bad_line(
            path,
            lineno,
            &format!("key `{key}` needs {N} comma-separated numbers, got {}", parts.len()),
        ));
    }
    let mut out = [0.0; N];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = parse_as(part, key, path, lineno)?;
    }
    Ok(out)
}

pub fn feature_name(kind: FeatureKind) -> &'static str {
    match kind {
        FeatureKind::Grayscale => "grayscale",
        FeatureKind::GradientHist => "gradient_hist",
    }
}

/// Parses a tracker configuration on top of the defaults. Every field of
/// [`TrackerConfig`] is settable; anything else is an error.
pub fn parse_tracker_config(text: &str, path: &Path) -> Result<TrackerConfig, CliError> {
    let mut cfg = TrackerConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let Some((key, value)) = split_line(raw) else {
            if raw.split('#').next().unwrap_or("").trim().is_empty() {
                continue;
            }
            return Err(bad_line(path, n, "expected `key = value`"));
        };
        match key {
            "lambda" => cfg.lambda = parse_as(value, key, path, n)?,
            "mu" => cfg.mu = parse_as(value, key, path, n)?,
            "rho" => cfg.rho = parse_as(value, key, path, n)?,
            "gamma" => cfg.gamma = parse_as(value, key, path, n)?,
            "admm_iters" => cfg.admm_iters = parse_as(value, key, path, n)?,
            "admm_tol" => cfg.admm_tol = parse_as(value, key, path, n)?,
            "padding" => cfg.padding = parse_as(value, key, path, n)?,
            "alpha" => cfg.alpha = parse_as(value, key, path, n)?,
            "beta" => cfg.beta = parse_as(value, key, path, n)?,
            "eta" => cfg.eta = parse_as(value, key, path, n)?,
            "sigma_center" => cfg.sigma_center = parse_as(value, key, path, n)?,
            "sigma_boundary" => cfg.sigma_boundary = parse_as(value, key, path, n)?,
            "feature" => {
                cfg.feature = match value {
                    "grayscale" => FeatureKind::Grayscale,
                    "gradient_hist" => FeatureKind::GradientHist,
                    other => {
                        return Err(bad_line(
                            path,
                            n,
                            &format!("feature must be grayscale or gradient_hist, got `{other}`"),
                        ))
                    }
                }
            }
            "cell_size" => cfg.cell_size = parse_as(value, key, path, n)?,
            "bins" => cfg.bins = parse_as(value, key, path, n)?,
            "template_size" => cfg.template_size = parse_as(value, key, path, n)?,
            "max_boundary_step" => cfg.max_boundary_step = parse_as(value, key, path, n)?,
            "min_scale" => cfg.min_scale = parse_as(value, key, path, n)?,
            "max_scale" => cfg.max_scale = parse_as(value, key, path, n)?,
            "disable_boundaries" => cfg.disable_boundaries = parse_as(value, key, path, n)?,
            other => return Err(bad_line(path, n, &format!("unknown config key `{other}`"))),
        }
    }
    Ok(cfg)
}

/// The full configuration as manifest lines, in declaration order, using
/// the same names `parse_tracker_config` accepts.
pub fn config_entries(cfg: &TrackerConfig) -> Vec<(&'static str, String)> {
    vec![
        ("lambda", cfg.lambda.to_string()),
        ("mu", cfg.mu.to_string()),
        ("rho", cfg.rho.to_string()),
        ("gamma", cfg.gamma.to_string()),
        ("admm_iters", cfg.admm_iters.to_string()),
        ("admm_tol", cfg.admm_tol.to_string()),
        ("padding", cfg.padding.to_string()),
        ("alpha", cfg.alpha.to_string()),
        ("beta", cfg.beta.to_string()),
        ("eta", cfg.eta.to_string()),
        ("sigma_center", cfg.sigma_center.to_string()),
        ("sigma_boundary", cfg.sigma_boundary.to_string()),
        ("feature", feature_name(cfg.feature).to_string()),
        ("cell_size", cfg.cell_size.to_string()),
        ("bins", cfg.bins.to_string()),
        ("template_size", cfg.template_size.to_string()),
        ("max_boundary_step", cfg.max_boundary_step.to_string()),
        ("min_scale", cfg.min_scale.to_string()),
        ("max_scale", cfg.max_scale.to_string()),
        ("disable_boundaries", cfg.disable_boundaries.to_string()),
    ]
}

/// Schedule file for `synth`. Required keys: `rows`, `cols`, `frames`,
/// `start = cx,cy,w,h` (center coordinates), and `schedule`, which is
/// `linear` (with `deltas = dx,dy,dw,dh` per frame) or `geometric` (with
/// `vel = dx,dy` and per-frame size factors `rates = wr,hr`). Optional:
/// `name` (defaults to the file stem), `seed`, `noise`.
pub fn parse_synth_spec(text: &str, path: &Path) -> Result<SynthSpec, CliError> {
    let mut name: Option<String> = None;
    let mut rows: Option<usize> = None;
    let mut cols: Option<usize> = None;
    let mut frames: Option<usize> = None;
    let mut start: Option<[f64; 4]> = None;
    let mut schedule: Option<String> = None;
    let mut deltas: Option<[f64; 4]> = None;
    let mut vel: Option<[f64; 2]> = None;
    let mut rates: Option<[f64; 2]> = None;
    let mut seed: Option<u64> = None;
    let mut noise: Option<f64> = None;

    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let Some((key, value)) = split_line(raw) else {
            if raw.split('#').next().unwrap_or("").trim().is_empty() {
                continue;
            }
            return Err(bad_line(path, n, "expected `key = value`"));
        };
        match key {
            "name" => name = Some(value.to_string()),
            "rows" => rows = Some(parse_as(value, key, path, n)?),
            "cols" => cols = Some(parse_as(value, key, path, n)?),
            "frames" => frames = Some(parse_as(value, key, path, n)?),
            "start" => start = Some(parse_csv(value, key, path, n)?),
            "schedule" => schedule = Some(value.to_string()),
            "deltas" => deltas = Some(parse_csv(value, key, path, n)?),
            "vel" => vel = Some(parse_csv(value, key, path, n)?),
            "rates" => rates = Some(parse_csv(value, key, path, n)?),
            "seed" => seed = Some(parse_as(value, key, path, n)?),
            "noise" => noise = Some(parse_as(value, key, path, n)?),
            other => return Err(bad_line(path, n, &format!("unknown schedule key `{other}`"))),
        }
    }

    let missing =
        |key: &str| CliError::Usage(format!("{}: missing key `{key}`", path.display()));
    let name = match name {
        Some(n) => n,
        None => path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "sequence".to_string()),
    };
    let rows = rows.ok_or_else(|| missing("rows"))?;
    let cols = cols.ok_or_else(|| missing("cols"))?;
    let frames = frames.ok_or_else(|| missing("frames"))?;
    let s = start.ok_or_else(|| missing("start"))?;
    let start = CenterBox::new(s[0], s[1], s[2], s[3]);
    let kind = schedule.ok_or_else(|| missing("schedule"))?;

    let mut spec = SynthSpec::new(name, rows, cols);
    spec = match kind.as_str() {
        "linear" => {
            let d = deltas.ok_or_else(|| {
                CliError::Usage(format!("{}: schedule = linear needs `deltas`", path.display()))
            })?;
            spec.schedule_linear(start, frames, d)
        }
        "geometric" => {
            let v = vel.ok_or_else(|| {
                CliError::Usage(format!("{}: schedule = geometric needs `vel`", path.display()))
            })?;
            let r = rates.ok_or_else(|| {
                CliError::Usage(format!("{}: schedule = geometric needs `rates`", path.display()))
            })?;
            spec.schedule_geometric(start, frames, v, r)
        }
        other => {
            return Err(CliError::Usage(format!(
                "{}: schedule must be linear or geometric, got `{other}`",
                path.display()
            )))
        }
    };
    if let Some(s) = seed {
        spec = spec.seed(s);
    }
    if let Some(sd) = noise {
        spec = spec.noise(sd);
    }
    Ok(spec)
}
