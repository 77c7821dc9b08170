//! Sequence directories on disk: `<seq>/img/` with lexicographically
//! ordered png or jpeg frames plus `groundtruth_rect.txt` (falling back to
//! `groundtruth.txt`), one `x,y,w,h` line per frame. The same line format
//! is used for results files.

use std::fs;
use std::path::{Path, PathBuf};

use ibccf::eval::Sequence;
use ibccf::{BoundaryBox, Frame};

use crate::CliError;

fn io_err(what: &str, path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{what} {}: {e}", path.display()))
}

pub fn parse_box_line(line: &str) -> Option<BoundaryBox> {
    let parts: Vec<&str> = line.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return None;
    }
    let mut v = [0.0f64; 4];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part.parse().ok()?;
    }
    BoundaryBox::from_ltwh(v[0], v[1], v[2], v[3]).ok()
}

pub fn read_boxes(path: &Path) -> Result<Vec<BoundaryBox>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err("cannot read", path, e))?;
    let mut boxes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let b = parse_box_line(line).ok_or_else(|| {
            CliError::Data(format!(
                "{}:{}: expected `x,y,w,h` with positive size, got `{}`",
                path.display(),
                i + 1,
                line.trim()
            ))
        })?;
        boxes.push(b);
    }
    Ok(boxes)
}

pub fn format_box(b: &BoundaryBox) -> String {
    let (x, y, w, h) = b.to_ltwh();
    format!("{x},{y},{w},{h}")
}

pub fn write_boxes(path: &Path, boxes: &[BoundaryBox]) -> Result<(), CliError> {
    let mut text = String::new();
    for b in boxes {
        text.push_str(&format_box(b));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| io_err("cannot write", path, e))
}

/// Ground-truth file inside a sequence directory. Missing entirely is a
/// usage error: the directory does not hold a usable sequence.
pub fn groundtruth_path(seq_dir: &Path) -> Result<PathBuf, CliError> {
    for name in ["groundtruth_rect.txt", "groundtruth.txt"] {
        let p = seq_dir.join(name);
        if p.is_file() {
            return Ok(p);
        }
    }
    Err(CliError::Usage(format!(
        "no groundtruth_rect.txt or groundtruth.txt under {}",
        seq_dir.display()
    )))
}

fn is_frame_file(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref(),
        Some("png") | Some("jpg") | Some("jpeg")
    )
}

pub fn load_sequence(seq_dir: &Path) -> Result<Sequence, CliError> {
    let img_dir = seq_dir.join("img");
    if !img_dir.is_dir() {
        return Err(CliError::Usage(format!("no img/ directory under {}", seq_dir.display())));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(&img_dir)
        .map_err(|e| io_err("cannot list", &img_dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_frame_file(p))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Data(format!("no frames under {}", img_dir.display())));
    }

    let mut frames = Vec::with_capacity(paths.len());
    for p in &paths {
        let img = image::open(p)
            .map_err(|e| CliError::Data(format!("unreadable frame {}: {e}", p.display())))?
            .to_luma8();
        let (w, h) = (img.width() as usize, img.height() as usize);
        frames.push(Frame::from_luma(h, w, img.as_raw())?);
    }

    let gt = read_boxes(&groundtruth_path(seq_dir)?)?;
    if gt.len() != frames.len() {
        return Err(CliError::Data(format!(
            "{}: {} frames but {} ground-truth lines",
            seq_dir.display(),
            frames.len(),
            gt.len()
        )));
    }
    let name = seq_dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sequence".to_string());
    Ok(Sequence::new(name, frames, gt)?)
}

/// Writes `<out_root>/<seq.name>/img/0001.png ...` plus the ground-truth
/// file, and returns the sequence directory.
pub fn write_sequence(out_root: &Path, seq: &Sequence) -> Result<PathBuf, CliError> {
    let seq_dir = out_root.join(&seq.name);
    let img_dir = seq_dir.join("img");
    fs::create_dir_all(&img_dir).map_err(|e| io_err("cannot create", &img_dir, e))?;
    for (i, frame) in seq.frames.iter().enumerate() {
        let (rows, cols) = frame.data.dim();
        let pixels: Vec<u8> =
            frame.data.iter().map(|&v| v.round().clamp(0.0, 255.0) as u8).collect();
        let img = image::GrayImage::from_raw(cols as u32, rows as u32, pixels)
            .expect("pixel buffer matches frame dimensions");
        let p = img_dir.join(format!("{:04}.png", i + 1));
        img.save(&p).map_err(|e| CliError::Data(format!("cannot write {}: {e}", p.display())))?;
    }
    write_boxes(&seq_dir.join("groundtruth_rect.txt"), &seq.gt)?;
    Ok(seq_dir)
}
