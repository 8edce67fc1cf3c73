//! Configuration, persistence helpers and the command layer behind the
//! `stretchcap` binary.

use std::io::Write;
use std::path::{Path, PathBuf};

/// Writes `bytes` to `path` via a temp file in the same directory followed by
/// an atomic rename, so readers never observe partial files.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let dir = dir.unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp_path = tmp_name_in(dir);
    let mut file = std::fs::OpenOptions::new()
        .write(true)
        .create_new(true)
        .open(&tmp_path)?;
    file.write_all(bytes)?;
    file.sync_all()?;
    drop(file);
    match std::fs::rename(&tmp_path, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = std::fs::remove_file(&tmp_path);
            Err(e)
        }
    }
}

fn tmp_name_in(dir: &Path) -> PathBuf {
    use std::sync::atomic::{AtomicU64, Ordering};
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    loop {
        let n = COUNTER.fetch_add(1, Ordering::Relaxed);
        let candidate = dir.join(format!(".stretchcap-tmp-{}-{n}", std::process::id()));
        if !candidate.exists() {
            return candidate;
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FrameCsvError {
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Writes a per-frame vector table: header `frame,<col 0>,...`, one row per
/// frame in index order.
pub(crate) fn write_frame_csv(
    path: &Path,
    column_name: impl Fn(usize) -> String,
    frames: &[nalgebra::DVector<f64>],
) -> Result<(), FrameCsvError> {
    let cols = frames.first().map_or(0, |f| f.len());
    let mut text = String::from("frame");
    for c in 0..cols {
        text.push(',');
        text.push_str(&column_name(c));
    }
    text.push('\n');
    for (i, frame) in frames.iter().enumerate() {
        text.push_str(&i.to_string());
        for v in frame.iter() {
            text.push_str(&format!(",{v}"));
        }
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())?;
    Ok(())
}

pub(crate) fn read_frame_csv(path: &Path) -> Result<Vec<nalgebra::DVector<f64>>, FrameCsvError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(FrameCsvError::Malformed {
        row: 0,
        message: "empty file".into(),
    })?;
    if !header.starts_with("frame") {
        return Err(FrameCsvError::Malformed {
            row: 0,
            message: format!("unexpected header {header:?}"),
        });
    }
    let cols = header.split(',').count();
    if cols < 2 {
        return Err(FrameCsvError::Malformed {
            row: 0,
            message: "no value columns".into(),
        });
    }
    let mut frames = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(FrameCsvError::Malformed {
                row: lineno + 1,
                message: format!("expected {cols} fields, got {}", fields.len()),
            });
        }
        let values: Result<Vec<f64>, _> = fields[1..].iter().map(|f| f.parse::<f64>()).collect();
        let values = values.map_err(|e| FrameCsvError::Malformed {
            row: lineno + 1,
            message: e.to_string(),
        })?;
        frames.push(nalgebra::DVector::from_vec(values));
    }
    Ok(frames)
}
