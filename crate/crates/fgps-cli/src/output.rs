//! Output-directory resolution and CSV formatting.

use std::path::{Path, PathBuf};

/// Floats are written with 17 significant digits so files reproduce
/// bit-exact values.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Resolves the output directory: explicit flag, then the
/// `FGPS_OUT_DIR` environment variable, then the working directory.
/// Creates it when missing.
pub fn out_dir(flag: Option<&Path>) -> std::io::Result<PathBuf> {
    let dir = match flag {
        Some(p) => p.to_path_buf(),
        None => match std::env::var_os("FGPS_OUT_DIR") {
            Some(v) => PathBuf::from(v),
            None => PathBuf::from("."),
        },
    };
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut text = String::with_capacity(rows.len() * 64 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)
}
