//! Output formatting shared by every CSV and JSON writer.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::Result;

/// 17 significant digits in scientific notation; `NA` for non-finite values.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "NA".to_string()
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), fmt_float)
}

/// Writes `contents` produced by `fill` to `dir/name`, creating `dir`.
pub fn write_file<F>(dir: &Path, name: &str, fill: F) -> Result<()>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    fs::create_dir_all(dir)?;
    let mut buf = Vec::new();
    fill(&mut buf)?;
    let mut file = fs::File::create(dir.join(name))?;
    file.write_all(&buf)?;
    Ok(())
}
