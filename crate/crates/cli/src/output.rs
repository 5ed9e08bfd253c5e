//! Artifact formatting and atomic writes.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

/// `x` with 12 significant digits, trailing zeros trimmed; scientific
/// notation outside `[1e-5, 1e12)`.
pub fn float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let s = format!("{:.*}", (11 - exp).max(0) as usize, x);
        trim_fraction(&s).to_string()
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, e) = s.split_once('e').expect("scientific form");
        format!("{}e{e}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV text from a header and rows.
pub fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().context("flushing CSV buffer")
}

pub fn json_text<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes to `out` through a temporary file in the same directory, so the
/// target either appears complete or not at all. `None` means stdout.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    let Some(path) = out else {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(bytes)?;
        return Ok(stdout.flush()?);
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(float(0.0), "0");
        assert_eq!(float(2.0), "2");
        assert_eq!(float(1.0 / 3.0), "0.333333333333");
        assert_eq!(float(15.085_123_456_789_9), "15.0851234568");
        assert_eq!(float(-1234.5), "-1234.5");
        assert_eq!(float(1.5e-9), "1.5e-9");
        assert_eq!(float(6.02214076e23), "6.02214076e23");
        assert_eq!(float(f64::INFINITY), "inf");
    }
}
