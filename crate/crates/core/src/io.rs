//! Two-column CSV spectra and atomic file output.
//!
//! ```text
//! # mode=delta-t scan=probe-detuning fingerprint=1f3a…
//! -150,0.00012
//! ```
//!
//! The axis column is plain MHz. Lines starting with `#` are comments; a
//! comment carrying `key=value` pairs sets the mode, scan axis and
//! fingerprint. Columns may be separated by a comma or whitespace.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::spectrum::{ScanAxis, Spectrum, SpectrumMode};
use crate::units::{mhz, to_mhz};

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write `bytes` to `path` via a temporary file in the same directory and a
/// rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| io_error(path, e))?;
    tmp.write_all(bytes).map_err(|e| io_error(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_error(path, e))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

pub fn format_spectrum_csv(spectrum: &Spectrum) -> String {
    let mut out = format!("# mode={} scan={}", spectrum.mode(), spectrum.scan());
    if let Some(f) = spectrum.fingerprint() {
        let _ = write!(out, " fingerprint={f}");
    }
    out.push('\n');
    let _ = writeln!(out, "# axis_mhz,value");
    for (x, y) in spectrum.axis().iter().zip(spectrum.values()) {
        let _ = writeln!(out, "{},{}", to_mhz(*x), y);
    }
    out
}

pub fn write_spectrum_csv(spectrum: &Spectrum, path: &Path) -> Result<()> {
    write_atomic(path, format_spectrum_csv(spectrum).as_bytes())
}

/// Parse CSV text; `path` only labels diagnostics. Without a header the
/// spectrum is taken to be a ΔT probe scan.
pub fn parse_spectrum_csv(text: &str, path: &Path) -> Result<Spectrum> {
    let err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut mode = SpectrumMode::DeltaT;
    let mut scan = ScanAxis::ProbeDetuning;
    let mut fingerprint = None;
    let mut axis = Vec::new();
    let mut values = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            for token in comment.split_whitespace() {
                let Some((key, value)) = token.split_once('=') else { continue };
                match key {
                    "mode" => mode = value.parse().map_err(|e: String| err(line_no, e))?,
                    "scan" => scan = value.parse().map_err(|e: String| err(line_no, e))?,
                    "fingerprint" => fingerprint = Some(value.to_owned()),
                    _ => {}
                }
            }
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(err(line_no, format!("expected 2 columns, found {}", fields.len())));
        }
        let parse = |f: &str, what: &str| -> Result<f64> {
            match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(err(line_no, format!("{what} '{f}' is not a finite number"))),
            }
        };
        let x = parse(fields[0], "axis value")?;
        let y = parse(fields[1], "value")?;
        if let Some(&prev) = axis.last() {
            if !(mhz(x) > prev) {
                return Err(err(line_no, "axis is not strictly increasing".to_owned()));
            }
        }
        axis.push(mhz(x));
        values.push(y);
        last_line = line_no;
    }
    if axis.len() < 2 {
        return Err(err(last_line.max(1), "need at least two data rows".to_owned()));
    }
    let spectrum = Spectrum::new(axis, values, scan, mode).map_err(|e| err(last_line, e.to_string()))?;
    Ok(match fingerprint {
        Some(f) => spectrum.with_fingerprint(f),
        None => spectrum,
    })
}

pub fn load_spectrum_csv(path: &Path) -> Result<Spectrum> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_spectrum_csv(&text, path)
}
