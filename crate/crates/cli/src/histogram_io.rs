//! `time_ns,counts` text files.

use std::fmt::Write as _;
use std::path::Path;

use homfit_core::{Histogram, TimeGrid};

use crate::CliError;

pub const HISTOGRAM_HEADER: &str = "time_ns,counts";

/// Bin spacings may differ from the mean spacing by this fraction, which
/// absorbs decimal rounding in hand-written files.
const SPACING_TOL: f64 = 1e-6;

pub fn load_histogram(path: &Path) -> Result<Histogram, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_histogram(&text).map_err(|(line, msg)| CliError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    })
}

/// Errors carry the 1-based line number.
pub fn parse_histogram(text: &str) -> Result<Histogram, (usize, String)> {
    let mut header_seen = false;
    let mut times = Vec::new();
    let mut counts = Vec::new();
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let n = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols != ["time_ns", "counts"] {
                return Err((n, format!("expected header `{HISTOGRAM_HEADER}`, found `{line}`")));
            }
            header_seen = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 2 {
            return Err((n, format!("expected 2 columns, found {}", cols.len())));
        }
        let t: f64 = cols[0].parse().map_err(|_| (n, format!("time `{}` is not a number", cols[0])))?;
        if !t.is_finite() {
            return Err((n, format!("time `{}` is not finite", cols[0])));
        }
        times.push(t);
        counts.push(parse_count(cols[1]).map_err(|m| (n, m))?);
        lines.push(n);
    }
    if !header_seen {
        return Err((1, format!("missing header `{HISTOGRAM_HEADER}`")));
    }
    if times.len() < 2 {
        return Err((lines.last().copied().unwrap_or(1), format!("need at least 2 bins, found {}", times.len())));
    }
    let width = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if !(width > 0.0) {
        return Err((lines[1], "bin times must increase".into()));
    }
    for k in 1..times.len() {
        let d = times[k] - times[k - 1];
        if (d - width).abs() > SPACING_TOL * width {
            return Err((lines[k], format!("non-uniform bins: spacing {d} ns, expected {width} ns")));
        }
    }
    let grid = TimeGrid::new(times[0], width, times.len()).map_err(|e| (lines[0], e.to_string()))?;
    Histogram::new(grid, counts).map_err(|e| (lines[0], e.to_string()))
}

fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(c) = s.parse::<u64>() {
        return Ok(c);
    }
    match s.parse::<f64>() {
        Ok(v) if v < 0.0 => Err(format!("negative count {s}")),
        Ok(v) if v.fract() != 0.0 => Err(format!("fractional count {s}")),
        Ok(v) if v.is_finite() && v <= u64::MAX as f64 => Ok(v as u64),
        _ => Err(format!("count `{s}` is not a non-negative integer")),
    }
}

pub fn write_histogram(h: &Histogram) -> String {
    let mut s = format!("{HISTOGRAM_HEADER}\n");
    for (t, c) in h.bin_centers().iter().zip(h.counts()) {
        let _ = writeln!(s, "{t},{c}");
    }
    s
}
