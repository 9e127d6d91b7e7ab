use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::RunRecord;
use crate::observables::DispersionEntry;
use crate::{DispersionSeries, Error, Result};

pub const CSV_HEADER: &str = "j,dispersion,norm,p_m0";

/// Plain decimal notation with 17 significant digits, which round-trips every
/// finite `f64`. Never uses an exponent.
pub fn format_decimal(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.0000000000000000".into();
    }
    let sci = format!("{:.16e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let point = exp + 1;
    let mut out = String::with_capacity(digits.len() + 8);
    if x < 0.0 {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-point) as usize));
        out.push_str(&digits);
    } else if point as usize >= digits.len() {
        out.push_str(&digits);
        out.extend(std::iter::repeat_n('0', point as usize - digits.len()));
    } else {
        let (int, frac) = digits.split_at(point as usize);
        out.push_str(int);
        out.push('.');
        out.push_str(frac);
    }
    out
}

/// The aggregate series as CSV text.
pub fn render_csv(record: &RunRecord) -> String {
    let mut out = String::with_capacity(64 * (record.aggregate.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for e in record.aggregate.entries() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            e.j,
            format_decimal(e.dispersion),
            format_decimal(e.norm),
            format_decimal(e.p_m0)
        );
    }
    out
}

pub fn write_csv(record: &RunRecord, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, render_csv(record)).map_err(|e| Error::io(path, e))
}

/// Reads a file written by [`write_csv`].
pub fn read_csv(path: impl AsRef<Path>) -> Result<DispersionSeries<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::invalid(format!(
            "{}: missing header `{CSV_HEADER}`",
            path.display()
        )));
    }
    let bad = |n: usize| Error::invalid(format!("{}: malformed row {}", path.display(), n + 2));
    let mut entries = Vec::new();
    for (n, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(bad(n));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(n));
        entries.push(DispersionEntry {
            j: f[0].parse().map_err(|_| bad(n))?,
            dispersion: num(f[1])?,
            norm: num(f[2])?,
            p_m0: num(f[3])?,
        });
    }
    DispersionSeries::from_entries(entries)
}
