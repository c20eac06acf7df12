//! Deterministic CSV emission.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Significant digits written per cell.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `printf("%.*g")`-style formatting.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Header plus one line per row, comma separated, LF terminated.
pub fn write_csv(mut out: impl Write, header: &[String], rows: &[Vec<f64>]) -> std::io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| format_sig(v, SIGNIFICANT_DIGITS)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn csv_string(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn write_csv_file(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    write_csv(&mut file, header, rows).map_err(io)?;
    file.flush().map_err(io)
}
