//! Precision/coverage curve rows and their file formats: CSV (canonical),
//! JSON, and gnuplot-ready data blocks.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

pub const CSV_HEADER: &str =
    "method,config,precision_mean,precision_std,coverage_mean,coverage_std,folds";

/// One aggregated grid entry of a sweep. `config` is the grid value (cost
/// for the surrogate method, target precision for score thresholds).
/// Precision columns are NaN when no fold accepted anything.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub method: String,
    pub config: f64,
    pub precision_mean: f64,
    pub precision_std: f64,
    pub coverage_mean: f64,
    pub coverage_std: f64,
    pub folds: usize,
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Shortest decimal form with `sig` significant digits (scientific notation
/// outside a comfortable exponent range); parses back with `str::parse`.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    assert!(sig >= 1, "need at least one significant digit");
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let epos = sci.find('e').expect("scientific format always has an exponent");
    let exp: i32 = sci[epos + 1..].parse().expect("exponent is an integer");
    if exp < -4 || exp >= sig as i32 {
        format!("{}e{}", trim_zeros(&sci[..epos]), exp)
    } else {
        let prec = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", prec, x)).to_string()
    }
}

const SIG_DIGITS: usize = 6;

fn write_row<W: Write>(w: &mut W, row: &CurveRow) -> std::io::Result<()> {
    writeln!(
        w,
        "{},{},{},{},{},{},{}",
        row.method,
        fmt_sig(row.config, SIG_DIGITS),
        fmt_sig(row.precision_mean, SIG_DIGITS),
        fmt_sig(row.precision_std, SIG_DIGITS),
        fmt_sig(row.coverage_mean, SIG_DIGITS),
        fmt_sig(row.coverage_std, SIG_DIGITS),
        row.folds
    )
}

/// Canonical CSV: exact header, one row per entry in input order, numbers
/// at 6 significant digits.
pub fn export_curve<W: Write>(rows: &[CurveRow], writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "{CSV_HEADER}")?;
    for row in rows {
        write_row(&mut w, row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_curve_path<P: AsRef<Path>>(rows: &[CurveRow], path: P) -> Result<()> {
    export_curve(rows, File::create(path)?)
}

/// Parses the canonical CSV back. Errors carry 1-based line numbers.
pub fn parse_curve<R: Read>(reader: R) -> Result<Vec<CurveRow>> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or(CoreError::MalformedCurve {
            line: 1,
            message: "empty file".to_string(),
        })?;
    if header != CSV_HEADER {
        return Err(CoreError::MalformedCurve {
            line: 1,
            message: format!("bad header {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(CoreError::MalformedCurve {
                line: lineno,
                message: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        let num = |idx: usize| -> Result<f64> {
            fields[idx].parse().map_err(|_| CoreError::MalformedCurve {
                line: lineno,
                message: format!("field {} is not a number: {:?}", idx + 1, fields[idx]),
            })
        };
        let folds: usize = fields[6].parse().map_err(|_| CoreError::MalformedCurve {
            line: lineno,
            message: format!("fold count is not an integer: {:?}", fields[6]),
        })?;
        if folds == 0 {
            return Err(CoreError::MalformedCurve {
                line: lineno,
                message: "fold count must be >= 1".to_string(),
            });
        }
        rows.push(CurveRow {
            method: fields[0].to_string(),
            config: num(1)?,
            precision_mean: num(2)?,
            precision_std: num(3)?,
            coverage_mean: num(4)?,
            coverage_std: num(5)?,
            folds,
        });
    }
    Ok(rows)
}

pub fn parse_curve_path<P: AsRef<Path>>(path: P) -> Result<Vec<CurveRow>> {
    parse_curve(File::open(path)?)
}

pub fn parse_curve_str(text: &str) -> Result<Vec<CurveRow>> {
    parse_curve(text.as_bytes())
}

/// JSON array mirroring the CSV fields. Non-finite numbers become null.
pub fn export_json(rows: &[CurveRow]) -> Result<String> {
    Ok(serde_json::to_string_pretty(rows)?)
}

/// Gnuplot-friendly blocks, one per method (separated by two blank lines
/// for `index`): columns are coverage, precision, their stds, and the grid
/// value. Plot with e.g. `plot 'f.dat' index 0 using 1:2 with errorlines`.
pub fn export_plot_data<W: Write>(rows: &[CurveRow], writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    let mut methods: Vec<&str> = Vec::new();
    for row in rows {
        if !methods.contains(&row.method.as_str()) {
            methods.push(&row.method);
        }
    }
    for (i, method) in methods.iter().enumerate() {
        if i > 0 {
            writeln!(w)?;
            writeln!(w)?;
        }
        writeln!(w, "# method: {method}")?;
        writeln!(w, "# coverage_mean precision_mean coverage_std precision_std config")?;
        for row in rows.iter().filter(|r| r.method == *method) {
            writeln!(
                w,
                "{} {} {} {} {}",
                fmt_sig(row.coverage_mean, SIG_DIGITS),
                fmt_sig(row.precision_mean, SIG_DIGITS),
                fmt_sig(row.coverage_std, SIG_DIGITS),
                fmt_sig(row.precision_std, SIG_DIGITS),
                fmt_sig(row.config, SIG_DIGITS)
            )?;
        }
    }
    w.flush()?;
    Ok(())
}
