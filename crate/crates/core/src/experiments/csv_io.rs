use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{RateCurvePoint, XUnit};
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 10] = [
    "x",
    "x_unit",
    "p_all",
    "e_all",
    "empirical_qber",
    "qber_stderr",
    "beta",
    "r_raw_per_s",
    "r_pns_per_s",
    "secure",
];

const SIG_DIGITS: i32 = 9;

/// Plain decimal notation with nine significant digits.
pub(crate) fn format_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (SIG_DIGITS - 1 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (9.99… → 10.0…).
    let carried = s.trim_start_matches('-').trim_start_matches("0.").trim_start_matches('0');
    if decimals > 0 && carried.chars().filter(char::is_ascii_digit).count() > SIG_DIGITS as usize {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_owned(),
        source,
    }
}

pub fn write_csv<W: Write>(points: &[RateCurvePoint], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for p in points {
        w.write_record([
            format_sig(p.x),
            p.x_unit.as_str().to_owned(),
            format_sig(p.p_all),
            format_sig(p.e_all),
            opt(p.empirical_qber),
            opt(p.qber_stderr),
            format_sig(p.beta),
            format_sig(p.r_raw_per_s),
            format_sig(p.r_pns_per_s),
            p.secure.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a header and one row per point to `path`.
pub fn emit_csv(points: &[RateCurvePoint], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    write_csv(points, file).map_err(csv_err(path))
}

fn parse_field(path: &Path, row: usize, col: &str, s: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::InvalidParams(format!(
        "{}: row {row}, column {col}: `{s}` is not a number",
        path.display()
    )))
}

pub(crate) fn parse_csv<R: Read>(input: R, path: &Path) -> Result<Vec<RateCurvePoint>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_err(path))?.clone();
    if headers.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(Error::InvalidParams(format!(
            "{}: unexpected header {:?}",
            path.display(),
            headers
        )));
    }
    let mut points = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let f = |i: usize| parse_field(path, row + 1, CSV_COLUMNS[i], &rec[i]);
        let o = |i: usize| -> Result<Option<f64>> {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                f(i).map(Some)
            }
        };
        let x_unit = match &rec[1] {
            "mu" => XUnit::Mu,
            "dB" => XUnit::Db,
            other => {
                return Err(Error::InvalidParams(format!(
                    "{}: row {}: unknown x_unit `{other}`",
                    path.display(),
                    row + 1
                )))
            }
        };
        points.push(RateCurvePoint {
            x: f(0)?,
            x_unit,
            p_all: f(2)?,
            e_all: f(3)?,
            empirical_qber: o(4)?,
            qber_stderr: o(5)?,
            beta: f(6)?,
            r_raw_per_s: f(7)?,
            r_pns_per_s: f(8)?,
            secure: &rec[9] == "true",
        });
    }
    Ok(points)
}

pub fn read_csv(path: &Path) -> Result<Vec<RateCurvePoint>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_csv(file, path)
}
