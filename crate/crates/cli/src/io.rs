//! CSV and JSON output with fixed float formatting.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sta_core::protocol::ProtocolControls;

use crate::CliError;

pub const CONTROL_COLUMNS: [&str; 7] = ["t_s", "omega_sq", "omega_real_or_nan", "x0_m", "F_N", "rho", "alpha_m"];

/// `%.12e` as in C: twelve mantissa decimals and a signed exponent of at
/// least two digits. Non-finite values print as `nan`, `inf`, `-inf`.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub fn parse_float(s: &str) -> Option<f64> {
    match s.trim() {
        "nan" | "NaN" => Some(f64::NAN),
        other => other.parse().ok(),
    }
}

/// Formats `x` with `digits` significant figures in positional notation.
pub fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::input(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::input(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// JSON report next to a CSV file.
pub fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn write_controls(path: &Path, c: &ProtocolControls) -> Result<(), CliError> {
    let rows = c.times.iter().enumerate().map(|(i, &t)| {
        let w2 = c.omega_sq[i];
        let x0 = c.x0.as_ref().map_or(f64::NAN, |x| x[i]);
        vec![
            sci(t),
            sci(w2),
            sci(if w2 >= 0.0 { w2.sqrt() } else { f64::NAN }),
            sci(x0),
            sci(c.force[i]),
            sci(c.rho.derivatives(t)[0]),
            sci(c.alpha.derivatives(t)[0]),
        ]
    });
    write_csv(path, &CONTROL_COLUMNS, rows)
}

/// Columns of a control CSV as written by [`write_controls`].
#[derive(Debug, Clone, PartialEq)]
pub struct ControlColumns {
    pub t: Vec<f64>,
    pub omega_sq: Vec<f64>,
    pub x0: Vec<f64>,
    pub force: Vec<f64>,
    pub rho: Vec<f64>,
    pub alpha: Vec<f64>,
}

pub fn read_controls(path: &Path) -> Result<ControlColumns, CliError> {
    let err = |msg: String| CliError::input(format!("{}: {msg}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| err(e.to_string()))?;
    let header = r.headers().map_err(|e| err(e.to_string()))?.clone();
    let index = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| err(format!("missing column {name}")))
    };
    let cols = [
        index("t_s")?,
        index("omega_sq")?,
        index("x0_m")?,
        index("F_N")?,
        index("rho")?,
        index("alpha_m")?,
    ];
    let mut out: [Vec<f64>; 6] = Default::default();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        for (k, &c) in cols.iter().enumerate() {
            let cell = rec.get(c).unwrap_or("");
            let v = parse_float(cell)
                .ok_or_else(|| err(format!("row {}: column {} is not a number: {cell:?}", line + 2, &header[c])))?;
            out[k].push(v);
        }
    }
    let [t, omega_sq, x0, force, rho, alpha] = out;
    Ok(ControlColumns {
        t,
        omega_sq,
        x0,
        force,
        rho,
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponent() {
        assert_eq!(sci(1.5e-7), "1.500000000000e-07");
        assert_eq!(sci(-2.0), "-2.000000000000e+00");
        assert_eq!(sci(6.02214076e23), "6.022140760000e+23");
        assert_eq!(sci(1e-300), "1.000000000000e-300");
        assert_eq!(sci(f64::NAN), "nan");
        assert_eq!(sci(0.0), "0.000000000000e+00");
    }

    #[test]
    fn twelve_decimals_round_trip_closely() {
        for x in [std::f64::consts::PI, -1.234567890123456e-19, 9.87654321e12] {
            let back = parse_float(&sci(x)).unwrap();
            assert!((back / x - 1.0).abs() < 1e-12);
        }
        assert!(parse_float("nan").unwrap().is_nan());
    }

    #[test]
    fn significant_figures() {
        assert_eq!(significant(0.44205712, 4), "0.4421");
        assert_eq!(significant(1.0423771, 4), "1.042");
        assert_eq!(significant(12.34567, 4), "12.35");
        assert_eq!(significant(0.0, 4), "0");
    }
}
