//! Pulse CSV input and fixed-precision JSON output.

use std::str::FromStr;

use photon_capture::model::mhz_to_rad;
use photon_capture::table::fmt_f64;
use photon_capture::{ControlPulse, Error, TimeGrid};
use serde_json::{Number, Value};

use crate::CliError;

/// A pulse read back from a `derive` CSV, still on its own time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseFile {
    pub t_us: Vec<f64>,
    pub omega_mhz: Vec<f64>,
}

impl PulseFile {
    /// Needs `t_us` and `omega_mhz` columns; other columns are checked for
    /// shape but ignored. `#` lines and blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = |msg: String| CliError::Invalid(format!("pulse file: {msg}"));
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let Some((_, header)) = lines.next() else {
            return Err(bad("no header row".into()));
        };
        let header: Vec<&str> = header.split(',').map(str::trim).collect();
        let col = |name: &str| {
            header
                .iter()
                .position(|h| *h == name)
                .ok_or_else(|| bad(format!("header lacks a {name} column")))
        };
        let (ti, oi) = (col("t_us")?, col("omega_mhz")?);

        let mut out = Self {
            t_us: Vec::new(),
            omega_mhz: Vec::new(),
        };
        for (row, (lineno, line)) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != header.len() {
                return Err(bad(format!(
                    "row {} (line {}): expected {} columns, found {}",
                    row + 1,
                    lineno + 1,
                    header.len(),
                    fields.len()
                )));
            }
            let num = |c: usize| {
                fields[c]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        bad(format!(
                            "row {} (line {}), column {} ({}): cannot read {:?} as a finite number",
                            row + 1,
                            lineno + 1,
                            c + 1,
                            header[c],
                            fields[c]
                        ))
                    })
            };
            out.t_us.push(num(ti)?);
            out.omega_mhz.push(num(oi)?);
        }
        if out.t_us.len() < 3 {
            return Err(bad(format!(
                "need at least 3 rows, found {}",
                out.t_us.len()
            )));
        }
        Ok(out)
    }

    /// Places the samples on `grid`, which must match row for row.
    pub fn into_pulse(self, grid: &TimeGrid) -> Result<ControlPulse, CliError> {
        if self.t_us.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "pulse file has {} samples, grid has {}",
                self.t_us.len(),
                grid.len()
            ))
            .into());
        }
        let tol = 1e-9 * grid.duration();
        for (k, &t_us) in self.t_us.iter().enumerate() {
            let t = t_us * 1e-6;
            if (t - grid.t(k)).abs() > tol {
                return Err(Error::GridMismatch(format!(
                    "pulse sample {} is at {t:e} s, grid point is {:e} s",
                    k + 1,
                    grid.t(k)
                ))
                .into());
            }
        }
        let omega = self.omega_mhz.into_iter().map(mhz_to_rad).collect();
        Ok(ControlPulse::new(*grid, omega)?)
    }
}

/// JSON number printed with the same 17 significant digits as the CSV files.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        Value::Number(Number::from_str(&fmt_f64(v)).expect("formatted float is valid JSON"))
    } else {
        Value::Null
    }
}

pub fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "# meta = 1\nt_us,phi_in,omega_mhz\n0,0,1\n0.5,1,2\n1,0,3\n";

    #[test]
    fn reads_columns_by_name() {
        let p = PulseFile::parse(GOOD).unwrap();
        assert_eq!(p.t_us, vec![0.0, 0.5, 1.0]);
        assert_eq!(p.omega_mhz, vec![1.0, 2.0, 3.0]);
        let grid = TimeGrid::new(0.0, 1e-6, 2).unwrap();
        let pulse = p.into_pulse(&grid).unwrap();
        assert_eq!(pulse.omega()[2], mhz_to_rad(3.0));
    }

    #[test]
    fn diagnostics_name_row_and_column() {
        let text = "t_us,phi_in,omega_mhz\n0,0,1\n0.5,1,x\n1,0,3\n";
        let msg = PulseFile::parse(text).unwrap_err().to_string();
        assert!(msg.contains("row 2") && msg.contains("column 3"), "{msg}");
        let msg = PulseFile::parse("t_us,omega_mhz\n0,1\n1\n2,3\n")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("row 2"), "{msg}");
        assert!(PulseFile::parse("a,b\n1,2\n").is_err());
    }

    #[test]
    fn grid_mismatch_detected() {
        let p = PulseFile::parse(GOOD).unwrap();
        let grid = TimeGrid::new(0.0, 2e-6, 2).unwrap();
        assert!(matches!(
            p.clone().into_pulse(&grid),
            Err(CliError::Domain(Error::GridMismatch(_)))
        ));
        let grid = TimeGrid::new(0.0, 1e-6, 4).unwrap();
        assert!(matches!(
            p.into_pulse(&grid),
            Err(CliError::Domain(Error::GridMismatch(_)))
        ));
    }

    #[test]
    fn json_numbers_keep_seventeen_digits() {
        assert_eq!(num(0.953).to_string(), "9.5299999999999996e-1");
        assert_eq!(num(f64::NAN), Value::Null);
    }
}
