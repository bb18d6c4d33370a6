//! CSV/JSON formatting shared by the engines and the CLI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Formats a float with 17 significant digits so values round-trip exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV line, comma separated, newline terminated, no trailing delimiter.
pub fn csv_row(values: &[f64]) -> String {
    let mut line = values
        .iter()
        .map(|v| fmt_f64(*v))
        .collect::<Vec<_>>()
        .join(",");
    line.push('\n');
    line
}

/// Two-column CSV with the given header.
pub fn two_column_csv(header: (&str, &str), xs: &[f64], ys: &[f64]) -> String {
    let mut out = format!("{},{}\n", header.0, header.1);
    for (x, y) in xs.iter().zip(ys) {
        out.push_str(&csv_row(&[*x, *y]));
    }
    out
}

/// Evenly spaced grid `start:stop:count` (endpoints included).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if !start.is_finite() || !stop.is_finite() {
            return Err(Error::InvalidArgument("grid bounds must be finite".into()));
        }
        if count < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid count must be at least 2, got {count}"
            )));
        }
        Ok(Self { start, stop, count })
    }

    pub fn points(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + i as f64 * step
                }
            })
            .collect()
    }
}

impl std::str::FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "grid `{s}` is not start:stop:count"
            )));
        }
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad grid bound `{t}`")))
        };
        let count = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::InvalidArgument(format!("bad grid count `{}`", parts[2])))?;
        GridSpec::new(num(parts[0])?, num(parts[1])?, count)
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}:{:?}:{}", self.start, self.stop, self.count)
    }
}
