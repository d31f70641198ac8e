//! Quarterly observable panels and their CSV form.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical observable names, in model order.
pub const SERIES: [&str; 7] = ["dy", "dc", "di", "dw", "pi", "l", "r"];

/// A calendar quarter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Quarter {
    pub year: i32,
    /// 1..=4
    pub q: u8,
}

impl Quarter {
    pub fn new(year: i32, q: u8) -> Result<Self> {
        if !(1..=4).contains(&q) {
            return Err(Error::Invalid(format!("quarter {q} out of range")));
        }
        Ok(Self { year, q })
    }

    /// Quarter containing the given month (1..=12).
    pub fn of_month(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Invalid(format!("month {month} out of range")));
        }
        Ok(Self {
            year,
            q: ((month - 1) / 3 + 1) as u8,
        })
    }

    /// Quarters since year 0, Q1.
    pub fn ordinal(self) -> i64 {
        self.year as i64 * 4 + (self.q as i64 - 1)
    }

    pub fn from_ordinal(k: i64) -> Self {
        Self {
            year: k.div_euclid(4) as i32,
            q: (k.rem_euclid(4) + 1) as u8,
        }
    }

    pub fn offset(self, k: i64) -> Self {
        Self::from_ordinal(self.ordinal() + k)
    }

    pub fn first_month(self) -> u32 {
        (self.q as u32 - 1) * 3 + 1
    }

    /// ISO date of the first day of the quarter.
    pub fn iso(self) -> String {
        format!("{:04}-{:02}-01", self.year, self.first_month())
    }

    /// Parse either `YYYY-MM-DD` (any day in the quarter) or `YYYYQn`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Invalid(format!("unrecognized date {s:?}"));
        if let Some((y, q)) = s.split_once(['Q', 'q']) {
            let year = y.parse().map_err(|_| bad())?;
            let q = q.parse().map_err(|_| bad())?;
            return Quarter::new(year, q).map_err(|_| bad());
        }
        let mut parts = s.split(['-', '/']);
        let year = parts.next().and_then(|y| y.parse().ok()).ok_or_else(bad)?;
        let month = parts.next().and_then(|m| m.parse().ok()).ok_or_else(bad)?;
        Quarter::of_month(year, month).map_err(|_| bad())
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year, self.q)
    }
}

impl FromStr for Quarter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Quarter::parse(s)
    }
}

/// `T_obs × 7` observations with a quarterly date index.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesPanel {
    pub names: Vec<String>,
    pub dates: Vec<Quarter>,
    /// Rows are time, columns are series.
    pub values: DMatrix<f64>,
}

impl TimeSeriesPanel {
    pub fn new(names: Vec<String>, dates: Vec<Quarter>, values: DMatrix<f64>) -> Result<Self> {
        if names.len() != values.ncols() || dates.len() != values.nrows() {
            return Err(Error::Dimension(format!(
                "{} names and {} dates for a {:?} panel",
                names.len(),
                dates.len(),
                values.shape()
            )));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::Invalid(format!("duplicate series name {n}")));
            }
        }
        if dates.windows(2).any(|w| w[1].ordinal() != w[0].ordinal() + 1) {
            return Err(Error::Invalid("dates must be consecutive quarters".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("panel contains non-finite values".into()));
        }
        Ok(Self {
            names,
            dates,
            values,
        })
    }

    /// Canonical series names with consecutive quarters from `start`.
    pub fn canonical(start: Quarter, values: DMatrix<f64>) -> Result<Self> {
        let dates = (0..values.nrows() as i64).map(|k| start.offset(k)).collect();
        Self::new(SERIES.iter().map(|s| s.to_string()).collect(), dates, values)
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn n_series(&self) -> usize {
        self.values.ncols()
    }

    /// Rows `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start > end || end > self.len() {
            return Err(Error::WindowShort(format!(
                "rows {start}..{end} requested from a panel of {}",
                self.len()
            )));
        }
        Ok(Self {
            names: self.names.clone(),
            dates: self.dates[start..end].to_vec(),
            values: self.values.rows(start, end - start).into_owned(),
        })
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file).map_err(|e| match e {
            Error::Invalid(message) | Error::Dimension(message) => Error::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        if header.get(0).map(str::trim) != Some("date") {
            return Err(Error::Invalid("first column must be `date`".into()));
        }
        let names: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
        let mut dates = Vec::new();
        let mut values = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != names.len() + 1 {
                return Err(Error::Invalid(format!("row {} has {} fields", line + 1, rec.len())));
            }
            dates.push(Quarter::parse(&rec[0])?);
            for field in rec.iter().skip(1) {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Invalid(format!("row {}: bad number {field:?}", line + 1))
                })?;
                values.push(v);
            }
        }
        let values = DMatrix::from_row_slice(dates.len(), names.len(), &values);
        Self::new(names, dates, values)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.to_writer(file)?;
        Ok(())
    }

    pub fn to_writer<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["date".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for (i, d) in self.dates.iter().enumerate() {
            let mut rec = vec![d.iso()];
            rec.extend(self.values.row(i).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(Path::new("<panel>"), e))?;
        Ok(())
    }
}
