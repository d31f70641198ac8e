//! FRED series loading and the transforms to the seven observables.

#[cfg(feature = "fetch")]
mod fetch;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state_space::{Quarter, TimeSeriesPanel};

#[cfg(feature = "fetch")]
pub use fetch::{fetch_all, fetch_series, API_KEY_VAR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FredId {
    GDPC1,
    GDPDEF,
    PCEC,
    FPI,
    CE16OV,
    FEDFUNDS,
    CNP16OV,
    PRS85006023,
    COMPNFB,
}

impl FredId {
    pub const ALL: [FredId; 9] = [
        FredId::GDPC1,
        FredId::GDPDEF,
        FredId::PCEC,
        FredId::FPI,
        FredId::CE16OV,
        FredId::FEDFUNDS,
        FredId::CNP16OV,
        FredId::PRS85006023,
        FredId::COMPNFB,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FredId::GDPC1 => "GDPC1",
            FredId::GDPDEF => "GDPDEF",
            FredId::PCEC => "PCEC",
            FredId::FPI => "FPI",
            FredId::CE16OV => "CE16OV",
            FredId::FEDFUNDS => "FEDFUNDS",
            FredId::CNP16OV => "CNP16OV",
            FredId::PRS85006023 => "PRS85006023",
            FredId::COMPNFB => "COMPNFB",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.as_str().eq_ignore_ascii_case(s.trim()))
    }

    /// Whether the series enters a logarithm.
    pub fn log_bound(self) -> bool {
        self != FredId::FEDFUNDS
    }
}

impl fmt::Display for FredId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One FRED series at quarterly frequency. `None` marks a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub id: FredId,
    pub observations: BTreeMap<Quarter, Option<f64>>,
}

impl RawSeries {
    pub fn new(id: FredId, observations: BTreeMap<Quarter, Option<f64>>) -> Self {
        Self { id, observations }
    }

    /// Value at `q`, failing on absent or missing entries.
    pub fn value(&self, q: Quarter) -> Result<f64> {
        let v = self
            .observations
            .get(&q)
            .copied()
            .flatten()
            .ok_or_else(|| Error::MissingInWindow {
                series: self.id.to_string(),
                date: q.to_string(),
            })?;
        if self.id.log_bound() && v <= 0.0 {
            return Err(Error::NonPositive {
                series: self.id.to_string(),
                date: q.to_string(),
                value: v,
            });
        }
        Ok(v)
    }

    /// Multiply every observation by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            id: self.id,
            observations: self.observations.iter().map(|(q, v)| (*q, v.map(|x| x * c))).collect(),
        }
    }
}

fn parse_month(s: &str) -> Option<(i32, u32)> {
    let mut parts = s.trim().split('-');
    let year = parts.next()?.parse().ok()?;
    let month = parts.next()?.parse().ok()?;
    (1..=12).contains(&month).then_some((year, month))
}

/// Parse FRED CSV text. Monthly rows are averaged within each quarter; a
/// quarter with a missing or absent month is missing.
pub fn parse_fred_csv(text: &str, id_hint: Option<FredId>, origin: &Path) -> Result<RawSeries> {
    let perr = |message: String| Error::Parse {
        path: origin.into(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.len() != 2 {
        return Err(perr(format!("expected two columns, found {}", headers.len())));
    }
    let date_col = &headers[0];
    if !(date_col.eq_ignore_ascii_case("date") || date_col.eq_ignore_ascii_case("observation_date")) {
        return Err(perr(format!("first column must be DATE, found {date_col:?}")));
    }
    let id = if headers[1].eq_ignore_ascii_case("value") {
        id_hint.ok_or_else(|| perr("a DATE,VALUE file needs the series id from its name".into()))?
    } else {
        let id = FredId::parse(&headers[1]).ok_or_else(|| perr(format!("unknown series {:?}", &headers[1])))?;
        if let Some(h) = id_hint.filter(|h| *h != id) {
            return Err(perr(format!("file holds {id}, expected {h}")));
        }
        id
    };

    let mut months: BTreeMap<(i32, u32), Option<f64>> = BTreeMap::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let (year, month) =
            parse_month(&record[0]).ok_or_else(|| perr(format!("row {}: bad date {:?}", line + 2, &record[0])))?;
        let value = match &record[1] {
            "." | "" => None,
            s => Some(
                s.parse::<f64>()
                    .map_err(|_| perr(format!("row {}: bad value {s:?}", line + 2)))?,
            ),
        };
        if months.insert((year, month), value).is_some() {
            return Err(perr(format!("row {}: duplicate date {}", line + 2, &record[0])));
        }
    }
    let quarterly = months.keys().all(|(_, m)| m % 3 == 1);
    let mut observations = BTreeMap::new();
    if quarterly {
        for ((y, m), v) in months {
            observations.insert(Quarter::of_month(y, m)?, v);
        }
    } else {
        let mut groups: BTreeMap<Quarter, Vec<Option<f64>>> = BTreeMap::new();
        for ((y, m), v) in months {
            groups.entry(Quarter::of_month(y, m)?).or_default().push(v);
        }
        for (q, vs) in groups {
            let mean = if vs.len() == 3 && vs.iter().all(Option::is_some) {
                Some(vs.iter().flatten().sum::<f64>() / 3.0)
            } else {
                None
            };
            observations.insert(q, mean);
        }
    }
    Ok(RawSeries { id, observations })
}

/// Load one FRED CSV (`DATE,<ID>` or `DATE,VALUE`; for the latter the id
/// is taken from the file stem).
pub fn load_fred_csv(path: &Path) -> Result<RawSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let hint = path.file_stem().and_then(|s| s.to_str()).and_then(FredId::parse);
    parse_fred_csv(&text, hint, path)
}

/// Load `<ID>.csv` for all nine series from `dir`.
pub fn load_fred_dir(dir: &Path) -> Result<Vec<RawSeries>> {
    FredId::ALL
        .iter()
        .map(|id| load_fred_csv(&dir.join(format!("{id}.csv"))))
        .collect()
}

/// The first and last quarter of the ingestion window. Differencing uses
/// the first quarter, so the panel starts one quarter later.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: Quarter,
    pub end: Quarter,
}

impl Default for Window {
    fn default() -> Self {
        Self {
            start: Quarter { year: 1956, q: 1 },
            end: Quarter { year: 2018, q: 4 },
        }
    }
}

/// Quarter at which the population and employment indices equal one.
pub const INDEX_BASE: Quarter = Quarter { year: 2012, q: 3 };

/// Log levels and rates of one quarter, before differencing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Levels {
    pub y: f64,
    pub c: f64,
    pub i: f64,
    pub l: f64,
    pub w: f64,
    pub r: f64,
}

struct Sources<'a>([&'a RawSeries; 9]);

impl<'a> Sources<'a> {
    fn new(raw: &'a [RawSeries]) -> Result<Self> {
        let mut found = Vec::with_capacity(9);
        for id in FredId::ALL {
            let mut hits = raw.iter().filter(|s| s.id == id);
            let s = hits
                .next()
                .ok_or_else(|| Error::Invalid(format!("series {id} was not supplied")))?;
            if hits.next().is_some() {
                return Err(Error::Invalid(format!("series {id} was supplied twice")));
            }
            found.push(s);
        }
        Ok(Self(found.try_into().unwrap_or_else(|_| unreachable!())))
    }

    fn get(&self, id: FredId, q: Quarter) -> Result<f64> {
        self.0[id as usize].value(q)
    }

    fn levels(&self, q: Quarter, pop_base: f64, emp_base: f64) -> Result<Levels> {
        use FredId::*;
        let pop_ind = self.get(CNP16OV, q)? / pop_base;
        let emp_ind = self.get(CE16OV, q)? / emp_base;
        let deflator = self.get(GDPDEF, q)?;
        Ok(Levels {
            y: 100.0 * (self.get(GDPC1, q)? / pop_ind).ln(),
            c: 100.0 * ((self.get(PCEC, q)? / deflator) / pop_ind).ln(),
            i: 100.0 * ((self.get(FPI, q)? / deflator) / pop_ind).ln(),
            l: 100.0 * ((self.get(PRS85006023, q)? / emp_ind) / pop_ind).ln(),
            w: 100.0 * (self.get(COMPNFB, q)? / deflator).ln(),
            r: self.get(FEDFUNDS, q)? / 4.0,
        })
    }
}

/// Log levels for every quarter of the window.
pub fn levels(raw: &[RawSeries], window: Window) -> Result<Vec<(Quarter, Levels)>> {
    let src = Sources::new(raw)?;
    let pop_base = src.get(FredId::CNP16OV, INDEX_BASE)?;
    let emp_base = src.get(FredId::CE16OV, INDEX_BASE)?;
    let n = window.end.ordinal() - window.start.ordinal() + 1;
    (0..n.max(0))
        .map(|k| {
            let q = window.start.offset(k);
            Ok((q, src.levels(q, pop_base, emp_base)?))
        })
        .collect()
}

/// Build the canonical panel: output, consumption, investment and wages in
/// first differences, inflation from the deflator, hours and the quarterly
/// policy rate in levels. Rows cover `window.start + 1 ..= window.end`.
pub fn build_panel(raw: &[RawSeries], window: Window) -> Result<TimeSeriesPanel> {
    let n = window.end.ordinal() - window.start.ordinal() + 1;
    if n < 2 {
        return Err(Error::WindowShort(format!(
            "{}..{} leaves no quarter after differencing",
            window.start, window.end
        )));
    }
    let lv = levels(raw, window)?;
    let src = Sources::new(raw)?;
    let rows = lv.len() - 1;
    let mut values = DMatrix::zeros(rows, 7);
    for t in 0..rows {
        let (q, now) = lv[t + 1];
        let (q_prev, prev) = lv[t];
        let pi = 100.0 * (src.get(FredId::GDPDEF, q)? / src.get(FredId::GDPDEF, q_prev)?).ln();
        let row = [now.y - prev.y, now.c - prev.c, now.i - prev.i, now.w - prev.w, pi, now.l, now.r];
        for (j, v) in row.into_iter().enumerate() {
            values[(t, j)] = v;
        }
    }
    TimeSeriesPanel::canonical(window.start.offset(1), values)
}
