use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use swlab::data_ingest::*;
use swlab::state_space::{Quarter, TimeSeriesPanel};

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic_fred")
}

fn raw() -> Vec<RawSeries> {
    load_fred_dir(&fixture_dir()).unwrap()
}

/// Independent reading of a fixture file: quarter -> value, monthly rows averaged.
fn oracle_series(id: &str) -> BTreeMap<(i32, u32), f64> {
    let text = std::fs::read_to_string(fixture_dir().join(format!("{id}.csv"))).unwrap();
    let mut groups: BTreeMap<(i32, u32), Vec<f64>> = BTreeMap::new();
    for line in text.lines().skip(1) {
        let (date, value) = line.split_once(',').unwrap();
        if value == "." {
            continue;
        }
        let year: i32 = date[0..4].parse().unwrap();
        let month: u32 = date[5..7].parse().unwrap();
        groups.entry((year, (month - 1) / 3 + 1)).or_default().push(value.parse().unwrap());
    }
    groups
        .into_iter()
        .filter_map(|(k, v)| match v.len() {
            1 => Some((k, v[0])),
            3 => Some((k, (v[0] + v[1] + v[2]) / 3.0)),
            _ => None,
        })
        .collect()
}

#[test]
fn default_window_yields_251_rows() {
    let panel = build_panel(&raw(), Window::default()).unwrap();
    assert_eq!(panel.len(), 251);
    assert_eq!(panel.dates[0], Quarter::new(1956, 2).unwrap());
    assert_eq!(*panel.dates.last().unwrap(), Quarter::new(2018, 4).unwrap());
    assert_eq!(panel.names, ["dy", "dc", "di", "dw", "pi", "l", "r"]);
}

#[test]
fn formulas_reproduced_bit_exactly() {
    let panel = build_panel(&raw(), Window::default()).unwrap();
    let s: BTreeMap<&str, BTreeMap<(i32, u32), f64>> = [
        "GDPC1", "GDPDEF", "PCEC", "FPI", "CE16OV", "FEDFUNDS", "CNP16OV", "PRS85006023", "COMPNFB",
    ]
    .into_iter()
    .map(|id| (id, oracle_series(id)))
    .collect();
    let at = |id: &str, q: Quarter| s[id][&(q.year, q.q as u32)];
    let base = Quarter::new(2012, 3).unwrap();
    let level = |q: Quarter| {
        let pop = at("CNP16OV", q) / at("CNP16OV", base);
        let emp = at("CE16OV", q) / at("CE16OV", base);
        let d = at("GDPDEF", q);
        [
            100.0 * (at("GDPC1", q) / pop).ln(),
            100.0 * ((at("PCEC", q) / d) / pop).ln(),
            100.0 * ((at("FPI", q) / d) / pop).ln(),
            100.0 * (at("COMPNFB", q) / d).ln(),
            100.0 * ((at("PRS85006023", q) / emp) / pop).ln(),
        ]
    };
    for (t, &q) in panel.dates.iter().enumerate() {
        let prev = q.offset(-1);
        let (now, before) = (level(q), level(prev));
        let want = [
            now[0] - before[0],
            now[1] - before[1],
            now[2] - before[2],
            now[3] - before[3],
            100.0 * (at("GDPDEF", q) / at("GDPDEF", prev)).ln(),
            now[4],
            at("FEDFUNDS", q) / 4.0,
        ];
        for j in 0..7 {
            assert_eq!(panel.values[(t, j)].to_bits(), want[j].to_bits(), "{q} column {j}");
        }
    }
    // Values worked out separately for the first row.
    let first = [0.22372100637198855, 0.2941488126340346, f64::NAN, 0.3406878409467424, 0.7776728093683607, 645.750928965945, 1.3116666666666665];
    for (j, v) in first.iter().enumerate().filter(|(_, v)| v.is_finite()) {
        assert!((panel.values[(0, j)] - v).abs() < 1e-12, "column {j}");
    }
}

fn replace(raw: &[RawSeries], series: RawSeries) -> Vec<RawSeries> {
    raw.iter().map(|s| if s.id == series.id { series.clone() } else { s.clone() }).collect()
}

#[test]
fn fedfunds_of_four_gives_rate_of_one() {
    let raw = raw();
    let ff = raw.iter().find(|s| s.id == FredId::FEDFUNDS).unwrap();
    let flat = RawSeries::new(FredId::FEDFUNDS, ff.observations.keys().map(|q| (*q, Some(4.0))).collect());
    let panel = build_panel(&replace(&raw, flat), Window::default()).unwrap();
    assert!(panel.values.column(6).iter().all(|r| *r == 1.0));
}

#[test]
fn flat_deflator_gives_zero_inflation() {
    let raw = raw();
    let d = raw.iter().find(|s| s.id == FredId::GDPDEF).unwrap();
    let flat = RawSeries::new(FredId::GDPDEF, d.observations.keys().map(|q| (*q, Some(107.3))).collect());
    let panel = build_panel(&replace(&raw, flat), Window::default()).unwrap();
    assert!(panel.values.column(4).iter().all(|p| *p == 0.0));
}

#[test]
fn population_scale_cancels() {
    let raw = raw();
    let base = build_panel(&raw, Window::default()).unwrap();
    let pop = raw.iter().find(|s| s.id == FredId::CNP16OV).unwrap();
    for c in [0.001, 3.7, 1024.0] {
        let panel = build_panel(&replace(&raw, pop.scaled(c)), Window::default()).unwrap();
        assert!((&panel.values - &base.values).amax() < 1e-9, "c = {c}");
    }
    let emp = raw.iter().find(|s| s.id == FredId::CE16OV).unwrap();
    let panel = build_panel(&replace(&raw, emp.scaled(2.5)), Window::default()).unwrap();
    assert!((&panel.values - &base.values).amax() < 1e-9);
}

#[test]
fn differenced_series_ignore_level_constants() {
    let raw = raw();
    let base = build_panel(&raw, Window::default()).unwrap();
    // Scaling GDPC1 adds a constant to y; scaling COMPNFB adds one to w.
    for id in [FredId::GDPC1, FredId::PCEC, FredId::FPI, FredId::COMPNFB] {
        let s = raw.iter().find(|s| s.id == id).unwrap();
        let panel = build_panel(&replace(&raw, s.scaled(5.0)), Window::default()).unwrap();
        for j in 0..4 {
            assert!((panel.values.column(j) - base.values.column(j)).amax() < 1e-9, "{id} col {j}");
        }
    }
}

#[test]
fn missing_value_inside_window_is_an_error() {
    let raw = raw();
    let g = raw.iter().find(|s| s.id == FredId::GDPC1).unwrap();
    let mut holes = g.clone();
    holes.observations.insert(Quarter::new(1990, 2).unwrap(), None);
    let err = build_panel(&replace(&raw, holes.clone()), Window::default()).unwrap_err();
    assert!(matches!(err, swlab::Error::MissingInWindow { .. }), "{err}");
    // Outside the window the gap is harmless.
    let w = Window { start: Quarter::new(1991, 1).unwrap(), end: Quarter::new(2000, 4).unwrap() };
    assert_eq!(build_panel(&replace(&raw, holes), w).unwrap().len(), 39);
}

#[test]
fn missing_marker_before_window_is_ignored() {
    // The fixture's first FEDFUNDS month is "."; a window covering it fails.
    let w = Window { start: Quarter::new(1954, 3).unwrap(), end: Quarter::new(1960, 1).unwrap() };
    assert!(matches!(build_panel(&raw(), w), Err(swlab::Error::MissingInWindow { .. })));
}

#[test]
fn single_quarter_window_is_too_short() {
    let q = Quarter::new(2000, 1).unwrap();
    assert!(matches!(build_panel(&raw(), Window { start: q, end: q }), Err(swlab::Error::WindowShort(_))));
}

#[test]
fn reingestion_is_bit_identical_and_csv_round_trips() {
    let a = build_panel(&raw(), Window::default()).unwrap();
    let b = build_panel(&raw(), Window::default()).unwrap();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    a.to_writer(&mut x).unwrap();
    b.to_writer(&mut y).unwrap();
    assert_eq!(x, y);
    let text = String::from_utf8(x.clone()).unwrap();
    assert!(text.starts_with("date,dy,dc,di,dw,pi,l,r\n"));
    assert_eq!(TimeSeriesPanel::from_reader(&x[..]).unwrap(), a);
}
