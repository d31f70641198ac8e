//! Experiment CSV files, figure-data reports and run manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, OrderStatistics};

use super::permute::PermutationRecord;
use super::sim_estimate::SimEstimateRecord;
use super::taylor::{DEEP_PARAMS, TAYLOR_PARAMS};
use crate::error::{Error, Result};
use crate::state_space::SERIES;
use crate::sw_model::Param;
use nalgebra::DMatrix;

pub const SIM_ESTIMATE_CSV: &str = "sim_estimate.csv";
pub const PERMUTATION_CSV: &str = "permutation.csv";
pub const TAYLOR_CSV: &str = "taylor_corr.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

type Row = BTreeMap<String, String>;

fn num(v: f64) -> String {
    v.to_string()
}

fn write_rows(path: &Path, header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_rows(path: &Path) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    r.records()
        .map(|rec| Ok(header.iter().cloned().zip(rec?.iter().map(str::to_string)).collect()))
        .collect()
}

fn field<'a>(row: &'a Row, key: &str, path: &Path) -> Result<&'a str> {
    row.get(key).map(String::as_str).ok_or_else(|| Error::Parse {
        path: path.into(),
        message: format!("missing column {key}"),
    })
}

fn parse<T: std::str::FromStr>(row: &Row, key: &str, path: &Path) -> Result<T> {
    let s = field(row, key, path)?;
    s.parse().map_err(|_| Error::Parse {
        path: path.into(),
        message: format!("bad value {s:?} in column {key}"),
    })
}

fn series_cols(prefix: &str) -> Vec<String> {
    SERIES.iter().map(|s| format!("{prefix}{s}")).collect()
}

fn theta_cols() -> Vec<String> {
    Param::ALL.iter().map(|p| format!("theta_{}", p.name())).collect()
}

fn parse_many(row: &Row, cols: &[String], path: &Path) -> Result<Vec<f64>> {
    cols.iter().map(|c| parse(row, c, path)).collect()
}

const SIM_SCALARS: [&str; 11] = [
    "penalized_nll",
    "train_mse_avg",
    "test_mse_avg",
    "param_sq_err",
    "param_sq_err_raw",
    "nll_per_obs_train",
    "penalized_nll_per_obs_train",
    "nll_per_obs_test",
    "truth_test_mse_avg",
    "truth_nll_per_obs_test",
    "n_evals",
];

fn sim_header() -> Vec<String> {
    let mut h: Vec<String> = ["replication", "train_size", "error"].map(String::from).to_vec();
    h.extend(SIM_SCALARS.iter().map(|s| s.to_string()));
    h.extend(series_cols("test_mse_"));
    h.extend(series_cols("truth_test_mse_"));
    h.extend(theta_cols());
    h
}

fn sim_scalars(r: &SimEstimateRecord) -> [f64; 11] {
    [
        r.penalized_nll,
        r.train_mse_avg,
        r.test_mse_avg,
        r.param_sq_err,
        r.param_sq_err_raw,
        r.nll_per_obs_train,
        r.penalized_nll_per_obs_train,
        r.nll_per_obs_test,
        r.truth_test_mse_avg,
        r.truth_nll_per_obs_test,
        r.n_evals as f64,
    ]
}

pub fn write_sim_estimate_csv(path: &Path, records: &[SimEstimateRecord]) -> Result<()> {
    write_rows(
        path,
        &sim_header(),
        records.iter().map(|r| {
            let mut row = vec![r.replication.to_string(), r.train_size.to_string(), r.error.clone()];
            row.extend(sim_scalars(r).map(num));
            row.extend(r.test_mse_per_series.iter().copied().map(num));
            row.extend(r.truth_test_mse_per_series.iter().copied().map(num));
            row.extend(r.theta_hat.iter().copied().map(num));
            row
        }),
    )
}

pub fn read_sim_estimate_csv(path: &Path) -> Result<Vec<SimEstimateRecord>> {
    read_rows(path)?
        .iter()
        .map(|row| {
            let f = |k: &str| parse::<f64>(row, k, path);
            Ok(SimEstimateRecord {
                replication: parse(row, "replication", path)?,
                train_size: parse(row, "train_size", path)?,
                error: field(row, "error", path)?.to_string(),
                theta_hat: parse_many(row, &theta_cols(), path)?,
                penalized_nll: f("penalized_nll")?,
                n_evals: parse(row, "n_evals", path)?,
                train_mse_avg: f("train_mse_avg")?,
                test_mse_avg: f("test_mse_avg")?,
                test_mse_per_series: parse_many(row, &series_cols("test_mse_"), path)?,
                param_sq_err: f("param_sq_err")?,
                param_sq_err_raw: f("param_sq_err_raw")?,
                nll_per_obs_train: f("nll_per_obs_train")?,
                penalized_nll_per_obs_train: f("penalized_nll_per_obs_train")?,
                nll_per_obs_test: f("nll_per_obs_test")?,
                truth_test_mse_avg: f("truth_test_mse_avg")?,
                truth_test_mse_per_series: parse_many(row, &series_cols("truth_test_mse_"), path)?,
                truth_nll_per_obs_test: f("truth_nll_per_obs_test")?,
            })
        })
        .collect()
}

const PERM_SCALARS: [&str; 6] = [
    "penalized_nll_train",
    "unpenalized_nll_train",
    "avg_pct_improvement",
    "avg_scaled_mse",
    "predictive_nll",
    "n_evals",
];

fn perm_header() -> Vec<String> {
    let mut h: Vec<String> = ["rank", "mapping", "error"].map(String::from).to_vec();
    h.extend(PERM_SCALARS.iter().map(|s| s.to_string()));
    h.extend(series_cols("mse_"));
    h.extend(series_cols("pct_improvement_"));
    h.extend(series_cols("scaled_mse_"));
    h.extend(theta_cols());
    h
}

pub fn write_permutation_csv(path: &Path, records: &[PermutationRecord]) -> Result<()> {
    write_rows(
        path,
        &perm_header(),
        records.iter().map(|r| {
            let mut row = vec![r.rank.to_string(), r.mapping.clone(), r.error.clone()];
            row.extend(
                [
                    r.penalized_nll_train,
                    r.unpenalized_nll_train,
                    r.avg_pct_improvement,
                    r.avg_scaled_mse,
                    r.predictive_nll,
                    r.n_evals as f64,
                ]
                .map(num),
            );
            row.extend(r.per_series_mse.iter().copied().map(num));
            row.extend(r.per_series_pct_improvement.iter().copied().map(num));
            row.extend(r.per_series_scaled_mse.iter().copied().map(num));
            row.extend(r.theta_hat.iter().copied().map(num));
            row
        }),
    )
}

pub fn read_permutation_csv(path: &Path) -> Result<Vec<PermutationRecord>> {
    read_rows(path)?
        .iter()
        .map(|row| {
            let f = |k: &str| parse::<f64>(row, k, path);
            Ok(PermutationRecord {
                rank: parse(row, "rank", path)?,
                mapping: field(row, "mapping", path)?.to_string(),
                error: field(row, "error", path)?.to_string(),
                theta_hat: parse_many(row, &theta_cols(), path)?,
                penalized_nll_train: f("penalized_nll_train")?,
                unpenalized_nll_train: f("unpenalized_nll_train")?,
                n_evals: parse(row, "n_evals", path)?,
                avg_pct_improvement: f("avg_pct_improvement")?,
                avg_scaled_mse: f("avg_scaled_mse")?,
                predictive_nll: f("predictive_nll")?,
                per_series_mse: parse_many(row, &series_cols("mse_"), path)?,
                per_series_pct_improvement: parse_many(row, &series_cols("pct_improvement_"), path)?,
                per_series_scaled_mse: parse_many(row, &series_cols("scaled_mse_"), path)?,
            })
        })
        .collect()
}

pub fn write_taylor_csv(path: &Path, corr: &DMatrix<f64>) -> Result<()> {
    let mut header = vec!["parameter".to_string()];
    header.extend(TAYLOR_PARAMS.iter().map(|p| p.name().to_string()));
    write_rows(
        path,
        &header,
        DEEP_PARAMS.iter().enumerate().map(|(i, p)| {
            let mut row = vec![p.name().to_string()];
            row.extend(corr.row(i).iter().copied().map(num));
            row
        }),
    )
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub profile: String,
    pub seed: u64,
    /// Command line as invoked.
    #[serde(default)]
    pub args: Vec<String>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<String>,
    pub config: serde_json::Value,
}

impl Manifest {
    pub fn new(command: &str, profile: &str, seed: u64, config: &impl Serialize) -> Result<Self> {
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            profile: profile.into(),
            seed,
            args: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            config: serde_json::to_value(config)?,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_JSON);
        std::fs::write(&path, serde_json::to_string_pretty(self)? + "\n").map_err(|e| Error::io(&path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.into(),
            message: e.to_string(),
        })
    }
}

struct Summary {
    n: usize,
    mean: f64,
    q: [f64; 5],
}

const QUANTILES: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

fn summarize(values: &[f64]) -> Option<Summary> {
    let v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let mut data = Data::new(v.clone());
    Some(Summary {
        n: v.len(),
        mean,
        q: QUANTILES.map(|t| data.quantile(t)),
    })
}

fn summary_cols() -> Vec<String> {
    ["n", "mean", "q05", "q25", "median", "q75", "q95"].map(String::from).to_vec()
}

fn summary_row(s: &Summary) -> Vec<String> {
    let mut row = vec![s.n.to_string(), num(s.mean)];
    row.extend(s.q.map(num));
    row
}

/// Figure data derived from `sim_estimate.csv`. Returns the files written.
pub fn report_sim_estimate(records: &[SimEstimateRecord], dir: &Path) -> Result<Vec<String>> {
    let ok: Vec<&SimEstimateRecord> = records.iter().filter(|r| r.error.is_empty()).collect();
    let mut sizes: Vec<usize> = ok.iter().map(|r| r.train_size).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let at = |n: usize| ok.iter().filter(move |r| r.train_size == n);

    let metrics: [(&str, fn(&SimEstimateRecord) -> f64); 9] = [
        ("train_mse_avg", |r| r.train_mse_avg),
        ("test_mse_avg", |r| r.test_mse_avg),
        ("truth_test_mse_avg", |r| r.truth_test_mse_avg),
        ("param_sq_err", |r| r.param_sq_err),
        ("param_sq_err_raw", |r| r.param_sq_err_raw),
        ("nll_per_obs_train", |r| r.nll_per_obs_train),
        ("penalized_nll_per_obs_train", |r| r.penalized_nll_per_obs_train),
        ("nll_per_obs_test", |r| r.nll_per_obs_test),
        ("truth_nll_per_obs_test", |r| r.truth_nll_per_obs_test),
    ];
    let mut header = vec!["metric".to_string(), "train_size".to_string()];
    header.extend(summary_cols());
    let mut rows = Vec::new();
    for (name, get) in metrics {
        for &n in &sizes {
            let v: Vec<f64> = at(n).map(|r| get(r)).collect();
            if let Some(s) = summarize(&v) {
                let mut row = vec![name.to_string(), n.to_string()];
                row.extend(summary_row(&s));
                rows.push(row);
            }
        }
    }
    write_rows(&dir.join("fig_sim_error_bands.csv"), &header, rows.into_iter())?;

    let mut header = vec!["series".to_string(), "train_size".to_string(), "source".to_string()];
    header.extend(summary_cols());
    let mut rows = Vec::new();
    for (j, s) in SERIES.iter().enumerate() {
        for &n in &sizes {
            for (source, get) in [
                ("estimate", (|r: &SimEstimateRecord, j: usize| r.test_mse_per_series[j]) as fn(&SimEstimateRecord, usize) -> f64),
                ("truth", |r, j| r.truth_test_mse_per_series[j]),
            ] {
                let v: Vec<f64> = at(n).map(|r| get(r, j)).collect();
                if let Some(sum) = summarize(&v) {
                    let mut row = vec![s.to_string(), n.to_string(), source.to_string()];
                    row.extend(summary_row(&sum));
                    rows.push(row);
                }
            }
        }
    }
    write_rows(&dir.join("fig_sim_series_mse.csv"), &header, rows.into_iter())?;

    let header = ["replication", "train_size", "parameter", "estimate"].map(String::from);
    write_rows(
        &dir.join("fig_sim_param_trajectories.csv"),
        &header,
        ok.iter().flat_map(|r| {
            Param::ALL.iter().map(move |p| {
                vec![
                    r.replication.to_string(),
                    r.train_size.to_string(),
                    p.name().to_string(),
                    num(r.theta_hat[p.index()]),
                ]
            })
        }),
    )?;
    Ok(vec![
        "fig_sim_error_bands.csv".into(),
        "fig_sim_series_mse.csv".into(),
        "fig_sim_param_trajectories.csv".into(),
    ])
}

/// Figure data derived from `permutation.csv`. Returns the files written.
pub fn report_permutation(records: &[PermutationRecord], dir: &Path) -> Result<Vec<String>> {
    let ok: Vec<&PermutationRecord> = records.iter().filter(|r| r.error.is_empty()).collect();
    let header = ["rank", "mapping", "metric", "series", "value"].map(String::from);
    let mut rows = Vec::new();
    for r in &ok {
        let mut push = |metric: &str, series: &str, v: f64| {
            rows.push(vec![r.rank.to_string(), r.mapping.clone(), metric.into(), series.into(), num(v)]);
        };
        push("pct_improvement", "all", r.avg_pct_improvement);
        push("scaled_mse", "all", r.avg_scaled_mse);
        push("predictive_nll", "all", r.predictive_nll);
        push("penalized_nll_train", "all", r.penalized_nll_train);
        for (j, s) in SERIES.iter().enumerate() {
            push("pct_improvement", s, r.per_series_pct_improvement[j]);
            push("scaled_mse", s, r.per_series_scaled_mse[j]);
            push("mse", s, r.per_series_mse[j]);
        }
    }
    write_rows(&dir.join("fig_permutation_metrics.csv"), &header, rows.into_iter())?;

    let base = ok.iter().find(|r| r.rank == 0);
    let mut header = vec![
        "metric".to_string(),
        "baseline".to_string(),
        "better_than_baseline".to_string(),
        "compared".to_string(),
    ];
    header.extend(summary_cols());
    let metrics: [(&str, fn(&PermutationRecord) -> f64); 4] = [
        ("pct_improvement", |r| r.avg_pct_improvement),
        ("scaled_mse", |r| r.avg_scaled_mse),
        ("predictive_nll", |r| r.predictive_nll),
        ("penalized_nll_train", |r| r.penalized_nll_train),
    ];
    let mut rows = Vec::new();
    for (name, get) in metrics {
        let others: Vec<f64> = ok.iter().filter(|r| r.rank != 0).map(|r| get(r)).collect();
        let b = base.map(|r| get(r)).unwrap_or(f64::NAN);
        let better = others.iter().filter(|v| **v < b).count();
        if let Some(s) = summarize(&others) {
            let mut row = vec![name.to_string(), num(b), better.to_string(), others.len().to_string()];
            row.extend(summary_row(&s));
            rows.push(row);
        }
    }
    write_rows(&dir.join("fig_permutation_summary.csv"), &header, rows.into_iter())?;
    Ok(vec!["fig_permutation_metrics.csv".into(), "fig_permutation_summary.csv".into()])
}
