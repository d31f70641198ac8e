//! Command-line front end. `dispatch` returns the process exit code:
//! 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::data_ingest::{build_panel, load_fred_dir, Window};
use crate::error::{Error, ErrorClass, Result};
use crate::estimation::{estimate, theta_by_name, EstimateConfig, FitResult};
use crate::experiments::{
    read_permutation_csv, read_sim_estimate_csv, report_permutation, report_sim_estimate, run_permutation,
    run_sim_estimate, sample_ranks, taylor_correlations, write_permutation_csv, write_sim_estimate_csv,
    write_taylor_csv, Manifest, SimEstimateConfig, PERMUTATION_CSV, SIM_ESTIMATE_CSV, TAYLOR_CSV,
};
use crate::lre_solver::SolverConfig;
use crate::state_space::{entropy_rate, simulate, Quarter, TimeSeriesPanel};
use crate::sw_model::{self, EstimatedVector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "swlab", version, about = "Smets-Wouters model estimation and validation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Profile {
    Desk,
    Paper,
}

impl Profile {
    fn name(self) -> &'static str {
        match self {
            Profile::Desk => "desk",
            Profile::Paper => "paper",
        }
    }
}

#[derive(Debug, Args)]
struct Common {
    /// Master seed (default: the config file's, else 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Budget profile used for unspecified settings.
    #[arg(long, value_enum, default_value_t = Profile::Desk)]
    profile: Profile,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// JSON config file for the command; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Objective evaluations per optimizer start.
    #[arg(long)]
    budget: Option<usize>,
    /// Prior-drawn optimizer starts.
    #[arg(long)]
    starts: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the observable panel from FRED CSV files.
    Ingest {
        /// Directory holding <ID>.csv for the nine series.
        #[arg(long)]
        fred_dir: PathBuf,
        #[arg(long, default_value = "1956Q1")]
        start: Quarter,
        #[arg(long, default_value = "2018Q4")]
        end: Quarter,
        /// Output panel CSV (standard output if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Download the series into --fred-dir first (needs FRED_API_KEY).
        #[arg(long)]
        fetch: bool,
    },
    /// Posterior-mode estimate on a panel.
    Estimate {
        #[arg(long)]
        panel: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Training rows from the start of the panel.
        #[arg(long, conflicts_with = "full")]
        train_len: Option<usize>,
        /// Train on the whole panel.
        #[arg(long)]
        full: bool,
        /// Extra optimizer start (fit JSON, or `posterior-mode` / `sw-mode`).
        #[arg(long)]
        start_theta: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate a panel from a parameter vector.
    Simulate {
        #[arg(long, default_value = "posterior-mode")]
        theta: String,
        #[arg(long, default_value_t = 251)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        burn_in: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output panel CSV (standard output if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate-and-estimate study.
    SimEstimate {
        /// True parameters (default: the manifest's, else posterior-mode).
        #[arg(long)]
        theta: Option<String>,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        reps: Option<usize>,
        /// Comma-separated training sizes.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long)]
        test_len: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Series-permutation study.
    Permute {
        #[arg(long)]
        panel: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Ranks as `a..b` (inclusive) or a comma-separated list.
        #[arg(long, conflicts_with = "sample")]
        ranks: Option<String>,
        /// Identity plus this many pseudorandom ranks.
        #[arg(long)]
        sample: Option<usize>,
        /// Reuse an identity-order fit instead of estimating it.
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Entropy rate of the model at a parameter vector.
    Entropy {
        #[arg(long, default_value = "posterior-mode")]
        theta: String,
    },
    /// Figure data from experiment CSVs.
    Report {
        #[arg(long)]
        in_dir: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

/// Run the command line and return the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            if code == EXIT_OK {
                print!("{e}");
            } else {
                eprint!("{e}");
            }
            return code;
        }
    };
    match run(cli, &argv) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Usage => EXIT_USAGE,
        ErrorClass::Data => EXIT_DATA,
        ErrorClass::Numerical => EXIT_NUMERICAL,
    }
}

fn set_jobs(jobs: Option<usize>) -> Result<()> {
    if let Some(n) = jobs {
        // A second call in the same process keeps the existing pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    Ok(())
}

fn read_json(path: &Path) -> Result<serde_json::Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.into(),
        message: e.to_string(),
    })
}

/// Load a config file. Manifests and fit files are accepted too: their
/// nested `config` object is descended into until `key` is present.
fn read_config<T: DeserializeOwned>(path: &Path, key: &str) -> Result<T> {
    let mut v = read_json(path)?;
    while v.get(key).is_none() {
        match v.get_mut("config").map(serde_json::Value::take) {
            Some(inner) => v = inner,
            None => break,
        }
    }
    serde_json::from_value(v).map_err(|e| Error::Parse {
        path: path.into(),
        message: e.to_string(),
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ThetaFile {
    Fit {
        #[serde(with = "theta_by_name")]
        theta_hat: EstimatedVector,
    },
    Plain(#[serde(with = "theta_by_name")] EstimatedVector),
}

/// `posterior-mode`, `sw-mode`, `prior-mean`, or a JSON file holding either
/// a fit (`theta_hat`) or a name-to-value object.
pub fn load_theta(spec: &str) -> Result<EstimatedVector> {
    match spec {
        "posterior-mode" => return Ok(EstimatedVector::posterior_mode()),
        "sw-mode" => return Ok(EstimatedVector::sw_posterior_mode()),
        "prior-mean" => return Ok(EstimatedVector::prior_means()),
        _ => {}
    }
    let path = Path::new(spec);
    let v = read_json(path)?;
    Ok(match serde_json::from_value::<ThetaFile>(v).map_err(|e| Error::Parse {
        path: path.into(),
        message: e.to_string(),
    })? {
        ThetaFile::Fit { theta_hat } => theta_hat,
        ThetaFile::Plain(t) => t,
    })
}

fn mkdir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_panel(panel: &TimeSeriesPanel, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => panel.write_csv(p),
        None => panel.to_writer(std::io::stdout().lock()),
    }
}

fn estimate_config(common: &Common) -> Result<EstimateConfig> {
    let mut cfg = match &common.config {
        Some(p) => read_config(p, "optimizer")?,
        None => match common.profile {
            Profile::Desk => EstimateConfig::desk(),
            Profile::Paper => EstimateConfig::paper(),
        },
    };
    if let Some(s) = common.seed {
        cfg.optimizer.seed = s;
    }
    if let Some(b) = common.budget {
        cfg.optimizer.budget = b;
    }
    if let Some(s) = common.starts {
        cfg.optimizer.n_starts = s;
    }
    Ok(cfg)
}

fn parse_ranks(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Invalid(format!("bad rank specification {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|r| r.trim().parse().map_err(|_| bad())).collect()
}

fn run(cli: Cli, argv: &[OsString]) -> Result<()> {
    let args: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match cli.command {
        Command::Ingest {
            fred_dir,
            start,
            end,
            out,
            fetch,
        } => {
            if fetch {
                fetch_into(&fred_dir)?;
            }
            let raw = load_fred_dir(&fred_dir)?;
            let panel = build_panel(&raw, Window { start, end })?;
            eprintln!("{} rows, {}..{}", panel.len(), panel.dates[0], panel.dates[panel.len() - 1]);
            write_panel(&panel, out.as_deref())
        }
        Command::Estimate {
            panel,
            out,
            train_len,
            full,
            start_theta,
            common,
        } => {
            set_jobs(common.jobs)?;
            let data = TimeSeriesPanel::read_csv(&panel)?;
            let mut cfg = estimate_config(&common)?;
            if full {
                cfg.train_len = None;
            } else if train_len.is_some() {
                cfg.train_len = train_len;
            }
            let start = start_theta.as_deref().map(load_theta).transpose()?;
            let fit = estimate(&data, &cfg, start.as_ref())?;
            eprintln!(
                "penalized NLL {:.6} (NLL {:.6}) after {} evaluations",
                fit.penalized_nll, fit.unpenalized_nll, fit.n_evals
            );
            fit.write(&out)
        }
        Command::Simulate {
            theta,
            n,
            burn_in,
            seed,
            out,
        } => {
            let theta = load_theta(&theta)?;
            let ss = sw_model::state_space(&theta, &SolverConfig::default())?;
            write_panel(&simulate(&ss, n, burn_in, seed)?, out.as_deref())
        }
        Command::SimEstimate {
            theta,
            out_dir,
            reps,
            sizes,
            test_len,
            common,
        } => {
            set_jobs(common.jobs)?;
            let mut run = match &common.config {
                Some(p) => read_config::<SimEstimateRun>(p, "truth")?,
                None => SimEstimateRun {
                    truth: EstimatedVector::posterior_mode(),
                    config: match common.profile {
                        Profile::Desk => SimEstimateConfig::desk(),
                        Profile::Paper => SimEstimateConfig::paper(),
                    },
                },
            };
            if let Some(t) = theta {
                run.truth = load_theta(&t)?;
            }
            let cfg = &mut run.config;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            if let Some(r) = reps {
                cfg.n_reps = r;
            }
            if let Some(s) = sizes {
                cfg.train_sizes = s;
            }
            if let Some(t) = test_len {
                cfg.test_len = t;
            }
            if let Some(b) = common.budget {
                cfg.estimate.optimizer.budget = b;
            }
            if let Some(s) = common.starts {
                cfg.estimate.optimizer.n_starts = s;
            }
            mkdir(&out_dir)?;
            let records = run_sim_estimate(&run.truth, &run.config)?;
            write_sim_estimate_csv(&out_dir.join(SIM_ESTIMATE_CSV), &records)?;
            let mut outputs = vec![SIM_ESTIMATE_CSV.to_string()];
            let largest = run.config.train_sizes.iter().copied().max().unwrap_or(0);
            let at_largest: Vec<_> = records.iter().filter(|r| r.train_size == largest).cloned().collect();
            match taylor_correlations(&at_largest) {
                Ok(c) => {
                    write_taylor_csv(&out_dir.join(TAYLOR_CSV), &c)?;
                    outputs.push(TAYLOR_CSV.into());
                }
                Err(e) => eprintln!("skipping {TAYLOR_CSV}: {e}"),
            }
            let failed = records.iter().filter(|r| !r.error.is_empty()).count();
            eprintln!("{} cells, {failed} failed", records.len());
            let mut m = Manifest::new("sim-estimate", common.profile.name(), run.config.seed, &run)?;
            m.args = args;
            m.outputs = outputs;
            m.write(&out_dir)
        }
        Command::Permute {
            panel,
            out_dir,
            ranks,
            sample,
            baseline,
            common,
        } => {
            set_jobs(common.jobs)?;
            let data = TimeSeriesPanel::read_csv(&panel)?;
            let mut run = match &common.config {
                Some(p) => read_config::<PermuteRun>(p, "ranks")?,
                None => PermuteRun {
                    ranks: vec![0],
                    config: estimate_config(&common)?,
                },
            };
            if common.config.is_some() {
                let c = &mut run.config.optimizer;
                if let Some(s) = common.seed {
                    c.seed = s;
                }
                if let Some(b) = common.budget {
                    c.budget = b;
                }
                if let Some(s) = common.starts {
                    c.n_starts = s;
                }
            }
            match (ranks, sample) {
                (Some(r), _) => run.ranks = parse_ranks(&r)?,
                (None, Some(n)) => run.ranks = sample_ranks(n, run.config.optimizer.seed),
                (None, None) => {}
            }
            let base = baseline.as_deref().map(FitResult::read).transpose()?;
            mkdir(&out_dir)?;
            let records = run_permutation(&data, &run.ranks, &run.config, base.as_ref())?;
            write_permutation_csv(&out_dir.join(PERMUTATION_CSV), &records)?;
            let failed = records.iter().filter(|r| !r.error.is_empty()).count();
            eprintln!("{} ranks, {failed} failed", records.len());
            let mut m = Manifest::new("permute", common.profile.name(), run.config.optimizer.seed, &run)?;
            m.args = args;
            m.inputs = std::iter::once(panel).chain(baseline).collect();
            m.outputs = vec![PERMUTATION_CSV.into()];
            m.write(&out_dir)
        }
        Command::Entropy { theta } => {
            let theta = load_theta(&theta)?;
            let ss = sw_model::state_space(&theta, &SolverConfig::default())?;
            println!("{}", entropy_rate(&ss)?);
            Ok(())
        }
        Command::Report { in_dir, out_dir } => {
            mkdir(&out_dir)?;
            let mut written = Vec::new();
            let sim = in_dir.join(SIM_ESTIMATE_CSV);
            if sim.exists() {
                written.extend(report_sim_estimate(&read_sim_estimate_csv(&sim)?, &out_dir)?);
            }
            let perm = in_dir.join(PERMUTATION_CSV);
            if perm.exists() {
                written.extend(report_permutation(&read_permutation_csv(&perm)?, &out_dir)?);
            }
            if written.is_empty() {
                return Err(Error::Invalid(format!(
                    "{} holds neither {SIM_ESTIMATE_CSV} nor {PERMUTATION_CSV}",
                    in_dir.display()
                )));
            }
            for f in written {
                eprintln!("wrote {}", out_dir.join(f).display());
            }
            Ok(())
        }
    }
}

/// Effective settings of a `sim-estimate` run, as stored in its manifest.
#[derive(Serialize, Deserialize)]
struct SimEstimateRun {
    #[serde(with = "theta_by_name")]
    truth: EstimatedVector,
    config: SimEstimateConfig,
}

/// Effective settings of a `permute` run, as stored in its manifest.
#[derive(Serialize, Deserialize)]
struct PermuteRun {
    ranks: Vec<usize>,
    config: EstimateConfig,
}

#[cfg(feature = "fetch")]
fn fetch_into(dir: &Path) -> Result<()> {
    crate::data_ingest::fetch_all(dir).map(|_| ())
}

#[cfg(not(feature = "fetch"))]
fn fetch_into(_dir: &Path) -> Result<()> {
    Err(Error::Invalid("this build has no download support; rebuild with --features fetch".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_specifications() {
        assert_eq!(parse_ranks("0..0").unwrap(), vec![0]);
        assert_eq!(parse_ranks("3..5").unwrap(), vec![3, 4, 5]);
        assert_eq!(parse_ranks("7, 1,9").unwrap(), vec![7, 1, 9]);
        assert!(parse_ranks("5..3").is_err());
        assert!(parse_ranks("x").is_err());
    }

    #[test]
    fn named_thetas() {
        assert_eq!(load_theta("posterior-mode").unwrap(), EstimatedVector::posterior_mode());
        assert_eq!(load_theta("sw-mode").unwrap(), EstimatedVector::sw_posterior_mode());
        assert!(load_theta("/no/such/file.json").is_err());
    }
}
