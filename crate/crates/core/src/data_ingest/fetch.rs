//! Download of the nine series from the FRED web API.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::FredId;
use crate::error::{Error, Result};

/// Environment variable holding the FRED API key.
pub const API_KEY_VAR: &str = "FRED_API_KEY";

const ENDPOINT: &str = "https://api.stlouisfed.org/fred/series/observations";

#[derive(Deserialize)]
struct Response {
    observations: Vec<Observation>,
}

#[derive(Deserialize)]
struct Observation {
    date: String,
    value: String,
}

/// Download one series and write it as `DATE,<ID>` CSV into `dir`.
pub fn fetch_series(id: FredId, api_key: &str, dir: &Path) -> Result<PathBuf> {
    let fail = |e: String| Error::Invalid(format!("fetching {id}: {e}"));
    let body = ureq::get(ENDPOINT)
        .query("series_id", id.as_str())
        .query("api_key", api_key)
        .query("file_type", "json")
        .call()
        .map_err(|e| fail(e.to_string()))?
        .body_mut()
        .read_to_string()
        .map_err(|e| fail(e.to_string()))?;
    let parsed: Response = serde_json::from_str(&body)?;
    let path = dir.join(format!("{id}.csv"));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["DATE", id.as_str()])?;
    for o in parsed.observations {
        w.write_record([o.date, o.value])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Download all nine series using the key in `FRED_API_KEY`.
pub fn fetch_all(dir: &Path) -> Result<Vec<PathBuf>> {
    let key = std::env::var(API_KEY_VAR)
        .map_err(|_| Error::Invalid(format!("{API_KEY_VAR} is not set")))?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    FredId::ALL.iter().map(|&id| fetch_series(id, &key, dir)).collect()
}
