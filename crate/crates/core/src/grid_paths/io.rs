//! CSV and JSON serialization of sampled paths.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{SampledPath, TimeGrid};
use crate::error::{invalid, Result};

/// JSON sidecar written next to every path CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDescriptor {
    pub t0: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub n: usize,
    pub d: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub kind: String,
}

impl PathDescriptor {
    pub fn of(path: &SampledPath, seed: Option<u64>, kind: &str) -> Self {
        let g = path.grid();
        Self {
            t0: g.t0(),
            t_end: g.t_end(),
            n: g.n(),
            d: path.dim(),
            seed,
            kind: kind.to_string(),
        }
    }
}

/// Header `t,v0,...` and one row per node in `{:.16e}` format.
pub fn write_path_csv<W: Write>(path: &SampledPath, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["t".to_string()];
    header.extend((0..path.dim()).map(|c| format!("v{c}")));
    w.write_record(&header)?;
    for (k, row) in path.rows().enumerate() {
        let mut rec = Vec::with_capacity(row.len() + 1);
        rec.push(format!("{:.16e}", path.grid().node(k)));
        rec.extend(row.iter().map(|v| format!("{v:.16e}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_path_csv`]; the grid is reconstructed from the first
/// and last time stamps.
pub fn read_path_csv<R: Read>(reader: R) -> Result<SampledPath> {
    let mut r = csv::Reader::from_reader(reader);
    let dim = r.headers()?.len().saturating_sub(1);
    if dim == 0 {
        return Err(invalid("path CSV needs a time column and at least one value column"));
    }
    let mut times = Vec::new();
    let mut data = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let mut fields = rec.iter().map(|f| f.trim().parse::<f64>());
        let t = fields
            .next()
            .ok_or_else(|| invalid("empty CSV row"))?
            .map_err(|e| invalid(format!("bad time stamp: {e}")))?;
        times.push(t);
        for f in fields {
            data.push(f.map_err(|e| invalid(format!("bad sample: {e}")))?);
        }
    }
    if times.len() < 2 {
        return Err(invalid("path CSV needs at least two rows"));
    }
    let grid = TimeGrid::new(times[0], times[times.len() - 1], times.len() - 1)?;
    SampledPath::new(grid, dim, data)
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`; returns the CSV path.
pub fn save_path(dir: &Path, stem: &str, path: &SampledPath, seed: Option<u64>, kind: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    write_path_csv(path, File::create(&csv_path)?)?;
    let desc = PathDescriptor::of(path, seed, kind);
    let json = serde_json::to_string_pretty(&desc)?;
    std::fs::write(dir.join(format!("{stem}.json")), json)?;
    Ok(csv_path)
}
