//! Flat `key = value` configs, CSV output with round-trip precision, atomic
//! writes and config digests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::pde_sim::{FrontTrace, SimConfig};
use crate::report::VerificationReport;
use crate::wave_ode::WaveProfile;

/// Doubles are written with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses UTF-8 `key = value` lines. `#` starts a comment; blank lines are
/// skipped. Duplicate keys are an error.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got {raw:?}", n + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", n + 1)));
        }
        if map.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {key}", n + 1)));
        }
    }
    Ok(map)
}

fn parse_num(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: not a number: {v:?}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

const SIM_KEYS: [&str; 9] = ["k", "amplitude", "xi_min", "xi_max", "dxi", "dt", "t_end", "snapshot_times", "levels"];

/// Builds a validated [`SimConfig`]. `k` and `t_end` are required; the rest
/// default as in [`SimConfig::new`]. `snapshot_times` and `levels` are comma
/// lists.
pub fn sim_config_from_text(text: &str) -> Result<SimConfig> {
    let map = parse_config(text)?;
    if let Some(k) = map.keys().find(|k| !SIM_KEYS.contains(&k.as_str())) {
        return Err(Error::Config(format!("unknown key {k}")));
    }
    let need = |key: &str| {
        map.get(key)
            .ok_or_else(|| Error::Config(format!("missing required key {key}")))
            .and_then(|v| parse_num(key, v))
    };
    let mut cfg = SimConfig::new(need("k")?, need("t_end")?);
    for (key, v) in &map {
        match key.as_str() {
            "amplitude" => cfg.amplitude = parse_num(key, v)?,
            "xi_min" => cfg.xi_min = parse_num(key, v)?,
            "xi_max" => cfg.xi_max = parse_num(key, v)?,
            "dxi" => cfg.dxi = parse_num(key, v)?,
            "dt" => cfg.dt = parse_num(key, v)?,
            "snapshot_times" => cfg.snapshot_times = parse_list(key, v)?,
            "levels" => cfg.levels = parse_list(key, v)?,
            _ => {}
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Lower-case hex SHA-256 of the raw config bytes.
pub fn config_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes to a sibling temp file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("not a file path: {}", path.display())))?;
    let mut tmp = PathBuf::from(path);
    tmp.set_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn to_csv<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Columns `t, x, delay` with `delay = 2t - x`.
pub fn trace_csv(trace: &FrontTrace) -> Result<Vec<u8>> {
    to_csv(
        &["t", "x", "delay"],
        trace.samples.iter().map(|&(t, x)| [fmt_f64(t), fmt_f64(x), fmt_f64(2.0 * t - x)]),
    )
}

/// File name used for a level's trace, e.g. `level_0.5.csv`.
pub fn trace_file_name(level: f64) -> String {
    format!("level_{level}.csv")
}

/// Reads a trace written by [`trace_csv`]; only the `t` and `x` columns are
/// needed.
pub fn read_trace_csv(path: &Path, level: f64) -> Result<FrontTrace> {
    let mut rd = csv::Reader::from_path(path)?;
    let headers = rd.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("{}: missing column {name}", path.display())))
    };
    let (it, ix) = (col("t")?, col("x")?);
    let mut trace = FrontTrace::new(level);
    for (n, rec) in rd.records().enumerate() {
        let rec = rec?;
        let get = |i: usize| {
            let v = rec.get(i).unwrap_or("");
            v.trim().parse::<f64>().map_err(|_| {
                Error::Config(format!("{}: row {}: not a number: {v:?}", path.display(), n + 1))
            })
        };
        trace.samples.push((get(it)?, get(ix)?));
    }
    Ok(trace)
}

/// Columns `xi, u` over the co-moving grid.
pub fn grid_csv(g: &GridFunction, names: [&str; 2]) -> Result<Vec<u8>> {
    to_csv(&names, g.nodes().zip(&g.values).map(|(x, &u)| [fmt_f64(x), fmt_f64(u)]))
}

/// Columns `z, value, slope`.
pub fn profile_csv(p: &WaveProfile) -> Result<Vec<u8>> {
    to_csv(
        &["z", "value", "slope"],
        (0..p.len()).map(|i| [fmt_f64(p.z(i)), fmt_f64(p.values[i]), fmt_f64(p.slopes[i])]),
    )
}

pub fn reports_csv(reports: &[VerificationReport]) -> Result<Vec<u8>> {
    to_csv(&VerificationReport::CSV_HEADER, reports.iter().map(|r| r.csv_record()))
}
