//! `kpp-lab report`: one text and one CSV summary over all manifests in a
//! run directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use kpp_core::front_fit;
use kpp_core::grid::GridFunction;
use kpp_core::io;
use kpp_core::pde_sim;
use kpp_core::wave_ode::{self, WaveProfile};

use crate::{CmdResult, Failure, RunManifest};

pub fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> kpp_core::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| kpp_core::Error::Io(e.into_error()))
}

/// `manifest.*.json` files in `dir` and its immediate subdirectories,
/// sorted by path.
fn find_manifests(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let is_manifest = |p: &Path| {
        p.file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with("manifest.") && n.ends_with(".json"))
    };
    let mut found = Vec::new();
    let mut dirs = vec![dir.to_path_buf()];
    for entry in fs::read_dir(dir)? {
        let p = entry?.path();
        if p.is_dir() {
            dirs.push(p);
        }
    }
    for d in dirs {
        for entry in fs::read_dir(&d)? {
            let p = entry?.path();
            if p.is_file() && is_manifest(&p) {
                found.push(p);
            }
        }
    }
    found.sort();
    Ok(found)
}

const SUMMARY_HEADER: [&str; 7] = ["section", "name", "k", "target", "value", "delta", "verdict"];

struct Row {
    section: &'static str,
    name: String,
    k: Option<f64>,
    target: Option<f64>,
    value: Option<f64>,
    delta: Option<f64>,
    verdict: String,
}

impl Row {
    fn record(&self) -> Vec<String> {
        let o = |x: Option<f64>| x.map(io::fmt_f64).unwrap_or_default();
        vec![
            self.section.to_string(),
            self.name.clone(),
            o(self.k),
            o(self.target),
            o(self.value),
            o(self.delta),
            self.verdict.clone(),
        ]
    }
}

struct Collected {
    rows: Vec<Row>,
    text: String,
    profile: Option<WaveProfile>,
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn wave(c: &mut Collected) -> Result<&WaveProfile, Failure> {
    if c.profile.is_none() {
        c.profile = Some(wave_ode::minimal_wave(-30.0, 60.0, 1e-3)?);
    }
    Ok(c.profile.as_ref().expect("set above"))
}

fn read_snapshot(path: &Path) -> Result<GridFunction, Failure> {
    let mut rd = csv::Reader::from_path(path).map_err(usage)?;
    let mut xs = Vec::new();
    let mut us = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(usage)?;
        let num = |i: usize| {
            rec.get(i)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| Failure::Usage(format!("{}: malformed row", path.display())))
        };
        xs.push(num(0)?);
        us.push(num(1)?);
    }
    if xs.len() < 2 {
        return Err(Failure::Usage(format!("{}: fewer than 2 rows", path.display())));
    }
    let spacing = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    Ok(GridFunction::new(xs[0], spacing, us))
}

fn simulate_rows(c: &mut Collected, dir: &Path, m: &RunManifest) -> CmdResult {
    let text = fs::read_to_string(dir.join("config.txt")).map_err(usage)?;
    let cfg = io::sim_config_from_text(&text)?;
    let k = cfg.k;
    let half = format!("traces/{}", io::trace_file_name(0.5));
    if !m.outputs.contains(&half) {
        return Err(Failure::Usage(format!("missing artifact {}", dir.join(&half).display())));
    }
    let trace = io::read_trace_csv(&dir.join(&half), 0.5)?;
    let t_last = trace.samples.last().map(|s| s.0).unwrap_or(0.0);
    let _ = writeln!(c.text, "run {} (k = {k}, t_end = {})", dir.display(), cfg.t_end);
    if k == -2.0 {
        let t_min = if t_last >= 1e4 { 1e3 } else { (t_last / 10.0).max(100.0) };
        match front_fit::fit_critical(&trace, t_min) {
            Ok(f) => {
                let ratio = f.fit.residual_max / f.pure_log_residual;
                let _ = writeln!(
                    c.text,
                    "  critical: ln ln t coefficient {:.4} over [{:.0}, {:.0}], residual {:.3e} vs pure log {:.3e} (ratio {ratio:.3})",
                    f.fit.r_hat, f.fit.window.0, f.fit.window.1, f.fit.residual_max, f.pure_log_residual
                );
                c.rows.push(Row { section: "critical", name: "lnln_coefficient".into(), k: Some(k), target: Some(1.0), value: Some(f.fit.r_hat), delta: Some((f.fit.r_hat - 1.0).abs()), verdict: String::new() });
                c.rows.push(Row { section: "critical", name: "residual_ratio".into(), k: Some(k), target: Some(0.5), value: Some(ratio), delta: None, verdict: String::new() });
            }
            Err(e) => {
                let _ = writeln!(c.text, "  critical fit unavailable: {e}");
            }
        }
    } else {
        let t_min = if t_last >= 2000.0 { 200.0 } else { t_last / 10.0 };
        let target = 0.5 * (1.0 - k);
        match front_fit::fit_log_correction(&trace, t_min) {
            Ok(f) => {
                let r = f.least_squares.r_hat;
                let _ = writeln!(c.text, "  log fit over [{:.0}, {:.0}]: r_hat {r:.4}, target {target}", f.least_squares.window.0, f.least_squares.window.1);
                c.rows.push(Row { section: "drift", name: "r_hat".into(), k: Some(k), target: Some(target), value: Some(r), delta: Some((r - target).abs()), verdict: String::new() });
            }
            Err(e) => {
                let _ = writeln!(c.text, "  log fit unavailable: {e}");
            }
        }
    }
    let snaps: Vec<&String> = m.outputs.iter().filter(|o| o.starts_with("snapshots/")).collect();
    for rel in snaps {
        let t: f64 = rel
            .trim_start_matches("snapshots/t_")
            .trim_end_matches(".csv")
            .parse()
            .map_err(|_| Failure::Usage(format!("cannot read time from {rel}")))?;
        let state = read_snapshot(&dir.join(rel))?;
        let center = pde_sim::extract_level(&state, t, 0.5)?;
        let fit = front_fit::wave_distance(&state, t, wave(c)?, center)?;
        let _ = writeln!(c.text, "  t = {t}: distance to U {:.4e} at shift {:.4}", fit.dist, fit.h_star);
        c.rows.push(Row { section: "profile", name: format!("t={t}"), k: Some(k), target: None, value: Some(fit.dist), delta: Some(fit.h_star), verdict: String::new() });
    }
    Ok(())
}

fn verify_rows(c: &mut Collected, dir: &Path, m: &RunManifest) -> CmdResult {
    for rel in &m.outputs {
        let path = dir.join(rel);
        let mut rd = csv::Reader::from_path(&path).map_err(usage)?;
        for rec in rd.records() {
            let rec = rec.map_err(usage)?;
            let check = match rec.get(15).filter(|p| !p.is_empty()) {
                Some(p) => format!("{} [{p}]", rec.get(0).unwrap_or("")),
                None => rec.get(0).unwrap_or("").to_string(),
            };
            let verdict = rec.get(1).unwrap_or("").to_string();
            let worst = rec.get(3).and_then(|v| v.parse::<f64>().ok());
            let _ = writeln!(c.text, "  [{}] {check}", verdict.to_uppercase());
            c.rows.push(Row { section: "verify", name: check, k: None, target: None, value: worst, delta: None, verdict });
        }
    }
    Ok(())
}

pub fn cmd_report(run_dir: &Path) -> CmdResult {
    if !run_dir.is_dir() {
        return Err(Failure::Usage(format!("not a directory: {}", run_dir.display())));
    }
    let manifests = find_manifests(run_dir).map_err(usage)?;
    if manifests.is_empty() {
        return Err(Failure::Usage(format!("no manifests under {}", run_dir.display())));
    }
    let mut c = Collected { rows: Vec::new(), text: String::new(), profile: None };
    for path in &manifests {
        let dir = path.parent().unwrap_or(run_dir);
        let text = fs::read_to_string(path).map_err(usage)?;
        let m: RunManifest = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        if let Some(missing) = m.outputs.iter().map(|o| dir.join(o)).find(|p| !p.exists()) {
            return Err(Failure::Usage(format!("missing artifact {}", missing.display())));
        }
        match m.command.as_str() {
            "simulate" => simulate_rows(&mut c, dir, &m)?,
            "verify" => {
                let _ = writeln!(c.text, "verification {}", path.display());
                verify_rows(&mut c, dir, &m)?;
            }
            _ => {}
        }
    }
    let mut table = String::from("\n     k   r_target      r_hat    |delta|\n");
    for r in c.rows.iter().filter(|r| r.section == "drift") {
        let _ = writeln!(
            table,
            "{:>6} {:>10} {:>10.4} {:>10.4}",
            r.k.unwrap_or(f64::NAN),
            r.target.unwrap_or(f64::NAN),
            r.value.unwrap_or(f64::NAN),
            r.delta.unwrap_or(f64::NAN)
        );
    }
    let (pass, total) = c.rows.iter().filter(|r| r.section == "verify").fold((0, 0), |(p, n), r| (p + (r.verdict == "pass") as usize, n + 1));
    let _ = writeln!(table, "\nverification: {pass} of {total} checks pass");
    c.text.push_str(&table);
    io::write_atomic(&run_dir.join("summary.txt"), c.text.as_bytes())?;
    io::write_atomic(&run_dir.join("summary.csv"), &csv_bytes(&SUMMARY_HEADER, c.rows.iter().map(Row::record).collect())?)?;
    print!("{}", c.text);
    Ok(())
}
