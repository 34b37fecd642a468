//! `kpp-lab`: drives simulations, verification suites and drift fits, and
//! writes CSV data plus a manifest per command.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 numerical failure,
//! 3 verification failure.

mod summary;
mod suites;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kpp_core::front_fit::{self, FitResult};
use kpp_core::io;
use kpp_core::pde_sim;
use serde::{Deserialize, Serialize};

use suites::{Options, Suite};

#[derive(Parser)]
#[command(name = "kpp-lab", version, about = "Fisher-KPP front simulations and sub/super-solution checks")]
struct Cli {
    /// Worker threads for independent sub-runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the PDE from a key = value config; writes traces/, snapshots/ and a manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a verification suite and write its reports as CSV.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Multiplies the automatically chosen ε of the ψ sub-solutions.
        #[arg(long, default_value_t = 1.0)]
        epsilon_scale: f64,
        /// Tail exponents for the ψ and wave checks, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        k: Vec<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Fit the drift law to a trace CSV.
    Fit {
        trace: PathBuf,
        /// Fix the 3/2 ln t term and fit the ln ln t coefficient.
        #[arg(long)]
        critical: bool,
        #[arg(long)]
        t_min: Option<f64>,
        /// Output directory (default: the trace's directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize every run found in a directory and its subdirectories.
    Report { run_dir: PathBuf },
}

/// Failure classes, each with its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Verification(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<kpp_core::Error> for Failure {
    fn from(e: kpp_core::Error) -> Self {
        use kpp_core::Error as E;
        match e {
            E::Config(_) | E::Io(_) | E::Csv(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

pub type CmdResult = Result<(), Failure>;

/// Written next to a command's outputs as `manifest.<command>.json`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub tool_version: String,
    /// Paths relative to the manifest's directory.
    pub outputs: Vec<String>,
}

pub const TOOL_VERSION: &str = concat!("kpp-lab ", env!("CARGO_PKG_VERSION"));

fn write_manifest(dir: &Path, tag: &str, digest: String, outputs: Vec<String>) -> CmdResult {
    let command = tag.split('-').next().unwrap_or(tag).to_string();
    let m = RunManifest { command, config_digest: digest, tool_version: TOOL_VERSION.into(), outputs };
    let mut text = serde_json::to_string_pretty(&m).map_err(|e| Failure::Numerical(e.to_string()))?;
    text.push('\n');
    io::write_atomic(&dir.join(format!("manifest.{tag}.json")), text.as_bytes())?;
    Ok(())
}

fn cmd_simulate(config: &Path, out: &Path) -> CmdResult {
    let bytes = fs::read(config).map_err(|e| Failure::Usage(format!("{}: {e}", config.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Failure::Usage(format!("{}: not UTF-8", config.display())))?;
    let cfg = io::sim_config_from_text(&text)?;
    log::info!("simulating k = {} to t = {} on {} nodes", cfg.k, cfg.t_end, cfg.n_nodes());
    let run = pde_sim::simulate(&cfg)?;
    let mut outputs = vec!["config.txt".to_string()];
    io::write_atomic(&out.join("config.txt"), &bytes)?;
    for trace in &run.traces {
        let rel = format!("traces/{}", io::trace_file_name(trace.level));
        io::write_atomic(&out.join(&rel), &io::trace_csv(trace)?)?;
        outputs.push(rel);
    }
    for snap in &run.snapshots {
        let rel = format!("snapshots/t_{}.csv", snap.t);
        io::write_atomic(&out.join(&rel), &io::grid_csv(&snap.state, ["xi", "u"])?)?;
        outputs.push(rel);
    }
    if run.diagnostics.max_clamp > 0.0 {
        log::info!("largest clamp correction {:e}", run.diagnostics.max_clamp);
    }
    write_manifest(out, "simulate", io::config_digest(&bytes), outputs)?;
    println!("wrote {} traces and {} snapshots to {}", run.traces.len(), run.snapshots.len(), out.display());
    Ok(())
}

fn cmd_verify(suite: Suite, opts: Options, out: &Path) -> CmdResult {
    let reports = suites::run(suite, &opts)?;
    let rel = format!("verify_{}.csv", suite.name());
    io::write_atomic(&out.join(&rel), &io::reports_csv(&reports)?)?;
    write_manifest(out, &format!("verify-{}", suite.name()), io::config_digest(opts.canonical(suite).as_bytes()), vec![rel])?;
    for r in &reports {
        print!("{}", r.text_block());
    }
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed()).collect();
    if failed.is_empty() {
        println!("{}: {} checks passed", suite.name(), reports.len());
        return Ok(());
    }
    let worst = failed
        .iter()
        .map(|r| format!("{} worst {:.6e} at (t, z) = ({:.4e}, {:.4e})", r.check, r.worst_signed_residual, r.worst_at.0, r.worst_at.1))
        .collect::<Vec<_>>()
        .join("; ");
    Err(Failure::Verification(format!("{} of {} checks failed: {worst}", failed.len(), reports.len())))
}

const FIT_HEADER: [&str; 9] = [
    "model",
    "estimator",
    "coefficient",
    "half_width",
    "intercept",
    "residual_max",
    "t_min",
    "t_max",
    "n_samples",
];

fn fit_row(model: &str, f: &FitResult) -> Vec<String> {
    vec![
        model.to_string(),
        f.estimator.name().to_string(),
        io::fmt_f64(f.r_hat),
        io::fmt_f64(f.residual_ci),
        io::fmt_f64(f.intercept),
        io::fmt_f64(f.residual_max),
        io::fmt_f64(f.window.0),
        io::fmt_f64(f.window.1),
        f.n_samples.to_string(),
    ]
}

/// Level encoded in a trace file name, 1/2 otherwise.
fn level_of(path: &Path) -> f64 {
    path.file_stem()
        .and_then(|s| s.to_str())
        .and_then(|s| s.strip_prefix("level_"))
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.5)
}

fn cmd_fit(trace_path: &Path, critical: bool, t_min: Option<f64>, out: Option<&Path>) -> CmdResult {
    if !trace_path.is_file() {
        return Err(Failure::Usage(format!("trace file not found: {}", trace_path.display())));
    }
    let trace = io::read_trace_csv(trace_path, level_of(trace_path))?;
    let mut rows = Vec::new();
    if critical {
        let fit = front_fit::fit_critical(&trace, t_min.unwrap_or(1e3))?;
        print!("{}", fit.fit.report_block("ln ln t coefficient (3/2 ln t fixed)"));
        println!("  pure-log residual {:.3e}", fit.pure_log_residual);
        rows.push(fit_row("critical", &fit.fit));
        let mut pure = fit.fit.clone();
        pure.r_hat = 0.0;
        pure.residual_ci = f64::NAN;
        pure.residual_max = fit.pure_log_residual;
        rows.push(fit_row("pure_log", &pure));
    } else {
        let fit = front_fit::fit_log_correction(&trace, t_min.unwrap_or(200.0))?;
        print!("{}", fit.least_squares.report_block("ln t coefficient"));
        print!("{}", fit.pairwise.report_block("ln t coefficient (end points)"));
        rows.push(fit_row("log", &fit.least_squares));
        rows.push(fit_row("log", &fit.pairwise));
    }
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| trace_path.parent().map(Path::to_path_buf).unwrap_or_default());
    let stem = trace_path.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    let rel = format!("fit_{stem}.csv");
    io::write_atomic(&dir.join(&rel), &summary::csv_bytes(&FIT_HEADER, rows)?)?;
    let trace_bytes = fs::read(trace_path).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut digest_input = format!("critical = {critical}\nt_min = {t_min:?}\n").into_bytes();
    digest_input.extend_from_slice(&trace_bytes);
    write_manifest(&dir, &format!("fit-{stem}"), io::config_digest(&digest_input), vec![rel])
}

fn run(cli: Cli) -> CmdResult {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Simulate { config, out } => cmd_simulate(&config, &out),
        Command::Verify { suite, epsilon_scale, k, out } => {
            let k = if k.is_empty() { suites::DEFAULT_K.to_vec() } else { k };
            cmd_verify(suite, Options { epsilon_scale, k }, &out)
        }
        Command::Fit { trace, critical, t_min, out } => cmd_fit(&trace, critical, t_min, out.as_deref()),
        Command::Report { run_dir } => summary::cmd_report(&run_dir),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
