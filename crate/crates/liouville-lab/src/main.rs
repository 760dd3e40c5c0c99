//! Command-line driver for the experiment suite.
//!
//! Exit status: 0 when every declared tolerance passes, 1 on a tolerance
//! failure, 2 on a configuration error, 3 when a NaN shows up.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use liouville_lab::cli::{apply_key_value, execute, ExperimentId, RunConfig};
use liouville_lab::error::Error;
use liouville_lab::report::{emit_report, write_report};

#[derive(Parser, Debug)]
#[command(
    name = "liouville-lab",
    about = "Desk-scale experiments for the planar Liouville equation with a Riesz potential nonlinearity",
    after_help = "Experiments: quantization, multibubble, rigged, verify-core.\n\
                  A config file holds the same keys as the long flags, one key=value per line."
)]
struct Args {
    /// Experiment to run: quantization | multibubble | rigged | verify-core
    #[arg(long)]
    experiment: Option<String>,

    /// Kernel order of the Riesz potential, in (0, 2)
    #[arg(long)]
    mu: Option<f64>,

    /// Cells per axis (power of two between 64 and 2048)
    #[arg(long)]
    n: Option<usize>,

    /// Grid half-width
    #[arg(long, value_name = "L")]
    half_width: Option<f64>,

    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Report format: csv | json
    #[arg(long)]
    format: Option<String>,

    /// Seed for the randomized property checks
    #[arg(long)]
    seed: Option<u64>,

    /// Concentration sweep, e.g. 4,8,16,32
    #[arg(long)]
    deltas: Option<String>,

    /// Rigged-family sweep, e.g. 4,8,16,32
    #[arg(long)]
    ks: Option<String>,

    /// Bubble centers, e.g. "-0.45,0;0.45,0"
    #[arg(long)]
    centers: Option<String>,

    /// Interaction-decay separations, e.g. 1,2,4,8
    #[arg(long)]
    separations: Option<String>,

    /// Radius of the measuring ball B_R
    #[arg(long)]
    r_ball: Option<f64>,

    /// Optional config file with flat key=value lines (flags take precedence)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Self-test hook: perturb the FFT kernel's singular weight
    #[arg(long, hide = true)]
    inject_kernel_fault: bool,

    /// Self-test hook: inject a NaN row into the report
    #[arg(long, hide = true)]
    inject_nan: bool,
}

fn file_entries(path: &PathBuf) -> Result<Vec<(String, String)>, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "config line {} is not key=value: '{line}'",
                lineno + 1
            ))
        })?;
        entries.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(entries)
}

fn build_config(args: &Args) -> Result<RunConfig, Error> {
    let entries = match &args.config {
        Some(path) => file_entries(path)?,
        None => Vec::new(),
    };
    let experiment_str = args
        .experiment
        .clone()
        .or_else(|| {
            entries
                .iter()
                .find(|(k, _)| k == "experiment")
                .map(|(_, v)| v.clone())
        })
        .ok_or_else(|| Error::Config("missing --experiment".into()))?;
    let experiment: ExperimentId = experiment_str.parse()?;
    let mut config = RunConfig::defaults(experiment);

    // config file first, then flags on top
    for (key, value) in &entries {
        apply_key_value(&mut config, key, value)?;
    }
    let mut flag = |key: &str, value: Option<String>| -> Result<(), Error> {
        if let Some(v) = value {
            apply_key_value(&mut config, key, &v)?;
        }
        Ok(())
    };
    flag("experiment", args.experiment.clone())?;
    flag("mu", args.mu.map(|v| v.to_string()))?;
    flag("n", args.n.map(|v| v.to_string()))?;
    flag("half-width", args.half_width.map(|v| v.to_string()))?;
    flag("seed", args.seed.map(|v| v.to_string()))?;
    flag("format", args.format.clone())?;
    flag("deltas", args.deltas.clone())?;
    flag("ks", args.ks.clone())?;
    flag("centers", args.centers.clone())?;
    flag("separations", args.separations.clone())?;
    flag("r-ball", args.r_ball.map(|v| v.to_string()))?;
    flag("out", args.out.as_ref().map(|p| p.display().to_string()))?;
    if args.inject_kernel_fault {
        config.inject_kernel_fault = true;
    }
    if args.inject_nan {
        config.inject_nan = true;
    }
    Ok(config)
}

fn run() -> Result<u8, Error> {
    let args = Args::parse();
    let config = build_config(&args)?;
    let report = execute(&config)?;

    match &config.out {
        Some(path) => write_report(&report, config.format, path)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            emit_report(&report, config.format, &mut stdout)?;
        }
    }
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    let failed: Vec<_> = report.rows.iter().filter(|r| !r.pass).collect();
    for row in &failed {
        eprintln!(
            "FAIL {} {}={} {}: value {} vs target {} (tol {})",
            row.experiment,
            row.param_name,
            row.param_value,
            row.quantity,
            row.value,
            row.target,
            row.tolerance
        );
    }

    if report.has_nan() {
        eprintln!("numeric failure: NaN detected in the report");
        return Ok(3);
    }
    if !failed.is_empty() {
        return Ok(1);
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::NonFinite(_) => 3,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}
