use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qnoise::runner::{
    self, compare_methods, csv, curve_features, emit_csv, render_features, run_scenario, write_with_config,
    MeasureFeatures, Method, NoiseKind, ScenarioConfig,
};
use qnoise::{Error, Topology};

const EXIT_USAGE: u8 = 1;
const EXIT_TOLERANCE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "qnoise", version, about = "Two-qubit entanglement and discord under classical noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute correlation curves and write them as CSV.
    Simulate(RunArgs),
    /// Cross-check two or more methods on the same grid.
    Compare(RunArgs),
    /// Report sudden-death times and revival peaks.
    Features {
        #[command(flatten)]
        run: RunArgs,
        /// Analyse an existing CSV instead of running the scenario.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run a named scenario (fig1-static, fig2-markov, fig2-nonmarkov).
    Preset {
        name: String,
        #[command(flatten)]
        run: RunArgs,
    },
}

/// Overrides applied on top of the preset/defaults and the `--config` file.
#[derive(Args, Debug, Default)]
struct RunArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Gauss-Legendre nodes per disorder dimension.
    #[arg(long)]
    nodes: Option<usize>,
    /// mc, quadrature, closed_form; comma-separated for several.
    #[arg(long)]
    method: Option<String>,
    /// separate, common or both.
    #[arg(long)]
    topology: Option<String>,
    /// static or rtn.
    #[arg(long)]
    noise: Option<String>,
    /// Final time in units of nu*t.
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Death/revival threshold.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long = "nu-over-gamma")]
    nu_over_gamma: Option<f64>,
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long = "delta-c")]
    delta_c: Option<f64>,
    /// Maximum deviation accepted by `compare`.
    #[arg(long)]
    tolerance: Option<f64>,
}

impl RunArgs {
    fn resolve(&self, mut cfg: ScenarioConfig) -> Result<ScenarioConfig, Error> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
            cfg.merge_text(&text)
                .map_err(|e| Error::Usage(format!("{}: {}", path.display(), strip_usage(&e))))?;
        }
        let show = |v: &dyn std::fmt::Display| v.to_string();
        let overrides: [(&str, Option<String>); 17] = [
            ("seed", self.seed.map(|v| show(&v))),
            ("samples", self.samples.map(|v| show(&v))),
            ("nodes", self.nodes.map(|v| show(&v))),
            ("method", self.method.clone()),
            ("topology", self.topology.clone()),
            ("noise", self.noise.clone()),
            ("t_max", self.t_max.map(|v| show(&v))),
            ("points", self.points.map(|v| show(&v))),
            ("threshold", self.threshold.map(|v| show(&v))),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("workers", self.workers.map(|v| show(&v))),
            ("nu", self.nu.map(|v| show(&v))),
            ("gamma", self.gamma.map(|v| show(&v))),
            ("nu_over_gamma", self.nu_over_gamma.map(|v| show(&v))),
            ("c0", self.c0.map(|v| show(&v))),
            ("delta_c", self.delta_c.map(|v| show(&v))),
            ("tolerance", self.tolerance.map(|v| show(&v))),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.apply(key, &v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn strip_usage(e: &Error) -> String {
    match e {
        Error::Usage(msg) => msg.clone(),
        other => other.to_string(),
    }
}

enum Failure {
    Error(Error),
    Tolerance(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

/// Writes to `--out` (plus the resolved config) or to stdout.
fn deliver(cfg: &ScenarioConfig, body: &str) -> Result<(), Error> {
    match &cfg.output_path {
        Some(path) => {
            let cfg_path = write_with_config(path, body, cfg)?;
            eprintln!("wrote {} and {}", path.display(), cfg_path.display());
            Ok(())
        }
        None => io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| Error::Usage(format!("cannot write to stdout: {e}"))),
    }
}

fn simulate(cfg: &ScenarioConfig) -> Result<(), Failure> {
    let curves = run_scenario(cfg)?;
    deliver(cfg, &emit_csv(&curves))?;
    Ok(())
}

fn compare(cfg: &ScenarioConfig) -> Result<(), Failure> {
    let report = compare_methods(cfg, &cfg.methods)?;
    let text = report.render();
    deliver(cfg, &text)?;
    if report.passes() {
        Ok(())
    } else {
        let worst = report
            .rows
            .iter()
            .filter(|r| !r.passes())
            .map(|r| format!("{} {} vs {}: {:e} > {:e}", r.topology, r.method, r.reference, r.worst(), r.tolerance))
            .collect::<Vec<_>>()
            .join("; ");
        Err(Failure::Tolerance(worst))
    }
}

fn features(cfg: &ScenarioConfig, input: Option<&Path>) -> Result<(), Failure> {
    let rows: Vec<((Method, Topology, NoiseKind), MeasureFeatures)> = match input {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
            let parsed = csv::parse_csv(&text)?;
            csv::group_rows(&parsed)
                .into_iter()
                .map(|(key, group)| {
                    let t: Vec<f64> = group.iter().map(|r| r.nt).collect();
                    let n: Vec<f64> = group.iter().map(|r| r.negativity).collect();
                    let q: Vec<f64> = group.iter().map(|r| r.discord).collect();
                    let f = MeasureFeatures {
                        negativity: runner::extract_features(&t, &n, cfg.threshold),
                        discord: runner::extract_features(&t, &q, cfg.threshold),
                    };
                    (key, f)
                })
                .collect()
        }
        None => run_scenario(cfg)?
            .iter()
            .map(|c| {
                let p = &c.provenance;
                ((p.method, p.topology, p.noise), curve_features(c, cfg.threshold))
            })
            .collect(),
    };
    deliver(cfg, &render_features(&rows, cfg.threshold))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate(args) => simulate(&args.resolve(ScenarioConfig::default())?),
        Command::Compare(args) => compare(&args.resolve(ScenarioConfig::default())?),
        Command::Features { run, input } => features(&run.resolve(ScenarioConfig::default())?, input.as_deref()),
        Command::Preset { name, run } => simulate(&run.resolve(ScenarioConfig::preset(&name)?)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Tolerance(msg)) => {
            eprintln!("tolerance exceeded: {msg}");
            ExitCode::from(EXIT_TOLERANCE)
        }
        Err(Failure::Error(e)) if e.is_usage() => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Error(e)) => {
            eprintln!("numerical failure: {e}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
