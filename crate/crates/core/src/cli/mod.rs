//! `hardy-cert` command-line front end.

pub mod config;
pub mod report;
pub mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

pub use config::{parse_config, Command, ConfigError, RunConfig};
pub use report::{write_report, Format, Report};
pub use run::run;

#[derive(Debug, Parser)]
#[command(
    name = "hardy-cert",
    version,
    about = "Certify and estimate l^p norms of weighted mean matrices",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// constant | power:A | geometric:R | list:x;y;.. | file:PATH
    #[arg(long)]
    pub weights: Option<String>,
    /// Exponent or comma-separated grid.
    #[arg(long = "p", allow_hyphen_values = true)]
    pub p: Option<String>,
    /// Number or `auto`.
    #[arg(long = "L")]
    pub l: Option<String>,
    /// Power exponent grid; replaces the weights with `power:alpha`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long = "N")]
    pub n: Option<String>,
    #[arg(long)]
    pub condition: Option<String>,
    /// auto | eigen | power-iteration | eta-bisection
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long)]
    pub restarts: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    /// table | csv | jsonl
    #[arg(long)]
    pub format: Option<String>,
}

impl Cli {
    fn flag_pairs(&self) -> Vec<(String, String)> {
        let fields = [
            ("weights", &self.weights),
            ("p", &self.p),
            ("L", &self.l),
            ("alpha", &self.alpha),
            ("N", &self.n),
            ("condition", &self.condition),
            ("method", &self.method),
            ("a", &self.a),
            ("b", &self.b),
            ("restarts", &self.restarts),
            ("tol", &self.tol),
            ("seed", &self.seed),
            ("out", &self.out),
            ("format", &self.format),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }

    pub fn to_config(&self) -> Result<RunConfig, ConfigError> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
                config::parse_pairs(&text)?
            }
            None => Vec::new(),
        };
        config::build(self.command, &file, &self.flag_pairs())
    }
}

fn configure_threads() {
    if let Ok(v) = std::env::var("HARDY_CERT_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => eprintln!("hardy-cert: ignoring HARDY_CERT_THREADS={v}"),
        }
    }
}

/// Exit codes: 0 all assertions hold, 1 an assertion failed, 2 bad input.
pub fn main_with(cli: Cli) -> ExitCode {
    configure_threads();
    let cfg = match cli.to_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("hardy-cert: {e}");
            return ExitCode::from(2);
        }
    };
    let report = run(&cfg);
    if let Err(e) = write_report(&report, cfg.format, cfg.out.as_deref()) {
        eprintln!("hardy-cert: cannot write report: {e}");
        return ExitCode::from(2);
    }
    if cfg.out.is_some() {
        eprintln!(
            "hardy-cert {}: {}",
            report.command,
            if report.ok() { "ok" } else { "FAILED" }
        );
    }
    if report.ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
