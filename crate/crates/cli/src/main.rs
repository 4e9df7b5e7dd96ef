//! `gn3`: consistency checks, lemma verification and simulations.
//!
//! Exit codes: 0 consistent and proportional (or success), 1 parse or
//! configuration error, 2 domain error, 3 consistent but not proportional,
//! 4 violation found, 5 lemma suite failure, 6 time step rejected by the
//! stability guard.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gn3_core::check::{run_check, CheckConfig, Verdict};
use gn3_core::error::{ModelError, SearchError, SimError};
use gn3_core::lemmas::{run_suite, SuiteConfig, SuiteError};
use gn3_core::sim::{run, Scenario};
use gn3_core::{library, ConstitutiveModel};

const OK: u8 = 0;
const CONFIG: u8 = 1;
const DOMAIN: u8 = 2;
const NONPROPORTIONAL: u8 = 3;
const VIOLATION: u8 = 4;
const LEMMA_FAILURE: u8 = 5;
const CFL: u8 = 6;

#[derive(Parser, Debug)]
#[command(name = "gn3", version, about = "Entropy-principle checks for Type III heat conductors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample and search a constitutive model for violations of the entropy restrictions.
    Check {
        /// Model JSON file, or `builtin:NAME` for a bundled model.
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Verify the representation results and dyadic-basis lemmas numerically.
    Lemmas {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Run a 1D simulation scenario.
    Simulate {
        /// Scenario JSON file, or `builtin:NAME` for a bundled scenario.
        #[arg(long)]
        scenario: String,
        /// Output directory for summary.json and series.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl std::fmt::Display) -> Failure {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

fn model_failure(e: ModelError) -> Failure {
    let code = match e {
        ModelError::Domain(_) => DOMAIN,
        _ => CONFIG,
    };
    Failure::new(code, e)
}

fn search_failure(e: SearchError) -> Failure {
    let code = match e {
        SearchError::Domain(_) => DOMAIN,
        SearchError::EmptyDomain(_) => CONFIG,
    };
    Failure::new(code, e)
}

fn sim_failure(e: SimError) -> Failure {
    let code = match e {
        SimError::Cfl { .. } => CFL,
        SimError::Domain(_) => DOMAIN,
        _ => CONFIG,
    };
    Failure::new(code, e)
}

fn read_input(spec: &str) -> Result<String, Failure> {
    fs::read_to_string(spec).map_err(|e| Failure::new(CONFIG, format!("cannot read {spec}: {e}")))
}

fn load_model(spec: &str) -> Result<ConstitutiveModel, Failure> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        return library::load(name).ok_or_else(|| Failure::new(CONFIG, format!("no bundled model named {name}")));
    }
    ConstitutiveModel::from_json(&read_input(spec)?).map_err(model_failure)
}

fn load_scenario(spec: &str) -> Result<Scenario, Failure> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        return library::scenario(name).ok_or_else(|| Failure::new(CONFIG, format!("no bundled scenario named {name}")));
    }
    Scenario::from_json(&read_input(spec)?).map_err(sim_failure)
}

/// Reject an output file whose directory does not exist, before any work.
fn validate_out_file(out: &Option<PathBuf>) -> Result<(), Failure> {
    if let Some(p) = out {
        let parent = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return Err(Failure::new(CONFIG, format!("output directory {} does not exist", parent.display())));
        }
        if p.is_dir() {
            return Err(Failure::new(CONFIG, format!("{} is a directory", p.display())));
        }
    }
    Ok(())
}

fn validate_out_dir(out: &Option<PathBuf>) -> Result<(), Failure> {
    if let Some(d) = out {
        if d.exists() && !d.is_dir() {
            return Err(Failure::new(CONFIG, format!("{} exists and is not a directory", d.display())));
        }
        let parent = d.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !d.exists() && !parent.is_dir() {
            return Err(Failure::new(CONFIG, format!("cannot create {}", d.display())));
        }
    }
    Ok(())
}

/// Write every file to a temporary sibling first, then rename them into place.
fn write_atomically(files: &[(PathBuf, String)]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::new(CONFIG, format!("cannot write output: {e}"));
    let mut staged = Vec::new();
    for (path, content) in files {
        let tmp = path.with_extension("partial");
        fs::write(&tmp, content).map_err(io)?;
        staged.push((tmp, path));
    }
    for (tmp, path) in staged {
        fs::rename(&tmp, path).map_err(io)?;
    }
    Ok(())
}

fn emit(out: &Option<PathBuf>, content: String) -> Result<(), Failure> {
    match out {
        Some(p) => write_atomically(&[(p.clone(), content)]),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .map_err(|e| Failure::new(CONFIG, format!("cannot write to stdout: {e}")))
        }
    }
}

fn dispatch(cmd: Command) -> Result<u8, Failure> {
    match cmd {
        Command::Check {
            model,
            seed,
            samples,
            budget,
            out,
            format,
        } => {
            validate_out_file(&out)?;
            if budget == 0 {
                return Err(Failure::new(CONFIG, "--budget must be at least 1"));
            }
            let model = load_model(&model)?;
            let report = run_check(&model, &CheckConfig { seed, samples, budget }).map_err(search_failure)?;
            let text = match format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
                Format::Text => report.to_text(),
            };
            emit(&out, text)?;
            eprintln!("{}: {}", report.model, report.verdict.as_str());
            Ok(match report.verdict {
                Verdict::ConsistentProportional => OK,
                Verdict::ConsistentNonproportional => NONPROPORTIONAL,
                Verdict::ViolationFound => VIOLATION,
            })
        }
        Command::Lemmas {
            seed,
            samples,
            out,
            format,
            inject_fault,
        } => {
            validate_out_file(&out)?;
            if samples == 0 {
                return Err(Failure::new(CONFIG, "--samples must be at least 1"));
            }
            let report = run_suite(&SuiteConfig {
                seed,
                samples,
                corrupt: inject_fault,
            })
            .map_err(|e| match e {
                SuiteError::Search(SearchError::EmptyDomain(_)) => Failure::new(CONFIG, e),
                other => Failure::new(DOMAIN, other),
            })?;
            let text = match format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
                Format::Text => report.to_text(),
            };
            emit(&out, text)?;
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            eprintln!("lemma suite: {} checks, {failed} failed", report.checks.len());
            Ok(if report.passed { OK } else { LEMMA_FAILURE })
        }
        Command::Simulate { scenario, out, format } => {
            validate_out_dir(&out)?;
            let prepared = load_scenario(&scenario)?.prepare().map_err(sim_failure)?;
            let output = run(&prepared).map_err(sim_failure)?;
            let summary = match format {
                Format::Text => output.summary.to_text(),
                _ => output.summary.to_json(),
            };
            match &out {
                Some(dir) => {
                    fs::create_dir_all(dir).map_err(|e| Failure::new(CONFIG, format!("cannot create {}: {e}", dir.display())))?;
                    write_atomically(&[
                        (dir.join("summary.json"), output.summary.to_json()),
                        (dir.join("series.csv"), output.csv),
                    ])?;
                    if format == Format::Text {
                        emit(&None, summary)?;
                    }
                }
                None if format == Format::Csv => emit(&None, output.csv)?,
                None => emit(&None, summary)?,
            }
            Ok(OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { CONFIG } else { OK });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
