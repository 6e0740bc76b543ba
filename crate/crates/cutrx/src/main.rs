//! Command-line front end: classify calculi, check proofs, restrict cuts to
//! analytic ones, eliminate cuts, search for proofs, and run the built-in
//! demos.
//!
//! Exit codes: 0 success; 1 verification or classification negative;
//! 2 usage error; 3 internal assertion (budget exceeded or engine bug).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cutrx::calculus::Calculus;
use cutrx::catalog;
use cutrx::classifier::{classify_calculus, OverallClass};
use cutrx::engine::{Engine, EngineOptions};
use cutrx::formula::Sequent;
use cutrx::kernel::{check, parse_proof, serialize_proof, Proof};
use cutrx::search::{prove, SearchOptions};

#[derive(Parser)]
#[command(
    name = "cutrx",
    version,
    about = "Sequent calculus cut-restriction toolkit"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Write the primary artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Emit one STEP line per reduction to stderr.
    #[arg(long, global = true)]
    trace: bool,
    /// Search depth for `prove`.
    #[arg(long, global = true, default_value_t = 8)]
    depth: usize,
    /// Random seed for search utilities.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Abort threshold for the distribution tree.
    #[arg(long, global = true, default_value_t = 1 << 16)]
    max_leaves: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Sexp,
    Table,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a calculus: substitution properties, invertibility, class.
    Classify { calc: String },
    /// Check proofs against a calculus.
    Check { calc: String, proofs: Vec<PathBuf> },
    /// Rewrite a proof so that every multicut is analytic.
    Restrict { calc: String, proof: PathBuf },
    /// Remove every multicut (class 1 calculi).
    Eliminate { calc: String, proof: PathBuf },
    /// Search for a proof of a sequent, given inline or as a file path.
    Prove { calc: String, sequent: String },
    /// Run a named catalog scenario end to end.
    Demo { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(AppError { code, message }) => {
            eprintln!("{message}");
            ExitCode::from(code)
        }
    }
}

struct AppError {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> AppError {
    AppError {
        code: 2,
        message: message.into(),
    }
}

fn negative(message: impl Into<String>) -> AppError {
    AppError {
        code: 1,
        message: message.into(),
    }
}

fn load_calculus(selector: &str) -> Result<Calculus, AppError> {
    if let Some(name) = selector.strip_prefix("builtin:") {
        return catalog::builtin(name).map_err(|e| usage(format!("cannot load `{selector}`: {e}")));
    }
    let text = std::fs::read_to_string(selector)
        .map_err(|e| usage(format!("cannot read `{selector}`: {e}")))?;
    Calculus::parse(&text).map_err(|e| usage(format!("cannot parse `{selector}`: {e}")))
}

fn load_proof(path: &PathBuf, calc: &Calculus) -> Result<Proof, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read `{}`: {e}", path.display())))?;
    parse_proof(&text, calc).map_err(|e| usage(format!("cannot parse `{}`: {e}", path.display())))
}

fn emit(cli: &Cli, artifact: &str) -> Result<(), AppError> {
    match &cli.out {
        None => {
            print!("{artifact}");
            Ok(())
        }
        Some(path) => std::fs::write(path, artifact)
            .map_err(|e| usage(format!("cannot write `{}`: {e}", path.display()))),
    }
}

fn run(cli: &Cli) -> Result<ExitCode, AppError> {
    match &cli.cmd {
        Cmd::Classify { calc } => {
            let calc = load_calculus(calc)?;
            let report = classify_calculus(&calc)
                .map_err(|e| negative(format!("classification failed: {e}")))?;
            let text = match cli.format {
                Format::Sexp => report.to_sexp(),
                Format::Table => report.to_table(),
            };
            emit(cli, &text)?;
            Ok(if report.overall == OverallClass::Neither {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Cmd::Check { calc, proofs } => {
            if proofs.is_empty() {
                return Err(usage("check needs at least one proof file"));
            }
            let calc = load_calculus(calc)?;
            let mut failed = false;
            for path in proofs {
                let pf = load_proof(path, &calc)?;
                let diags = check(&calc, &pf);
                if diags.is_empty() {
                    println!("{}: ok", path.display());
                } else {
                    failed = true;
                    for d in diags {
                        eprintln!("{}: {d}", path.display());
                    }
                }
            }
            Ok(if failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Cmd::Restrict { calc, proof } | Cmd::Eliminate { calc, proof } => {
            let eliminate = matches!(cli.cmd, Cmd::Eliminate { .. });
            let calc = load_calculus(calc)?;
            let pf = load_proof(proof, &calc)?;
            let engine = Engine::with_options(
                &calc,
                EngineOptions {
                    max_leaves: cli.max_leaves,
                    ..Default::default()
                },
            );
            let result = if eliminate {
                engine.eliminate(&pf)
            } else {
                engine.restrict(&pf)
            };
            match result {
                Ok((out, steps)) => {
                    if cli.trace {
                        for step in &steps {
                            eprintln!("{}", step.trace_line());
                        }
                    }
                    emit(cli, &serialize_proof(&out))?;
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => Err(AppError {
                    code: e.exit_code() as u8,
                    message: e.to_string(),
                }),
            }
        }
        Cmd::Prove { calc, sequent } => {
            let calc = load_calculus(calc)?;
            let text = if std::path::Path::new(sequent).exists() {
                std::fs::read_to_string(sequent)
                    .map_err(|e| usage(format!("cannot read `{sequent}`: {e}")))?
            } else {
                sequent.clone()
            };
            let goal = Sequent::parse(text.trim(), calc.table())
                .map_err(|e| usage(format!("cannot parse sequent: {e}")))?;
            let opts = SearchOptions {
                depth: cli.depth,
                seed: cli.seed,
                ..Default::default()
            };
            match prove(&calc, &goal, &opts) {
                Some(pf) => {
                    emit(cli, &serialize_proof(&pf))?;
                    Ok(ExitCode::SUCCESS)
                }
                None => Err(negative(format!(
                    "no proof found within depth {}",
                    cli.depth
                ))),
            }
        }
        Cmd::Demo { name } => run_demo(cli, name),
    }
}

fn run_demo(cli: &Cli, name: &str) -> Result<ExitCode, AppError> {
    let calc_name =
        catalog::proof_calculus(name).map_err(|e| usage(format!("unknown demo `{name}`: {e}")))?;
    let calc = catalog::builtin(calc_name).map_err(|e| usage(e.to_string()))?;
    let pf = catalog::example_proof(name).map_err(|e| usage(e.to_string()))?;
    println!("demo {name}: calculus {calc_name}");
    let report = classify_calculus(&calc).map_err(|e| negative(e.to_string()))?;
    println!("classified as {}", report.overall.name());
    let diags = check(&calc, &pf);
    if !diags.is_empty() {
        return Err(negative(format!(
            "catalog proof failed the checker: {}",
            diags[0]
        )));
    }
    println!(
        "input proof: {} nodes, {} multicut(s), locally analytic: {}",
        pf.node_count(),
        pf.cut_paths().len(),
        pf.is_locally_analytic()
    );
    let engine = Engine::with_options(
        &calc,
        EngineOptions {
            max_leaves: cli.max_leaves,
            ..Default::default()
        },
    );
    match engine.restrict(&pf) {
        Ok((out, steps)) => {
            for step in &steps {
                println!("{}", step.trace_line());
            }
            let recheck = check(&calc, &out);
            println!(
                "restricted proof: {} nodes, locally analytic: {}, rechecked: {}",
                out.node_count(),
                out.is_locally_analytic(),
                recheck.is_empty()
            );
            emit(cli, &serialize_proof(&out))?;
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => Err(AppError {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }),
    }
}
