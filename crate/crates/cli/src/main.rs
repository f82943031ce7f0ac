//! `cbcheck`: verify, analyze, simulate, and export card-protocol
//! KWH-trees from the command line.
//!
//! Exit codes are a stable contract: 0 pass, 1 input or parse error,
//! 2 verification failure, 3 simulation budget failure.

use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cbcheck_core::corpus::{corpus_entry, load_corpus};
use cbcheck_core::dot::to_dot;
use cbcheck_core::dsl::parse_protocol;
use cbcheck_core::engine::{build_kwh_tree, BuildError};
use cbcheck_core::report::{report_to_json_string, report_to_text};
use cbcheck_core::simulator::{estimate, output_deviation, SimError, INPUT_PAIRS};
use cbcheck_core::verifier::{analyze_shuffles, full_report_with_budget};
use cbcheck_core::Protocol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Parser)]
#[command(name = "cbcheck", version, about = "Card-based AND protocol verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify a protocol: security, correctness, termination, runtime.
    Check {
        /// Protocol file, or '-' for stdin.
        path: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Node budget for the symbolic state exploration.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        /// Treat the path as the name of a bundled corpus entry.
        #[arg(long)]
        corpus: bool,
    },
    /// Export the protocol's KWH-tree as a Graphviz graph.
    Tree {
        path: String,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long)]
        corpus: bool,
    },
    /// Run Monte Carlo trials and report empirical statistics.
    Simulate {
        path: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        corpus: bool,
    },
    /// Classify every shuffle: uniform, closed, generated group order.
    Shuffles {
        path: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        corpus: bool,
    },
    /// List the bundled corpus entries.
    Corpus {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn load_input(path: &str, use_corpus: bool) -> Result<Protocol, String> {
    let source = if use_corpus {
        let entry = corpus_entry(path)
            .or_else(|| corpus_entry(&format!("{path}.cbp")))
            .ok_or_else(|| format!("no corpus entry named {path:?}"))?;
        entry.source.to_string()
    } else if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| format!("reading stdin: {e}"))?;
        buf
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("reading {path}: {e}"))?
    };
    parse_protocol(&source).map_err(|e| e.to_string())
}

fn fail_input(message: String) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(1)
}

fn cmd_check(path: &str, format: Format, budget: usize, use_corpus: bool) -> ExitCode {
    let ast = match load_input(path, use_corpus) {
        Ok(ast) => ast,
        Err(e) => return fail_input(e),
    };
    let report = full_report_with_budget(&ast, budget);
    match format {
        Format::Text => print!("{}", report_to_text(&report)),
        Format::Json => print!("{}", report_to_json_string(&report)),
        Format::Dot => return fail_input("check supports --format text|json".into()),
    }
    if report.ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn cmd_tree(path: &str, format: Format, budget: usize, use_corpus: bool) -> ExitCode {
    if format != Format::Dot {
        return fail_input("tree supports --format dot".into());
    }
    let ast = match load_input(path, use_corpus) {
        Ok(ast) => ast,
        Err(e) => return fail_input(e),
    };
    match build_kwh_tree(&ast, budget) {
        Ok(tree) => {
            print!("{}", to_dot(&tree, None));
            ExitCode::SUCCESS
        }
        Err(BuildError::Leak { witness, partial }) => {
            // still emit the partial tree, annotated at the leak
            print!("{}", to_dot(&partial, Some(&witness)));
            eprintln!("error: {witness}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_simulate(
    path: &str,
    format: Format,
    trials: usize,
    seed: u64,
    use_corpus: bool,
) -> ExitCode {
    let ast = match load_input(path, use_corpus) {
        Ok(ast) => ast,
        Err(e) => return fail_input(e),
    };
    let summary = match estimate(&ast, trials, seed) {
        Ok(s) => s,
        Err(e @ SimError::StepBudget(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match format {
        Format::Text => {
            println!("protocol {} | {} trials per input, seed {seed}", ast.name, trials);
            for &(a, b) in &INPUT_PAIRS {
                let st = summary.stats(a, b);
                println!(
                    "input ({a},{b}): output1 rate {:.5}, mean turns {:.4}, mean shuffles {:.4}, mean passes {:.4}",
                    st.output_rate(1),
                    st.mean_turns(),
                    st.mean_shuffles(),
                    st.mean_passes()
                );
            }
            println!(
                "transcript max deviation {:.5} (independence {})",
                summary.transcript_max_deviation(),
                if summary.transcript_independent() {
                    "pass"
                } else {
                    "fail"
                }
            );
        }
        Format::Json => {
            let per_input: Vec<serde_json::Value> = INPUT_PAIRS
                .iter()
                .map(|&(a, b)| {
                    let st = summary.stats(a, b);
                    serde_json::json!({
                        "input": [a, b],
                        "output1_rate": st.output_rate(1),
                        "mean_turns": st.mean_turns(),
                        "mean_shuffles": st.mean_shuffles(),
                        "mean_passes": st.mean_passes(),
                    })
                })
                .collect();
            let doc = serde_json::json!({
                "protocol": ast.name,
                "trials": trials,
                "seed": seed,
                "per_input": per_input,
                "transcript_max_deviation": summary.transcript_max_deviation(),
                "transcript_independent": summary.transcript_independent(),
            });
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        }
        Format::Dot => return fail_input("simulate supports --format text|json".into()),
    }
    if output_deviation(&summary) == 0.0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn cmd_shuffles(path: &str, format: Format, use_corpus: bool) -> ExitCode {
    let ast = match load_input(path, use_corpus) {
        Ok(ast) => ast,
        Err(e) => return fail_input(e),
    };
    let reports = analyze_shuffles(&ast);
    match format {
        Format::Text => {
            for (i, s) in reports.iter().enumerate() {
                println!(
                    "#{i} {}: uniform={} closed={} |group|={}",
                    s.spec,
                    if s.uniform { "yes" } else { "no" },
                    if s.closed { "yes" } else { "no" },
                    s.group_order
                );
            }
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = reports
                .iter()
                .map(|s| {
                    serde_json::json!({
                        "spec": s.spec.to_string(),
                        "uniform": s.uniform,
                        "closed": s.closed,
                        "group_order": s.group_order,
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&rows).unwrap());
        }
        Format::Dot => return fail_input("shuffles supports --format text|json".into()),
    }
    ExitCode::SUCCESS
}

fn cmd_corpus(format: Format) -> ExitCode {
    let entries = load_corpus();
    match format {
        Format::Text => {
            for e in &entries {
                println!("{}\t{} cards\t{}", e.file, e.ast.deck_size(), e.ast.name);
            }
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = entries
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "file": e.file,
                        "name": e.ast.name,
                        "cards": e.ast.deck_size(),
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&rows).unwrap());
        }
        Format::Dot => return fail_input("corpus supports --format text|json".into()),
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check {
            path,
            format,
            budget,
            corpus,
        } => cmd_check(&path, format, budget, corpus),
        Command::Tree {
            path,
            format,
            budget,
            corpus,
        } => cmd_tree(&path, format, budget, corpus),
        Command::Simulate {
            path,
            format,
            trials,
            seed,
            corpus,
        } => cmd_simulate(&path, format, trials, seed, corpus),
        Command::Shuffles {
            path,
            format,
            corpus,
        } => cmd_shuffles(&path, format, corpus),
        Command::Corpus { format } => cmd_corpus(format),
    }
}
