use clap::{Args, Parser, Subcommand};
use gbx::ast::Expectation;
use gbx::report::{document_json, to_bytes};
use gbx::run::{cmd_jacobi_analyze, cmd_ma_analyze, cmd_ma_apply, run_source, RunResult};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gbx", about = "Exact graded Poisson calculus and Monge-Ampère analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a .gbx document and print one report per command.
    Run(FileArgs),
    /// Execute a .gbx document and print only check verdicts.
    Check(FileArgs),
    /// Monge-Ampère analysis of inline forms.
    Ma {
        #[command(subcommand)]
        command: MaCommand,
    },
    /// Jacobi (first-order) systems of two 2-forms.
    Jacobi {
        #[command(subcommand)]
        command: JacobiCommand,
    },
}

#[derive(Args)]
struct FileArgs {
    /// Path to the .gbx document.
    file: PathBuf,
    /// Emit the full JSON report document instead of text lines.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum MaCommand {
    /// Classify a symplectic Monge-Ampère structure.
    Analyze {
        /// Base dimension (2 or 3).
        #[arg(long)]
        dim: usize,
        /// The n-form, as a DSL expression in q_i, p_i, dq_i, dp_i.
        #[arg(long)]
        form: String,
        /// Sign chart, e.g. "p1>0,q2<0".
        #[arg(long, default_value = "")]
        chart: String,
        /// Rational sample point for sign decisions, e.g. "q1=1,p1=3/2".
        #[arg(long)]
        sample_point: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Apply the Monge-Ampère operator of a form to a base function.
    Apply {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        form: String,
        /// Scalar function of the base coordinates q_i.
        #[arg(long)]
        function: String,
        #[arg(long, default_value = "")]
        chart: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum JacobiCommand {
    /// Analyze a pair of 2-forms on the ambient space (x, y, w1, w2).
    Analyze {
        #[arg(long)]
        omega1: String,
        #[arg(long)]
        omega2: String,
        /// First component u(x, y) of a candidate solution.
        #[arg(long)]
        candidate_u: Option<String>,
        /// Second component v(x, y) of a candidate solution.
        #[arg(long)]
        candidate_v: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

fn color_enabled() -> bool {
    match std::env::var("GBX_COLOR") {
        Ok(v) => !matches!(v.as_str(), "" | "0" | "never" | "false"),
        Err(_) => false,
    }
}

fn diagnostic(msg: &str) {
    if color_enabled() {
        eprintln!("\x1b[31merror\x1b[0m: {msg}");
    } else {
        eprintln!("error: {msg}");
    }
}

fn print_result(result: &RunResult, json: bool, checks_only: bool) {
    if json {
        print!("{}", to_bytes(&document_json(result.reports.clone(), result.ok())));
        return;
    }
    if checks_only {
        for c in &result.checks {
            let expected = match c.expected {
                Expectation::Pass => "pass",
                Expectation::Fail => "fail",
            };
            println!(
                "check {}: {} (expected {}) -> {}",
                c.kind,
                if c.verdict { "pass" } else { "fail" },
                expected,
                if c.matched { "ok" } else { "MISMATCH" },
            );
        }
        return;
    }
    for r in &result.reports {
        println!("{}", serde_json::to_string(r).expect("serializable"));
    }
}

fn run_file(args: &FileArgs, checks_only: bool) -> ExitCode {
    let text = match std::fs::read_to_string(&args.file) {
        Ok(t) => t,
        Err(e) => {
            diagnostic(&format!("cannot read {}: {e}", args.file.display()));
            return ExitCode::from(2);
        }
    };
    match run_source(&text) {
        Ok(result) => {
            print_result(&result, args.json, checks_only);
            if result.ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            diagnostic(&e.to_string());
            ExitCode::from(2)
        }
    }
}

fn emit(result: Result<serde_json::Value, String>, json: bool) -> ExitCode {
    match result {
        Ok(body) => {
            if json {
                print!("{}", to_bytes(&document_json(vec![body], true)));
            } else {
                println!("{}", serde_json::to_string(&body).expect("serializable"));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            diagnostic(&e);
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run_file(&args, false),
        Command::Check(args) => run_file(&args, true),
        Command::Ma { command } => match command {
            MaCommand::Analyze {
                dim,
                form,
                chart,
                sample_point,
                json,
            } => emit(
                cmd_ma_analyze(dim, &form, &chart, sample_point.as_deref()),
                json,
            ),
            MaCommand::Apply {
                dim,
                form,
                function,
                chart,
                json,
            } => emit(cmd_ma_apply(dim, &form, &function, &chart), json),
        },
        Command::Jacobi { command } => match command {
            JacobiCommand::Analyze {
                omega1,
                omega2,
                candidate_u,
                candidate_v,
                json,
            } => emit(
                cmd_jacobi_analyze(
                    &omega1,
                    &omega2,
                    candidate_u.as_deref(),
                    candidate_v.as_deref(),
                ),
                json,
            ),
        },
    }
}
