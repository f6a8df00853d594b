//! `ordstat`: n-th smallest element, median, formula emission,
//! verification and benchmarks from the command line.
//!
//! Ranks are 1-based: `--rank 1` is the minimum.
//!
//! Exit status: 0 success, 1 verification/benchmark check failed,
//! 2 unreadable or malformed input, 3 rank or budget error.

mod input;

use std::fs;
use std::io::{self, Read, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ordstat_core::bench::{compare_wallclock, growth_table, BenchRecord};
use ordstat_core::expr::{
    build_selection_expr_with_budget, cse, emit_slp, emit_text, ExprForm, Syntax,
};
use ordstat_core::verify::{exhaustive_verify, random_verify, VerifyPlan, VerifyReport};
use ordstat_core::{median_with, select, Budget, Error, EvalStats, Mode, Rank};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "ordstat",
    version,
    about = "Order statistics by recursive elimination"
)]
struct Cli {
    /// Recursion budget (maximum call count); overrides ORDSTAT_BUDGET.
    #[arg(long, global = true)]
    budget: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the n-th smallest value of the input sequence.
    Select {
        /// 1-based rank.
        #[arg(long)]
        rank: usize,
        #[command(flatten)]
        opts: SequenceOpts,
    },
    /// Print the median of the input sequence.
    Median {
        #[command(flatten)]
        opts: SequenceOpts,
    },
    /// Print the formula for rank `--rank` among `--n` variables.
    Emit {
        /// Number of variables N.
        #[arg(long = "n")]
        len: usize,
        #[arg(long)]
        rank: usize,
        #[arg(long, value_enum, default_value_t = FormArg::Minmax)]
        form: FormArg,
        #[arg(long, value_enum, default_value_t = SyntaxArg::Infix)]
        syntax: SyntaxArg,
        /// Share repeated subexpressions (metrics go to stderr).
        #[arg(long)]
        cse: bool,
    },
    /// Run the exhaustive and/or random verification suites.
    Verify(VerifyArgs),
    /// Emit call-count growth or wall-clock comparison tables.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SequenceOpts {
    /// Input file, or `-` for stdin.
    #[arg(default_value = "-")]
    input: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Memo)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    exhaustive: bool,
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = 7)]
    max_n: usize,
    /// Comma-separated values for the exhaustive suite.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
    alphabet: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long, default_value_t = 5_000_000)]
    case_budget: u64,
    /// Replace the naive selector with an off-by-one one (self-test).
    #[arg(long)]
    inject_fault: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    growth: bool,
    #[arg(long)]
    wallclock: bool,
    #[arg(long, default_value_t = 8)]
    max_n: usize,
    /// Sequence length for `--wallclock`.
    #[arg(long = "n", default_value_t = 10)]
    len: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Timing repetitions per growth row; 0 leaves wall_time_s at 0.
    #[arg(long, default_value_t = 0)]
    reps: usize,
    /// Which recursion's rows `--growth` prints.
    #[arg(long, value_enum, default_value_t = GrowthMode::Naive)]
    mode: GrowthMode,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Naive,
    Memo,
}

#[derive(Clone, Copy, ValueEnum)]
enum GrowthMode {
    Naive,
    Memo,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Minmax,
    Arithmetic,
}

#[derive(Clone, Copy, ValueEnum)]
enum SyntaxArg {
    Infix,
    Sexpr,
    Slp,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Csv,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn range(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::EmptySequence | Error::NonFinite { .. } | Error::Parse { .. } => {
                Failure::parse(e.to_string())
            }
            _ => Failure::range(e.to_string()),
        }
    }
}

/// Output text plus exit status.
type Outcome = Result<(String, u8), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((out, code)) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(out.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("ordstat: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let budget = match cli.budget {
        Some(b) => Budget(b),
        None => Budget::from_env().map_err(|e| Failure::range(e.to_string()))?,
    };
    match cli.command {
        Command::Select { rank, opts } => cmd_select(rank, &opts, budget),
        Command::Median { opts } => cmd_median(&opts, budget),
        Command::Emit {
            len,
            rank,
            form,
            syntax,
            cse,
        } => cmd_emit(len, rank, form, syntax, cse, budget),
        Command::Verify(args) => cmd_verify(&args, budget),
        Command::Bench(args) => cmd_bench(&args, budget),
    }
}

fn read_input(path: &str) -> Result<String, Failure> {
    let mut text = String::new();
    if path == "-" {
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::parse(format!("reading stdin: {e}")))?;
    } else {
        text = fs::read_to_string(path).map_err(|e| Failure::parse(format!("{path}: {e}")))?;
    }
    Ok(text)
}

fn mode_of(m: ModeArg) -> Mode {
    match m {
        ModeArg::Naive => Mode::Naive,
        ModeArg::Memo => Mode::Memo,
    }
}

fn json_line(value: serde_json::Value) -> String {
    let mut s = serde_json::to_string(&value).expect("serializable");
    s.push('\n');
    s
}

fn cmd_select(rank: usize, opts: &SequenceOpts, budget: Budget) -> Outcome {
    let seq = input::parse_sequence(&read_input(&opts.input)?).map_err(|e| Failure::parse(e.0))?;
    let r = Rank::new(rank, seq.len())?;
    let mut stats = EvalStats::default();
    let value = select(mode_of(opts.mode), r, &seq, budget, &mut stats)?;
    let out = match opts.format {
        FormatArg::Json => json_line(json!({ "n": rank, "value": value, "stats": stats })),
        _ => format!("{value}\n"),
    };
    Ok((out, 0))
}

fn cmd_median(opts: &SequenceOpts, budget: Budget) -> Outcome {
    let seq = input::parse_sequence(&read_input(&opts.input)?).map_err(|e| Failure::parse(e.0))?;
    let mut stats = EvalStats::default();
    let value = median_with(&seq, mode_of(opts.mode), budget, &mut stats)?;
    let out = match opts.format {
        FormatArg::Json => json_line(json!({ "N": seq.len(), "median": value, "stats": stats })),
        _ => format!("{value}\n"),
    };
    Ok((out, 0))
}

fn cmd_emit(
    len: usize,
    rank: usize,
    form: FormArg,
    syntax: SyntaxArg,
    share: bool,
    budget: Budget,
) -> Outcome {
    if len == 0 {
        return Err(Failure::range("--n must be at least 1"));
    }
    let form = match form {
        FormArg::Minmax => ExprForm::MinMax,
        FormArg::Arithmetic => ExprForm::Arithmetic,
    };
    let r = Rank::new(rank, len)?;
    let mut expr = build_selection_expr_with_budget(len, r, form, budget)?;
    if share || matches!(syntax, SyntaxArg::Slp) {
        let (shared, m) = cse(&expr);
        if share {
            eprintln!(
                "tree_nodes={} dag_nodes={} depth={}",
                m.node_count_tree, m.node_count_dag, m.depth
            );
        }
        expr = shared;
    }
    let out = match syntax {
        SyntaxArg::Infix => emit_text(&expr, Syntax::Infix) + "\n",
        SyntaxArg::Sexpr => emit_text(&expr, Syntax::Sexpr) + "\n",
        SyntaxArg::Slp => emit_slp(&expr)
            .map_err(|e| Failure::parse(format!("{e} (use --form arithmetic)")))?
            .to_string(),
    };
    Ok((out, 0))
}

fn cmd_verify(args: &VerifyArgs, budget: Budget) -> Outcome {
    let plan = VerifyPlan {
        max_n: args.max_n,
        alphabet: args.alphabet.clone(),
        random_trials: args.trials,
        seed: args.seed,
        tolerance: args.tolerance,
        case_budget: args.case_budget,
        budget,
        inject_fault: args.inject_fault,
        ..VerifyPlan::default()
    };
    let run_exhaustive = args.exhaustive || !args.random;
    let mut reports: Vec<(&str, VerifyReport)> = Vec::new();
    if run_exhaustive {
        reports.push(("exhaustive", exhaustive_verify(&plan)?));
    }
    if args.random {
        reports.push(("random", random_verify(&plan)?));
    }
    let passed = reports.iter().all(|(_, r)| r.passed());
    let value = if reports.len() == 1 {
        serde_json::to_value(&reports[0].1)
    } else {
        serde_json::to_value(
            reports
                .iter()
                .cloned()
                .collect::<std::collections::BTreeMap<_, _>>(),
        )
    }
    .expect("serializable");
    Ok((json_line(value), if passed { 0 } else { 1 }))
}

fn records_out(records: &[BenchRecord], format: FormatArg) -> Result<String, Failure> {
    match format {
        FormatArg::Json => Ok(json_line(
            serde_json::to_value(records).expect("serializable"),
        )),
        _ => {
            let mut w = csv::Writer::from_writer(Vec::new());
            // header is written even for an empty table
            if records.is_empty() {
                w.write_record(ordstat_core::bench::CSV_HEADER.split(','))
                    .map_err(|e| Failure::range(e.to_string()))?;
            }
            for r in records {
                w.serialize(r).map_err(|e| Failure::range(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Failure::range(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv is utf-8"))
        }
    }
}

fn cmd_bench(args: &BenchArgs, budget: Budget) -> Outcome {
    if args.growth == args.wallclock {
        return Err(Failure::parse(
            "choose exactly one of --growth or --wallclock",
        ));
    }
    if args.growth {
        let rows = growth_table(args.max_n, args.reps, budget)?;
        let ok = rows.iter().all(|r| r.law_holds && r.outputs_agree);
        for r in rows.iter().filter(|r| !r.law_holds || !r.outputs_agree) {
            eprintln!(
                "ordstat: N={} n={} counted {} base cases, predicted {}{}",
                r.naive.len,
                r.naive.n,
                r.naive.base_case_calls,
                r.predicted_calls,
                if r.outputs_agree {
                    ""
                } else {
                    "; outputs disagree"
                }
            );
        }
        let records: Vec<BenchRecord> = rows
            .into_iter()
            .flat_map(|r| match args.mode {
                GrowthMode::Naive => vec![r.naive],
                GrowthMode::Memo => vec![r.memo],
                GrowthMode::Both => vec![r.naive, r.memo],
            })
            .collect();
        Ok((records_out(&records, args.format)?, if ok { 0 } else { 1 }))
    } else {
        let cmp = compare_wallclock(args.len, args.trials, args.seed, budget)?;
        if cmp.mismatches > 0 {
            eprintln!("ordstat: {} trials where modes disagreed", cmp.mismatches);
        }
        let code = if cmp.mismatches == 0 { 0 } else { 1 };
        Ok((records_out(&cmp.records, args.format)?, code))
    }
}
