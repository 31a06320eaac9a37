//! Scenario runner. Subcommands cover the two demo scenarios (position
//! queries over a memorized sequence, incremental sentence parsing with
//! judgment), raw network cascades, parameter validation and the latency
//! sweep. Results print as JSON; traces can be dumped as CSV.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use skiks_core::error::{Error, Result};
use skiks_core::fixtures;
use skiks_core::seq::{CountParams, QueryResult, SequenceNetwork};
use skiks_core::snn::{FiringState, Trace};
use skiks_core::specfile::{NetworkSpecFile, SentenceScenario, SequenceScenario};
use skiks_core::DEFAULT_SEED;

#[derive(Parser)]
#[command(name = "skiks", version, about = "Dual knowledge structure simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a counting-circuit parameter tuple against its constraints.
    Validate {
        /// `canonical` for the worked assignment, or a path to a JSON tuple.
        #[arg(long, default_value = "canonical")]
        params: String,
    },
    /// "What is letter number g?" on a sequence scenario.
    Query1 {
        /// Sequence scenario file (defaults to the embedded demo).
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        goal: i64,
        #[arg(long, default_value_t = 10_000)]
        trials: u32,
        #[arg(long, default_value_t = 32)]
        horizon: u32,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Write the firing trace of the episode as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// "What letter comes g after the named letter?"
    Query2 {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        letter: String,
        #[arg(long)]
        goal: i64,
        #[arg(long, default_value_t = 10_000)]
        trials: u32,
        #[arg(long, default_value_t = 32)]
        horizon: u32,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Parse a sentence against the template grammar and judge it.
    Parse {
        /// Sentence scenario file (defaults to the embedded demo).
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        sentence: String,
        /// Skip the judgment cascade and only print the parse.
        #[arg(long)]
        no_judge: bool,
        #[arg(long, default_value_t = 10_000)]
        trials: u32,
        #[arg(long, default_value_t = 32)]
        horizon: u32,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Latency sweep over every goal position; emits CSV.
    Sweep {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        trials: u32,
        #[arg(long, default_value_t = 12)]
        horizon: u32,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Output CSV path (defaults to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a recognition cascade on a raw network spec.
    Cascade {
        #[arg(long)]
        spec: PathBuf,
        /// Concept names to clamp as the start pattern.
        #[arg(long, required = true, num_args = 1..)]
        start: Vec<String>,
        #[arg(long, default_value_t = 10_000)]
        trials: u32,
        #[arg(long, default_value_t = 32)]
        horizon: u32,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Run a raw network spec with its scheduled signals; emits a CSV trace.
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 32)]
        rounds: u32,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Output CSV path (defaults to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error ({}): {e}", e.code());
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2: configuration problems, 4: sentences the grammar cannot settle,
/// 3: every other domain error.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Json(_) | Error::Spec(_) | Error::InvalidParams(_) => 2,
        Error::Ambiguous(_) | Error::Incomplete | Error::NoCandidates(_) => 4,
        _ => 3,
    }
}

fn dispatch(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Validate { params } => validate(&params),
        Cmd::Query1 { spec, goal, trials, horizon, seed, trace } => {
            let mut m = sequence_machine(spec.as_deref(), seed)?;
            let res = m.run_query1(goal, horizon, trials)?;
            print_query(&m, &res);
            write_trace(trace.as_deref(), m.trace())
        }
        Cmd::Query2 { spec, letter, goal, trials, horizon, seed, trace } => {
            let mut m = sequence_machine(spec.as_deref(), seed)?;
            let res = m.run_query2(&letter, goal, horizon, trials)?;
            print_query(&m, &res);
            write_trace(trace.as_deref(), m.trace())
        }
        Cmd::Parse { spec, sentence, no_judge, trials, horizon, seed } => {
            let scenario = sentence_scenario(spec.as_deref())?;
            let mut world = scenario.build(seed)?;
            let parse = world.parse_sentence(&sentence)?;
            if no_judge {
                println!("{}", serde_json::to_string_pretty(&json!({ "parse": parse }))?);
                return Ok(());
            }
            let (outline, res) = world.judge(&parse, horizon, trials, seed)?;
            let judgment = res.named(&world.iks.concept_index);
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "parse": parse,
                    "story": outline.story,
                    "judgment": judgment,
                    "stabilized": res.stabilized,
                    "trials": res.trials,
                    "seed": res.seed,
                }))?
            );
            Ok(())
        }
        Cmd::Sweep { spec, trials, horizon, seed, out } => {
            sweep(spec.as_deref(), trials, horizon, seed, out.as_deref())
        }
        Cmd::Cascade { spec, start, trials, horizon, seed } => {
            let file = NetworkSpecFile::load(spec)?;
            let g = file.to_concept_graph()?;
            let mut pattern = std::collections::BTreeSet::new();
            for name in &start {
                pattern.extend(g.concept(name)?.iter().copied());
            }
            let res = g.cascade(&pattern, horizon, trials, seed);
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "distribution": res.named(&g.concept_index),
                    "stabilized": res.stabilized,
                    "stabilization_round": res.stabilization_round,
                    "trials": res.trials,
                    "seed": res.seed,
                }))?
            );
            Ok(())
        }
        Cmd::Run { spec, rounds, seed, out } => {
            let file = NetworkSpecFile::load(spec)?;
            let net = file.to_network()?;
            let init = FiringState::silent(net.len());
            let trace = skiks_core::snn::run(&net, init, &file.to_signals(), rounds.max(1), seed);
            match out {
                Some(path) => trace.write_csv(File::create(path)?)?,
                None => trace.write_csv(std::io::stdout().lock())?,
            }
            Ok(())
        }
    }
}

fn validate(params: &str) -> Result<()> {
    let tuple: CountParams<f64> = if params == "canonical" {
        CountParams::canonical()
    } else {
        serde_json::from_str(&std::fs::read_to_string(params)?)?
    };
    tuple.validate()?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({ "params": tuple, "valid": true }))?
    );
    Ok(())
}

fn sequence_scenario(spec: Option<&std::path::Path>) -> Result<SequenceScenario> {
    match spec {
        Some(path) => SequenceScenario::load(path),
        None => Ok(fixtures::greek_virus()),
    }
}

fn sentence_scenario(spec: Option<&std::path::Path>) -> Result<SentenceScenario> {
    match spec {
        Some(path) => SentenceScenario::load(path),
        None => Ok(fixtures::sentences()),
    }
}

fn sequence_machine(
    spec: Option<&std::path::Path>,
    seed: u64,
) -> Result<SequenceNetwork<f64>> {
    sequence_scenario(spec)?.build(seed)
}

fn print_query(m: &SequenceNetwork<f64>, res: &QueryResult) {
    let decision: BTreeMap<String, f64> = res.decision.named(m.index());
    let out = json!({
        "letter": res.letter,
        "letter_index": res.letter_index,
        "decision": decision,
        "stabilized": res.decision.stabilized,
        "detection_round": res.detection_round,
        "latency_rounds": res.latency_rounds,
        "trials": res.decision.trials,
        "seed": res.decision.seed,
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
}

fn write_trace(path: Option<&std::path::Path>, trace: &Trace) -> Result<()> {
    if let Some(path) = path {
        trace.write_csv(File::create(path)?)?;
    }
    Ok(())
}

fn sweep(
    spec: Option<&std::path::Path>,
    trials: u32,
    horizon: u32,
    seed: u64,
    out: Option<&std::path::Path>,
) -> Result<()> {
    let scenario = sequence_scenario(spec)?;
    let k = scenario.letters.len() as i64;
    let mut rows = Vec::new();
    for g in 1..=k {
        let mut m = scenario.build(seed)?;
        let res = m.run_query1(g, horizon, trials)?;
        rows.push((g, res.letter, res.detection_round, res.latency_rounds));
    }
    let mut csv = String::from("goal,letter,detection_round,latency_rounds\n");
    for (g, letter, det, lat) in &rows {
        csv.push_str(&format!("{g},{letter},{det},{lat}\n"));
    }
    match out {
        Some(path) => std::fs::write(path, &csv)?,
        None => print!("{csv}"),
    }
    // Report the measured affine model latency = g*d + c'.
    if rows.len() >= 2 {
        let d = rows[1].3 as i64 - rows[0].3 as i64;
        let c = rows[0].3 as i64 - d;
        eprintln!("latency model: d = {d} rounds per position, offset c = {c}");
    }
    Ok(())
}
