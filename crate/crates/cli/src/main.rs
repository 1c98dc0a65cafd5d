//! `bridgewatch`: ingest receipts, evaluate the cross-chain rules, simulate
//! bridge traffic, and cross-check the engine against the reference
//! evaluator.
//!
//! Exit codes: 0 clean, 1 anomalies found (or `check` found a divergence),
//! 2 bad input or configuration, 3 internal error. Machine output goes to
//! files or stdout; progress goes to stderr.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use bridgewatch_core::analytics::{build_report, evaluate_facts_dir, Latency, PriceTable};
use bridgewatch_core::facts::{dump_facts_dir, load_facts_dir};
use bridgewatch_core::ingest::{ingest_jsonl, INGEST_REPORT_FILE};
use bridgewatch_core::oracle::{brute_force_all, diff};
use bridgewatch_core::rules::eval_all;
use bridgewatch_core::scenario::{
    generate, write_scenario, AnomalySpec, Emit, ReplayShape, ScenarioParams,
};

#[derive(Parser)]
#[command(
    name = "bridgewatch",
    version,
    about = "Cross-chain bridge transaction monitor"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decode receipts (JSONL) into a `.facts` directory.
    Ingest {
        #[arg(long)]
        receipts: PathBuf,
        /// Bridge decoder config (JSON).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the rules and write the anomaly report.
    Eval {
        #[arg(long)]
        facts: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Static USD price table (JSON array of {chain_id, token, usd, decimals}).
        #[arg(long)]
        prices: Option<PathBuf>,
        /// Also write `<Predicate>.csv` for every rule into this directory.
        #[arg(long)]
        rules_csv: Option<PathBuf>,
    },
    /// Generate synthetic two-chain traffic with labelled anomalies.
    Simulate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        deposits: usize,
        #[arg(long)]
        withdrawals: usize,
        /// `kind=count[,kind=count…]`; kinds: forged_release, replayed_id,
        /// finality_break, direct_transfer, orphan_bridge_event.
        #[arg(long, default_value = "")]
        anomalies: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = EmitArg::Receipts)]
        emit: EmitArg,
        /// Releases per replayed id.
        #[arg(long, conflicts_with = "replay_total")]
        replay: Option<usize>,
        /// Total releases spread over all replayed ids.
        #[arg(long)]
        replay_total: Option<usize>,
    },
    /// Diff the engine against the brute-force evaluator (small stores only).
    Check {
        #[arg(long)]
        facts: PathBuf,
    },
    /// Print latency and value statistics as JSON.
    Stats {
        #[arg(long)]
        facts: PathBuf,
        #[arg(long)]
        prices: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitArg {
    Receipts,
    Facts,
}

/// Why a command did not exit cleanly.
enum Failure {
    /// Bad flags, paths or input data.
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl<E: std::error::Error + Send + Sync + 'static> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.into())
    }
}

type Outcome = Result<bool, Failure>;

fn load_prices(path: Option<&Path>) -> Result<Option<PriceTable>, Failure> {
    path.map(|p| PriceTable::load(p).context("loading price table"))
        .transpose()
        .map_err(Failure::Input)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))
            .map_err(Failure::Input)?;
    }
    std::fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::Input)?;
    Ok(())
}

fn require_dir(dir: &Path) -> Result<(), Failure> {
    if !dir.is_dir() {
        return Err(Failure::Input(anyhow!(
            "{}: not a directory",
            dir.display()
        )));
    }
    Ok(())
}

fn ingest(receipts: &Path, config: &Path, out: &Path) -> Outcome {
    let (store, report) = ingest_jsonl(receipts, config)?;
    dump_facts_dir(&store, out)?;
    report.write_json(&out.join(INGEST_REPORT_FILE))?;
    eprintln!(
        "ingested {} receipts into {} facts ({} warnings) -> {}",
        report.receipts,
        store.len(),
        report.warnings.len(),
        out.display()
    );
    Ok(false)
}

fn eval(facts: &Path, out: &Path, prices: Option<&Path>, rules_csv: Option<&Path>) -> Outcome {
    require_dir(facts)?;
    let prices = load_prices(prices)?;
    let (_, outputs, report) = evaluate_facts_dir(facts, prices.as_ref())?;
    write_file(out, &report.to_json())?;
    if let Some(dir) = rules_csv {
        outputs.write_csv_dir(dir)?;
    }
    eprintln!(
        "{} CCTX deposits, {} withdrawals, {} anomalies -> {}",
        outputs.rule4.len(),
        outputs.rule8.len(),
        report.total_anomalies(),
        out.display()
    );
    for (kind, n) in report.anomaly_counts.iter().filter(|(_, n)| **n > 0) {
        eprintln!("  {kind}: {n}");
    }
    Ok(report.total_anomalies() > 0)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    seed: u64,
    deposits: usize,
    withdrawals: usize,
    anomalies: &str,
    out: &Path,
    emit: EmitArg,
    replay: Option<usize>,
    replay_total: Option<usize>,
) -> Outcome {
    let spec: AnomalySpec = anomalies
        .parse()
        .context("--anomalies")
        .map_err(Failure::Input)?;
    let mut params = ScenarioParams::new(seed, deposits, withdrawals).with_anomalies(spec);
    if let Some(k) = replay {
        params = params.with_replay(ReplayShape::PerId(k));
    }
    if let Some(n) = replay_total {
        params = params.with_replay(ReplayShape::Total(n));
    }
    let scenario = generate(&params)?;
    let emit = match emit {
        EmitArg::Receipts => Emit::Receipts,
        EmitArg::Facts => Emit::Facts,
    };
    write_scenario(&scenario, out, emit)?;
    eprintln!(
        "{} receipts, {} injected anomalies -> {}",
        scenario.receipts.len(),
        scenario.ground_truth.labels.len(),
        out.display()
    );
    Ok(false)
}

fn check(facts: &Path) -> Outcome {
    require_dir(facts)?;
    let store = load_facts_dir(facts)?;
    let engine = eval_all(&store)?;
    let oracle = brute_force_all(&store)?;
    let divergences = diff(&engine, &oracle);
    let mut stdout = std::io::stdout().lock();
    for d in &divergences {
        let side = if d.engine_only {
            "engine-only"
        } else {
            "oracle-only"
        };
        writeln!(
            stdout,
            "{}\t{side}\t{}",
            d.rule.predicate(),
            d.row.join(",")
        )
        .map_err(|e| Failure::Internal(e.into()))?;
    }
    eprintln!("{} facts, {} divergences", store.len(), divergences.len());
    Ok(!divergences.is_empty())
}

fn stats(facts: &Path, prices: Option<&Path>) -> Outcome {
    require_dir(facts)?;
    let prices = load_prices(prices)?;
    let store = load_facts_dir(facts)?;
    let outputs = eval_all(&store)?;
    let latency: Latency = build_report(&store, &outputs, prices.as_ref(), Vec::new()).latency;
    let text = serde_json::to_string_pretty(&latency).map_err(|e| Failure::Internal(e.into()))?;
    println!("{text}");
    Ok(false)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Ingest {
            receipts,
            config,
            out,
        } => ingest(&receipts, &config, &out),
        Command::Eval {
            facts,
            out,
            prices,
            rules_csv,
        } => eval(&facts, &out, prices.as_deref(), rules_csv.as_deref()),
        Command::Simulate {
            seed,
            deposits,
            withdrawals,
            anomalies,
            out,
            emit,
            replay,
            replay_total,
        } => simulate(
            seed,
            deposits,
            withdrawals,
            &anomalies,
            &out,
            emit,
            replay,
            replay_total,
        ),
        Command::Check { facts } => check(&facts),
        Command::Stats { facts, prices } => stats(&facts, prices.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(false)) => ExitCode::SUCCESS,
        Ok(Ok(true)) => ExitCode::from(1),
        Ok(Err(Failure::Input(e))) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Ok(Err(Failure::Internal(e))) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(3)
        }
        Err(_) => ExitCode::from(3),
    }
}
