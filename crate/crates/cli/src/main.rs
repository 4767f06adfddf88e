use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lazynd::effect::{Eff, StrictnessMode};
use lazynd::laws::{run_suite, LawConfig, LawSuite};
use lazynd::lifted::{self, filter_nd, from_host, nf};
use lazynd::pflp::studies::{
    all_five_or_six, all_six, consecutive_bs_probability, grass_outcome, palindrome_probability, santa_failure,
    GrassQuery, SantaVariant,
};
use lazynd::pflp::{DistError, QueryOutcome};
use lazynd::search::{enumerate, SearchConfig, SearchError, SearchStats, SearchStrategy, DEFAULT_DEPTH_CAP};
use lazynd::sortlab::{decision_tree, show_list, DecisionTree};
use lazynd::sortlab::{coin_choice, coin_sorted, selection_sort, Algorithm, Comparator};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

#[derive(Parser)]
#[command(name = "lazynd", version, about = "Lazy non-determinism labs, probabilistic case studies and law checks")]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Dfs,
    Bfs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Lazy,
    Strict,
}

impl From<Mode> for StrictnessMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Lazy => StrictnessMode::Lazy,
            Mode::Strict => StrictnessMode::Strict,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct RunConfig {
    /// Search strategy.
    #[arg(long, global = true, value_enum, default_value_t = Strategy::Dfs)]
    strategy: Strategy,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Maximum number of suspensions forced per search.
    #[arg(long, global = true, env = "LAZYND_DEPTH_CAP", default_value_t = DEFAULT_DEPTH_CAP,
          value_parser = clap::value_parser!(u64).range(1..))]
    depth_cap: u64,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = LawConfig::default().seed)]
    seed: u64,
    /// Absolute tolerance for probability comparisons.
    #[arg(long, global = true, default_value_t = LawConfig::default().tolerance, value_parser = positive)]
    tolerance: f64,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 => Ok(x),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

impl RunConfig {
    fn search(&self) -> SearchConfig {
        let strategy = match self.strategy {
            Strategy::Dfs => SearchStrategy::Dfs,
            Strategy::Bfs => SearchStrategy::Bfs,
        };
        SearchConfig::default().with_strategy(strategy).with_depth_cap(self.depth_cap)
    }

    fn to_json(&self) -> Value {
        json!({
            "strategy": format!("{:?}", self.strategy).to_lowercase(),
            "format": self.format,
            "depth_cap": self.depth_cap,
            "seed": self.seed,
            "tolerance": self.tolerance,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sort `1..=n` with a comparator that answers every comparison both ways.
    Perms {
        #[arg(long, value_parser = parse_algorithm)]
        algo: Algorithm,
        #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
        n: i64,
        #[arg(long, value_enum, default_value_t = Mode::Lazy)]
        mode: Mode,
        /// Print only the number of results.
        #[arg(long)]
        count_only: bool,
        /// Demand only the first element of each result.
        #[arg(long)]
        head_only: bool,
        /// Print search statistics.
        #[arg(long)]
        stats: bool,
    },
    /// Run a probabilistic case study.
    Dist {
        #[command(subcommand)]
        study: Study,
    },
    /// Render the decision tree of a preset computation.
    Tree {
        #[arg(value_enum, required_unless_present = "from_json")]
        preset: Option<Preset>,
        #[arg(long)]
        n: Option<i64>,
        /// Re-render a tree saved with `--format json` (`-` reads stdin).
        #[arg(long, conflicts_with = "preset")]
        from_json: Option<PathBuf>,
    },
    /// Check algebraic laws on seeded random inputs.
    Laws {
        #[arg(value_parser = parse_suite, default_value = "all")]
        suite: LawSuite,
        /// Random cases per law.
        #[arg(long, default_value_t = 200)]
        budget: usize,
    },
}

#[derive(Subcommand)]
enum Study {
    /// Probability that n dice all show six.
    Allsix {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Mode::Lazy)]
        mode: Mode,
    },
    /// Probability that n dice all show five or six.
    Fiveorsix {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Mode::Lazy)]
        mode: Mode,
    },
    /// Queries on the rain, sprinkler and wet grass network.
    Grass {
        #[arg(long, value_parser = parse_grass, default_value = "rain-and-wet")]
        query: GrassQuery,
    },
    /// Probability that a random string over {a, b} is a palindrome.
    Palindrome {
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
    /// Probability that a random string over {a, b} contains `bb`.
    Bb {
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
    /// Probability that a Secret Santa drawing fails.
    Santa {
        #[arg(long, value_enum, default_value_t = SantaKind::Naive)]
        variant: SantaKind,
        /// Redraw limit for the `repeat` variant.
        #[arg(long, default_value_t = 20)]
        limit: u32,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
        players: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SantaKind {
    Naive,
    NoSelfPick,
    PickAndCheck,
    Repeat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    /// Filter `1..=n` (default 2) with coin comparisons against 42.
    FilterCoin,
    /// Insertion sort of `1..=n` (default 3) with the coin comparator.
    #[value(name = "insertion-sort-3")]
    InsertionSort,
    /// Selection sort of `1..=n` (default 3) with the coin comparator.
    #[value(name = "selection-pickmin-3")]
    SelectionPickMin,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

fn parse_suite(s: &str) -> Result<LawSuite, String> {
    s.parse()
}

fn parse_grass(s: &str) -> Result<GrassQuery, String> {
    s.parse()
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parsing decision tree: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

/// What a command produced.
struct Report {
    result: Value,
    text: String,
    stats: SearchStats,
    ok: bool,
}

/// Twelve significant digits.
fn fmt_prob(p: f64) -> String {
    let rounded: f64 = format!("{p:.11e}").parse().unwrap_or(p);
    rounded.to_string()
}

fn stats_line(s: &SearchStats) -> String {
    format!(
        "choice_expansions={} consistent_follows={} leaves={} failures={}",
        s.choice_expansions, s.consistent_follows, s.leaves, s.failures
    )
}

fn perms(
    run: &RunConfig,
    algo: Algorithm,
    n: i64,
    mode: Mode,
    count_only: bool,
    head_only: bool,
    show_stats: bool,
) -> Result<Report, CliError> {
    let config = run.search();
    let sorted = coin_sorted(algo, mode.into(), n);
    let (values, stats) = if head_only {
        let demanded = lifted::head(&sorted);
        drop(sorted);
        let en = enumerate(demanded, &config)?;
        (en.values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>(), en.stats)
    } else {
        let demanded = nf(&sorted);
        drop(sorted);
        let en = enumerate(demanded, &config)?;
        (en.values.iter().map(|v| show_list(v)).collect(), en.stats)
    };
    let mut text = if count_only {
        values.len().to_string()
    } else {
        values.join("\n")
    };
    if show_stats {
        text.push('\n');
        text.push_str(&stats_line(&stats));
    }
    let mut result = json!({ "algorithm": algo.name(), "n": n, "mode": StrictnessMode::from(mode), "head_only": head_only, "count": values.len() });
    if !count_only {
        result["results"] = json!(values);
    }
    Ok(Report {
        result,
        text,
        stats,
        ok: true,
    })
}

fn probability_report(name: &str, params: Value, outcome: QueryOutcome) -> Report {
    let mut result = json!({ "study": name, "probability": outcome.probability });
    if let (Value::Object(r), Value::Object(p)) = (&mut result, params) {
        r.extend(p);
    }
    Report {
        result,
        text: format!("{}\n{}", fmt_prob(outcome.probability), stats_line(&outcome.stats)),
        stats: outcome.stats,
        ok: true,
    }
}

fn dist(run: &RunConfig, study: Study) -> Result<Report, CliError> {
    let config = run.search();
    let report = match study {
        Study::Allsix { n, mode } => {
            probability_report("allsix", json!({ "n": n, "mode": StrictnessMode::from(mode) }), all_six(mode.into(), n, &config)?)
        }
        Study::Fiveorsix { n, mode } => probability_report(
            "fiveorsix",
            json!({ "n": n, "mode": StrictnessMode::from(mode) }),
            all_five_or_six(mode.into(), n, &config)?,
        ),
        Study::Grass { query } => {
            probability_report("grass", json!({ "query": query.name() }), grass_outcome(query, &config)?)
        }
        Study::Palindrome { n } => {
            probability_report("palindrome", json!({ "n": n }), palindrome_probability(n, &config)?)
        }
        Study::Bb { n } => probability_report("bb", json!({ "n": n }), consecutive_bs_probability(n, &config)?),
        Study::Santa {
            variant,
            limit,
            players,
        } => {
            let v = match variant {
                SantaKind::Naive => SantaVariant::Naive,
                SantaKind::NoSelfPick => SantaVariant::NoSelfPick,
                SantaKind::PickAndCheck => SantaVariant::PickAndCheck,
                SantaKind::Repeat => SantaVariant::Repeat { limit },
            };
            probability_report("santa", json!({ "variant": v, "players": players }), santa_failure(v, players, &config)?)
        }
    };
    Ok(report)
}

fn preset_tree(run: &RunConfig, preset: Preset, n: Option<i64>) -> Result<(DecisionTree, SearchStats), CliError> {
    let config = run.search();
    let cmp = Comparator::<i64>::coin();
    let tree = match preset {
        Preset::FilterCoin => {
            let pivot = Eff::pure(42i64);
            let xs = filter_nd(move |y| coin_choice(&pivot, &y), &from_host(1..=n.unwrap_or(2)));
            decision_tree(&nf(&xs), &config, &|v: &Vec<i64>| show_list(v))?
        }
        Preset::InsertionSort => {
            let xs = lazynd::sortlab::insertion_sort(&cmp, &from_host(1..=n.unwrap_or(3)));
            decision_tree(&nf(&xs), &config, &|v: &Vec<i64>| show_list(v))?
        }
        Preset::SelectionPickMin => {
            let sorted = selection_sort(&cmp, &from_host(1..=n.unwrap_or(3)));
            decision_tree(&nf(&sorted), &config, &|v: &Vec<i64>| show_list(v))?
        }
    };
    Ok(tree)
}

fn read_source(path: &PathBuf) -> Result<String, CliError> {
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io)
    }
}

fn tree(run: &RunConfig, preset: Option<Preset>, n: Option<i64>, from_json: Option<PathBuf>) -> Result<Report, CliError> {
    let (tree, stats) = match (preset, from_json) {
        (_, Some(path)) => {
            let value: Value = serde_json::from_str(&read_source(&path)?)?;
            // Accept either a bare tree or a whole output envelope.
            let inner = value.get("result").and_then(|r| r.get("tree")).cloned().unwrap_or(value);
            (serde_json::from_value::<DecisionTree>(inner)?, SearchStats::default())
        }
        (Some(preset), None) => preset_tree(run, preset, n)?,
        (None, None) => return Err(CliError::Usage("a preset or --from-json is required".into())),
    };
    let text = tree.render().trim_end().to_string();
    let leaves = tree.leaves().len();
    Ok(Report {
        result: json!({ "tree": tree, "leaves": leaves }),
        text,
        stats,
        ok: true,
    })
}

fn laws(run: &RunConfig, suite: LawSuite, budget: usize) -> Report {
    let config = LawConfig {
        seed: run.seed,
        cases: budget,
        tolerance: run.tolerance,
        search: run.search(),
    };
    let outcomes = run_suite(suite, &config);
    let mut lines = Vec::new();
    let mut results = Vec::new();
    for (report, ok) in &outcomes {
        let verdict = if *ok { "PASS" } else { "FAIL" };
        let note = if report.rejected { ", rejected by premise" } else { "" };
        lines.push(format!("{verdict} {} ({} cases{note})", report.name, report.cases));
        if !ok {
            for f in report.failures.iter().take(5) {
                lines.push(format!("  {f}"));
            }
        }
        results.push(json!({ "report": report, "ok": ok }));
    }
    let ok = outcomes.iter().all(|(_, ok)| *ok);
    Report {
        result: json!({ "suite": suite, "passed": ok, "laws": results }),
        text: lines.join("\n"),
        stats: SearchStats::default(),
        ok,
    }
}

/// Writes to stdout, tolerating a closed pipe (`lazynd ... | head`).
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Perms { .. } => "perms",
        Command::Dist { .. } => "dist",
        Command::Tree { .. } => "tree",
        Command::Laws { .. } => "laws",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = cli.run.clone();
    let name = command_name(&cli.command);
    let start = Instant::now();
    let outcome = match cli.command {
        Command::Perms {
            algo,
            n,
            mode,
            count_only,
            head_only,
            stats,
        } => perms(&run, algo, n, mode, count_only, head_only, stats),
        Command::Dist { study } => dist(&run, study),
        Command::Tree { preset, n, from_json } => tree(&run, preset, n, from_json),
        Command::Laws { suite, budget } => Ok(laws(&run, suite, budget)),
    };
    let elapsed_ms = start.elapsed().as_secs_f64() * 1000.0;
    match outcome {
        Ok(report) => {
            match run.format {
                Format::Text => emit(&report.text),
                Format::Json => {
                    let envelope = json!({
                        "command": name,
                        "config": run.to_json(),
                        "result": report.result,
                        "stats": {
                            "choice_expansions": report.stats.choice_expansions,
                            "leaves": report.stats.leaves,
                            "failures": report.stats.failures,
                        },
                        "elapsed_ms": elapsed_ms,
                    });
                    emit(&serde_json::to_string_pretty(&envelope).expect("json values serialize"));
                }
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                CliError::Usage(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
