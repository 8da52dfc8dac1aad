use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use snlink::config::{parse_override, CONFIG_KEYS};
use snlink::eval::{self, RecallBase, SynthSpec};
use snlink::name_model::{name_pairs_from_truth, SynonymDictionary, DEFAULT_REVIEW_LIMIT};
use snlink::pipeline::{self, RunOptions};
use snlink::{MatchConfig, Network};

fn config_help() -> String {
    let mut s = String::from("Config keys (key=value file via --config, or --set key=value):\n");
    for (key, default, what) in CONFIG_KEYS {
        s.push_str(&format!("  {key:<20} default {default:<5} {what}\n"));
    }
    s
}

#[derive(Parser)]
#[command(
    name = "snlink",
    version,
    about = "Match user profiles across two social networks by names and friend lists"
)]
struct Cli {
    /// key=value config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Config overrides applied after the file, later wins
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Worker threads for matching
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    /// Increase log verbosity (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn first-name synonym classes from known matched pairs
    BuildSynonyms(BuildSynonymsArgs),
    /// Match every source profile against the target network
    #[command(after_help = config_help())]
    Match(MatchArgs),
    /// Precision and recall of a match file against ground truth
    Evaluate(EvaluateArgs),
    /// Re-apply gamma/delta over a grid using a decision log
    GridSearch(GridArgs),
    /// Generate a synthetic source/target corpus with planted matches
    GenSynthetic(GenArgs),
    /// Print the effective configuration
    #[command(after_help = config_help())]
    ShowConfig,
}

#[derive(Args)]
struct BuildSynonymsArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// source_id,target_id pairs known to be the same person
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides synonym_min_count from the config
    #[arg(long)]
    min_count: Option<u64>,
    /// Classes larger than this are flagged in the export
    #[arg(long, default_value_t = DEFAULT_REVIEW_LIMIT)]
    review_limit: usize,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    synonyms: Option<PathBuf>,
    /// Write every decision, including non-matches
    #[arg(long)]
    log_decisions: Option<PathBuf>,
    /// Evaluate the run against this ground truth
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Reuse or create a saved candidate index
    #[arg(long)]
    index_cache: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Base {
    All,
    Present,
    WithFriends,
}

#[derive(Args)]
struct RecallArgs {
    /// Source profile file, needed for the present/with-friends bases
    #[arg(long)]
    source: Option<PathBuf>,
    /// Which truth pairs count in the recall denominator
    #[arg(long, value_enum, default_value_t = Base::Present)]
    recall_base: Base,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    matches: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[command(flatten)]
    recall: RecallArgs,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// min:max:step
    #[arg(long, default_value = "1:4:0.25")]
    gamma: String,
    /// min:max:step
    #[arg(long, default_value = "3:6:0.25")]
    delta: String,
    #[arg(long)]
    out: PathBuf,
    /// Also write the precision/recall frontier here
    #[arg(long)]
    frontier: Option<PathBuf>,
    #[command(flatten)]
    recall: RecallArgs,
}

#[derive(Args)]
struct GenArgs {
    /// key=value corpus spec; defaults used when omitted
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

fn load_config(cli: &Cli) -> Result<MatchConfig> {
    let overrides = cli
        .overrides
        .iter()
        .map(|s| parse_override(s))
        .collect::<snlink::Result<Vec<_>>>()?;
    Ok(MatchConfig::load(cli.config.as_deref(), &overrides)?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn with_base<T>(args: &RecallArgs, f: impl FnOnce(&RecallBase<'_>) -> T) -> Result<T> {
    let net = match &args.source {
        Some(p) => Some(Network::load(p)?),
        None => None,
    };
    let base = match (args.recall_base, &net) {
        (Base::All, _) | (Base::Present, None) => RecallBase::AllPairs,
        (Base::Present, Some(n)) => RecallBase::SourcePresent(n),
        (Base::WithFriends, Some(n)) => RecallBase::SourceWithFriends(n),
        (Base::WithFriends, None) => bail!("--recall-base with-friends needs --source"),
    };
    Ok(f(&base))
}

fn run(cli: &Cli) -> Result<()> {
    if cli.workers == 0 {
        bail!("--workers must be at least 1");
    }
    match &cli.command {
        Command::ShowConfig => {
            print!("{}", load_config(cli)?.to_key_values());
        }
        Command::BuildSynonyms(a) => {
            let cfg = load_config(cli)?;
            let source = Network::load(&a.source)?;
            let target = Network::load(&a.target)?;
            let truth = eval::read_truth(&a.truth)?;
            let (pairs, diag) = name_pairs_from_truth(&source, &target, &truth);
            let min_count = a.min_count.unwrap_or(cfg.synonym_min_count);
            let dict = SynonymDictionary::build(&pairs, min_count);
            let mut w = create(&a.out)?;
            dict.export(&mut w, a.review_limit)?;
            w.flush()?;
            println!(
                "pairs={} identical={} unresolved={} distinct_name_pairs={} classes={}",
                diag.pairs_seen,
                diag.identical_names,
                diag.unresolved,
                pairs.len(),
                dict.len()
            );
        }
        Command::Match(a) => {
            let opts = RunOptions {
                source: a.source.clone(),
                target: a.target.clone(),
                out: a.out.clone(),
                synonyms: a.synonyms.clone(),
                decision_log: a.log_decisions.clone(),
                truth: a.truth.clone(),
                index_cache: a.index_cache.clone(),
                workers: cli.workers,
                config: load_config(cli)?,
            };
            let run = pipeline::run_match(&opts)?;
            log::info!("config: {:?}", run.config);
            println!("{}", run.summary());
        }
        Command::Evaluate(a) => {
            let cfg = load_config(cli)?;
            let emitted = eval::read_matches(&a.matches)?;
            let truth = eval::read_truth(&a.truth)?;
            let p = with_base(&a.recall, |base| {
                eval::evaluate_pairs(&emitted, &truth, base, cfg.gamma, cfg.delta)
            })?;
            println!(
                "precision={} recall={} matched={} correct={} evaluable={}{}",
                p.precision,
                p.recall,
                p.matched,
                p.correct,
                p.evaluable,
                if p.degenerate {
                    " (no matches emitted; precision set to 1)"
                } else {
                    ""
                }
            );
        }
        Command::GridSearch(a) => {
            let gammas = eval::parse_range(&a.gamma)?;
            let deltas = eval::parse_range(&a.delta)?;
            let log = pipeline::read_decision_log(&a.log)?;
            let truth = eval::read_truth(&a.truth)?;
            let points = with_base(&a.recall, |base| {
                eval::grid_search(&log, &gammas, &deltas, &truth, base)
            })?;
            let mut w = create(&a.out)?;
            eval::write_points(&mut w, &points)?;
            w.flush()?;
            let front = eval::pareto_frontier(&points);
            if let Some(path) = &a.frontier {
                let mut w = create(path)?;
                eval::write_points(&mut w, &front)?;
                w.flush()?;
            }
            println!("points={} frontier={}", points.len(), front.len());
            for p in &front {
                println!(
                    "  gamma={} delta={} precision={:.4} recall={:.4} matched={}",
                    p.gamma, p.delta, p.precision, p.recall, p.matched
                );
            }
        }
        Command::GenSynthetic(a) => {
            let spec = match &a.spec {
                Some(p) => {
                    SynthSpec::parse(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?
                }
                None => SynthSpec::default(),
            };
            let corpus = eval::generate_synthetic(&spec, a.seed)?;
            corpus.write(&a.out_dir)?;
            let r = &corpus.report;
            println!(
                "planted={} typos={} nickname_swaps={} aliases={} source_friend_refs={}/{}",
                r.planted_pairs,
                r.typos,
                r.nickname_swaps,
                r.aliases,
                r.source_friend_refs,
                r.source_friend_refs_before_dropout
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
