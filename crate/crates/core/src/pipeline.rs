//! Batch driver: fan `match_one` out over all source profiles, resolve
//! conflicts on the target side, write results.
//!
//! Every worker shares read-only references to the target network, its name
//! statistics, the candidate index and the synonym dictionary. Source
//! profiles are cut into contiguous shards; shard outputs are concatenated in
//! shard order, so the result does not depend on the number of workers.
//!
//! Matching runs source -> target and keeps the whole target side in memory,
//! so the smaller network should be the target.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::config::MatchConfig;
use crate::error::{Error, Result};
use crate::eval::{self, PRPoint, RecallBase};
use crate::index::CandidateIndex;
use crate::matcher::{MatchDecision, Matcher, Reason};
use crate::name_model::{NameStats, SynonymDictionary};
use crate::profile::Network;

pub const MATCH_HEADER: [&str; 5] = ["source_id", "target_id", "score", "runner_up_score", "reason"];
pub const LOG_HEADER: [&str; 7] = [
    "source_id",
    "target_id",
    "score",
    "runner_up_score",
    "reason",
    "best_candidate",
    "candidates",
];

/// Target network with everything built from it.
pub struct TargetSide {
    pub network: Network,
    pub stats: NameStats,
    pub index: CandidateIndex,
}

impl TargetSide {
    pub fn build(network: Network, candidate_distance: u8) -> Result<Self> {
        let stats = NameStats::build(network.profiles())?;
        let index = CandidateIndex::build(network.profiles(), candidate_distance)?;
        Ok(TargetSide { network, stats, index })
    }

    /// Like [`TargetSide::build`], but reuses a saved index when it matches
    /// the network and bound, and saves a fresh one otherwise.
    pub fn build_cached(network: Network, candidate_distance: u8, cache: &Path) -> Result<Self> {
        let stats = NameStats::build(network.profiles())?;
        let cached = CandidateIndex::load(cache, network.profiles())
            .ok()
            .filter(|idx| idx.bound() == candidate_distance);
        let index = match cached {
            Some(idx) => {
                log::info!("reusing candidate index {}", cache.display());
                idx
            }
            None => {
                let idx = CandidateIndex::build(network.profiles(), candidate_distance)?;
                idx.save(cache)?;
                idx
            }
        };
        Ok(TargetSide { network, stats, index })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchRun {
    pub config: MatchConfig,
    pub workers: usize,
    pub source_count: usize,
    pub target_count: usize,
    pub matched_count: usize,
    pub tallies: BTreeMap<Reason, usize>,
    pub unresolved_friends: usize,
    pub wall_time: Duration,
    pub evaluation: Option<PRPoint>,
}

impl MatchRun {
    pub fn summary(&self) -> String {
        let tallies: Vec<String> = self.tallies.iter().map(|(r, n)| format!("{r}={n}")).collect();
        let mut s = format!(
            "sources={} targets={} matched={} workers={} time={:.2}s [{}]",
            self.source_count,
            self.target_count,
            self.matched_count,
            self.workers,
            self.wall_time.as_secs_f64(),
            tallies.join(" ")
        );
        if let Some(p) = &self.evaluation {
            s.push_str(&format!(" precision={:.4} recall={:.4}", p.precision, p.recall));
        }
        s
    }
}

/// Keeps, per target, only the highest-scoring matched decision (ties go to
/// the smaller source id); the others become `LostDedup`.
pub fn dedup_targets(decisions: &mut [MatchDecision]) {
    let mut claims: Vec<usize> = decisions
        .iter()
        .enumerate()
        .filter(|(_, d)| d.reason == Reason::Matched)
        .map(|(i, _)| i)
        .collect();
    claims.sort_by(|&a, &b| {
        let (da, db) = (&decisions[a], &decisions[b]);
        da.target_id
            .cmp(&db.target_id)
            .then_with(|| db.score.total_cmp(&da.score))
            .then_with(|| da.source_id.cmp(&db.source_id))
    });
    // claims are grouped by target with the winner first
    let mut current: Option<String> = None;
    for i in claims {
        let d = &mut decisions[i];
        if d.target_id == current {
            d.reason = Reason::LostDedup;
            d.target_id = None;
        } else {
            current = d.target_id.clone();
        }
    }
}

/// Matches every source profile and applies target-side dedup. Decisions are
/// returned sorted by source id.
pub fn match_all(
    source: &Network,
    target: &TargetSide,
    synonyms: &SynonymDictionary,
    config: &MatchConfig,
    workers: usize,
) -> Result<Vec<MatchDecision>> {
    config.validate()?;
    if target.index.bound() != config.candidate_distance {
        return Err(Error::config(
            "candidate_distance",
            format!(
                "index was built with distance {}, config asks for {}",
                target.index.bound(),
                config.candidate_distance
            ),
        ));
    }
    let matcher = Matcher {
        source,
        target: &target.network,
        index: &target.index,
        synonyms,
        stats: &target.stats,
        config: *config,
    };
    let workers = workers.max(1);
    let n = source.len();
    let shard = n.div_ceil(workers * 8).max(1);
    let shards: Vec<(usize, usize)> = (0..n).step_by(shard).map(|lo| (lo, (lo + shard).min(n))).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let per_shard: Vec<Vec<MatchDecision>> = pool.install(|| {
        shards
            .par_iter()
            .map(|&(lo, hi)| (lo..hi).map(|i| matcher.match_one(i)).collect())
            .collect()
    });
    let mut decisions: Vec<MatchDecision> = per_shard.into_iter().flatten().collect();
    dedup_targets(&mut decisions);
    decisions.sort_by(|a, b| a.source_id.cmp(&b.source_id));
    Ok(decisions)
}

pub fn tally(decisions: &[MatchDecision]) -> BTreeMap<Reason, usize> {
    let mut t = BTreeMap::new();
    for d in decisions {
        *t.entry(d.reason).or_insert(0) += 1;
    }
    t
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Matched decisions only, `source_id,target_id,score,runner_up_score,reason`.
pub fn write_matches(w: impl Write, decisions: &[MatchDecision]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(MATCH_HEADER)?;
    for d in decisions.iter().filter(|d| d.reason == Reason::Matched) {
        out.write_record([
            d.source_id.as_str(),
            d.target_id.as_deref().unwrap_or_default(),
            &d.score.to_string(),
            &opt_f64(d.runner_up_score),
            d.reason.as_str(),
        ])?;
    }
    out.flush().map_err(|e| Error::io("<matches>", e))?;
    Ok(())
}

/// Every decision, with the top-ranked candidate and candidate count
/// appended so thresholds can be re-applied later.
pub fn write_decision_log(w: impl Write, decisions: &[MatchDecision]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(LOG_HEADER)?;
    for d in decisions {
        let score = if d.best_candidate.is_some() {
            d.score.to_string()
        } else {
            String::new()
        };
        out.write_record([
            d.source_id.as_str(),
            d.target_id.as_deref().unwrap_or_default(),
            &score,
            &opt_f64(d.runner_up_score),
            d.reason.as_str(),
            d.best_candidate.as_deref().unwrap_or_default(),
            &d.candidate_count.to_string(),
        ])?;
    }
    out.flush().map_err(|e| Error::io("<decision log>", e))?;
    Ok(())
}

pub fn read_decision_log(path: impl AsRef<Path>) -> Result<Vec<MatchDecision>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let mut out = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 2;
        let rec = rec?;
        if rec.len() != LOG_HEADER.len() {
            return Err(Error::parse(
                path,
                line,
                format!("expected {} fields", LOG_HEADER.len()),
            ));
        }
        let num = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse()
                    .map(Some)
                    .map_err(|_| Error::parse(path, line, format!("bad number {s:?}")))
            }
        };
        let opt = |s: &str| (!s.is_empty()).then(|| s.to_string());
        out.push(MatchDecision {
            source_id: rec[0].to_string(),
            target_id: opt(&rec[1]),
            score: num(&rec[2])?.unwrap_or(0.0),
            runner_up_score: num(&rec[3])?,
            reason: rec[4].parse().map_err(|e: String| Error::parse(path, line, e))?,
            best_candidate: opt(&rec[5]),
            candidate_count: rec[6]
                .parse()
                .map_err(|_| Error::parse(path, line, "bad candidate count"))?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub source: PathBuf,
    pub target: PathBuf,
    pub out: PathBuf,
    pub synonyms: Option<PathBuf>,
    pub decision_log: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub index_cache: Option<PathBuf>,
    pub workers: usize,
    pub config: MatchConfig,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Loads both networks, matches, writes the match file (and optionally the
/// decision log), and evaluates against ground truth when given.
pub fn run_match(opts: &RunOptions) -> Result<MatchRun> {
    opts.config.validate()?;
    let started = Instant::now();
    let source = Network::load(&opts.source)?;
    let target = Network::load(&opts.target)?;
    let synonyms = match &opts.synonyms {
        Some(p) => SynonymDictionary::load(p)?,
        None => SynonymDictionary::empty(),
    };
    let target_count = target.len();
    let unresolved_friends = source.diagnostics().unresolved_friends + target.diagnostics().unresolved_friends;
    let decisions = if target.is_empty() {
        // nothing to match against
        source
            .profiles()
            .iter()
            .map(|p| MatchDecision {
                source_id: p.id.clone(),
                target_id: None,
                score: 0.0,
                runner_up_score: None,
                reason: Reason::NoCandidates,
                best_candidate: None,
                candidate_count: 0,
            })
            .collect::<Vec<_>>()
    } else {
        let side = match &opts.index_cache {
            Some(cache) => TargetSide::build_cached(target, opts.config.candidate_distance, cache)?,
            None => TargetSide::build(target, opts.config.candidate_distance)?,
        };
        let mut d = match_all(&source, &side, &synonyms, &opts.config, opts.workers)?;
        d.sort_by(|a, b| a.source_id.cmp(&b.source_id));
        d
    };

    let mut w = create(&opts.out)?;
    write_matches(&mut w, &decisions)?;
    w.flush().map_err(|e| Error::io(&opts.out, e))?;
    if let Some(log_path) = &opts.decision_log {
        let mut w = create(log_path)?;
        write_decision_log(&mut w, &decisions)?;
        w.flush().map_err(|e| Error::io(log_path, e))?;
    }

    let evaluation = match &opts.truth {
        Some(t) => {
            let truth = eval::read_truth(t)?;
            let emitted = eval::matched_pairs(&decisions);
            Some(eval::evaluate_pairs(
                &emitted,
                &truth,
                &RecallBase::SourcePresent(&source),
                opts.config.gamma,
                opts.config.delta,
            ))
        }
        None => None,
    };

    let tallies = tally(&decisions);
    Ok(MatchRun {
        config: opts.config,
        workers: opts.workers.max(1),
        source_count: source.len(),
        target_count,
        matched_count: tallies.get(&Reason::Matched).copied().unwrap_or(0),
        tallies,
        unresolved_friends,
        wall_time: started.elapsed(),
        evaluation,
    })
}
