//! Precision/recall against ground truth, threshold grid search over a
//! decision log, and synthetic corpora with a known alignment.

mod synth;

pub use synth::{generate_synthetic, SynthReport, SynthSpec, SyntheticCorpus};

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matcher::{decide, MatchDecision, Reason};
use crate::pipeline::dedup_targets;
use crate::profile::Network;

pub type Pair = (String, String);

/// Which ground-truth pairs count in the recall denominator.
#[derive(Debug, Clone, Copy)]
pub enum RecallBase<'a> {
    /// Every truth pair.
    AllPairs,
    /// Pairs whose source id is in the source network.
    SourcePresent(&'a Network),
    /// Pairs whose source profile is present and has at least one resolved
    /// friend.
    SourceWithFriends(&'a Network),
}

impl RecallBase<'_> {
    fn admits(&self, source_id: &str) -> bool {
        match self {
            RecallBase::AllPairs => true,
            RecallBase::SourcePresent(n) => n.index_of(source_id).is_some(),
            RecallBase::SourceWithFriends(n) => n.index_of(source_id).is_some_and(|i| n.friend_count(i) > 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PRPoint {
    pub gamma: f64,
    pub delta: f64,
    pub precision: f64,
    pub recall: f64,
    pub matched: usize,
    pub correct: usize,
    pub evaluable: usize,
    /// Set when nothing was emitted and precision is 1 by convention.
    pub degenerate: bool,
}

/// Reads `source_id,target_id` rows; a header row is optional.
pub fn read_truth(path: impl AsRef<Path>) -> Result<Vec<Pair>> {
    read_pairs(path.as_ref(), "source_id")
}

/// Reads the `source_id,target_id` columns of a match output file.
pub fn read_matches(path: impl AsRef<Path>) -> Result<Vec<Pair>> {
    read_pairs(path.as_ref(), "source_id")
}

fn read_pairs(path: &Path, header_first: &str) -> Result<Vec<Pair>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let mut out = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if idx == 0 && rec.get(0).map(str::trim) == Some(header_first) {
            continue;
        }
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        if rec.len() < 2 {
            return Err(Error::parse(path, idx + 1, "expected source_id,target_id"));
        }
        let (s, t) = (rec[0].trim(), rec[1].trim());
        if s.is_empty() || t.is_empty() {
            return Err(Error::parse(path, idx + 1, "empty id"));
        }
        out.push((s.to_string(), t.to_string()));
    }
    Ok(out)
}

/// `(source, target)` of every matched decision.
pub fn matched_pairs(decisions: &[MatchDecision]) -> Vec<Pair> {
    decisions
        .iter()
        .filter(|d| d.reason == Reason::Matched)
        .filter_map(|d| d.target_id.as_ref().map(|t| (d.source_id.clone(), t.clone())))
        .collect()
}

pub fn evaluate_pairs(emitted: &[Pair], truth: &[Pair], base: &RecallBase<'_>, gamma: f64, delta: f64) -> PRPoint {
    let truth_set: HashSet<(&str, &str)> = truth.iter().map(|(s, t)| (s.as_str(), t.as_str())).collect();
    let evaluable: HashSet<(&str, &str)> = truth_set.iter().copied().filter(|(s, _)| base.admits(s)).collect();
    let emitted_set: HashSet<(&str, &str)> = emitted.iter().map(|(s, t)| (s.as_str(), t.as_str())).collect();
    let correct = emitted_set.iter().filter(|p| truth_set.contains(*p)).count();
    let recalled = emitted_set.iter().filter(|p| evaluable.contains(*p)).count();
    let degenerate = emitted_set.is_empty();
    PRPoint {
        gamma,
        delta,
        precision: if degenerate {
            1.0
        } else {
            correct as f64 / emitted_set.len() as f64
        },
        recall: if evaluable.is_empty() {
            0.0
        } else {
            recalled as f64 / evaluable.len() as f64
        },
        matched: emitted_set.len(),
        correct,
        evaluable: evaluable.len(),
        degenerate,
    }
}

/// Re-applies the threshold rule and target dedup to a decision log.
pub fn replay(log: &[MatchDecision], gamma: f64, delta: f64) -> Vec<Pair> {
    let mut decisions: Vec<MatchDecision> = log
        .iter()
        .map(|d| {
            let mut d = d.clone();
            d.target_id = None;
            d.reason = Reason::NoCandidates;
            if let Some(best) = &d.best_candidate {
                d.reason = decide(d.score, d.runner_up_score, gamma, delta);
                if d.reason == Reason::Matched {
                    d.target_id = Some(best.clone());
                }
            }
            d
        })
        .collect();
    dedup_targets(&mut decisions);
    let mut pairs = matched_pairs(&decisions);
    pairs.sort();
    pairs
}

pub fn grid_search(
    log: &[MatchDecision],
    gammas: &[f64],
    deltas: &[f64],
    truth: &[Pair],
    base: &RecallBase<'_>,
) -> Vec<PRPoint> {
    let mut points = Vec::with_capacity(gammas.len() * deltas.len());
    for &g in gammas {
        for &d in deltas {
            points.push(evaluate_pairs(&replay(log, g, d), truth, base, g, d));
        }
    }
    points
}

/// Points not dominated in both precision and recall, by ascending recall.
pub fn pareto_frontier(points: &[PRPoint]) -> Vec<PRPoint> {
    let mut front: Vec<PRPoint> = points
        .iter()
        .filter(|p| {
            !points.iter().any(|q| {
                q.precision >= p.precision && q.recall >= p.recall && (q.precision > p.precision || q.recall > p.recall)
            })
        })
        .copied()
        .collect();
    front.sort_by(|a, b| {
        a.recall
            .total_cmp(&b.recall)
            .then_with(|| b.precision.total_cmp(&a.precision))
            .then_with(|| a.gamma.total_cmp(&b.gamma))
            .then_with(|| a.delta.total_cmp(&b.delta))
    });
    front
}

/// Parses `min:max:step` into the inclusive list `min, min+step, ...`.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let bad = |msg: &str| Error::config(spec, msg.to_string());
    let parts: Vec<&str> = spec.split(':').collect();
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad("expected numbers in min:max:step"))?;
    match nums.as_slice() {
        [v] => Ok(vec![*v]),
        [lo, hi, step] => {
            if !(step > &0.0) || hi < lo || !lo.is_finite() || !hi.is_finite() {
                return Err(bad("need min <= max and step > 0"));
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| lo + i as f64 * step).collect())
        }
        _ => Err(bad("expected min:max:step")),
    }
}

/// `gamma,delta,precision,recall,matched`.
pub fn write_points(w: impl Write, points: &[PRPoint]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["gamma", "delta", "precision", "recall", "matched"])?;
    for p in points {
        out.write_record([
            p.gamma.to_string(),
            p.delta.to_string(),
            p.precision.to_string(),
            p.recall.to_string(),
            p.matched.to_string(),
        ])?;
    }
    out.flush().map_err(|e| Error::io("<points>", e))?;
    Ok(())
}
