//! Per-profile matching: candidates, ranking, and the threshold rule.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::config::MatchConfig;
use crate::index::CandidateIndex;
use crate::name_model::{NameStats, SynonymDictionary};
use crate::profile::Network;
use crate::scoring::SourceFriends;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Reason {
    Matched,
    BelowGamma,
    RatioTooLow,
    NoCandidates,
    /// Another source claimed the same target with a higher score.
    LostDedup,
}

impl Reason {
    pub const ALL: [Reason; 5] = [
        Reason::Matched,
        Reason::BelowGamma,
        Reason::RatioTooLow,
        Reason::NoCandidates,
        Reason::LostDedup,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Reason::Matched => "matched",
            Reason::BelowGamma => "below_gamma",
            Reason::RatioTooLow => "ratio_too_low",
            Reason::NoCandidates => "no_candidates",
            Reason::LostDedup => "lost_dedup",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Reason {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Reason::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown reason {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchDecision {
    pub source_id: String,
    /// Present iff `reason == Matched`.
    pub target_id: Option<String>,
    /// Score of the top-ranked candidate, 0 without candidates.
    pub score: f64,
    pub runner_up_score: Option<f64>,
    pub reason: Reason,
    /// Top-ranked candidate whether or not it was accepted.
    pub best_candidate: Option<String>,
    pub candidate_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredCandidate {
    /// Index into the target network.
    pub target: u32,
    pub score: f64,
    pub matched_friends: usize,
}

/// The threshold rule on the top two scores. A NaN score never passes.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn decide(best: f64, runner_up: Option<f64>, gamma: f64, delta: f64) -> Reason {
    if !(best > gamma) {
        return Reason::BelowGamma;
    }
    match runner_up {
        None => Reason::Matched,
        Some(r) if r <= 0.0 => Reason::Matched,
        Some(r) if best / r > delta => Reason::Matched,
        Some(_) => Reason::RatioTooLow,
    }
}

/// Descending score, then ascending target id.
pub fn rank_order(a: (&str, f64), b: (&str, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0))
}

/// Read-only matching context shared by all workers.
pub struct Matcher<'a> {
    pub source: &'a Network,
    pub target: &'a Network,
    pub index: &'a CandidateIndex,
    pub synonyms: &'a SynonymDictionary,
    pub stats: &'a NameStats,
    pub config: MatchConfig,
}

impl<'a> Matcher<'a> {
    /// Scores `candidates` against source profile `src` and ranks them.
    pub fn rank_candidates(&self, src: usize, candidates: &[u32]) -> Vec<ScoredCandidate> {
        let friends = self.source.friend_names(src);
        let scorer = SourceFriends::new(&friends);
        let mut ranked: Vec<ScoredCandidate> = candidates
            .iter()
            .map(|&t| {
                let s = scorer.score(&self.target.friend_names(t as usize), self.stats, &self.config);
                ScoredCandidate {
                    target: t,
                    score: s.score,
                    matched_friends: s.matched_friends,
                }
            })
            .collect();
        ranked.sort_by(|a, b| {
            rank_order(
                (&self.target.profile(a.target as usize).id, a.score),
                (&self.target.profile(b.target as usize).id, b.score),
            )
        });
        ranked
    }

    pub fn match_one(&self, src: usize) -> MatchDecision {
        let profile = self.source.profile(src);
        let candidates = self.index.generate_candidates(profile, self.synonyms);
        let ranked = self.rank_candidates(src, &candidates);
        let mut decision = MatchDecision {
            source_id: profile.id.clone(),
            target_id: None,
            score: 0.0,
            runner_up_score: None,
            reason: Reason::NoCandidates,
            best_candidate: None,
            candidate_count: ranked.len(),
        };
        let Some(best) = ranked.first() else {
            return decision;
        };
        let best_id = self.target.profile(best.target as usize).id.clone();
        decision.score = best.score;
        decision.runner_up_score = ranked.get(1).map(|c| c.score);
        decision.reason = decide(
            best.score,
            decision.runner_up_score,
            self.config.gamma,
            self.config.delta,
        );
        if decision.reason == Reason::Matched {
            decision.target_id = Some(best_id.clone());
        }
        decision.best_candidate = Some(best_id);
        decision
    }
}
