//! Name similarity and friend-based profile similarity.
//!
//! A target friend contributes to the profile score when some source friend
//! has the same two-letter last-name prefix, a first-name similarity above
//! `alpha` and a last-name similarity above `beta`. Its contribution is the
//! inverse of the expected number of people carrying its full name,
//! `N / (freq(first) * freq(last))`, capped at 1. Each target friend counts
//! at most once.

use std::collections::HashMap;

use crate::config::MatchConfig;
use crate::distance::levenshtein;
use crate::name_model::NameStats;
use crate::profile::FriendName;

/// `1 - lev(a, b) / max(|a|, |b|)`.
pub fn string_similarity(a: &str, b: &str) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / longest as f64
}

/// Blocking key for the last-name prefix rule. Names of one letter only
/// match other one-letter names.
fn prefix_key(last: &str) -> (u8, u8, bool) {
    match last.as_bytes() {
        [a, b, ..] => (*a, *b, false),
        [a] => (*a, 0, true),
        [] => (0, 0, true),
    }
}

pub fn last_name_prefixes_match(a: &str, b: &str) -> bool {
    prefix_key(a) == prefix_key(b)
}

pub fn friends_match(src: FriendName<'_>, tgt: FriendName<'_>, cfg: &MatchConfig) -> bool {
    last_name_prefixes_match(src.1, tgt.1)
        && string_similarity(src.0, tgt.0) > cfg.alpha
        && string_similarity(src.1, tgt.1) > cfg.beta
}

/// `min(1, N / (freq(first) * freq(last)))`; names unseen in the stats
/// weigh 1.
pub fn friend_weight(tgt: FriendName<'_>, stats: &NameStats) -> f64 {
    let f = stats.first_freq(tgt.0);
    let l = stats.last_freq(tgt.1);
    if f == 0 || l == 0 {
        return 1.0;
    }
    (stats.total() as f64 / (f as f64 * l as f64)).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FriendScore {
    pub score: f64,
    /// Target friends that contributed to `score`.
    pub matched_friends: usize,
}

/// Source-side friend list grouped by last-name prefix, reusable across all
/// candidates of one source profile.
pub struct SourceFriends<'a> {
    groups: HashMap<(u8, u8, bool), Vec<FriendName<'a>>>,
}

impl<'a> SourceFriends<'a> {
    pub fn new(friends: &[FriendName<'a>]) -> Self {
        let mut groups: HashMap<_, Vec<FriendName<'a>>> = HashMap::new();
        for &f in friends {
            groups.entry(prefix_key(f.1)).or_default().push(f);
        }
        SourceFriends { groups }
    }

    /// True if any source friend matches `tgt`.
    pub fn matches(&self, tgt: FriendName<'_>, cfg: &MatchConfig) -> bool {
        self.groups.get(&prefix_key(tgt.1)).is_some_and(|group| {
            group
                .iter()
                .any(|&s| string_similarity(s.0, tgt.0) > cfg.alpha && string_similarity(s.1, tgt.1) > cfg.beta)
        })
    }

    /// Sum of weights of matching target friends, in target-list order.
    pub fn score(&self, tgt_friends: &[FriendName<'_>], stats: &NameStats, cfg: &MatchConfig) -> FriendScore {
        let mut out = FriendScore::default();
        if self.groups.is_empty() {
            return out;
        }
        for &t in tgt_friends {
            if self.matches(t, cfg) {
                out.score += friend_weight(t, stats);
                out.matched_friends += 1;
            }
        }
        out
    }
}

pub fn profile_similarity(
    src_friends: &[FriendName<'_>],
    tgt_friends: &[FriendName<'_>],
    stats: &NameStats,
    cfg: &MatchConfig,
) -> FriendScore {
    SourceFriends::new(src_friends).score(tgt_friends, stats, cfg)
}
