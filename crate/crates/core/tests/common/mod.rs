//! Independent reference implementations used by the integration tests and
//! the acceptance suite. Nothing here calls the code under test except for
//! plain data types.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Cursor;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use snlink::name_model::{NamePair, NameStats, SynonymDictionary};
use snlink::{CanonicalName, MatchConfig, Network, Profile};

/// Edit distance by memoized recursion over chars.
pub fn lev_oracle(a: &str, b: &str) -> usize {
    fn go(a: &[char], b: &[char], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == a.len() {
            return b.len() - j;
        }
        if j == b.len() {
            return a.len() - i;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let v = if a[i] == b[j] {
            go(a, b, i + 1, j + 1, memo)
        } else {
            1 + go(a, b, i + 1, j, memo)
                .min(go(a, b, i, j + 1, memo))
                .min(go(a, b, i + 1, j + 1, memo))
        };
        memo.insert((i, j), v);
        v
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    go(&a, &b, 0, 0, &mut HashMap::new())
}

pub fn sim_oracle(a: &str, b: &str) -> f64 {
    let m = a.chars().count().max(b.chars().count());
    if m == 0 {
        return 1.0;
    }
    1.0 - lev_oracle(a, b) as f64 / m as f64
}

pub fn random_name(rng: &mut ChaCha8Rng, alphabet: &[u8], min: usize, max: usize) -> String {
    let len = rng.random_range(min..=max);
    (0..len)
        .map(|_| alphabet[rng.random_range(0..alphabet.len())] as char)
        .collect()
}

/// A random name plus a few edits, to get near misses as well as far pairs.
pub fn perturb(rng: &mut ChaCha8Rng, name: &str, alphabet: &[u8], edits: usize) -> String {
    let mut s: Vec<u8> = name.bytes().collect();
    for _ in 0..edits {
        let c = alphabet[rng.random_range(0..alphabet.len())];
        match rng.random_range(0..3) {
            0 if !s.is_empty() => {
                let i = rng.random_range(0..s.len());
                s[i] = c;
            }
            1 if s.len() > 1 => {
                s.remove(rng.random_range(0..s.len()));
            }
            _ => {
                let i = rng.random_range(0..=s.len());
                s.insert(i, c);
            }
        }
    }
    String::from_utf8(s).unwrap()
}

pub fn canon(s: &str) -> CanonicalName {
    snlink::romanize(s).unwrap()
}

/// Brute-force candidate predicate over every target profile.
pub fn brute_candidates(
    targets: &[Profile],
    first: &str,
    last: &str,
    synonyms: &SynonymDictionary,
    bound: usize,
) -> Vec<u32> {
    let close = |a: &str, b: &str| a.chars().next() == b.chars().next() && lev_oracle(a, b) <= bound;
    let variants: Vec<String> = match synonyms
        .classes()
        .iter()
        .find(|c| c.iter().any(|n| n.as_str() == first))
    {
        Some(class) => class.iter().map(|n| n.to_string()).collect(),
        None => vec![first.to_string()],
    };
    targets
        .iter()
        .enumerate()
        .filter(|(_, t)| close(last, &t.last) && variants.iter().any(|v| close(v, &t.first)))
        .map(|(i, _)| i as u32)
        .collect()
}

/// Connected components (size >= 2) of the pairs with `count >= min_count`,
/// by repeated graph search.
pub fn components_oracle(pairs: &[NamePair], min_count: u64) -> BTreeSet<BTreeSet<String>> {
    let mut adj: HashMap<String, Vec<String>> = HashMap::new();
    for p in pairs.iter().filter(|p| p.count >= min_count) {
        adj.entry(p.a.to_string()).or_default().push(p.b.to_string());
        adj.entry(p.b.to_string()).or_default().push(p.a.to_string());
    }
    let mut seen = HashSet::new();
    let mut out = BTreeSet::new();
    let mut names: Vec<&String> = adj.keys().collect();
    names.sort();
    for start in names {
        if seen.contains(start) {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut stack = vec![start.clone()];
        while let Some(n) = stack.pop() {
            if !seen.insert(n.clone()) {
                continue;
            }
            for m in &adj[&n] {
                stack.push(m.clone());
            }
            comp.insert(n);
        }
        if comp.len() > 1 {
            out.insert(comp);
        }
    }
    out
}

pub fn dictionary_classes(dict: &SynonymDictionary) -> BTreeSet<BTreeSet<String>> {
    dict.classes()
        .iter()
        .map(|c| c.iter().map(|n| n.to_string()).collect())
        .collect()
}

/// Reference profile score: for each target friend in order, add its weight
/// once if any source friend matches it.
pub fn score_oracle(src: &[(String, String)], tgt: &[(String, String)], stats: &NameStats, cfg: &MatchConfig) -> f64 {
    let prefix_ok = |a: &str, b: &str| {
        if a.len() >= 2 && b.len() >= 2 {
            a.as_bytes()[..2] == b.as_bytes()[..2]
        } else {
            a.len() < 2 && b.len() < 2 && a == b
        }
    };
    let mut total = 0.0;
    for (tf, tl) in tgt {
        let mut hit = false;
        for (sf, sl) in src {
            if prefix_ok(sl, tl) && sim_oracle(sf, tf) > cfg.alpha && sim_oracle(sl, tl) > cfg.beta {
                hit = true;
                break;
            }
        }
        if hit {
            let f = stats.first_names().get(tf).copied().unwrap_or(0);
            let l = stats.last_names().get(tl).copied().unwrap_or(0);
            total += if f == 0 || l == 0 {
                1.0
            } else {
                (stats.total() as f64 / (f as f64 * l as f64)).min(1.0)
            };
        }
    }
    total
}

/// Parses `id<TAB>first<TAB>last<TAB>friends` lines.
pub fn network(text: &str) -> Network {
    Network::read(Cursor::new(text.as_bytes()), Path::new("<fixture>")).unwrap()
}

/// Sorted `(source, target)` pairs.
pub fn sorted(mut v: Vec<(String, String)>) -> Vec<(String, String)> {
    v.sort();
    v
}

pub const ALPHABET: &[u8] = b"abeiklmnorstv";

/// One random scoring fixture: friend lists on both sides (up to `max`
/// each, with near-copies across sides) and name statistics over a target
/// population containing the target friends.
pub struct ScoringFixture {
    pub src: Vec<(String, String)>,
    pub tgt: Vec<(String, String)>,
    pub stats: NameStats,
}

pub fn scoring_fixture(rng: &mut ChaCha8Rng, max: usize) -> ScoringFixture {
    let n_tgt = rng.random_range(0..=max);
    let n_src = rng.random_range(0..=max);
    let name = |rng: &mut ChaCha8Rng, lo| random_name(rng, ALPHABET, lo, 7);
    let tgt: Vec<(String, String)> = (0..n_tgt).map(|_| (name(rng, 2), name(rng, 1))).collect();
    let src: Vec<(String, String)> = (0..n_src)
        .map(|_| {
            if !tgt.is_empty() && rng.random_bool(0.6) {
                let (f, l) = &tgt[rng.random_range(0..tgt.len())];
                let ef = rng.random_range(0..2);
                let el = rng.random_range(0..2);
                let f = perturb(rng, f, ALPHABET, ef);
                let l = perturb(rng, l, ALPHABET, el);
                (
                    if f.is_empty() { "a".into() } else { f },
                    if l.is_empty() { "b".into() } else { l },
                )
            } else {
                (name(rng, 2), name(rng, 1))
            }
        })
        .collect();
    let mut population: Vec<Profile> = Vec::new();
    let mut push = |f: &str, l: &str| {
        let id = format!("p{}", population.len());
        population.push(Profile::new(id, canon(f), canon(l), Vec::new()).0);
    };
    for (f, l) in &tgt {
        for _ in 0..rng.random_range(1..4) {
            push(f, l);
        }
    }
    for _ in 0..rng.random_range(1..30) {
        let (f, l) = (name(rng, 2), name(rng, 1));
        push(&f, &l);
    }
    // popular names so some weights fall below 1
    for _ in 0..rng.random_range(0..40) {
        push("ivan", "petrov");
    }
    ScoringFixture {
        src,
        tgt,
        stats: NameStats::build(&population).unwrap(),
    }
}

pub fn as_friend_names(v: &[(String, String)]) -> Vec<(&str, &str)> {
    v.iter().map(|(f, l)| (f.as_str(), l.as_str())).collect()
}

/// Distinct letter-only name for a small integer, stable under romanization.
pub fn letter_name(i: usize) -> String {
    format!(
        "na{}{}",
        (b'a' + (i / 26) as u8) as char,
        (b'a' + (i % 26) as u8) as char
    )
}
