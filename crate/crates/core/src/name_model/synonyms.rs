//! First-name synonym classes learned from profile pairs known to belong to
//! the same person.
//!
//! Two first names observed on the two sides of a known pair are linked; the
//! classes are the connected components of the resulting graph after pairs
//! seen fewer than `min_count` times are discarded. The relation is closed
//! transitively on purpose, so "aleksandr" and "aleksey" end up together if
//! both were ever paired with "alex". Friend similarity downstream is what
//! separates such people.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::normalize::{romanize, CanonicalName};
use crate::profile::{Network, Profile};

/// Default pair-frequency cutoff: unique pairs are dropped.
pub const DEFAULT_MIN_COUNT: u64 = 2;

/// Classes larger than this are flagged for review on export.
pub const DEFAULT_REVIEW_LIMIT: usize = 50;

/// Two first names observed for the same person, `a <= b`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NamePair {
    pub a: CanonicalName,
    pub b: CanonicalName,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairDiagnostics {
    pub pairs_seen: usize,
    pub identical_names: usize,
    /// Truth rows whose source or target id is not in its network.
    pub unresolved: usize,
}

/// Aggregates differing first names over matched profile pairs.
pub fn extract_name_pairs<'a>(
    matched: impl IntoIterator<Item = (&'a Profile, &'a Profile)>,
) -> (Vec<NamePair>, PairDiagnostics) {
    let mut counts: BTreeMap<(CanonicalName, CanonicalName), u64> = BTreeMap::new();
    let mut diag = PairDiagnostics::default();
    for (x, y) in matched {
        diag.pairs_seen += 1;
        if x.first == y.first {
            diag.identical_names += 1;
            continue;
        }
        let key = if x.first <= y.first {
            (x.first.clone(), y.first.clone())
        } else {
            (y.first.clone(), x.first.clone())
        };
        *counts.entry(key).or_default() += 1;
    }
    let pairs = counts
        .into_iter()
        .map(|((a, b), count)| NamePair { a, b, count })
        .collect();
    (pairs, diag)
}

/// Resolves `(source_id, target_id)` truth rows against both networks and
/// extracts name pairs. Rows with unknown ids are skipped and counted.
pub fn name_pairs_from_truth(
    source: &Network,
    target: &Network,
    truth: &[(String, String)],
) -> (Vec<NamePair>, PairDiagnostics) {
    let mut unresolved = 0;
    let resolved: Vec<(&Profile, &Profile)> = truth
        .iter()
        .filter_map(|(s, t)| match (source.get(s), target.get(t)) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => {
                unresolved += 1;
                None
            }
        })
        .collect();
    let (pairs, mut diag) = extract_name_pairs(resolved);
    diag.unresolved = unresolved;
    (pairs, diag)
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new() -> Self {
        UnionFind {
            parent: Vec::new(),
            rank: Vec::new(),
        }
    }

    fn push(&mut self) -> usize {
        let id = self.parent.len();
        self.parent.push(id);
        self.rank.push(0);
        id
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Partition of first names into synonym classes. Names that are not stored
/// form implicit singleton classes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymDictionary {
    class_of: HashMap<CanonicalName, u32>,
    members: Vec<Vec<CanonicalName>>,
}

impl SynonymDictionary {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Connected components of the graph of pairs with `count >= min_count`.
    pub fn build(pairs: &[NamePair], min_count: u64) -> Self {
        let min_count = min_count.max(1);
        Self::from_edges(pairs.iter().filter(|p| p.count >= min_count).map(|p| (&p.a, &p.b)))
    }

    /// Merges classes given as name lists; lists sharing a name are joined.
    pub fn from_classes(classes: impl IntoIterator<Item = Vec<CanonicalName>>) -> Self {
        let classes: Vec<Vec<CanonicalName>> = classes.into_iter().collect();
        Self::from_edges(classes.iter().flat_map(|c| c.windows(2).map(|w| (&w[0], &w[1]))))
    }

    fn from_edges<'a>(edges: impl IntoIterator<Item = (&'a CanonicalName, &'a CanonicalName)>) -> Self {
        let mut ids: HashMap<&CanonicalName, usize> = HashMap::new();
        let mut uf = UnionFind::new();
        for (a, b) in edges {
            let ia = *ids.entry(a).or_insert_with(|| uf.push());
            let ib = *ids.entry(b).or_insert_with(|| uf.push());
            uf.union(ia, ib);
        }
        let mut groups: HashMap<usize, Vec<CanonicalName>> = HashMap::new();
        for (name, id) in &ids {
            groups.entry(uf.find(*id)).or_default().push((*name).clone());
        }
        let mut members: Vec<Vec<CanonicalName>> = groups
            .into_values()
            .filter(|g| g.len() > 1)
            .map(|mut g| {
                g.sort();
                g
            })
            .collect();
        members.sort();
        let class_of = members
            .iter()
            .enumerate()
            .flat_map(|(cid, names)| names.iter().map(move |n| (n.clone(), cid as u32)))
            .collect();
        SynonymDictionary { class_of, members }
    }

    /// The full class of `name`, itself included; `[name]` if unlisted.
    pub fn variants<'a>(&'a self, name: &'a str) -> Vec<&'a str> {
        match self.class_of.get(name) {
            Some(&cid) => self.members[cid as usize].iter().map(|n| n.as_str()).collect(),
            None => vec![name],
        }
    }

    pub fn class_id(&self, name: &str) -> Option<u32> {
        self.class_of.get(name).copied()
    }

    /// Stored classes (size >= 2), sorted.
    pub fn classes(&self) -> &[Vec<CanonicalName>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// One class per line, names space-separated (spaces inside a name are
    /// written as `_`). Classes above `review_limit` get a `# flagged` line.
    pub fn export(&self, w: &mut impl Write, review_limit: usize) -> std::io::Result<()> {
        writeln!(w, "# first-name synonym classes: one class per line")?;
        for class in &self.members {
            if class.len() > review_limit {
                writeln!(
                    w,
                    "# flagged: {} names exceeds review limit {}",
                    class.len(),
                    review_limit
                )?;
            }
            let line: Vec<String> = class.iter().map(|n| n.replace(' ', "_")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn import(r: impl BufRead, origin: &Path) -> Result<Self> {
        let mut classes = Vec::new();
        for (idx, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let names = line
                .split_whitespace()
                .map(|tok| romanize(&tok.replace('_', " ")).map_err(|e| Error::parse(origin, idx + 1, e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            classes.push(names);
        }
        Ok(Self::from_classes(classes))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::import(std::io::BufReader::new(f), path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> CanonicalName {
        romanize(s).unwrap()
    }

    fn pair(a: &str, b: &str, count: u64) -> NamePair {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        NamePair {
            a: n(a),
            b: n(b),
            count,
        }
    }

    fn prof(id: &str, first: &str) -> Profile {
        Profile::new(id, n(first), n("x"), vec![]).0
    }

    fn class(d: &SynonymDictionary, name: &str) -> Vec<String> {
        let mut v: Vec<String> = d.variants(name).into_iter().map(String::from).collect();
        v.sort();
        v
    }

    #[test]
    fn aggregates_pairs() {
        let vk: Vec<Profile> = (0..5).map(|i| prof(&format!("v{i}"), "aleksandr")).collect();
        let fb: Vec<Profile> = (0..5).map(|i| prof(&format!("f{i}"), "sasha")).collect();
        let (pairs, diag) = extract_name_pairs(vk.iter().zip(fb.iter()));
        assert_eq!(pairs, vec![pair("aleksandr", "sasha", 5)]);
        assert_eq!(diag.pairs_seen, 5);
    }

    #[test]
    fn identical_names_produce_nothing() {
        let a = prof("1", "ivan");
        let b = prof("2", "ivan");
        let (pairs, diag) = extract_name_pairs([(&a, &b)]);
        assert!(pairs.is_empty());
        assert_eq!(diag.identical_names, 1);
    }

    #[test]
    fn pair_is_stored_ordered() {
        let a = prof("1", "max");
        let b = prof("2", "irina");
        let (pairs, _) = extract_name_pairs([(&a, &b)]);
        assert_eq!(pairs, vec![pair("irina", "max", 1)]);
        assert_eq!(pairs[0].a.as_str(), "irina");
    }

    #[test]
    fn truth_rows_with_unknown_ids_are_counted() {
        let src = Network::from_profiles(vec![prof("s1", "sasha"), prof("s2", "ivan")]).unwrap();
        let tgt = Network::from_profiles(vec![prof("t1", "aleksandr")]).unwrap();
        let truth = vec![
            ("s1".to_string(), "t1".to_string()),
            ("s2".to_string(), "t9".to_string()),
        ];
        let (pairs, diag) = name_pairs_from_truth(&src, &tgt, &truth);
        assert_eq!(pairs, vec![pair("aleksandr", "sasha", 1)]);
        assert_eq!(diag.unresolved, 1);
    }

    #[test]
    fn chains_merge() {
        let d = SynonymDictionary::build(&[pair("aleksandr", "sasha", 10), pair("sasha", "sanya", 7)], 2);
        assert_eq!(d.len(), 1);
        assert_eq!(class(&d, "sasha"), ["aleksandr", "sanya", "sasha"]);
    }

    #[test]
    fn infrequent_pairs_dropped() {
        let d = SynonymDictionary::build(&[pair("max", "irina", 1)], 2);
        assert!(d.is_empty());
        assert_eq!(class(&d, "max"), ["max"]);
    }

    #[test]
    fn shared_short_form_over_merges() {
        let d = SynonymDictionary::build(&[pair("aleksandr", "alex", 9), pair("aleksey", "alex", 8)], 2);
        assert_eq!(class(&d, "aleksey"), ["aleksandr", "aleksey", "alex"]);
    }

    #[test]
    fn unlisted_name_is_singleton() {
        let d = SynonymDictionary::build(&[pair("aleksandr", "sasha", 10)], 2);
        assert_eq!(d.variants("zinaida"), vec!["zinaida"]);
        assert_eq!(d.class_id("zinaida"), None);
    }

    #[test]
    fn export_import_round_trip() {
        let mut pairs: Vec<NamePair> = (0..60)
            .map(|i| pair("hub", &format!("name{}", letters(i)), 3))
            .collect();
        pairs.push(pair("mariya anna", "masha", 4));
        let d = SynonymDictionary::build(&pairs, 2);
        let mut buf = Vec::new();
        d.export(&mut buf, 50).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("# flagged: 61 names exceeds review limit 50"));
        assert!(text.contains("mariya_anna masha"));
        let back = SynonymDictionary::import(text.as_bytes(), Path::new("syn.txt")).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn import_joins_overlapping_lines() {
        let text = "# comment\nsasha aleksandr\n\nsanya sasha\nsolo\n";
        let d = SynonymDictionary::import(text.as_bytes(), Path::new("syn.txt")).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(class(&d, "sanya"), ["aleksandr", "sanya", "sasha"]);
    }

    fn letters(mut i: usize) -> String {
        let mut s = String::new();
        loop {
            s.push((b'a' + (i % 26) as u8) as char);
            i /= 26;
            if i == 0 {
                return s;
            }
        }
    }
}
