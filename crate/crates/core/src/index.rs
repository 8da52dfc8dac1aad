//! Fuzzy name index over the target network.
//!
//! Distinct first and last names are stored in tries partitioned by their
//! first letter. A query walks one partition carrying a Levenshtein DP row,
//! which simulates the Levenshtein automaton of the query over the trie and
//! prunes every branch whose row minimum already exceeds the bound. The
//! result is exactly the set of names `n` with the same first letter as the
//! query and `levenshtein(query, n) <= bound`.
//!
//! Profiles are bucketed by last name; within a bucket, entries are filtered
//! by membership of their first name in the first-name hit set.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::distance::levenshtein;
use crate::error::{Error, Result};
use crate::name_model::SynonymDictionary;
use crate::normalize::first_letter;
use crate::profile::Profile;

/// Largest supported candidate distance.
pub const MAX_BOUND: u8 = 2;

const MAGIC: &[u8; 8] = b"SNLIDX\x00\x01";
const NO_TERMINAL: u32 = u32::MAX;

/// Same first letter and edit distance at most `bound`.
pub fn names_similar(a: &str, b: &str, bound: u8) -> bool {
    first_letter(a) == first_letter(b) && levenshtein(a, b) <= bound as usize
}

#[derive(Debug, Clone)]
struct Node {
    children: Vec<(u8, u32)>,
    terminal: u32,
}

impl Node {
    fn new() -> Self {
        Node {
            children: Vec::new(),
            terminal: NO_TERMINAL,
        }
    }
}

/// Trie over names sharing one first letter.
#[derive(Debug, Clone)]
struct Trie {
    nodes: Vec<Node>,
}

impl Trie {
    fn new() -> Self {
        Trie {
            nodes: vec![Node::new()],
        }
    }

    fn insert(&mut self, word: &[u8], id: u32) {
        let mut cur = 0usize;
        for &b in word {
            let next = match self.nodes[cur].children.binary_search_by_key(&b, |c| c.0) {
                Ok(pos) => self.nodes[cur].children[pos].1 as usize,
                Err(pos) => {
                    let idx = self.nodes.len();
                    self.nodes.push(Node::new());
                    self.nodes[cur].children.insert(pos, (b, idx as u32));
                    idx
                }
            };
            cur = next;
        }
        self.nodes[cur].terminal = id;
    }

    fn search(&self, query: &[u8], bound: usize, out: &mut Vec<u32>) {
        let width = query.len() + 1;
        // one DP row per trie depth; depth is bounded by query length + bound
        let mut rows = vec![0usize; width * (query.len() + bound + 2)];
        for (j, cell) in rows[..width].iter_mut().enumerate() {
            *cell = j;
        }
        if self.nodes[0].terminal != NO_TERMINAL && query.len() <= bound {
            out.push(self.nodes[0].terminal);
        }
        for &(byte, child) in &self.nodes[0].children {
            self.walk(child as usize, byte, 1, query, bound, &mut rows, out);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        &self,
        node: usize,
        byte: u8,
        depth: usize,
        query: &[u8],
        bound: usize,
        rows: &mut [usize],
        out: &mut Vec<u32>,
    ) {
        let width = query.len() + 1;
        let (prev, cur) = rows[(depth - 1) * width..(depth + 1) * width].split_at_mut(width);
        cur[0] = prev[0] + 1;
        let mut row_min = cur[0];
        for j in 1..width {
            let cost = usize::from(query[j - 1] != byte);
            let v = (prev[j - 1] + cost).min(prev[j] + 1).min(cur[j - 1] + 1);
            cur[j] = v;
            row_min = row_min.min(v);
        }
        if cur[width - 1] <= bound && self.nodes[node].terminal != NO_TERMINAL {
            out.push(self.nodes[node].terminal);
        }
        if row_min > bound {
            return;
        }
        for &(b, child) in &self.nodes[node].children {
            self.walk(child as usize, b, depth + 1, query, bound, rows, out);
        }
    }
}

/// Names interned and partitioned by first letter.
#[derive(Debug, Clone)]
struct NameSpace {
    names: Vec<String>,
    partitions: HashMap<u8, Trie>,
}

impl NameSpace {
    fn from_names(names: Vec<String>) -> Self {
        let mut partitions: HashMap<u8, Trie> = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            partitions
                .entry(n.as_bytes()[0])
                .or_insert_with(Trie::new)
                .insert(n.as_bytes(), i as u32);
        }
        NameSpace { names, partitions }
    }

    fn search(&self, query: &str, bound: u8, out: &mut Vec<u32>) {
        if let Some(trie) = self.partitions.get(&query.as_bytes()[0]) {
            trie.search(query.as_bytes(), bound as usize, out);
        }
    }
}

/// Edit-distance-bounded candidate index over target profiles.
#[derive(Debug, Clone)]
pub struct CandidateIndex {
    bound: u8,
    first: NameSpace,
    last: NameSpace,
    /// Per profile: (first id, last id).
    assignment: Vec<(u32, u32)>,
    /// Per last-name id: (first id, profile index), sorted.
    by_last: Vec<Vec<(u32, u32)>>,
    fingerprint: [u8; 32],
}

fn check_bound(bound: u8) -> Result<()> {
    if bound > MAX_BOUND {
        return Err(Error::config(
            "candidate_distance",
            format!("must be 0, 1 or 2, got {bound}"),
        ));
    }
    Ok(())
}

fn fingerprint<'a>(ids: impl Iterator<Item = &'a str>) -> [u8; 32] {
    let mut h = Sha256::new();
    for id in ids {
        h.update(id.as_bytes());
        h.update(b"\n");
    }
    let digest = h.finalize();
    let mut out = [0u8; 32];
    out.copy_from_slice(&digest);
    out
}

impl CandidateIndex {
    pub fn build(profiles: &[Profile], bound: u8) -> Result<Self> {
        check_bound(bound)?;
        let mut seen = HashSet::with_capacity(profiles.len());
        for p in profiles {
            if !seen.insert(p.id.as_str()) {
                return Err(Error::DuplicateId(p.id.clone()));
            }
        }
        let mut first_ids: HashMap<&str, u32> = HashMap::new();
        let mut last_ids: HashMap<&str, u32> = HashMap::new();
        let mut first_names = Vec::new();
        let mut last_names = Vec::new();
        let mut assignment = Vec::with_capacity(profiles.len());
        for p in profiles {
            let f = *first_ids.entry(p.first.as_str()).or_insert_with(|| {
                first_names.push(p.first.to_string());
                (first_names.len() - 1) as u32
            });
            let l = *last_ids.entry(p.last.as_str()).or_insert_with(|| {
                last_names.push(p.last.to_string());
                (last_names.len() - 1) as u32
            });
            assignment.push((f, l));
        }
        let fp = fingerprint(profiles.iter().map(|p| p.id.as_str()));
        Ok(Self::assemble(bound, first_names, last_names, assignment, fp))
    }

    fn assemble(
        bound: u8,
        first_names: Vec<String>,
        last_names: Vec<String>,
        assignment: Vec<(u32, u32)>,
        fingerprint: [u8; 32],
    ) -> Self {
        let mut by_last = vec![Vec::new(); last_names.len()];
        for (idx, &(f, l)) in assignment.iter().enumerate() {
            by_last[l as usize].push((f, idx as u32));
        }
        for bucket in &mut by_last {
            bucket.sort_unstable();
        }
        CandidateIndex {
            bound,
            first: NameSpace::from_names(first_names),
            last: NameSpace::from_names(last_names),
            assignment,
            by_last,
            fingerprint,
        }
    }

    pub fn bound(&self) -> u8 {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Indexed first names within the bound of `query` (same first letter).
    pub fn similar_first_names(&self, query: &str) -> Vec<&str> {
        let mut hits = Vec::new();
        self.first.search(query, self.bound, &mut hits);
        hits.into_iter()
            .map(|i| self.first.names[i as usize].as_str())
            .collect()
    }

    /// Indexed last names within the bound of `query` (same first letter).
    pub fn similar_last_names(&self, query: &str) -> Vec<&str> {
        let mut hits = Vec::new();
        self.last.search(query, self.bound, &mut hits);
        hits.into_iter().map(|i| self.last.names[i as usize].as_str()).collect()
    }

    /// Indices (into the indexed profile slice) of all targets whose last
    /// name is similar to `last` and whose first name is similar to some
    /// synonym variant of `first`. Sorted ascending.
    pub fn candidates(&self, first: &str, last: &str, synonyms: &SynonymDictionary) -> Vec<u32> {
        let mut last_hits = Vec::new();
        self.last.search(last, self.bound, &mut last_hits);
        if last_hits.is_empty() {
            return Vec::new();
        }
        let mut first_hits = Vec::new();
        for variant in synonyms.variants(first) {
            self.first.search(variant, self.bound, &mut first_hits);
        }
        if first_hits.is_empty() {
            return Vec::new();
        }
        first_hits.sort_unstable();
        first_hits.dedup();

        let mut out = Vec::new();
        for l in last_hits {
            for &(f, idx) in &self.by_last[l as usize] {
                if first_hits.binary_search(&f).is_ok() {
                    out.push(idx);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Candidate generation for a source profile.
    pub fn generate_candidates(&self, source: &Profile, synonyms: &SynonymDictionary) -> Vec<u32> {
        self.candidates(source.first.as_str(), source.last.as_str(), synonyms)
    }

    /// Writes vocabularies and name assignments; tries are rebuilt on load.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[self.bound])?;
        w.write_all(&self.fingerprint)?;
        for names in [&self.first.names, &self.last.names] {
            w.write_all(&(names.len() as u32).to_le_bytes())?;
            for n in names.iter() {
                w.write_all(&(n.len() as u32).to_le_bytes())?;
                w.write_all(n.as_bytes())?;
            }
        }
        w.write_all(&(self.assignment.len() as u32).to_le_bytes())?;
        for &(f, l) in &self.assignment {
            w.write_all(&f.to_le_bytes())?;
            w.write_all(&l.to_le_bytes())?;
        }
        Ok(())
    }

    /// Loads a saved index and checks it was built from exactly `profiles`
    /// (same ids in the same order).
    pub fn load(path: impl AsRef<Path>, profiles: &[Profile]) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let index = Self::read_from(&mut BufReader::new(f)).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })?;
        if index.fingerprint != fingerprint(profiles.iter().map(|p| p.id.as_str())) {
            return Err(Error::IndexFormat(
                "index was built from a different profile set".into(),
            ));
        }
        Ok(index)
    }

    fn read_from(r: &mut impl Read) -> Result<Self> {
        let io = |e| Error::io("<index>", e);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(Error::IndexFormat("bad magic or unsupported version".into()));
        }
        let mut bound = [0u8; 1];
        r.read_exact(&mut bound).map_err(io)?;
        check_bound(bound[0]).map_err(|_| Error::IndexFormat("bad bound".into()))?;
        let mut fp = [0u8; 32];
        r.read_exact(&mut fp).map_err(io)?;
        let mut vocabs = Vec::with_capacity(2);
        for _ in 0..2 {
            let n = read_u32(r)? as usize;
            let mut names = Vec::with_capacity(n);
            for _ in 0..n {
                let len = read_u32(r)? as usize;
                let mut buf = vec![0u8; len];
                r.read_exact(&mut buf).map_err(io)?;
                let name = String::from_utf8(buf).map_err(|_| Error::IndexFormat("name is not UTF-8".into()))?;
                if name.is_empty() {
                    return Err(Error::IndexFormat("empty name".into()));
                }
                names.push(name);
            }
            vocabs.push(names);
        }
        let last_names = vocabs.pop().unwrap();
        let first_names = vocabs.pop().unwrap();
        let n = read_u32(r)? as usize;
        let mut assignment = Vec::with_capacity(n);
        for _ in 0..n {
            let f = read_u32(r)?;
            let l = read_u32(r)?;
            if f as usize >= first_names.len() || l as usize >= last_names.len() {
                return Err(Error::IndexFormat("name id out of range".into()));
            }
            assignment.push((f, l));
        }
        Ok(Self::assemble(bound[0], first_names, last_names, assignment, fp))
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|e| Error::io("<index>", e))?;
    Ok(u32::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::name_model::NamePair;
    use crate::normalize::romanize;

    fn p(id: &str, first: &str, last: &str) -> Profile {
        Profile::new(id, romanize(first).unwrap(), romanize(last).unwrap(), vec![]).0
    }

    #[test]
    fn predicate_examples() {
        assert!(names_similar("ivanov", "ivanova", 1));
        assert!(!names_similar("ivanov", "avanov", 1));
        assert!(names_similar("ivanov", "ivanov", 0));
        assert!(!names_similar("ivanov", "ivanova", 0));
        assert!(names_similar("ivanov", "ivnova", 2));
    }

    #[test]
    fn empty_index() {
        let idx = CandidateIndex::build(&[], 1).unwrap();
        assert!(idx.is_empty());
        assert!(idx
            .generate_candidates(&p("s", "ivan", "petrov"), &SynonymDictionary::empty())
            .is_empty());
    }

    #[test]
    fn exact_self_retrieval() {
        let targets = [p("t1", "ivan", "petrov")];
        let idx = CandidateIndex::build(&targets, 1).unwrap();
        assert_eq!(
            idx.generate_candidates(&targets[0], &SynonymDictionary::empty()),
            vec![0]
        );
    }

    #[test]
    fn synonym_expansion() {
        let syn = SynonymDictionary::build(
            &[NamePair {
                a: romanize("aleksandr").unwrap(),
                b: romanize("sasha").unwrap(),
                count: 3,
            }],
            2,
        );
        let targets = [p("t1", "aleksandr", "ivanova"), p("t2", "boris", "ivanov")];
        let idx = CandidateIndex::build(&targets, 1).unwrap();
        let src = p("s", "sasha", "ivanov");
        assert_eq!(idx.generate_candidates(&src, &syn), vec![0]);
        assert!(idx.generate_candidates(&src, &SynonymDictionary::empty()).is_empty());
    }

    #[test]
    fn missing_partition() {
        let idx = CandidateIndex::build(&[p("t1", "boris", "ivanov")], 1).unwrap();
        assert!(idx
            .generate_candidates(&p("s", "boris", "tsoy"), &SynonymDictionary::empty())
            .is_empty());
    }

    #[test]
    fn first_letter_blocks_retrieval() {
        let idx = CandidateIndex::build(&[p("t1", "ivan", "avanov")], 1).unwrap();
        assert!(idx
            .generate_candidates(&p("s", "ivan", "ivanov"), &SynonymDictionary::empty())
            .is_empty());
        assert!(idx.similar_last_names("ivanov").is_empty());
    }

    #[test]
    fn short_names_and_prefixes() {
        let targets = [p("1", "al", "li"), p("2", "a", "l"), p("3", "alla", "lia")];
        let idx = CandidateIndex::build(&targets, 1).unwrap();
        let mut lasts = idx.similar_last_names("l");
        lasts.sort();
        assert_eq!(lasts, ["l", "li"]);
        let mut firsts = idx.similar_first_names("a");
        firsts.sort();
        assert_eq!(firsts, ["a", "al"]);
    }

    #[test]
    fn rejects_bad_bound_and_duplicates() {
        assert!(matches!(CandidateIndex::build(&[], 3), Err(Error::Config { .. })));
        assert!(matches!(
            CandidateIndex::build(&[p("1", "a", "b"), p("1", "c", "d")], 1),
            Err(Error::DuplicateId(_))
        ));
    }

    #[test]
    fn save_and_load() {
        let targets = [
            p("t1", "ivan", "petrov"),
            p("t2", "anna", "petrova"),
            p("t3", "ivan", "sidorov"),
        ];
        let idx = CandidateIndex::build(&targets, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.bin");
        idx.save(&path).unwrap();
        let back = CandidateIndex::load(&path, &targets).unwrap();
        assert_eq!(back.bound(), 2);
        let src = p("s", "ivan", "petrova");
        let syn = SynonymDictionary::empty();
        assert_eq!(
            back.generate_candidates(&src, &syn),
            idx.generate_candidates(&src, &syn)
        );

        assert!(matches!(
            CandidateIndex::load(&path, &targets[..2]),
            Err(Error::IndexFormat(_))
        ));
        std::fs::write(&path, b"garbage!").unwrap();
        assert!(matches!(
            CandidateIndex::load(&path, &targets),
            Err(Error::IndexFormat(_))
        ));
    }
}
