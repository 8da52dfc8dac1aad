//! Synthetic two-network corpora with a planted alignment.
//!
//! People live in communities of fixed size. Names are drawn from Zipfian
//! pools of generated Russian-like names; friendships are mostly inside the
//! community and per-person degrees follow a truncated power law. The target
//! network holds everybody. The source network copies whole communities
//! (picked at random) until it has `n_source` people, then applies noise:
//! friendship dropout, one-letter typos, nickname swaps and unrelated
//! aliases. Names are written in Cyrillic or Latin script at random; both
//! normalize to the same canonical form.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::config::parse_key_values;
use crate::error::{Error, Result};
use crate::name_model::{SynonymDictionary, DEFAULT_REVIEW_LIMIT};
use crate::normalize::{romanize, CanonicalName};
use crate::profile::Network;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_target: usize,
    pub n_source: usize,
    pub first_pool: usize,
    pub last_pool: usize,
    /// Zipf exponent of name popularity.
    pub zipf_exponent: f64,
    pub min_degree: usize,
    pub max_degree: usize,
    /// Power-law exponent of the degree distribution.
    pub degree_exponent: f64,
    pub community_size: usize,
    /// Probability that a friendship stays inside the community.
    pub in_community_rate: f64,
    /// Share of first names that have nicknames.
    pub nickname_share: f64,
    pub max_nicknames: usize,
    /// Probability that a profile writes its name in Cyrillic.
    pub cyrillic_rate: f64,
    pub friend_dropout: f64,
    pub typo_rate: f64,
    pub nickname_rate: f64,
    pub alias_rate: f64,
    /// Every target gets its own last name, at edit distance >= 2 from all
    /// others.
    pub unique_names: bool,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_target: 50_000,
            n_source: 5_000,
            first_pool: 600,
            last_pool: 20_000,
            zipf_exponent: 1.0,
            min_degree: 4,
            max_degree: 120,
            degree_exponent: 2.2,
            community_size: 50,
            in_community_rate: 0.9,
            nickname_share: 0.4,
            max_nicknames: 3,
            cyrillic_rate: 0.5,
            friend_dropout: 0.0,
            typo_rate: 0.0,
            nickname_rate: 0.0,
            alias_rate: 0.0,
            unique_names: false,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("in_community_rate", self.in_community_rate),
            ("nickname_share", self.nickname_share),
            ("cyrillic_rate", self.cyrillic_rate),
            ("friend_dropout", self.friend_dropout),
            ("typo_rate", self.typo_rate),
            ("nickname_rate", self.nickname_rate),
            ("alias_rate", self.alias_rate),
        ];
        for (k, v) in rates {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Spec(format!("{k} must be in [0, 1], got {v}")));
            }
        }
        if self.n_source > self.n_target {
            return Err(Error::Spec("n_source must not exceed n_target".into()));
        }
        if self.n_target == 0 {
            return Err(Error::Spec("n_target must be positive".into()));
        }
        if self.first_pool < 2 || self.last_pool < 2 {
            return Err(Error::Spec("name pools need at least 2 names".into()));
        }
        if self.min_degree > self.max_degree {
            return Err(Error::Spec("min_degree exceeds max_degree".into()));
        }
        if self.community_size < 2 {
            return Err(Error::Spec("community_size must be at least 2".into()));
        }
        if !(self.zipf_exponent >= 0.0 && self.degree_exponent >= 0.0) {
            return Err(Error::Spec("exponents must be non-negative".into()));
        }
        Ok(())
    }

    /// Reads `key=value` lines over the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = SynthSpec::default();
        for (k, v) in parse_key_values(text)? {
            let bad = || Error::Spec(format!("{k}: cannot parse {v:?}"));
            macro_rules! set {
                ($field:ident) => {
                    s.$field = v.parse().map_err(|_| bad())?
                };
            }
            match k.as_str() {
                "n_target" => set!(n_target),
                "n_source" => set!(n_source),
                "first_pool" => set!(first_pool),
                "last_pool" => set!(last_pool),
                "zipf_exponent" => set!(zipf_exponent),
                "min_degree" => set!(min_degree),
                "max_degree" => set!(max_degree),
                "degree_exponent" => set!(degree_exponent),
                "community_size" => set!(community_size),
                "in_community_rate" => set!(in_community_rate),
                "nickname_share" => set!(nickname_share),
                "max_nicknames" => set!(max_nicknames),
                "cyrillic_rate" => set!(cyrillic_rate),
                "friend_dropout" => set!(friend_dropout),
                "typo_rate" => set!(typo_rate),
                "nickname_rate" => set!(nickname_rate),
                "alias_rate" => set!(alias_rate),
                "unique_names" => set!(unique_names),
                _ => return Err(Error::Spec(format!("unknown key {k:?}"))),
            }
        }
        s.validate()?;
        Ok(s)
    }
}

/// Generator tallies, usable as an oracle for the emitted files.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynthReport {
    pub planted_pairs: usize,
    /// Friend references of source profiles before dropout.
    pub source_friend_refs_before_dropout: usize,
    pub source_friend_refs: usize,
    pub typos: usize,
    pub nickname_swaps: usize,
    pub aliases: usize,
    /// Canonical first-name counts over the target network.
    pub target_first_counts: HashMap<String, u64>,
    pub target_last_counts: HashMap<String, u64>,
}

#[derive(Debug, Clone)]
struct RawProfile {
    id: String,
    first: String,
    last: String,
    friends: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    source: Vec<RawProfile>,
    target: Vec<RawProfile>,
    pub truth: Vec<(String, String)>,
    /// The generator's nickname classes (canonical names).
    pub synonym_classes: Vec<Vec<CanonicalName>>,
    pub report: SynthReport,
}

fn profile_lines(profiles: &[RawProfile]) -> String {
    let mut s = String::new();
    for p in profiles {
        s.push_str(&p.id);
        s.push('\t');
        s.push_str(&p.first);
        s.push('\t');
        s.push_str(&p.last);
        s.push('\t');
        s.push_str(&p.friends.join(","));
        s.push('\n');
    }
    s
}

impl SyntheticCorpus {
    pub fn source_text(&self) -> String {
        profile_lines(&self.source)
    }

    pub fn target_text(&self) -> String {
        profile_lines(&self.target)
    }

    pub fn truth_text(&self) -> String {
        let mut s = String::from("source_id,target_id\n");
        for (a, b) in &self.truth {
            s.push_str(&format!("{a},{b}\n"));
        }
        s
    }

    pub fn synonyms_text(&self) -> String {
        let dict = SynonymDictionary::from_classes(self.synonym_classes.iter().cloned());
        let mut buf = Vec::new();
        dict.export(&mut buf, DEFAULT_REVIEW_LIMIT).expect("writing to memory");
        String::from_utf8(buf).expect("export is UTF-8")
    }

    pub fn source_network(&self) -> Result<Network> {
        Network::read(self.source_text().as_bytes(), Path::new("<synthetic source>"))
    }

    pub fn target_network(&self) -> Result<Network> {
        Network::read(self.target_text().as_bytes(), Path::new("<synthetic target>"))
    }

    pub fn synonym_dictionary(&self) -> SynonymDictionary {
        SynonymDictionary::from_classes(self.synonym_classes.iter().cloned())
    }

    /// Writes `source.tsv`, `target.tsv`, `truth.csv` and `synonyms.txt`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, text) in [
            ("source.tsv", self.source_text()),
            ("target.tsv", self.target_text()),
            ("truth.csv", self.truth_text()),
            ("synonyms.txt", self.synonyms_text()),
        ] {
            let path = dir.join(name);
            fs::File::create(&path)
                .and_then(|mut f| f.write_all(text.as_bytes()))
                .map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

const ONSETS: &[&str] = &[
    "б", "в", "г", "д", "ж", "з", "к", "л", "м", "н", "п", "р", "с", "т", "ф", "х", "ч", "ш", "бр", "гр", "др", "кр",
    "пр", "тр", "ст", "св", "сл", "зв",
];
const NUCLEI: &[&str] = &["а", "о", "у", "и", "е", "я", "ю", "ы"];
const LAST_SUFFIXES: &[&str] = &["ов", "ев", "ин", "ский", "енко", "ук", "ых", "ман"];
const FIRST_SUFFIXES: &[&str] = &["", "", "н", "р", "л", "й", "на", "ся"];

#[derive(Debug, Clone)]
struct Name {
    cyrillic: String,
    canonical: String,
}

fn make_name(rng: &mut ChaCha8Rng, syllables: std::ops::RangeInclusive<usize>, suffixes: &[&str]) -> Name {
    let mut cyr = String::new();
    for _ in 0..rng.random_range(syllables) {
        cyr.push_str(ONSETS.choose(rng).unwrap());
        cyr.push_str(NUCLEI.choose(rng).unwrap());
    }
    cyr.push_str(suffixes.choose(rng).unwrap());
    let canonical = romanize(&cyr).expect("generated names are non-empty").into_string();
    Name {
        cyrillic: cyr,
        canonical,
    }
}

/// Deletion neighbourhood of `s` plus `s` itself. Two strings at edit
/// distance <= 1 always share a key.
fn deletion_keys(s: &str) -> Vec<String> {
    let mut keys = vec![s.to_string()];
    for i in 0..s.len() {
        keys.push(format!("{}{}", &s[..i], &s[i + 1..]));
    }
    keys
}

struct NamePool {
    names: Vec<Name>,
    zipf: Zipf<f64>,
}

impl NamePool {
    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        (self.zipf.sample(rng) as usize - 1).min(self.names.len() - 1)
    }
}

fn distinct_names(
    rng: &mut ChaCha8Rng,
    n: usize,
    syllables: std::ops::RangeInclusive<usize>,
    suffixes: &[&str],
    taken: &mut HashSet<String>,
) -> Vec<Name> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let name = make_name(rng, syllables.clone(), suffixes);
        if taken.insert(name.canonical.clone()) {
            out.push(name);
        }
    }
    out
}

/// Names pairwise at edit distance >= 2.
fn separated_names(rng: &mut ChaCha8Rng, n: usize, syllables: std::ops::RangeInclusive<usize>) -> Vec<Name> {
    let mut keys: HashSet<String> = HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let name = make_name(rng, syllables.clone(), LAST_SUFFIXES);
        let k = deletion_keys(&name.canonical);
        if k.iter().any(|x| keys.contains(x)) {
            continue;
        }
        keys.extend(k);
        out.push(name);
    }
    out
}

fn capitalize(s: &str) -> String {
    s.split(' ')
        .map(|tok| {
            let mut c = tok.chars();
            match c.next() {
                Some(f) => f.to_uppercase().chain(c).collect::<String>(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// One edit (substitute, insert or delete) that keeps the first letter.
fn typo(rng: &mut ChaCha8Rng, s: &str) -> String {
    let bytes = s.as_bytes();
    let letter = |rng: &mut ChaCha8Rng| b'a' + rng.random_range(0..26u8);
    let mut out = bytes.to_vec();
    loop {
        match rng.random_range(0..3) {
            0 if bytes.len() > 1 => {
                let pos = rng.random_range(1..bytes.len());
                let mut c = letter(rng);
                while c == bytes[pos] {
                    c = letter(rng);
                }
                out[pos] = c;
            }
            1 => {
                let pos = rng.random_range(1..=bytes.len());
                out.insert(pos, letter(rng));
            }
            2 if bytes.len() > 2 => {
                let pos = rng.random_range(1..bytes.len());
                out.remove(pos);
            }
            _ => continue,
        }
        return String::from_utf8(out).expect("ASCII");
    }
}

fn written(rng: &mut ChaCha8Rng, name: &Name, cyrillic_rate: f64) -> String {
    if rng.random_bool(cyrillic_rate) {
        capitalize(&name.cyrillic)
    } else {
        capitalize(&name.canonical)
    }
}

/// Generates a corpus; the same spec and seed always give identical output.
pub fn generate_synthetic(spec: &SynthSpec, seed: u64) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SynthReport::default();

    // name pools and nickname classes
    let mut taken = HashSet::new();
    let first_names = distinct_names(&mut rng, spec.first_pool, 1..=3, FIRST_SUFFIXES, &mut taken);
    let mut nicknames: Vec<Vec<Name>> = vec![Vec::new(); first_names.len()];
    for slot in nicknames.iter_mut() {
        if spec.max_nicknames > 0 && rng.random_bool(spec.nickname_share) {
            let k = rng.random_range(1..=spec.max_nicknames);
            *slot = distinct_names(&mut rng, k, 1..=2, FIRST_SUFFIXES, &mut taken);
        }
    }
    let first_pool = NamePool {
        zipf: Zipf::new(first_names.len() as f64, spec.zipf_exponent).map_err(|e| Error::Spec(e.to_string()))?,
        names: first_names,
    };
    let last_names = if spec.unique_names {
        separated_names(&mut rng, spec.n_target, 2..=4)
    } else {
        distinct_names(&mut rng, spec.last_pool, 2..=3, LAST_SUFFIXES, &mut HashSet::new())
    };
    let last_pool = NamePool {
        zipf: Zipf::new(last_names.len() as f64, spec.zipf_exponent).map_err(|e| Error::Spec(e.to_string()))?,
        names: last_names,
    };

    // people
    let n = spec.n_target;
    let person_first: Vec<usize> = (0..n).map(|_| first_pool.draw(&mut rng)).collect();
    let person_last: Vec<usize> = if spec.unique_names {
        (0..n).collect()
    } else {
        (0..n).map(|_| last_pool.draw(&mut rng)).collect()
    };

    // friendships
    let community = |i: usize| i / spec.community_size;
    let community_range = |c: usize| (c * spec.community_size)..((c + 1) * spec.community_size).min(n);
    let degree_span = spec.max_degree - spec.min_degree + 1;
    let degree_dist = Zipf::new(degree_span as f64, spec.degree_exponent).map_err(|e| Error::Spec(e.to_string()))?;
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut edge_set: HashSet<(u32, u32)> = HashSet::new();
    for i in 0..n {
        let want = spec.min_degree + degree_dist.sample(&mut rng) as usize - 1;
        let range = community_range(community(i));
        let mut added = 0;
        let mut attempts = 0;
        while added < want && attempts < want * 20 {
            attempts += 1;
            let j = if rng.random_bool(spec.in_community_rate) {
                rng.random_range(range.clone())
            } else {
                rng.random_range(0..n)
            };
            if j == i {
                continue;
            }
            let key = (i.min(j) as u32, i.max(j) as u32);
            if edge_set.insert(key) {
                adjacency[i].push(j as u32);
                adjacency[j].push(i as u32);
                added += 1;
            }
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }

    // ids
    let mut target_order: Vec<usize> = (0..n).collect();
    target_order.shuffle(&mut rng);
    let mut target_id = vec![String::new(); n];
    for (k, &person) in target_order.iter().enumerate() {
        target_id[person] = format!("t{k:07}");
    }

    // source sample: whole communities in random order
    let n_communities = n.div_ceil(spec.community_size);
    let mut communities: Vec<usize> = (0..n_communities).collect();
    communities.shuffle(&mut rng);
    let mut sampled = Vec::with_capacity(spec.n_source);
    'fill: for c in communities {
        for person in community_range(c) {
            if sampled.len() == spec.n_source {
                break 'fill;
            }
            sampled.push(person);
        }
    }
    let mut in_source: HashMap<usize, usize> = HashMap::with_capacity(sampled.len());
    let mut source_order: Vec<usize> = (0..sampled.len()).collect();
    source_order.shuffle(&mut rng);
    let mut source_id = vec![String::new(); sampled.len()];
    for (k, &slot) in source_order.iter().enumerate() {
        source_id[slot] = format!("s{k:07}");
    }
    for (slot, &person) in sampled.iter().enumerate() {
        in_source.insert(person, slot);
    }

    // induced source friendships with dropout
    let mut source_adj: Vec<Vec<u32>> = vec![Vec::new(); sampled.len()];
    for (slot, &person) in sampled.iter().enumerate() {
        for &friend in &adjacency[person] {
            let Some(&fslot) = in_source.get(&(friend as usize)) else {
                continue;
            };
            if fslot <= slot {
                continue;
            }
            report.source_friend_refs_before_dropout += 2;
            if rng.random_bool(spec.friend_dropout) {
                continue;
            }
            report.source_friend_refs += 2;
            source_adj[slot].push(fslot as u32);
            source_adj[fslot].push(slot as u32);
        }
    }

    // target profiles
    let mut target = Vec::with_capacity(n);
    for person in 0..n {
        let first = &first_pool.names[person_first[person]];
        let last = &last_pool.names[person_last[person]];
        *report.target_first_counts.entry(first.canonical.clone()).or_default() += 1;
        *report.target_last_counts.entry(last.canonical.clone()).or_default() += 1;
        target.push(RawProfile {
            id: target_id[person].clone(),
            first: written(&mut rng, first, spec.cyrillic_rate),
            last: written(&mut rng, last, spec.cyrillic_rate),
            friends: adjacency[person]
                .iter()
                .map(|&f| target_id[f as usize].clone())
                .collect(),
        });
    }
    target.sort_by(|a, b| a.id.cmp(&b.id));

    // source profiles with name noise
    let mut source = Vec::with_capacity(sampled.len());
    let mut truth = Vec::with_capacity(sampled.len());
    for (slot, &person) in sampled.iter().enumerate() {
        let pool_idx = person_first[person];
        let mut first = first_pool.names[pool_idx].clone();
        let mut last = last_pool.names[person_last[person]].clone();
        let nicks = &nicknames[pool_idx];
        if !nicks.is_empty() && rng.random_bool(spec.nickname_rate) {
            first = nicks.choose(&mut rng).unwrap().clone();
            report.nickname_swaps += 1;
        } else if rng.random_bool(spec.alias_rate) {
            let mut other = first_pool.draw(&mut rng);
            while other == pool_idx {
                other = rng.random_range(0..first_pool.names.len());
            }
            first = first_pool.names[other].clone();
            report.aliases += 1;
        }
        let (mut first_text, mut last_text) = (
            written(&mut rng, &first, spec.cyrillic_rate),
            written(&mut rng, &last, spec.cyrillic_rate),
        );
        if rng.random_bool(spec.typo_rate) {
            report.typos += 1;
            if rng.random_bool(0.5) {
                first.canonical = typo(&mut rng, &first.canonical);
                first_text = capitalize(&first.canonical);
            } else {
                last.canonical = typo(&mut rng, &last.canonical);
                last_text = capitalize(&last.canonical);
            }
        }
        let mut friends: Vec<String> = source_adj[slot]
            .iter()
            .map(|&f| source_id[f as usize].clone())
            .collect();
        friends.sort();
        source.push(RawProfile {
            id: source_id[slot].clone(),
            first: first_text,
            last: last_text,
            friends,
        });
        truth.push((source_id[slot].clone(), target_id[person].clone()));
    }
    source.sort_by(|a, b| a.id.cmp(&b.id));
    truth.sort();
    report.planted_pairs = truth.len();

    let synonym_classes = first_pool
        .names
        .iter()
        .zip(&nicknames)
        .filter(|(_, nicks)| !nicks.is_empty())
        .map(|(name, nicks)| {
            std::iter::once(name)
                .chain(nicks)
                .map(|n| romanize(&n.canonical).expect("canonical"))
                .collect()
        })
        .collect();

    Ok(SyntheticCorpus {
        source,
        target,
        truth,
        synonym_classes,
        report,
    })
}
