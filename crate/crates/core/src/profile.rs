//! Profiles, networks, and the line-delimited profile file.
//!
//! A profile file has one record per line:
//! `id<TAB>first<TAB>last<TAB>friend_id,friend_id,...`. Names may be raw
//! (Cyrillic or Latin); they are normalized on load. A record without friends
//! has an empty (or missing) fourth field.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::normalize::{CanonicalName, RomanizationTable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub id: String,
    pub first: CanonicalName,
    pub last: CanonicalName,
    pub friends: Vec<String>,
}

impl Profile {
    /// Builds a profile, dropping duplicate friend ids and self references.
    /// Returns the profile and the number of dropped references.
    pub fn new(
        id: impl Into<String>,
        first: CanonicalName,
        last: CanonicalName,
        friends: impl IntoIterator<Item = String>,
    ) -> (Self, usize) {
        let id = id.into();
        let mut seen = HashSet::new();
        let mut dropped = 0;
        let mut kept = Vec::new();
        for f in friends {
            if f == id || !seen.insert(f.clone()) {
                dropped += 1;
            } else {
                kept.push(f);
            }
        }
        (
            Profile {
                id,
                first,
                last,
                friends: kept,
            },
            dropped,
        )
    }
}

/// A friend as seen by scoring: first and last name.
pub type FriendName<'a> = (&'a str, &'a str);

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NetworkDiagnostics {
    /// Friend references that did not resolve to a profile in the network.
    pub unresolved_friends: usize,
    /// Duplicate or self friend references removed on load.
    pub dropped_friend_refs: usize,
}

/// All profiles of one social network with friend references resolved.
#[derive(Debug, Clone, Default)]
pub struct Network {
    profiles: Vec<Profile>,
    by_id: HashMap<String, u32>,
    friends: Vec<Vec<u32>>,
    diagnostics: NetworkDiagnostics,
}

impl Network {
    pub fn from_profiles(profiles: Vec<Profile>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(profiles.len());
        for (i, p) in profiles.iter().enumerate() {
            if by_id.insert(p.id.clone(), i as u32).is_some() {
                return Err(Error::DuplicateId(p.id.clone()));
            }
        }
        let mut unresolved = 0;
        let friends = profiles
            .iter()
            .map(|p| {
                p.friends
                    .iter()
                    .filter_map(|f| {
                        let idx = by_id.get(f).copied();
                        if idx.is_none() {
                            unresolved += 1;
                        }
                        idx
                    })
                    .collect()
            })
            .collect();
        Ok(Network {
            profiles,
            by_id,
            friends,
            diagnostics: NetworkDiagnostics {
                unresolved_friends: unresolved,
                dropped_friend_refs: 0,
            },
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file), path)
    }

    /// Reads a profile file; `origin` is used in error messages.
    pub fn read(reader: impl BufRead, origin: &Path) -> Result<Self> {
        let table = RomanizationTable::bgn();
        let mut profiles = Vec::new();
        let mut dropped = 0;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::io(origin, e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if !(3..=4).contains(&fields.len()) {
                return Err(Error::parse(
                    origin,
                    line_no,
                    format!("expected 3 or 4 tab-separated fields, found {}", fields.len()),
                ));
            }
            let id = fields[0].trim();
            if id.is_empty() {
                return Err(Error::parse(origin, line_no, "empty profile id"));
            }
            let first = table
                .romanize(fields[1])
                .map_err(|e| Error::parse(origin, line_no, format!("first name: {e}")))?;
            let last = table
                .romanize(fields[2])
                .map_err(|e| Error::parse(origin, line_no, format!("last name: {e}")))?;
            let friends = fields
                .get(3)
                .map(|f| {
                    f.split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(String::from)
                        .collect::<Vec<_>>()
                })
                .unwrap_or_default();
            let (profile, d) = Profile::new(id, first, last, friends);
            dropped += d;
            profiles.push(profile);
        }
        let mut net = Self::from_profiles(profiles)?;
        net.diagnostics.dropped_friend_refs = dropped;
        Ok(net)
    }

    /// Writes the network in profile-file format, canonical names included.
    pub fn write(&self, mut w: impl Write) -> std::io::Result<()> {
        for p in &self.profiles {
            writeln!(w, "{}\t{}\t{}\t{}", p.id, p.first, p.last, p.friends.join(","))?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    pub fn profile(&self, idx: usize) -> &Profile {
        &self.profiles[idx]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).map(|&i| i as usize)
    }

    pub fn get(&self, id: &str) -> Option<&Profile> {
        self.index_of(id).map(|i| &self.profiles[i])
    }

    /// Names of the resolved friends of profile `idx`, in friend-list order.
    pub fn friend_names(&self, idx: usize) -> Vec<FriendName<'_>> {
        self.friends[idx]
            .iter()
            .map(|&f| {
                let p = &self.profiles[f as usize];
                (p.first.as_str(), p.last.as_str())
            })
            .collect()
    }

    pub fn friend_count(&self, idx: usize) -> usize {
        self.friends[idx].len()
    }

    pub fn diagnostics(&self) -> NetworkDiagnostics {
        self.diagnostics
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::romanize;

    fn read(text: &str) -> Result<Network> {
        Network::read(text.as_bytes(), Path::new("test.tsv"))
    }

    #[test]
    fn parses_and_normalizes() {
        let net = read("1\tИван\tПетров\t2,3\n2\tAnna\tSmith\t1\n\n3\tJosé\tLópez\t\n").unwrap();
        assert_eq!(net.len(), 3);
        let p = net.get("1").unwrap();
        assert_eq!(p.first.as_str(), "ivan");
        assert_eq!(p.last.as_str(), "petrov");
        assert_eq!(net.friend_names(0), vec![("anna", "smith"), ("jose", "lopez")]);
        assert!(net.get("3").unwrap().friends.is_empty());
    }

    #[test]
    fn three_field_record_has_no_friends() {
        let net = read("a\tivan\tpetrov\n").unwrap();
        assert_eq!(net.friend_count(0), 0);
    }

    #[test]
    fn unresolved_and_duplicate_friends_are_tallied() {
        let net = read("1\tivan\tpetrov\t2,2,1,9\n2\tanna\tsmith\t\n").unwrap();
        assert_eq!(net.get("1").unwrap().friends, vec!["2", "9"]);
        assert_eq!(net.friend_count(0), 1);
        let d = net.diagnostics();
        assert_eq!(d.unresolved_friends, 1);
        assert_eq!(d.dropped_friend_refs, 2);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match read("1\tivan\tpetrov\t\n2\tonlyone\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match read("1\tivan\t!!!\t\n") {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 1);
                assert!(message.contains("last name"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        assert!(matches!(
            read("1\tivan\tpetrov\t\n1\tanna\tsmith\t\n"),
            Err(Error::DuplicateId(id)) if id == "1"
        ));
    }

    #[test]
    fn write_round_trips() {
        let (p, _) = Profile::new(
            "x",
            romanize("Ivan").unwrap(),
            romanize("Petrov").unwrap(),
            vec!["y".to_string()],
        );
        let (q, _) = Profile::new("y", romanize("Anna").unwrap(), romanize("Ivanova").unwrap(), vec![]);
        let net = Network::from_profiles(vec![p, q]).unwrap();
        let mut buf = Vec::new();
        net.write(&mut buf).unwrap();
        let back = read(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.profiles(), net.profiles());
    }
}
