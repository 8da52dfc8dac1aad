use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::profile::Profile;

const TOTAL_MARKER: &str = "#total";
const FIRST_FILE: &str = "first_names.tsv";
const LAST_FILE: &str = "last_names.tsv";

/// First- and last-name frequencies over one network, plus its profile count.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NameStats {
    first: HashMap<String, u64>,
    last: HashMap<String, u64>,
    total: u64,
}

impl NameStats {
    pub fn build<'a>(profiles: impl IntoIterator<Item = &'a Profile>) -> Result<Self> {
        let mut stats = NameStats::default();
        for p in profiles {
            stats.add(p);
        }
        if stats.total == 0 {
            return Err(Error::EmptyCorpus);
        }
        Ok(stats)
    }

    pub fn add(&mut self, profile: &Profile) {
        *self.first.entry(profile.first.to_string()).or_default() += 1;
        *self.last.entry(profile.last.to_string()).or_default() += 1;
        self.total += 1;
    }

    /// Folds in partial counts from another shard.
    pub fn merge(&mut self, other: NameStats) {
        for (k, v) in other.first {
            *self.first.entry(k).or_default() += v;
        }
        for (k, v) in other.last {
            *self.last.entry(k).or_default() += v;
        }
        self.total += other.total;
    }

    pub fn first_freq(&self, name: &str) -> u64 {
        self.first.get(name).copied().unwrap_or(0)
    }

    pub fn last_freq(&self, name: &str) -> u64 {
        self.last.get(name).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn first_names(&self) -> &HashMap<String, u64> {
        &self.first
    }

    pub fn last_names(&self) -> &HashMap<String, u64> {
        &self.last
    }

    /// Writes `first_names.tsv` and `last_names.tsv` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (file, table) in [(FIRST_FILE, &self.first), (LAST_FILE, &self.last)] {
            let path = dir.join(file);
            let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut w = BufWriter::new(f);
            write_table(&mut w, table, self.total)
                .and_then(|_| w.flush())
                .map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut tables = Vec::with_capacity(2);
        for file in [FIRST_FILE, LAST_FILE] {
            let path = dir.join(file);
            let f = File::open(&path).map_err(|e| Error::io(&path, e))?;
            tables.push(read_table(BufReader::new(f), &path)?);
        }
        let (last, last_total) = tables.pop().unwrap();
        let (first, first_total) = tables.pop().unwrap();
        if first_total != last_total {
            return Err(Error::parse(
                dir.join(LAST_FILE),
                1,
                format!("total {last_total} disagrees with first-name table total {first_total}"),
            ));
        }
        Ok(NameStats {
            first,
            last,
            total: first_total,
        })
    }
}

/// One table: a `#total<TAB>N` line, then `name<TAB>count` sorted by name.
pub fn write_table(w: &mut impl Write, table: &HashMap<String, u64>, total: u64) -> std::io::Result<()> {
    writeln!(w, "{TOTAL_MARKER}\t{total}")?;
    let mut rows: Vec<_> = table.iter().collect();
    rows.sort();
    for (name, count) in rows {
        writeln!(w, "{name}\t{count}")?;
    }
    Ok(())
}

pub fn read_table(r: impl BufRead, origin: &Path) -> Result<(HashMap<String, u64>, u64)> {
    let mut table = HashMap::new();
    let mut total = None;
    for (idx, line) in r.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(origin, line_no, "expected name<TAB>count"))?;
        let value: u64 = value
            .trim()
            .parse()
            .map_err(|_| Error::parse(origin, line_no, format!("bad count {value:?}")))?;
        if key == TOTAL_MARKER {
            total = Some(value);
        } else {
            if value == 0 {
                return Err(Error::parse(origin, line_no, "stored counts must be positive"));
            }
            table.insert(key.to_string(), value);
        }
    }
    let total = total.ok_or_else(|| Error::parse(origin, 1, "missing #total line"))?;
    Ok((table, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::romanize;

    fn p(id: &str, first: &str, last: &str) -> Profile {
        Profile::new(id, romanize(first).unwrap(), romanize(last).unwrap(), vec![]).0
    }

    #[test]
    fn counts_names() {
        let ps = [
            p("1", "ivan", "petrov"),
            p("2", "ivan", "sidorov"),
            p("3", "petr", "petrov"),
        ];
        let s = NameStats::build(&ps).unwrap();
        assert_eq!(s.first_freq("ivan"), 2);
        assert_eq!(s.first_freq("petr"), 1);
        assert_eq!(s.last_freq("petrov"), 2);
        assert_eq!(s.first_freq("boris"), 0);
        assert_eq!(s.total(), 3);
    }

    #[test]
    fn single_profile() {
        let s = NameStats::build(&[p("1", "anna", "smith")]).unwrap();
        assert_eq!(s.total(), 1);
        assert_eq!(s.first_freq("anna"), 1);
        assert_eq!(s.last_freq("smith"), 1);
    }

    #[test]
    fn empty_corpus() {
        assert!(matches!(NameStats::build(&[]), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn merge_equals_whole() {
        let ps = [
            p("1", "ivan", "petrov"),
            p("2", "ivan", "sidorov"),
            p("3", "petr", "petrov"),
        ];
        let whole = NameStats::build(&ps).unwrap();
        let mut a = NameStats::build(&ps[..1]).unwrap();
        a.merge(NameStats::build(&ps[1..]).unwrap());
        assert_eq!(a, whole);
    }

    #[test]
    fn save_load() {
        let dir = tempfile::tempdir().unwrap();
        let ps = [p("1", "ivan", "petrov"), p("2", "ivan", "sidorov")];
        let s = NameStats::build(&ps).unwrap();
        s.save(dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join(FIRST_FILE)).unwrap();
        assert_eq!(text, "#total\t2\nivan\t2\n");
        assert_eq!(NameStats::load(dir.path()).unwrap(), s);
    }

    #[test]
    fn read_table_rejects_garbage() {
        let origin = Path::new("t");
        assert!(read_table("ivan 2\n".as_bytes(), origin).is_err());
        assert!(read_table("ivan\t2\n".as_bytes(), origin).is_err());
        assert!(read_table("#total\t2\nivan\tx\n".as_bytes(), origin).is_err());
        assert!(read_table("#total\t2\nivan\t0\n".as_bytes(), origin).is_err());
    }
}
