//! Statistical name layer: name frequencies over the target network and the
//! first-name synonym dictionary.

mod stats;
mod synonyms;

pub use stats::{read_table, write_table, NameStats};
pub use synonyms::{
    extract_name_pairs, name_pairs_from_truth, NamePair, PairDiagnostics, SynonymDictionary, DEFAULT_MIN_COUNT,
    DEFAULT_REVIEW_LIMIT,
};
