//! Matching user profiles across two social networks using only personal
//! names and friend lists.
//!
//! Matching runs in three steps for every source profile:
//!
//! 1. candidate generation: target profiles whose first and last names are
//!    within a small edit distance of the source names (first names expanded
//!    through a learned synonym dictionary), sharing the first letter;
//! 2. ranking: candidates are scored by how many of their friends have names
//!    similar to the source profile's friends, each friend weighted by the
//!    inverse expected frequency of its full name;
//! 3. selection: the best candidate is accepted if its score exceeds `gamma`
//!    and beats the runner-up by a ratio above `delta`. A target claimed by
//!    several sources goes to the highest score.

pub mod config;
pub mod distance;
pub mod error;
pub mod eval;
pub mod index;
pub mod matcher;
pub mod name_model;
pub mod normalize;
pub mod pipeline;
pub mod profile;
pub mod scoring;

pub use config::MatchConfig;
pub use error::{Error, Result};
pub use index::CandidateIndex;
pub use matcher::{MatchDecision, Reason};
pub use name_model::{NameStats, SynonymDictionary};
pub use normalize::{romanize, CanonicalName};
pub use profile::{Network, Profile};
