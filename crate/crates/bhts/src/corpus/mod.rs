//! Corpus I/O: annotation files, the on-disk corpus layout, the synthetic
//! verification corpus, and the feature cache.

pub mod cache;
pub mod loader;
pub mod synthetic;
pub mod utt;

pub use cache::FeatureCache;
pub use loader::{load_corpus, CorpusEntry};
pub use synthetic::{generate_synthetic_corpus, SyntheticCorpusSpec};
pub use utt::{format_annotation, parse_annotation};
