use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::corpus::loader::CorpusEntry;
use crate::par::ordered_map;
use crate::signal::{read_wav, AnalysisConfig, FeatureRecord};
use crate::util::{crc32, write_atomic};
use crate::{Error, Result};

/// On-disk feature store keyed by utterance id and a hash of the analysis
/// config, so changing any analysis parameter invalidates every entry.
pub struct FeatureCache {
    dir: PathBuf,
    config_hash: u32,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl FeatureCache {
    pub fn new(dir: &Path, config: &AnalysisConfig) -> Result<Self> {
        config.validate()?;
        fs::create_dir_all(dir)
            .map_err(|e| Error::Corpus(format!("cannot create cache dir {}: {e}", dir.display())))?;
        Ok(FeatureCache {
            dir: dir.to_path_buf(),
            config_hash: crc32(&config.canonical_bytes()),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        })
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    fn entry_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}-{:08x}.feat", self.config_hash))
    }

    /// Returns the cached record for `id`, or extracts from `wav_path`,
    /// stores, and returns. A corrupt cache file is recomputed with a warning.
    pub fn load_or_extract(
        &self,
        id: &str,
        wav_path: &Path,
        config: &AnalysisConfig,
    ) -> Result<FeatureRecord> {
        let path = self.entry_path(id);
        if path.exists() {
            match FeatureRecord::load(&path) {
                Ok(record) => {
                    self.hits.fetch_add(1, Ordering::Relaxed);
                    return Ok(record);
                }
                Err(e) => {
                    eprintln!("warning: corrupt cache entry {}: {e}; recomputing", path.display());
                }
            }
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let waveform = read_wav(wav_path)?;
        let record = FeatureRecord::extract(&waveform, config)?;
        write_atomic(&path, &record.to_bytes())?;
        Ok(record)
    }

    /// Features for a whole corpus, in corpus order.
    pub fn load_all(
        &self,
        corpus: &[CorpusEntry],
        config: &AnalysisConfig,
    ) -> Result<Vec<FeatureRecord>> {
        ordered_map(corpus, |entry| {
            self.load_or_extract(&entry.id, &entry.wav_path, config)
        })
        .into_iter()
        .collect()
    }
}
