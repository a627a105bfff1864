use std::collections::BTreeMap;

use super::gaussian::{DurationGaussian, MSDGaussian, StreamGaussian};
use super::tree::DecisionTree;
use crate::frontend::{phoneme_inventory, ContextLabel};
use crate::signal::{AnalysisConfig, DeltaWindows};
use crate::util::crc32;
use crate::{Error, Result};

pub const NUM_STATES: usize = 5;
pub const MODEL_VERSION: u32 = 1;
pub const SELF_LOOP_MIN: f64 = 1e-4;
pub const SELF_LOOP_MAX: f64 = 1.0 - 1e-4;

/// One emitting state: spectral and excitation output distributions plus the
/// trained self-loop probability. Stream weights are fixed at 1.0 each.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmState {
    pub spectrum: StreamGaussian,
    pub excitation: MSDGaussian,
    pub self_loop: f64,
}

/// Five-state left-to-right no-skip phone model with per-state duration
/// Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct PhoneHMM {
    pub states: Vec<HmmState>,
    pub durations: Vec<DurationGaussian>,
}

impl PhoneHMM {
    pub fn validate(&self) -> Result<()> {
        if self.states.len() != NUM_STATES || self.durations.len() != NUM_STATES {
            return Err(Error::ModelFile(format!(
                "phone model must have {NUM_STATES} states, got {}/{}",
                self.states.len(),
                self.durations.len()
            )));
        }
        for s in &self.states {
            if !(SELF_LOOP_MIN..=SELF_LOOP_MAX).contains(&s.self_loop) {
                return Err(Error::ModelFile(format!(
                    "self-loop probability {} outside [{SELF_LOOP_MIN}, {SELF_LOOP_MAX}]",
                    s.self_loop
                )));
            }
        }
        Ok(())
    }
}

/// Parameter stream selector; each (state, stream) pair owns one decision
/// tree after clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stream {
    Spectrum,
    Excitation,
    Duration,
}

impl Stream {
    pub const ALL: [Stream; 3] = [Stream::Spectrum, Stream::Excitation, Stream::Duration];

    pub fn to_u8(self) -> u8 {
        match self {
            Stream::Spectrum => 0,
            Stream::Excitation => 1,
            Stream::Duration => 2,
        }
    }

    pub fn from_u8(v: u8) -> Result<Stream> {
        match v {
            0 => Ok(Stream::Spectrum),
            1 => Ok(Stream::Excitation),
            2 => Ok(Stream::Duration),
            other => Err(Error::ModelFile(format!("unknown stream tag {other}"))),
        }
    }
}

/// Mean and variance, over training utterances, of the per-utterance
/// variance vector of the static mel-cepstrum.
#[derive(Debug, Clone, PartialEq)]
pub struct GVModel {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

/// Tied distributions produced by clustering; decision-tree leaves index
/// into these pools.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TiedPools {
    pub spectrum: Vec<StreamGaussian>,
    pub excitation: Vec<MSDGaussian>,
    pub duration: Vec<DurationGaussian>,
}

/// Distributions one label resolves to in a given state.
#[derive(Debug, Clone, Copy)]
pub struct StateDistributions<'a> {
    pub spectrum: &'a StreamGaussian,
    pub excitation: &'a MSDGaussian,
    pub duration: &'a DurationGaussian,
}

/// CRC of the phoneme inventory symbols; stamps model files against the
/// inventory they were trained with.
pub fn inventory_hash() -> u32 {
    let joined = phoneme_inventory()
        .iter()
        .map(|p| p.symbol)
        .collect::<Vec<_>>()
        .join("\n");
    crc32(joined.as_bytes())
}

/// The complete trained artifact: analysis settings, monophone and
/// full-context models, per-(state, stream) decision trees with their tied
/// distribution pools, and the GV statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSet {
    pub version: u32,
    pub config: AnalysisConfig,
    pub windows: DeltaWindows,
    pub inventory_hash: u32,
    pub monophones: BTreeMap<String, PhoneHMM>,
    pub fullcontext: BTreeMap<String, PhoneHMM>,
    pub trees: BTreeMap<(u8, Stream), DecisionTree>,
    pub tied: TiedPools,
    pub gv: Option<GVModel>,
}

impl ModelSet {
    pub fn new(config: AnalysisConfig, windows: DeltaWindows) -> Self {
        ModelSet {
            version: MODEL_VERSION,
            config,
            windows,
            inventory_hash: inventory_hash(),
            monophones: BTreeMap::new(),
            fullcontext: BTreeMap::new(),
            trees: BTreeMap::new(),
            tied: TiedPools::default(),
            gv: None,
        }
    }

    /// Dimension of the spectral observation vector (statics plus deltas).
    pub fn spectral_dim(&self) -> usize {
        (self.config.mcep_order + 1) * self.windows.windows.len()
    }

    pub fn has_trees(&self) -> bool {
        !self.trees.is_empty()
    }

    /// Resolves one label and state through the decision trees to its tied
    /// distributions.
    pub fn resolve_state(&self, label: &ContextLabel, state: usize) -> Result<StateDistributions<'_>> {
        let missing =
            |what: &str| Error::Synth(format!("model has no {what}; run training to completion"));
        let key = state as u8;
        let spectrum_id = self
            .trees
            .get(&(key, Stream::Spectrum))
            .ok_or_else(|| missing("spectrum trees"))?
            .traverse(label) as usize;
        let excitation_id = self
            .trees
            .get(&(key, Stream::Excitation))
            .ok_or_else(|| missing("excitation trees"))?
            .traverse(label) as usize;
        let duration_id = self
            .trees
            .get(&(key, Stream::Duration))
            .ok_or_else(|| missing("duration trees"))?
            .traverse(label) as usize;
        let bad_leaf = |stream: &str, id: usize| {
            Error::Synth(format!("{stream} tree leaf {id} outside tied pool"))
        };
        Ok(StateDistributions {
            spectrum: self
                .tied
                .spectrum
                .get(spectrum_id)
                .ok_or_else(|| bad_leaf("spectrum", spectrum_id))?,
            excitation: self
                .tied
                .excitation
                .get(excitation_id)
                .ok_or_else(|| bad_leaf("excitation", excitation_id))?,
            duration: self
                .tied
                .duration
                .get(duration_id)
                .ok_or_else(|| bad_leaf("duration", duration_id))?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.windows.validate()?;
        if self.inventory_hash != inventory_hash() {
            return Err(Error::ModelFile(
                "model was built against a different phoneme inventory".into(),
            ));
        }
        for hmm in self.monophones.values().chain(self.fullcontext.values()) {
            hmm.validate()?;
        }
        for tree in self.trees.values() {
            tree.validate()?;
        }
        Ok(())
    }
}
