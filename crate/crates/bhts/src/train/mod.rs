pub mod cluster;
pub mod duration;
pub mod em;
pub mod fb;
pub mod pipeline;
pub mod stats;

use crate::frontend::ContextLabel;
use crate::signal::ObservationSequence;

/// One corpus utterance ready for embedded training: its context labels in
/// order and the frame-synchronous observations.
#[derive(Debug, Clone)]
pub struct TrainingUtterance {
    pub id: String,
    pub labels: Vec<ContextLabel>,
    pub obs: ObservationSequence,
}

pub use cluster::{cluster_states_mdl, ClusterConfig};
pub use duration::{estimate_durations, estimate_gv, state_runs};
pub use em::{
    accumulate_corpus, clone_to_fullcontext, flat_start, reestimate, score_corpus, ModelKey,
};
pub use fb::{
    chain_log_emissions, forward_backward, forward_backward_scaled, viterbi, viterbi_align,
    Occupancy,
};
pub use pipeline::{parse_train_config, stats_csv, train_pipeline, StageRow, TrainConfig};
pub use stats::{duration_from_stats, GaussStats, MsdStats, StateStats};
