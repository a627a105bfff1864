//! Model data structures: context-dependent five-state HMMs with spectral
//! and MSD excitation streams, duration models, decision trees, GV
//! statistics, question-set generation and binary persistence.

pub mod gaussian;
pub mod hmm;
pub mod persist;
pub mod question;
pub mod tree;

pub use gaussian::{
    msd_log_prob, DurationGaussian, MSDGaussian, StreamGaussian, DURATION_MEAN_FLOOR,
    DURATION_VARIANCE_FLOOR, VARIANCE_FLOOR,
};
pub use hmm::{
    inventory_hash, GVModel, HmmState, ModelSet, PhoneHMM, StateDistributions, Stream, TiedPools,
    MODEL_VERSION, NUM_STATES, SELF_LOOP_MAX, SELF_LOOP_MIN,
};
pub use persist::{load_model_set, model_set_from_bytes, model_set_to_bytes, save_model_set};
pub use question::{generate_question_set, Predicate, Question};
pub use tree::{tree_traverse, DecisionTree, TreeNode};
