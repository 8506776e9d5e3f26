//! Weakly supervised temporal action segmentation with hidden Markov models.
//!
//! Every action class is a strict left-to-right HMM whose states emit
//! single-component multivariate Gaussians. Given frame features and the
//! ordered list of actions in each training video (no timestamps), the
//! models are bootstrapped from a uniform split and refined by
//! forward-backward reestimation and Viterbi realignment. Trained models
//! align transcripts to unseen videos or decode videos under a path grammar
//! or bigram model mined from the training transcripts.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, threading and
//! the command-line driver live in the `actseg` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod error;
pub mod eval;
pub mod exec;
pub mod gaussian;
pub mod grammar;
pub mod hmm;
mod linalg;
pub mod math;
pub mod train;

pub use corpus::{
    FeatureSequence, FrameLabeling, LabelId, LabelSpace, Segment, Segmentation, Transcript,
};
pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use gaussian::{CovarianceMode, GaussianModel, PosteriorMatrix, PriorTable, ScoreMatrix};
pub use grammar::{BigramModel, DecodeResult, PathGrammar};
pub use hmm::{ActionInventory, ActionModel, SequenceHmm, StateAlignment};
pub use train::{ModelSet, TrainConfig, TrainingCorpus, UpdateMode};
