//! Classify the semantic relation between two words from the lexico-syntactic
//! patterns that join them in a corpus.
//!
//! The pipeline runs in stages: [`corpus`] builds a positional index,
//! [`morphology`] supplies variants and lemmas, [`harvest`] collects short
//! phrases joining a pair, [`features`] turns them into pattern-frequency
//! vectors, and [`learner`] fits one-vs-one RBF support vector machines with
//! sigmoid-calibrated outputs. [`tasks`] frames analogy, synonym and labeled
//! relation problems on top of that.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod features;
pub mod harvest;
pub mod learner;
pub mod morphology;
pub mod pair;
pub mod tasks;

pub use corpus::CorpusIndex;
pub use error::{Error, Result};
pub use features::{FeatureSpec, FeatureVector, Pattern, SparseVector};
pub use harvest::{harvest, Phrase};
pub use learner::{Classifier, Learner, SvmLearner, TrainedModel};
pub use morphology::Morphology;
pub use pair::{LabeledPair, WordPair};
