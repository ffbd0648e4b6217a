//! Task framings and evaluation protocols.

pub mod data;
pub mod eval;
pub mod framing;
pub mod pipeline;
pub mod synthetic;

pub use data::{ChoiceQuestion, Item, TaskContent, TaskData, TaskKind, TaskShape};
pub use eval::{
    crossval_evaluate, evaluate_analogies, evaluate_synonyms, majority_baseline, random_baseline, run_task,
    score_choice_task, solve_analogy, stratified_folds, AnalogyOutcome, EvalResult, ItemResult, LabelAudit,
    LabelStage, RunConfig, SharedFeatures,
};
pub use framing::{frame_analogy_question, frame_synonym_question, AnalogyFraming, NEGATIVE, POSITIVE};
pub use pipeline::Pipeline;
