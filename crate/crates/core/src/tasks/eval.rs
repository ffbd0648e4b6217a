//! Evaluation protocols: repeated-trial analogy solving, stratified
//! cross-validation, and choice scoring.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::{FeatureSpec, FeatureVector};
use crate::learner::argmax;
use crate::pair::{LabeledPair, WordPair};
use crate::tasks::data::{choice_letter, ChoiceQuestion, Item, TaskContent, TaskData, TaskShape};
use crate::tasks::framing::{binary_classes, frame_analogy_question, frame_synonym_question};
use crate::tasks::pipeline::Pipeline;

pub const DEFAULT_TRIALS: usize = 10;
pub const DEFAULT_FOLDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemResult {
    pub id: String,
    pub gold: String,
    pub predicted: String,
    pub correct: bool,
    /// Score per candidate answer or class, in presentation order.
    pub probabilities: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    pub accuracy: f64,
    /// Majority-class accuracy for labeled tasks, random-guess accuracy for
    /// choice tasks.
    pub baseline: f64,
    pub items: Vec<ItemResult>,
    /// Anything that departed from the normal protocol, such as a fold
    /// trained without every class.
    pub flags: Vec<String>,
}

impl EvalResult {
    fn from_items(items: Vec<ItemResult>, baseline: f64, flags: Vec<String>) -> Self {
        let correct = items.iter().filter(|i| i.correct).count();
        let accuracy = if items.is_empty() { 0.0 } else { correct as f64 / items.len() as f64 };
        EvalResult {
            accuracy,
            baseline,
            items,
            flags,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LabelStage {
    FoldAssignment,
    Training { fold: usize },
    Scoring,
}

/// Records every read of a gold label during cross-validation.
#[derive(Debug, Default)]
pub struct LabelAudit {
    reads: Mutex<Vec<(usize, LabelStage)>>,
}

impl LabelAudit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reads(&self) -> Vec<(usize, LabelStage)> {
        self.reads.lock().unwrap().clone()
    }
}

struct Labels<'a> {
    labels: Vec<usize>,
    audit: Option<&'a LabelAudit>,
}

impl Labels<'_> {
    fn get(&self, item: usize, stage: LabelStage) -> usize {
        if let Some(a) = self.audit {
            a.reads.lock().unwrap().push((item, stage));
        }
        self.labels[item]
    }
}

/// Item probabilities of one fold plus an optional flag.
type FoldOutcome = (Vec<(usize, Vec<f64>)>, Option<String>);

/// Fold of each item. Within each class the items are shuffled, the class
/// lists are concatenated in class order and item `i` of that sequence goes
/// to fold `i mod folds`, so every fold gets a near-equal share of each
/// class.
pub fn stratified_folds(labels: &[usize], n_classes: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = Vec::with_capacity(labels.len());
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        order.extend(members);
    }
    let mut fold = vec![0; labels.len()];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % folds;
    }
    fold
}

/// Majority-class accuracy of `labels`.
pub fn majority_baseline<S: AsRef<str>>(labels: &[S]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for l in labels {
        *counts.entry(l.as_ref()).or_default() += 1;
    }
    *counts.values().max().unwrap() as f64 / labels.len() as f64
}

/// Expected accuracy of guessing uniformly among the choices.
pub fn random_baseline(questions: &[ChoiceQuestion]) -> f64 {
    if questions.is_empty() {
        return 0.0;
    }
    questions.iter().map(|q| 1.0 / q.choices.len() as f64).sum::<f64>() / questions.len() as f64
}

/// Stratified k-fold cross-validation over labeled pairs.
///
/// Features are selected once over all pairs, which uses no labels. Each
/// fold trains only on the labels of the other folds. When a training split
/// lacks a class, the model is trained on the classes present and the fold
/// is flagged; the missing classes get probability zero.
pub fn crossval_evaluate(
    pairs: &[LabeledPair],
    classes: &[String],
    folds: usize,
    seed: u64,
    pipeline: &Pipeline,
    audit: Option<&LabelAudit>,
) -> Result<EvalResult> {
    if pairs.len() < 2 {
        return Err(Error::InvalidInput("cross-validation needs at least 2 items".into()));
    }
    if folds < 2 {
        return Err(Error::InvalidInput("cross-validation needs at least 2 folds".into()));
    }
    let mut flags = Vec::new();
    let folds = if folds > pairs.len() {
        flags.push(format!("folds reduced from {folds} to {}", pairs.len()));
        pairs.len()
    } else {
        folds
    };
    let mut ids = Vec::with_capacity(pairs.len());
    for p in pairs {
        let l = p
            .label
            .as_deref()
            .ok_or_else(|| Error::InvalidInput(format!("pair {} has no label", p.pair)))?;
        let id = classes
            .iter()
            .position(|c| c == l)
            .ok_or_else(|| Error::InvalidInput(format!("label {l:?} of {} is not a declared class", p.pair)))?;
        ids.push(id);
    }
    let labels = Labels { labels: ids, audit };

    let assign: Vec<usize> = (0..pairs.len()).map(|i| labels.get(i, LabelStage::FoldAssignment)).collect();
    let fold_of = stratified_folds(&assign, classes.len(), folds, seed);

    let word_pairs: Vec<WordPair> = pairs.iter().map(|p| p.pair.clone()).collect();
    let (_, vectors) = pipeline.extract(&word_pairs)?;

    let per_fold: Vec<FoldOutcome> = (0..folds)
        .into_par_iter()
        .map(|f| {
            let train_idx: Vec<usize> = (0..pairs.len()).filter(|&i| fold_of[i] != f).collect();
            let test_idx: Vec<usize> = (0..pairs.len()).filter(|&i| fold_of[i] == f).collect();
            let train_labels: Vec<usize> = train_idx.iter().map(|&i| labels.get(i, LabelStage::Training { fold: f })).collect();
            let present: Vec<usize> = (0..classes.len()).filter(|c| train_labels.contains(c)).collect();
            let flag = (present.len() < classes.len()).then(|| {
                let missing: Vec<&str> = (0..classes.len())
                    .filter(|c| !present.contains(c))
                    .map(|c| classes[c].as_str())
                    .collect();
                format!("fold {f}: trained without {}", missing.join(", "))
            });
            let probs: Vec<(usize, Vec<f64>)> = if present.len() == 1 {
                let mut p = vec![0.0; classes.len()];
                p[present[0]] = 1.0;
                test_idx.iter().map(|&i| (i, p.clone())).collect()
            } else {
                let sub: Vec<String> = present.iter().map(|&c| classes[c].clone()).collect();
                let examples: Vec<(&FeatureVector, &str)> = train_idx
                    .iter()
                    .zip(&train_labels)
                    .map(|(&i, &l)| (&vectors[i], classes[l].as_str()))
                    .collect();
                let model = pipeline.learner().fit(&examples, &sub)?;
                test_idx
                    .iter()
                    .map(|&i| {
                        let sp = model.predict_proba(&vectors[i]);
                        let mut p = vec![0.0; classes.len()];
                        for (k, &c) in present.iter().enumerate() {
                            p[c] = sp[k];
                        }
                        (i, p)
                    })
                    .collect()
            };
            Ok((probs, flag))
        })
        .collect::<Result<_>>()?;

    let mut probs: Vec<Vec<f64>> = vec![Vec::new(); pairs.len()];
    for (fold_probs, flag) in per_fold {
        for (i, p) in fold_probs {
            probs[i] = p;
        }
        flags.extend(flag);
    }

    let items: Vec<ItemResult> = probs
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let predicted = argmax(&p);
            let gold = labels.get(i, LabelStage::Scoring);
            ItemResult {
                id: pairs[i].pair.to_string(),
                gold: classes[gold].clone(),
                predicted: classes[predicted].clone(),
                correct: predicted == gold,
                probabilities: classes.iter().cloned().zip(p).collect(),
            }
        })
        .collect();
    let gold: Vec<&str> = pairs.iter().filter_map(|p| p.label.as_deref()).collect();
    Ok(EvalResult::from_items(items, majority_baseline(&gold), flags))
}

/// Pick, per question, the choice with the highest score. Ties go to the
/// earliest choice.
pub fn score_choice_task(questions: &[ChoiceQuestion], scores: &[Vec<f64>]) -> Result<EvalResult> {
    if questions.len() != scores.len() {
        return Err(Error::InvalidInput("one score list per question required".into()));
    }
    let mut items = Vec::with_capacity(questions.len());
    for (qi, (q, s)) in questions.iter().zip(scores).enumerate() {
        if s.len() != q.choices.len() {
            return Err(Error::InvalidInput(format!("question {} has {} choices but {} scores", qi + 1, q.choices.len(), s.len())));
        }
        let predicted = argmax(s);
        items.push(ItemResult {
            id: format!("{} {}", qi + 1, q.stem),
            gold: choice_letter(q.answer),
            predicted: choice_letter(predicted),
            correct: predicted == q.answer,
            probabilities: (0..s.len()).map(|i| (choice_letter(i), s[i])).collect(),
        });
    }
    Ok(EvalResult::from_items(items, random_baseline(questions), Vec::new()))
}

/// Feature vectors computed once for every stem and choice of a task.
#[derive(Debug, Clone)]
pub struct SharedFeatures {
    pub spec: FeatureSpec,
    pub vectors: HashMap<WordPair, FeatureVector>,
}

impl SharedFeatures {
    pub fn build(questions: &[ChoiceQuestion], pipeline: &Pipeline) -> Result<Self> {
        let mut pairs = Vec::new();
        for q in questions {
            for item in std::iter::once(&q.stem).chain(&q.choices) {
                if let Item::Pair(p) = item {
                    pairs.push(p.clone());
                }
            }
        }
        let (spec, vectors) = pipeline.extract(&pairs)?;
        Ok(SharedFeatures {
            spec,
            vectors: pairs.into_iter().zip(vectors).collect(),
        })
    }

    fn get(&self, p: &WordPair) -> Result<&FeatureVector> {
        self.vectors
            .get(p)
            .ok_or_else(|| Error::InvalidInput(format!("pair {p} missing from shared features")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogyOutcome {
    pub predicted: usize,
    /// Positive-class probability per choice, averaged over trials.
    pub probabilities: Vec<f64>,
    /// Negative example drawn in each trial.
    pub negatives: Vec<WordPair>,
}

/// Solve one analogy question by averaging `trials` independently framed
/// binary problems. Without `shared`, features are reselected in every
/// trial over the seven pairs involved.
pub fn solve_analogy(
    q: &ChoiceQuestion,
    bank: &[WordPair],
    pipeline: &Pipeline,
    trials: usize,
    rng: &mut ChaCha8Rng,
    shared: Option<&SharedFeatures>,
) -> Result<AnalogyOutcome> {
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    let classes = binary_classes();
    let mut sums = vec![0.0; q.choices.len()];
    let mut negatives = Vec::with_capacity(trials);
    for _ in 0..trials {
        let framing = frame_analogy_question(q, bank, rng)?;
        let pairs: Vec<WordPair> = framing
            .training
            .iter()
            .map(|t| t.0.clone())
            .chain(framing.testing.iter().cloned())
            .collect();
        let owned;
        let vectors: Vec<&FeatureVector> = match shared {
            Some(s) => pairs.iter().map(|p| s.get(p)).collect::<Result<_>>()?,
            None => {
                owned = pipeline.extract(&pairs)?.1;
                owned.iter().collect()
            }
        };
        let examples: Vec<(&FeatureVector, &str)> = vec![(vectors[0], framing.training[0].1), (vectors[1], framing.training[1].1)];
        let model = pipeline.learner().fit(&examples, &classes)?;
        for (s, v) in sums.iter_mut().zip(&vectors[2..]) {
            *s += model.predict_proba(v)[0];
        }
        negatives.push(framing.negative().clone());
    }
    let probabilities: Vec<f64> = sums.iter().map(|s| s / trials as f64).collect();
    Ok(AnalogyOutcome {
        predicted: argmax(&probabilities),
        probabilities,
        negatives,
    })
}

/// Deterministic per-question generator: a seed plus a stream per question,
/// so results do not depend on the order questions are processed in.
pub fn question_rng(seed: u64, question: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(question as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub trials: usize,
    pub folds: usize,
    pub seed: u64,
    /// Select one feature set for the whole analogy task instead of per trial.
    pub reuse_features: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            trials: DEFAULT_TRIALS,
            folds: DEFAULT_FOLDS,
            seed: 0,
            reuse_features: false,
        }
    }
}

pub fn evaluate_analogies(questions: &[ChoiceQuestion], pipeline: &Pipeline, config: &RunConfig) -> Result<EvalResult> {
    let bank: Vec<WordPair> = questions
        .iter()
        .map(|q| {
            q.stem_pair()
                .cloned()
                .ok_or_else(|| Error::InvalidInput("analogy stems must be word pairs".into()))
        })
        .collect::<Result<_>>()?;
    let shared = if config.reuse_features {
        Some(SharedFeatures::build(questions, pipeline)?)
    } else {
        // warm the memo in parallel; per-trial selection then only reads it
        let mut all = bank.clone();
        for q in questions {
            for c in &q.choices {
                if let Item::Pair(p) = c {
                    all.push(p.clone());
                }
            }
        }
        pipeline.prefetch(&all)?;
        None
    };
    let outcomes: Vec<AnalogyOutcome> = questions
        .par_iter()
        .enumerate()
        .map(|(i, q)| solve_analogy(q, &bank, pipeline, config.trials, &mut question_rng(config.seed, i), shared.as_ref()))
        .collect::<Result<_>>()?;
    let scores: Vec<Vec<f64>> = outcomes.into_iter().map(|o| o.probabilities).collect();
    let mut result = score_choice_task(questions, &scores)?;
    if let Some(s) = &shared {
        result.flags.push(format!("shared feature set of {} patterns", s.spec.len()));
    }
    Ok(result)
}

/// Cross-validate the `stem:choice` pairs of synonym questions, then answer
/// each question with its most probable positive pair.
pub fn evaluate_synonyms(questions: &[ChoiceQuestion], pipeline: &Pipeline, config: &RunConfig) -> Result<EvalResult> {
    let mut pairs = Vec::new();
    for q in questions {
        for (p, l) in frame_synonym_question(q)? {
            pairs.push(LabeledPair {
                pair: p,
                label: Some(l.to_string()),
            });
        }
    }
    let cv = crossval_evaluate(&pairs, &binary_classes(), config.folds, config.seed, pipeline, None)?;
    let mut offset = 0;
    let mut scores = Vec::with_capacity(questions.len());
    for q in questions {
        let n = q.choices.len();
        scores.push(cv.items[offset..offset + n].iter().map(|it| it.probabilities[0].1).collect());
        offset += n;
    }
    let mut result = score_choice_task(questions, &scores)?;
    result.flags = cv.flags;
    Ok(result)
}

/// Evaluate a whole task file with the protocol its task calls for.
pub fn run_task(data: &TaskData, pipeline: &Pipeline, config: &RunConfig) -> Result<EvalResult> {
    match (&data.content, data.kind.shape()) {
        (TaskContent::Choice(qs), TaskShape::AnalogyChoice) => evaluate_analogies(qs, pipeline, config),
        (TaskContent::Choice(qs), TaskShape::SynonymChoice) => evaluate_synonyms(qs, pipeline, config),
        (TaskContent::Labeled { classes, pairs }, TaskShape::Labeled) => {
            crossval_evaluate(pairs, classes, config.folds, config.seed, pipeline, None)
        }
        _ => Err(Error::InvalidInput(format!("content does not match task {}", data.kind))),
    }
}
