//! Calibrated one-vs-one RBF classifier.
//!
//! One binary SMO model is trained per unordered class pair, each with its
//! own sigmoid calibration. Class probabilities come from averaging the
//! pairwise calibrated probabilities:
//!
//! ```text
//! p_i = sum_{j != i} r_ij / sum_k sum_{j != k} r_kj,   r_ji = 1 - r_ij
//! ```

pub mod platt;
pub mod smo;

use std::fmt::Write as _;
use std::path::Path;

pub use platt::{fit_sigmoid, Calibration};
pub use smo::{kernel, train_binary, BinaryModel, KernelParams, SupportVector};

use crate::error::{Error, Result};
use crate::features::{FeatureVector, SparseVector};

#[derive(Debug, Clone, PartialEq)]
pub struct PairModel {
    /// Index of the class treated as positive.
    pub first: usize,
    pub second: usize,
    pub model: BinaryModel,
    pub calibration: Calibration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub classes: Vec<String>,
    pub binary: Vec<PairModel>,
    pub params: KernelParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LearnerConfig {
    pub kernel: KernelParams,
    /// Cross-fit calibration on held-out decision values. `None` fits on
    /// the training decision values.
    pub calibration_folds: Option<usize>,
}

/// Fit the sigmoid for `model` on the decision values of `examples`.
pub fn calibrate(model: &BinaryModel, examples: &[(&SparseVector, bool)]) -> Result<Calibration> {
    let d: Vec<f64> = examples.iter().map(|e| model.decision_value(e.0)).collect();
    let y: Vec<bool> = examples.iter().map(|e| e.1).collect();
    fit_sigmoid(&d, &y)
}

fn calibrate_cross_fit(
    examples: &[(&SparseVector, bool)],
    params: KernelParams,
    folds: usize,
    full: &BinaryModel,
) -> Result<Calibration> {
    // round-robin within each class keeps every fold stratified
    let mut fold_of = vec![0usize; examples.len()];
    let (mut np, mut nn) = (0usize, 0usize);
    for (i, e) in examples.iter().enumerate() {
        let c = if e.1 { &mut np } else { &mut nn };
        fold_of[i] = *c % folds;
        *c += 1;
    }
    let mut d = vec![0.0; examples.len()];
    for f in 0..folds {
        let train: Vec<(&SparseVector, bool)> = examples
            .iter()
            .zip(&fold_of)
            .filter(|(_, &g)| g != f)
            .map(|(e, _)| *e)
            .collect();
        let held: Vec<usize> = (0..examples.len()).filter(|&i| fold_of[i] == f).collect();
        if held.is_empty() {
            continue;
        }
        if train.iter().all(|e| e.1) || train.iter().all(|e| !e.1) {
            log::debug!("calibration fold {f} lacks a class; using training decision values");
            return calibrate(full, examples);
        }
        let m = train_binary(&train, params)?;
        for i in held {
            d[i] = m.decision_value(examples[i].0);
        }
    }
    let y: Vec<bool> = examples.iter().map(|e| e.1).collect();
    fit_sigmoid(&d, &y)
}

/// Train on `(vector, label)` examples over the classes present, sorted.
pub fn train(examples: &[(&SparseVector, &str)], config: LearnerConfig) -> Result<TrainedModel> {
    let mut classes: Vec<String> = examples.iter().map(|e| e.1.to_string()).collect();
    classes.sort();
    classes.dedup();
    train_with_classes(examples, &classes, config)
}

/// Train with an explicit class order. Every class needs an example.
pub fn train_with_classes(
    examples: &[(&SparseVector, &str)],
    classes: &[String],
    config: LearnerConfig,
) -> Result<TrainedModel> {
    config.kernel.validate()?;
    if classes.len() < 2 {
        return Err(Error::DegenerateTraining(format!(
            "need at least two classes, got {}",
            classes.len()
        )));
    }
    let mut members: Vec<Vec<&SparseVector>> = vec![Vec::new(); classes.len()];
    for (x, label) in examples {
        let c = classes
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::InvalidInput(format!("label {label:?} not among the classes")))?;
        members[c].push(x);
    }
    if let Some(empty) = members.iter().position(Vec::is_empty) {
        return Err(Error::DegenerateTraining(format!(
            "class {:?} has no examples",
            classes[empty]
        )));
    }

    let mut jobs = Vec::new();
    for i in 0..classes.len() {
        for j in i + 1..classes.len() {
            jobs.push((i, j));
        }
    }
    use rayon::prelude::*;
    let binary = jobs
        .into_par_iter()
        .map(|(i, j)| {
            let ex: Vec<(&SparseVector, bool)> = members[i]
                .iter()
                .map(|x| (*x, true))
                .chain(members[j].iter().map(|x| (*x, false)))
                .collect();
            let model = train_binary(&ex, config.kernel)?;
            let calibration = match config.calibration_folds {
                Some(k) if k >= 2 => calibrate_cross_fit(&ex, config.kernel, k, &model)?,
                _ => calibrate(&model, &ex)?,
            };
            Ok(PairModel {
                first: i,
                second: j,
                model,
                calibration,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(TrainedModel {
        classes: classes.to_vec(),
        binary,
        params: config.kernel,
    })
}

impl TrainedModel {
    /// Class probabilities, aligned with `self.classes`.
    pub fn predict_proba(&self, x: &SparseVector) -> Vec<f64> {
        let c = self.classes.len();
        let mut votes = vec![0.0; c];
        for pm in &self.binary {
            let r = pm.calibration.probability(pm.model.decision_value(x));
            votes[pm.first] += r;
            votes[pm.second] += 1.0 - r;
        }
        let total: f64 = votes.iter().sum();
        if total > 0.0 {
            for v in &mut votes {
                *v /= total;
            }
        } else {
            votes.fill(1.0 / c as f64);
        }
        votes
    }

    /// Index of the most probable class; ties go to the earlier class.
    pub fn predict(&self, x: &SparseVector) -> usize {
        argmax(&self.predict_proba(x))
    }

    const HEADER: &'static str = "#pairclass-model v1";

    /// Text format:
    ///
    /// ```text
    /// #pairclass-model v1
    /// kernel<TAB>gamma<TAB>C<TAB>tolerance
    /// classes<TAB>c0<TAB>c1 ...
    /// binary<TAB>first<TAB>second<TAB>bias<TAB>A<TAB>B<TAB>fallback<TAB>n_sv
    /// sv<TAB>coef<TAB>idx:val idx:val ...     (n_sv lines)
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", Self::HEADER);
        let p = &self.params;
        let _ = writeln!(out, "kernel\t{}\t{}\t{}", p.gamma, p.c, p.tolerance);
        let _ = writeln!(out, "classes\t{}", self.classes.join("\t"));
        for pm in &self.binary {
            let _ = writeln!(
                out,
                "binary\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                pm.first,
                pm.second,
                pm.model.bias,
                pm.calibration.a,
                pm.calibration.b,
                u8::from(pm.calibration.fallback),
                pm.model.support_vectors.len()
            );
            for sv in &pm.model.support_vectors {
                let entries: Vec<String> =
                    sv.vector.entries.iter().map(|(i, v)| format!("{i}:{v}")).collect();
                let _ = writeln!(out, "sv\t{}\t{}", sv.coef, entries.join(" "));
            }
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::parse(path, line, msg);
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();
        if lines.next().map(|l| l.1) != Some(Self::HEADER) {
            return Err(bad(1, "missing model header"));
        }
        let num = |s: &str, line: usize| -> Result<f64> {
            s.parse().map_err(|_| bad(line, &format!("bad number {s:?}")))
        };
        let (ln, l) = lines.next().ok_or_else(|| bad(2, "truncated model"))?;
        let f: Vec<&str> = l.split('\t').collect();
        if f.len() != 4 || f[0] != "kernel" {
            return Err(bad(ln, "expected kernel line"));
        }
        let params = KernelParams {
            gamma: num(f[1], ln)?,
            c: num(f[2], ln)?,
            tolerance: num(f[3], ln)?,
        };
        params.validate().map_err(|e| bad(ln, &e.to_string()))?;
        let (ln, l) = lines.next().ok_or_else(|| bad(3, "truncated model"))?;
        let classes: Vec<String> = match l.split_once('\t') {
            Some(("classes", rest)) => rest.split('\t').map(String::from).collect(),
            _ => return Err(bad(ln, "expected classes line")),
        };
        let mut binary = Vec::new();
        while let Some((ln, l)) = lines.next() {
            if l.is_empty() {
                continue;
            }
            let f: Vec<&str> = l.split('\t').collect();
            if f.len() != 8 || f[0] != "binary" {
                return Err(bad(ln, "expected binary line"));
            }
            let idx = |s: &str| -> Result<usize> {
                s.parse()
                    .ok()
                    .filter(|&v: &usize| v < classes.len())
                    .ok_or_else(|| bad(ln, "bad class index"))
            };
            let (first, second) = (idx(f[1])?, idx(f[2])?);
            let bias = num(f[3], ln)?;
            let calibration = Calibration {
                a: num(f[4], ln)?,
                b: num(f[5], ln)?,
                fallback: f[6] == "1",
            };
            let n_sv: usize = f[7].parse().map_err(|_| bad(ln, "bad support vector count"))?;
            let mut support_vectors = Vec::with_capacity(n_sv);
            for _ in 0..n_sv {
                let (ln, l) = lines.next().ok_or_else(|| bad(ln, "missing support vectors"))?;
                let mut parts = l.splitn(3, '\t');
                if parts.next() != Some("sv") {
                    return Err(bad(ln, "expected sv line"));
                }
                let coef = num(parts.next().unwrap_or(""), ln)?;
                let mut entries = Vec::new();
                for tok in parts.next().unwrap_or("").split(' ').filter(|t| !t.is_empty()) {
                    let (i, v) = tok.split_once(':').ok_or_else(|| bad(ln, "bad sv entry"))?;
                    let i: u32 = i.parse().map_err(|_| bad(ln, "bad sv index"))?;
                    entries.push((i, num(v, ln)?));
                }
                support_vectors.push(SupportVector::new(SparseVector::new(entries), coef));
            }
            binary.push(PairModel {
                first,
                second,
                model: BinaryModel {
                    support_vectors,
                    bias,
                    params,
                    stats: smo::SolverStats {
                        iterations: 0,
                        objective: f64::NAN,
                        kkt_gap: f64::NAN,
                    },
                },
                calibration,
            });
        }
        let c = classes.len();
        if binary.len() != c * (c - 1) / 2 {
            return Err(bad(0, "binary model count does not match classes"));
        }
        Ok(TrainedModel {
            classes,
            binary,
            params,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }
}

/// First index of the maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// A fitted probabilistic classifier over word-pair vectors.
pub trait Classifier: Send + Sync {
    fn classes(&self) -> &[String];
    /// Probabilities aligned with [`Classifier::classes`].
    fn predict_proba(&self, x: &FeatureVector) -> Vec<f64>;
}

/// Something that fits a [`Classifier`] from labeled vectors.
pub trait Learner: Send + Sync {
    fn fit(&self, examples: &[(&FeatureVector, &str)], classes: &[String]) -> Result<Box<dyn Classifier>>;
}

impl Classifier for TrainedModel {
    fn classes(&self) -> &[String] {
        &self.classes
    }

    fn predict_proba(&self, x: &FeatureVector) -> Vec<f64> {
        TrainedModel::predict_proba(self, &x.weights)
    }
}

/// The calibrated SMO learner.
#[derive(Debug, Clone, Copy, Default)]
pub struct SvmLearner {
    pub config: LearnerConfig,
}

impl Learner for SvmLearner {
    fn fit(&self, examples: &[(&FeatureVector, &str)], classes: &[String]) -> Result<Box<dyn Classifier>> {
        let ex: Vec<(&SparseVector, &str)> = examples.iter().map(|(v, l)| (&v.weights, *l)).collect();
        Ok(Box::new(train_with_classes(&ex, classes, self.config)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(v: &[f64]) -> SparseVector {
        SparseVector::from_dense(v)
    }

    fn cluster_data() -> Vec<(SparseVector, String)> {
        let mut out = Vec::new();
        let centers = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.6, 0.8, 0.0], [0.0, 0.6, 0.8]];
        for (c, center) in centers.iter().enumerate() {
            for off in [0.0, 0.05, -0.05] {
                let v: Vec<f64> = center.iter().map(|x| x + off).collect();
                out.push((sv(&v), format!("c{c}")));
            }
        }
        out
    }

    fn as_examples(d: &[(SparseVector, String)]) -> Vec<(&SparseVector, &str)> {
        d.iter().map(|(v, l)| (v, l.as_str())).collect()
    }

    #[test]
    fn one_model_per_class_pair() {
        let data = cluster_data();
        for (c, expect) in [(2, 1), (3, 3), (5, 10)] {
            let subset: Vec<(SparseVector, String)> = data
                .iter()
                .filter(|(_, l)| l[1..].parse::<usize>().unwrap() < c)
                .cloned()
                .collect();
            let m = train(&as_examples(&subset), LearnerConfig::default()).unwrap();
            assert_eq!(m.classes.len(), c);
            assert_eq!(m.binary.len(), expect);
        }
    }

    #[test]
    fn two_class_probability_is_the_sigmoid() {
        let data: Vec<_> = cluster_data().into_iter().filter(|(_, l)| l == "c0" || l == "c1").collect();
        let m = train(&as_examples(&data), LearnerConfig::default()).unwrap();
        let x = sv(&[0.7, 0.2, 0.0]);
        let p = m.predict_proba(&x);
        let r = m.binary[0].calibration.probability(m.binary[0].model.decision_value(&x));
        assert!((p[0] - r).abs() < 1e-15);
        assert!((p[1] - (1.0 - r)).abs() < 1e-15);
        assert_eq!(m.predict(&x), 0);
    }

    #[test]
    fn empty_class_is_an_error() {
        let data = cluster_data();
        let classes = vec!["c0".to_string(), "c1".to_string(), "missing".to_string()];
        let ex = as_examples(&data[..6]);
        assert!(matches!(
            train_with_classes(&ex, &classes, LearnerConfig::default()),
            Err(Error::DegenerateTraining(_))
        ));
        assert!(train(&ex[..3], LearnerConfig::default()).is_err());
    }

    #[test]
    fn argmax_ties_go_first() {
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
        assert_eq!(argmax(&[0.25; 4]), 0);
    }

    #[test]
    fn cross_fit_calibration_runs() {
        let data = cluster_data();
        let cfg = LearnerConfig {
            calibration_folds: Some(3),
            ..Default::default()
        };
        let m = train(&as_examples(&data), cfg).unwrap();
        let p = m.predict_proba(&sv(&[1.0, 0.0, 0.0]));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn model_round_trip() {
        let data = cluster_data();
        let m = train(&as_examples(&data), LearnerConfig::default()).unwrap();
        let back = TrainedModel::parse(&m.to_text(), Path::new("m")).unwrap();
        assert_eq!(back.classes, m.classes);
        for (x, _) in &data {
            assert_eq!(back.predict_proba(x), m.predict_proba(x));
        }
        assert!(TrainedModel::parse("nope", Path::new("m")).is_err());
    }
}
