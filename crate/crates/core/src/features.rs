//! Wildcard patterns, feature selection and log-frequency vectors.

use std::cmp::Reverse;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harvest::Phrase;
use crate::pair::WordPair;

pub const DEFAULT_K: usize = 20;

/// One position of a pattern. The derived order is the tie-break order
/// used by feature selection.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Wildcard,
    X,
    Y,
    Literal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    pub slots: Vec<Slot>,
}

impl Pattern {
    /// Whether `phrase` matches: equal length, X and Y aligned, literals
    /// equal, wildcards matching any one token.
    pub fn matches(&self, phrase: &Phrase) -> bool {
        if self.slots.len() != phrase.tokens.len() {
            return false;
        }
        self.slots.iter().enumerate().all(|(i, slot)| match slot {
            Slot::X => i == phrase.x_pos,
            Slot::Y => i == phrase.y_pos,
            Slot::Wildcard => i != phrase.x_pos && i != phrase.y_pos,
            Slot::Literal(w) => i != phrase.x_pos && i != phrase.y_pos && *w == phrase.tokens[i],
        })
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match s {
                Slot::Wildcard => f.write_str("*")?,
                Slot::X => f.write_str("X")?,
                Slot::Y => f.write_str("Y")?,
                Slot::Literal(w) => f.write_str(w)?,
            }
        }
        Ok(())
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let slots: Vec<Slot> = s
            .split(' ')
            .map(|t| match t {
                "*" => Slot::Wildcard,
                "X" => Slot::X,
                "Y" => Slot::Y,
                w => Slot::Literal(w.to_string()),
            })
            .collect();
        let xs = slots.iter().filter(|s| **s == Slot::X).count();
        let ys = slots.iter().filter(|s| **s == Slot::Y).count();
        if xs != 1 || ys != 1 || slots.iter().any(|s| *s == Slot::Literal(String::new())) {
            return Err(Error::InvalidInput(format!("malformed pattern {s:?}")));
        }
        Ok(Pattern { slots })
    }
}

/// All patterns obtained by keeping or wildcarding each context token.
///
/// An `n`-token phrase yields `2^(n-2)` patterns. They are always
/// distinct since wildcards are positional.
pub fn patterns_of(phrase: &Phrase) -> Vec<Pattern> {
    let context: Vec<usize> = (0..phrase.tokens.len())
        .filter(|&i| i != phrase.x_pos && i != phrase.y_pos)
        .collect();
    let mut out = Vec::with_capacity(1 << context.len());
    for mask in 0u32..(1 << context.len()) {
        let mut slots: Vec<Slot> = phrase
            .tokens
            .iter()
            .map(|t| Slot::Literal(t.clone()))
            .collect();
        slots[phrase.x_pos] = Slot::X;
        slots[phrase.y_pos] = Slot::Y;
        for (bit, &pos) in context.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                slots[pos] = Slot::Wildcard;
            }
        }
        out.push(Pattern { slots });
    }
    out
}

/// For one pair: how many of its phrases match each pattern.
pub type PatternCounts = HashMap<Pattern, u32>;

pub fn pattern_counts(phrases: &[Phrase]) -> PatternCounts {
    let mut counts = PatternCounts::new();
    for p in phrases {
        for pat in patterns_of(p) {
            *counts.entry(pat).or_insert(0) += 1;
        }
    }
    counts
}

/// The selected patterns, in feature-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub patterns: Vec<Pattern>,
    /// Number of input pairs that generated each selected pattern.
    pub scores: Vec<usize>,
    pub k: usize,
    pub n: usize,
    lookup: HashMap<Pattern, u32>,
}

impl FeatureSpec {
    pub fn new(patterns: Vec<Pattern>, scores: Vec<usize>, k: usize, n: usize) -> Self {
        let lookup = patterns
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i as u32))
            .collect();
        FeatureSpec {
            patterns,
            scores,
            k,
            n,
            lookup,
        }
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn index_of(&self, p: &Pattern) -> Option<u32> {
        self.lookup.get(p).copied()
    }
}

/// Pick the `k * N` patterns generated by the most pairs.
///
/// Ties are broken by ascending pattern order. A pair listed twice is
/// counted once.
pub fn select_features(phrases_by_pair: &[(WordPair, Vec<Phrase>)], k: usize) -> FeatureSpec {
    let counts: Vec<(WordPair, PatternCounts)> = phrases_by_pair
        .iter()
        .map(|(p, ph)| (p.clone(), pattern_counts(ph)))
        .collect();
    let refs: Vec<(&WordPair, &PatternCounts)> = counts.iter().map(|(p, c)| (p, c)).collect();
    select_from_counts(&refs, k)
}

pub fn select_from_counts(per_pair: &[(&WordPair, &PatternCounts)], k: usize) -> FeatureSpec {
    let mut distinct: BTreeMap<&WordPair, &PatternCounts> = BTreeMap::new();
    for (p, c) in per_pair {
        distinct.entry(p).or_insert(c);
    }
    let n = distinct.len();
    let mut score: HashMap<&Pattern, usize> = HashMap::new();
    for c in distinct.values() {
        for pat in c.keys() {
            *score.entry(pat).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(&Pattern, usize)> = score.into_iter().collect();
    ranked.sort_unstable_by(|a, b| Reverse(a.1).cmp(&Reverse(b.1)).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(k.saturating_mul(n));
    let (patterns, scores) = ranked.into_iter().map(|(p, s)| (p.clone(), s)).unzip();
    FeatureSpec::new(patterns, scores, k, n)
}

/// Sparse vector with ascending, unique indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    pub entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn new(mut entries: Vec<(u32, f64)>) -> Self {
        entries.sort_by_key(|e| e.0);
        entries.dedup_by_key(|e| e.0);
        SparseVector { entries }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        SparseVector {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (i as u32, *v))
                .collect(),
        }
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum()
    }

    pub fn get(&self, idx: u32) -> f64 {
        self.entries
            .binary_search_by_key(&idx, |e| e.0)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn scaled(&self, factor: f64) -> SparseVector {
        SparseVector {
            entries: self.entries.iter().map(|&(i, v)| (i, v * factor)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.1 == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub pair: WordPair,
    pub weights: SparseVector,
}

/// `ln(f + 1)` per selected pattern, then scaled to unit length.
pub fn vectorize(pair: &WordPair, phrases: &[Phrase], spec: &FeatureSpec) -> FeatureVector {
    vectorize_counts(pair, &pattern_counts(phrases), spec)
}

pub fn vectorize_counts(pair: &WordPair, counts: &PatternCounts, spec: &FeatureSpec) -> FeatureVector {
    let mut entries: Vec<(u32, f64)> = counts
        .iter()
        .filter_map(|(pat, &f)| spec.index_of(pat).map(|i| (i, (f as f64 + 1.0).ln())))
        .collect();
    entries.sort_by_key(|e| e.0);
    let norm = entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for e in &mut entries {
            e.1 /= norm;
        }
    }
    FeatureVector {
        pair: pair.clone(),
        weights: SparseVector { entries },
    }
}

pub const UNLABELED: &str = "UNLABELED";

/// A feature spec plus one vector per pair, optionally labeled.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFile {
    pub spec: FeatureSpec,
    pub rows: Vec<(FeatureVector, Option<String>)>,
}

const FEATURE_HEADER: &str = "#pairclass-features v1";

impl FeatureFile {
    /// Line format:
    ///
    /// ```text
    /// #pairclass-features v1
    /// k<TAB>20
    /// n<TAB>N
    /// features<TAB>F
    /// pattern<TAB><score><TAB>* X cut * Y *      (F lines, index order)
    /// vector<TAB>a:b<TAB>label|UNLABELED<TAB>idx:weight idx:weight ...
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{FEATURE_HEADER}");
        let _ = writeln!(out, "k\t{}", self.spec.k);
        let _ = writeln!(out, "n\t{}", self.spec.n);
        let _ = writeln!(out, "features\t{}", self.spec.len());
        for (p, s) in self.spec.patterns.iter().zip(&self.spec.scores) {
            let _ = writeln!(out, "pattern\t{s}\t{p}");
        }
        for (v, label) in &self.rows {
            let weights: Vec<String> = v
                .weights
                .entries
                .iter()
                .map(|(i, w)| format!("{i}:{w}"))
                .collect();
            let _ = writeln!(
                out,
                "vector\t{}\t{}\t{}",
                v.pair,
                label.as_deref().unwrap_or(UNLABELED),
                weights.join(" ")
            );
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let bad = |line: usize, msg: String| Error::parse(path, line, msg);
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, FEATURE_HEADER)) => {}
            _ => return Err(bad(1, "missing feature file header".into())),
        }
        let mut header = |name: &str| -> Result<usize> {
            let (i, l) = lines.next().ok_or_else(|| bad(0, "truncated header".into()))?;
            l.strip_prefix(name)
                .and_then(|r| r.strip_prefix('\t'))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad(i, format!("expected {name}<TAB><count>")))
        };
        let k = header("k")?;
        let n = header("n")?;
        let f = header("features")?;
        let mut patterns = Vec::with_capacity(f);
        let mut scores = Vec::with_capacity(f);
        let mut rows = Vec::new();
        for (i, l) in lines {
            if l.is_empty() {
                continue;
            }
            let fields: Vec<&str> = l.split('\t').collect();
            match fields[0] {
                "pattern" if fields.len() == 3 => {
                    if !rows.is_empty() {
                        return Err(bad(i, "pattern after vectors".into()));
                    }
                    scores.push(fields[1].parse().map_err(|_| bad(i, "bad score".into()))?);
                    patterns.push(fields[2].parse().map_err(|e: Error| bad(i, e.to_string()))?);
                }
                "vector" if fields.len() == 4 => {
                    let pair: WordPair = fields[1].parse().map_err(|e: Error| bad(i, e.to_string()))?;
                    let label = (fields[2] != UNLABELED).then(|| fields[2].to_string());
                    let mut entries = Vec::new();
                    for tok in fields[3].split(' ').filter(|t| !t.is_empty()) {
                        let (idx, w) = tok
                            .split_once(':')
                            .ok_or_else(|| bad(i, format!("bad entry {tok:?}")))?;
                        let idx: u32 = idx.parse().map_err(|_| bad(i, format!("bad index {idx:?}")))?;
                        let w: f64 = w.parse().map_err(|_| bad(i, format!("bad weight {w:?}")))?;
                        if idx as usize >= f {
                            return Err(bad(i, format!("feature index {idx} out of range")));
                        }
                        entries.push((idx, w));
                    }
                    rows.push((
                        FeatureVector {
                            pair,
                            weights: SparseVector::new(entries),
                        },
                        label,
                    ));
                }
                _ => return Err(bad(i, "expected pattern or vector record".into())),
            }
        }
        if patterns.len() != f {
            return Err(bad(0, format!("header declares {f} features, found {}", patterns.len())));
        }
        Ok(FeatureFile {
            spec: FeatureSpec::new(patterns, scores, k, n),
            rows,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Distinct patterns generated across all pairs.
pub fn distinct_pattern_count(per_pair: &[&PatternCounts]) -> usize {
    let mut all: HashSet<&Pattern> = HashSet::new();
    for c in per_pair {
        all.extend(c.keys());
    }
    all.len()
}
