//! Harvest, select and vectorize for a set of pairs, with memoization.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::corpus::CorpusIndex;
use crate::error::Result;
use crate::features::{pattern_counts, select_from_counts, vectorize_counts, FeatureSpec, FeatureVector, PatternCounts, DEFAULT_K};
use crate::harvest::{harvest, HarvestReport, PhraseCache, DEFAULT_MAX_PHRASES};
use crate::learner::Learner;
use crate::morphology::Morphology;
use crate::pair::WordPair;

/// Pattern counts for one pair plus how they were obtained.
#[derive(Debug, Clone)]
pub struct PairPatterns {
    pub counts: PatternCounts,
    pub report: HarvestReport,
}

pub struct Pipeline<'a> {
    index: &'a CorpusIndex,
    morph: &'a Morphology,
    learner: &'a dyn Learner,
    pub k: usize,
    pub max_phrases: usize,
    cache_root: Option<std::path::PathBuf>,
    cache: Option<PhraseCache>,
    memo: Mutex<HashMap<WordPair, Arc<PairPatterns>>>,
}

impl<'a> Pipeline<'a> {
    pub fn new(index: &'a CorpusIndex, morph: &'a Morphology, learner: &'a dyn Learner) -> Self {
        Pipeline {
            index,
            morph,
            learner,
            k: DEFAULT_K,
            max_phrases: DEFAULT_MAX_PHRASES,
            cache_root: None,
            cache: None,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_max_phrases(mut self, max: usize) -> Self {
        self.max_phrases = max;
        self.rekey_cache();
        self
    }

    /// Persist harvested phrases under `root`, keyed by index and rules.
    pub fn with_phrase_cache(mut self, root: &std::path::Path) -> Self {
        self.cache_root = Some(root.to_path_buf());
        self.rekey_cache();
        self
    }

    fn rekey_cache(&mut self) {
        self.cache = self
            .cache_root
            .as_deref()
            .map(|root| PhraseCache::new(root, self.index, self.morph, self.max_phrases));
    }

    pub fn learner(&self) -> &dyn Learner {
        self.learner
    }

    pub fn index(&self) -> &CorpusIndex {
        self.index
    }

    pub fn morphology(&self) -> &Morphology {
        self.morph
    }

    pub fn patterns(&self, pair: &WordPair) -> Result<Arc<PairPatterns>> {
        if let Some(p) = self.memo.lock().unwrap().get(pair) {
            return Ok(p.clone());
        }
        let h = match self.cache.as_ref().map(|c| c.get(pair)).transpose()?.flatten() {
            Some(h) => h,
            None => {
                let h = harvest(self.index, self.morph, pair, self.max_phrases)?;
                if let Some(c) = &self.cache {
                    c.put(&h)?;
                }
                h
            }
        };
        if h.report.truncated {
            log::info!("{}: phrase list truncated to {}", pair, h.report.phrase_count);
        }
        let entry = Arc::new(PairPatterns {
            counts: pattern_counts(&h.phrases),
            report: h.report,
        });
        self.memo.lock().unwrap().insert(pair.clone(), entry.clone());
        Ok(entry)
    }

    /// Harvest every pair not yet seen, in parallel.
    pub fn prefetch(&self, pairs: &[WordPair]) -> Result<()> {
        let mut todo: Vec<&WordPair> = {
            let memo = self.memo.lock().unwrap();
            pairs.iter().filter(|p| !memo.contains_key(*p)).collect()
        };
        todo.sort();
        todo.dedup();
        todo.par_iter().try_for_each(|p| self.patterns(p).map(|_| ()))
    }

    /// Select features over the distinct pairs in `pairs`.
    pub fn select(&self, pairs: &[WordPair]) -> Result<FeatureSpec> {
        self.prefetch(pairs)?;
        let mut distinct: BTreeMap<&WordPair, Arc<PairPatterns>> = BTreeMap::new();
        for p in pairs {
            if !distinct.contains_key(p) {
                distinct.insert(p, self.patterns(p)?);
            }
        }
        let per_pair: Vec<(&WordPair, &PatternCounts)> = distinct.iter().map(|(p, c)| (*p, &c.counts)).collect();
        Ok(select_from_counts(&per_pair, self.k))
    }

    pub fn vectorize(&self, pairs: &[WordPair], spec: &FeatureSpec) -> Result<Vec<FeatureVector>> {
        self.prefetch(pairs)?;
        pairs
            .iter()
            .map(|p| Ok(vectorize_counts(p, &self.patterns(p)?.counts, spec)))
            .collect()
    }

    /// Feature selection over `pairs`, then one vector per input pair.
    pub fn extract(&self, pairs: &[WordPair]) -> Result<(FeatureSpec, Vec<FeatureVector>)> {
        let spec = self.select(pairs)?;
        let vectors = self.vectorize(pairs, &spec)?;
        Ok((spec, vectors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::SvmLearner;

    #[test]
    fn extract_is_memoized_and_sized() {
        let index = CorpusIndex::from_documents(&[
            "the mason cut the stone with care",
            "a carpenter cut some wood for the house",
            "the mason and the stone",
        ]);
        let morph = Morphology::default();
        let learner = SvmLearner::default();
        let pipe = Pipeline::new(&index, &morph, &learner);
        let pairs: Vec<WordPair> = ["mason:stone", "carpenter:wood", "mason:stone"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let (spec, vectors) = pipe.extract(&pairs).unwrap();
        assert_eq!(spec.n, 2);
        assert_eq!(vectors.len(), 3);
        assert_eq!(vectors[0], vectors[2]);
        assert_eq!(pipe.memo.lock().unwrap().len(), 2);
        for v in &vectors {
            assert!((v.weights.norm_sq() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn cache_round_trip_gives_same_features() {
        let dir = tempfile::tempdir().unwrap();
        let index = CorpusIndex::from_documents(&["the mason cut the stone with care", "masons cut stones"]);
        let morph = Morphology::default();
        let learner = SvmLearner::default();
        let pairs: Vec<WordPair> = vec!["mason:stone".parse().unwrap()];
        let first = Pipeline::new(&index, &morph, &learner).with_phrase_cache(dir.path()).extract(&pairs).unwrap();
        let second = Pipeline::new(&index, &morph, &learner).with_phrase_cache(dir.path()).extract(&pairs).unwrap();
        assert_eq!(first.0.patterns, second.0.patterns);
        assert_eq!(first.1, second.1);
    }
}
