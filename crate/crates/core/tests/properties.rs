use std::sync::Arc;

use proptest::prelude::*;

use pairclass::corpus::CorpusIndex;
use pairclass::features::{patterns_of, select_features, vectorize};
use pairclass::learner::smo::{train_binary, KernelParams};
use pairclass::learner::platt::fit_sigmoid;
use pairclass::{Morphology, Phrase, SparseVector, WordPair};

fn docs_strategy() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::collection::vec(0usize..6, 0..40), 1..6).prop_map(|docs| {
        docs.into_iter()
            .map(|d| d.iter().map(|w| format!("t{w}")).collect::<Vec<_>>().join(" "))
            .collect()
    })
}

fn phrase_strategy() -> impl Strategy<Value = Phrase> {
    (2usize..=7).prop_flat_map(|n| {
        (Just(n), 0..n, 0..n - 1, prop::collection::vec(0usize..4, n - 2)).prop_map(|(n, x, y, ctx)| {
            let y = if y >= x { y + 1 } else { y };
            let pair = Arc::new(WordPair::new("xa", "yb").unwrap());
            let mut ctx = ctx.into_iter().map(|c| format!("c{c}"));
            let tokens = (0..n)
                .map(|i| if i == x { "xa".into() } else if i == y { "yb".into() } else { ctx.next().unwrap() })
                .collect();
            Phrase { tokens, x_pos: x, y_pos: y, pair }
        })
    })
}

fn examples_strategy() -> impl Strategy<Value = Vec<(Vec<f64>, bool)>> {
    prop::collection::vec((prop::collection::vec(-1.0f64..1.0, 3), any::<bool>()), 2..10).prop_map(|mut v| {
        v[0].1 = true;
        v[1].1 = false;
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn appending_a_document_keeps_every_window(docs in docs_strategy(), extra in docs_strategy()) {
        let before = CorpusIndex::from_documents(&docs);
        let mut grown = docs.clone();
        grown.extend(extra);
        let after = CorpusIndex::from_documents(&grown);
        let w_before = before.query_windows("t0", "t1").unwrap();
        let w_after = after.query_windows("t0", "t1").unwrap();
        for w in &w_before {
            prop_assert!(w_after.contains(w));
        }
    }

    #[test]
    fn index_round_trips_and_is_deterministic(docs in docs_strategy()) {
        let a = CorpusIndex::from_documents(&docs);
        let b = CorpusIndex::from_bytes(&a.to_bytes()).unwrap();
        prop_assert_eq!(a.fingerprint(), b.fingerprint());
        prop_assert_eq!(a.query_windows("t2", "t3").unwrap(), b.query_windows("t2", "t3").unwrap());
        let c = CorpusIndex::from_documents(&docs);
        prop_assert_eq!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn pattern_count_is_a_power_of_two(p in phrase_strategy()) {
        prop_assert_eq!(patterns_of(&p).len(), 1usize << (p.tokens.len() - 2));
    }

    #[test]
    fn vectors_are_unit_or_zero(phrases in prop::collection::vec(phrase_strategy(), 0..6), k in 1usize..5) {
        let pair = WordPair::new("xa", "yb").unwrap();
        let other = WordPair::new("p", "q").unwrap();
        let spec = select_features(&[(pair.clone(), phrases.clone()), (other.clone(), Vec::new())], k);
        let v = vectorize(&pair, &phrases, &spec);
        if phrases.is_empty() {
            prop_assert!(v.weights.is_zero());
        } else {
            prop_assert!((v.weights.norm_sq() - 1.0).abs() < 1e-9);
        }
        prop_assert!(vectorize(&other, &[], &spec).weights.is_zero());
    }

    #[test]
    fn selection_ignores_pair_order(phrases in prop::collection::vec(phrase_strategy(), 1..6)) {
        let a = WordPair::new("xa", "yb").unwrap();
        let b = WordPair::new("m", "n").unwrap();
        let half = phrases.len() / 2;
        let first = vec![(a.clone(), phrases[..half].to_vec()), (b.clone(), phrases[half..].to_vec())];
        let second = vec![first[1].clone(), first[0].clone()];
        prop_assert_eq!(select_features(&first, 3), select_features(&second, 3));
    }

    #[test]
    fn training_order_does_not_matter(ex in examples_strategy(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let vecs: Vec<(SparseVector, bool)> = ex.iter().map(|(v, l)| (SparseVector::from_dense(v), *l)).collect();
        let mut shuffled = vecs.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let params = KernelParams { gamma: 1.0, ..Default::default() };
        let m1 = train_binary(&vecs.iter().map(|(v, l)| (v, *l)).collect::<Vec<_>>(), params).unwrap();
        let m2 = train_binary(&shuffled.iter().map(|(v, l)| (v, *l)).collect::<Vec<_>>(), params).unwrap();
        for (v, _) in &vecs {
            prop_assert_eq!(m1.decision_value(v), m2.decision_value(v));
        }
    }

    #[test]
    fn calibrated_probability_is_monotone(ds in prop::collection::vec(-3.0f64..3.0, 4..20)) {
        // labels follow the sign of the decision value, so the fit is increasing
        let labels: Vec<bool> = ds.iter().enumerate().map(|(i, d)| if i < 2 { i == 0 } else { *d > 0.0 }).collect();
        let mut ds = ds;
        ds[0] = 1.0;
        ds[1] = -1.0;
        let cal = fit_sigmoid(&ds, &labels).unwrap();
        let grid: Vec<f64> = (-40..=40).map(|i| i as f64 / 10.0).collect();
        let probs: Vec<f64> = grid.iter().map(|&d| cal.probability(d)).collect();
        for w in probs.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn lemmatize_is_idempotent(word in "[a-z]{1,10}") {
        let m = Morphology::default();
        let once = m.lemmatize(&word);
        prop_assert_eq!(m.lemmatize(&once), once.clone());
        let variants = m.variants(&word, None);
        prop_assert!(variants.len() <= m.cap());
    }
}
