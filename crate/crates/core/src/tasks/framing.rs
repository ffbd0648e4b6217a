//! Turning choice questions into binary pair-classification problems.

use rand::Rng;

use crate::error::{Error, Result};
use crate::pair::WordPair;
use crate::tasks::data::{ChoiceQuestion, Item};

pub const POSITIVE: &str = "positive";
pub const NEGATIVE: &str = "negative";

pub fn binary_classes() -> Vec<String> {
    vec![POSITIVE.to_string(), NEGATIVE.to_string()]
}

/// Training and testing sets for one analogy trial.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogyFraming {
    /// The stem as positive, one randomly drawn other stem as negative.
    pub training: Vec<(WordPair, &'static str)>,
    /// The choices, in question order.
    pub testing: Vec<WordPair>,
}

impl AnalogyFraming {
    pub fn negative(&self) -> &WordPair {
        &self.training[1].0
    }
}

fn item_pair(item: &Item) -> Result<&WordPair> {
    match item {
        Item::Pair(p) => Ok(p),
        Item::Word(w) => Err(Error::InvalidInput(format!("expected a word pair, got word {w:?}"))),
    }
}

/// Frame one analogy question. `bank` holds the stems of the whole task;
/// the negative example is drawn uniformly from those that differ from
/// this question's stem.
pub fn frame_analogy_question<R: Rng + ?Sized>(
    q: &ChoiceQuestion,
    bank: &[WordPair],
    rng: &mut R,
) -> Result<AnalogyFraming> {
    let stem = item_pair(&q.stem)?;
    let candidates: Vec<&WordPair> = bank.iter().filter(|p| *p != stem).collect();
    if candidates.is_empty() {
        return Err(Error::InvalidInput(format!("no other stem available as a negative for {stem}")));
    }
    let negative = candidates[rng.gen_range(0..candidates.len())].clone();
    let testing = q.choices.iter().map(|c| item_pair(c).cloned()).collect::<Result<Vec<_>>>()?;
    Ok(AnalogyFraming {
        training: vec![(stem.clone(), POSITIVE), (negative, NEGATIVE)],
        testing,
    })
}

/// Frame a synonym question as one labeled pair per choice: `stem:choice`
/// is positive for the answer and negative otherwise. Any context sentence
/// is ignored.
pub fn frame_synonym_question(q: &ChoiceQuestion) -> Result<Vec<(WordPair, &'static str)>> {
    let Item::Word(stem) = &q.stem else {
        return Err(Error::InvalidInput("synonym questions have a single-word stem".into()));
    };
    q.choices
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let Item::Word(w) = c else {
                return Err(Error::InvalidInput("synonym choices are single words".into()));
            };
            let label = if i == q.answer { POSITIVE } else { NEGATIVE };
            Ok((WordPair::new(stem, w)?, label))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair(s: &str) -> WordPair {
        s.parse().unwrap()
    }

    fn sat_question() -> ChoiceQuestion {
        let choices = ["teacher:chalk", "carpenter:wood", "soldier:gun", "photograph:camera", "book:word"]
            .iter()
            .map(|s| Item::Pair(pair(s)))
            .collect();
        ChoiceQuestion::new(Item::Pair(pair("mason:stone")), choices, 1).unwrap()
    }

    #[test]
    fn analogy_framing_shapes() {
        let q = sat_question();
        let bank = vec![pair("mason:stone"), pair("insubordination:punishment"), pair("ostrich:bird")];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let f = frame_analogy_question(&q, &bank, &mut rng).unwrap();
            assert_eq!(f.training.len(), 2);
            assert_eq!(f.training[0], (pair("mason:stone"), POSITIVE));
            assert_ne!(f.negative(), &pair("mason:stone"));
            assert_eq!(f.testing.len(), 5);
            assert_eq!(f.testing[1], pair("carpenter:wood"));
        }
    }

    #[test]
    fn negative_draw_covers_the_bank() {
        let q = sat_question();
        let bank = vec![pair("mason:stone"), pair("a:b"), pair("c:d"), pair("e:f")];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..100 {
            seen.insert(frame_analogy_question(&q, &bank, &mut rng).unwrap().negative().clone());
        }
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn lone_stem_has_no_negative() {
        let q = sat_question();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(frame_analogy_question(&q, &[pair("mason:stone")], &mut rng).is_err());
    }

    #[test]
    fn synonym_framing() {
        let choices = ["imposed", "believed", "requested", "correlated"]
            .iter()
            .map(|s| Item::Word(s.to_string()))
            .collect();
        let q = ChoiceQuestion::new(Item::Word("levied".into()), choices, 0).unwrap();
        let pairs = frame_synonym_question(&q).unwrap();
        assert_eq!(pairs.len(), 4);
        assert_eq!(pairs[0], (pair("levied:imposed"), POSITIVE));
        assert!(pairs[1..].iter().all(|p| p.1 == NEGATIVE));
        assert_eq!(pairs[3].0, pair("levied:correlated"));
    }
}
