//! Planted-relation corpora for end-to-end checks.
//!
//! Four relation families, ten pairs each. Every family is expressed through
//! its own connective phrases, which differ in wording and in shape (word
//! order and gap length). Every pair also appears in generic sentences
//! shared by all families. Template counts are fixed; word inflection and
//! sentence order vary at random. Optionally a fraction of sentences borrow
//! another family's connective.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::CorpusIndex;
use crate::error::{Error, Result};
use crate::morphology::Morphology;
use crate::pair::{LabeledPair, WordPair};
use crate::tasks::data::{ChoiceQuestion, Item, TaskContent, TaskData, TaskKind};

struct Family {
    name: &'static str,
    pairs: [(&'static str, &'static str); 10],
    connectives: [&'static str; 4],
}

const FAMILIES: [Family; 4] = [
    Family {
        name: "artisan",
        pairs: [
            ("mason", "stone"),
            ("carpenter", "wood"),
            ("potter", "clay"),
            ("smith", "iron"),
            ("weaver", "wool"),
            ("tailor", "cloth"),
            ("sculptor", "marble"),
            ("glazier", "glass"),
            ("cobbler", "leather"),
            ("jeweler", "gold"),
        ],
        connectives: ["X cut the Y", "X carves raw Y", "X chisels rough Y", "X works fine Y"],
    },
    Family {
        name: "orbit",
        pairs: [
            ("earth", "moon"),
            ("sun", "planet"),
            ("jupiter", "io"),
            ("saturn", "titan"),
            ("mars", "phobos"),
            ("neptune", "triton"),
            ("nucleus", "electron"),
            ("star", "comet"),
            ("uranus", "miranda"),
            ("pluto", "charon"),
        ],
        connectives: ["Y orbit the X", "Y circles distant X", "Y revolves around X", "Y spins near X"],
    },
    Family {
        name: "container",
        pairs: [
            ("bottle", "wine"),
            ("jar", "honey"),
            ("basket", "fruit"),
            ("wallet", "money"),
            ("quiver", "arrow"),
            ("sheath", "sword"),
            ("barn", "hay"),
            ("tank", "fuel"),
            ("silo", "grain"),
            ("envelope", "letter"),
        ],
        connectives: ["X is full of Y", "X filled with much Y", "X safely holds some Y", "X usually contains fresh Y"],
    },
    Family {
        name: "author",
        pairs: [
            ("poet", "poem"),
            ("novelist", "novel"),
            ("composer", "symphony"),
            ("playwright", "play"),
            ("journalist", "article"),
            ("scribe", "scroll"),
            ("historian", "chronicle"),
            ("lyricist", "song"),
            ("essayist", "essay"),
            ("columnist", "column"),
        ],
        connectives: ["Y was written by X", "Y was composed by X", "Y first published by X", "Y authored by famous X"],
    },
];

const GENERIC: [&str; 3] = ["X and Y", "the X and the Y", "Y or X"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub questions: usize,
    pub family_sentences: usize,
    pub generic_sentences: usize,
    /// Probability that a family sentence uses another family's connective.
    pub leak: f64,
    /// Probability that a word appears inflected.
    pub inflect: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 0,
            questions: 20,
            family_sentences: 16,
            generic_sentences: 6,
            leak: 0.0,
            inflect: 0.3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticTask {
    pub documents: Vec<String>,
    /// Analogy questions: stem and answer from one family, one distractor
    /// from each other family.
    pub analogy: TaskData,
    /// All forty pairs labeled with their family, for cross-validation.
    pub relations: Vec<LabeledPair>,
}

pub fn family_names() -> Vec<String> {
    FAMILIES.iter().map(|f| f.name.to_string()).collect()
}

fn pair_of(p: (&str, &str)) -> WordPair {
    WordPair::new(p.0, p.1).expect("family pairs are valid")
}

pub fn generate(config: &SyntheticConfig) -> SyntheticTask {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let morph = Morphology::default();
    let inflect = |w: &str, rng: &mut ChaCha8Rng| -> String {
        if rng.gen_bool(config.inflect) {
            let forms = morph.variants(w, None).forms;
            if forms.len() > 1 {
                return forms[1].clone();
            }
        }
        w.to_string()
    };

    let mut sentences = Vec::new();
    for (fi, fam) in FAMILIES.iter().enumerate() {
        for &(x, y) in &fam.pairs {
            // Fixed template counts: when the random negative of an analogy
            // trial shares the stem's family, any count difference between
            // the two gets magnified by the two-point calibration.
            let mut templates = Vec::new();
            for i in 0..config.family_sentences {
                let source = if config.leak > 0.0 && rng.gen_bool(config.leak) {
                    let other = (fi + rng.gen_range(1..FAMILIES.len())) % FAMILIES.len();
                    &FAMILIES[other]
                } else {
                    fam
                };
                templates.push(source.connectives[i % source.connectives.len()]);
            }
            for i in 0..config.generic_sentences {
                templates.push(GENERIC[i % GENERIC.len()]);
            }
            for t in templates {
                let s: Vec<String> = t
                    .split(' ')
                    .map(|tok| match tok {
                        "X" => inflect(x, &mut rng),
                        "Y" => inflect(y, &mut rng),
                        other => other.to_string(),
                    })
                    .collect();
                sentences.push(s.join(" "));
            }
        }
    }
    sentences.shuffle(&mut rng);
    // one sentence per document, so no window spans two sentences
    let documents = sentences;

    let mut questions = Vec::with_capacity(config.questions);
    for qi in 0..config.questions {
        let fi = qi % FAMILIES.len();
        let j = qi / FAMILIES.len();
        let fam = &FAMILIES[fi];
        let stem = pair_of(fam.pairs[(2 * j) % 10]);
        let answer = pair_of(fam.pairs[(2 * j + 1) % 10]);
        let mut choices: Vec<Item> = (1..FAMILIES.len())
            .map(|d| {
                let other = &FAMILIES[(fi + d) % FAMILIES.len()];
                Item::Pair(pair_of(*other.pairs.choose(&mut rng).unwrap()))
            })
            .collect();
        let pos = rng.gen_range(0..=choices.len());
        choices.insert(pos, Item::Pair(answer));
        questions.push(ChoiceQuestion::new(Item::Pair(stem), choices, pos).expect("four choices"));
    }

    let pairs = FAMILIES
        .iter()
        .flat_map(|f| {
            f.pairs.iter().map(|&p| LabeledPair {
                pair: pair_of(p),
                label: Some(f.name.to_string()),
            })
        })
        .collect();

    SyntheticTask {
        documents,
        analogy: TaskData {
            kind: TaskKind::Sat,
            content: TaskContent::Choice(questions),
        },
        relations: pairs,
    }
}

impl SyntheticTask {
    pub fn index(&self) -> CorpusIndex {
        CorpusIndex::from_documents(&self.documents)
    }

    pub fn questions(&self) -> &[ChoiceQuestion] {
        match &self.analogy.content {
            TaskContent::Choice(q) => q,
            TaskContent::Labeled { .. } => unreachable!(),
        }
    }

    /// Write `corpus/part-NNN.txt` and `sat.txt` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let corpus = dir.join("corpus");
        std::fs::create_dir_all(&corpus).map_err(|e| Error::io(&corpus, e))?;
        for (i, d) in self.documents.iter().enumerate() {
            let p = corpus.join(format!("part-{i:03}.txt"));
            std::fs::write(&p, format!("{d}\n")).map_err(|e| Error::io(&p, e))?;
        }
        self.analogy.save(&dir.join("sat.txt"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_well_shaped() {
        let a = generate(&SyntheticConfig::default());
        let b = generate(&SyntheticConfig::default());
        assert_eq!(a.documents, b.documents);
        assert_eq!(a.analogy, b.analogy);
        let qs = a.questions();
        assert_eq!(qs.len(), 20);
        for q in qs {
            assert_eq!(q.choices.len(), 4);
            assert!(q.choices.iter().all(|c| Item::Pair(q.stem_pair().unwrap().clone()) != *c));
        }
        let other = generate(&SyntheticConfig { seed: 1, ..Default::default() });
        assert_ne!(a.documents, other.documents);
    }

    #[test]
    fn planted_phrases_are_indexed() {
        let t = generate(&SyntheticConfig::default());
        let index = t.index();
        assert!(index.contains("mason"));
        assert!(!index.query_windows("mason", "stone").unwrap().is_empty());
        // documents hold one sentence each, so unrelated words never co-occur
        assert!(index.query_windows("mason", "honey").unwrap().is_empty());
    }

    #[test]
    fn files_parse_back() {
        let dir = tempfile::tempdir().unwrap();
        let t = generate(&SyntheticConfig::default());
        t.write(dir.path()).unwrap();
        let sat = TaskData::load(&dir.path().join("sat.txt")).unwrap();
        assert_eq!(sat, t.analogy);
        assert_eq!(t.relations.len(), 40);
    }
}
