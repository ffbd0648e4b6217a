//! Rule-based inflection and lemmatization for English.
//!
//! A shipped rule table supplies irregular forms (`exc`), words that are
//! never stripped (`keep`) and ordered suffix rules (`suffix`). Regular
//! inflections are generated from a handful of spelling rules.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::corpus::{CorpusIndex, RawWindow};
use crate::error::{Error, Result};
use crate::harvest::Phrase;
use crate::pair::WordPair;

/// The rule table compiled into the crate.
pub const SHIPPED_RULES: &str = include_str!("../data/morph_rules.tsv");

pub const DEFAULT_VARIANT_CAP: usize = 8;

const RULES_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
struct SuffixRule {
    suffix: String,
    replacement: String,
    min_stem: usize,
    needs_vowel: bool,
    repair: bool,
}

/// A word together with its surface variants. `forms[0]` is the word itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariantSet {
    pub base: String,
    pub forms: Vec<String>,
}

impl VariantSet {
    pub fn contains(&self, w: &str) -> bool {
        self.forms.iter().any(|f| f == w)
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Morphology {
    lemma_of: HashMap<String, String>,
    forms_of: HashMap<String, Vec<String>>,
    keep: HashSet<String>,
    rules: Vec<SuffixRule>,
    cap: usize,
    source: String,
}

impl Default for Morphology {
    fn default() -> Self {
        Morphology::parse(SHIPPED_RULES, Path::new("<shipped morph_rules.tsv>"))
            .expect("shipped morphology rules are valid")
    }
}

impl Morphology {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::parse(PathBuf::from(origin), line, msg);
        let mut version = None;
        let mut lemma_of = HashMap::new();
        let mut forms_of: HashMap<String, Vec<String>> = HashMap::new();
        let mut keep = HashSet::new();
        let mut rules = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match fields[0] {
                "version" => {
                    let v: u32 = fields
                        .get(1)
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| err(lineno, "bad version line".into()))?;
                    if v != RULES_VERSION {
                        return Err(err(lineno, format!("unsupported rules version {v}")));
                    }
                    version = Some(v);
                }
                "exc" => {
                    let [_, form, lemma] = fields[..] else {
                        return Err(err(lineno, "exc needs <form> <lemma>".into()));
                    };
                    let (form, lemma) = (form.to_lowercase(), lemma.to_lowercase());
                    if lemma_of.insert(form.clone(), lemma.clone()).is_some() {
                        return Err(err(lineno, format!("duplicate irregular form {form:?}")));
                    }
                    forms_of.entry(lemma).or_default().push(form);
                }
                "keep" => {
                    let [_, w] = fields[..] else {
                        return Err(err(lineno, "keep needs <word>".into()));
                    };
                    keep.insert(w.to_lowercase());
                }
                "suffix" => {
                    let [_, suffix, replacement, min_stem, flags] = fields[..] else {
                        return Err(err(lineno, "suffix needs 4 fields".into()));
                    };
                    let min_stem = min_stem
                        .parse()
                        .map_err(|_| err(lineno, format!("bad stem length {min_stem:?}")))?;
                    let mut rule = SuffixRule {
                        suffix: suffix.to_string(),
                        replacement: replacement.to_string(),
                        min_stem,
                        needs_vowel: false,
                        repair: false,
                    };
                    for flag in flags.split(',') {
                        match flag {
                            "-" => {}
                            "vowel" => rule.needs_vowel = true,
                            "repair" => rule.repair = true,
                            other => return Err(err(lineno, format!("unknown flag {other:?}"))),
                        }
                    }
                    if rule.suffix.is_empty() {
                        return Err(err(lineno, "empty suffix".into()));
                    }
                    rules.push(rule);
                }
                other => return Err(err(lineno, format!("unknown record type {other:?}"))),
            }
        }
        if version.is_none() {
            return Err(err(0, "missing version line".into()));
        }
        // A lemma must not itself be an irregular form of another lemma.
        for lemma in forms_of.keys() {
            if let Some(other) = lemma_of.get(lemma) {
                if other != lemma {
                    return Err(err(
                        0,
                        format!("lemma {lemma:?} is also listed as a form of {other:?}"),
                    ));
                }
            }
        }
        Ok(Morphology {
            lemma_of,
            forms_of,
            keep,
            rules,
            cap: DEFAULT_VARIANT_CAP,
            source: text.to_string(),
        })
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap.max(1);
        self
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// The rule text this table was parsed from.
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Reduce a token to its lemma.
    ///
    /// Irregular forms map through the exception table; otherwise suffix
    /// rules are applied until none fires. The result is always a fixed
    /// point, so `lemmatize(lemmatize(w)) == lemmatize(w)`.
    pub fn lemmatize(&self, token: &str) -> String {
        let mut w = token.to_string();
        // Every productive step shortens the word, so this terminates.
        loop {
            if let Some(lemma) = self.lemma_of.get(&w) {
                return lemma.clone();
            }
            if self.keep.contains(&w) || self.forms_of.contains_key(&w) {
                return w;
            }
            match self.apply_suffix_rules(&w) {
                Some(next) if next.len() < w.len() => w = next,
                _ => return w,
            }
        }
    }

    fn apply_suffix_rules(&self, w: &str) -> Option<String> {
        for rule in &self.rules {
            let Some(stem) = w.strip_suffix(rule.suffix.as_str()) else {
                continue;
            };
            if stem.chars().count() < rule.min_stem {
                continue;
            }
            if rule.needs_vowel && !has_vowel(stem) {
                continue;
            }
            let mut out = format!("{stem}{}", rule.replacement);
            if rule.repair {
                out = repair_stem(&out);
            }
            return Some(out);
        }
        None
    }

    /// Surface variants of `word`: the word, its lemma, and inflections.
    ///
    /// Words with irregular forms get exactly those forms. Other words get
    /// the regular plural, plus `-ed`/`-ing` forms when `vocabulary`
    /// attests them. With a vocabulary every form except the word itself
    /// must occur in it. The set is capped at [`Morphology::cap`].
    pub fn variants(&self, word: &str, vocabulary: Option<&CorpusIndex>) -> VariantSet {
        let lemma = self.lemmatize(word);
        let mut candidates: Vec<(String, bool)> = vec![(word.to_string(), false)];
        candidates.push((lemma.clone(), false));
        if let Some(forms) = self.forms_of.get(&lemma) {
            candidates.extend(forms.iter().map(|f| (f.clone(), false)));
        } else if is_wordlike(&lemma) {
            candidates.push((pluralize(&lemma), false));
            candidates.push((past_form(&lemma), true));
            candidates.push((ing_form(&lemma), true));
        }

        let mut forms: Vec<String> = Vec::new();
        for (form, needs_attestation) in candidates {
            if forms.contains(&form) {
                continue;
            }
            let keep = if form == word {
                true
            } else {
                match vocabulary {
                    Some(idx) => idx.contains(&form),
                    None => !needs_attestation,
                }
            };
            if keep {
                forms.push(form);
            }
            if forms.len() == self.cap {
                break;
            }
        }
        VariantSet {
            base: word.to_string(),
            forms,
        }
    }

    /// Lemmatize every token of a window, keeping positions.
    pub fn normalize_phrase(&self, window: &RawWindow, pair: &Arc<WordPair>) -> Phrase {
        Phrase {
            tokens: window.tokens.iter().map(|t| self.lemmatize(t)).collect(),
            x_pos: window.x_pos,
            y_pos: window.y_pos,
            pair: Arc::clone(pair),
        }
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// Consonant flags per character; `y` counts as a vowel after a consonant.
fn consonant_mask(w: &str) -> Vec<bool> {
    let mut mask = Vec::<bool>::with_capacity(w.len());
    for (i, c) in w.chars().enumerate() {
        let cons = if is_vowel(c) {
            false
        } else if c == 'y' {
            i == 0 || !mask[i - 1]
        } else {
            true
        };
        mask.push(cons);
    }
    mask
}

fn has_vowel(w: &str) -> bool {
    consonant_mask(w).iter().any(|&c| !c)
}

/// Number of vowel-consonant sequences.
fn measure(w: &str) -> usize {
    let mask = consonant_mask(w);
    let mut m = 0;
    let mut prev_vowel = false;
    for &cons in &mask {
        if cons && prev_vowel {
            m += 1;
        }
        prev_vowel = !cons;
    }
    m
}

/// Ends consonant-vowel-consonant, with the last not `w`, `x` or `y`.
fn ends_cvc(w: &str) -> bool {
    let chars: Vec<char> = w.chars().collect();
    let mask = consonant_mask(w);
    let n = chars.len();
    n >= 3
        && mask[n - 3]
        && !mask[n - 2]
        && mask[n - 1]
        && !matches!(chars[n - 1], 'w' | 'x' | 'y')
}

fn ends_double_consonant(w: &str) -> bool {
    let chars: Vec<char> = w.chars().collect();
    let n = chars.len();
    n >= 2 && chars[n - 1] == chars[n - 2] && consonant_mask(w)[n - 1]
}

/// Restore a verb stem after `-ed`/`-ing` removal.
fn repair_stem(stem: &str) -> String {
    if ends_double_consonant(stem) && !stem.ends_with(['l', 's', 'z']) {
        let mut s = stem.to_string();
        s.pop();
        return s;
    }
    if stem.ends_with("at") || stem.ends_with("bl") || stem.ends_with("iz") {
        return format!("{stem}e");
    }
    if measure(stem) == 1 && ends_cvc(stem) {
        return format!("{stem}e");
    }
    stem.to_string()
}

fn is_wordlike(w: &str) -> bool {
    w.chars().count() >= 2 && w.chars().all(|c| c.is_alphabetic())
}

fn ends_consonant_y(w: &str) -> bool {
    let mask = consonant_mask(w);
    let n = mask.len();
    w.ends_with('y') && n >= 2 && mask[n - 2]
}

fn pluralize(w: &str) -> String {
    if ["s", "x", "z", "ch", "sh"].iter().any(|s| w.ends_with(s)) {
        format!("{w}es")
    } else if ends_consonant_y(w) {
        format!("{}ies", &w[..w.len() - 1])
    } else {
        format!("{w}s")
    }
}

fn doubles_final(w: &str) -> bool {
    measure(w) == 1 && ends_cvc(w)
}

fn past_form(w: &str) -> String {
    if w.ends_with('e') {
        format!("{w}d")
    } else if ends_consonant_y(w) {
        format!("{}ied", &w[..w.len() - 1])
    } else if doubles_final(w) {
        let last = w.chars().last().unwrap();
        format!("{w}{last}ed")
    } else {
        format!("{w}ed")
    }
}

fn ing_form(w: &str) -> String {
    if let Some(stem) = w.strip_suffix("ie") {
        format!("{stem}ying")
    } else if w.ends_with('e') && !w.ends_with("ee") {
        format!("{}ing", &w[..w.len() - 1])
    } else if doubles_final(w) {
        let last = w.chars().last().unwrap();
        format!("{w}{last}ing")
    } else {
        format!("{w}ing")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Order;

    fn m() -> Morphology {
        Morphology::default()
    }

    fn set(v: &VariantSet) -> Vec<&str> {
        let mut f: Vec<&str> = v.forms.iter().map(String::as_str).collect();
        f.sort();
        f
    }

    #[test]
    fn noun_variants() {
        assert_eq!(set(&m().variants("mason", None)), ["mason", "masons"]);
        assert_eq!(set(&m().variants("stone", None)), ["stone", "stones"]);
        assert_eq!(set(&m().variants("masons", None)), ["mason", "masons"]);
    }

    #[test]
    fn irregular_variants_from_table() {
        let v = m().variants("fly", None);
        assert_eq!(set(&v), ["flew", "flies", "flown", "fly", "flying"]);
        let be = m().variants("be", None);
        assert!(be.len() <= DEFAULT_VARIANT_CAP);
        assert_eq!(be.forms[0], "be");
    }

    #[test]
    fn variants_capped_and_contain_word() {
        let morph = m().with_cap(3);
        let v = morph.variants("be", None);
        assert_eq!(v.len(), 3);
        assert!(v.contains("be"));
    }

    #[test]
    fn attested_verb_forms_need_vocabulary() {
        let idx = CorpusIndex::from_documents(&["the carpenter carved wood while carving more"]);
        let morph = m();
        let v = morph.variants("carve", Some(&idx));
        assert_eq!(set(&v), ["carve", "carved", "carving"]);
        let without = morph.variants("carve", None);
        assert_eq!(set(&without), ["carve", "carves"]);
        // the filter drops forms missing from the corpus but keeps the base
        let absent = morph.variants("mason", Some(&idx));
        assert_eq!(set(&absent), ["mason"]);
    }

    #[test]
    fn lemmatize_examples() {
        let morph = m();
        for (form, lemma) in [
            ("is", "be"),
            ("was", "be"),
            ("be", "be"),
            ("stones", "stone"),
            ("masons", "mason"),
            ("used", "use"),
            ("flies", "fly"),
            ("studies", "study"),
            ("boxes", "box"),
            ("glasses", "glass"),
            ("running", "run"),
            ("stopped", "stop"),
            ("hoped", "hope"),
            ("created", "create"),
            ("orbits", "orbit"),
            ("orbited", "orbit"),
            ("feelings", "feel"),
            ("need", "need"),
            ("this", "this"),
            ("s", "s"),
            ("thing", "thing"),
            ("children", "child"),
        ] {
            assert_eq!(morph.lemmatize(form), lemma, "lemmatize({form})");
        }
    }

    #[test]
    fn lemmatize_is_idempotent_on_table_and_rule_outputs() {
        let morph = m();
        let mut words: Vec<String> = morph.lemma_of.keys().cloned().collect();
        words.extend(morph.forms_of.keys().cloned());
        words.extend(morph.keep.iter().cloned());
        for w in ["stop", "hop", "jumped", "carved", "hundreds", "bosses", "seeds", "agreed"] {
            words.push(w.to_string());
        }
        for w in &words {
            let once = morph.lemmatize(w);
            assert_eq!(morph.lemmatize(&once), once, "{w} -> {once}");
        }
    }

    #[test]
    fn normalize_keeps_positions() {
        let morph = m();
        let window = RawWindow {
            doc: 0,
            start: 0,
            tokens: "the stones that the mason used"
                .split(' ')
                .map(String::from)
                .collect(),
            x_pos: 4,
            y_pos: 1,
            order: Order::YX,
        };
        let pair = Arc::new(WordPair::new("mason", "stone").unwrap());
        let p = morph.normalize_phrase(&window, &pair);
        assert_eq!(p.tokens, ["the", "stone", "that", "the", "mason", "use"]);
        assert_eq!((p.x_pos, p.y_pos), (4, 1));
        assert_eq!(*p.pair, *pair);

        let bare = RawWindow {
            tokens: vec!["masons".into(), "stones".into()],
            x_pos: 0,
            y_pos: 1,
            order: Order::XY,
            ..window
        };
        assert_eq!(morph.normalize_phrase(&bare, &pair).tokens, ["mason", "stone"]);
    }

    #[test]
    fn copula_in_window_normalizes_to_be() {
        let morph = m();
        let window = RawWindow {
            doc: 0,
            start: 0,
            tokens: vec!["audacious".into(), "is".into(), "boldness".into()],
            x_pos: 0,
            y_pos: 2,
            order: Order::XY,
        };
        let pair = Arc::new(WordPair::new("audacious", "boldness").unwrap());
        assert_eq!(morph.normalize_phrase(&window, &pair).tokens[1], "be");
    }

    #[test]
    fn inflection_spelling() {
        assert_eq!(pluralize("box"), "boxes");
        assert_eq!(pluralize("city"), "cities");
        assert_eq!(pluralize("day"), "days");
        assert_eq!(past_form("stop"), "stopped");
        assert_eq!(past_form("carve"), "carved");
        assert_eq!(past_form("carry"), "carried");
        assert_eq!(ing_form("make"), "making");
        assert_eq!(ing_form("stop"), "stopping");
        assert_eq!(ing_form("tie"), "tying");
        assert_eq!(ing_form("see"), "seeing");
    }

    #[test]
    fn custom_rules_parse_and_errors() {
        let rules = "version\t1\nexc\tgeese\tgoose\nsuffix\ts\t\t2\t-\n";
        let morph = Morphology::parse(rules, Path::new("r.tsv")).unwrap();
        assert_eq!(morph.lemmatize("geese"), "goose");
        assert_eq!(morph.lemmatize("cats"), "cat");

        let bad = "version\t1\nsuffix\ts\tx\n";
        match Morphology::parse(bad, Path::new("r.tsv")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(Morphology::parse("exc\ta\tb\n", Path::new("r.tsv")).is_err());
        assert!(Morphology::parse("version\t2\n", Path::new("r.tsv")).is_err());
    }
}
