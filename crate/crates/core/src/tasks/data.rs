//! Task data files.
//!
//! ```text
//! # comments and blank lines are ignored
//! task<TAB>sat
//! q<TAB>mason:stone<TAB>teacher:chalk<TAB>carpenter:wood<TAB>...<TAB>answer=b
//!
//! task<TAB>esl
//! q<TAB>rusty<TAB>corroded<TAB>black<TAB>dirty<TAB>painted<TAB>answer=a<TAB>context=A rusty nail ...
//!
//! task<TAB>noun-modifier
//! classes<TAB>causality<TAB>temporality<TAB>spatial<TAB>participant<TAB>quality
//! p<TAB>cold:virus<TAB>causality
//! ```
//!
//! Answers are letters, `a` for the first choice.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pair::{LabeledPair, WordPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Sat,
    Toefl,
    Esl,
    EslSynAnt,
    ClSynAnt,
    SimAssocBoth,
    NounModifier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskShape {
    /// Stem pair, choice pairs.
    AnalogyChoice,
    /// Stem word, choice words.
    SynonymChoice,
    /// Pairs with class labels.
    Labeled,
}

impl TaskKind {
    pub const ALL: [TaskKind; 7] = [
        TaskKind::Sat,
        TaskKind::Toefl,
        TaskKind::Esl,
        TaskKind::EslSynAnt,
        TaskKind::ClSynAnt,
        TaskKind::SimAssocBoth,
        TaskKind::NounModifier,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Sat => "sat",
            TaskKind::Toefl => "toefl",
            TaskKind::Esl => "esl",
            TaskKind::EslSynAnt => "esl-syn-ant",
            TaskKind::ClSynAnt => "cl-syn-ant",
            TaskKind::SimAssocBoth => "sim-assoc-both",
            TaskKind::NounModifier => "noun-modifier",
        }
    }

    pub fn shape(self) -> TaskShape {
        match self {
            TaskKind::Sat => TaskShape::AnalogyChoice,
            TaskKind::Toefl | TaskKind::Esl => TaskShape::SynonymChoice,
            _ => TaskShape::Labeled,
        }
    }

    /// Number of classes the labeled tasks are defined over.
    pub fn class_count(self) -> Option<usize> {
        match self {
            TaskKind::EslSynAnt | TaskKind::ClSynAnt => Some(2),
            TaskKind::SimAssocBoth => Some(3),
            TaskKind::NounModifier => Some(5),
            _ => None,
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = TaskKind::ALL.iter().map(|k| k.name()).collect();
                Error::InvalidInput(format!("unknown task {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// A stem or choice: a pair for analogies, a single word for synonyms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Item {
    Pair(WordPair),
    Word(String),
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Pair(p) => write!(f, "{p}"),
            Item::Word(w) => f.write_str(w),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceQuestion {
    pub stem: Item,
    pub choices: Vec<Item>,
    pub answer: usize,
    /// Sentence showing the stem in use. Never used for classification.
    pub context: Option<String>,
}

pub const MIN_CHOICES: usize = 2;
pub const MAX_CHOICES: usize = 8;

impl ChoiceQuestion {
    pub fn new(stem: Item, choices: Vec<Item>, answer: usize) -> Result<Self> {
        if !(MIN_CHOICES..=MAX_CHOICES).contains(&choices.len()) {
            return Err(Error::InvalidInput(format!(
                "a question needs {MIN_CHOICES}..={MAX_CHOICES} choices, got {}",
                choices.len()
            )));
        }
        if answer >= choices.len() {
            return Err(Error::InvalidInput(format!("answer {answer} out of range")));
        }
        Ok(ChoiceQuestion {
            stem,
            choices,
            answer,
            context: None,
        })
    }

    pub fn stem_pair(&self) -> Option<&WordPair> {
        match &self.stem {
            Item::Pair(p) => Some(p),
            Item::Word(_) => None,
        }
    }
}

pub fn choice_letter(i: usize) -> String {
    ((b'a' + i as u8) as char).to_string()
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskContent {
    Choice(Vec<ChoiceQuestion>),
    Labeled {
        classes: Vec<String>,
        pairs: Vec<LabeledPair>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskData {
    pub kind: TaskKind,
    pub content: TaskContent,
}

impl TaskData {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let bad = |line: usize, msg: String| Error::parse(path, line, msg);
        let mut kind: Option<TaskKind> = None;
        let mut questions = Vec::new();
        let mut declared: Option<Vec<String>> = None;
        let mut pairs = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match (fields[0], kind) {
                ("task", None) => {
                    let name = fields.get(1).ok_or_else(|| bad(ln, "task needs a name".into()))?;
                    kind = Some(name.parse().map_err(|e: Error| bad(ln, e.to_string()))?);
                }
                ("task", Some(_)) => return Err(bad(ln, "duplicate task header".into())),
                (_, None) => return Err(bad(ln, "first record must be the task header".into())),
                ("q", Some(k)) => {
                    if k.shape() == TaskShape::Labeled {
                        return Err(bad(ln, format!("task {k} takes labeled pairs, not questions")));
                    }
                    let q = parse_question(&fields[1..], k.shape()).map_err(|m| bad(ln, m))?;
                    questions.push(q);
                }
                ("classes", Some(k)) => {
                    if k.shape() != TaskShape::Labeled || declared.is_some() || !pairs.is_empty() {
                        return Err(bad(ln, "unexpected classes record".into()));
                    }
                    let classes: Vec<String> = fields[1..].iter().map(|s| s.to_string()).collect();
                    if let Some(n) = k.class_count() {
                        if classes.len() != n {
                            return Err(bad(ln, format!("task {k} has {n} classes, got {}", classes.len())));
                        }
                    }
                    declared = Some(classes);
                }
                ("p", Some(k)) => {
                    if k.shape() != TaskShape::Labeled {
                        return Err(bad(ln, format!("task {k} takes questions, not labeled pairs")));
                    }
                    let (pair, label) = match fields[1..] {
                        [p, l] => (p, Some(l.to_string())),
                        [p] => (p, None),
                        _ => return Err(bad(ln, "expected p<TAB>a:b<TAB>label".into())),
                    };
                    let pair: WordPair = pair.parse().map_err(|e: Error| bad(ln, e.to_string()))?;
                    if let (Some(cs), Some(l)) = (&declared, &label) {
                        if !cs.contains(l) {
                            return Err(bad(ln, format!("label {l:?} not in declared classes")));
                        }
                    }
                    pairs.push(LabeledPair { pair, label });
                }
                (other, _) => return Err(bad(ln, format!("unknown record type {other:?}"))),
            }
        }
        let kind = kind.ok_or_else(|| bad(0, "missing task header".into()))?;
        let content = if kind.shape() == TaskShape::Labeled {
            let classes = match declared {
                Some(c) => c,
                None => {
                    let mut c: Vec<String> = Vec::new();
                    for p in &pairs {
                        if let Some(l) = &p.label {
                            if !c.contains(l) {
                                c.push(l.clone());
                            }
                        }
                    }
                    c
                }
            };
            TaskContent::Labeled { classes, pairs }
        } else {
            TaskContent::Choice(questions)
        };
        Ok(TaskData { kind, content })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "task\t{}", self.kind);
        match &self.content {
            TaskContent::Choice(qs) => {
                for q in qs {
                    let _ = write!(out, "q\t{}", q.stem);
                    for c in &q.choices {
                        let _ = write!(out, "\t{c}");
                    }
                    let _ = write!(out, "\tanswer={}", choice_letter(q.answer));
                    if let Some(ctx) = &q.context {
                        let _ = write!(out, "\tcontext={ctx}");
                    }
                    out.push('\n');
                }
            }
            TaskContent::Labeled { classes, pairs } => {
                let _ = writeln!(out, "classes\t{}", classes.join("\t"));
                for p in pairs {
                    match &p.label {
                        Some(l) => {
                            let _ = writeln!(out, "p\t{}\t{l}", p.pair);
                        }
                        None => {
                            let _ = writeln!(out, "p\t{}", p.pair);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

fn parse_question(fields: &[&str], shape: TaskShape) -> std::result::Result<ChoiceQuestion, String> {
    let mut items = Vec::new();
    let mut answer = None;
    let mut context = None;
    for f in fields {
        if let Some(a) = f.strip_prefix("answer=") {
            let mut chars = a.chars();
            let (Some(c), None) = (chars.next(), chars.next()) else {
                return Err(format!("bad answer {a:?}"));
            };
            if !c.is_ascii_lowercase() {
                return Err(format!("bad answer {a:?}"));
            }
            answer = Some((c as u8 - b'a') as usize);
        } else if let Some(c) = f.strip_prefix("context=") {
            context = Some(c.to_string());
        } else {
            let item = match shape {
                TaskShape::AnalogyChoice => Item::Pair(f.parse().map_err(|e: Error| e.to_string())?),
                _ => {
                    if f.contains(':') || f.trim().is_empty() {
                        return Err(format!("expected a single word, got {f:?}"));
                    }
                    Item::Word(f.trim().to_lowercase())
                }
            };
            items.push(item);
        }
    }
    let answer = answer.ok_or("missing answer=<letter>")?;
    if items.is_empty() {
        return Err("missing stem".into());
    }
    let stem = items.remove(0);
    let mut q = ChoiceQuestion::new(stem, items, answer).map_err(|e| e.to_string())?;
    q.context = context;
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAT: &str = "task\tsat\n# Table-style question\nq\tmason:stone\tteacher:chalk\tcarpenter:wood\tsoldier:gun\tphotograph:camera\tbook:word\tanswer=b\n";

    #[test]
    fn parses_analogy_questions() {
        let d = TaskData::parse(SAT, Path::new("sat")).unwrap();
        assert_eq!(d.kind, TaskKind::Sat);
        let TaskContent::Choice(qs) = &d.content else { panic!() };
        assert_eq!(qs.len(), 1);
        assert_eq!(qs[0].choices.len(), 5);
        assert_eq!(qs[0].answer, 1);
        assert_eq!(qs[0].choices[1].to_string(), "carpenter:wood");
        let again = TaskData::parse(&d.to_text(), Path::new("sat")).unwrap();
        assert_eq!(again, d);
    }

    #[test]
    fn parses_esl_context() {
        let text = "task\tesl\nq\trusty\tcorroded\tblack\tdirty\tpainted\tanswer=a\tcontext=A rusty nail is not as strong as a clean, new one.\n";
        let d = TaskData::parse(text, Path::new("esl")).unwrap();
        let TaskContent::Choice(qs) = &d.content else { panic!() };
        assert_eq!(qs[0].stem, Item::Word("rusty".into()));
        assert!(qs[0].context.as_deref().unwrap().starts_with("A rusty"));
    }

    #[test]
    fn labeled_with_declared_classes() {
        let text = "task\tnoun-modifier\nclasses\tcausality\ttemporality\tspatial\tparticipant\tquality\np\tcold:virus\tcausality\np\tcopper:coin\tquality\n";
        let d = TaskData::parse(text, Path::new("nm")).unwrap();
        let TaskContent::Labeled { classes, pairs } = &d.content else { panic!() };
        assert_eq!(classes.len(), 5);
        assert_eq!(pairs.len(), 2);
    }

    #[test]
    fn schema_errors_carry_line_numbers() {
        let cases = [
            ("q\ta:b\tc:d\tanswer=a\n", 1),
            ("task\tsat\nq\tmason:stone\tteacher:chalk\tanswer=a\n", 2),
            ("task\tsat\n\nq\tmason:stone\tx:y\tz:w\tanswer=c\n", 3),
            ("task\ttoefl\nq\tlevied\timposed\tbelieved\n", 2),
            ("task\tnoun-modifier\nclasses\ta\tb\n", 2),
            ("task\tsim-assoc-both\nclasses\ts\ta\tb\np\tx:y\tnope\n", 3),
            ("task\tbogus\n", 1),
            ("task\tsat\np\ta:b\tpositive\n", 2),
        ];
        for (text, want) in cases {
            match TaskData::parse(text, Path::new("f")) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn task_names_round_trip() {
        for k in TaskKind::ALL {
            assert_eq!(k.name().parse::<TaskKind>().unwrap(), k);
        }
        assert_eq!(TaskKind::NounModifier.class_count(), Some(5));
    }
}
