//! Phrase harvesting: variant expansion, template retrieval, normalization.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::corpus::{CorpusIndex, MAX_WINDOW};
use crate::error::{Error, Result};
use crate::morphology::Morphology;
use crate::pair::WordPair;

pub const DEFAULT_MAX_PHRASES: usize = 5000;

/// A lemmatized window with marked X and Y positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phrase {
    pub tokens: Vec<String>,
    pub x_pos: usize,
    pub y_pos: usize,
    pub pair: Arc<WordPair>,
}

impl Phrase {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Positional bounds of the gap templates.
    pub fn is_well_formed(&self) -> bool {
        let n = self.tokens.len();
        if !(2..=MAX_WINDOW).contains(&n) || self.x_pos >= n || self.y_pos >= n || self.x_pos == self.y_pos {
            return false;
        }
        let first = self.x_pos.min(self.y_pos);
        let second = self.x_pos.max(self.y_pos);
        first <= 1 && second - first - 1 <= 3 && n - 1 - second <= 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarvestReport {
    pub pair: WordPair,
    pub phrase_count: usize,
    pub truncated: bool,
    pub variant_combinations_queried: usize,
}

#[derive(Debug, Clone)]
pub struct Harvest {
    pub phrases: Vec<Phrase>,
    pub report: HarvestReport,
}

/// Collect the normalized phrase multiset for `pair`.
///
/// Every variant combination is queried in `variants(a) x variants(b)`
/// order. A window reached through two combinations is kept once.
/// Duplicate phrases from distinct corpus locations are all kept. At most
/// `max_phrases` phrases are returned, the first in that order.
pub fn harvest(
    index: &CorpusIndex,
    morph: &Morphology,
    pair: &WordPair,
    max_phrases: usize,
) -> Result<Harvest> {
    let owner = Arc::new(pair.clone());
    let va = morph.variants(&pair.a, Some(index));
    let vb = morph.variants(&pair.b, Some(index));

    let mut seen: HashSet<(u32, u32, usize, usize, usize)> = HashSet::new();
    let mut phrases = Vec::new();
    let mut combos = 0;
    let mut raw_count = 0usize;
    for x in &va.forms {
        for y in &vb.forms {
            if x == y {
                continue;
            }
            combos += 1;
            for w in index.query_windows(x, y)? {
                let key = (w.doc, w.start, w.tokens.len(), w.x_pos, w.y_pos);
                if !seen.insert(key) {
                    continue;
                }
                raw_count += 1;
                if phrases.len() < max_phrases {
                    phrases.push(morph.normalize_phrase(&w, &owner));
                }
            }
        }
    }
    let truncated = raw_count > max_phrases;
    if truncated {
        log::debug!("{pair}: {raw_count} phrases truncated to {max_phrases}");
    }
    Ok(Harvest {
        report: HarvestReport {
            pair: pair.clone(),
            phrase_count: phrases.len(),
            truncated,
            variant_combinations_queried: combos,
        },
        phrases,
    })
}

/// On-disk cache of harvested phrases, one file per pair.
///
/// Files live under `<dir>/<key>/` where the key digests the corpus
/// fingerprint, the morphology rules and the phrase cap. Format:
///
/// ```text
/// #pairclass-phrases v1
/// pair<TAB>a:b
/// truncated<TAB>0|1
/// combinations<TAB>n
/// <x_pos><TAB><y_pos><TAB>tok tok tok ...
/// ```
#[derive(Debug, Clone)]
pub struct PhraseCache {
    dir: PathBuf,
}

const CACHE_HEADER: &str = "#pairclass-phrases v1";

impl PhraseCache {
    pub fn new(root: &Path, index: &CorpusIndex, morph: &Morphology, max_phrases: usize) -> Self {
        let mut h = Sha256::new();
        h.update(index.fingerprint().as_bytes());
        h.update(morph.source().as_bytes());
        h.update(morph.cap().to_le_bytes());
        h.update(max_phrases.to_le_bytes());
        let key: String = h.finalize().iter().take(10).map(|b| format!("{b:02x}")).collect();
        PhraseCache {
            dir: root.join(key),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn file_for(&self, pair: &WordPair) -> PathBuf {
        let safe = |w: &str| {
            if w.chars().all(|c| c.is_ascii_alphanumeric()) {
                w.to_string()
            } else {
                w.bytes().map(|b| format!("{b:02x}")).collect::<String>() + "~"
            }
        };
        self.dir.join(format!("{}__{}.phr", safe(&pair.a), safe(&pair.b)))
    }

    pub fn get(&self, pair: &WordPair) -> Result<Option<Harvest>> {
        let path = self.file_for(pair);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(&path, e)),
        };
        parse_cache_file(&text, &path, pair).map(Some)
    }

    pub fn put(&self, h: &Harvest) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let path = self.file_for(&h.report.pair);
        let mut out = String::new();
        out.push_str(CACHE_HEADER);
        out.push('\n');
        let _ = writeln!(out, "pair\t{}", h.report.pair);
        let _ = writeln!(out, "truncated\t{}", u8::from(h.report.truncated));
        let _ = writeln!(out, "combinations\t{}", h.report.variant_combinations_queried);
        for p in &h.phrases {
            let _ = writeln!(out, "{}\t{}\t{}", p.x_pos, p.y_pos, p.tokens.join(" "));
        }
        // write-then-rename so concurrent readers never see a partial file
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, out).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }
}

fn parse_cache_file(text: &str, path: &Path, pair: &WordPair) -> Result<Harvest> {
    let bad = |line: usize, msg: &str| Error::parse(path, line + 1, msg);
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, CACHE_HEADER)) => {}
        _ => return Err(bad(0, "missing phrase cache header")),
    }
    let mut field = |name: &str| -> Result<String> {
        let (i, l) = lines.next().ok_or_else(|| bad(0, "truncated cache file"))?;
        let (k, v) = l.split_once('\t').ok_or_else(|| bad(i, "expected key<TAB>value"))?;
        if k != name {
            return Err(bad(i, &format!("expected {name}")));
        }
        Ok(v.to_string())
    };
    let stored: WordPair = field("pair")?.parse()?;
    if &stored != pair {
        return Err(bad(1, "cache file belongs to another pair"));
    }
    let truncated = field("truncated")? == "1";
    let combos: usize = field("combinations")?
        .parse()
        .map_err(|_| bad(3, "bad combination count"))?;
    let owner = Arc::new(pair.clone());
    let mut phrases = Vec::new();
    for (i, l) in lines {
        let mut parts = l.splitn(3, '\t');
        let (Some(xs), Some(ys), Some(toks)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad(i, "expected x<TAB>y<TAB>tokens"));
        };
        let phrase = Phrase {
            x_pos: xs.parse().map_err(|_| bad(i, "bad x position"))?,
            y_pos: ys.parse().map_err(|_| bad(i, "bad y position"))?,
            tokens: toks.split(' ').map(String::from).collect(),
            pair: Arc::clone(&owner),
        };
        if !phrase.is_well_formed() {
            return Err(bad(i, "phrase violates template bounds"));
        }
        phrases.push(phrase);
    }
    Ok(Harvest {
        report: HarvestReport {
            pair: pair.clone(),
            phrase_count: phrases.len(),
            truncated,
            variant_combinations_queried: combos,
        },
        phrases,
    })
}
