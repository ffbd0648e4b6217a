//! Tokenization and the positional corpus index.
//!
//! The index answers exactly one kind of query: given two words, return
//! every window of the form
//!
//! ```text
//! [0..1 word] X [0..3 words] Y [0..1 word]
//! [0..1 word] Y [0..3 words] X [0..1 word]
//! ```
//!
//! Windows are bounded by document boundaries only.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Most context words allowed before the first pair member.
pub const MAX_LEADING: usize = 1;
/// Most words allowed between the two pair members.
pub const MAX_GAP: usize = 3;
/// Most context words allowed after the second pair member.
pub const MAX_TRAILING: usize = 1;
/// Longest window the templates admit.
pub const MAX_WINDOW: usize = MAX_LEADING + 2 + MAX_GAP + MAX_TRAILING;

const MAGIC: &[u8; 8] = b"PCLSIDX\0";
const FORMAT_VERSION: u32 = 1;

/// Default cap on the raw corpus bytes read by [`build_index`].
pub const DEFAULT_BYTE_BUDGET: u64 = 4 << 30;

/// Split raw text into lowercase tokens.
///
/// Maximal runs of alphanumeric characters become tokens; everything else
/// is a boundary and is dropped. An apostrophe is a boundary too, so the
/// possessive `mason's` yields `mason`, `s`.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Which pair member comes first in a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Order {
    XY,
    YX,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Posting {
    pub doc: u32,
    pub pos: u32,
}

/// A corpus window matching one of the two gap templates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RawWindow {
    pub doc: u32,
    /// Position of `tokens[0]` within the document.
    pub start: u32,
    pub tokens: Vec<String>,
    pub x_pos: usize,
    pub y_pos: usize,
    pub order: Order,
}

impl RawWindow {
    fn sort_key(&self) -> (u32, u32, usize, usize) {
        (self.doc, self.start, self.tokens.len(), self.x_pos)
    }
}

/// Immutable positional index over a tokenized corpus.
#[derive(Debug, Clone)]
pub struct CorpusIndex {
    vocab: Vec<String>,
    ids: HashMap<String, u32>,
    docs: Vec<Vec<u32>>,
    postings: Vec<Vec<Posting>>,
    total_tokens: u64,
    fingerprint: String,
}

/// Accumulates documents; [`IndexBuilder::finish`] freezes them into a
/// [`CorpusIndex`].
#[derive(Debug, Default)]
pub struct IndexBuilder {
    vocab: Vec<String>,
    ids: HashMap<String, u32>,
    docs: Vec<Vec<u32>>,
}

impl IndexBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Tokenize `text` and append it as the next document.
    pub fn add_document(&mut self, text: &str) -> u32 {
        let tokens = tokenize(text);
        self.add_tokens(tokens)
    }

    fn add_tokens(&mut self, tokens: Vec<String>) -> u32 {
        let mut doc = Vec::with_capacity(tokens.len());
        for tok in tokens {
            let id = match self.ids.get(&tok) {
                Some(&id) => id,
                None => {
                    let id = self.vocab.len() as u32;
                    self.ids.insert(tok.clone(), id);
                    self.vocab.push(tok);
                    id
                }
            };
            doc.push(id);
        }
        self.docs.push(doc);
        (self.docs.len() - 1) as u32
    }

    pub fn finish(self) -> CorpusIndex {
        CorpusIndex::assemble(self.vocab, self.ids, self.docs)
    }
}

/// Build an index over files and directories, in the order given.
///
/// Directories are walked recursively with entries sorted by name. Each
/// file becomes one document.
pub fn build_index<P: AsRef<Path>>(sources: &[P], byte_budget: u64) -> Result<CorpusIndex> {
    let mut files: Vec<PathBuf> = Vec::new();
    for src in sources {
        let src = src.as_ref();
        let meta = fs::metadata(src).map_err(|e| Error::io(src, e))?;
        if meta.is_dir() {
            for entry in walkdir::WalkDir::new(src).sort_by_file_name() {
                let entry = entry.map_err(|e| {
                    let path = e.path().unwrap_or(src).to_path_buf();
                    Error::io(path, e.into())
                })?;
                if entry.file_type().is_file() {
                    files.push(entry.into_path());
                }
            }
        } else {
            files.push(src.to_path_buf());
        }
    }

    let mut builder = IndexBuilder::new();
    let mut bytes = 0u64;
    for file in &files {
        let raw = fs::read(file).map_err(|e| Error::io(file, e))?;
        bytes += raw.len() as u64;
        if bytes > byte_budget {
            return Err(Error::InvalidInput(format!(
                "corpus exceeds byte budget of {byte_budget} at {}",
                file.display()
            )));
        }
        let text = String::from_utf8(raw).map_err(|e| {
            Error::io(file, std::io::Error::new(std::io::ErrorKind::InvalidData, e))
        })?;
        builder.add_document(&text);
    }
    log::info!(
        "indexed {} documents ({} bytes) from {} sources",
        files.len(),
        bytes,
        sources.len()
    );
    Ok(builder.finish())
}

impl CorpusIndex {
    fn assemble(vocab: Vec<String>, ids: HashMap<String, u32>, docs: Vec<Vec<u32>>) -> Self {
        let mut postings = vec![Vec::new(); vocab.len()];
        let mut total_tokens = 0u64;
        for (d, doc) in docs.iter().enumerate() {
            total_tokens += doc.len() as u64;
            for (p, &id) in doc.iter().enumerate() {
                postings[id as usize].push(Posting {
                    doc: d as u32,
                    pos: p as u32,
                });
            }
        }
        let mut index = CorpusIndex {
            vocab,
            ids,
            docs,
            postings,
            total_tokens,
            fingerprint: String::new(),
        };
        let digest = Sha256::digest(index.to_bytes());
        index.fingerprint = digest.iter().take(12).map(|b| format!("{b:02x}")).collect();
        index
    }

    pub fn from_documents<S: AsRef<str>>(docs: &[S]) -> Self {
        let mut b = IndexBuilder::new();
        for d in docs {
            b.add_document(d.as_ref());
        }
        b.finish()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn num_documents(&self) -> usize {
        self.docs.len()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.ids.contains_key(word)
    }

    /// Short hex digest of the persisted form. Identifies the corpus.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn postings(&self, word: &str) -> &[Posting] {
        self.ids
            .get(word)
            .map(|&id| self.postings[id as usize].as_slice())
            .unwrap_or(&[])
    }

    /// Tokens of a whole document.
    pub fn document(&self, doc: u32) -> Option<Vec<&str>> {
        self.docs
            .get(doc as usize)
            .map(|d| d.iter().map(|&id| self.vocab[id as usize].as_str()).collect())
    }

    /// Every window matching either gap template for `x` and `y`.
    ///
    /// Each positional co-occurrence yields one window per admissible
    /// choice of leading and trailing context. Results are sorted by
    /// document, start position, extent, then X position.
    pub fn query_windows(&self, x: &str, y: &str) -> Result<Vec<RawWindow>> {
        if x == y {
            return Err(Error::InvalidInput(format!(
                "window query needs two distinct words, got {x:?} twice"
            )));
        }
        let (Some(&xid), Some(&yid)) = (self.ids.get(x), self.ids.get(y)) else {
            return Ok(Vec::new());
        };

        let mut out = Vec::new();
        for p in &self.postings[xid as usize] {
            let doc = &self.docs[p.doc as usize];
            let pos = p.pos as usize;
            let lo = pos.saturating_sub(MAX_GAP + 1);
            let hi = (pos + MAX_GAP + 1).min(doc.len() - 1);
            for q in lo..=hi {
                if q == pos || doc[q] != yid {
                    continue;
                }
                let (first, second, order) = if pos < q {
                    (pos, q, Order::XY)
                } else {
                    (q, pos, Order::YX)
                };
                for lead in 0..=MAX_LEADING.min(first) {
                    let start = first - lead;
                    for trail in 0..=MAX_TRAILING {
                        let end = second + trail;
                        if end >= doc.len() {
                            break;
                        }
                        out.push(RawWindow {
                            doc: p.doc,
                            start: start as u32,
                            tokens: doc[start..=end]
                                .iter()
                                .map(|&id| self.vocab[id as usize].clone())
                                .collect(),
                            x_pos: pos - start,
                            y_pos: q - start,
                            order,
                        });
                    }
                }
            }
        }
        out.sort_by_key(RawWindow::sort_key);
        Ok(out)
    }

    /// Serialize to the binary index format.
    ///
    /// Layout (all integers little-endian u32):
    /// magic `PCLSIDX\0`, version, vocabulary size, then each word as
    /// byte length + UTF-8 bytes, document count, then each document as
    /// token count + token ids. Postings are rebuilt on load.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, FORMAT_VERSION);
        put_u32(&mut out, self.vocab.len() as u32);
        for w in &self.vocab {
            put_u32(&mut out, w.len() as u32);
            out.extend_from_slice(w.as_bytes());
        }
        put_u32(&mut out, self.docs.len() as u32);
        for doc in &self.docs {
            put_u32(&mut out, doc.len() as u32);
            for &id in doc {
                put_u32(&mut out, id);
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, at: 0 };
        if r.take(MAGIC.len())? != MAGIC {
            return Err(Error::IndexFormat("missing magic header".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::IndexFormat(format!("unsupported version {version}")));
        }
        let nvocab = r.u32()? as usize;
        let mut vocab = Vec::with_capacity(nvocab.min(1 << 20));
        let mut ids = HashMap::with_capacity(nvocab.min(1 << 20));
        for i in 0..nvocab {
            let len = r.u32()? as usize;
            let w = std::str::from_utf8(r.take(len)?)
                .map_err(|_| Error::IndexFormat(format!("word {i} is not UTF-8")))?
                .to_string();
            if ids.insert(w.clone(), i as u32).is_some() {
                return Err(Error::IndexFormat(format!("duplicate vocabulary entry {w:?}")));
            }
            vocab.push(w);
        }
        let ndocs = r.u32()? as usize;
        let mut docs = Vec::with_capacity(ndocs.min(1 << 20));
        for _ in 0..ndocs {
            let len = r.u32()? as usize;
            let mut doc = Vec::with_capacity(len.min(1 << 24));
            for _ in 0..len {
                let id = r.u32()?;
                if id as usize >= nvocab {
                    return Err(Error::IndexFormat(format!("token id {id} out of range")));
                }
                doc.push(id);
            }
            docs.push(doc);
        }
        if r.at != bytes.len() {
            return Err(Error::IndexFormat("trailing bytes".into()));
        }
        Ok(CorpusIndex::assemble(vocab, ids, docs))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .at
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::IndexFormat("truncated".into()))?;
        let s = &self.buf[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn tokenize_basic() {
        assert_eq!(
            tokenize("The mason cut the stone with"),
            toks("the mason cut the stone with")
        );
        assert_eq!(tokenize("mason's chisel"), toks("mason s chisel"));
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("  a,b;;C-3po. "), toks("a b c 3po"));
    }

    #[test]
    fn postings_enumerate_positions() {
        let idx = CorpusIndex::from_documents(&["a b a"]);
        assert_eq!(
            idx.postings("a"),
            &[Posting { doc: 0, pos: 0 }, Posting { doc: 0, pos: 2 }]
        );
        assert_eq!(idx.postings("b"), &[Posting { doc: 0, pos: 1 }]);
        assert_eq!(idx.total_tokens(), 3);
    }

    #[test]
    fn documents_numbered_in_order() {
        let idx = CorpusIndex::from_documents(&["x", "y"]);
        assert_eq!(idx.postings("x")[0].doc, 0);
        assert_eq!(idx.postings("y")[0].doc, 1);
    }

    #[test]
    fn empty_index_is_valid() {
        let idx = CorpusIndex::from_documents::<&str>(&[]);
        assert_eq!(idx.total_tokens(), 0);
        assert!(idx.query_windows("a", "b").unwrap().is_empty());
        let again = CorpusIndex::from_bytes(&idx.to_bytes()).unwrap();
        assert_eq!(again.num_documents(), 0);
    }

    #[test]
    fn mason_stone_windows() {
        let idx = CorpusIndex::from_documents(&["the mason cut the stone with care"]);
        let got: BTreeSet<(Vec<String>, usize, usize)> = idx
            .query_windows("mason", "stone")
            .unwrap()
            .into_iter()
            .map(|w| {
                assert_eq!(w.order, Order::XY);
                (w.tokens, w.x_pos, w.y_pos)
            })
            .collect();
        let want: BTreeSet<_> = [
            (toks("the mason cut the stone with"), 1, 4),
            (toks("the mason cut the stone"), 1, 4),
            (toks("mason cut the stone with"), 0, 3),
            (toks("mason cut the stone"), 0, 3),
        ]
        .into_iter()
        .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn gap_of_four_is_out_of_template() {
        let idx = CorpusIndex::from_documents(&["mason a b c d stone"]);
        assert!(idx.query_windows("mason", "stone").unwrap().is_empty());
        let idx = CorpusIndex::from_documents(&["mason a b c stone"]);
        assert_eq!(idx.query_windows("mason", "stone").unwrap().len(), 1);
    }

    #[test]
    fn reversed_order() {
        let idx = CorpusIndex::from_documents(&["stone by the mason"]);
        let ws = idx.query_windows("mason", "stone").unwrap();
        assert!(!ws.is_empty());
        for w in &ws {
            assert_eq!(w.order, Order::YX);
            assert!(w.y_pos < w.x_pos);
            assert_eq!(w.tokens[w.x_pos], "mason");
        }
    }

    #[test]
    fn windows_do_not_cross_documents() {
        let idx = CorpusIndex::from_documents(&["the mason", "stone here"]);
        assert!(idx.query_windows("mason", "stone").unwrap().is_empty());
    }

    #[test]
    fn equal_words_rejected_and_absent_words_empty() {
        let idx = CorpusIndex::from_documents(&["a b"]);
        assert!(idx.query_windows("a", "a").is_err());
        assert!(idx.query_windows("a", "zzz").unwrap().is_empty());
    }

    #[test]
    fn persisted_index_round_trips() {
        let idx = CorpusIndex::from_documents(&[
            "the mason cut the stone with care",
            "stones that the masons used",
            "mason's stone",
        ]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tiny.idx");
        idx.save(&path).unwrap();
        let back = CorpusIndex::load(&path).unwrap();
        assert_eq!(back.fingerprint(), idx.fingerprint());
        for (x, y) in [("mason", "stone"), ("masons", "stones"), ("s", "stone"), ("the", "the2")] {
            assert_eq!(back.query_windows(x, y).unwrap(), idx.query_windows(x, y).unwrap());
        }
    }

    #[test]
    fn corrupt_index_rejected() {
        let idx = CorpusIndex::from_documents(&["a b c"]);
        let mut bytes = idx.to_bytes();
        assert!(CorpusIndex::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        bytes[0] = b'X';
        assert!(CorpusIndex::from_bytes(&bytes).is_err());
    }

    #[test]
    fn build_from_files_and_dirs() {
        let dir = tempfile::tempdir().unwrap();
        let sub = dir.path().join("sub");
        fs::create_dir(&sub).unwrap();
        fs::write(sub.join("b.txt"), "second doc").unwrap();
        fs::write(sub.join("a.txt"), "first doc").unwrap();
        let idx = build_index(&[&sub], DEFAULT_BYTE_BUDGET).unwrap();
        assert_eq!(idx.document(0).unwrap(), vec!["first", "doc"]);
        assert_eq!(idx.document(1).unwrap(), vec!["second", "doc"]);

        let missing = dir.path().join("nope.txt");
        match build_index(&[&missing], DEFAULT_BYTE_BUDGET) {
            Err(Error::Io { path, .. }) => assert_eq!(path, missing),
            other => panic!("expected io error, got {other:?}"),
        }
        assert!(build_index(&[&sub], 5).is_err());
    }
}
