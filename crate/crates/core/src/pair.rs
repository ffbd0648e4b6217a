use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// An ordered pair of surface words, `a:b`.
///
/// Words are stored lowercased. The two words must differ.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WordPair {
    pub a: String,
    pub b: String,
}

impl WordPair {
    pub fn new(a: &str, b: &str) -> Result<Self, Error> {
        let a = a.trim().to_lowercase();
        let b = b.trim().to_lowercase();
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidInput(format!("empty word in pair {a:?}:{b:?}")));
        }
        if a == b {
            return Err(Error::InvalidInput(format!("pair words must differ: {a}:{a}")));
        }
        Ok(WordPair { a, b })
    }
}

impl fmt::Display for WordPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.a, self.b)
    }
}

impl FromStr for WordPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("expected a:b, got {s:?}")))?;
        WordPair::new(a, b)
    }
}

/// A word pair with an optional class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub pair: WordPair,
    pub label: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_lowercases() {
        let p: WordPair = "Mason:Stone".parse().unwrap();
        assert_eq!(p.a, "mason");
        assert_eq!(p.b, "stone");
        assert_eq!(p.to_string(), "mason:stone");
    }

    #[test]
    fn rejects_equal_words() {
        assert!("stone:stone".parse::<WordPair>().is_err());
        assert!("stone".parse::<WordPair>().is_err());
        assert!(":x".parse::<WordPair>().is_err());
    }
}
