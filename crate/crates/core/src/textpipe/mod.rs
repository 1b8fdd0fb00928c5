//! Text analysis shared by indexing, query processing and the corpus dump
//! used for embedding training: tokenize, stop, stem.
//!
//! Documents, topics and the training corpus all go through the same
//! [`Analyzer`], so index terms and embedding vocabulary line up.

mod porter;
mod trec;

use std::collections::HashSet;
use std::io::Read;

use serde::{Deserialize, Serialize};

pub use porter::porter_stem;
pub use trec::{parse_topics, parse_trec_docs, write_jsonl_docs};

use crate::Result;

const SMART_STOPWORDS: &str = include_str!("../../data/smart_stopwords.txt");

/// A document as read from a corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocument {
    pub doc_id: String,
    pub text: String,
}

/// A document after tokenization, stopping and stemming.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzedDocument {
    pub doc_id: String,
    pub tokens: Vec<String>,
}

impl AnalyzedDocument {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// A query: the analyzed title field of a topic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topic {
    pub query_id: String,
    pub title_terms: Vec<String>,
}

/// Surface-form stopwords, one per line in files; `#` starts a comment.
#[derive(Debug, Clone, Default)]
pub struct Stoplist {
    words: HashSet<String>,
}

impl Stoplist {
    /// The bundled SMART list: 571 entries, 570 distinct ("would" is listed
    /// twice upstream).
    pub fn smart() -> Self {
        Self::parse(SMART_STOPWORDS)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(|line| line.split('#').next().unwrap_or("").trim())
            .filter(|w| !w.is_empty())
            .map(|w| w.to_ascii_lowercase())
            .collect();
        Stoplist { words }
    }

    pub fn from_reader<R: Read>(mut reader: R) -> Result<Self> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Splits on maximal runs of letters and digits, ASCII-lowercases each run.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_ascii_lowercase())
}

/// Tokenize, drop stopwords, Porter-stem the survivors. Order and
/// duplicates are preserved.
pub fn analyze(text: &str, stoplist: &Stoplist) -> Vec<String> {
    tokenize(text)
        .filter(|t| !stoplist.contains(t))
        .map(|t| porter_stem(&t))
        .collect()
}

/// An [`analyze`] pipeline bound to a stoplist.
#[derive(Debug, Clone)]
pub struct Analyzer {
    stoplist: Stoplist,
}

impl Default for Analyzer {
    fn default() -> Self {
        Analyzer::new(Stoplist::smart())
    }
}

impl Analyzer {
    pub fn new(stoplist: Stoplist) -> Self {
        Analyzer { stoplist }
    }

    pub fn stoplist(&self) -> &Stoplist {
        &self.stoplist
    }

    pub fn analyze(&self, text: &str) -> Vec<String> {
        analyze(text, &self.stoplist)
    }

    pub fn analyze_document(&self, doc: &RawDocument) -> AnalyzedDocument {
        AnalyzedDocument {
            doc_id: doc.doc_id.clone(),
            tokens: self.analyze(&doc.text),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analyze_title() {
        let stop = Stoplist::smart();
        assert_eq!(
            analyze("International Organized Crime", &stop),
            vec!["intern", "organ", "crime"]
        );
        assert!(analyze("the of and", &stop).is_empty());
        assert_eq!(analyze("crime crime", &stop), vec!["crime", "crime"]);
    }

    #[test]
    fn tokenizer_splits_on_punctuation_and_keeps_digits() {
        let toks: Vec<_> = tokenize("U.S.-based FBIS3-1, 1994!").collect();
        assert_eq!(toks, vec!["u", "s", "based", "fbis3", "1", "1994"]);
    }

    #[test]
    fn smart_list_is_bundled() {
        let stop = Stoplist::smart();
        assert_eq!(stop.len(), 570);
        assert!(stop.contains("the"));
        assert!(!stop.contains("crime"));
    }

    #[test]
    fn stoplist_file_comments() {
        let stop = Stoplist::parse("# header\nfoo\n  Bar # trailing\n\n");
        assert_eq!(stop.len(), 2);
        assert!(stop.contains("bar"));
    }

    #[test]
    fn stopping_happens_before_stemming() {
        // "having" is a SMART stopword; its stem "have" is also one, but
        // "haves" is not stopped and stems to "have".
        let stop = Stoplist::smart();
        assert!(analyze("having", &stop).is_empty());
        assert_eq!(analyze("haves", &stop), vec!["have"]);
    }
}
