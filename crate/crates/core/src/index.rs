//! Immutable inverted index with collection statistics.
//!
//! Besides postings the index keeps each document's analyzed token stream
//! (as term ids). Scoring never touches it; it backs the corpus dump for
//! embedding training and the feedback vocabulary of post-retrieval
//! expansion and RM3.
//!
//! # File format
//!
//! All integers little-endian, strings UTF-8 with a `u32` byte length.
//!
//! ```text
//! magic    b"EMBQEIDX"
//! version  u32 (= 1)
//! dim      u32 (reserved, 0)
//! section* tag [u8; 4], payload length u64, payload
//!   DOCS   u64 n, n x (string doc_id, u64 length)
//!   VOCB   u64 n, n x (string term, u64 df, u64 cf)
//!   POST   per term in VOCB order: u64 n, n x (u32 doc, u32 tf)
//!   TOKS   per document: u64 n, n x u32 term id
//! ```

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::textpipe::AnalyzedDocument;
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"EMBQEIDX";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermStats {
    /// Number of documents containing the term.
    pub df: u64,
    /// Total occurrences in the collection.
    pub cf: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct DocEntry {
    doc_id: String,
    length: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Index {
    terms: Vec<String>,
    term_ids: HashMap<String, u32>,
    stats: Vec<TermStats>,
    postings: Vec<Vec<Posting>>,
    docs: Vec<DocEntry>,
    token_offsets: Vec<usize>,
    tokens: Vec<u32>,
    total_tokens: u64,
}

impl Index {
    /// Builds the index. Document ordinals follow input order; term ids
    /// follow first occurrence.
    pub fn build(docs: &[AnalyzedDocument]) -> Result<Index> {
        let mut index = Index {
            terms: Vec::new(),
            term_ids: HashMap::new(),
            stats: Vec::new(),
            postings: Vec::new(),
            docs: Vec::with_capacity(docs.len()),
            token_offsets: vec![0],
            tokens: Vec::new(),
            total_tokens: 0,
        };
        let mut seen = HashMap::with_capacity(docs.len());
        let mut tf: HashMap<u32, u32> = HashMap::new();
        for (ord, doc) in docs.iter().enumerate() {
            if seen.insert(doc.doc_id.as_str(), ord).is_some() {
                return Err(Error::DuplicateDocId(doc.doc_id.clone()));
            }
            let ord = u32::try_from(ord).map_err(|_| Error::InvalidParameter {
                name: "docs",
                message: "more than u32::MAX documents".into(),
            })?;
            tf.clear();
            for token in &doc.tokens {
                let id = index.intern(token);
                index.tokens.push(id);
                *tf.entry(id).or_insert(0) += 1;
            }
            index.token_offsets.push(index.tokens.len());
            for (&id, &count) in &tf {
                let stats = &mut index.stats[id as usize];
                stats.df += 1;
                stats.cf += u64::from(count);
                index.postings[id as usize].push(Posting {
                    doc: ord,
                    tf: count,
                });
            }
            index.docs.push(DocEntry {
                doc_id: doc.doc_id.clone(),
                length: doc.tokens.len() as u64,
            });
            index.total_tokens += doc.tokens.len() as u64;
        }
        Ok(index)
    }

    fn intern(&mut self, term: &str) -> u32 {
        if let Some(&id) = self.term_ids.get(term) {
            return id;
        }
        let id = self.terms.len() as u32;
        self.terms.push(term.to_owned());
        self.term_ids.insert(term.to_owned(), id);
        self.stats.push(TermStats { df: 0, cf: 0 });
        self.postings.push(Vec::new());
        id
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn vocabulary_size(&self) -> usize {
        self.terms.len()
    }

    /// Terms in id order.
    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }

    pub fn term_id(&self, term: &str) -> Option<u32> {
        self.term_ids.get(term).copied()
    }

    pub fn term(&self, id: u32) -> &str {
        &self.terms[id as usize]
    }

    pub fn stats(&self, term: &str) -> Option<TermStats> {
        self.term_id(term).map(|id| self.stats[id as usize])
    }

    /// Postings sorted by document ordinal; empty for unknown terms.
    pub fn postings(&self, term: &str) -> &[Posting] {
        match self.term_id(term) {
            Some(id) => &self.postings[id as usize],
            None => &[],
        }
    }

    fn check(&self, ord: usize) -> Result<()> {
        if ord < self.docs.len() {
            Ok(())
        } else {
            Err(Error::InvalidOrdinal(ord))
        }
    }

    pub fn doc_id(&self, ord: usize) -> Result<&str> {
        self.check(ord)?;
        Ok(&self.docs[ord].doc_id)
    }

    pub fn doc_len(&self, ord: usize) -> Result<u64> {
        self.check(ord)?;
        Ok(self.docs[ord].length)
    }

    /// The document's analyzed tokens, in original order.
    pub fn doc_tokens(&self, ord: usize) -> Result<impl Iterator<Item = &str>> {
        self.check(ord)?;
        let ids = &self.tokens[self.token_offsets[ord]..self.token_offsets[ord + 1]];
        Ok(ids.iter().map(|&id| self.term(id)))
    }

    pub(crate) fn doc_term_ids(&self, ord: usize) -> &[u32] {
        &self.tokens[self.token_offsets[ord]..self.token_offsets[ord + 1]]
    }

    pub fn tf(&self, term: &str, ord: usize) -> Result<u32> {
        self.check(ord)?;
        let postings = self.postings(term);
        Ok(postings
            .binary_search_by_key(&(ord as u32), |p| p.doc)
            .map_or(0, |i| postings[i].tf))
    }

    /// Maximum-likelihood document model: tf / |d|, 0 when absent.
    pub fn p_ml(&self, term: &str, ord: usize) -> Result<f64> {
        let tf = self.tf(term, ord)?;
        let len = self.docs[ord].length;
        if tf == 0 || len == 0 {
            return Ok(0.0);
        }
        Ok(f64::from(tf) / len as f64)
    }

    /// Collection model: cf / total tokens, 0 for unknown terms.
    pub fn p_coll(&self, term: &str) -> Result<f64> {
        if self.total_tokens == 0 {
            return Err(Error::EmptyIndex);
        }
        Ok(self
            .stats(term)
            .map_or(0.0, |s| s.cf as f64 / self.total_tokens as f64))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Index> {
        Index::read_from(BufReader::new(File::open(path)?))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&0u32.to_le_bytes())?;

        let mut buf = Vec::new();
        put_u64(&mut buf, self.docs.len() as u64);
        for doc in &self.docs {
            put_str(&mut buf, &doc.doc_id);
            put_u64(&mut buf, doc.length);
        }
        write_section(&mut w, b"DOCS", &buf)?;

        buf.clear();
        put_u64(&mut buf, self.terms.len() as u64);
        for (term, stats) in self.terms.iter().zip(&self.stats) {
            put_str(&mut buf, term);
            put_u64(&mut buf, stats.df);
            put_u64(&mut buf, stats.cf);
        }
        write_section(&mut w, b"VOCB", &buf)?;

        buf.clear();
        for list in &self.postings {
            put_u64(&mut buf, list.len() as u64);
            for p in list {
                buf.extend_from_slice(&p.doc.to_le_bytes());
                buf.extend_from_slice(&p.tf.to_le_bytes());
            }
        }
        write_section(&mut w, b"POST", &buf)?;

        buf.clear();
        for ord in 0..self.docs.len() {
            let ids = self.doc_term_ids(ord);
            put_u64(&mut buf, ids.len() as u64);
            for id in ids {
                buf.extend_from_slice(&id.to_le_bytes());
            }
        }
        write_section(&mut w, b"TOKS", &buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Index> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let mut c = Cursor {
            buf: &bytes,
            pos: 0,
        };

        if c.take(8, "magic")? != MAGIC {
            return Err(format_error("magic", "not an embqe index file"));
        }
        let version = c.u32("version")?;
        if version != FORMAT_VERSION {
            return Err(format_error(
                "version",
                format!("found {version}, expected {FORMAT_VERSION}"),
            ));
        }
        c.u32("dim")?;

        let mut docs_sec = c.section(b"DOCS", "docs")?;
        let num_docs = docs_sec.len("docs.count", 12)?;
        let mut docs = Vec::with_capacity(num_docs);
        for _ in 0..num_docs {
            let doc_id = docs_sec.string("docs.doc_id")?;
            let length = docs_sec.u64("docs.length")?;
            docs.push(DocEntry { doc_id, length });
        }

        let mut vocab_sec = c.section(b"VOCB", "vocabulary")?;
        let num_terms = vocab_sec.len("vocabulary.count", 20)?;
        let mut terms = Vec::with_capacity(num_terms);
        let mut stats = Vec::with_capacity(num_terms);
        for _ in 0..num_terms {
            terms.push(vocab_sec.string("vocabulary.term")?);
            let df = vocab_sec.u64("vocabulary.df")?;
            let cf = vocab_sec.u64("vocabulary.cf")?;
            stats.push(TermStats { df, cf });
        }

        let mut post_sec = c.section(b"POST", "postings")?;
        let mut postings = Vec::with_capacity(num_terms);
        for _ in 0..num_terms {
            let n = post_sec.len("postings.count", 8)?;
            let mut list = Vec::with_capacity(n);
            for _ in 0..n {
                let doc = post_sec.u32("postings.doc")?;
                let tf = post_sec.u32("postings.tf")?;
                if doc as usize >= num_docs {
                    return Err(format_error(
                        "postings.doc",
                        format!("ordinal {doc} out of range"),
                    ));
                }
                list.push(Posting { doc, tf });
            }
            postings.push(list);
        }

        let mut toks_sec = c.section(b"TOKS", "tokens")?;
        let mut token_offsets = Vec::with_capacity(num_docs + 1);
        token_offsets.push(0);
        let mut tokens = Vec::new();
        for _ in 0..num_docs {
            let n = toks_sec.len("tokens.count", 4)?;
            for _ in 0..n {
                let id = toks_sec.u32("tokens.term")?;
                if id as usize >= num_terms {
                    return Err(format_error(
                        "tokens.term",
                        format!("term id {id} out of range"),
                    ));
                }
                tokens.push(id);
            }
            token_offsets.push(tokens.len());
        }

        let mut term_ids = HashMap::with_capacity(num_terms);
        for (i, t) in terms.iter().enumerate() {
            if term_ids.insert(t.clone(), i as u32).is_some() {
                return Err(format_error(
                    "vocabulary.term",
                    format!("duplicate term {t:?}"),
                ));
            }
        }
        let total_tokens = docs.iter().map(|d| d.length).sum();
        Ok(Index {
            terms,
            term_ids,
            stats,
            postings,
            docs,
            token_offsets,
            tokens,
            total_tokens,
        })
    }
}

fn format_error(field: &'static str, message: impl Into<String>) -> Error {
    Error::IndexFormat {
        field,
        message: message.into(),
    }
}

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_str(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
}

fn write_section<W: Write>(w: &mut W, tag: &[u8; 4], payload: &[u8]) -> Result<()> {
    w.write_all(tag)?;
    w.write_all(&(payload.len() as u64).to_le_bytes())?;
    w.write_all(payload)?;
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, field: &'static str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(format_error(field, "truncated file"));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self, field: &'static str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, field)?.try_into().unwrap()))
    }

    fn u64(&mut self, field: &'static str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, field)?.try_into().unwrap()))
    }

    /// A count prefix, sanity-checked against the bytes left so a corrupt
    /// count cannot trigger a huge allocation.
    fn len(&mut self, field: &'static str, min_item: usize) -> Result<usize> {
        let n = self.u64(field)?;
        let left = (self.buf.len() - self.pos) as u64;
        if n.saturating_mul(min_item as u64) > left {
            return Err(format_error(field, "truncated file"));
        }
        Ok(n as usize)
    }

    fn string(&mut self, field: &'static str) -> Result<String> {
        let n = self.u32(field)? as usize;
        let bytes = self.take(n, field)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| format_error(field, "invalid UTF-8"))
    }

    fn section(&mut self, tag: &[u8; 4], field: &'static str) -> Result<Cursor<'a>> {
        if self.take(4, field)? != tag {
            return Err(format_error(field, "unexpected section tag"));
        }
        let n = self.u64(field)?;
        if n > (self.buf.len() - self.pos) as u64 {
            return Err(format_error(field, "truncated file"));
        }
        Ok(Cursor {
            buf: self.take(n as usize, field)?,
            pos: 0,
        })
    }
}
