//! Dense term embeddings: word2vec text loading, cosine similarity, bigram
//! composition, exact kNN and the incremental (iteratively pruned) kNN.
//!
//! Vectors are L2-normalized on insertion, so cosine similarity between
//! stored terms is a plain dot product. Original norms are kept.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::io::{BufRead, Write};

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::{Error, Result};

/// Candidate lists at least this long are scanned in parallel shards.
const PARALLEL_SCAN_MIN: usize = 16_384;
const SHARD_LEN: usize = 4_096;

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// `v / |v|`; fails on zero (or non-finite) vectors.
pub fn normalize(v: &[f64]) -> Result<Vec<f64>> {
    let n = norm(v);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|x| x / n).collect())
}

/// dot(u, v) / (|u| |v|).
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(dot(u, v) / (nu * nv))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Neighbor {
    pub term: String,
    pub similarity: f64,
}

/// Neighbors of an anchor, most similar first; ties by ascending term.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct NeighborList {
    pub anchor: String,
    pub neighbors: Vec<Neighbor>,
}

impl NeighborList {
    pub fn with_anchor(mut self, anchor: impl Into<String>) -> Self {
        self.anchor = anchor.into();
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.neighbors.iter().map(|n| n.term.as_str())
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct EmbeddingStore {
    dim: usize,
    terms: Vec<String>,
    ids: HashMap<String, u32>,
    data: Vec<f64>,
    raw_norms: Vec<f64>,
    duplicates: usize,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Self {
        EmbeddingStore {
            dim,
            ..Default::default()
        }
    }

    /// Builds a store from in-memory vectors; duplicates keep the first.
    pub fn from_vectors<S, V>(dim: usize, vectors: impl IntoIterator<Item = (S, V)>) -> Result<Self>
    where
        S: Into<String>,
        V: AsRef<[f64]>,
    {
        let mut store = EmbeddingStore::new(dim);
        for (term, v) in vectors {
            store.insert(term, v.as_ref())?;
        }
        Ok(store)
    }

    /// Adds a vector, normalized. Returns false (and counts a duplicate)
    /// if the term is already present.
    pub fn insert(&mut self, term: impl Into<String>, vector: &[f64]) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        let term = term.into();
        if self.ids.contains_key(&term) {
            self.duplicates += 1;
            return Ok(false);
        }
        let raw = norm(vector);
        let unit = normalize(vector)?;
        self.ids.insert(term.clone(), self.terms.len() as u32);
        self.terms.push(term);
        self.data.extend_from_slice(&unit);
        self.raw_norms.push(raw);
        Ok(true)
    }

    /// Reads the word2vec text format: a `count dim` header, then one
    /// `term x1 .. xdim` line per term.
    pub fn load_vectors<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines.next().transpose()?.ok_or(Error::Line {
            line: 1,
            message: "missing header".into(),
        })?;
        let head: Vec<&str> = header.split_whitespace().collect();
        let parse_header = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Line {
                line: 1,
                message: format!("bad header {header:?}"),
            })
        };
        if head.len() != 2 {
            return Err(Error::Line {
                line: 1,
                message: format!("bad header {header:?}"),
            });
        }
        let declared = parse_header(head[0])?;
        let dim = parse_header(head[1])?;

        let mut store = EmbeddingStore::new(dim);
        let mut values = Vec::with_capacity(dim);
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line?;
            let mut fields = line.split_whitespace();
            let Some(term) = fields.next() else { continue };
            values.clear();
            for f in fields {
                values.push(f.parse::<f64>().map_err(|_| Error::Line {
                    line: line_no,
                    message: format!("bad value {f:?}"),
                })?);
            }
            match store.insert(term, &values) {
                Ok(_) => {}
                Err(Error::DimensionMismatch { expected, found }) => {
                    return Err(Error::Line {
                        line: line_no,
                        message: format!("expected {expected} values, found {found}"),
                    })
                }
                Err(Error::ZeroVector) => {
                    return Err(Error::Line {
                        line: line_no,
                        message: format!("zero vector for {term:?}"),
                    })
                }
                Err(e) => return Err(e),
            }
        }
        if store.duplicates > 0 {
            warn!(
                "{} duplicate terms in vector file; kept first occurrences",
                store.duplicates
            );
        }
        if store.len() + store.duplicates != declared {
            warn!(
                "vector file header declares {declared} terms, read {}",
                store.len() + store.duplicates
            );
        }
        Ok(store)
    }

    /// Writes the stored (unit) vectors in word2vec text format.
    pub fn write_vectors<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (i, term) in self.terms.iter().enumerate() {
            write!(w, "{term}")?;
            for x in self.row(i as u32) {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Duplicate terms skipped while loading.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.ids.contains_key(term)
    }

    fn row(&self, id: u32) -> &[f64] {
        let start = id as usize * self.dim;
        &self.data[start..start + self.dim]
    }

    /// Unit vector of a term.
    pub fn vector(&self, term: &str) -> Option<&[f64]> {
        self.ids.get(term).map(|&id| self.row(id))
    }

    pub fn raw_norm(&self, term: &str) -> Option<f64> {
        self.ids.get(term).map(|&id| self.raw_norms[id as usize])
    }

    fn require(&self, term: &str) -> Result<&[f64]> {
        self.vector(term)
            .ok_or_else(|| Error::MissingTerm(term.to_owned()))
    }

    /// Cosine of two vectors of this store's dimension.
    pub fn cosine(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        for x in [u, v] {
            if x.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: x.len(),
                });
            }
        }
        cosine(u, v)
    }

    /// Cosine between two stored terms.
    pub fn similarity(&self, a: &str, b: &str) -> Result<f64> {
        Ok(dot(self.require(a)?, self.require(b)?))
    }

    /// Normalized sum of two terms' unit vectors.
    pub fn compose_bigram(&self, t1: &str, t2: &str) -> Result<Vec<f64>> {
        let (a, b) = (self.require(t1)?, self.require(t2)?);
        let sum: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        normalize(&sum)
    }

    /// Exact top-`n` terms by cosine with `anchor` over
    /// `(domain ∩ vocabulary) \ exclude`, ties by ascending term.
    pub fn knn(
        &self,
        anchor: &[f64],
        n: usize,
        domain: Option<&HashSet<String>>,
        exclude: &HashSet<String>,
    ) -> Result<NeighborList> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                message: "must be at least 1".into(),
            });
        }
        let anchor = self.unit_anchor(anchor)?;
        let candidates: Vec<u32> = match domain {
            Some(domain) => {
                let mut ids: Vec<u32> = domain
                    .iter()
                    .filter(|t| !exclude.contains(*t))
                    .filter_map(|t| self.ids.get(t).copied())
                    .collect();
                ids.sort_unstable();
                ids
            }
            None => (0..self.terms.len() as u32)
                .filter(|&id| !exclude.contains(&self.terms[id as usize]))
                .collect(),
        };
        let top = self.top_n(&anchor, &candidates, n);
        Ok(NeighborList {
            anchor: String::new(),
            neighbors: top.into_iter().map(|c| self.neighbor(c)).collect(),
        })
    }

    /// kNN of a stored term, excluding the term itself.
    pub fn knn_term(
        &self,
        term: &str,
        n: usize,
        domain: Option<&HashSet<String>>,
    ) -> Result<NeighborList> {
        let anchor = self.require(term)?.to_vec();
        let exclude = HashSet::from([term.to_owned()]);
        Ok(self.knn(&anchor, n, domain, &exclude)?.with_anchor(term))
    }

    /// Incremental kNN with iterative pruning.
    ///
    /// Starts from the `n_initial` nearest neighbors of `anchor`. At
    /// iteration `i` (0-based) the entry at position `i` is the pivot: the
    /// entries after it are reordered by similarity to the pivot and the
    /// `prune_k` least similar of them are dropped. Pivots are never
    /// pruned. After `l` iterations the survivors (`n_initial - l *
    /// prune_k` of them) are returned ordered by similarity to `anchor`.
    pub fn incremental_nn(
        &self,
        anchor: &[f64],
        exclude: &HashSet<String>,
        n_initial: usize,
        prune_k: usize,
        l: usize,
    ) -> Result<NeighborList> {
        if l == 0 {
            return Err(Error::InvalidParameter {
                name: "l",
                message: "must be at least 1".into(),
            });
        }
        // Iteration l-1 needs a tail of at least prune_k behind l pivots.
        let required = if prune_k == 0 { 1 } else { l * (prune_k + 1) };
        if n_initial < required {
            return Err(Error::InvalidParameter {
                name: "n_initial",
                message: format!(
                    "{n_initial} cannot survive {l} prunings of {prune_k} (need {required})"
                ),
            });
        }
        let unit = self.unit_anchor(anchor)?;
        let initial = self.knn(&unit, n_initial, None, exclude)?;
        if initial.len() < required {
            return Err(Error::InvalidParameter {
                name: "n_initial",
                message: format!(
                    "only {} neighbors available, {l} prunings of {prune_k} need {required}",
                    initial.len()
                ),
            });
        }
        let mut list: Vec<u32> = initial.terms().map(|t| self.ids[t]).collect();

        for i in 0..l {
            if i >= list.len() {
                break;
            }
            let pivot = self.row(list[i]);
            let mut tail: Vec<Candidate> = list[i + 1..]
                .iter()
                .map(|&id| Candidate {
                    sim: dot(pivot, self.row(id)),
                    id,
                    term: &self.terms[id as usize],
                })
                .collect();
            tail.sort_unstable();
            tail.truncate(tail.len() - prune_k);
            list.truncate(i + 1);
            list.extend(tail.iter().map(|c| c.id));
        }

        let mut survivors: Vec<Candidate> = list
            .iter()
            .map(|&id| Candidate {
                sim: dot(&unit, self.row(id)),
                id,
                term: &self.terms[id as usize],
            })
            .collect();
        survivors.sort_unstable();
        Ok(NeighborList {
            anchor: String::new(),
            neighbors: survivors.into_iter().map(|c| self.neighbor(c)).collect(),
        })
    }

    fn unit_anchor(&self, anchor: &[f64]) -> Result<Vec<f64>> {
        if anchor.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: anchor.len(),
            });
        }
        normalize(anchor)
    }

    fn neighbor(&self, c: Candidate<'_>) -> Neighbor {
        Neighbor {
            term: c.term.to_owned(),
            similarity: c.sim.clamp(-1.0, 1.0),
        }
    }

    fn top_n<'s>(&'s self, anchor: &[f64], candidates: &[u32], n: usize) -> Vec<Candidate<'s>> {
        let scan = |ids: &[u32]| -> BinaryHeap<Candidate<'s>> {
            let mut heap = BinaryHeap::with_capacity(n + 1);
            for &id in ids {
                let c = Candidate {
                    sim: dot(anchor, self.row(id)),
                    id,
                    term: &self.terms[id as usize],
                };
                if heap.len() < n {
                    heap.push(c);
                } else if c < *heap.peek().expect("heap holds n >= 1 items") {
                    heap.pop();
                    heap.push(c);
                }
            }
            heap
        };
        let mut merged: Vec<Candidate<'s>> = if candidates.len() >= PARALLEL_SCAN_MIN {
            candidates
                .par_chunks(SHARD_LEN)
                .map(scan)
                .collect::<Vec<_>>()
                .into_iter()
                .flat_map(BinaryHeap::into_vec)
                .collect()
        } else {
            scan(candidates).into_vec()
        };
        merged.sort_unstable();
        merged.truncate(n);
        merged
    }
}

/// Orders by rank: higher similarity first, then ascending term. A max-heap
/// of candidates therefore has the worst-ranked one on top.
#[derive(Debug, Clone, Copy)]
struct Candidate<'a> {
    sim: f64,
    id: u32,
    term: &'a str,
}

impl Ord for Candidate<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .sim
            .total_cmp(&self.sim)
            .then_with(|| self.term.cmp(other.term))
    }
}

impl PartialOrd for Candidate<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Candidate<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate<'_> {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn load_small_file() {
        let input = "2 3\na 1 0 0\nb 0 2 0\n";
        let store = EmbeddingStore::load_vectors(input.as_bytes()).unwrap();
        assert_eq!(store.dim(), 3);
        assert_eq!(store.vector("a").unwrap(), &[1.0, 0.0, 0.0]);
        assert_eq!(store.vector("b").unwrap(), &[0.0, 1.0, 0.0]);
        assert_eq!(store.raw_norm("a"), Some(1.0));
        assert_eq!(store.raw_norm("b"), Some(2.0));
    }

    #[test]
    fn load_errors() {
        let short = "2 3\na 1 0 0\nb 0 2\n";
        assert!(matches!(
            EmbeddingStore::load_vectors(short.as_bytes()),
            Err(Error::Line { line: 3, .. })
        ));
        let zero = "1 2\nz 0 0\n";
        assert!(matches!(
            EmbeddingStore::load_vectors(zero.as_bytes()),
            Err(Error::Line { line: 2, .. })
        ));
        let empty = EmbeddingStore::load_vectors("0 200\n".as_bytes()).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.dim(), 200);
    }

    #[test]
    fn duplicates_keep_first() {
        let input = "3 2\na 1 0\na 0 1\nb 0 1\n";
        let store = EmbeddingStore::load_vectors(input.as_bytes()).unwrap();
        assert_eq!(store.len(), 2);
        assert_eq!(store.duplicates(), 1);
        assert_eq!(store.vector("a").unwrap(), &[1.0, 0.0]);
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[3.0, 4.0], &[3.0, 4.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(
            (cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs()
                < 1e-12
        );
        assert!(matches!(
            cosine(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn bigram_composition() {
        let store = EmbeddingStore::from_vectors(
            2,
            [("x", [1.0, 0.0]), ("y", [0.0, 1.0]), ("z", [-1.0, 0.0])],
        )
        .unwrap();
        let v = store.compose_bigram("x", "y").unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0] - h).abs() < 1e-15 && (v[1] - h).abs() < 1e-15);
        assert_eq!(store.compose_bigram("x", "x").unwrap(), vec![1.0, 0.0]);
        assert!(matches!(
            store.compose_bigram("x", "z"),
            Err(Error::ZeroVector)
        ));
        assert!(matches!(store.compose_bigram("x", "q"), Err(Error::MissingTerm(t)) if t == "q"));
    }

    #[test]
    fn knn_domain_and_exclude() {
        let store = EmbeddingStore::from_vectors(
            2,
            [("a", [1.0, 0.0]), ("b", [1.0, 1.0]), ("c", [0.0, 1.0])],
        )
        .unwrap();
        let domain = HashSet::from(["b".to_owned(), "missing".to_owned()]);
        let r = store
            .knn(&[1.0, 0.0], 5, Some(&domain), &HashSet::new())
            .unwrap();
        assert_eq!(r.terms().collect::<Vec<_>>(), vec!["b"]);
        assert!((r.neighbors[0].similarity - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);

        let r = store.knn(&[1.0, 0.0], 5, Some(&domain), &domain).unwrap();
        assert!(r.is_empty());

        let r = store.knn_term("a", 2, None).unwrap();
        assert_eq!(r.anchor, "a");
        assert_eq!(r.terms().collect::<Vec<_>>(), vec!["b", "c"]);
    }

    #[test]
    fn knn_ties_by_term() {
        let store = EmbeddingStore::from_vectors(
            2,
            [
                ("m", [1.0, 0.0]),
                ("b", [1.0, 0.0]),
                ("k", [2.0, 0.0]),
                ("z", [0.0, 1.0]),
            ],
        )
        .unwrap();
        let r = store.knn(&[1.0, 0.0], 2, None, &HashSet::new()).unwrap();
        assert_eq!(r.terms().collect::<Vec<_>>(), vec!["b", "k"]);
    }

    #[test]
    fn incremental_preconditions() {
        let store = EmbeddingStore::from_vectors(
            2,
            (0..10).map(|i| (format!("t{i}"), [1.0, i as f64 / 10.0])),
        )
        .unwrap();
        let none = HashSet::new();
        assert!(store.incremental_nn(&[1.0, 0.0], &none, 5, 1, 0).is_err());
        assert!(store.incremental_nn(&[1.0, 0.0], &none, 5, 2, 2).is_err());
        assert!(store.incremental_nn(&[1.0, 0.0], &none, 6, 2, 2).is_ok());
        // Only 10 terms in the store.
        assert!(store.incremental_nn(&[1.0, 0.0], &none, 12, 3, 3).is_err());
        let r = store.incremental_nn(&[1.0, 0.0], &none, 8, 1, 3).unwrap();
        assert_eq!(r.len(), 5);
    }
}
