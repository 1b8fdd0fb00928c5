//! Query models and Jelinek-Mercer smoothed query-likelihood ranking.
//!
//! A document is scored against a weighted query model as
//!
//! ```text
//! score(d) = sum_w q(w) * ln((1 - lambda) * p_ml(w|d) + lambda * p(w|C))
//! ```
//!
//! with `lambda` the weight on the collection model. Terms the collection
//! has never seen contribute nothing.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::index::Index;
use crate::{Error, Result};

pub const DEFAULT_LAMBDA: f64 = 0.6;
pub const DEFAULT_DEPTH: usize = 1000;

/// A probability distribution over terms, iterated in term order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryModel {
    weights: BTreeMap<String, f64>,
}

impl QueryModel {
    /// Maximum-likelihood model: count(w) / |Q|.
    pub fn mle<S: AsRef<str>>(terms: &[S]) -> Result<QueryModel> {
        if terms.is_empty() {
            return Err(Error::EmptyQuery);
        }
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for t in terms {
            *counts.entry(t.as_ref().to_owned()).or_insert(0) += 1;
        }
        let n = terms.len() as f64;
        Ok(QueryModel {
            weights: counts.into_iter().map(|(t, c)| (t, c as f64 / n)).collect(),
        })
    }

    /// Wraps weights that already form a distribution: all positive,
    /// summing to 1 within 1e-9.
    pub fn from_weights(weights: impl IntoIterator<Item = (String, f64)>) -> Result<QueryModel> {
        let weights: BTreeMap<String, f64> = weights.into_iter().collect();
        if weights.is_empty() {
            return Err(Error::EmptyQuery);
        }
        if let Some((t, w)) = weights.iter().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidQueryModel(format!("weight of {t:?} is {w}")));
        }
        let sum: f64 = weights.values().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidQueryModel(format!("weights sum to {sum}")));
        }
        Ok(QueryModel { weights })
    }

    /// Drops non-positive weights and divides the rest by their sum.
    pub fn normalized(weights: impl IntoIterator<Item = (String, f64)>) -> Result<QueryModel> {
        let kept: Vec<(String, f64)> = weights
            .into_iter()
            .filter(|(_, w)| w.is_finite() && *w > 0.0)
            .collect();
        let sum: f64 = kept.iter().map(|(_, w)| w).sum();
        if kept.is_empty() || sum <= 0.0 {
            return Err(Error::EmptyQuery);
        }
        Ok(QueryModel {
            weights: kept.into_iter().map(|(t, w)| (t, w / sum)).collect(),
        })
    }

    pub fn weight(&self, term: &str) -> f64 {
        self.weights.get(term).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(t, &w)| (t.as_str(), w))
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.weights.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.values().sum()
    }
}

pub fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "lambda",
            message: format!("{lambda} not in (0, 1)"),
        })
    }
}

#[inline]
fn p_ml(tf: u32, len: u64) -> f64 {
    if tf == 0 || len == 0 {
        0.0
    } else {
        f64::from(tf) / len as f64
    }
}

#[inline]
fn log_smoothed(p_ml: f64, p_coll: f64, lambda: f64) -> f64 {
    ((1.0 - lambda) * p_ml + lambda * p_coll).ln()
}

/// JM-smoothed query log-likelihood of one document.
pub fn score_document(index: &Index, ord: usize, qm: &QueryModel, lambda: f64) -> Result<f64> {
    score_weighted(index, ord, qm.iter(), lambda)
}

/// [`score_document`] for arbitrary (not necessarily normalized) weights.
pub fn score_weighted<'a>(
    index: &Index,
    ord: usize,
    weights: impl IntoIterator<Item = (&'a str, f64)>,
    lambda: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    let len = index.doc_len(ord)?;
    let mut score = 0.0;
    for (term, w) in weights {
        let pc = if index.total_tokens() == 0 {
            0.0
        } else {
            index.p_coll(term)?
        };
        if pc == 0.0 {
            continue;
        }
        score += w * log_smoothed(p_ml(index.tf(term, ord)?, len), pc, lambda);
    }
    Ok(score)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredDoc {
    pub doc_id: String,
    pub score: f64,
}

/// One query's ranking: scores non-increasing, ties by ascending doc id.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RankedList {
    pub query_id: String,
    pub entries: Vec<ScoredDoc>,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.doc_id.as_str())
    }
}

/// Top `k` documents among those containing at least one query-model term.
pub fn retrieve(
    index: &Index,
    query_id: &str,
    qm: &QueryModel,
    lambda: f64,
    k: usize,
) -> Result<RankedList> {
    let top = top_documents(index, qm, lambda, k)?;
    let mut entries = Vec::with_capacity(top.len());
    for (ord, score) in top {
        entries.push(ScoredDoc {
            doc_id: index.doc_id(ord)?.to_owned(),
            score,
        });
    }
    Ok(RankedList {
        query_id: query_id.to_owned(),
        entries,
    })
}

/// [`retrieve`] returning `(document ordinal, score)` pairs in rank order.
pub fn top_documents(
    index: &Index,
    qm: &QueryModel,
    lambda: f64,
    k: usize,
) -> Result<Vec<(usize, f64)>> {
    check_lambda(lambda)?;
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            message: "must be at least 1".into(),
        });
    }
    if index.total_tokens() == 0 {
        return Ok(Vec::new());
    }

    // (weight, p_coll) per scored term, in query-model order; hits carry
    // the term's slot in that list.
    let mut terms = Vec::new();
    let mut hits: Vec<(u32, u32, u32)> = Vec::new();
    for (term, w) in qm.iter() {
        let pc = index.p_coll(term)?;
        if pc == 0.0 {
            continue;
        }
        let slot = terms.len() as u32;
        terms.push((w, pc));
        hits.extend(index.postings(term).iter().map(|p| (p.doc, slot, p.tf)));
    }
    if hits.is_empty() {
        return Ok(Vec::new());
    }
    hits.sort_unstable();

    let groups: Vec<&[(u32, u32, u32)]> = hits.chunk_by(|a, b| a.0 == b.0).collect();
    let mut scored: Vec<(f64, &str, usize)> = groups
        .par_iter()
        .map(|group| {
            let ord = group[0].0 as usize;
            let len = index.doc_len(ord).expect("posting ordinal in range");
            let mut tfs = group.iter().map(|&(_, slot, tf)| (slot, tf)).peekable();
            let mut score = 0.0;
            for (slot, &(w, pc)) in terms.iter().enumerate() {
                let tf = match tfs.peek() {
                    Some(&(s, tf)) if s as usize == slot => {
                        tfs.next();
                        tf
                    }
                    _ => 0,
                };
                score += w * log_smoothed(p_ml(tf, len), pc, lambda);
            }
            (
                score,
                index.doc_id(ord).expect("posting ordinal in range"),
                ord,
            )
        })
        .collect();

    let by_rank = |a: &(f64, &str, usize), b: &(f64, &str, usize)| {
        b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1))
    };
    if scored.len() > k {
        scored.select_nth_unstable_by(k - 1, by_rank);
        scored.truncate(k);
    }
    scored.sort_unstable_by(by_rank);
    Ok(scored
        .into_iter()
        .map(|(score, _, ord)| (ord, score))
        .collect())
}

/// Writes rankings as 6-column TREC run lines: `qid Q0 docid rank score tag`.
/// Scores use the shortest representation that round-trips.
pub fn write_run<W: Write>(mut w: W, lists: &[RankedList], tag: &str) -> Result<()> {
    for list in lists {
        for (i, e) in list.entries.iter().enumerate() {
            writeln!(
                w,
                "{} Q0 {} {} {} {}",
                list.query_id,
                e.doc_id,
                i + 1,
                e.score,
                tag
            )?;
        }
    }
    Ok(())
}

/// Reads a TREC run. Entries of each query are ordered by the rank column.
pub fn read_run<R: BufRead>(reader: R) -> Result<BTreeMap<String, RankedList>> {
    let mut rows: BTreeMap<String, Vec<(u64, ScoredDoc)>> = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |message: String| Error::Line {
            line: line_no,
            message,
        };
        if fields.len() != 6 {
            return Err(bad(format!("expected 6 fields, found {}", fields.len())));
        }
        let rank: u64 = fields[3]
            .parse()
            .map_err(|_| bad(format!("bad rank {:?}", fields[3])))?;
        let score: f64 = fields[4]
            .parse()
            .map_err(|_| bad(format!("bad score {:?}", fields[4])))?;
        rows.entry(fields[0].to_owned()).or_default().push((
            rank,
            ScoredDoc {
                doc_id: fields[2].to_owned(),
                score,
            },
        ));
    }
    let mut out = BTreeMap::new();
    for (qid, mut entries) in rows {
        entries.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.score.total_cmp(&a.1.score)));
        let mut seen = HashSet::new();
        for (_, e) in &entries {
            if !seen.insert(e.doc_id.as_str()) {
                return Err(Error::Line {
                    line: 0,
                    message: format!("query {qid}: document {} listed twice", e.doc_id),
                });
            }
        }
        out.insert(
            qid.clone(),
            RankedList {
                query_id: qid,
                entries: entries.into_iter().map(|(_, e)| e).collect(),
            },
        );
    }
    Ok(out)
}
