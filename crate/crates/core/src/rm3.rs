//! RM3 relevance-model feedback.
//!
//! RM1 estimates `P(w|R) ∝ Σ_D P(w|D) · Π_{q∈Q} P(q|D)` over the top
//! feedback documents, with JM-smoothed document models, normalized over
//! the union of the feedback documents' vocabularies. RM3 keeps the top
//! terms of RM1 and mixes them with the original query model.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::index::Index;
use crate::lm::{self, QueryModel};
use crate::{Error, Result};

pub const DEFAULT_MIX: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelevanceModel {
    weights: BTreeMap<String, f64>,
}

impl RelevanceModel {
    pub fn weight(&self, term: &str) -> f64 {
        self.weights.get(term).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(t, &w)| (t.as_str(), w))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Terms by descending weight, ties by ascending term.
    pub fn ranked(&self) -> Vec<(&str, f64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }
}

/// RM1 over the top `fb_docs` documents retrieved for `query_terms`.
///
/// The query likelihood of a feedback document is the product over query
/// term occurrences (repeats included) of its smoothed probability; query
/// terms unknown to the collection are left out of the product.
pub fn estimate_rm1<S: AsRef<str>>(
    index: &Index,
    query_terms: &[S],
    lambda: f64,
    fb_docs: usize,
) -> Result<RelevanceModel> {
    if fb_docs == 0 {
        return Err(Error::InvalidParameter {
            name: "fb_docs",
            message: "must be at least 1".into(),
        });
    }
    let qm = QueryModel::mle(query_terms)?;
    let mut docs: Vec<usize> = lm::top_documents(index, &qm, lambda, fb_docs)?
        .into_iter()
        .map(|(ord, _)| ord)
        .collect();
    if docs.is_empty() {
        let label: Vec<&str> = query_terms.iter().map(AsRef::as_ref).collect();
        return Err(Error::NoFeedbackDocuments(label.join(" ")));
    }
    docs.sort_unstable();
    relevance_model(index, query_terms, lambda, &docs)
}

/// RM1 over an explicit set of feedback documents (ordinals).
pub fn relevance_model<S: AsRef<str>>(
    index: &Index,
    query_terms: &[S],
    lambda: f64,
    docs: &[usize],
) -> Result<RelevanceModel> {
    lm::check_lambda(lambda)?;
    let mut docs = docs.to_vec();
    docs.sort_unstable();

    let p_coll = |id: u32| -> Result<f64> { index.p_coll(index.term(id)) };
    let smoothed = |tf: u32, len: u64, pc: f64| {
        let ml = if tf == 0 || len == 0 {
            0.0
        } else {
            f64::from(tf) / len as f64
        };
        (1.0 - lambda) * ml + lambda * pc
    };

    let mut tfs: Vec<HashMap<u32, u32>> = Vec::with_capacity(docs.len());
    let mut lens = Vec::with_capacity(docs.len());
    let mut vocab: Vec<u32> = Vec::new();
    for &ord in &docs {
        let mut tf = HashMap::new();
        for &id in index.doc_term_ids(ord) {
            *tf.entry(id).or_insert(0) += 1;
        }
        vocab.extend(tf.keys().copied());
        tfs.push(tf);
        lens.push(index.doc_len(ord)?);
    }
    vocab.sort_unstable_by(|a, b| index.term(*a).cmp(index.term(*b)));
    vocab.dedup();

    let mut log_ql = Vec::with_capacity(docs.len());
    for (tf, &len) in tfs.iter().zip(&lens) {
        let mut sum = 0.0;
        for q in query_terms {
            let Some(id) = index.term_id(q.as_ref()) else {
                continue;
            };
            sum += smoothed(tf.get(&id).copied().unwrap_or(0), len, p_coll(id)?).ln();
        }
        log_ql.push(sum);
    }
    let max = log_ql.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let doc_weights: Vec<f64> = log_ql.iter().map(|l| (l - max).exp()).collect();

    let mut weights = BTreeMap::new();
    let mut total = 0.0;
    for &id in &vocab {
        let pc = p_coll(id)?;
        let mut acc = 0.0;
        for ((tf, &len), &dw) in tfs.iter().zip(&lens).zip(&doc_weights) {
            acc += dw * smoothed(tf.get(&id).copied().unwrap_or(0), len, pc);
        }
        total += acc;
        weights.insert(index.term(id).to_owned(), acc);
    }
    for w in weights.values_mut() {
        *w /= total;
    }
    Ok(RelevanceModel { weights })
}

/// Truncates RM1 to its top `n_terms`, renormalizes, and mixes:
/// `mix * P(w|Q) + (1 - mix) * P_trunc(w|R)`.
pub fn rm3_expand(
    rm1: &RelevanceModel,
    qm: &QueryModel,
    n_terms: usize,
    mix: f64,
) -> Result<QueryModel> {
    if n_terms == 0 {
        return Err(Error::InvalidParameter {
            name: "n_terms",
            message: "must be at least 1".into(),
        });
    }
    if !(0.0..=1.0).contains(&mix) {
        return Err(Error::InvalidParameter {
            name: "mix",
            message: format!("{mix} not in [0, 1]"),
        });
    }
    if mix == 1.0 {
        return Ok(qm.clone());
    }
    let top: Vec<(&str, f64)> = rm1.ranked().into_iter().take(n_terms).collect();
    let top_total: f64 = top.iter().map(|(_, w)| w).sum();
    let mut weights: BTreeMap<String, f64> = BTreeMap::new();
    if top_total > 0.0 {
        for (t, w) in top {
            weights.insert(t.to_owned(), (1.0 - mix) * w / top_total);
        }
    }
    for (t, w) in qm.iter() {
        *weights.entry(t.to_owned()).or_insert(0.0) += mix * w;
    }
    QueryModel::normalized(weights)
}
