//! Embedding-based query expansion.
//!
//! A query is first turned into an extended query term set: one unit per
//! query term with a vector, plus (optionally) one composed unit per
//! adjacent pair of query terms. Candidate expansion terms are the union of
//! the units' nearest neighbors, searched over
//!
//! * the whole embedding vocabulary (`pre`),
//! * the terms of the top feedback documents (`post`), or
//! * the whole vocabulary with the iteratively pruned neighbor list
//!   (`incremental`).
//!
//! Candidates are ranked by their mean cosine to the units; the top `K`
//! join the query terms, and the expanded model interpolates the
//! maximum-likelihood query model with the normalized similarities:
//!
//! ```text
//! P(w|Q_exp) = alpha * P(w|Q) + (1 - alpha) * Sim(w) / sum_{v in Q_exp} Sim(v)
//! ```

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::embed::{dot, EmbeddingStore};
use crate::index::Index;
use crate::lm::{self, QueryModel};
use crate::textpipe::Topic;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pre,
    Post,
    Incremental,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Pre => "pre",
            Method::Post => "post",
            Method::Incremental => "incremental",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pre" => Ok(Method::Pre),
            "post" => Ok(Method::Post),
            "incremental" => Ok(Method::Incremental),
            other => Err(Error::InvalidParameter {
                name: "method",
                message: format!("unknown expansion method {other:?}"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionConfig {
    pub method: Method,
    pub use_composition: bool,
    /// Number of expansion terms kept after the mean-similarity ranking.
    pub num_terms: usize,
    /// Weight on the original query model.
    pub alpha: f64,
    /// Feedback documents (post only).
    pub fb_docs: usize,
    /// Neighbors fetched per unit before the global re-rank; defaults to
    /// `num_terms`.
    pub neighbors_per_unit: Option<usize>,
    /// Initial neighbor list length (incremental only).
    pub n_initial: Option<usize>,
    /// Entries pruned per iteration (incremental only).
    pub prune_k: Option<usize>,
    /// Pruning iterations (incremental only).
    pub iterations: usize,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        ExpansionConfig {
            method: Method::Pre,
            use_composition: true,
            num_terms: 10,
            alpha: 0.6,
            fb_docs: 10,
            neighbors_per_unit: None,
            n_initial: None,
            prune_k: None,
            iterations: 5,
        }
    }
}

impl ExpansionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, message: &str| {
            Err(Error::InvalidParameter {
                name,
                message: message.into(),
            })
        };
        if self.num_terms == 0 {
            return bad("K", "must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha", "must lie in [0, 1]");
        }
        if self.method == Method::Post && self.fb_docs == 0 {
            return bad("fb_docs", "must be at least 1");
        }
        if self.neighbors_per_unit == Some(0) {
            return bad("neighbors_per_unit", "must be at least 1");
        }
        if self.method == Method::Incremental && self.iterations == 0 {
            return bad("l", "must be at least 1");
        }
        Ok(())
    }

    pub fn neighbors_per_unit(&self) -> usize {
        self.neighbors_per_unit.unwrap_or(self.num_terms)
    }

    /// Defaults to ceil(K / 5).
    pub fn prune_amount(&self) -> usize {
        self.prune_k.unwrap_or(self.num_terms.div_ceil(5))
    }

    /// Defaults to 10 K, raised if needed so that `l` prunings leave at
    /// least K terms.
    pub fn initial_list_len(&self) -> usize {
        let prune = self.prune_amount();
        let l = self.iterations;
        self.n_initial.unwrap_or_else(|| {
            (10 * self.num_terms)
                .max(l * prune + self.num_terms)
                .max(l * (prune + 1))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqtsUnit {
    pub label: String,
    pub vector: Vec<f64>,
    pub composed: bool,
}

/// Extended query term set: query-term units first, then bigram units.
#[derive(Debug, Clone, PartialEq)]
pub struct Eqts {
    pub query_id: String,
    /// The original (analyzed) query terms, covered or not.
    pub query_terms: Vec<String>,
    pub units: Vec<EqtsUnit>,
    /// Query terms without an embedding.
    pub uncovered: Vec<String>,
}

pub fn build_eqts(query: &Topic, store: &EmbeddingStore, use_composition: bool) -> Result<Eqts> {
    if query.title_terms.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let mut units = Vec::new();
    let mut uncovered = Vec::new();
    for term in &query.title_terms {
        match store.vector(term) {
            Some(v) => units.push(EqtsUnit {
                label: term.clone(),
                vector: v.to_vec(),
                composed: false,
            }),
            None => uncovered.push(term.clone()),
        }
    }
    if use_composition {
        for pair in query.title_terms.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if !(store.contains(a) && store.contains(b)) {
                continue;
            }
            match store.compose_bigram(a, b) {
                Ok(vector) => units.push(EqtsUnit {
                    label: format!("{a}+{b}"),
                    vector,
                    composed: true,
                }),
                Err(Error::ZeroVector) => {
                    warn!(
                        "query {}: <{a}, {b}> composes to a zero vector, skipped",
                        query.query_id
                    )
                }
                Err(e) => return Err(e),
            }
        }
    }
    if units.is_empty() {
        return Err(Error::UncoveredQuery(query.query_id.clone()));
    }
    Ok(Eqts {
        query_id: query.query_id.clone(),
        query_terms: query.title_terms.clone(),
        units,
        uncovered,
    })
}

/// Union of per-unit neighbor lists, query terms excluded.
pub fn generate_candidates(
    eqts: &Eqts,
    store: &EmbeddingStore,
    cfg: &ExpansionConfig,
    prf_terms: Option<&HashSet<String>>,
) -> Result<BTreeSet<String>> {
    cfg.validate()?;
    let exclude: HashSet<String> = eqts.query_terms.iter().cloned().collect();
    let n = cfg.neighbors_per_unit();
    let mut candidates = BTreeSet::new();
    for unit in &eqts.units {
        let neighbors = match cfg.method {
            Method::Pre => store.knn(&unit.vector, n, None, &exclude)?,
            Method::Post => {
                let domain = prf_terms.ok_or(Error::InvalidParameter {
                    name: "prf_terms",
                    message: "post-retrieval expansion needs feedback terms".into(),
                })?;
                store.knn(&unit.vector, n, Some(domain), &exclude)?
            }
            Method::Incremental => {
                let mut list = store.incremental_nn(
                    &unit.vector,
                    &exclude,
                    cfg.initial_list_len(),
                    cfg.prune_amount(),
                    cfg.iterations,
                )?;
                list.neighbors.truncate(n);
                list
            }
        };
        candidates.extend(neighbors.neighbors.into_iter().map(|nb| nb.term));
    }
    if candidates.is_empty() {
        return Err(Error::NoCandidates(eqts.query_id.clone()));
    }
    Ok(candidates)
}

/// Mean cosine between a term and every unit of the EQTS.
pub fn mean_similarity(term: &str, eqts: &Eqts, store: &EmbeddingStore) -> Result<f64> {
    let v = store
        .vector(term)
        .ok_or_else(|| Error::MissingTerm(term.to_owned()))?;
    Ok(mean_cosine(v, eqts))
}

fn mean_cosine(unit_vector: &[f64], eqts: &Eqts) -> f64 {
    let sum: f64 = eqts.units.iter().map(|u| dot(unit_vector, &u.vector)).sum();
    sum / eqts.units.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateScore {
    pub term: String,
    pub sim: f64,
}

/// Candidates by descending mean similarity, ties by ascending term.
pub fn rank_candidates(
    candidates: &BTreeSet<String>,
    eqts: &Eqts,
    store: &EmbeddingStore,
) -> Result<Vec<CandidateScore>> {
    let mut scored = candidates
        .iter()
        .map(|t| {
            Ok(CandidateScore {
                term: t.clone(),
                sim: mean_similarity(t, eqts, store)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| b.sim.total_cmp(&a.sim).then_with(|| a.term.cmp(&b.term)));
    Ok(scored)
}

/// Interpolates the MLE query model with similarity scores over
/// `Q_exp = keys(sims) ∪ terms(mle)`. Negative similarities count as zero;
/// terms missing from `sims` have similarity zero. Returns `None` when the
/// similarities sum to zero.
pub fn interpolate(
    mle: &QueryModel,
    sims: &BTreeMap<String, f64>,
    alpha: f64,
) -> Result<Option<QueryModel>> {
    if alpha == 1.0 {
        return Ok(Some(mle.clone()));
    }
    let clamped = |s: f64| s.max(0.0);
    let total: f64 = sims.values().map(|&s| clamped(s)).sum();
    if total <= 0.0 {
        return Ok(None);
    }
    let mut weights: BTreeMap<String, f64> = sims
        .iter()
        .map(|(t, &s)| (t.clone(), (1.0 - alpha) * clamped(s) / total))
        .collect();
    for (t, p) in mle.iter() {
        *weights.entry(t.to_owned()).or_insert(0.0) += alpha * p;
    }
    QueryModel::normalized(weights).map(Some)
}

/// An expanded query with the provenance needed to audit or re-score it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedQuery {
    pub query_id: String,
    pub method: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub model: QueryModel,
    /// Selected expansion terms with their mean similarity.
    pub expansion_terms: Vec<CandidateScore>,
    /// Set when the unexpanded model was used instead.
    pub fallback: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct WeightedTerm {
    term: String,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct ExpandedQueryRecord {
    query_id: String,
    method: String,
    params: BTreeMap<String, serde_json::Value>,
    terms: Vec<WeightedTerm>,
}

impl ExpandedQuery {
    pub fn unexpanded(query: &Topic, method: &str, reason: Option<String>) -> Result<Self> {
        Ok(ExpandedQuery {
            query_id: query.query_id.clone(),
            method: method.to_owned(),
            params: BTreeMap::new(),
            model: QueryModel::mle(&query.title_terms)?,
            expansion_terms: Vec::new(),
            fallback: reason,
        })
    }

    /// One JSONL record: `{query_id, method, params, terms: [{term, weight}]}`.
    pub fn to_json_line(&self) -> Result<String> {
        let record = ExpandedQueryRecord {
            query_id: self.query_id.clone(),
            method: self.method.clone(),
            params: self.params.clone(),
            terms: self
                .model
                .iter()
                .map(|(t, w)| WeightedTerm {
                    term: t.to_owned(),
                    weight: w,
                })
                .collect(),
        };
        Ok(serde_json::to_string(&record)?)
    }

    /// Reads back a record written by [`to_json_line`](Self::to_json_line).
    pub fn from_json_line(line: &str) -> Result<Self> {
        let record: ExpandedQueryRecord = serde_json::from_str(line)?;
        let model = QueryModel::from_weights(record.terms.into_iter().map(|t| (t.term, t.weight)))?;
        Ok(ExpandedQuery {
            query_id: record.query_id,
            method: record.method,
            params: record.params,
            model,
            expansion_terms: Vec::new(),
            fallback: None,
        })
    }
}

fn params_of(cfg: &ExpansionConfig) -> BTreeMap<String, serde_json::Value> {
    use serde_json::json;
    let mut p = BTreeMap::new();
    p.insert("K".into(), json!(cfg.num_terms));
    p.insert("alpha".into(), json!(cfg.alpha));
    p.insert("composition".into(), json!(cfg.use_composition));
    p.insert("neighbors_per_unit".into(), json!(cfg.neighbors_per_unit()));
    match cfg.method {
        Method::Pre => {}
        Method::Post => {
            p.insert("fb_docs".into(), json!(cfg.fb_docs));
        }
        Method::Incremental => {
            p.insert("n_initial".into(), json!(cfg.initial_list_len()));
            p.insert("prune_k".into(), json!(cfg.prune_amount()));
            p.insert("l".into(), json!(cfg.iterations));
        }
    }
    p
}

/// Terms of the top `fb_docs` documents for an unexpanded model.
pub fn feedback_terms(
    index: &Index,
    qm: &QueryModel,
    lambda: f64,
    fb_docs: usize,
) -> Result<HashSet<String>> {
    let top = lm::top_documents(index, qm, lambda, fb_docs)?;
    let mut terms = HashSet::new();
    for (ord, _) in top {
        terms.extend(index.doc_tokens(ord)?.map(str::to_owned));
    }
    Ok(terms)
}

/// Full expansion of one query. For the post method an initial retrieval
/// with the unexpanded model supplies the feedback vocabulary.
pub fn expand(
    query: &Topic,
    index: &Index,
    store: &EmbeddingStore,
    cfg: &ExpansionConfig,
    lambda: f64,
) -> Result<ExpandedQuery> {
    cfg.validate()?;
    let prf = if cfg.method == Method::Post && cfg.alpha < 1.0 {
        let mle = QueryModel::mle(&query.title_terms)?;
        Some(feedback_terms(index, &mle, lambda, cfg.fb_docs)?)
    } else {
        None
    };
    expand_with_feedback(query, store, cfg, prf.as_ref())
}

/// Expansion with an explicit feedback vocabulary (required by the post
/// method, ignored otherwise).
pub fn expand_with_feedback(
    query: &Topic,
    store: &EmbeddingStore,
    cfg: &ExpansionConfig,
    prf_terms: Option<&HashSet<String>>,
) -> Result<ExpandedQuery> {
    cfg.validate()?;
    let mle = QueryModel::mle(&query.title_terms)?;
    let mut out = ExpandedQuery {
        query_id: query.query_id.clone(),
        method: cfg.method.to_string(),
        params: params_of(cfg),
        model: mle.clone(),
        expansion_terms: Vec::new(),
        fallback: None,
    };
    if cfg.alpha == 1.0 {
        return Ok(out);
    }

    let eqts = build_eqts(query, store, cfg.use_composition)?;
    let candidates = generate_candidates(&eqts, store, cfg, prf_terms)?;
    let mut ranked = rank_candidates(&candidates, &eqts, store)?;
    ranked.truncate(cfg.num_terms);

    let mut sims: BTreeMap<String, f64> = ranked.iter().map(|c| (c.term.clone(), c.sim)).collect();
    for term in mle.terms() {
        if let Some(v) = store.vector(term) {
            sims.insert(term.to_owned(), mean_cosine(v, &eqts));
        }
    }
    match interpolate(&mle, &sims, cfg.alpha)? {
        Some(model) => {
            out.model = model;
            out.expansion_terms = ranked;
        }
        None => {
            warn!(
                "query {}: expansion similarities sum to zero, using the unexpanded model",
                query.query_id
            );
            out.fallback = Some("zero similarity mass".into());
        }
    }
    Ok(out)
}
