//! TREC-style effectiveness evaluation: AP, MAP, GMAP, P@k, the paired
//! t-test over per-query AP, and per-query AP difference tables.
//!
//! Conventions follow trec_eval: a document is relevant when its grade is
//! at least 1, queries without relevant documents are left out of every
//! mean, and GMAP floors AP at 1e-5 before taking logs.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::str::FromStr;

use log::warn;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::lm::RankedList;
use crate::{Error, Result};

pub const GMAP_EPSILON: f64 = 1e-5;
pub const DEFAULT_CUTOFF: usize = 5;

/// Relevance judgments: query id -> doc id -> grade.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, i32>>,
}

impl Qrels {
    /// Parses `qid iter docid grade` lines.
    pub fn parse<R: BufRead>(reader: R) -> Result<Qrels> {
        let mut qrels = Qrels::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| Error::Line {
                line: i + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(bad(format!("expected 4 fields, found {}", fields.len())));
            }
            let grade: i32 = fields[3]
                .parse()
                .map_err(|_| bad(format!("bad relevance grade {:?}", fields[3])))?;
            if !qrels.insert(fields[0], fields[2], grade) {
                return Err(bad(format!(
                    "duplicate judgment for ({}, {})",
                    fields[0], fields[2]
                )));
            }
        }
        Ok(qrels)
    }

    /// Adds a judgment; false if the pair was already judged.
    pub fn insert(&mut self, query_id: &str, doc_id: &str, grade: i32) -> bool {
        self.judgments
            .entry(query_id.to_owned())
            .or_default()
            .insert(doc_id.to_owned(), grade)
            .is_none()
    }

    pub fn grade(&self, query_id: &str, doc_id: &str) -> Option<i32> {
        self.judgments.get(query_id)?.get(doc_id).copied()
    }

    pub fn is_relevant(&self, query_id: &str, doc_id: &str) -> bool {
        self.grade(query_id, doc_id).is_some_and(|g| g >= 1)
    }

    pub fn contains_query(&self, query_id: &str) -> bool {
        self.judgments.contains_key(query_id)
    }

    pub fn num_relevant(&self, query_id: &str) -> usize {
        self.judgments
            .get(query_id)
            .map_or(0, |docs| docs.values().filter(|&&g| g >= 1).count())
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.judgments.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }

    /// Writes the qrels back in TREC format.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for (qid, docs) in &self.judgments {
            for (doc, grade) in docs {
                writeln!(w, "{qid} 0 {doc} {grade}")?;
            }
        }
        Ok(())
    }
}

pub fn parse_qrels<R: BufRead>(reader: R) -> Result<Qrels> {
    Qrels::parse(reader)
}

/// Non-interpolated average precision, normalized by every relevant
/// document in the qrels. `None` when the query has no relevant documents.
pub fn average_precision(run: &RankedList, qrels: &Qrels, query_id: &str) -> Option<f64> {
    let total = qrels.num_relevant(query_id);
    if total == 0 {
        return None;
    }
    let mut found = 0usize;
    let mut sum = 0.0;
    for (i, doc) in run.doc_ids().enumerate() {
        if qrels.is_relevant(query_id, doc) {
            found += 1;
            sum += found as f64 / (i + 1) as f64;
        }
    }
    Some(sum / total as f64)
}

/// Relevant documents in the top `k`, divided by `k`.
pub fn precision_at(run: &RankedList, qrels: &Qrels, query_id: &str, k: usize) -> f64 {
    let hits = run
        .doc_ids()
        .take(k)
        .filter(|d| qrels.is_relevant(query_id, d))
        .count();
    hits as f64 / k as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryEval {
    pub ap: f64,
    pub p_at_k: f64,
    pub num_rel: usize,
    pub num_rel_ret: usize,
    pub num_ret: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub k: usize,
    pub per_query: BTreeMap<String, QueryEval>,
    pub map: f64,
    pub gmap: f64,
    pub p_at_k_mean: f64,
    /// Run queries whose qrels hold no relevant document.
    pub skipped_no_relevant: Vec<String>,
    /// Run queries absent from the qrels.
    pub unknown_queries: Vec<String>,
}

impl EvalReport {
    pub fn ap_by_query(&self) -> impl Iterator<Item = (&str, f64)> {
        self.per_query.iter().map(|(q, e)| (q.as_str(), e.ap))
    }

    /// Per-query rows as CSV: `query_id,ap,p_at_k,num_rel,num_rel_ret,num_ret`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row<'a> {
            query_id: &'a str,
            ap: f64,
            p_at_k: f64,
            num_rel: usize,
            num_rel_ret: usize,
            num_ret: usize,
        }
        let mut out = csv::Writer::from_writer(w);
        for (qid, e) in &self.per_query {
            out.serialize(Row {
                query_id: qid,
                ap: e.ap,
                p_at_k: e.p_at_k,
                num_rel: e.num_rel,
                num_rel_ret: e.num_rel_ret,
                num_ret: e.num_ret,
            })?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Evaluates every run query that has judgments with at least one
/// relevant document.
pub fn evaluate_run(
    runs: &BTreeMap<String, RankedList>,
    qrels: &Qrels,
    k: usize,
) -> Result<EvalReport> {
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            message: "must be at least 1".into(),
        });
    }
    let mut per_query = BTreeMap::new();
    let mut skipped = Vec::new();
    let mut unknown = Vec::new();
    for (qid, run) in runs {
        if !qrels.contains_query(qid) {
            unknown.push(qid.clone());
            continue;
        }
        let Some(ap) = average_precision(run, qrels, qid) else {
            skipped.push(qid.clone());
            continue;
        };
        per_query.insert(
            qid.clone(),
            QueryEval {
                ap,
                p_at_k: precision_at(run, qrels, qid, k),
                num_rel: qrels.num_relevant(qid),
                num_rel_ret: run.doc_ids().filter(|d| qrels.is_relevant(qid, d)).count(),
                num_ret: run.len(),
            },
        );
    }
    if !unknown.is_empty() {
        warn!(
            "{} run queries have no judgments and were ignored: {}",
            unknown.len(),
            unknown.join(" ")
        );
    }
    if per_query.is_empty() {
        return Err(Error::NoEvaluableQueries);
    }
    let n = per_query.len() as f64;
    let map = per_query.values().map(|e| e.ap).sum::<f64>() / n;
    let log_mean = per_query
        .values()
        .map(|e| e.ap.max(GMAP_EPSILON).ln())
        .sum::<f64>()
        / n;
    let p_at_k_mean = per_query.values().map(|e| e.p_at_k).sum::<f64>() / n;
    Ok(EvalReport {
        k,
        per_query,
        map,
        gmap: log_mean.exp(),
        p_at_k_mean,
        skipped_no_relevant: skipped,
        unknown_queries: unknown,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Alternative {
    #[default]
    TwoSided,
    /// Mean of `a - b` greater than zero.
    Greater,
    /// Mean of `a - b` less than zero.
    Less,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignificanceResult {
    pub n: usize,
    pub mean_difference: f64,
    pub t_statistic: f64,
    pub p_value: f64,
    pub significant_at_95: bool,
    /// All differences equal and non-zero; p is 0 by convention.
    pub zero_variance: bool,
}

impl FromStr for Alternative {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-sided" | "two_sided" => Ok(Alternative::TwoSided),
            "greater" => Ok(Alternative::Greater),
            "less" => Ok(Alternative::Less),
            other => Err(Error::InvalidParameter {
                name: "alternative",
                message: format!("expected two-sided, greater or less, got {other:?}"),
            }),
        }
    }
}

/// Two-sided paired t-test on `a[i] - b[i]`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<SignificanceResult> {
    paired_t_test_with(a, b, Alternative::TwoSided)
}

pub fn paired_t_test_with(
    a: &[f64],
    b: &[f64],
    alternative: Alternative,
) -> Result<SignificanceResult> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter {
            name: "samples",
            message: format!(
                "paired samples differ in length ({} vs {})",
                a.len(),
                b.len()
            ),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "samples",
            message: "need at least two pairs".into(),
        });
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;

    let result = |t: f64, p: f64, zero_variance| SignificanceResult {
        n,
        mean_difference: mean,
        t_statistic: t,
        p_value: p,
        significant_at_95: p < 0.05,
        zero_variance,
    };
    if var == 0.0 {
        if mean == 0.0 {
            return Ok(result(0.0, 1.0, false));
        }
        let t = mean.signum() * f64::INFINITY;
        let p = match alternative {
            Alternative::TwoSided => 0.0,
            Alternative::Greater => (mean < 0.0) as u8 as f64,
            Alternative::Less => (mean > 0.0) as u8 as f64,
        };
        return Ok(result(t, p, true));
    }
    let t = mean / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("degrees of freedom >= 1");
    let p = match alternative {
        Alternative::TwoSided => (2.0 * dist.sf(t.abs())).min(1.0),
        Alternative::Greater => dist.sf(t),
        Alternative::Less => dist.cdf(t),
    };
    Ok(result(t, p, false))
}

/// Aligns two reports on their common queries (ascending id) and returns
/// the paired AP vectors.
pub fn paired_ap(
    report_a: &EvalReport,
    report_b: &EvalReport,
) -> Result<(Vec<String>, Vec<f64>, Vec<f64>)> {
    let mut ids = Vec::new();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (qid, ea) in &report_a.per_query {
        if let Some(eb) = report_b.per_query.get(qid) {
            ids.push(qid.clone());
            a.push(ea.ap);
            b.push(eb.ap);
        }
    }
    if ids.is_empty() {
        return Err(Error::DisjointQuerySets);
    }
    Ok((ids, a, b))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApDifference {
    pub query_id: String,
    /// `ap_a - ap_b`; positive means the first run wins.
    pub difference: f64,
}

/// Per-query AP differences over the common queries, largest first.
pub fn ap_difference_table(
    report_a: &EvalReport,
    report_b: &EvalReport,
) -> Result<Vec<ApDifference>> {
    let (ids, a, b) = paired_ap(report_a, report_b)?;
    let mut rows: Vec<ApDifference> = ids
        .into_iter()
        .zip(a.iter().zip(&b))
        .map(|(query_id, (x, y))| ApDifference {
            query_id,
            difference: x - y,
        })
        .collect();
    rows.sort_by(|r, s| {
        s.difference
            .total_cmp(&r.difference)
            .then_with(|| r.query_id.cmp(&s.query_id))
    });
    Ok(rows)
}

pub fn write_ap_differences_csv<W: Write>(rows: &[ApDifference], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}
