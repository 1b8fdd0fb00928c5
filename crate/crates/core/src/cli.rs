//! Experiment driver behind the `embqe` binary.
//!
//! Every subcommand is a plain function here so it can be scripted or
//! tested without spawning a process.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::embed::EmbeddingStore;
use crate::eval::{self, Alternative, ApDifference, EvalReport, Qrels, SignificanceResult};
use crate::index::Index;
use crate::lm::{self, QueryModel, RankedList};
use crate::qe::{self, ExpandedQuery, ExpansionConfig, Method};
use crate::rm3;
use crate::textpipe::{self, Analyzer, Stoplist, Topic};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMethod {
    /// Unexpanded query likelihood.
    #[default]
    None,
    Pre,
    Post,
    Incremental,
    Rm3,
}

impl SearchMethod {
    fn expansion(self) -> Option<Method> {
        match self {
            SearchMethod::Pre => Some(Method::Pre),
            SearchMethod::Post => Some(Method::Post),
            SearchMethod::Incremental => Some(Method::Incremental),
            SearchMethod::None | SearchMethod::Rm3 => None,
        }
    }
}

impl fmt::Display for SearchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchMethod::None => f.write_str("none"),
            SearchMethod::Rm3 => f.write_str("rm3"),
            m => m.expansion().expect("expansion method").fmt(f),
        }
    }
}

impl FromStr for SearchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "baseline" => Ok(SearchMethod::None),
            "rm3" => Ok(SearchMethod::Rm3),
            other => Ok(match other.parse::<Method>()? {
                Method::Pre => SearchMethod::Pre,
                Method::Post => SearchMethod::Post,
                Method::Incremental => SearchMethod::Incremental,
            }),
        }
    }
}

/// Everything a search run needs. Settable from a `key = value` file and
/// from individual overrides through [`set`](Self::set).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub index: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub run: Option<PathBuf>,
    /// Stoplist file; the SMART list when unset.
    pub stoplist: Option<PathBuf>,
    /// Where to write the expanded query models as JSONL.
    pub expansions: Option<PathBuf>,
    pub method: SearchMethod,
    pub lambda: f64,
    /// Expansion terms (RM3: terms kept from the relevance model).
    pub num_terms: usize,
    pub alpha: f64,
    pub fb_docs: usize,
    pub use_composition: bool,
    pub neighbors_per_unit: Option<usize>,
    pub n_initial: Option<usize>,
    pub prune_k: Option<usize>,
    pub iterations: usize,
    /// Retrieval depth.
    pub depth: usize,
    pub run_tag: String,
    /// RM3 weight on the original query.
    pub rm3_mix: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let qe = ExpansionConfig::default();
        ExperimentConfig {
            index: None,
            vectors: None,
            topics: None,
            qrels: None,
            run: None,
            stoplist: None,
            expansions: None,
            method: SearchMethod::None,
            lambda: lm::DEFAULT_LAMBDA,
            num_terms: qe.num_terms,
            alpha: qe.alpha,
            fb_docs: qe.fb_docs,
            use_composition: qe.use_composition,
            neighbors_per_unit: None,
            n_initial: None,
            prune_k: None,
            iterations: qe.iterations,
            depth: lm::DEFAULT_DEPTH,
            run_tag: "embqe".into(),
            rm3_mix: rm3::DEFAULT_MIX,
        }
    }
}

fn parse_value<T: FromStr>(name: &'static str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::InvalidParameter {
        name,
        message: format!("cannot parse {value:?}"),
    })
}

fn parse_bool(name: &'static str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::InvalidParameter {
            name,
            message: format!("expected a boolean, got {value:?}"),
        }),
    }
}

/// `auto` (or empty) clears an optional setting.
fn parse_optional(name: &'static str, value: &str) -> Result<Option<usize>> {
    match value {
        "" | "auto" | "default" => Ok(None),
        v => parse_value(name, v).map(Some),
    }
}

impl ExperimentConfig {
    /// Key names accepted by [`set`](Self::set).
    pub const KEYS: &'static [&'static str] = &[
        "index",
        "vectors",
        "topics",
        "qrels",
        "run",
        "stoplist",
        "expansions",
        "method",
        "lambda",
        "K",
        "alpha",
        "fb_docs",
        "composition",
        "n_per_unit",
        "n_initial",
        "prune_k",
        "l",
        "depth",
        "tag",
        "mix",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let path = || Some(PathBuf::from(value));
        match key.trim() {
            "index" => self.index = path(),
            "vectors" => self.vectors = path(),
            "topics" => self.topics = path(),
            "qrels" => self.qrels = path(),
            "run" => self.run = path(),
            "stoplist" => self.stoplist = path(),
            "expansions" => self.expansions = path(),
            "method" => self.method = value.parse()?,
            "lambda" => self.lambda = parse_value("lambda", value)?,
            "K" | "k_terms" | "terms" => self.num_terms = parse_value("K", value)?,
            "alpha" => self.alpha = parse_value("alpha", value)?,
            "fb_docs" => self.fb_docs = parse_value("fb_docs", value)?,
            "composition" => self.use_composition = parse_bool("composition", value)?,
            "n_per_unit" => self.neighbors_per_unit = parse_optional("n_per_unit", value)?,
            "n_initial" => self.n_initial = parse_optional("n_initial", value)?,
            "prune_k" => self.prune_k = parse_optional("prune_k", value)?,
            "l" => self.iterations = parse_value("l", value)?,
            "depth" | "k_retrieve" => self.depth = parse_value("depth", value)?,
            "tag" => self.run_tag = value.to_owned(),
            "mix" => self.rm3_mix = parse_value("mix", value)?,
            other => {
                return Err(Error::InvalidParameter {
                    name: "config",
                    message: format!(
                        "unknown key {other:?}; known keys: {}",
                        Self::KEYS.join(", ")
                    ),
                })
            }
        }
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Line {
                line: i + 1,
                message: format!("expected key = value, got {line:?}"),
            })?;
            self.set(key, value).map_err(|e| Error::Line {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(&fs::read_to_string(path)?)?;
        Ok(cfg)
    }

    pub fn expansion_config(&self) -> Option<ExpansionConfig> {
        Some(ExpansionConfig {
            method: self.method.expansion()?,
            use_composition: self.use_composition,
            num_terms: self.num_terms,
            alpha: self.alpha,
            fb_docs: self.fb_docs,
            neighbors_per_unit: self.neighbors_per_unit,
            n_initial: self.n_initial,
            prune_k: self.prune_k,
            iterations: self.iterations,
        })
    }

    pub fn validate(&self) -> Result<()> {
        lm::check_lambda(self.lambda)?;
        if self.depth == 0 {
            return Err(Error::InvalidParameter {
                name: "depth",
                message: "must be at least 1".into(),
            });
        }
        if let Some(qe) = self.expansion_config() {
            qe.validate()?;
        }
        if self.method == SearchMethod::Rm3 {
            if self.num_terms == 0 || self.fb_docs == 0 {
                return Err(Error::InvalidParameter {
                    name: "K",
                    message: "RM3 needs K >= 1 and fb_docs >= 1".into(),
                });
            }
            if !(0.0..=1.0).contains(&self.rm3_mix) {
                return Err(Error::InvalidParameter {
                    name: "mix",
                    message: "must lie in [0, 1]".into(),
                });
            }
        }
        Ok(())
    }

    pub fn analyzer(&self) -> Result<Analyzer> {
        load_analyzer(self.stoplist.as_deref())
    }

    fn require<'a>(&self, path: &'a Option<PathBuf>, name: &'static str) -> Result<&'a Path> {
        path.as_deref().ok_or_else(|| Error::InvalidParameter {
            name,
            message: "path not set".into(),
        })
    }
}

pub fn load_analyzer(stoplist: Option<&Path>) -> Result<Analyzer> {
    Ok(match stoplist {
        Some(p) => Analyzer::new(Stoplist::from_reader(File::open(p)?)?),
        None => Analyzer::default(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexSummary {
    pub num_docs: usize,
    pub total_tokens: u64,
    pub vocabulary_size: usize,
}

impl fmt::Display for IndexSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} docs, {} tokens, {} terms",
            self.num_docs, self.total_tokens, self.vocabulary_size
        )
    }
}

impl IndexSummary {
    pub fn of(index: &Index) -> Self {
        IndexSummary {
            num_docs: index.num_docs(),
            total_tokens: index.total_tokens(),
            vocabulary_size: index.vocabulary_size(),
        }
    }
}

/// Analyzes a TREC/JSONL corpus and writes the binary index.
pub fn build_index(corpus: &Path, out: &Path, analyzer: &Analyzer) -> Result<IndexSummary> {
    let raw = textpipe::parse_trec_docs(BufReader::new(File::open(corpus)?))?;
    let analyzed: Vec<_> = raw
        .par_iter()
        .map(|d| analyzer.analyze_document(d))
        .collect();
    let index = Index::build(&analyzed)?;
    index.save(out)?;
    let summary = IndexSummary::of(&index);
    info!("indexed {}: {summary}", corpus.display());
    Ok(summary)
}

/// Writes the analyzed corpus one document per line, tokens separated by a
/// single space, ready for an external embedding trainer.
pub fn dump_corpus(index: &Index, out: impl Write) -> Result<usize> {
    let mut out = BufWriter::new(out);
    for ord in 0..index.num_docs() {
        let mut first = true;
        for tok in index.doc_tokens(ord)? {
            if !first {
                out.write_all(b" ")?;
            }
            out.write_all(tok.as_bytes())?;
            first = false;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(index.num_docs())
}

pub fn read_topics(path: &Path, analyzer: &Analyzer) -> Result<Vec<Topic>> {
    textpipe::parse_topics(BufReader::new(File::open(path)?), analyzer)
}

pub fn read_qrels(path: &Path) -> Result<Qrels> {
    Qrels::parse(BufReader::new(File::open(path)?))
}

pub fn read_run_file(path: &Path) -> Result<BTreeMap<String, RankedList>> {
    lm::read_run(BufReader::new(File::open(path)?))
}

pub fn load_vectors(path: &Path) -> Result<EmbeddingStore> {
    let store = EmbeddingStore::load_vectors(BufReader::new(File::open(path)?))?;
    info!(
        "loaded {} vectors of dimension {} from {}",
        store.len(),
        store.dim(),
        path.display()
    );
    Ok(store)
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// One ranking per topic, in topic order.
    pub runs: Vec<RankedList>,
    /// The query model each ranking was produced with.
    pub queries: Vec<ExpandedQuery>,
}

impl SearchOutcome {
    pub fn fallbacks(&self) -> usize {
        self.queries.iter().filter(|q| q.fallback.is_some()).count()
    }

    pub fn run_map(&self) -> BTreeMap<String, RankedList> {
        self.runs
            .iter()
            .map(|r| (r.query_id.clone(), r.clone()))
            .collect()
    }
}

fn rm3_query(topic: &Topic, index: &Index, cfg: &ExperimentConfig) -> Result<ExpandedQuery> {
    let mle = QueryModel::mle(&topic.title_terms)?;
    let rm1 = rm3::estimate_rm1(index, &topic.title_terms, cfg.lambda, cfg.fb_docs)?;
    let model = rm3::rm3_expand(&rm1, &mle, cfg.num_terms, cfg.rm3_mix)?;
    let mut params = BTreeMap::new();
    params.insert("K".into(), serde_json::json!(cfg.num_terms));
    params.insert("fb_docs".into(), serde_json::json!(cfg.fb_docs));
    params.insert("mix".into(), serde_json::json!(cfg.rm3_mix));
    Ok(ExpandedQuery {
        query_id: topic.query_id.clone(),
        method: "rm3".into(),
        params,
        model,
        expansion_terms: Vec::new(),
        fallback: None,
    })
}

/// The query model for one topic. Expansion failures specific to the
/// query (nothing embedded, no neighbors, no feedback documents) fall back
/// to the unexpanded model with a warning.
pub fn query_model(
    topic: &Topic,
    index: &Index,
    store: Option<&EmbeddingStore>,
    cfg: &ExperimentConfig,
) -> Result<ExpandedQuery> {
    let method = cfg.method.to_string();
    let attempt = match (cfg.method, cfg.expansion_config()) {
        (SearchMethod::None, _) => return ExpandedQuery::unexpanded(topic, &method, None),
        (SearchMethod::Rm3, _) => rm3_query(topic, index, cfg),
        (_, Some(qe_cfg)) => {
            let store = store.ok_or_else(|| Error::InvalidParameter {
                name: "vectors",
                message: format!("method {method} needs word vectors"),
            })?;
            qe::expand(topic, index, store, &qe_cfg, cfg.lambda)
        }
        (_, None) => unreachable!("every expansion method maps to a config"),
    };
    match attempt {
        Ok(q) => Ok(q),
        Err(
            e @ (Error::UncoveredQuery(_)
            | Error::NoCandidates(_)
            | Error::NoFeedbackDocuments(_)
            | Error::MissingTerm(_)
            | Error::InvalidParameter {
                name: "n_initial", ..
            }),
        ) => {
            warn!("query {}: {e}; using the unexpanded query", topic.query_id);
            ExpandedQuery::unexpanded(topic, &method, Some(e.to_string()))
        }
        Err(e) => Err(e),
    }
}

/// Runs every topic against an in-memory index. Queries are processed in
/// parallel; the output keeps topic order.
pub fn run_search(
    cfg: &ExperimentConfig,
    index: &Index,
    store: Option<&EmbeddingStore>,
    topics: &[Topic],
) -> Result<SearchOutcome> {
    cfg.validate()?;
    let results: Vec<(RankedList, ExpandedQuery)> = topics
        .par_iter()
        .map(|topic| {
            let q = query_model(topic, index, store, cfg)?;
            let run = lm::retrieve(index, &topic.query_id, &q.model, cfg.lambda, cfg.depth)?;
            Ok((run, q))
        })
        .collect::<Result<_>>()?;
    let (runs, queries) = results.into_iter().unzip();
    let outcome = SearchOutcome { runs, queries };
    if outcome.fallbacks() > 0 {
        warn!(
            "{} of {} queries ran unexpanded",
            outcome.fallbacks(),
            topics.len()
        );
    }
    Ok(outcome)
}

/// Loads the inputs named in `cfg`, searches, and writes the run file (and
/// the expansions file when configured).
pub fn search(cfg: &ExperimentConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    let index = Index::load(cfg.require(&cfg.index, "index")?)?;
    let analyzer = cfg.analyzer()?;
    let topics = read_topics(cfg.require(&cfg.topics, "topics")?, &analyzer)?;
    let store = match (&cfg.vectors, cfg.method.expansion()) {
        (Some(p), Some(_)) => Some(load_vectors(p)?),
        (None, Some(_)) => {
            return Err(Error::InvalidParameter {
                name: "vectors",
                message: format!("method {} needs word vectors", cfg.method),
            })
        }
        _ => None,
    };
    let outcome = run_search(cfg, &index, store.as_ref(), &topics)?;
    let run_path = cfg.require(&cfg.run, "run")?;
    let mut w = BufWriter::new(File::create(run_path)?);
    lm::write_run(&mut w, &outcome.runs, &cfg.run_tag)?;
    w.flush()?;
    if let Some(p) = &cfg.expansions {
        let mut w = BufWriter::new(File::create(p)?);
        for q in &outcome.queries {
            writeln!(w, "{}", q.to_json_line()?)?;
        }
        w.flush()?;
    }
    info!(
        "wrote {} rankings to {}",
        outcome.runs.len(),
        run_path.display()
    );
    Ok(outcome)
}

pub fn evaluate(run: &Path, qrels: &Path, k: usize) -> Result<EvalReport> {
    eval::evaluate_run(&read_run_file(run)?, &read_qrels(qrels)?, k)
}

pub fn format_report(report: &EvalReport) -> String {
    format!(
        "queries\t{}\nMAP\t{:.4}\nGMAP\t{:.4}\nP@{}\t{:.4}",
        report.per_query.len(),
        report.map,
        report.gmap,
        report.k,
        report.p_at_k_mean
    )
}

/// One axis of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub key: String,
    pub values: Vec<String>,
}

impl FromStr for GridAxis {
    type Err = Error;

    /// `key=v1,v2,v3` or `key=start..end step s` (inclusive of `end`).
    fn from_str(s: &str) -> Result<Self> {
        let bad = |message: String| Error::InvalidParameter {
            name: "grid",
            message,
        };
        let (key, spec) = s
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=values, got {s:?}")))?;
        let key = key.trim().to_owned();
        let spec = spec.trim();
        let values = if let Some((range, step)) = spec.split_once("step") {
            let (start, end) = range
                .split_once("..")
                .ok_or_else(|| bad(format!("expected start..end step s, got {spec:?}")))?;
            let num = |v: &str| -> Result<f64> { parse_value("grid", v.trim()) };
            let (start, end, step) = (num(start)?, num(end)?, num(step)?);
            if step.is_nan() || step <= 0.0 || end < start {
                return Err(bad(format!("empty or unbounded range {spec:?}")));
            }
            let n = ((end - start) / step + 1e-9).floor() as usize;
            (0..=n)
                .map(|i| {
                    let v = start + i as f64 * step;
                    // Trim float noise such as 0.30000000000000004.
                    let rounded = (v * 1e9).round() / 1e9;
                    rounded.to_string()
                })
                .collect()
        } else {
            spec.split(',')
                .map(|v| v.trim().to_owned())
                .filter(|v| !v.is_empty())
                .collect::<Vec<_>>()
        };
        if values.is_empty() {
            return Err(bad(format!("axis {key} has no values")));
        }
        Ok(GridAxis { key, values })
    }
}

/// Cartesian product of the axes; the first axis varies slowest.
pub fn grid_points(axes: &[GridAxis]) -> Vec<Vec<(String, String)>> {
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((axis.key.clone(), v.clone()));
                    q
                })
            })
            .collect();
    }
    points
}

/// Reads axes from a file, one per line, `#` comments allowed.
pub fn read_grid(path: &Path) -> Result<Vec<GridAxis>> {
    let mut axes = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        if !line.is_empty() {
            axes.push(line.parse()?);
        }
    }
    Ok(axes)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub params: Vec<(String, String)>,
    pub map: f64,
    pub gmap: f64,
    pub p_at_k: f64,
    pub fallbacks: usize,
}

/// Evaluates every grid point over `base`. Rows come back sorted by
/// descending MAP (grid order among ties), so the first row is the best.
pub fn sweep(
    base: &ExperimentConfig,
    axes: &[GridAxis],
    index: &Index,
    store: Option<&EmbeddingStore>,
    topics: &[Topic],
    qrels: &Qrels,
    k: usize,
) -> Result<Vec<SweepRow>> {
    if axes.is_empty() {
        return Err(Error::InvalidParameter {
            name: "grid",
            message: "no axes given".into(),
        });
    }
    let points = grid_points(axes);
    let mut rows: Vec<SweepRow> = points
        .par_iter()
        .map(|params| {
            let mut cfg = base.clone();
            for (key, value) in params {
                cfg.set(key, value)?;
            }
            let outcome = run_search(&cfg, index, store, topics)?;
            let report = eval::evaluate_run(&outcome.run_map(), qrels, k)?;
            Ok(SweepRow {
                params: params.clone(),
                map: report.map,
                gmap: report.gmap,
                p_at_k: report.p_at_k_mean,
                fallbacks: outcome.fallbacks(),
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| b.map.total_cmp(&a.map));
    Ok(rows)
}

/// Tab-separated table, best row flagged with `*`.
pub fn write_sweep_table<W: Write>(rows: &[SweepRow], k: usize, mut w: W) -> Result<()> {
    let Some(first) = rows.first() else {
        return Ok(());
    };
    let keys: Vec<&str> = first.params.iter().map(|(key, _)| key.as_str()).collect();
    writeln!(w, "best\t{}\tMAP\tGMAP\tP@{k}\tfallbacks", keys.join("\t"))?;
    for (i, row) in rows.iter().enumerate() {
        let values: Vec<&str> = row.params.iter().map(|(_, v)| v.as_str()).collect();
        writeln!(
            w,
            "{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{}",
            if i == 0 { "*" } else { "" },
            values.join("\t"),
            row.map,
            row.gmap,
            row.p_at_k,
            row.fallbacks
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub map_a: f64,
    pub map_b: f64,
    pub test: SignificanceResult,
    pub differences: Vec<ApDifference>,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "queries\t{}", self.test.n)?;
        writeln!(f, "MAP A\t{:.4}", self.map_a)?;
        writeln!(f, "MAP B\t{:.4}", self.map_b)?;
        writeln!(f, "mean AP difference\t{:+.4}", self.test.mean_difference)?;
        writeln!(f, "t\t{:.4}", self.test.t_statistic)?;
        writeln!(f, "p\t{:.4}", self.test.p_value)?;
        let verdict = if self.test.significant_at_95 {
            "significant at 95%"
        } else {
            "not significant at 95%"
        };
        write!(f, "verdict\t{verdict}")?;
        if self.test.zero_variance {
            write!(f, " (all AP differences equal)")?;
        }
        Ok(())
    }
}

pub fn compare_reports(
    a: &EvalReport,
    b: &EvalReport,
    alternative: Alternative,
) -> Result<Comparison> {
    let (_, ap_a, ap_b) = eval::paired_ap(a, b)?;
    if ap_a.len() < a.per_query.len().max(b.per_query.len()) {
        warn!("comparing on the {} queries both runs evaluate", ap_a.len());
    }
    Ok(Comparison {
        map_a: ap_a.iter().sum::<f64>() / ap_a.len() as f64,
        map_b: ap_b.iter().sum::<f64>() / ap_b.len() as f64,
        test: eval::paired_t_test_with(&ap_a, &ap_b, alternative)?,
        differences: eval::ap_difference_table(a, b)?,
    })
}

/// Paired comparison of two run files; `a` is typically the expanded run
/// and `b` the baseline.
pub fn compare(
    run_a: &Path,
    run_b: &Path,
    qrels: &Path,
    k: usize,
    alternative: Alternative,
) -> Result<Comparison> {
    let qrels = read_qrels(qrels)?;
    let a = eval::evaluate_run(&read_run_file(run_a)?, &qrels, k)?;
    let b = eval::evaluate_run(&read_run_file(run_b)?, &qrels, k)?;
    compare_reports(&a, &b, alternative)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_and_overrides() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(
            "# experiment\nmethod = post\nK = 30 # terms\nalpha=0.55\n\nn_initial = auto\n",
        )
        .unwrap();
        assert_eq!(cfg.method, SearchMethod::Post);
        assert_eq!(cfg.num_terms, 30);
        assert_eq!(cfg.alpha, 0.55);
        cfg.set("alpha", "0.65").unwrap();
        assert_eq!(cfg.alpha, 0.65);
        assert!(cfg.set("nope", "1").is_err());
        assert!(matches!(
            cfg.apply_text("alpha\n"),
            Err(Error::Line { line: 1, .. })
        ));
    }

    #[test]
    fn grid_axes() {
        let a: GridAxis = "alpha=0.5..0.7 step 0.1".parse().unwrap();
        assert_eq!(a.values, ["0.5", "0.6", "0.7"]);
        let b: GridAxis = "K = 10, 20".parse().unwrap();
        assert_eq!(b.values, ["10", "20"]);
        let points = grid_points(&[a, b]);
        assert_eq!(points.len(), 6);
        assert_eq!(
            points[1],
            [("alpha".into(), "0.5".into()), ("K".into(), "20".into())]
        );
        assert!("alpha=0.7..0.5 step 0.1".parse::<GridAxis>().is_err());
        assert!("alpha=".parse::<GridAxis>().is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in ["none", "pre", "post", "incremental", "rm3"] {
            assert_eq!(m.parse::<SearchMethod>().unwrap().to_string(), m);
        }
    }
}
