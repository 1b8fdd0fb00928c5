// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Runs without the libtest harness so the lines always
// show up in `cargo test` output.

// `!(x <= tol)` is deliberate in `ensure!`: a NaN has to fail.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::{BTreeMap, HashSet};
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use embqe::cli::{self, ExperimentConfig, SearchMethod};
use embqe::embed::{EmbeddingStore, Neighbor};
use embqe::eval::{self, Qrels};
use embqe::index::Index;
use embqe::lm::{self, QueryModel, RankedList, ScoredDoc};
use embqe::qe::{self, Eqts, EqtsUnit, ExpansionConfig, Method};
use embqe::rm3;
use embqe::synthetic::{SyntheticCollection, SyntheticConfig};
use embqe::textpipe::{AnalyzedDocument, Analyzer, Topic};

type Check = fn() -> Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn raw_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn random_index(rng: &mut ChaCha8Rng, max_docs: usize, vocab: usize) -> Index {
    let n = rng.gen_range(1..=max_docs);
    let docs: Vec<AnalyzedDocument> = (0..n)
        .map(|i| AnalyzedDocument {
            doc_id: format!("D{i:03}"),
            tokens: (0..rng.gen_range(0..25))
                .map(|_| format!("w{}", rng.gen_range(0..vocab)))
                .collect(),
        })
        .collect();
    Index::build(&docs).unwrap()
}

fn knn_oracle() -> Result<(), String> {
    let start = Instant::now();
    let mut rng = rng(1);
    for trial in 0..200 {
        let mut raw: Vec<(String, Vec<f64>)> = Vec::with_capacity(1000);
        for i in 0..1000 {
            // About one term in twenty duplicates an earlier vector, so
            // exact ties have to be broken by term.
            let v = if i > 0 && rng.gen_bool(0.05) {
                raw[rng.gen_range(0..i)].1.clone()
            } else {
                random_vector(&mut rng, 20)
            };
            raw.push((format!("t{i:04}"), v));
        }
        let store =
            EmbeddingStore::from_vectors(20, raw.iter().map(|(t, v)| (t.clone(), v.clone())))
                .map_err(|e| e.to_string())?;
        let anchor = if rng.gen_bool(0.5) {
            raw[rng.gen_range(0..1000)].1.clone()
        } else {
            random_vector(&mut rng, 20)
        };
        let exclude: HashSet<String> = (0..3)
            .map(|_| raw[rng.gen_range(0..1000)].0.clone())
            .collect();

        let mut oracle: Vec<(f64, &str)> = raw
            .iter()
            .filter(|(t, _)| !exclude.contains(t))
            .map(|(t, v)| (raw_cosine(&anchor, v), t.as_str()))
            .collect();
        oracle.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        oracle.truncate(10);

        let got = store
            .knn(&anchor, 10, None, &exclude)
            .map_err(|e| e.to_string())?;
        let got_terms: Vec<&str> = got.terms().collect();
        let want_terms: Vec<&str> = oracle.iter().map(|o| o.1).collect();
        ensure!(
            got_terms == want_terms,
            "trial {trial}: {got_terms:?} != {want_terms:?}"
        );
        for (Neighbor { similarity, .. }, (sim, _)) in got.neighbors.iter().zip(&oracle) {
            ensure!(
                (similarity - sim).abs() < 1e-12,
                "trial {trial}: similarity {similarity} vs {sim}"
            );
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(())
}

fn incremental_trace() -> Result<(), String> {
    let store = EmbeddingStore::from_vectors(
        3,
        [
            ("anchor", [1.0, 0.0, 0.0]),
            ("t1", [0.95, 0.30, 0.05]),
            ("t2", [0.90, -0.35, 0.10]),
            ("t3", [0.85, 0.10, 0.50]),
            ("t4", [0.80, 0.55, -0.20]),
            ("t5", [0.75, -0.60, -0.25]),
            ("t6", [0.70, 0.20, -0.65]),
            ("t7", [0.60, -0.10, 0.78]),
            ("t8", [0.50, 0.80, 0.30]),
            ("t9", [0.40, -0.85, 0.35]),
        ],
    )
    .map_err(|e| e.to_string())?;
    let anchor = store.vector("anchor").unwrap().to_vec();
    let exclude: HashSet<String> = ["anchor".to_string()].into();

    // Traced by hand: the initial list is t1..t9. Step 0 pivots on t1 and
    // reorders the tail t4 t3 t2 t8 t6 t7 t5 t9, dropping t5 t9. Step 1
    // pivots on t4: t6 t8 t3 t2 t7, dropping t2 t7. Step 2 pivots on t6:
    // t8 t3, dropping both.
    let expected: [&[&str]; 3] = [
        &["t1", "t2", "t3", "t4", "t6", "t7", "t8"],
        &["t1", "t3", "t4", "t6", "t8"],
        &["t1", "t4", "t6"],
    ];
    for (l, want) in (1..=3).zip(expected) {
        let got = store
            .incremental_nn(&anchor, &exclude, 9, 2, l)
            .map_err(|e| e.to_string())?;
        let got: Vec<&str> = got.terms().collect();
        ensure!(got == want, "l = {l}: {got:?} != {want:?}");
    }

    let plain: HashSet<String> = store
        .knn(&anchor, 9, None, &exclude)
        .map_err(|e| e.to_string())?
        .terms()
        .map(str::to_owned)
        .collect();
    for l in 1..=3 {
        let got: HashSet<String> = store
            .incremental_nn(&anchor, &exclude, 9, 0, l)
            .map_err(|e| e.to_string())?
            .terms()
            .map(str::to_owned)
            .collect();
        ensure!(got == plain, "prune_k = 0, l = {l}: {got:?} != {plain:?}");
    }
    Ok(())
}

fn interpolation_distribution() -> Result<(), String> {
    let mut rng = rng(3);
    for trial in 0..100 {
        let index = random_index(&mut rng, 30, 40);
        let vocab: Vec<String> = index.terms().map(str::to_owned).collect();
        let mut store_terms = vocab.clone();
        store_terms.extend((0..10).map(|i| format!("extra{i}")));
        let dim = 8;
        let store = EmbeddingStore::from_vectors(
            dim,
            store_terms
                .iter()
                .map(|t| (t.clone(), random_vector(&mut rng, dim))),
        )
        .map_err(|e| e.to_string())?;
        let topic = Topic {
            query_id: format!("{trial}"),
            title_terms: (0..rng.gen_range(1..=4))
                .map(|_| vocab.choose(&mut rng).unwrap().clone())
                .collect(),
        };
        for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let cfg = ExpansionConfig {
                method: Method::Pre,
                num_terms: rng.gen_range(1..=6),
                alpha,
                ..Default::default()
            };
            let q =
                qe::expand_with_feedback(&topic, &store, &cfg, None).map_err(|e| e.to_string())?;
            let total = q.model.total();
            ensure!(
                (total - 1.0).abs() <= 1e-9,
                "trial {trial}, alpha {alpha}: sum {total}"
            );
        }

        let mut cfg = ExperimentConfig::default();
        let baseline = cli::run_search(&cfg, &index, None, std::slice::from_ref(&topic))
            .map_err(|e| e.to_string())?;
        cfg.method = SearchMethod::Pre;
        cfg.alpha = 1.0;
        let expanded = cli::run_search(&cfg, &index, Some(&store), std::slice::from_ref(&topic))
            .map_err(|e| e.to_string())?;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        lm::write_run(&mut a, &baseline.runs, &cfg.run_tag).map_err(|e| e.to_string())?;
        lm::write_run(&mut b, &expanded.runs, &cfg.run_tag).map_err(|e| e.to_string())?;
        ensure!(
            a == b,
            "trial {trial}: alpha = 1 run differs from the baseline"
        );
    }
    Ok(())
}

fn mean_similarity() -> Result<(), String> {
    let mut rng = rng(4);
    for trial in 0..200 {
        let dim = rng.gen_range(2..12);
        let term_vec = random_vector(&mut rng, dim);
        let store = EmbeddingStore::from_vectors(dim, [("x", term_vec.clone())])
            .map_err(|e| e.to_string())?;
        let raw_units: Vec<Vec<f64>> = (0..rng.gen_range(1..8))
            .map(|_| random_vector(&mut rng, dim))
            .collect();
        let eqts = Eqts {
            query_id: "q".into(),
            query_terms: vec![],
            units: raw_units
                .iter()
                .enumerate()
                .map(|(i, v)| EqtsUnit {
                    label: format!("u{i}"),
                    vector: embqe::embed::normalize(v).unwrap(),
                    composed: false,
                })
                .collect(),
            uncovered: vec![],
        };
        let want = raw_units
            .iter()
            .map(|u| raw_cosine(&term_vec, u))
            .sum::<f64>()
            / raw_units.len() as f64;
        let got = qe::mean_similarity("x", &eqts, &store).map_err(|e| e.to_string())?;
        ensure!((got - want).abs() <= 1e-9, "trial {trial}: {got} vs {want}");
    }

    // Worked value: unit cosines 0.8 and 0.4. The f64 mean of those two
    // doubles is 0.6000000000000001, one ulp above the literal 0.6.
    let store = EmbeddingStore::from_vectors(2, [("x", [1.0, 0.0])]).map_err(|e| e.to_string())?;
    let unit = |label: &str, v: [f64; 2]| EqtsUnit {
        label: label.into(),
        vector: v.to_vec(),
        composed: false,
    };
    let eqts = Eqts {
        query_id: "q".into(),
        query_terms: vec![],
        units: vec![unit("a", [0.8, 0.6]), unit("b", [0.4, 0.84f64.sqrt()])],
        uncovered: vec![],
    };
    let got = qe::mean_similarity("x", &eqts, &store).map_err(|e| e.to_string())?;
    ensure!(got == (0.8 + 0.4) / 2.0, "worked value {got}");
    ensure!(
        (got - 0.6).abs() <= f64::EPSILON,
        "worked value {got} not 0.6"
    );
    Ok(())
}

fn retrieval_oracle() -> Result<(), String> {
    let mut rng = rng(5);
    for trial in 0..200 {
        let index = random_index(&mut rng, 100, 30);
        let lambda = rng.gen_range(0.05..0.95);
        let terms: Vec<String> = (0..rng.gen_range(1..5))
            .map(|_| format!("w{}", rng.gen_range(0..35)))
            .collect();
        let qm = QueryModel::mle(&terms).map_err(|e| e.to_string())?;

        let total = index.total_tokens() as f64;
        let mut oracle: Vec<ScoredDoc> = Vec::new();
        for ord in 0..index.num_docs() {
            let tokens: Vec<&str> = index.doc_tokens(ord).unwrap().collect();
            if !qm.terms().any(|t| tokens.contains(&t)) {
                continue;
            }
            let len = tokens.len() as f64;
            let mut score = 0.0;
            for (t, w) in qm.iter() {
                let cf = (0..index.num_docs())
                    .flat_map(|o| index.doc_tokens(o).unwrap())
                    .filter(|x| *x == t)
                    .count();
                if cf == 0 {
                    continue;
                }
                let tf = tokens.iter().filter(|x| **x == t).count();
                let p_ml = if tf == 0 { 0.0 } else { tf as f64 / len };
                score += w * ((1.0 - lambda) * p_ml + lambda * (cf as f64 / total)).ln();
            }
            oracle.push(ScoredDoc {
                doc_id: index.doc_id(ord).unwrap().to_owned(),
                score,
            });
        }
        oracle.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.doc_id.cmp(&b.doc_id))
        });
        let k = rng.gen_range(1..=120);
        oracle.truncate(k);

        let got = lm::retrieve(&index, "q", &qm, lambda, k).map_err(|e| e.to_string())?;
        ensure!(
            got == RankedList {
                query_id: "q".into(),
                entries: oracle.clone()
            },
            "trial {trial}: ranking differs\n got {:?}\nwant {:?}",
            got.entries,
            oracle
        );
    }

    let doc = |id: &str, toks: &[&str]| AnalyzedDocument {
        doc_id: id.into(),
        tokens: toks.iter().map(|t| t.to_string()).collect(),
    };
    let index = Index::build(&[doc("d1", &["a", "a", "b"]), doc("d2", &["b", "b"])]).unwrap();
    let qm = QueryModel::mle(&["a"]).unwrap();
    let run = lm::retrieve(&index, "q", &qm, 0.6, 10).map_err(|e| e.to_string())?;
    let want = (0.4 * (2.0 / 3.0) + 0.6 * 0.4f64).ln();
    ensure!(run.entries[0].doc_id == "d1", "worked example ranking");
    ensure!(
        (run.entries[0].score - want).abs() <= 1e-9,
        "worked example {} vs {want}",
        run.entries[0].score
    );
    Ok(())
}

fn metrics() -> Result<(), String> {
    let ranked = |qid: &str, docs: &[&str]| RankedList {
        query_id: qid.into(),
        entries: docs
            .iter()
            .enumerate()
            .map(|(i, d)| ScoredDoc {
                doc_id: d.to_string(),
                score: -(i as f64),
            })
            .collect(),
    };
    let mut qrels = Qrels::default();
    for (q, d, g) in [
        ("1", "r1", 1),
        ("1", "n1", 0),
        ("1", "r2", 1),
        ("2", "x", 1),
    ] {
        qrels.insert(q, d, g);
    }
    let ap = eval::average_precision(&ranked("1", &["r1", "n1", "r2"]), &qrels, "1").unwrap();
    ensure!((ap - 0.833333).abs() <= 1e-6, "AP {ap}");

    // AP 0.5 on query 1 and 0 on query 2.
    let mut runs = BTreeMap::new();
    runs.insert("1".to_string(), ranked("1", &["r1", "n1", "n2", "n3"]));
    runs.insert("2".to_string(), ranked("2", &["n1"]));
    let report = eval::evaluate_run(&runs, &qrels, 5).map_err(|e| e.to_string())?;
    ensure!(
        (report.per_query["1"].ap - 0.5).abs() < 1e-12,
        "AP of first query"
    );
    ensure!(
        (report.gmap - 0.0022361).abs() <= 1e-6,
        "GMAP {}",
        report.gmap
    );

    let mut q5 = Qrels::default();
    for d in ["a", "c", "e"] {
        q5.insert("5", d, 1);
    }
    let p5 = eval::precision_at(&ranked("5", &["a", "b", "c", "d", "e", "f"]), &q5, "5", 5);
    ensure!(p5 == 0.6, "P@5 {p5}");

    // Frozen from scipy.stats.ttest_rel.
    let a = [
        0.412, 0.305, 0.518, 0.221, 0.634, 0.150, 0.477, 0.390, 0.288, 0.561,
    ];
    let b = [
        0.380, 0.310, 0.455, 0.240, 0.590, 0.101, 0.470, 0.322, 0.300, 0.498,
    ];
    let t = eval::paired_t_test(&a, &b).map_err(|e| e.to_string())?;
    ensure!(
        (t.t_statistic - 2.7386127875258306).abs() <= 1e-6,
        "t {}",
        t.t_statistic
    );
    ensure!(
        (t.p_value - 0.022899494551768276).abs() <= 1e-6,
        "p {}",
        t.p_value
    );
    Ok(())
}

fn post_pre_identity() -> Result<(), String> {
    let collection = SyntheticCollection::generate(&SyntheticConfig {
        topics: 20,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let store = &collection.vectors;
    let vocabulary: HashSet<String> = store.terms().map(str::to_owned).collect();
    let analyzer = Analyzer::default();
    for topic in &collection.topics {
        let topic = Topic {
            query_id: topic.query_id.clone(),
            title_terms: analyzer.analyze(&topic.title),
        };
        for alpha in [0.3, 0.6] {
            let pre_cfg = ExpansionConfig {
                method: Method::Pre,
                num_terms: 5,
                alpha,
                ..Default::default()
            };
            let post_cfg = ExpansionConfig {
                method: Method::Post,
                ..pre_cfg.clone()
            };
            let pre = qe::expand_with_feedback(&topic, store, &pre_cfg, None)
                .map_err(|e| e.to_string())?;
            let post = qe::expand_with_feedback(&topic, store, &post_cfg, Some(&vocabulary))
                .map_err(|e| e.to_string())?;
            ensure!(
                pre.model == post.model,
                "query {}: models differ",
                topic.query_id
            );
            ensure!(
                pre.expansion_terms == post.expansion_terms,
                "query {}: expansion terms differ",
                topic.query_id
            );
        }
    }
    Ok(())
}

fn end_to_end() -> Result<(), String> {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_embqe");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let files = SyntheticCollection::generate(&SyntheticConfig::default())
        .and_then(|c| c.write_to(dir.path()))
        .map_err(|e| e.to_string())?;
    let index = dir.path().join("index.bin");
    let baseline = dir.path().join("lm.run");
    let expanded = dir.path().join("pre.run");

    let run = |args: &[&str]| -> Result<String, String> {
        let out = Command::new(bin)
            .args(args)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!(
                "{args:?}: {}",
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    };
    let p = |p: &std::path::Path| p.to_str().unwrap().to_owned();
    let summary = run(&[
        "build-index",
        "--corpus",
        &p(&files.corpus),
        "--out",
        &p(&index),
    ])?;
    let num_docs: usize = summary
        .split_whitespace()
        .next()
        .unwrap_or("0")
        .parse()
        .unwrap_or(0);
    ensure!(num_docs >= 50, "corpus has {num_docs} documents");

    run(&[
        "search",
        "--index",
        &p(&index),
        "--topics",
        &p(&files.topics),
        "--run",
        &p(&baseline),
        "--method",
        "none",
    ])?;
    run(&[
        "search",
        "--index",
        &p(&index),
        "--topics",
        &p(&files.topics),
        "--vectors",
        &p(&files.vectors),
        "--run",
        &p(&expanded),
        "--method",
        "pre",
        "--alpha",
        "0.6",
        "-K",
        "5",
    ])?;

    let map = |run: &std::path::Path| {
        cli::evaluate(run, &files.qrels, 5)
            .map(|r| r.map)
            .map_err(|e| e.to_string())
    };
    let (map_lm, map_pre) = (map(&baseline)?, map(&expanded)?);
    ensure!(map_pre > map_lm, "MAP pre {map_pre} <= MAP LM {map_lm}");

    let report = run(&[
        "compare",
        "--run-a",
        &p(&expanded),
        "--run-b",
        &p(&baseline),
        "--qrels",
        &p(&files.qrels),
    ])?;
    let diff: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("mean AP difference\t"))
        .ok_or("compare printed no mean AP difference")?
        .parse()
        .map_err(|e| format!("{e}"))?;
    ensure!(diff > 0.0, "mean AP difference {diff}");
    println!("    MAP LM {map_lm:.4}, MAP pre-QE {map_pre:.4}, mean AP difference {diff:+.4}");

    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(())
}

fn eqts_shape() -> Result<(), String> {
    let mut rng = rng(9);
    let vocab: Vec<String> = (0..50).map(|i| format!("v{i}")).collect();
    let store = EmbeddingStore::from_vectors(
        16,
        vocab
            .iter()
            .map(|t| (t.clone(), random_vector(&mut rng, 16))),
    )
    .map_err(|e| e.to_string())?;
    for trial in 0..500 {
        let m = rng.gen_range(2..=8);
        let topic = Topic {
            query_id: format!("{trial}"),
            title_terms: (0..m)
                .map(|_| vocab.choose(&mut rng).unwrap().clone())
                .collect(),
        };
        let eqts = qe::build_eqts(&topic, &store, true).map_err(|e| e.to_string())?;
        ensure!(
            eqts.units.len() == 2 * m - 1,
            "m = {m}: {} units",
            eqts.units.len()
        );
        let composed: Vec<String> = eqts.units[m..].iter().map(|u| u.label.clone()).collect();
        let chain: Vec<String> = topic
            .title_terms
            .windows(2)
            .map(|w| format!("{}+{}", w[0], w[1]))
            .collect();
        ensure!(composed == chain, "bigram chain {composed:?}");
    }
    Ok(())
}

fn rm3_sanity() -> Result<(), String> {
    let mut rng = rng(10);
    for trial in 0..100 {
        let index = random_index(&mut rng, 40, 20);
        if index.total_tokens() == 0 {
            continue;
        }
        let lambda = 0.6;
        let terms = vec![index.terms().choose(&mut rng).unwrap().to_owned()];
        let qm = QueryModel::mle(&terms).unwrap();
        let top = lm::top_documents(&index, &qm, lambda, 1).map_err(|e| e.to_string())?[0].0;
        let rm1 = rm3::estimate_rm1(&index, &terms, lambda, 1).map_err(|e| e.to_string())?;

        let len = index.doc_len(top).unwrap() as f64;
        let smoothed = |t: &str| {
            let tf = index.tf(t, top).unwrap() as f64;
            (1.0 - lambda) * tf / len + lambda * index.p_coll(t).unwrap()
        };
        let doc_terms: HashSet<&str> = index.doc_tokens(top).unwrap().collect();
        ensure!(
            rm1.len() == doc_terms.len(),
            "trial {trial}: support {} vs {}",
            rm1.len(),
            doc_terms.len()
        );
        let norm: f64 = doc_terms.iter().map(|t| smoothed(t)).sum();
        for t in &doc_terms {
            let want = smoothed(t) / norm;
            ensure!(
                (rm1.weight(t) - want).abs() <= 1e-9,
                "trial {trial}: {t} {} vs {want}",
                rm1.weight(t)
            );
        }
        let total: f64 = rm1.iter().map(|(_, w)| w).sum();
        ensure!(
            (total - 1.0).abs() <= 1e-9,
            "trial {trial}: RM1 sums to {total}"
        );

        ensure!(
            rm3::rm3_expand(&rm1, &qm, 5, 1.0).unwrap() == qm,
            "mix = 1 changed the query"
        );
        for mix in [0.0, 0.3, 0.5, 0.9] {
            let m =
                rm3::rm3_expand(&rm1, &qm, rng.gen_range(1..10), mix).map_err(|e| e.to_string())?;
            ensure!(
                (m.total() - 1.0).abs() <= 1e-9,
                "trial {trial}: RM3 sums to {}",
                m.total()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        ("kNN matches a brute-force scan", knn_oracle),
        (
            "incremental pruning follows the hand trace",
            incremental_trace,
        ),
        (
            "expanded models are distributions; alpha = 1 is the baseline",
            interpolation_distribution,
        ),
        (
            "mean similarity is the mean of unit cosines",
            mean_similarity,
        ),
        ("retrieval matches exhaustive scoring", retrieval_oracle),
        ("AP, GMAP, P@5 and the paired t-test", metrics),
        (
            "post with the full vocabulary equals pre",
            post_pre_identity,
        ),
        ("expansion beats the baseline end to end", end_to_end),
        ("EQTS has 2m - 1 units", eqts_shape),
        ("RM1 and RM3 sanity", rm3_sanity),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = match panic::catch_unwind(AssertUnwindSafe(check)) {
            Ok(r) => r,
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into())),
        };
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(()) => println!("PASS criterion {:>2}: {name} ({ms} ms)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name} ({ms} ms): {msg}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
