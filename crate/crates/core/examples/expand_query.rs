// Embedding-based query expansion: build the extended query term set,
// gather neighbor candidates, rank them by mean similarity, and
// interpolate with the original query model. All three candidate
// strategies (pre, post, incremental) are shown.

use std::collections::HashSet;

use embqe::embed::EmbeddingStore;
use embqe::qe::{self, ExpansionConfig, Method};
use embqe::textpipe::Topic;

fn store() -> embqe::Result<EmbeddingStore> {
    EmbeddingStore::from_vectors(
        4,
        [
            ("intern", [1.0, 0.1, 0.0, 0.0]),
            ("organ", [0.1, 1.0, 0.0, 0.0]),
            ("crime", [0.0, 0.1, 1.0, 0.1]),
            ("mafia", [0.1, 0.3, 0.9, 0.0]),
            ("cartel", [0.2, 0.2, 0.8, 0.1]),
            ("global", [0.9, 0.2, 0.1, 0.0]),
            ("syndic", [0.5, 0.5, 0.5, 0.0]),
            ("banana", [0.0, 0.0, 0.0, 1.0]),
        ],
    )
}

pub fn run_example() -> anyhow::Result<()> {
    let store = store()?;
    let query = Topic {
        query_id: "401".into(),
        title_terms: vec!["intern".into(), "organ".into(), "crime".into()],
    };

    let eqts = qe::build_eqts(&query, &store, true)?;
    let labels: Vec<&str> = eqts.units.iter().map(|u| u.label.as_str()).collect();
    println!("units: {labels:?}");
    assert_eq!(labels.len(), 5);

    let cfg = ExpansionConfig {
        method: Method::Pre,
        num_terms: 3,
        alpha: 0.6,
        ..Default::default()
    };
    let pre = qe::expand_with_feedback(&query, &store, &cfg, None)?;
    for c in &pre.expansion_terms {
        println!("  {:<8} sim {:.4}", c.term, c.sim);
    }
    for (t, w) in pre.model.iter() {
        println!("  P({t}|Q') = {w:.4}");
    }
    assert!((pre.model.total() - 1.0).abs() < 1e-9);
    println!("{}", pre.to_json_line()?);

    // Post-retrieval: candidates restricted to the feedback vocabulary.
    let prf: HashSet<String> = ["cartel", "banana", "crime"].map(String::from).into();
    let post_cfg = ExpansionConfig {
        method: Method::Post,
        ..cfg.clone()
    };
    let post = qe::expand_with_feedback(&query, &store, &post_cfg, Some(&prf))?;
    let terms: Vec<&str> = post
        .expansion_terms
        .iter()
        .map(|c| c.term.as_str())
        .collect();
    assert_eq!(terms, ["cartel", "banana"]);

    let inc_cfg = ExpansionConfig {
        method: Method::Incremental,
        num_terms: 2,
        n_initial: Some(4),
        prune_k: Some(1),
        iterations: 2,
        ..cfg
    };
    let inc = qe::expand_with_feedback(&query, &store, &inc_cfg, None)?;
    println!(
        "incremental picks {:?}",
        inc.expansion_terms
            .iter()
            .map(|c| &c.term)
            .collect::<Vec<_>>()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
