// RM3 pseudo-relevance feedback as the classical comparison point.

use embqe::index::Index;
use embqe::lm::{self, QueryModel};
use embqe::rm3;
use embqe::textpipe::{Analyzer, RawDocument};

pub fn run_example() -> anyhow::Result<()> {
    let analyzer = Analyzer::default();
    let texts = [
        ("d1", "oil spill cleanup along the coast, tanker oil leak"),
        ("d2", "tanker accident causes oil spill and wildlife damage"),
        ("d3", "stock market rally lifts oil company shares"),
        ("d4", "volunteers clean beaches after the spill"),
    ];
    let docs: Vec<_> = texts
        .iter()
        .map(|(id, text)| {
            analyzer.analyze_document(&RawDocument {
                doc_id: id.to_string(),
                text: text.to_string(),
            })
        })
        .collect();
    let index = Index::build(&docs)?;

    let terms = analyzer.analyze("oil spill");
    let qm = QueryModel::mle(&terms)?;
    let rm1 = rm3::estimate_rm1(&index, &terms, lm::DEFAULT_LAMBDA, 2)?;
    for (t, w) in rm1.ranked().into_iter().take(5) {
        println!("RM1 {t:<10} {w:.4}");
    }

    let expanded = rm3::rm3_expand(&rm1, &qm, 5, rm3::DEFAULT_MIX)?;
    assert!((expanded.total() - 1.0).abs() < 1e-9);
    assert_eq!(rm3::rm3_expand(&rm1, &qm, 5, 1.0)?, qm);

    let run = lm::retrieve(&index, "q1", &expanded, lm::DEFAULT_LAMBDA, 10)?;
    for e in &run.entries {
        println!("{} {:.4}", e.doc_id, e.score);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
