// End-to-end experiment through files, the way the binary runs it:
// build an index, search with and without expansion, evaluate, compare.

use embqe::cli::{self, ExperimentConfig, SearchMethod};
use embqe::eval::Alternative;
use embqe::synthetic::{SyntheticCollection, SyntheticConfig};
use embqe::textpipe::Analyzer;

pub fn run_example() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let files = SyntheticCollection::generate(&SyntheticConfig::default())?.write_to(dir.path())?;

    let index = dir.path().join("index.bin");
    println!(
        "{}",
        cli::build_index(&files.corpus, &index, &Analyzer::default())?
    );

    let mut cfg = ExperimentConfig {
        index: Some(index),
        vectors: Some(files.vectors.clone()),
        topics: Some(files.topics.clone()),
        ..Default::default()
    };

    let baseline = dir.path().join("baseline.run");
    cfg.run = Some(baseline.clone());
    cfg.method = SearchMethod::None;
    cli::search(&cfg)?;

    let expanded = dir.path().join("pre.run");
    cfg.run = Some(expanded.clone());
    cfg.method = SearchMethod::Pre;
    cfg.num_terms = 5;
    cfg.alpha = 0.6;
    cli::search(&cfg)?;

    for (name, run) in [("LM", &baseline), ("pre-QE", &expanded)] {
        let report = cli::evaluate(run, &files.qrels, 5)?;
        println!(
            "{name:>7}: MAP {:.4}  GMAP {:.4}  P@5 {:.4}",
            report.map, report.gmap, report.p_at_k_mean
        );
    }

    let cmp = cli::compare(&expanded, &baseline, &files.qrels, 5, Alternative::TwoSided)?;
    println!("{cmp}");
    assert!(cmp.map_a > cmp.map_b);
    assert!(cmp.test.mean_difference > 0.0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
