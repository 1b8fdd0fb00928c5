// Grid search over expansion parameters on a synthetic collection, ranked
// by MAP.

use embqe::cli::{self, ExperimentConfig, GridAxis, SearchMethod};
use embqe::index::Index;
use embqe::synthetic::{SyntheticCollection, SyntheticConfig};
use embqe::textpipe::{parse_topics, Analyzer};

pub fn run_example() -> anyhow::Result<()> {
    let collection = SyntheticCollection::generate(&SyntheticConfig::default())?;
    let analyzer = Analyzer::default();
    let docs: Vec<_> = collection
        .docs
        .iter()
        .map(|d| analyzer.analyze_document(d))
        .collect();
    let index = Index::build(&docs)?;
    let topics = parse_topics(collection.topics_sgml().as_bytes(), &analyzer)?;

    let base = ExperimentConfig {
        method: SearchMethod::Pre,
        ..Default::default()
    };
    let axes: Vec<GridAxis> = vec!["alpha=0.5..0.7 step 0.1".parse()?, "K=5,10".parse()?];
    let rows = cli::sweep(
        &base,
        &axes,
        &index,
        Some(&collection.vectors),
        &topics,
        &collection.qrels,
        5,
    )?;
    assert_eq!(rows.len(), 6);
    assert!(rows.windows(2).all(|w| w[0].map >= w[1].map));

    cli::write_sweep_table(&rows, 5, std::io::stdout().lock())?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
