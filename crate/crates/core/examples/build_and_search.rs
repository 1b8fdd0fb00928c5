// Index a small TREC SGML corpus, persist it, and run query-likelihood
// retrieval with Jelinek-Mercer smoothing.

use embqe::index::Index;
use embqe::lm::{self, QueryModel};
use embqe::textpipe::{parse_trec_docs, Analyzer};

const CORPUS: &str = "
<DOC><DOCNO> FT-1 </DOCNO><TEXT>Hubble telescope mirror flaw discovered.</TEXT></DOC>
<DOC><DOCNO> FT-2 </DOCNO><TEXT>Space telescope repair mission planned by NASA.</TEXT></DOC>
<DOC><DOCNO> FT-3 </DOCNO><TEXT>Wheat prices fell as the harvest improved.</TEXT></DOC>
<DOC><DOCNO> FT-4 </DOCNO><TEXT>Astronomers praise telescope images after repair.</TEXT></DOC>
";

pub fn run_example() -> anyhow::Result<()> {
    let analyzer = Analyzer::default();
    let docs: Vec<_> = parse_trec_docs(CORPUS.as_bytes())?
        .iter()
        .map(|d| analyzer.analyze_document(d))
        .collect();
    let index = Index::build(&docs)?;
    println!(
        "{} docs, {} tokens, {} terms",
        index.num_docs(),
        index.total_tokens(),
        index.vocabulary_size()
    );

    // The binary format round-trips exactly.
    let mut bytes = Vec::new();
    index.write_to(&mut bytes)?;
    let index = Index::read_from(&bytes[..])?;

    let query = QueryModel::mle(&analyzer.analyze("telescope repair"))?;
    let run = lm::retrieve(&index, "301", &query, lm::DEFAULT_LAMBDA, 10)?;
    for (rank, e) in run.entries.iter().enumerate() {
        println!("{} {:.4} {}", rank + 1, e.score, e.doc_id);
    }
    // Both FT-2 and FT-4 match both terms; the shorter FT-4 wins.
    assert_eq!(run.entries[0].doc_id, "FT-4");
    assert_eq!(run.entries[1].doc_id, "FT-2");
    // FT-3 shares no query term and is never scored.
    assert!(run.doc_ids().all(|d| d != "FT-3"));

    let mut trec = Vec::new();
    lm::write_run(&mut trec, &[run], "example")?;
    print!("{}", String::from_utf8(trec)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
