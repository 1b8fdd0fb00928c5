// Text analysis: tokenize, drop SMART stopwords, Porter-stem.

use embqe::textpipe::{self, porter_stem, Analyzer, Stoplist};

pub fn run_example() -> anyhow::Result<()> {
    let text = "The ponies were running quickly across the U.S. border in 1994.";

    let raw: Vec<String> = textpipe::tokenize(text).collect();
    println!("tokens:   {raw:?}");

    let analyzer = Analyzer::default();
    let terms = analyzer.analyze(text);
    println!("analyzed: {terms:?}");
    assert_eq!(terms, ["poni", "run", "quickli", "border", "1994"]);

    // Stopwords are removed before stemming, so "having" goes but "haves" stays.
    let custom = Analyzer::new(Stoplist::parse("# tiny list\nhaving\n"));
    assert_eq!(custom.analyze("having haves"), ["have"]);

    for w in ["caresses", "relational", "generalization", "sensibility"] {
        println!("{w:>16} -> {}", porter_stem(w));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
