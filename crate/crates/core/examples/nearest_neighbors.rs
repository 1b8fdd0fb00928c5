// Exact cosine kNN over a word2vec text file, plus the incremental variant
// that prunes neighbors dissimilar to earlier, closer neighbors.

use std::collections::HashSet;

use embqe::embed::EmbeddingStore;

const VECTORS: &str = "\
8 3
car 1.0 0.1 0.0
automobile 0.95 0.15 0.0
vehicle 0.9 0.3 0.1
truck 0.8 0.4 0.0
engine 0.7 0.1 0.6
wheel 0.6 0.5 0.3
banana 0.0 0.1 1.0
apple 0.1 0.0 0.9
";

pub fn run_example() -> anyhow::Result<()> {
    let store = EmbeddingStore::load_vectors(VECTORS.as_bytes())?;
    println!("{} vectors, dim {}", store.len(), store.dim());

    let knn = store.knn_term("car", 4, None)?;
    for n in &knn.neighbors {
        println!("car ~ {:<10} {:.4}", n.term, n.similarity);
    }
    assert_eq!(knn.neighbors[0].term, "automobile");

    // Restrict the search to a domain, as post-retrieval expansion does.
    let domain: HashSet<String> = ["truck", "banana", "apple"].map(String::from).into();
    let restricted = store.knn_term("car", 2, Some(&domain))?;
    assert_eq!(restricted.terms().collect::<Vec<_>>(), ["truck", "apple"]);

    let anchor = store.vector("car").unwrap().to_vec();
    let exclude: HashSet<String> = ["car".to_string()].into();
    let pruned = store.incremental_nn(&anchor, &exclude, 6, 1, 2)?;
    println!("incremental: {:?}", pruned.terms().collect::<Vec<_>>());
    assert_eq!(pruned.len(), 4);
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
