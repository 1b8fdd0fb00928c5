//! Seeded synthetic test collections.
//!
//! Each topic owns a small cluster in embedding space holding its two query
//! words and a handful of synonyms. Relevant documents are written mostly
//! (for the first topic, only) with synonyms, while distractor documents
//! repeat a query word without being relevant. A bag-of-words ranker
//! therefore misses relevant documents that embedding-based expansion can
//! recover.

use std::collections::HashSet;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::embed::EmbeddingStore;
use crate::eval::Qrels;
use crate::textpipe::{porter_stem, write_jsonl_docs, RawDocument, Stoplist};
use crate::Result;

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub dim: usize,
    pub topics: usize,
    pub synonyms_per_topic: usize,
    pub relevant_per_topic: usize,
    /// Relevant documents per topic that also contain a query word; the
    /// first topic never gets any.
    pub relevant_with_query_terms: usize,
    pub distractors_per_topic: usize,
    pub filler_docs: usize,
    pub filler_vocabulary: usize,
    pub doc_len: usize,
    /// Per-dimension standard deviation around a topic centroid.
    pub cluster_spread: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 7,
            dim: 32,
            topics: 5,
            synonyms_per_topic: 5,
            relevant_per_topic: 6,
            relevant_with_query_terms: 2,
            distractors_per_topic: 4,
            filler_docs: 20,
            filler_vocabulary: 300,
            doc_len: 30,
            cluster_spread: 0.05,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticTopic {
    pub query_id: String,
    pub title: String,
    pub query_words: Vec<String>,
    pub synonyms: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SyntheticCollection {
    pub docs: Vec<RawDocument>,
    pub topics: Vec<SyntheticTopic>,
    pub qrels: Qrels,
    pub vectors: EmbeddingStore,
}

/// Paths written by [`SyntheticCollection::write_to`].
#[derive(Debug, Clone)]
pub struct SyntheticFiles {
    pub corpus: PathBuf,
    pub topics: PathBuf,
    pub qrels: PathBuf,
    pub vectors: PathBuf,
}

/// Pronounceable made-up words that the analyzer leaves untouched.
struct WordSource {
    used: HashSet<String>,
    stop: Stoplist,
}

impl WordSource {
    fn next(&mut self, rng: &mut ChaCha8Rng) -> String {
        const ONSETS: &[&str] = &[
            "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "t", "v", "z",
        ];
        const VOWELS: &[&str] = &["a", "o", "u"];
        const CODAS: &[&str] = &["k", "p", "b", "m", "n", "t"];
        loop {
            let syllables = rng.gen_range(2..=3);
            let mut w = String::new();
            for _ in 0..syllables {
                w.push_str(ONSETS.choose(rng).unwrap());
                w.push_str(VOWELS.choose(rng).unwrap());
            }
            w.push_str(CODAS.choose(rng).unwrap());
            if porter_stem(&w) == w && !self.stop.contains(&w) && self.used.insert(w.clone()) {
                return w;
            }
        }
    }
}

fn noisy(center: &[f64], spread: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    center
        .iter()
        .map(|c| c + spread * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn random_direction(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

impl SyntheticCollection {
    pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticCollection> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut words = WordSource {
            used: HashSet::new(),
            stop: Stoplist::smart(),
        };
        let mut vectors = EmbeddingStore::new(cfg.dim);

        let filler: Vec<String> = (0..cfg.filler_vocabulary)
            .map(|_| words.next(&mut rng))
            .collect();
        for w in &filler {
            vectors.insert(w.clone(), &random_direction(cfg.dim, &mut rng))?;
        }

        let mut topics = Vec::with_capacity(cfg.topics);
        for t in 0..cfg.topics {
            let centroid = random_direction(cfg.dim, &mut rng);
            let query_words: Vec<String> = (0..2).map(|_| words.next(&mut rng)).collect();
            let synonyms: Vec<String> = (0..cfg.synonyms_per_topic)
                .map(|_| words.next(&mut rng))
                .collect();
            for w in query_words.iter().chain(&synonyms) {
                vectors.insert(w.clone(), &noisy(&centroid, cfg.cluster_spread, &mut rng))?;
            }
            topics.push(SyntheticTopic {
                query_id: (401 + t).to_string(),
                title: query_words.join(" "),
                query_words,
                synonyms,
            });
        }

        let mut docs = Vec::new();
        let mut qrels = Qrels::default();
        let filler_text = |rng: &mut ChaCha8Rng, n: usize| -> Vec<String> {
            (0..n)
                .map(|_| filler.choose(rng).unwrap().clone())
                .collect()
        };
        for (t, topic) in topics.iter().enumerate() {
            for r in 0..cfg.relevant_per_topic {
                let mut body = filler_text(&mut rng, cfg.doc_len);
                for _ in 0..8 {
                    body.push(topic.synonyms.choose(&mut rng).unwrap().clone());
                }
                if t > 0 && r < cfg.relevant_with_query_terms {
                    body.push(topic.query_words[r % 2].clone());
                }
                body.shuffle(&mut rng);
                let doc_id = format!("T{t}-REL-{r:02}");
                qrels.insert(&topic.query_id, &doc_id, 1);
                docs.push(RawDocument {
                    doc_id,
                    text: body.join(" "),
                });
            }
            for d in 0..cfg.distractors_per_topic {
                let mut body = filler_text(&mut rng, cfg.doc_len);
                body.push(topic.query_words[d % 2].clone());
                body.push(topic.query_words[d % 2].clone());
                body.shuffle(&mut rng);
                let doc_id = format!("T{t}-DIS-{d:02}");
                qrels.insert(&topic.query_id, &doc_id, 0);
                docs.push(RawDocument {
                    doc_id,
                    text: body.join(" "),
                });
            }
        }
        for f in 0..cfg.filler_docs {
            docs.push(RawDocument {
                doc_id: format!("FILL-{f:03}"),
                text: filler_text(&mut rng, cfg.doc_len).join(" "),
            });
        }
        docs.shuffle(&mut rng);

        Ok(SyntheticCollection {
            docs,
            topics,
            qrels,
            vectors,
        })
    }

    /// Topics in TREC `<top>` format.
    pub fn topics_sgml(&self) -> String {
        self.topics
            .iter()
            .map(|t| {
                format!(
                    "<top>\n<num> Number: {}\n<title> {}\n\n<desc> Description:\nsynthetic topic\n</top>\n\n",
                    t.query_id, t.title
                )
            })
            .collect()
    }

    /// Writes `corpus.jsonl`, `topics.txt`, `qrels.txt` and `vectors.txt`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<SyntheticFiles> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let files = SyntheticFiles {
            corpus: dir.join("corpus.jsonl"),
            topics: dir.join("topics.txt"),
            qrels: dir.join("qrels.txt"),
            vectors: dir.join("vectors.txt"),
        };
        write_jsonl_docs(&self.docs, BufWriter::new(fs::File::create(&files.corpus)?))?;
        fs::write(&files.topics, self.topics_sgml())?;
        let mut qrels = Vec::new();
        self.qrels.write(&mut qrels)?;
        fs::write(&files.qrels, qrels)?;
        let mut vectors = Vec::new();
        self.vectors.write_vectors(&mut vectors)?;
        fs::write(&files.vectors, vectors)?;
        Ok(files)
    }
}
