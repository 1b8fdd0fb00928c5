//! Word-embedding query expansion on top of a Jelinek-Mercer language-model
//! retrieval engine, with an RM3 feedback baseline and TREC-style
//! evaluation.
//!
//! The pieces, bottom-up:
//!
//! * [`textpipe`]: tokenizing, SMART stopping, Porter stemming, TREC/JSONL
//!   corpus and topic readers.
//! * [`index`]: immutable inverted index with collection statistics and a
//!   single-file binary format.
//! * [`lm`]: query models and JM-smoothed query-likelihood ranking.
//! * [`embed`]: word2vec text vectors, cosine kNN and the incremental,
//!   iteratively pruned neighbor list.
//! * [`qe`]: extended query term sets (bigram composition), candidate
//!   generation, mean-similarity ranking and the interpolated expanded
//!   query model.
//! * [`rm3`]: relevance-model feedback baseline.
//! * [`eval`]: qrels/run readers, AP, MAP, GMAP, P@k, paired t-test.
//! * [`cli`]: the batch experiment driver behind the `embqe` binary.

pub mod cli;
pub mod embed;
mod error;
pub mod eval;
pub mod index;
pub mod lm;
pub mod qe;
pub mod rm3;
pub mod synthetic;
pub mod textpipe;

pub use error::{Error, Result};
