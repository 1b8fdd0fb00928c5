//! `embqe` command-line front end.
//!
//! Word vectors are trained outside this tool: run `dump-corpus` and feed
//! the result to word2vec, e.g. `-size 200 -window 5 -cbow 1 -negative 5
//! -min-count 3`, then pass the text-format output to `--vectors`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use embqe::cli::{self, ExperimentConfig, GridAxis};
use embqe::eval;
use embqe::index::Index;

#[derive(Parser)]
#[command(
    name = "embqe",
    version,
    about = "Query expansion with word embeddings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a TREC SGML or JSONL corpus and write a binary index.
    BuildIndex {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// One stopword per line; defaults to the SMART list.
        #[arg(long)]
        stoplist: Option<PathBuf>,
    },
    /// Write the analyzed corpus, one document per line, for embedding training.
    DumpCorpus {
        #[arg(long)]
        index: PathBuf,
        /// Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Retrieve a run for a topic set, optionally expanding queries.
    Search(SearchArgs),
    /// Score a run against qrels.
    Evaluate {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        qrels: PathBuf,
        #[arg(long, default_value_t = eval::DEFAULT_CUTOFF)]
        k: usize,
        /// Per-query metrics as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Grid search over search parameters, ranked by MAP.
    Sweep {
        #[command(flatten)]
        search: SearchArgs,
        /// Axis such as `alpha=0.5..0.7 step 0.05` or `K=10,20,30`; repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
        /// File with one axis per line.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, default_value_t = eval::DEFAULT_CUTOFF)]
        k: usize,
        /// Result table (tab-separated); defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Paired t-test on per-query AP of two runs.
    Compare {
        /// Usually the expanded run.
        #[arg(long)]
        run_a: PathBuf,
        /// Usually the baseline.
        #[arg(long)]
        run_b: PathBuf,
        #[arg(long)]
        qrels: PathBuf,
        #[arg(long, default_value_t = eval::DEFAULT_CUTOFF)]
        k: usize,
        /// two-sided, greater (A better) or less.
        #[arg(long, default_value = "two-sided")]
        alternative: String,
        /// Per-query AP differences as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// Settings shared by `search` and `sweep`. Flags override the config file.
#[derive(Args)]
struct SearchArgs {
    /// `key = value` file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    index: Option<String>,
    #[arg(long)]
    vectors: Option<String>,
    #[arg(long)]
    topics: Option<String>,
    #[arg(long)]
    qrels: Option<String>,
    /// Output run file.
    #[arg(long)]
    run: Option<String>,
    #[arg(long)]
    stoplist: Option<String>,
    /// Expanded query models as JSONL.
    #[arg(long)]
    expansions: Option<String>,
    /// none, pre, post, incremental or rm3.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    /// Number of expansion terms.
    #[arg(short = 'K', long = "terms")]
    terms: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    fb_docs: Option<String>,
    #[arg(long)]
    composition: Option<String>,
    #[arg(long)]
    n_per_unit: Option<String>,
    #[arg(long)]
    n_initial: Option<String>,
    #[arg(long)]
    prune_k: Option<String>,
    /// Pruning iterations.
    #[arg(short = 'l', long = "iterations")]
    iterations: Option<String>,
    /// Retrieval depth.
    #[arg(long)]
    depth: Option<String>,
    #[arg(long)]
    tag: Option<String>,
    /// RM3 weight on the original query.
    #[arg(long)]
    mix: Option<String>,
}

impl SearchArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)
                .with_context(|| format!("reading {}", p.display()))?,
            None => ExperimentConfig::default(),
        };
        let overrides = [
            ("index", &self.index),
            ("vectors", &self.vectors),
            ("topics", &self.topics),
            ("qrels", &self.qrels),
            ("run", &self.run),
            ("stoplist", &self.stoplist),
            ("expansions", &self.expansions),
            ("method", &self.method),
            ("lambda", &self.lambda),
            ("K", &self.terms),
            ("alpha", &self.alpha),
            ("fb_docs", &self.fb_docs),
            ("composition", &self.composition),
            ("n_per_unit", &self.n_per_unit),
            ("n_initial", &self.n_initial),
            ("prune_k", &self.prune_k),
            ("l", &self.iterations),
            ("depth", &self.depth),
            ("tag", &self.tag),
            ("mix", &self.mix),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(cfg)
    }
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BuildIndex {
            corpus,
            out,
            stoplist,
        } => {
            let analyzer = cli::load_analyzer(stoplist.as_deref())?;
            let summary = cli::build_index(&corpus, &out, &analyzer)?;
            println!("{summary}");
        }
        Command::DumpCorpus { index, out } => {
            let index =
                Index::load(&index).with_context(|| format!("loading {}", index.display()))?;
            cli::dump_corpus(&index, output(out.as_ref())?)?;
        }
        Command::Search(args) => {
            let cfg = args.config()?;
            let outcome = cli::search(&cfg)?;
            eprintln!(
                "{} queries searched, {} unexpanded",
                outcome.runs.len(),
                outcome.fallbacks()
            );
        }
        Command::Evaluate { run, qrels, k, csv } => {
            let report = cli::evaluate(&run, &qrels, k)?;
            println!("{}", cli::format_report(&report));
            if let Some(p) = csv {
                report.write_csv(File::create(&p)?)?;
            }
        }
        Command::Sweep {
            search,
            params,
            grid,
            k,
            out,
        } => {
            let cfg = search.config()?;
            let mut axes = match &grid {
                Some(p) => cli::read_grid(p)?,
                None => Vec::new(),
            };
            for p in &params {
                axes.push(p.parse::<GridAxis>()?);
            }
            let index_path = cfg.index.as_ref().context("sweep needs --index")?;
            let index = Index::load(index_path)?;
            let analyzer = cfg.analyzer()?;
            let topics = cli::read_topics(
                cfg.topics.as_ref().context("sweep needs --topics")?,
                &analyzer,
            )?;
            let qrels = cli::read_qrels(cfg.qrels.as_ref().context("sweep needs --qrels")?)?;
            let store = cfg
                .vectors
                .as_ref()
                .map(|p| cli::load_vectors(p))
                .transpose()?;
            let rows = cli::sweep(&cfg, &axes, &index, store.as_ref(), &topics, &qrels, k)?;
            let mut w = output(out.as_ref())?;
            cli::write_sweep_table(&rows, k, &mut w)?;
            w.flush()?;
        }
        Command::Compare {
            run_a,
            run_b,
            qrels,
            k,
            alternative,
            csv,
        } => {
            let cmp = cli::compare(&run_a, &run_b, &qrels, k, alternative.parse()?)?;
            println!("{cmp}");
            if let Some(p) = csv {
                eval::write_ap_differences_csv(&cmp.differences, File::create(&p)?)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
