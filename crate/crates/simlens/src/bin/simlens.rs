//! Command-line interface: thin argument handling around the library.
//!
//! Exit codes: 0 success, 2 usage error, 3 backend load failure,
//! 4 compute error. Diagnostics go to standard error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use simlens::dimred::ProjectionMethod;
use simlens::embedder::{load_backend, BackendConfig, MODEL_DIR_ENV};
use simlens::report::{
    build_report, compare_figures, fixture_corpus, report_all_figures, report_to_json,
    resolve_input, ReportOptions,
};
use simlens::simcore::Pooling;
use simlens::SimlensError;

#[derive(Parser)]
#[command(name = "simlens", version, about = "Interpretable code-fragment similarity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Stub,
    Model,
}

#[derive(Clone, Copy, ValueEnum)]
enum PoolingArg {
    Mean,
    Greedy,
}

impl From<PoolingArg> for Pooling {
    fn from(p: PoolingArg) -> Self {
        match p {
            PoolingArg::Mean => Pooling::MeanPoolCosine,
            PoolingArg::Greedy => Pooling::GreedyMatch,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Pca,
    Tsne,
    Umap,
}

#[derive(Args)]
struct BackendArgs {
    /// Embedding backend
    #[arg(long, value_enum, default_value = "stub")]
    backend: BackendKind,

    /// Serialized transformer graph (ONNX); defaults to model.onnx under
    /// SIMLENS_MODEL_DIR
    #[arg(long)]
    model: Option<PathBuf>,

    /// Subword tokenizer definition file; defaults to tokenizer.json under
    /// SIMLENS_MODEL_DIR
    #[arg(long)]
    tokenizer: Option<PathBuf>,

    /// Seed for the stub backend and the projections
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

impl BackendArgs {
    fn config(&self) -> BackendConfig {
        match self.backend {
            BackendKind::Stub => BackendConfig::stub(self.seed),
            BackendKind::Model => {
                let dir = std::env::var(MODEL_DIR_ENV).unwrap_or_default();
                let dir = PathBuf::from(dir);
                BackendConfig::Model {
                    model_path: self
                        .model
                        .clone()
                        .unwrap_or_else(|| dir.join("model.onnx")),
                    tokenizer_path: self
                        .tokenizer
                        .clone()
                        .unwrap_or_else(|| dir.join("tokenizer.json")),
                }
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize one input and print the token sequence as JSON
    Tokenize {
        /// `fixtures:NAME` or a file path
        input: String,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Compare two inputs: report plus six figures
    Compare {
        a: String,
        b: String,
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long, value_enum, default_value = "greedy")]
        pooling: PoolingArg,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Emit the report only
        #[arg(long)]
        no_figures: bool,
    },
    /// Full pairwise driver over a corpus (default: the five fixtures)
    ReportAll {
        /// Inputs (`fixtures:NAME` or file paths); default all fixtures
        inputs: Vec<String>,
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long, value_enum, default_value = "greedy")]
        pooling: PoolingArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        no_figures: bool,
    },
    /// Project one pair's token embeddings to 2-D and write the scatter
    Project {
        a: String,
        b: String,
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long, value_enum, default_value = "pca")]
        method: MethodArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-token saliency for one pair; writes the render, prints JSON
    Saliency {
        a: String,
        b: String,
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long, value_enum, default_value = "greedy")]
        pooling: PoolingArg,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code_for(err: &SimlensError) -> u8 {
    match err {
        SimlensError::Usage(_) => 2,
        SimlensError::TokenizerLoad(_)
        | SimlensError::ModelLoad(_)
        | SimlensError::AttentionUnavailable(_) => 3,
        _ => 4,
    }
}

fn write_figures(out: &PathBuf, figures: &[(String, String)]) -> simlens::Result<()> {
    std::fs::create_dir_all(out)?;
    for (name, svg) in figures {
        std::fs::write(out.join(name), svg)?;
    }
    Ok(())
}

fn run(cli: Cli) -> simlens::Result<()> {
    match cli.command {
        Command::Tokenize { input, backend } => {
            let fragment = resolve_input(&input)?;
            let be = load_backend(&backend.config())?;
            let seq = be.tokenize(&fragment)?;
            println!("{}", serde_json::to_string_pretty(&seq).map_err(SimlensError::Json)?);
        }
        Command::Compare {
            a,
            b,
            backend,
            pooling,
            out,
            no_figures,
        } => {
            let corpus = vec![resolve_input(&a)?, resolve_input(&b)?];
            let opts = ReportOptions {
                seed: backend.seed,
                pooling: pooling.into(),
                ..ReportOptions::default()
            };
            let report = build_report(&corpus, &backend.config(), &opts)?;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("report.json"), report_to_json(&report)?)?;
            if !no_figures {
                write_figures(&out, &compare_figures(&report))?;
            }
        }
        Command::ReportAll {
            inputs,
            backend,
            pooling,
            out,
            no_figures,
        } => {
            let corpus = if inputs.is_empty() {
                fixture_corpus()
            } else {
                inputs
                    .iter()
                    .map(|s| resolve_input(s))
                    .collect::<simlens::Result<Vec<_>>>()?
            };
            if corpus.len() < 2 {
                return Err(SimlensError::Usage(
                    "report-all needs at least 2 inputs".into(),
                ));
            }
            let opts = ReportOptions {
                seed: backend.seed,
                pooling: pooling.into(),
                ..ReportOptions::default()
            };
            let report = build_report(&corpus, &backend.config(), &opts)?;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("report.json"), report_to_json(&report)?)?;
            if !no_figures {
                write_figures(&out, &report_all_figures(&report))?;
            }
        }
        Command::Project {
            a,
            b,
            backend,
            method,
            out,
        } => {
            let corpus = vec![resolve_input(&a)?, resolve_input(&b)?];
            let opts = ReportOptions {
                seed: backend.seed,
                ..ReportOptions::default()
            };
            let report = build_report(&corpus, &backend.config(), &opts)?;
            let pair = &report.pairs[0];
            let (projection, name) = match method {
                MethodArg::Pca => (&pair.pca, ProjectionMethod::Pca),
                MethodArg::Tsne => (&pair.tsne, ProjectionMethod::Tsne),
                MethodArg::Umap => (&pair.umap, ProjectionMethod::Umap),
            };
            std::fs::create_dir_all(&out)?;
            let file = format!("{}__{}_{}.svg", pair.a_id, pair.b_id, name);
            let title = format!("{} vs {}", pair.a_id, pair.b_id);
            std::fs::write(
                out.join(file),
                simlens::report::render_scatter(projection, &title),
            )?;
            println!(
                "{}",
                serde_json::to_string_pretty(projection).map_err(SimlensError::Json)?
            );
        }
        Command::Saliency {
            a,
            b,
            backend,
            pooling,
            out,
        } => {
            let corpus = vec![resolve_input(&a)?, resolve_input(&b)?];
            let opts = ReportOptions {
                seed: backend.seed,
                pooling: pooling.into(),
                ..ReportOptions::default()
            };
            let report = build_report(&corpus, &backend.config(), &opts)?;
            let pair = &report.pairs[0];
            std::fs::create_dir_all(&out)?;
            let file = format!("{}__{}_saliency.svg", pair.a_id, pair.b_id);
            std::fs::write(
                out.join(file),
                simlens::report::render_saliency(
                    &pair.saliency_a,
                    &pair.cosine.row_labels,
                    &pair.saliency_b,
                    &pair.cosine.col_labels,
                ),
            )?;
            println!(
                "{}",
                serde_json::to_string_pretty(&(&pair.saliency_a, &pair.saliency_b))
                    .map_err(SimlensError::Json)?
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
