//! Pairwise comparison driver and the self-contained report it produces.
//!
//! Every figure can be re-rendered from the report alone, so re-loading a
//! report and re-rendering yields byte-identical SVG output.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::fixtures::FIXTURE_IDS;
use super::svg;
use crate::dimred::{
    pca_project, tsne_project, umap_graph, umap_optimize, PointLabel, Projection2D, TsneConfig,
    UmapConfig,
};
use crate::embedder::{load_backend, Backend, BackendConfig, CodeFragment, EmbeddingMatrix};
use crate::error::Result;
use crate::saliency::{saliency_map, SaliencyVector};
use crate::simcore::{
    attention_product, cosine_matrix, fragment_matrix, Pooling, SimilarityMatrix,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub seed: u64,
    pub pooling: Pooling,
    pub tsne: TsneConfig,
    pub umap: UmapConfig,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            seed: 7,
            pooling: Pooling::GreedyMatch,
            tsne: TsneConfig::default(),
            umap: UmapConfig::default(),
        }
    }
}

/// Backend configuration echo with file paths redacted to basenames.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackendEcho {
    pub kind: String,
    pub seed: Option<u64>,
    pub dim: Option<usize>,
    pub heads: Option<usize>,
    pub model: Option<String>,
    pub tokenizer: Option<String>,
}

impl BackendEcho {
    fn from_config(config: &BackendConfig) -> Self {
        match config {
            BackendConfig::Stub { seed, dim, heads } => Self {
                kind: "stub".into(),
                seed: Some(*seed),
                dim: Some(*dim),
                heads: Some(*heads),
                model: None,
                tokenizer: None,
            },
            BackendConfig::Model {
                model_path,
                tokenizer_path,
            } => {
                let basename = |p: &Path| {
                    p.file_name()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_default()
                };
                Self {
                    kind: "model".into(),
                    seed: None,
                    dim: None,
                    heads: None,
                    model: Some(basename(model_path)),
                    tokenizer: Some(basename(tokenizer_path)),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FragmentInfo {
    pub id: String,
    pub token_count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairAnalysis {
    pub a_id: String,
    pub b_id: String,
    pub cosine: SimilarityMatrix,
    pub attention: SimilarityMatrix,
    pub pca: Projection2D,
    pub tsne: Projection2D,
    pub umap: Projection2D,
    pub saliency_a: SaliencyVector,
    pub saliency_b: SaliencyVector,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub backend: BackendEcho,
    pub pooling: Pooling,
    pub seed: u64,
    pub fragments: Vec<FragmentInfo>,
    pub fragment_matrix: Array2<f64>,
    pub pairs: Vec<PairAnalysis>,
}

struct FragmentData {
    fragment: CodeFragment,
    surfaces: Vec<String>,
    /// Non-special token embeddings.
    embeddings: EmbeddingMatrix,
    /// Attention restricted to non-special positions.
    attention: crate::embedder::AttentionTensor,
}

fn prepare(backend: &dyn Backend, fragment: &CodeFragment) -> Result<FragmentData> {
    let seq = backend.tokenize(fragment)?;
    let indices = seq.code_token_indices();
    let embeddings = backend.embed(&seq, fragment)?.select_rows(&indices);
    let attention = backend.attentions(&seq, fragment)?.restrict(&indices);
    Ok(FragmentData {
        fragment: fragment.clone(),
        surfaces: seq.code_surfaces(),
        embeddings,
        attention,
    })
}

fn analyze_pair(a: &FragmentData, b: &FragmentData, opts: &ReportOptions) -> Result<PairAnalysis> {
    let cosine = cosine_matrix(&a.embeddings, &b.embeddings)?
        .with_labels(a.surfaces.clone(), b.surfaces.clone());
    let attention = attention_product(&a.attention, &b.attention)?
        .with_labels(a.surfaces.clone(), b.surfaces.clone());

    // both fragments' tokens stacked into one joint projection input
    let n_a = a.embeddings.rows();
    let dim = a.embeddings.dim();
    let mut stacked = Array2::zeros((n_a + b.embeddings.rows(), dim));
    for (i, row) in a
        .embeddings
        .values
        .rows()
        .into_iter()
        .chain(b.embeddings.values.rows())
        .enumerate()
    {
        stacked.row_mut(i).assign(&row);
    }
    let labels: Vec<PointLabel> = a
        .surfaces
        .iter()
        .map(|s| PointLabel {
            fragment_id: a.fragment.id.clone(),
            surface: s.clone(),
        })
        .chain(b.surfaces.iter().map(|s| PointLabel {
            fragment_id: b.fragment.id.clone(),
            surface: s.clone(),
        }))
        .collect();

    let pca = pca_project(&stacked, opts.seed)?.with_labels(labels.clone());
    let tsne = tsne_project(&stacked, &opts.tsne, opts.seed)?
        .projection
        .with_labels(labels.clone());
    let graph = umap_graph(&stacked, &opts.umap)?;
    let umap = umap_optimize(&stacked, &graph, &opts.umap, opts.seed)?
        .projection
        .with_labels(labels);

    let (saliency_a, saliency_b) = saliency_map(&a.embeddings, &b.embeddings, opts.pooling)?;
    Ok(PairAnalysis {
        a_id: a.fragment.id.clone(),
        b_id: b.fragment.id.clone(),
        cosine,
        attention,
        pca,
        tsne,
        umap,
        saliency_a,
        saliency_b,
    })
}

/// Analyze every unordered pair of the corpus and assemble the report.
pub fn build_report(
    corpus: &[CodeFragment],
    config: &BackendConfig,
    opts: &ReportOptions,
) -> Result<ComparisonReport> {
    let backend = load_backend(config)?;
    let data: Vec<FragmentData> = corpus
        .iter()
        .map(|f| prepare(backend.as_ref(), f))
        .collect::<Result<_>>()?;

    let embeddings: Vec<EmbeddingMatrix> = data.iter().map(|d| d.embeddings.clone()).collect();
    let matrix = fragment_matrix(&embeddings, opts.pooling)?;

    let mut pairs = Vec::new();
    for i in 0..data.len() {
        for j in (i + 1)..data.len() {
            pairs.push(analyze_pair(&data[i], &data[j], opts)?);
        }
    }

    Ok(ComparisonReport {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        backend: BackendEcho::from_config(config),
        pooling: opts.pooling,
        seed: opts.seed,
        fragments: data
            .iter()
            .map(|d| FragmentInfo {
                id: d.fragment.id.clone(),
                token_count: d.surfaces.len(),
            })
            .collect(),
        fragment_matrix: matrix,
        pairs,
    })
}

fn pair_figures(pair: &PairAnalysis, full: bool) -> Vec<(String, String)> {
    let stem = format!("{}__{}", pair.a_id, pair.b_id);
    let mut out = Vec::new();
    if full {
        out.push((
            format!("{stem}_cosine.svg"),
            svg::render_heatmap(
                &pair.cosine.values,
                &pair.cosine.row_labels,
                &pair.cosine.col_labels,
                &format!("cosine similarity: {} vs {}", pair.a_id, pair.b_id),
            ),
        ));
        out.push((
            format!("{stem}_attention.svg"),
            svg::render_heatmap(
                &pair.attention.values,
                &pair.attention.row_labels,
                &pair.attention.col_labels,
                &format!("attention product: {} vs {}", pair.a_id, pair.b_id),
            ),
        ));
    }
    let title = format!("{} vs {}", pair.a_id, pair.b_id);
    out.push((format!("{stem}_pca.svg"), svg::render_scatter(&pair.pca, &title)));
    out.push((format!("{stem}_tsne.svg"), svg::render_scatter(&pair.tsne, &title)));
    out.push((format!("{stem}_umap.svg"), svg::render_scatter(&pair.umap, &title)));
    out.push((
        format!("{stem}_saliency.svg"),
        svg::render_saliency(
            &pair.saliency_a,
            &pair.cosine.row_labels,
            &pair.saliency_b,
            &pair.cosine.col_labels,
        ),
    ));
    out
}

/// Figures for a `compare` run on exactly one pair: both token heatmaps,
/// three scatters, one saliency render.
pub fn compare_figures(report: &ComparisonReport) -> Vec<(String, String)> {
    report
        .pairs
        .iter()
        .flat_map(|p| pair_figures(p, true))
        .collect()
}

/// Figures for a `report-all` run: one fragment heatmap plus, per pair,
/// three scatters and one saliency render (1 + 3*C(N,2) + C(N,2) files).
pub fn report_all_figures(report: &ComparisonReport) -> Vec<(String, String)> {
    let ids: Vec<String> = report.fragments.iter().map(|f| f.id.clone()).collect();
    let mut out = vec![(
        "fragment_similarity_heatmap.svg".to_string(),
        svg::render_heatmap(&report.fragment_matrix, &ids, &ids, "fragment similarity"),
    )];
    for pair in &report.pairs {
        out.extend(pair_figures(pair, false));
    }
    out
}

/// Serialize the report as pretty JSON with a trailing newline.
pub fn report_to_json(report: &ComparisonReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn report_from_json(json: &str) -> Result<ComparisonReport> {
    Ok(serde_json::from_str(json)?)
}

/// Resolve a CLI input: `fixtures:NAME` or a file path.
pub fn resolve_input(spec: &str) -> Result<CodeFragment> {
    if let Some(name) = spec.strip_prefix("fixtures:") {
        return super::fixtures::fixture(name).ok_or_else(|| {
            crate::error::SimlensError::Usage(format!(
                "unknown fixture `{name}`; available: {}",
                FIXTURE_IDS.join(", ")
            ))
        });
    }
    let path = Path::new(spec);
    let source = std::fs::read_to_string(path)?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| spec.to_string());
    Ok(CodeFragment::new(id, source))
}
