//! Fixture corpus, pairwise comparison driver, SVG rendering and the
//! machine-readable comparison report.

pub mod fixtures;
pub mod pipeline;
pub mod svg;

pub use fixtures::{fixture, fixture_corpus, FIXTURE_IDS};
pub use pipeline::{
    build_report, compare_figures, report_all_figures, report_from_json, report_to_json,
    resolve_input, ComparisonReport, ReportOptions, SCHEMA_VERSION,
};
pub use svg::{render_heatmap, render_saliency, render_scatter};
