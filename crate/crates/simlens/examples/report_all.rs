//! End-to-end run over the bundled five-sorting-algorithm corpus: fragment
//! similarity matrix, all pairwise analyses, JSON report and every figure.
//!
//! Run with: cargo run --example report_all

use std::fs;
use std::path::Path;

use simlens::embedder::BackendConfig;
use simlens::report::{
    build_report, fixture_corpus, report_all_figures, report_to_json, ReportOptions,
};

fn main() -> simlens::Result<()> {
    let corpus = fixture_corpus();
    let opts = ReportOptions::default();
    let report = build_report(&corpus, &BackendConfig::stub(opts.seed), &opts)?;

    println!("fragment similarity ({:?} pooling):", report.pooling);
    print!("{:>16}", "");
    for f in &report.fragments {
        print!("{:>16}", f.id);
    }
    println!();
    for (i, f) in report.fragments.iter().enumerate() {
        print!("{:>16}", f.id);
        for j in 0..report.fragments.len() {
            print!("{:>16.4}", report.fragment_matrix[[i, j]]);
        }
        println!();
    }

    let out = Path::new("report_out");
    fs::create_dir_all(out)?;
    fs::write(out.join("report.json"), report_to_json(&report)?)?;
    let figures = report_all_figures(&report);
    for (name, svg) in &figures {
        fs::write(out.join(name), svg)?;
    }
    println!("wrote report_out/report.json and {} figures", figures.len());
    Ok(())
}
