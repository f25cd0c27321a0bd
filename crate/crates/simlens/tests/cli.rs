//! End-to-end checks of the command-line surface: exit codes, artifact
//! counts, determinism.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simlens"))
}

#[test]
fn compare_emits_report_and_six_figures() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "compare",
            "fixtures:bubble",
            "fixtures:insertion",
            "--backend",
            "stub",
            "--seed",
            "7",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names.iter().filter(|n| n.ends_with(".svg")).count(), 6);
    assert!(names.contains(&"report.json".to_string()));
}

#[test]
fn compare_is_byte_deterministic() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let status = bin()
            .args([
                "compare",
                "fixtures:merge",
                "fixtures:quick",
                "--backend",
                "stub",
                "--seed",
                "7",
                "--out",
            ])
            .arg(dir.path())
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(dirs[0].path().join("report.json")).unwrap();
    let b = std::fs::read(dirs[1].path().join("report.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn missing_model_path_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "compare",
            "fixtures:bubble",
            "fixtures:quick",
            "--backend",
            "model",
            "--model",
            "/nonexistent/model.onnx",
            "--tokenizer",
            "/nonexistent/tokenizer.json",
            "--out",
        ])
        .arg(dir.path())
        .env_remove("SIMLENS_MODEL_DIR")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn unknown_fixture_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["compare", "fixtures:bogo", "fixtures:quick", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn usage_error_exits_2() {
    let status = bin().args(["compare"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn report_all_two_fragments_counts() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "report-all",
            "fixtures:bubble",
            "fixtures:selection",
            "--backend",
            "stub",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    // 1 heatmap + 3 scatters + 1 saliency + report
    assert_eq!(names.len(), 6);
    assert!(names.contains(&"fragment_similarity_heatmap.svg".to_string()));
}

#[test]
fn no_figures_flag_emits_report_only() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "report-all",
            "fixtures:bubble",
            "fixtures:selection",
            "--no-figures",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names, vec!["report.json".to_string()]);
}

#[test]
fn tokenize_prints_token_json() {
    let output = bin().args(["tokenize", "fixtures:bubble"]).output().unwrap();
    assert!(output.status.success());
    let value: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(value["fragment_id"], "bubble_sort");
    assert_eq!(value["tokens"].as_array().unwrap().len(), 72);
}

#[test]
fn project_and_saliency_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args([
            "project",
            "fixtures:bubble",
            "fixtures:quick",
            "--method",
            "pca",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(dir.path().join("bubble_sort__quick_sort_pca.svg").exists());

    let output = bin()
        .args([
            "saliency",
            "fixtures:bubble",
            "fixtures:quick",
            "--pooling",
            "greedy",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(dir.path().join("bubble_sort__quick_sort_saliency.svg").exists());
}
