use std::collections::BTreeMap;
use std::path::Path;

use midib_deid::cli::run_with;
use midib_deid::reports::{
    read_run_summary, ACTIONS_FILE, CATEGORIES_FILE, DISCREPANCY_FILE, SCORING_FILE, SUMMARY_FILE,
};
use walkdir::WalkDir;

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("midib").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    WalkDir::new(root)
        .into_iter()
        .map(Result::unwrap)
        .filter(|e| e.file_type().is_file())
        .map(|e| {
            let rel = e.path().strip_prefix(root).unwrap().display().to_string();
            (rel, std::fs::read(e.path()).unwrap())
        })
        .collect()
}

struct Run {
    _dir: tempfile::TempDir,
    corpus: std::path::PathBuf,
    sub: std::path::PathBuf,
    root: std::path::PathBuf,
}

fn generate_and_deid(seed: &str) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let corpus = root.join("corpus");
    let sub = root.join("sub");
    let (code, _, err) = call(&["gen-corpus", "--out", s(&corpus), "--seed", seed, "--patients", "4"]);
    assert_eq!(code, 0, "{err}");
    let (code, _, err) = call(&["deid", "--in", s(&corpus), "--out", s(&sub), "--seed", seed]);
    assert_eq!(code, 0, "{err}");
    Run { _dir: dir, corpus, sub, root }
}

fn score_args<'a>(r: &'a Run, out: &'a Path, mode: &'a str) -> Vec<String> {
    [
        "score",
        "--key",
        s(&r.corpus.join("key.csv")),
        "--orig",
        s(&r.corpus),
        "--sub",
        s(&r.sub),
        "--patid-map",
        s(&r.sub.join("patid.csv")),
        "--uid-map",
        s(&r.sub.join("uid.csv")),
        "--mode",
        mode,
        "--out",
        s(out),
    ]
    .iter()
    .map(|a| a.to_string())
    .collect()
}

fn call_owned(args: &[String]) -> (i32, String, String) {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    call(&refs)
}

#[test]
fn full_pipeline_scores_perfectly_and_reports() {
    let r = generate_and_deid("21");
    for mode in ["series", "instance"] {
        let out = r.root.join(format!("report-{mode}"));
        let (code, stdout, err) = call_owned(&score_args(&r, &out, mode));
        assert_eq!(code, 0, "{err}");
        assert!(stdout.contains("overall=100.00% normalized=100.00%"), "{stdout}");
        for f in [SCORING_FILE, ACTIONS_FILE, CATEGORIES_FILE, DISCREPANCY_FILE, SUMMARY_FILE] {
            assert!(out.join(f).is_file(), "{f} missing");
        }
        let discrepancy = std::fs::read_to_string(out.join(DISCREPANCY_FILE)).unwrap();
        assert_eq!(discrepancy.lines().count(), 1);
        let summary = read_run_summary(&out).unwrap();
        assert_eq!(summary.errors, 0);

        let (code, shown, _) = call(&["report", "--run", s(&out)]);
        assert_eq!(code, 0);
        assert!(shown.contains("overall=100.00%"), "{shown}");
    }
}

#[test]
fn generation_and_deid_are_deterministic() {
    let a = generate_and_deid("9");
    let b = generate_and_deid("9");
    assert_eq!(snapshot(&a.corpus), snapshot(&b.corpus));
    assert_eq!(snapshot(&a.sub), snapshot(&b.sub));

    let again = a.root.join("sub-single");
    let (code, _, err) = call(&["deid", "--in", s(&a.corpus), "--out", s(&again), "--seed", "9", "--jobs", "1"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(snapshot(&a.sub), snapshot(&again));
}

#[test]
fn truth_maps_match_deid_maps() {
    let r = generate_and_deid("3");
    for (truth, produced) in [("truth_patid.csv", "patid.csv"), ("truth_uid.csv", "uid.csv")] {
        assert_eq!(
            std::fs::read(r.corpus.join(truth)).unwrap(),
            std::fs::read(r.sub.join(produced)).unwrap()
        );
    }
}

#[test]
fn missing_original_is_a_configuration_error() {
    let r = generate_and_deid("4");
    let victim = WalkDir::new(&r.corpus)
        .into_iter()
        .map(Result::unwrap)
        .find(|e| e.path().extension().is_some_and(|x| x == "dcm"))
        .unwrap();
    std::fs::remove_file(victim.path()).unwrap();
    let (code, _, err) = call_owned(&score_args(&r, &r.root.join("out"), "series"));
    assert_eq!(code, 4, "{err}");
}

#[test]
fn missing_submission_file_lowers_the_score() {
    let r = generate_and_deid("5");
    let victim = WalkDir::new(&r.sub)
        .into_iter()
        .map(Result::unwrap)
        .find(|e| e.path().extension().is_some_and(|x| x == "dcm"))
        .unwrap();
    std::fs::remove_file(victim.path()).unwrap();
    let out = r.root.join("out");
    let (code, stdout, err) = call_owned(&score_args(&r, &out, "instance"));
    assert_eq!(code, 0, "{err}");
    assert!(!stdout.contains("overall=100.00%"), "{stdout}");
    let summary = read_run_summary(&out).unwrap();
    assert_eq!(summary.missing_instances.len(), 1);
    assert!(summary.errors > 0);
}

#[test]
fn malformed_key_is_a_data_error() {
    let r = generate_and_deid("6");
    std::fs::write(r.corpus.join("key.csv"), "index,bogus\n0,1\n").unwrap();
    let (code, _, _) = call_owned(&score_args(&r, &r.root.join("out"), "series"));
    assert_eq!(code, 3);
}

#[test]
fn weights_are_validated() {
    let r = generate_and_deid("8");
    let out = r.root.join("out");
    let weights = r.root.join("w.csv");
    std::fs::write(&weights, "action,weight\ntext_removed,0.5\ntext_retained,0.5\n").unwrap();
    let mut args = score_args(&r, &out, "series");
    args.extend(["--weights".to_string(), s(&weights).to_string()]);
    let (code, stdout, err) = call_owned(&args);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("weighted=100.00%"), "{stdout}");

    std::fs::write(&weights, "action,weight\ntext_removed,0.7\n").unwrap();
    assert_ne!(call_owned(&args).0, 0);
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(call(&["gen-corpus"]).0, 2);
    assert_eq!(call(&["score", "--mode", "study"]).0, 2);
    assert_eq!(call(&["report", "--run", "/no/such/run"]).0, 2);
}
