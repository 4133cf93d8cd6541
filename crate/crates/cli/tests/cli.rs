use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use toxic_spans::corpus::parse_corpus_str;

const CORPUS: &str = "spans,text\n\
\"[5, 6, 7, 8, 9, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27, 28, 29]\",This bitch is so fucking idiot.\n\
[],Not if they shoot you first...\n\
\"[0, 1, 2, 3, 4]\",idiot move\n";

fn toxspans(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toxspans"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn setup() -> (TempDir, String) {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("gold.csv");
    fs::write(&path, CORPUS).unwrap();
    (dir, path.to_str().unwrap().to_string())
}

fn path_in(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn stats_prints_json() {
    let (_dir, gold) = setup();
    let v = json(&toxspans(&["stats", &gold]));
    assert_eq!(v["record_count"], 3);
    assert_eq!(v["jaccard_histogram"].as_array().unwrap().len(), 20);
}

#[test]
fn eval_of_gold_against_itself_is_perfect() {
    let (dir, gold) = setup();
    let pred = path_in(&dir, "p.tsv");
    fs::write(&pred, "0\t[5, 6, 7, 8, 9, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27, 28, 29]\n1\t[]\n2\t[0, 1, 2, 3, 4]\n")
        .unwrap();
    let v = json(&toxspans(&["eval", "--pred", &pred, "--gold", &gold]));
    assert_eq!(v["mean_f1"], 1.0);
}

#[test]
fn split_output_has_one_range_per_post() {
    let (dir, gold) = setup();
    let out = path_in(&dir, "split.csv");
    assert!(toxspans(&["split", &gold, &out]).status.success());
    let c = parse_corpus_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(c.len(), 4);
    assert!(c.iter().all(|p| p.gold.ranges().len() <= 1));
    assert_eq!(c.get(0).unwrap().text, "This bitch is so.");
}

#[test]
fn input_errors_exit_with_one() {
    let (dir, gold) = setup();
    let missing = path_in(&dir, "nope.csv");
    assert_eq!(toxspans(&["stats", &missing]).status.code(), Some(1));

    let bad = path_in(&dir, "bad.csv");
    fs::write(&bad, "spans,text\n[99],short\n").unwrap();
    assert_eq!(toxspans(&["stats", &bad]).status.code(), Some(1));

    let pred = path_in(&dir, "p.tsv");
    fs::write(&pred, "0\t[1]\n").unwrap();
    let out = toxspans(&["eval", "--pred", &pred, "--gold", &gold]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());

    assert_eq!(
        toxspans(&["stats", &gold, "--bogus"]).status.code(),
        Some(1)
    );
    assert_eq!(
        toxspans(&["kfold", &gold, "-k", "9", "--out-dir", &path_in(&dir, "f")])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn help_exits_zero() {
    assert_eq!(toxspans(&["--help"]).status.code(), Some(0));
}

#[test]
fn train_predict_eval_round_trip() {
    let (dir, gold) = setup();
    let (gate, lex, pred) = (
        path_in(&dir, "g.json"),
        path_in(&dir, "l.json"),
        path_in(&dir, "p.tsv"),
    );
    assert!(toxspans(&[
        "train",
        "--gate",
        &gold,
        "--out",
        &gate,
        "--hash-buckets",
        "4096"
    ])
    .status
    .success());
    assert!(toxspans(&[
        "train",
        "--lexicon",
        &gold,
        "--out",
        &lex,
        "--min-count",
        "1"
    ])
    .status
    .success());
    let out = toxspans(&[
        "predict",
        "--gate",
        &gate,
        "--lexicon",
        &lex,
        &gold,
        "--out",
        &pred,
        "--jobs",
        "2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&toxspans(&["eval", "--pred", &pred, "--gold", &gold]));
    assert_eq!(v["per_post"].as_array().unwrap().len(), 3);

    // Neither model kind is accepted in place of the other.
    let swapped = toxspans(&[
        "predict",
        "--gate",
        &lex,
        "--lexicon",
        &gate,
        &gold,
        "--out",
        &pred,
    ]);
    assert_eq!(swapped.status.code(), Some(1));
}

#[test]
fn subcommands_are_deterministic() {
    let (dir, gold) = setup();
    let run = |tag: &str| {
        let (gate, base, folds) = (
            path_in(&dir, &format!("g{tag}.json")),
            path_in(&dir, &format!("b{tag}.tsv")),
            path_in(&dir, &format!("k{tag}")),
        );
        assert!(toxspans(&[
            "train",
            "--gate",
            &gold,
            "--out",
            &gate,
            "--seed",
            "5",
            "--hash-buckets",
            "1024"
        ])
        .status
        .success());
        assert!(
            toxspans(&["baseline", &gold, "--out", &base, "--seed", "5"])
                .status
                .success()
        );
        assert!(toxspans(&[
            "kfold",
            &gold,
            "-k",
            "3",
            "--seed",
            "5",
            "--out-dir",
            &folds
        ])
        .status
        .success());
        let audit = toxspans(&["audit", &gold]).stdout;
        let read = |p: &str| fs::read(Path::new(p)).unwrap();
        (
            read(&gate),
            read(&base),
            read(&format!("{folds}/folds.json")),
            audit,
        )
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn ner_export_writes_json_lines() {
    let (dir, gold) = setup();
    let out = path_in(&dir, "ner.jsonl");
    assert!(toxspans(&["export-ner", &gold, &out]).status.success());
    let lines: Vec<serde_json::Value> = fs::read_to_string(&out)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0]["entities"][0], serde_json::json!([5, 10, "TOXIC"]));
}
