use std::path::Path;
use std::process::{Command, Output};

use pivotree::{parse_corpus, resolve_query};
use pivotree_core::brute_force_topk;

fn pivotree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pivotree")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = pivotree(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// `(doc_id, similarity)` lines followed by a `scored=.. pruned=..` line.
fn parse_hits(stdout: &str) -> (Vec<(String, f64)>, usize, usize) {
    let mut hits = Vec::new();
    let mut counts = (0, 0);
    for line in stdout.lines() {
        if let Some(rest) = line.strip_prefix("scored=") {
            let (scored, pruned) = rest.split_once(" pruned=").unwrap();
            counts = (scored.parse().unwrap(), pruned.parse().unwrap());
        } else {
            let f: Vec<&str> = line.split('\t').collect();
            hits.push((f[1].to_string(), f[2].parse().unwrap()));
        }
    }
    (hits, counts.0, counts.1)
}

fn small_corpus(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let corpus = dir.join("corpus.txt");
    let queries = dir.join("queries.txt");
    ok(&["gen", "--docs", "400", "--vocab", "800", "--avg-len", "30", "--seed", "7", "--out", s(&corpus)]);
    ok(&[
        "gen",
        "--docs",
        "20",
        "--vocab",
        "800",
        "--avg-len",
        "30",
        "--seed",
        "70",
        "--prefix",
        "q",
        "--out",
        s(&queries),
    ]);
    (corpus, queries)
}

#[test]
fn document_finds_itself() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, _) = small_corpus(dir.path());
    for kind in ["mta", "mip"] {
        let index = dir.path().join(format!("{kind}.idx"));
        ok(&["build", "--corpus", s(&corpus), "--out", s(&index), "--type", kind, "--leaf", "16", "--seed", "3"]);
        for doc in ["d0", "d123", "d399"] {
            let out = ok(&["search", "--index", s(&index), "--corpus", s(&corpus), "--query", doc, "--k", "1"]);
            let (hits, scored, pruned) = parse_hits(&out);
            assert_eq!(hits.len(), 1);
            assert_eq!(hits[0].0, doc);
            assert!((hits[0].1 - 1.0).abs() <= 1e-9, "{}", hits[0].1);
            assert_eq!(scored + pruned, 400);
        }
    }
}

#[test]
fn exact_search_agrees_with_brute_force() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus_path, _) = small_corpus(dir.path());
    let index = dir.path().join("mta.idx");
    ok(&["build", "--corpus", s(&corpus_path), "--out", s(&index)]);
    let corpus = parse_corpus(&corpus_path).unwrap();
    for query in ["t0 t5 t17 t300", "t2:3 t40", "d57", "0:1 3:0.5 10:0.25"] {
        let out = ok(&["search", "--index", s(&index), "--corpus", s(&corpus_path), "--query", query, "--k", "10"]);
        let (hits, _, _) = parse_hits(&out);
        let q = resolve_query(query, &corpus, None).unwrap();
        let truth = brute_force_topk(&corpus, &q, 10).unwrap();
        let ids: Vec<&str> = truth.iter().map(|h| corpus.id(h.doc)).collect();
        assert_eq!(hits.iter().map(|h| h.0.as_str()).collect::<Vec<_>>(), ids, "query {query:?}");
        for (got, want) in hits.iter().zip(&truth) {
            assert!((got.1 - want.similarity).abs() <= 1e-9);
        }
    }
}

#[test]
fn eval_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, queries) = small_corpus(dir.path());
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(format!("{run}.csv"));
        ok(&[
            "eval",
            "--corpus",
            s(&corpus),
            "--queries",
            s(&queries),
            "--k",
            "5",
            "--gammas",
            "1.0,0.7,0.4",
            "--seed",
            "5",
            "--out",
            s(&out),
        ]);
        let read = |name: String| std::fs::read(dir.path().join(name)).unwrap();
        outputs.push([read(format!("{run}.csv")), read(format!("{run}.summary.csv")), read(format!("{run}.meta.txt"))]);
    }
    assert_eq!(outputs[0], outputs[1]);
    let rows = String::from_utf8(outputs[0][0].clone()).unwrap();
    assert!(rows.starts_with("method,gamma,query_id,precision,spearman,prune_fraction,scored\n"));
    assert_eq!(rows.lines().count(), 1 + 3 * 3 * 20);
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, queries) = small_corpus(dir.path());
    let mip = dir.path().join("mip.idx");
    ok(&["build", "--corpus", s(&corpus), "--out", s(&mip), "--type", "mip"]);
    let out = dir.path().join("r.csv");
    let cases: Vec<Vec<&str>> = vec![
        vec!["search", "--index", "missing.idx", "--corpus", s(&corpus), "--query", "d1"],
        vec!["search", "--index", s(&mip), "--corpus", s(&corpus), "--query", "d1", "--gamma", "1.5"],
        vec!["search", "--index", s(&mip), "--corpus", s(&corpus), "--query", "d1", "--bound", "heuristic"],
        vec!["search", "--index", s(&mip), "--corpus", s(&corpus), "--query", "unseen words only"],
        vec!["search", "--index", s(&mip), "--corpus", s(&queries), "--query", "q1"],
        vec!["eval", "--corpus", s(&corpus), "--queries", s(&queries), "--gammas", "0.5,1.0", "--out", s(&out)],
        vec!["eval", "--corpus", s(&corpus), "--queries", s(&queries), "--methods", "nope", "--out", s(&out)],
        vec!["build", "--corpus", s(&corpus), "--out", s(&mip), "--leaf", "0"],
        vec!["gen", "--docs", "0", "--vocab", "5", "--avg-len", "3", "--out", s(&out)],
    ];
    for args in cases {
        let res = pivotree(&args);
        assert!(!res.status.success(), "{args:?} should fail");
        let stderr = String::from_utf8_lossy(&res.stderr);
        assert!(stderr.contains("error"), "{args:?}: {stderr}");
    }
    std::fs::write(&mip, b"garbage").unwrap();
    let res = pivotree(&["search", "--index", s(&mip), "--corpus", s(&corpus), "--query", "d1"]);
    assert!(!res.status.success());
}
