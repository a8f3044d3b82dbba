use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/three_pieces.txt")
}

fn chordlearn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chordlearn")).args(args).output().unwrap()
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn learn_twice_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("out{k}"));
        let dot = tmp.path().join(format!("dot{k}"));
        let o = chordlearn(&[
            "learn",
            "--corpus",
            corpus().to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--dot",
            dot.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        runs.push((o.stdout, read_dir(&out), read_dir(&dot)));
    }
    assert_eq!(runs[0], runs[1]);
    let files: Vec<&String> = runs[0].1.keys().collect();
    assert_eq!(files, ["learned.json", "report.json", "report.txt"]);
    let report: serde_json::Value = serde_json::from_slice(&runs[0].1["report.json"]).unwrap();
    assert_eq!(report["total"]["baseline"], 87);
    assert_eq!(report["rows"][0]["title"], "Red Clay");
}

/// Incoming edges per surface chord node `c{k}`.
fn chord_coverage(dot: &str) -> BTreeMap<String, usize> {
    let mut cover = BTreeMap::new();
    for line in dot.lines() {
        let line = line.trim();
        if let Some((_, target)) = line.split_once(" -> ") {
            let target = target.trim_end_matches(';');
            if target.starts_with('c') && !line.contains("invis") {
                *cover.entry(target.to_string()).or_insert(0) += 1;
            }
        }
    }
    cover
}

#[test]
fn exported_blocks_cover_every_chord_once() {
    let tmp = tempfile::tempdir().unwrap();
    let dot = tmp.path().join("dot");
    let o = chordlearn(&[
        "export",
        "--corpus",
        corpus().to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
        "--storage",
        "shared",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let files = read_dir(&dot);
    let lens = [("red_clay.dot", 13), ("valse_hot.dot", 15), ("sunny.dot", 17)];
    for (name, n) in lens {
        let text = String::from_utf8(files[name].clone()).unwrap();
        let cover = chord_coverage(&text);
        assert_eq!(cover.len(), n, "{name}");
        assert!(cover.values().all(|&c| c == 1), "{name}: {cover:?}");
        assert!(text.contains("shape=box"), "{name} uses no abstraction");
    }

    // The library graph is closed and acyclic.
    let lib = String::from_utf8(files["library.dot"].clone()).unwrap();
    let mut nodes = BTreeSet::new();
    let mut edges: Vec<(String, String)> = Vec::new();
    for line in lib.lines().map(str::trim) {
        if let Some((a, b)) = line.trim_end_matches(';').split_once(" -> ") {
            edges.push((a.to_string(), b.to_string()));
        } else if let Some((name, _)) = line.split_once(" [label") {
            nodes.insert(name.to_string());
        }
    }
    assert!(!nodes.is_empty());
    assert!(edges.iter().all(|(a, b)| nodes.contains(a) && nodes.contains(b)));
    let mut remaining = nodes.clone();
    while !remaining.is_empty() {
        let sink = remaining
            .iter()
            .find(|n| !edges.iter().any(|(a, b)| a == *n && remaining.contains(b)))
            .cloned()
            .expect("library graph has a cycle");
        remaining.remove(&sink);
    }
}

#[test]
fn one_chord_piece_is_one_block() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("one.txt");
    fs::write(&corpus, "Solo: C7\n").unwrap();
    let dot = tmp.path().join("dot");
    let o = chordlearn(&["export", "--corpus", corpus.to_str().unwrap(), "--dot", dot.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(dot.join("solo.dot")).unwrap();
    assert_eq!(chord_coverage(&text).len(), 1);
    assert_eq!(text.matches("shape=circle").count(), 1);
}

#[test]
fn unparsed_piece_fails_but_writes_results() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("mixed.txt");
    fs::write(&corpus, "Good: Dm7 G7 CM7\nAlso good: Em7 A7 DM7\nBad: CM7 F#7\n").unwrap();
    let out = tmp.path().join("out");
    let o = chordlearn(&["learn", "--corpus", corpus.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Bad"));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["unparsed"], serde_json::json!(["Bad"]));
    assert_eq!(report["rows"].as_array().unwrap().len(), 2);

    let o = chordlearn(&["parse", "--corpus", corpus.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn parse_reports_derivation_counts() {
    let o = chordlearn(&["parse", "--json", "--corpus", corpus().to_str().unwrap()]);
    assert!(o.status.success());
    let stats: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let counts: Vec<&str> =
        stats["pieces"].as_array().unwrap().iter().map(|p| p["derivations"].as_str().unwrap()).collect();
    assert_eq!(counts, ["5", "6", "31"]);
}

#[test]
fn bad_inputs_are_errors() {
    let o = chordlearn(&["learn", "--corpus", "/nonexistent/corpus.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonexistent"));
    let o = chordlearn(&["learn", "--corpus", corpus().to_str().unwrap(), "--beam", "0"]);
    assert!(!o.status.success());
}

#[test]
fn piecewise_totals_are_sums_of_single_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let piecewise = chordlearn(&["report", "--json", "--mode", "piecewise", "--corpus", corpus().to_str().unwrap()]);
    let all: serde_json::Value = serde_json::from_slice(&piecewise.stdout).unwrap();
    let text = fs::read_to_string(corpus()).unwrap();
    let mut refactored = 0;
    let mut storage = 0;
    for (k, line) in text.lines().filter(|l| l.contains(':') && !l.starts_with('#')).enumerate() {
        let single = tmp.path().join(format!("p{k}.txt"));
        fs::write(&single, line).unwrap();
        let o = chordlearn(&["report", "--json", "--corpus", single.to_str().unwrap()]);
        let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        refactored += r["total"]["refactored"].as_u64().unwrap();
        storage += r["total"]["storage"].as_u64().unwrap();
    }
    assert_eq!(all["total"]["refactored"].as_u64().unwrap(), refactored);
    assert_eq!(all["total"]["storage"].as_u64().unwrap(), storage);
}
