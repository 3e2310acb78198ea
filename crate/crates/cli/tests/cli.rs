use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hmsched_cli::document::{InstanceDoc, SolutionDoc};
use tempfile::TempDir;

fn hmsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hmsched"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

const QCMAX: &str = r#"{"problem":"q-cmax","machines":[{"kind":0,"speed":1},{"kind":0,"speed":1}],
"job_types":[{"processing":[3],"multiplicity":"2"},{"processing":[1],"multiplicity":"2"}]}"#;

// two machine kinds; the 4-job type is forbidden on kind 1
const RWC: &str = r#"{"problem":"r-wc","kinds":2,"machines":[{"kind":0},{"kind":1}],
"job_types":[{"processing":[2,null],"weight":3,"multiplicity":"2"},
{"processing":[1,2],"weight":1,"multiplicity":"3"}]}"#;

#[test]
fn solves_uniform_makespan() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "q.json", QCMAX);
    let out = hmsched(&["solve", arg(&f)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("objective: 4/1"));
}

#[test]
fn methods_agree_on_weighted_completion() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "w.json", RWC);
    let mut seen = Vec::new();
    for method in ["nfold", "fixdim", "brute"] {
        let out = hmsched(&["solve", arg(&f), "--method", method, "--json"]);
        assert_eq!(out.status.code(), Some(0), "{method}: {}", stderr(&out));
        let doc: SolutionDoc = serde_json::from_str(&stdout(&out)).unwrap();
        seen.push(doc.objective.unwrap().0);
    }
    assert!(seen.windows(2).all(|w| w[0] == w[1]), "{seen:?}");
}

#[test]
fn malformed_document_reports_path() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "bad.json",
        r#"{"problem":"q-cmax","machines":[{"kind":0}],"job_types":[{"processing":[1],"multiplicity":5}]}"#,
    );
    let out = hmsched(&["solve", arg(&f)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("job_types[0].multiplicity"));

    let g = write(
        &dir,
        "extra.json",
        r#"{"problem":"binpacking","bins":1,"capacity":2,"items":[2],"x":1}"#,
    );
    assert_eq!(hmsched(&["solve", arg(&g)]).status.code(), Some(1));
}

#[test]
fn infeasible_program_exits_two() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "n.json",
        r#"{"problem":"nfold","a1":{"rows":1,"cols":1,"entries":["2"]},"a2":{"rows":0,"cols":1,"entries":[]},
"bricks":2,"rhs":["3"],"lower":["0","0"],"upper":["5","5"]}"#,
    );
    let out = hmsched(&["solve", arg(&f)]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn graver_of_small_matrices() {
    let out = hmsched(&["graver", "--matrix", "1 1"]);
    assert!(stdout(&out).contains("count: 2"), "{}", stdout(&out));
    let out = hmsched(&["graver", "--matrix", "1 0; 0 1"]);
    assert!(stdout(&out).contains("count: 0"));
    let out = hmsched(&["graver", "--matrix", "1 2 -1", "--radius", "3"]);
    let text = stdout(&out);
    assert!(text.contains("count: 8"));
    assert!(text.contains("(2,-1,0)"));
}

#[test]
fn bin_packing_thresholds() {
    let dir = TempDir::new().unwrap();
    for (items, threshold, packable) in [
        ("[3,1,2,2]", "25/1", "yes"),
        ("[3,3,1,1]", "26/1", "yes"),
        ("[3,3,2]", "27/1", "no"),
    ] {
        let f = write(
            &dir,
            "bp.json",
            &format!(r#"{{"problem":"binpacking","bins":2,"capacity":4,"items":{items}}}"#),
        );
        let out = hmsched(&["reduce-binpacking", arg(&f)]);
        assert!(stdout(&out).contains(&format!("threshold: {threshold}")));
        let out = hmsched(&["solve", arg(&f)]);
        assert_eq!(out.status.code(), Some(0));
        assert!(
            stdout(&out).contains(&format!("packable: {packable}")),
            "{items}"
        );
    }
}

#[test]
fn reduced_instance_is_solvable() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "bp.json",
        r#"{"problem":"binpacking","bins":2,"capacity":4,"items":[3,1,2,2]}"#,
    );
    let reduced = dir.path().join("r.json");
    let out = hmsched(&["reduce-binpacking", arg(&f), "-o", arg(&reduced)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = hmsched(&["solve", arg(&reduced)]);
    assert!(stdout(&out).contains("objective: 25/1"), "{}", stdout(&out));
}

#[test]
fn verify_round_trip_and_tampering() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "w.json", RWC);
    let out = hmsched(&["solve", arg(&inst), "--json"]);
    let sol = write(&dir, "s.json", &stdout(&out));
    assert_eq!(
        hmsched(&["verify", arg(&inst), arg(&sol)]).status.code(),
        Some(0)
    );

    let mut doc: SolutionDoc = serde_json::from_str(&stdout(&out)).unwrap();
    let claimed = doc.objective.clone().unwrap().0;
    doc.objective = Some(hmsched_cli::document::Ratio(
        claimed + num_rational::BigRational::from_integer(1.into()),
    ));
    let off = write(&dir, "off.json", &serde_json::to_string(&doc).unwrap());
    let out = hmsched(&["verify", arg(&inst), arg(&off)]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("difference"));

    let mut doc: SolutionDoc =
        serde_json::from_str(&stdout(&hmsched(&["solve", arg(&inst), "--json"]))).unwrap();
    let counts = doc.counts.as_mut().unwrap();
    counts[1][0].0 += 1u32;
    let bad = write(&dir, "bad.json", &serde_json::to_string(&doc).unwrap());
    assert_eq!(
        hmsched(&["verify", arg(&inst), arg(&bad)]).status.code(),
        Some(4)
    );
}

#[test]
fn documents_round_trip() {
    for text in [QCMAX, RWC] {
        let doc = InstanceDoc::parse(text).unwrap();
        let again = InstanceDoc::parse(&doc.to_json()).unwrap();
        assert_eq!(doc, again);
    }
}
