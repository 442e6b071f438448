//! End-to-end runs of the `shiq` binary on the corpus.

use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(file: &str) -> String {
    format!("{}/../../corpus/{file}", env!("CARGO_MANIFEST_DIR"))
}

fn scratch(file: &str, text: &str) -> String {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(file);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn shiq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shiq")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn running_example_is_entailed() {
    for una in [true, false] {
        let mut args = vec!["entails", "--kb", &corpus("running.kb"), "--query", &corpus("running.q")]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        if una {
            args.push("--una".into());
        }
        let o = shiq(&args.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o).trim(), "ENTAILED");
    }
}

#[test]
fn non_entailment_exits_with_one() {
    let o = shiq(&["entails", "--kb", &corpus("oracle/disjunction-open.kb"), "--query", &corpus("oracle/disjunction-open.q")]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "NOT-ENTAILED");
}

#[test]
fn una_flag_changes_the_verdict() {
    let (kb, q) = (corpus("oracle/functional-merge.kb"), corpus("oracle/functional-merge.q"));
    assert_eq!(stdout(&shiq(&["entails", "--kb", &kb, "--query", &q, "--una"])).trim(), "ENTAILED");
    assert_eq!(stdout(&shiq(&["entails", "--kb", &kb, "--query", &q])).trim(), "NOT-ENTAILED");
}

#[test]
fn consistency() {
    let o = shiq(&["consistent", "--kb", &corpus("blocking.kb")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "CONSISTENT");
    let o = shiq(&["consistent", "--kb", &corpus("oracle/inconsistent.kb")]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "INCONSISTENT");
}

#[test]
fn usage_and_parse_errors_exit_with_two() {
    assert_eq!(shiq(&["entails", "--kb", &corpus("running.kb")]).status.code(), Some(2));
    let bad = scratch("bad.kb", "(kb (tbox (implies A)))");
    let o = shiq(&["consistent", "--kb", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.kb:1:"));
    assert_eq!(shiq(&["consistent", "--kb", "/nonexistent.kb"]).status.code(), Some(2));
}

#[test]
fn exhausted_budget_is_a_resource_limit() {
    let o = shiq(&["--budget", "1", "entails", "--kb", &corpus("running.kb"), "--query", &corpus("running.q")]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stdout(&o).trim(), "RESOURCE-LIMIT");
}

#[test]
fn answers_are_printed_as_tuples() {
    let kb = scratch("answers.kb", "(kb (tbox (implies A (some r B))) (rbox) (abox (instance a A) (instance b B) (related c b r)))");
    let q = scratch("answers.q", "(query (vars x y) (answer-vars x) (atoms (role r x y) (concept B y)))");
    let o = shiq(&["answer", "--kb", &kb, "--query", &q]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "(a)\n(c)\n");
    let q = scratch("boolean-answer.q", "(query (vars x y) (answer-vars) (atoms (role r x y) (concept B y)))");
    assert_eq!(stdout(&shiq(&["answer", "--kb", &kb, "--query", &q])).trim(), "ENTAILED");
}

#[test]
fn ground_stage_lists_the_groundings() {
    let o = shiq(&["rewrite", "--kb", &corpus("running.kb"), "--query", &corpus("running.q"), "--stage", "ground"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("(query"));
}

#[test]
fn translation_and_dot_output() {
    let o = shiq(&["translate", "--kb", &corpus("running.kb")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).is_empty());
    let o = shiq(&["dot", "--kb", &corpus("running.kb"), "--query", &corpus("running.q")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("digraph"));
}

#[test]
fn output_does_not_depend_on_the_thread_count() {
    let run = |jobs: &str| {
        stdout(&shiq(&["--jobs", jobs, "rewrite", "--kb", &corpus("running.kb"), "--query", &corpus("running.q"), "--stage", "tree"]))
    };
    assert_eq!(run("1"), run("4"));
}
