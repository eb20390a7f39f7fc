//! The `evtforge` binary end to end: outputs, exit codes, flags and the environment.

use std::path::PathBuf;
use std::process::{Command, Output};

use evtforge_core::syntax::same_tokens;
use serde_json::Value as Json;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name).display().to_string()
}

fn golden(names: &[&str]) -> String {
    names.iter().map(|n| std::fs::read_to_string(fixture(&format!("golden/{n}.spec"))).unwrap()).collect::<Vec<_>>().join("\n")
}

fn evtforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evtforge")).args(args).env_remove("EVTFORGE_BOUND").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join(format!("evtforge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p.display().to_string()
}

const BRIDGE: [&str; 3] = ["ebm0.eb", "ebm1.eb", "ebm2.eb"];

#[test]
fn translate_matches_the_golden_text() {
    let o = evtforge(&["translate", &fixture("ebm0.eb")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(same_tokens(&stdout(&o), &golden(&["cd", "m0"])).unwrap());
}

#[test]
fn translate_of_an_empty_file_exits_1() {
    let o = evtforge(&["translate", &scratch("empty.eb", "")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
}

#[test]
fn syntax_errors_exit_1_and_unknown_names_exit_2() {
    let bad = scratch("bad.eb", "machine m\n  variables\nend\n  ??");
    assert_eq!(evtforge(&["translate", &bad]).status.code(), Some(1));
    let o = evtforge(&["models", "NOPE", "-i", &fixture("rex.spec")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NOPE"));
}

#[test]
fn rodin_project_translates_like_the_text_fixture() {
    let text = stdout(&evtforge(&["translate", &fixture("ebm0.eb")]));
    let rodin = evtforge(&["translate", &fixture("rodin")]);
    assert_eq!(rodin.status.code(), Some(0));
    assert_eq!(stdout(&rodin), text);
}

#[test]
fn models_lists_the_bridge_entries() {
    let o = evtforge(&["models", "M0", "-i", &fixture("ebm0.eb"), "--pin", "d=2", "--bound", "3", "--event", "ML_out", "--list"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("ML_out: 2 pairs"), "{out}");
    assert!(out.lines().any(|l| l.trim() == "(0,1),(1,2)"), "{out}");
}

#[test]
fn models_of_the_single_event_spec() {
    let o = evtforge(&["models", "REX", "-i", &fixture("rex.spec"), "--bound", "2", "--event", "e", "--list"]);
    let out = stdout(&o);
    assert!(out.contains("((0,FALSE),(1,FALSE)),((0,TRUE),(1,FALSE)),((1,FALSE),(2,FALSE)),((1,TRUE),(2,FALSE))"), "{out}");
}

#[test]
fn a_false_event_sentence_empties_only_its_relation() {
    let spec = scratch(
        "false.spec",
        "spec F =\n  ops x : BOOL\n  Events\n    INITIALISATION\n      thenAct x := TRUE\n    e ordinary\n      when x ≠ x\n      thenAct x := FALSE\nend\n",
    );
    let out = stdout(&evtforge(&["models", "F", "-i", &spec]));
    assert!(out.contains("Init: 1 states") && out.contains("e: 0 pairs"), "{out}");
}

#[test]
fn json_models_carry_counts_and_pairs() {
    let o = evtforge(&["models", "REX", "-i", &fixture("rex.spec"), "--bound", "2", "--list", "--format", "json"]);
    let v: Json = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["spec"], "REX");
    assert_eq!(v["models"][0]["events"]["e"]["count"], 4);
    assert_eq!(v["models"][0]["events"]["e"]["pairs"][0], serde_json::json!([[0, false], [1, false]]));
}

#[test]
fn refinement_chain_holds_and_the_mutant_is_refuted() {
    let mut args = vec!["refine", "--pin", "d=2", "-i"];
    let inputs: Vec<String> = BRIDGE.iter().map(|f| fixture(f)).chain([fixture("refinement.spec")]).collect();
    args.extend(inputs.iter().map(String::as_str));
    let o = evtforge(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).matches("holds").count(), 3);

    let mutant = [fixture("ebm0.eb"), fixture("mutant/m0_weak.eb"), fixture("mutant/m0_guard.eb"), fixture("mutant/refinement.spec")];
    let mut args = vec!["refine", "WEAK", "--pin", "d=2", "--format", "json", "-i"];
    args.extend(mutant.iter().map(String::as_str));
    let o = evtforge(&args);
    assert_eq!(o.status.code(), Some(3));
    let v: Json = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["holds"], false);
    assert_eq!(v[0]["event"], "ML_in");
    assert_eq!((v[0]["before"].as_str(), v[0]["after"].as_str()), (Some("{n↦3}"), Some("{n′↦2}")));
}

#[test]
fn identity_refinement_holds() {
    let decl = scratch("identity.spec", "refinement ID : M0 to M0 = end\n");
    let o = evtforge(&["refine", "ID", "--pin", "d=1", "-i", &fixture("ebm0.eb"), &decl]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn pushouts_merge_statuses_and_keep_disjoint_names_apart() {
    let toy = fixture("toy.spec");
    let po = |l: &str, r: &str| stdout(&evtforge(&["pushout", &fixture(l), &fixture(r), "-i", &toy]));
    let same = po("pushout/identity.mor", "pushout/identity.mor");
    assert!(same.contains("event e1 ordinary") && same.contains("var v3 : BOOL"), "{same}");
    let merged = po("pushout/convergent.mor", "pushout/anticipated.mor");
    assert!(merged.contains("event e1 convergent"), "{merged}");
    let renamed = po("pushout/identity.mor", "pushout/renamed.mor");
    assert!(renamed.contains("f1 ↦ e1") && renamed.contains("w1 ↦ v1"), "{renamed}");
}

#[test]
fn bound_comes_from_the_environment_unless_given() {
    let args = ["models", "REX", "-i", &fixture("rex.spec"), "--event", "e"];
    let env = Command::new(env!("CARGO_BIN_EXE_evtforge")).args(args).env("EVTFORGE_BOUND", "1").output().unwrap();
    // With bound 1 the literal 2 leaves the carrier, so the guard `x < 2` never holds.
    assert!(stdout(&env).contains("e: 0 pairs"), "{}", stdout(&env));
    let flag = evtforge(&[&args[..], &["--bound", "1"]].concat());
    assert_eq!(env.stdout, flag.stdout);
    assert!(stdout(&evtforge(&args)).contains("e: 4 pairs"));
    assert_eq!(evtforge(&[&args[..], &["--bound", "0"]].concat()).status.code(), Some(2));
}

#[test]
fn out_writes_the_report_to_a_file() {
    let target = scratch("report.txt", "");
    let o = evtforge(&["translate", &fixture("ebm0.eb"), "--out", &target]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&target).unwrap(), evtforge(&["translate", &fixture("ebm0.eb")]).stdout);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let mut args = vec!["translate".to_string()];
    args.extend(BRIDGE.iter().map(|f| fixture(f)));
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    assert_eq!(evtforge(&args).stdout, evtforge(&args).stdout);
    let m = ["models", "M2", "-i", &fixture("ebm0.eb"), &fixture("ebm1.eb"), &fixture("ebm2.eb"), "--pin", "d=1", "--list"];
    assert_eq!(evtforge(&m).stdout, evtforge(&m).stdout);
}
