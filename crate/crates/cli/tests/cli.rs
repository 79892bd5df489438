use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mixaudit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixaudit"))
        .args(args)
        .env("MIXAUDIT_THREADS", "2")
        .output()
        .unwrap()
}

fn code(args: &[&str]) -> i32 {
    mixaudit(args).status.code().unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    serde_json::from_slice(&mixaudit(&all).stdout).unwrap()
}

fn config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn classify_exit_codes() {
    assert_eq!(code(&["classify", "builtin:gost"]), 0);
    assert_eq!(code(&["classify", "builtin:gpig2"]), 10);
    assert_eq!(code(&["classify", "builtin:identity", "--m", "2", "--delta", "3"]), 10);
    assert_eq!(code(&["classify", "builtin:identity"]), 2);
    assert_eq!(code(&["classify", "builtin:nosuch"]), 2);
}

#[test]
fn bad_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = config(dir.path(), "empty.txt", "");
    assert_eq!(code(&["classify", &empty]), 2);
    let singular = config(dir.path(), "singular.txt", "2 1 2\n10\n10\n");
    assert_eq!(code(&["classify", &format!("file:{singular}")]), 2);
    let missing = dir.path().join("missing.txt");
    assert_eq!(code(&["classify", missing.to_str().unwrap()]), 2);
    let out = mixaudit(&["classify", &empty]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn file_and_builtin_agree() {
    let dir = tempfile::tempdir().unwrap();
    let emitted = mixaudit(&["layers", "emit", "rot:8:2:2"]).stdout;
    let path = config(dir.path(), "rot.txt", &String::from_utf8(emitted).unwrap());
    let from_file = json(&["classify", &path]);
    let builtin = json(&["classify", "builtin:rot:8:2:2"]);
    assert_eq!(from_file["result"]["verdict"], builtin["result"]["verdict"]);
    assert_eq!(
        from_file["inputs"][0]["sha256"],
        builtin["inputs"][0]["sha256"],
        "builtin digest is the digest of its emitted text"
    );
}

#[test]
fn gf_input_is_lifted() {
    let dir = tempfile::tempdir().unwrap();
    // MixColumns over F_{2^8}.
    let path = config(
        dir.path(),
        "mix.txt",
        "4 8 11b\n2 3 1 1\n1 2 3 1\n1 1 2 3\n3 1 1 2\n",
    );
    let v = json(&["classify", "--gf", "--transpose", &path]);
    assert_eq!(v["result"]["layer"]["n"], 32);
    assert_eq!(v["result"]["verdict"]["kind"], "NonTypePreserving");
}

#[test]
fn oracle_agrees_or_refuses() {
    assert_eq!(code(&["oracle", "builtin:rot:6:2:2"]), 0);
    assert_eq!(code(&["oracle", "builtin:identity", "--m", "2", "--delta", "3"]), 0);
    assert_eq!(code(&["oracle", "builtin:gost"]), 3);
    assert_eq!(code(&["oracle", "builtin:gpig2", "--max-sets", "1000"]), 3);
    let v = json(&["oracle", "builtin:rot:8:4:4", "--max-sets", "1000000"]);
    assert_eq!(v["result"]["agree"], true);
    assert_eq!(v["budgets"]["max_sets"], 1_000_000);
}

#[test]
fn primitivity_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let rot = config(
        dir.path(),
        "rot.json",
        r#"{"kind":"spnmod","m":2,"delta":4,"layer":"builtin:rot:8:2:2","sbox_seed":3,"zero_not_fixed":true}"#,
    );
    assert_eq!(code(&["primitivity", "--config", &rot]), 0);
    let id = config(
        dir.path(),
        "id.json",
        r#"{"kind":"spnmod","m":2,"delta":4,"layer":"builtin:identity","sbox_seed":0,"identity_sboxes":true}"#,
    );
    assert_eq!(code(&["primitivity", "--config", &id]), 11);
    let v = json(&["primitivity", "--config", &id]);
    assert_eq!(v["result"]["invariant_qs"], serde_json::json!([1, 2, 3, 4, 5, 6, 7]));
    let feistel = config(
        dir.path(),
        "feistel.json",
        r#"{"kind":"feistel","m":2,"delta":3,"layer":"builtin:rot:6:2:2","sbox_seed":1}"#,
    );
    assert_eq!(code(&["primitivity", "--config", &feistel]), 0);
    assert_eq!(code(&["primitivity", "--config", &feistel, "--max-seeds", "5"]), 3);
    let typo = config(
        dir.path(),
        "typo.json",
        r#"{"kind":"spnmod","m":2,"delta":4,"layer":"builtin:gost","sbox_seed":1,"zero":1}"#,
    );
    assert_eq!(code(&["primitivity", "--config", &typo]), 2);
}

#[test]
fn config_layer_paths_are_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let emitted = mixaudit(&["layers", "emit", "rot:8:2:2"]).stdout;
    std::fs::write(dir.path().join("rot.txt"), emitted).unwrap();
    let cfg = config(
        dir.path(),
        "c.json",
        r#"{"kind":"spnmod","m":2,"delta":4,"layer":"file:rot.txt","sbox_seed":3,"zero_not_fixed":true}"#,
    );
    let v = json(&["primitivity", "--config", &cfg]);
    assert_eq!(v["result"]["report"]["verdict"], "Primitive");
    assert_eq!(v["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn attack_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let id = config(
        dir.path(),
        "id.json",
        r#"{"kind":"spnmod","m":2,"delta":4,"layer":"builtin:identity","sbox_seed":0,"identity_sboxes":true}"#,
    );
    let v = json(&["attack", "--config", &id, "--q", "2", "--trials", "200"]);
    assert_eq!(v["result"]["attack"]["confirmation_rate"], 1.0);
    assert_eq!(v["result"]["attack"]["leaked_bits"], 2);
    assert_eq!(code(&["attack", "--config", &id, "--q", "2"]), 0);
    assert_eq!(code(&["attack", "--config", &id, "--q", "2", "--trials", "0"]), 2);
    assert_eq!(code(&["attack", "--config", &id, "--q", "0"]), 2);

    let rot = config(
        dir.path(),
        "rot.json",
        r#"{"kind":"spnmod","m":2,"delta":4,"layer":"builtin:rot:8:2:2","sbox_seed":3,"zero_not_fixed":true}"#,
    );
    let out = mixaudit(&["attack", "--config", &rot, "--q", "2"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("split"));
}

#[test]
fn json_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let id = config(
        dir.path(),
        "id.json",
        r#"{"kind":"spnmod","m":2,"delta":4,"layer":"builtin:identity","sbox_seed":0,"identity_sboxes":true}"#,
    );
    let runs = [
        vec!["--json", "classify", "builtin:present"],
        vec!["--json", "oracle", "builtin:rot:8:2:2", "--count-all"],
        vec!["--json", "attack", "--config", &id, "--q", "3", "--seed", "9"],
    ];
    for args in &runs {
        let a = mixaudit(args).stdout;
        let b = mixaudit(args).stdout;
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?}");
    }
    let v = json(&["classify", "builtin:present"]);
    assert_eq!(v["tool"], "mixaudit");
    assert_eq!(v["command"], "classify");
    assert_eq!(v["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn layers_listing() {
    let out = String::from_utf8(mixaudit(&["layers", "list"]).stdout).unwrap();
    for name in ["gost", "present", "gpig2", "aes", "aeslike", "rot", "identity"] {
        assert!(out.contains(name));
    }
    assert_eq!(code(&["layers", "emit", "identity"]), 2);
    assert_eq!(code(&["layers", "emit", "identity", "--m", "3", "--delta", "2"]), 0);
}
