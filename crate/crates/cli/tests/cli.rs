use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use stancelab::corpus::{make_fixture, read_jsonl, save_corpus, tokenize_instance};
use stancelab::embeddings::{build_sequence, write_embedding_file, EmbeddingRecord, InputLayout};

fn stancelab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stancelab"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const SMALL: &[&str] = &["--fallback-dim", "16", "--hidden", "16", "--affect-dim", "16"];

fn train_args<'a>(corpus: &'a str, out: &'a str, seed: &'a str) -> Vec<&'a str> {
    let mut v = vec!["train", "--corpus", corpus, "--out", out, "--seed", seed];
    v.extend_from_slice(SMALL);
    v
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = stancelab(&["bogus"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(code(&stancelab(&["stats"], dir.path())), 1);
    assert_eq!(code(&stancelab(&["--help"], dir.path())), 0);
    assert_eq!(code(&stancelab(&["--version"], dir.path())), 0);
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = stancelab(&["stats", "--corpus", "missing.jsonl"], dir.path());
    assert_eq!(code(&out), 2);
    fs::write(dir.path().join("bad.jsonl"), "{\"id\": 1}\n").unwrap();
    assert_eq!(code(&stancelab(&["stats", "--corpus", "bad.jsonl"], dir.path())), 2);
    fs::write(dir.path().join("cfg.json"), r#"{"hiden": 4}"#).unwrap();
    let out = stancelab(&["param-count", "--config", "cfg.json"], dir.path());
    assert_eq!(code(&out), 2);
    let out = stancelab(&["param-count", "--mode", "anger"], dir.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn diverging_training_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    save_corpus(dir.path().join("fx.jsonl"), &make_fixture(1, 40, 1.0)).unwrap();
    let out = stancelab(
        &[
            "train", "--corpus", "fx.jsonl", "--out", "run", "--fallback-dim", "4", "--hidden",
            "4", "--lr", "1e300", "--epochs", "2",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn train_then_eval_separates_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&stancelab(&["fixture", "--out", "fx.jsonl", "--seed", "5"], d)), 0);
    let before = fs::read(d.join("fx.jsonl")).unwrap();
    let out = stancelab(&train_args("fx.jsonl", "run", "5"), d);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["config.json", "history.jsonl", "best.ckpt", "summary.json", "vocab.json"] {
        assert!(d.join("run").join(f).is_file(), "{f}");
    }

    let out = stancelab(
        &["eval", "--run", "run", "--split", "dev", "--predictions", "dev.jsonl", "--out", "m.json"],
        d,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let metrics = stdout_json(&out);
    let f1 = metrics["pro"]["f1"].as_f64().unwrap();
    assert!(f1 >= 0.95, "dev F1 {f1}");
    assert_eq!(metrics["n"], 40);
    assert_eq!(fs::read_to_string(d.join("dev.jsonl")).unwrap().lines().count(), 40);
    assert_eq!(fs::read(d.join("fx.jsonl")).unwrap(), before);

    let out = stancelab(
        &["mcnemar", "--a", "dev.jsonl", "--b", "dev.jsonl", "--corpus", "fx.jsonl"],
        d,
    );
    let r = stdout_json(&out);
    assert_eq!((r["b"].as_u64(), r["c"].as_u64()), (Some(0), Some(0)));
    assert_eq!(r["p_exact"], 1.0);

    let out = stancelab(
        &["explain", "--run", "run", "--id", "fx5-00014", "--format", "html", "--out", "h.html"],
        d,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(fs::read_to_string(d.join("h.html")).unwrap().contains("class=\"tok"));
    let out = stancelab(&["explain", "--run", "run", "--id", "nope"], d);
    assert_eq!(code(&out), 2);
}

#[test]
fn identical_seeds_give_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    save_corpus(d.join("fx.jsonl"), &make_fixture(2, 60, 0.8)).unwrap();
    for run in ["a", "b", "c"] {
        let seed = if run == "c" { "8" } else { "7" };
        let mut args = train_args("fx.jsonl", run, seed);
        args.extend_from_slice(&["--epochs", "3", "--dropout", "0.2"]);
        assert_eq!(code(&stancelab(&args, d)), 0);
    }
    for f in ["config.json", "history.jsonl", "best.ckpt", "summary.json", "vocab.json"] {
        let a = fs::read(d.join("a").join(f)).unwrap();
        assert_eq!(a, fs::read(d.join("b").join(f)).unwrap(), "{f}");
    }
    assert_ne!(
        fs::read(d.join("a/best.ckpt")).unwrap(),
        fs::read(d.join("c/best.ckpt")).unwrap()
    );
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    save_corpus(d.join("fx.jsonl"), &make_fixture(3, 30, 1.0)).unwrap();
    fs::write(
        d.join("cfg.json"),
        r#"{"corpus": "fx.jsonl", "epochs": 1, "hidden": 3, "context_dim": 4, "affect_dim": 2}"#,
    )
    .unwrap();
    let out = stancelab(&["train", "--config", "cfg.json", "--out", "run", "--epochs", "2"], d);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let cfg: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("run/config.json")).unwrap()).unwrap();
    assert_eq!(cfg["train"]["epochs"], 2);
    assert_eq!(cfg["model"]["hidden"], 3);
    assert_eq!(cfg["train"]["batch_size"], 8);
    let lines = fs::read_to_string(d.join("run/history.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 2);
}

#[test]
fn ingest_converts_delimited_input() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let tsv = "id\ttopic\tquestion\tperspective\tstance\tsplit\n\
               a\tt\tIs it good?\tIt is great.\tpro\ttrain\n\
               b\tt\tIs it good?\tIt is awful.\tcon\ttest\n";
    fs::write(d.join("in.tsv"), tsv).unwrap();
    assert_eq!(code(&stancelab(&["ingest", "--input", "in.tsv", "--out", "c.jsonl"], d)), 0);
    let text = fs::read(d.join("c.jsonl")).unwrap();
    let corpus = read_jsonl(text.as_slice()).unwrap();
    assert_eq!(corpus.len(), 2);
    assert_eq!(corpus[1].perspective, "It is awful.");
    assert_eq!(fs::read_to_string(d.join("in.tsv")).unwrap(), tsv);

    let stats = stdout_json(&stancelab(&["stats", "--corpus", "c.jsonl"], d));
    assert_eq!(stats.as_array().unwrap().len(), 2);
    let prof = stdout_json(&stancelab(&["profile", "--corpus", "c.jsonl"], d));
    assert!(prof[0]["pro_avg"].as_f64().unwrap() > 0.0);
    assert!(prof[0]["con_avg"].as_f64().unwrap() < 0.0);
    let out = stancelab(&["annotate", "--corpus", "c.jsonl"], d);
    let first: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stdout).lines().next().unwrap()).unwrap();
    assert_eq!(first["id"], "a");
    assert_eq!(first["sentiment"].as_array().unwrap().len(), 8);
}

#[test]
fn contextual_embeddings_are_validated_and_used() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let corpus = make_fixture(4, 30, 1.0);
    save_corpus(d.join("fx.jsonl"), &corpus).unwrap();
    let dim = 6;
    let records: Vec<EmbeddingRecord> = corpus
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            let seq = build_sequence(&tokenize_instance(inst), InputLayout::Pair, 512);
            let t = seq.tokens.len();
            EmbeddingRecord {
                instance_id: inst.id.clone(),
                tokens: seq.tokens,
                word_alignment: seq.word_alignment,
                dim,
                matrix: (0..t * dim).map(|k| ((i * 31 + k * 7) % 13) as f32 / 13.0 - 0.5).collect(),
            }
        })
        .collect();
    write_embedding_file(d.join("all.bin"), dim, &records).unwrap();
    write_embedding_file(d.join("partial.bin"), dim, &records[..29]).unwrap();

    let out = stancelab(&["validate-embeddings", "--embeddings", "all.bin", "--corpus", "fx.jsonl"], d);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["records"], 30);
    let out = stancelab(
        &["validate-embeddings", "--embeddings", "partial.bin", "--corpus", "fx.jsonl"],
        d,
    );
    assert_eq!(code(&out), 2);
    assert_eq!(stdout_json(&out)["missing_ids"][0], corpus[29].id.as_str());

    let out = stancelab(
        &[
            "train", "--corpus", "fx.jsonl", "--embeddings", "all.bin", "--hidden", "4", "--epochs",
            "2", "--out", "run",
        ],
        d,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let cfg: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("run/config.json")).unwrap()).unwrap();
    assert_eq!(cfg["model"]["d_context"], 6);
    assert!(!d.join("run/vocab.json").exists());
    let out = stancelab(&["eval", "--run", "run", "--split", "all"], d);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let out = stancelab(
        &[
            "train", "--corpus", "fx.jsonl", "--embeddings", "partial.bin", "--hidden", "4",
            "--out", "run2",
        ],
        d,
    );
    assert_eq!(code(&out), 2);
    assert!(!d.join("run2").exists());
}
