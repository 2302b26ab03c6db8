use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn cword(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cword"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = cword(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn toy() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/toy.txt")
}

#[test]
fn extract_evaluation_mode() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    let out = dir.path().join("out.txt");
    fs::write(&input, "do you have any skirt that will go with this sweater ?\ni will take the dog for a walk .\n").unwrap();
    ok(&["extract", "--input", s(&input), "--mode", "eval", "--out", s(&out)]);
    assert_eq!(fs::read_to_string(&out).unwrap(), "any skirt go sweater\ntake dog walk\n");
    ok(&["extract", "--input", s(&input), "--mode", "training", "--out", s(&out)]);
    assert_eq!(fs::read_to_string(&out).unwrap().lines().nth(1), Some("i take dog walk ."));
}

#[test]
fn evaluate_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let refs = dir.path().join("refs.txt");
    let out = dir.path().join("report.txt");
    fs::write(&refs, "the dog is happy .\ni want a new skirt .\n").unwrap();
    let stdout = ok(&["evaluate", "--refs", s(&refs), "--hyps", s(&refs), "--out", s(&out)]);
    let report = fs::read_to_string(&out).unwrap();
    assert_eq!(stdout, report);
    for key in ["B1 = 100.00", "B2 = 100.00", "cB1 = 100.00", "cCoverage = 100.00", "pairs = 2", "A-emb = n/a"] {
        assert!(report.lines().any(|l| l == key), "missing {key:?} in\n{report}");
    }
}

#[test]
fn evaluate_rejects_misaligned_files() {
    let dir = tempfile::tempdir().unwrap();
    let (r, h) = (dir.path().join("r"), dir.path().join("h"));
    fs::write(&r, "a b\nc d\n").unwrap();
    fs::write(&h, "a b\n").unwrap();
    let out = cword(&["evaluate", "--refs", s(&r), "--hyps", s(&h), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cword(&["train", "--arch", "hed-ced"]).status.code(), Some(2));
    assert_eq!(cword(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(cword(&["--help"]).status.code(), Some(0));
}

#[test]
fn preprocess_dailydialog() {
    let dir = tempfile::tempdir().unwrap();
    let text = dir.path().join("dialogues_text.txt");
    let acts = dir.path().join("dialogues_act.txt");
    let mut t = String::new();
    let mut a = String::new();
    for i in 0..20 {
        t.push_str(&format!("Hello, how are you {i}? __eou__ I'm fine. Thanks! __eou__ Good. __eou__\n"));
        a.push_str("2 1 1\n");
    }
    t.push_str("Lonely. __eou__\n");
    a.push_str("1\n");
    fs::write(&text, t).unwrap();
    fs::write(&acts, a).unwrap();
    let out = dir.path().join("out");
    ok(&["preprocess", "--format", "dailydialog", "--input", s(&text), "--acts", s(&acts), "--out", s(&out)]);
    let (mut lines, mut sentences) = (0, 0);
    for split in ["train", "valid", "test"] {
        let body = fs::read_to_string(out.join(format!("{split}.txt"))).unwrap();
        lines += body.lines().count();
        sentences += body.lines().map(|l| l.split('\t').count()).sum::<usize>();
        assert!(!body.contains("__eou__"));
    }
    // 20 dialogs of four sentences each; the single-turn dialog is dropped.
    assert_eq!((lines, sentences), (20, 80));
    let acts = fs::read_to_string(out.join("train.acts")).unwrap();
    assert!(acts.lines().all(|l| l.starts_with("2 ")));

    let vocab = dir.path().join("vocab.txt");
    ok(&["build-vocab", "--corpus", s(&out.join("train.txt")), "--cap", "5", "--out", s(&vocab)]);
    assert_eq!(fs::read_to_string(&vocab).unwrap().lines().count(), 9);
}

#[test]
fn train_generate_chat() {
    let dir = tempfile::tempdir().unwrap();
    let vocab = dir.path().join("vocab.txt");
    ok(&["build-vocab", "--corpus", s(&toy()), "--out", s(&vocab)]);
    let run = dir.path().join("run");
    ok(&[
        "train", "--corpus", s(&toy()), "--vocab", s(&vocab), "--arch", "hed-ced", "--seed", "3", "--epochs", "1",
        "--emb-size", "8", "--enc-hidden", "6", "--dec-hidden", "5", "--out", s(&run),
    ]);
    let ck = run.join("epoch-01");
    assert!(ck.join("params.bin").exists());
    assert!(fs::read_to_string(run.join("triplets.txt")).unwrap().lines().count() > 0);

    let hyps = dir.path().join("hyps.txt");
    let content = dir.path().join("content.txt");
    let refs = dir.path().join("refs.txt");
    ok(&[
        "generate", "--checkpoint", s(&ck), "--vocab", s(&vocab), "--contexts", s(&toy()), "--out", s(&hyps),
        "--content-out", s(&content), "--refs-out", s(&refs), "--max-len", "6",
    ]);
    let n = fs::read_to_string(&hyps).unwrap().lines().count();
    assert_eq!(n, 50);
    assert_eq!(fs::read_to_string(&refs).unwrap().lines().count(), n);
    assert_eq!(fs::read_to_string(&content).unwrap().lines().count(), n);
    assert!(fs::read_to_string(&hyps).unwrap().lines().all(|l| l.split_whitespace().count() <= 6));

    let mut child = Command::new(env!("CARGO_BIN_EXE_cword"))
        .args(["chat", "--checkpoint", s(&ck), "--vocab", s(&vocab), "--max-len", "4"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all("\ndo you like the red hat ?\nzzz qqq\n".as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.matches("(nothing to answer)").count(), 1);
    assert_eq!(text.matches("response:").count(), 2);

    let other_vocab = dir.path().join("other.txt");
    fs::write(&other_vocab, "<pad>\n<unk>\n<sos>\n<eos>\nfoo\n").unwrap();
    let bad = cword(&["generate", "--checkpoint", s(&ck), "--vocab", s(&other_vocab), "--contexts", s(&toy()), "--out", s(&hyps)]);
    assert_eq!(bad.status.code(), Some(1));
}
