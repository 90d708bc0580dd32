use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data/toy")
        .join(name)
}

fn treecut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treecut"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn toy_args(sub: &str) -> Vec<String> {
    vec![
        sub.into(),
        "--grammar".into(),
        data("grammar.txt").display().to_string(),
        "--train".into(),
        data("train.trees").display().to_string(),
        "--top".into(),
        "s".into(),
    ]
}

fn run(args: Vec<String>) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    treecut(&refs)
}

#[test]
fn entropy_table_prints_two_decimals() {
    let o = run(toy_args("entropy-table"));
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("pp_prep_np\t0.64\t0.00\t1.10\n"), "{out}");
    assert!(out.contains("np_pron\t0.00\t0.00\t---\n"), "{out}");
}

#[test]
fn index_dump_and_entropy() {
    let mut args = toy_args("index");
    args.push("--dump".into());
    let out = stdout(&run(args));
    assert!(out.starts_with("or-nodes\t24\nlexical-only\t14\n"), "{out}");
    assert!(out.contains("n6 np visits=2"));

    let out = stdout(&run(toy_args("entropy")));
    assert!(out.contains("n6\tnp\t1.7647"), "{out}");
}

#[test]
fn cut_lists_the_np_nodes() {
    let mut args = toy_args("cut");
    args.extend([
        "--threshold".into(),
        "1.0".into(),
        "--scheme".into(),
        "mixed".into(),
    ]);
    let out = stdout(&run(args));
    assert!(out.starts_with("cutnodes\tn3 n4 n6 n9\n"), "{out}");
}

#[test]
fn bisect_reports_and_exit_codes() {
    let mut args = toy_args("bisect");
    args.extend([
        "--test".into(),
        data("test.trees").display().to_string(),
        "--coverage".into(),
        "1.0".into(),
    ]);
    let o = run(args.clone());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(
        out.contains("attainable\ttrue") && out.contains("rules\t5"),
        "{out}"
    );

    args.push("--neighbor-restrictions".into());
    let o = run(args);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
}

#[test]
fn extract_evaluate_stats() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("fig1.rules");
    let mut args = toy_args("extract");
    args.extend([
        "--threshold".into(),
        "1.0".into(),
        "-o".into(),
        rules.display().to_string(),
    ]);
    assert!(run(args).status.success());

    let g = data("grammar.txt").display().to_string();
    let r = rules.display().to_string();
    let t = data("test.trees").display().to_string();
    let o = treecut(&[
        "evaluate",
        "--grammar",
        &g,
        "--top",
        "s",
        "--rules",
        &r,
        "--test",
        &t,
    ]);
    let out = stdout(&o);
    assert!(out.starts_with("coverage\t1.0000\t1/1\n"), "{out}");
    assert!(out.contains("0.0\t40.0\t60.0\t0.0"), "{out}");

    let o = treecut(&["stats", "--grammar", &g, "--top", "s", "--rules", &r]);
    assert!(
        stdout(&o).contains("20.0\t20.0\t40.0\t20.0"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn run_andor_with_fixed_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("reports");
    let mut args = toy_args("run");
    args.extend([
        "--test".into(),
        data("test.trees").display().to_string(),
        "--mode".into(),
        "andor".into(),
        "--threshold".into(),
        "1.0".into(),
        "--out".into(),
        out_dir.display().to_string(),
    ]);
    let o = run(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rules = std::fs::read_to_string(out_dir.join("rules.txt")).unwrap();
    assert_eq!(rules.lines().filter(|l| l.contains(" => ")).count(), 7);
    assert!(rules.starts_with("# grammar=grammar.txt"));
}

#[test]
fn missing_grammar_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("reports");
    let t = data("test.trees").display().to_string();
    let tr = data("train.trees").display().to_string();
    let o = treecut(&[
        "run",
        "--grammar",
        "/nonexistent/grammar.txt",
        "--train",
        &tr,
        "--top",
        "s",
        "--test",
        &t,
        "--out",
        &out_dir.display().to_string(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/grammar.txt"));
    assert!(!out_dir.exists());
}

#[test]
fn bad_grammar_line_is_located() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    std::fs::write(&g, "r1 s -> a\nr2 s a\n").unwrap();
    let o = treecut(&[
        "entropy-table",
        "--grammar",
        &g.display().to_string(),
        "--train",
        &data("train.trees").display().to_string(),
        "--top",
        "s",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");
}
