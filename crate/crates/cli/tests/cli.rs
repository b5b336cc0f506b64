//! End-to-end tests of the `vcontract` binary: stage wiring, exit codes,
//! diagnostics, config precedence, and artifact determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn contracts() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../contracts")
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vcontract"))
        .current_dir(dir)
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

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        stdout(out),
        stderr(out)
    );
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name))
        .unwrap_or_else(|e| panic!("read {name}: {e}"))
}

/// Runs the whole pipeline on the sum contract and returns the artifact dir.
fn pipeline(dir: &Path, extra: &[&str]) -> PathBuf {
    std::fs::write(dir.join("inputs.txt"), "2\n3\n").unwrap();
    let sum = contracts().join("sum.c");
    let mut args =
        vec!["all", sum.to_str().unwrap(), "--inputs", "inputs.txt", "--dir", "art"];
    args.extend_from_slice(extra);
    let out = run(dir, &args);
    assert_exit(&out, 0);
    dir.join("art")
}

#[test]
fn all_pipeline_accepts_and_reports_each_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let art = pipeline(tmp.path(), &[]);
    let log = stdout(&run(
        tmp.path(),
        &[
            "run-chain",
            art.join("bundle.txt").to_str().unwrap(),
        ],
    ));
    assert!(log.contains("run-chain: accept"), "log: {log}");
    assert_eq!(read(&art, "outputs.txt"), "5\n", "2 + 3 was proven");
    for name in
        ["circuit.txt", "minimized.txt", "qap.txt", "ek.txt", "vk.txt", "proof.txt"]
    {
        assert!(art.join(name).exists(), "missing {name}");
    }
}

#[test]
fn fixed_seed_reproduces_every_artifact_byte_for_byte() {
    let t1 = tempfile::tempdir().unwrap();
    let t2 = tempfile::tempdir().unwrap();
    let a1 = pipeline(t1.path(), &["--rng-seed", "9"]);
    let a2 = pipeline(t2.path(), &["--rng-seed", "9"]);
    for name in
        ["circuit.txt", "minimized.txt", "qap.txt", "ek.txt", "vk.txt", "proof.txt", "bundle.txt"]
    {
        assert_eq!(read(&a1, name), read(&a2, name), "{name} must be reproducible");
    }
    let t3 = tempfile::tempdir().unwrap();
    let a3 = pipeline(t3.path(), &["--rng-seed", "10"]);
    assert_ne!(read(&a1, "ek.txt"), read(&a3, "ek.txt"), "seed must matter");
}

#[test]
fn compile_emits_one_data_path_add_and_honors_bitwidth() {
    let tmp = tempfile::tempdir().unwrap();
    let sum = contracts().join("sum.c");
    let out = run(
        tmp.path(),
        &["compile", sum.to_str().unwrap(), "--out", "c.txt", "--bitwidth", "8"],
    );
    assert_exit(&out, 0);
    let text = read(tmp.path(), "c.txt");
    assert!(text.starts_with("bitwidth 8\n"), "text: {text}");
    let adds = text.lines().filter(|l| l.starts_with("ADD ")).count();
    assert_eq!(adds, 1, "one data-path addition");
}

#[test]
fn bad_source_exits_two_with_file_line_diagnostic() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("bad.c"),
        "struct in_T { unsigned int a; };\nstruct out_T { unsigned int o; };\n\
         void contract(struct in_T *in, struct out_T *out) { out->o = in->b; }\n",
    )
    .unwrap();
    let out = run(tmp.path(), &["compile", "bad.c", "--out", "c.txt"]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("bad.c:3:"), "stderr: {}", stderr(&out));
}

#[test]
fn config_file_overrides_defaults_and_flags_override_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("pipeline.toml"), "bit_width = 8\n").unwrap();
    let sum = contracts().join("sum.c");
    let sum = sum.to_str().unwrap();

    let out = run(
        tmp.path(),
        &["--config", "pipeline.toml", "compile", sum, "--out", "a.txt"],
    );
    assert_exit(&out, 0);
    assert!(read(tmp.path(), "a.txt").starts_with("bitwidth 8\n"));

    let out = run(
        tmp.path(),
        &["--config", "pipeline.toml", "--bit-width", "10", "compile", sum, "--out", "b.txt"],
    );
    assert_exit(&out, 0);
    assert!(read(tmp.path(), "b.txt").starts_with("bitwidth 10\n"));
}

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let sum = contracts().join("sum.c");
    let sum = sum.to_str().unwrap();

    let nonprime =
        run(tmp.path(), &["compile", sum, "--out", "c.txt", "--field-modulus", "100"]);
    assert_exit(&nonprime, 2);
    assert!(stderr(&nonprime).contains("not prime"));

    let missing = run(tmp.path(), &["run-chain", "nonexistent.txt"]);
    assert_exit(&missing, 2);

    let unknown_flag = run(tmp.path(), &["compile", sum, "--no-such-flag"]);
    assert_exit(&unknown_flag, 2);
}

#[test]
fn tampered_io_and_mismatched_vk_are_rejected_with_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let art = pipeline(tmp.path(), &[]);
    let art = |name: &str| art.join(name).into_os_string().into_string().unwrap();

    std::fs::write(tmp.path().join("lie.txt"), "6\n").unwrap();
    let tampered = run(
        tmp.path(),
        &[
            "verify", "--vk", &art("vk.txt"), "--inputs", "inputs.txt",
            "--outputs", "lie.txt", "--proof", &art("proof.txt"),
        ],
    );
    assert_exit(&tampered, 1);
    assert!(stdout(&tampered).contains("reject"));

    let other = run(
        tmp.path(),
        &[
            "setup", &art("minimized.txt"), "--ek", "ek2.txt", "--vk", "vk2.txt",
            "--rng-seed", "77",
        ],
    );
    assert_exit(&other, 0);
    let mismatched = run(
        tmp.path(),
        &[
            "verify", "--vk", "vk2.txt", "--inputs", "inputs.txt",
            "--outputs", &art("outputs.txt"), "--proof", &art("proof.txt"),
        ],
    );
    assert_exit(&mismatched, 1);
}

#[test]
fn corrupt_witness_hook_is_rejected_at_prove_time() {
    let tmp = tempfile::tempdir().unwrap();
    let art = pipeline(tmp.path(), &[]);
    let art = |name: &str| art.join(name).into_os_string().into_string().unwrap();
    let out = run(
        tmp.path(),
        &[
            "prove", &art("minimized.txt"), "--ek", &art("ek.txt"),
            "--inputs", "inputs.txt", "--proof", "p2.txt", "--outputs", "o2.txt",
            "--corrupt-witness", "4",
        ],
    );
    assert_exit(&out, 1);
    assert!(stdout(&out).contains("reject"), "stdout: {}", stdout(&out));
}

#[test]
fn minimize_records_cores_and_strategy_and_never_grows_the_circuit() {
    let tmp = tempfile::tempdir().unwrap();
    let range = contracts().join("range.c");
    let compile = run(
        tmp.path(),
        &["compile", range.to_str().unwrap(), "--out", "r.txt", "--bit-width", "4"],
    );
    assert_exit(&compile, 0);
    let out = run(
        tmp.path(),
        &[
            "minimize", "r.txt", "--out", "rmin.txt", "--report", "rep.txt",
            "--cores", "4", "--strategy", "lpt",
        ],
    );
    assert_exit(&out, 0);
    let report = read(tmp.path(), "rep.txt");
    assert!(report.starts_with("cores 4, strategy lpt\n"), "report: {report}");
    let totals = report
        .lines()
        .find_map(|l| l.strip_prefix("total gates: "))
        .expect("totals line");
    let (before, after) = totals.split_once(" -> ").expect("arrow");
    assert!(
        after.trim().parse::<usize>().unwrap() <= before.trim().parse::<usize>().unwrap(),
        "totals: {totals}"
    );
}

#[test]
fn multi_chunk_bundle_accepts_and_rejects_a_corrupted_spend() {
    let tmp = tempfile::tempdir().unwrap();
    let art = pipeline(tmp.path(), &[]);
    let art = |name: &str| art.join(name).into_os_string().into_string().unwrap();
    let script = run(
        tmp.path(),
        &[
            "script", "--vk", &art("vk.txt"), "--proof", &art("proof.txt"),
            "--inputs", "inputs.txt", "--outputs", &art("outputs.txt"),
            "--out", "mb.txt", "--max-push", "150",
        ],
    );
    assert_exit(&script, 0);
    assert!(stdout(&script).contains("vk chunks 3"), "stdout: {}", stdout(&script));
    assert_exit(&run(tmp.path(), &["run-chain", "mb.txt"]), 0);

    let text = read(tmp.path(), "mb.txt");
    let corrupted: String = text
        .lines()
        .map(|l| match l.strip_prefix("spending ") {
            Some(hex) => {
                let mid = hex.len() / 2;
                let flip = if hex.as_bytes()[mid] == b'0' { "1" } else { "0" };
                format!("spending {}{}{}", &hex[..mid], flip, &hex[mid + 1..])
            }
            None => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(tmp.path().join("mbbad.txt"), corrupted).unwrap();
    let out = run(tmp.path(), &["run-chain", "mbbad.txt"]);
    assert_exit(&out, 1);
    assert!(stdout(&out).contains("reject"));
}
