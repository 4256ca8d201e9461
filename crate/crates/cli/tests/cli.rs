//! End-to-end CLI tests: golden fixtures, file round trips and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_substrace"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Fragments of a trace file, sorted (order-insensitive comparison).
fn fragments(text: &str) -> Vec<String> {
    let mut frags: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect();
    frags.sort();
    frags
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("substrace-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn channel_reproduces_canonical_worked_example() {
    let out_path = tmp("canon.trace");
    let out = run(&[
        "channel",
        "--q", "2",
        "--lmin", "4",
        "--lover", "2",
        "--policy", "canonical",
        "--in", fixture("strand.txt").to_str().unwrap(),
        "--out", out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let got = std::fs::read_to_string(&out_path).unwrap();
    let expected = std::fs::read_to_string(fixture("canonical_l4_o2.txt")).unwrap();
    assert_eq!(fragments(&got), fragments(&expected));
}

#[test]
fn channel_is_deterministic_per_seed() {
    let run_once = |path: &Path| {
        let out = run(&[
            "channel",
            "--q", "2",
            "--lmin", "4",
            "--lover", "2",
            "--policy", "uniform-random",
            "--seed", "11",
            "--in", fixture("strand.txt").to_str().unwrap(),
            "--out", path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        std::fs::read_to_string(path).unwrap()
    };
    let a = run_once(&tmp("seeded-a.trace"));
    let b = run_once(&tmp("seeded-b.trace"));
    assert_eq!(a, b);
}

#[test]
fn validator_reproduces_worked_classifications() {
    for (file, expected) in [
        ("trace_valid.txt", "valid"),
        ("trace_complete_invalid.txt", "complete_but_invalid"),
        ("trace_incomplete.txt", "trace_but_incomplete"),
    ] {
        let out = run(&[
            "validate",
            "--q", "2",
            "--lmin", "6",
            "--lover", "2",
            "--in", fixture("strand.txt").to_str().unwrap(),
            "--trace", fixture(file).to_str().unwrap(),
        ]);
        assert!(out.status.success());
        let text = stdout(&out);
        assert!(
            text.contains(&format!("classification={expected}")),
            "{file}: {text}"
        );
    }
}

#[test]
fn sampled_channel_output_validates() {
    let trace_path = tmp("uniform.trace");
    let out = run(&[
        "channel",
        "--q", "2",
        "--lmin", "4",
        "--lover", "2",
        "--policy", "uniform-random",
        "--seed", "3",
        "--in", fixture("strand.txt").to_str().unwrap(),
        "--out", trace_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = run(&[
        "validate",
        "--q", "2",
        "--lmin", "4",
        "--lover", "2",
        "--in", fixture("strand.txt").to_str().unwrap(),
        "--trace", trace_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("classification=valid"));
}

const DESK: &[&str] = &[
    "--q", "4", "--n", "256", "--lmin", "16", "--lover", "12", "--f", "2", "--index-len", "2",
];

#[test]
fn encode_channel_decode_round_trip_via_files() {
    // message of 96 quaternary symbols
    let message: String = (0..96).map(|i| char::from(b'0' + ((i * 7 + 3) % 4) as u8)).collect();
    let msg_path = tmp("msg.txt");
    std::fs::write(&msg_path, format!("{message}\n")).unwrap();

    let code_path = tmp("codeword.txt");
    let mut args = vec!["encode"];
    args.extend_from_slice(DESK);
    args.extend_from_slice(&["--in", msg_path.to_str().unwrap(), "--out", code_path.to_str().unwrap()]);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let trace_path = tmp("codeword.trace");
    let out = run(&[
        "channel",
        "--q", "4",
        "--lmin", "16",
        "--lover", "12",
        "--policy", "uniform-random",
        "--seed", "5",
        "--in", code_path.to_str().unwrap(),
        "--out", trace_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let back_path = tmp("decoded.txt");
    let mut args = vec!["decode"];
    args.extend_from_slice(DESK);
    args.extend_from_slice(&["--in", trace_path.to_str().unwrap(), "--out", back_path.to_str().unwrap()]);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let decoded = std::fs::read_to_string(&back_path).unwrap();
    let line = decoded.lines().find(|l| !l.starts_with('#') && !l.trim().is_empty()).unwrap();
    assert_eq!(line, message);
}

#[test]
fn encode_with_wrong_message_length_exits_2() {
    let msg_path = tmp("short.txt");
    std::fs::write(&msg_path, "0123\n").unwrap();
    let out_path = tmp("short.code");
    let mut args = vec!["encode"];
    args.extend_from_slice(DESK);
    args.extend_from_slice(&["--in", msg_path.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn decode_of_foreign_trace_is_nonsilent() {
    // a trace that is no trace of any codeword of these params
    let trace_path = tmp("foreign.trace");
    std::fs::write(&trace_path, "2222222222222222\n\n").unwrap();
    let back_path = tmp("foreign.msg");
    let mut args = vec!["decode"];
    args.extend_from_slice(DESK);
    args.extend_from_slice(&["--in", trace_path.to_str().unwrap(), "--out", back_path.to_str().unwrap()]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_input_file_exits_4() {
    let mut args = vec!["decode"];
    args.extend_from_slice(DESK);
    args.extend_from_slice(&["--in", "/nonexistent/trace.txt", "--out", "/tmp/out.txt"]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn spectrum_lists_expected_trace() {
    let strand = tmp("tiny-strand.txt");
    std::fs::write(&strand, "0110\n").unwrap();
    let out = run(&[
        "spectrum",
        "--q", "2",
        "--lmin", "2",
        "--lover", "1",
        "--in", strand.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("spectrum_size="));
    // the canonical step-1 trace {01, 11, 10} must appear as some block
    let body: Vec<&str> = text
        .lines()
        .skip_while(|l| !l.starts_with("spectrum_size="))
        .skip(1)
        .collect();
    let mut blocks: Vec<Vec<String>> = Vec::new();
    let mut current: Vec<String> = Vec::new();
    for line in body {
        if line.trim().is_empty() {
            if !current.is_empty() {
                current.sort();
                blocks.push(std::mem::take(&mut current));
            }
        } else {
            current.push(line.trim().to_string());
        }
    }
    let mut expected = vec!["01".to_string(), "10".into(), "11".into()];
    expected.sort();
    assert!(blocks.iter().any(|b| *b == expected), "{text}");
}

#[test]
fn assemble_reconstructs_repeat_free_strand() {
    let trace_path = tmp("assemble.trace");
    std::fs::write(&trace_path, "0001\n0010\n0101\n1011\n0111\n\n").unwrap();
    let out = run(&[
        "assemble",
        "--q", "2",
        "--lover", "3",
        "--in", trace_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("00010111"));
}

#[test]
fn assemble_ambiguous_exits_3() {
    let trace_path = tmp("ambiguous.trace");
    std::fs::write(&trace_path, "011\n110\n\n").unwrap();
    let out = run(&[
        "assemble",
        "--q", "2",
        "--lover", "1",
        "--in", trace_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bounds_sweep_has_expected_shape() {
    let out = run(&[
        "bounds", "--a", "2", "--gamma-from", "0.1", "--gamma-to", "0.5",
        "--gamma-step", "0.1", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("a,"))
        .filter(|l| !l.trim().is_empty())
        .collect();
    assert_eq!(rows.len(), 5, "{text}");
    let last: Vec<&str> = rows[4].split(',').collect();
    assert_eq!(last[2], "1.000000");

    // a = 1: vanishing-rate region, rate column is zero
    let out = run(&[
        "bounds", "--a", "1", "--gamma-from", "0.2", "--gamma-to", "0.4",
        "--gamma-step", "0.1", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    for row in text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("a,")) {
        if row.trim().is_empty() {
            continue;
        }
        assert_eq!(row.split(',').nth(2), Some("0.000000"), "{row}");
    }
}

#[test]
fn bounds_domain_violation_names_parameter() {
    let out = run(&["bounds", "--a", "2", "--gamma-from", "0.6", "--gamma-to", "0.7", "--gamma-step", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));
}

#[test]
fn config_file_with_flag_overrides() {
    let cfg = tmp("desk.cfg");
    std::fs::write(&cfg, "q=4\nn=256\nlmin=16\nlover=12\nf=2\nindex-len=2\n").unwrap();
    let out = run(&["params", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("# msg_len=6"));
    // flag overrides the config value and changes the outcome
    let out = run(&["params", "--config", cfg.to_str().unwrap(), "--n", "260"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fuzz_smoke_run_passes() {
    let mut args = vec!["fuzz"];
    args.extend_from_slice(DESK);
    args.extend_from_slice(&["--seeds", "5", "--rf-max-n", "8"]);
    let out = run(&args);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("phase=round_trip"));
    assert!(text.contains("phase=reconstruction"));
    assert!(text.contains("failures=0"));
}
