use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use tempfile::{tempdir, NamedTempFile};

fn randstream(args: &[&str], stdin: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_randstream"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn file_with(contents: &[u8]) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(contents).unwrap();
    f
}

fn read_stats(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn coin_worked_example() {
    let o = randstream(&["extract", "--mode", "coin"], b"HTTTHT\n");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "11\n");
    let o = randstream(&["extract"], b"hh");
    assert_eq!(stdout(&o), "\n");
}

#[test]
fn dice_from_file_infers_alphabet() {
    let f = file_with(b"012112210\n");
    let path = f.path().to_str().unwrap();
    let o = randstream(&["extract", "--mode", "dice", "--input", path], b"");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "010011\n");
    let explicit = randstream(&["extract", "--mode", "dice", "--m", "3"], b"0 1 2 1 1 2 2 1 0");
    assert_eq!(stdout(&explicit), "010011\n");
}

#[test]
fn large_alphabets_use_tokens() {
    let o = randstream(&["extract", "--mode", "dice", "--m", "12", "--stats"], b"11 3 10 0 7 11 3 3\n");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stats: Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(stats["input_symbols"], 8);
    assert_eq!(stats["m"], 12);
}

#[test]
fn bad_symbol_reports_offset() {
    let o = randstream(&["extract"], b"HT TQH");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("byte offset 4"), "{}", stderr(&o));
    let o = randstream(&["extract", "--mode", "dice", "--m", "3"], b"0123");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("byte offset 3"));
}

#[test]
fn exhaustion_keeps_partial_output() {
    let dir = tempdir().unwrap();
    let stats = dir.path().join("stats.json");
    let o = randstream(
        &["extract", "--bits", "3", "--stats-file", stats.to_str().unwrap()],
        b"HTTTHT",
    );
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stdout(&o), "11\n");
    let s = read_stats(&stats);
    assert_eq!(s["output_bits"], 2);
    assert_eq!(s["input_symbols"], 6);
}

#[test]
fn stops_at_requested_bits() {
    let o = randstream(&["extract", "--bits", "2", "--stats"], b"HTTTHTHTHTHTTH");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "11\n");
    let s: Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(s["input_symbols"], 6);
    assert_eq!(s["output_bits"], 2);
    assert_eq!(s["tosses_per_bit_observed"], 3.0);
    for key in ["mode", "depth", "m", "messages_processed", "wall_seconds"] {
        assert!(s.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn config_errors() {
    for args in [
        &["extract", "--mode", "markov"][..],
        &["extract", "--mode", "dice", "--m", "3", "--input-format", "bits"],
        &["extract", "--depth", "deep"],
        &["extract", "--mode", "coin", "--m", "3"],
        &["extract", "--input", "/nonexistent/input"],
        &["extract", "--mode", "markov", "--m", "3", "--state-order", "0,0,1"],
        &["analyze", "--ps", "1.5"],
        &["verify", "--n-max", "20"],
    ] {
        let o = randstream(args, b"");
        assert_eq!(o.status.code(), Some(4), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn packed_output_and_bit_input() {
    let dir = tempdir().unwrap();
    let stats = dir.path().join("s.json");
    // 0xB4 = 1011 0100: pairs HT HH TH TT.
    let input = file_with(&[0xB4, 0xB4]);
    let args = [
        "extract",
        "--mode",
        "vonneumann",
        "--input",
        input.path().to_str().unwrap(),
        "--input-format",
        "bits",
        "--output-format",
        "packed",
        "--stats-file",
        stats.to_str().unwrap(),
    ];
    let o = randstream(&args, b"");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(o.stdout, [0b1010_0000]);
    let s = read_stats(&stats);
    assert_eq!(s["output_bits"], 4);
    assert_eq!(s["tail_bits"], 4);
    assert_eq!(s["depth"], Value::Null);
    assert_eq!(s["input_symbols"], 16);
}

#[test]
fn packed_bytes_match_ascii() {
    let input: Vec<u8> = (0..4000u32).map(|i| if i.wrapping_mul(2654435761) >> 29 < 3 { b'H' } else { b'T' }).collect();
    let ascii = randstream(&["extract", "--depth", "unlimited"], &input);
    let packed = randstream(&["extract", "--depth", "unlimited", "--output-format", "packed"], &input);
    let bits = stdout(&ascii).trim().to_string();
    assert!(bits.len() > 100);
    let expected: Vec<u8> = bits
        .as_bytes()
        .chunks(8)
        .map(|c| c.iter().enumerate().fold(0, |acc, (i, &b)| acc | (u8::from(b == b'1') << (7 - i))))
        .collect();
    assert_eq!(packed.stdout, expected);
}

#[test]
fn markov_modes() {
    let path = b"0 3 1 0 2 1 2 0 0 1 2 3 0 1 1 0 3 3 2 0 1 2 2 1 0 3";
    let o = randstream(&["extract", "--mode", "markov", "--m", "4", "--stats"], path);
    assert_eq!(o.status.code(), Some(0));
    let s: Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(s["input_symbols"], 26);
    let reordered = randstream(
        &["extract", "--mode", "markov", "--m", "4", "--state-order", "3,2,1,0"],
        path,
    );
    assert_eq!(reordered.status.code(), Some(0));
    let same = randstream(
        &["extract", "--mode", "markov", "--m", "4", "--state-order", "0,1,2,3"],
        path,
    );
    assert_eq!(same.stdout, o.stdout);
}

#[test]
fn runs_are_reproducible() {
    let input: Vec<u8> = (0..2000u32).map(|i| if i % 7 < 2 || i % 11 == 0 { b'H' } else { b'T' }).collect();
    let a = randstream(&["extract", "--depth", "4"], &input);
    let b = randstream(&["extract", "--depth", "4"], &input);
    assert_eq!(a.stdout, b.stdout);
    let bench = ["bench", "--p", "0.3", "--depth", "5", "--bits", "2000", "--seed", "9", "--trials", "2"];
    assert_eq!(randstream(&bench, b"").stdout, randstream(&bench, b"").stdout);
}

#[test]
fn analyze_tables() {
    let o = randstream(&["analyze"], b"");
    let text = stdout(&o);
    assert!(text.contains("1.2748"));
    assert!(text.lines().last().unwrap().trim_start().starts_with("inf"));
    assert!(text.contains("2.1322"));
    let cell = randstream(&["analyze", "--depths", "3", "--ps", "0.4", "--format", "csv"], b"");
    assert_eq!(stdout(&cell), "depth,p,tosses_per_bit\n3,0.4,1.519008\ninf,0.4,1.029919\n");
    let time = stdout(&randstream(&["analyze", "--metric", "time"], b""));
    assert!(time.contains("3.9599") && time.contains("10.6458"));
}

#[test]
fn verify_reports() {
    let o = randstream(&["verify", "--p", "1/3", "--depth", "1", "--bits", "2"], b"");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("uniform: yes"));
    let o = randstream(&["verify", "--mode", "dice", "--dist", "1/2,1/3,1/6", "--n-max", "7"], b"");
    assert_eq!(o.status.code(), Some(0));
    let o = randstream(
        &["verify", "--mode", "markov", "--matrix", "1/3,2/3;3/4,1/4", "--bits", "2", "--format", "csv"],
        b"",
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("output,mass\n00,"));
    let o = randstream(&["verify", "--n-max", "15", "--depth", "0", "--force"], b"");
    assert_eq!(o.status.code(), Some(0));
}
