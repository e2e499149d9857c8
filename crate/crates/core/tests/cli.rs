use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;

use tmk::cli::dispatch;
use tmk::gateway::{ChatProvider, ChatTurn, HttpProvider, ProviderConfig};
use tmk::study::synth::{planted_study, SynthConfig, FIXTURE_SEED};
use tmk::study::{ingest, write_csv, PerceptionKey};

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/study_synthetic.csv");
const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/analyze");

fn call(args: &[&str], stdin: &str) -> (i32, String, String) {
    let mut input = stdin.as_bytes();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("tmk").chain(args.iter().copied());
    let code = dispatch(argv, &mut input, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn bundled_fixture_is_the_seeded_synthetic_study() {
    let records = planted_study(FIXTURE_SEED, &SynthConfig::default());
    let mut buf = Vec::new();
    write_csv(&records, &mut buf, &PerceptionKey::default()).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), fs::read_to_string(FIXTURE).unwrap());
    let back = ingest(FIXTURE, &PerceptionKey::default()).unwrap();
    assert!(back.rejected.is_empty());
    assert_eq!(back.records.len(), 150);
}

#[test]
fn analyze_matches_golden_tables() {
    let out = tempfile::tempdir().unwrap();
    let (code, stdout, err) = call(&["analyze", "--input", FIXTURE, "--out", out.path().to_str().unwrap()], "");
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("150 records analysed, 0 rejected"));
    let mut compared = 0;
    for entry in fs::read_dir(GOLDEN).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap();
        let got = fs::read_to_string(out.path().join(name)).unwrap();
        assert_eq!(got, fs::read_to_string(&path).unwrap(), "{} differs", name.to_string_lossy());
        compared += 1;
    }
    assert_eq!(compared, 10);
    for extra in ["summary.json", "audit.jsonl"] {
        assert!(out.path().join(extra).is_file());
    }
}

#[test]
fn synth_then_analyze_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let (code, _, err) = call(&["--seed", "3", "synth", "--n-per-condition", "20", "--out", d], "");
    assert_eq!(code, 0, "{err}");
    let csv = dir.path().join("synthetic.csv");
    let out = dir.path().join("tables");
    let (code, stdout, err) = call(
        &["analyze", "--input", csv.to_str().unwrap(), "--conditions", "low=LLLLL,medium=MMMMM,high=HHHHH", "--out", out.to_str().unwrap()],
        "",
    );
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("60 records analysed"));
    assert!(out.join("table2_condition_kw.csv").is_file());
}

#[test]
fn validate_all_profiles_with_mock() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, err) = call(&["--provider", "mock", "--out", dir.path().to_str().unwrap(), "validate", "--profiles", "all"], "");
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("1215 / 1215 observations matched"), "{stdout}");
    assert!(dir.path().join("store").is_dir());
    assert!(dir.path().join("report").is_dir());

    // a second run resumes from the store
    let (code, stdout, _) = call(&["--provider", "mock", "--out", dir.path().to_str().unwrap(), "validate", "--profiles", "all"], "");
    assert_eq!(code, 0);
    assert!(stdout.contains("cells completed 0"), "{stdout}");
}

#[test]
fn fidelity_condition_counts_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, err) = call(
        &["--out", dir.path().to_str().unwrap(), "fidelity-condition", "--profile", "MMMMM", "--runs", "40"],
        "",
    );
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("200"), "{stdout}");
}

#[test]
fn simulate_writes_a_replayable_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, err) = call(&["--out", dir.path().to_str().unwrap(), "simulate", "--profile", "HHHHH"], "");
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("terminated"), "{stdout}");
    let files: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert!(!files.is_empty());
}

#[test]
fn chat_repl_reads_until_eof() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, err) = call(
        &["--out", dir.path().to_str().unwrap(), "chat", "--profile", "MMMMM"],
        "hi there\nI'd like a park\n",
    );
    assert_eq!(code, 0, "{err}");
    assert!(!stdout.trim().is_empty());
    assert!(dir.path().join("chat_transcript.jsonl").is_file());
}

fn read_request(stream: &mut std::net::TcpStream) -> (String, String) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut head = String::new();
    let mut len = 0usize;
    loop {
        let mut line = String::new();
        reader.read_line(&mut line).unwrap();
        if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
            len = v.trim().parse().unwrap();
        }
        if line == "\r\n" || line.is_empty() {
            break;
        }
        head.push_str(&line);
    }
    let mut body = vec![0; len];
    reader.read_exact(&mut body).unwrap();
    (head, String::from_utf8(body).unwrap())
}

#[test]
fn http_provider_sends_key_only_in_header() {
    const ENV: &str = "TMK_IT_LOCAL_KEY";
    const KEY: &str = "sk-local-secret-123";
    std::env::set_var(ENV, KEY);
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = thread::spawn(move || {
        let (mut stream, _) = listener.accept().unwrap();
        let (head, body) = read_request(&mut stream);
        let reply = r#"{"choices":[{"message":{"role":"assistant","content":"4"}}]}"#;
        write!(
            stream,
            "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
            reply.len()
        )
        .unwrap();
        (head, body)
    });
    let cfg = ProviderConfig {
        base_url: format!("http://{addr}/v1"),
        api_key_env: ENV.into(),
        max_retries: 0,
        ..ProviderConfig::default()
    };
    let provider = HttpProvider::new(cfg).unwrap();
    let reply = provider.complete(&[ChatTurn::system("be brief"), ChatTurn::user("rate 1-5")]).unwrap();
    assert_eq!(reply, "4");
    let (head, body) = server.join().unwrap();
    assert!(head.starts_with("POST /v1/chat/completions"), "{head}");
    assert!(head.to_ascii_lowercase().contains(&format!("authorization: bearer {}", KEY.to_ascii_lowercase())));
    assert!(!body.contains(KEY));
    let json: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(json["messages"].as_array().unwrap().len(), 2);
    assert_eq!(json["temperature"], 1.0);
}
