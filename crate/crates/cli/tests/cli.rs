use std::process::{Command, Output};

use serde_json::Value;

fn xorcomm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xorcomm"))
        .args(args)
        .env_remove("XORCOMM_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn analyze_parity() {
    let r = json(&xorcomm(&["analyze", "--n", "8", "--profile", "parity"]));
    assert_eq!(r["trivial_class"], "Parity");
    assert_eq!(r["spectrum"]["rank"], "2");
    assert_eq!(r["spectrum"]["coeffs"][0], "128");
    assert_eq!(r["spectrum"]["coeffs"][8], "-128");
    assert_eq!(r["r"], 0);
}

#[test]
fn analyze_const0() {
    let r = json(&xorcomm(&["analyze", "--n", "8", "--profile", "const0"]));
    assert_eq!(r["spectrum"]["rank"], "0");
    assert_eq!(r["bounds"]["lower"], 0);
    assert_eq!(r["bounds"]["upper"], 0);
}

#[test]
fn analyze_threshold_gap() {
    let r = json(&xorcomm(&["analyze", "--n", "16", "--profile", "threshold:3"]));
    assert_eq!((r["r0"].as_u64(), r["r1"].as_u64()), (Some(4), Some(0)));
    assert_eq!(r["conjectured_unbounded_measure"], 2);
    assert_eq!(r["lemma_window"]["holds"], true);
}

#[test]
fn big_integers_are_strings() {
    let r = json(&xorcomm(&["analyze", "--n", "200", "--profile", "exact:0"]));
    let rank = r["spectrum"]["rank"].as_str().unwrap();
    // exact:0 has every coefficient equal to 1, so the rank is 2^200.
    assert_eq!(rank.len(), 61);
    assert!(rank.starts_with("1606938044258990275541962092341162602522202993782792835301376"));
    assert!(r["spectrum"]["coeffs"].as_array().unwrap().iter().all(Value::is_string));
}

#[test]
fn parse_errors_name_the_token() {
    for (profile, token) in [("bogus:3", "bogus"), ("mod:4:x", "x"), ("bits:0101", "0101")] {
        let out = xorcomm(&["analyze", "--n", "8", "--profile", profile]);
        assert_eq!(out.status.code(), Some(2), "{profile}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(token), "{profile}: {err}");
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(xorcomm(&["analyze", "--n", "8"]).status.code(), Some(2));
    assert_eq!(xorcomm(&["frobnicate"]).status.code(), Some(2));
    let out = xorcomm(&["simulate", "--protocol", "nope", "--n", "4", "--weight", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
    let out = xorcomm(&["simulate", "--protocol", "parity", "--n", "4", "--weight", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = xorcomm(&["verify", "--suite", "rank", "--n-max", "11"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_suites_pass() {
    for args in [
        &["verify", "--suite", "fourier", "--n-max", "6"][..],
        &["verify", "--suite", "rank", "--n-max", "5", "--samples", "3"],
        &["verify", "--suite", "lemma", "--n", "12", "--exhaustive"],
        &["verify", "--suite", "lemma", "--n", "40", "--samples", "500"],
        &["verify", "--suite", "ham-onesided", "--n", "10", "--trials", "20"],
    ] {
        let r = json(&xorcomm(args));
        assert_eq!(r["pass"], true, "{args:?}");
        assert_eq!(r["mismatches"], 0);
        assert!(r["checked"].as_u64().unwrap() > 0);
    }
}

#[test]
fn simulate_parity_is_exact() {
    let r = json(&xorcomm(&[
        "simulate", "--protocol", "parity", "--n", "16", "--weight", "5", "--trials", "50",
        "--aggregate",
    ]));
    assert_eq!(r["success_rate"], 1.0);
    assert_eq!(r["mean_bits"], 1.0);
}

#[test]
fn simulate_emits_one_line_per_trial() {
    let out = xorcomm(&[
        "simulate", "--protocol", "xor2way", "--profile", "exact:0", "--n", "64", "--weight",
        "0", "--trials", "7", "--seed", "7",
    ]);
    assert!(out.status.success());
    let lines: Vec<Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 7);
    for (i, line) in lines.iter().enumerate() {
        assert_eq!(line["trial"], i as u64);
        assert_eq!(line["distance"], 0);
        assert_eq!(line["truth"], true);
    }
}

#[test]
fn simulate_xor2way_equality() {
    let r = json(&xorcomm(&[
        "simulate", "--protocol", "xor2way", "--profile", "exact:0", "--n", "64", "--weight",
        "0", "--trials", "200", "--seed", "7", "--aggregate",
    ]));
    assert!(r["success_rate"].as_f64().unwrap() >= 0.9);
}

#[test]
fn simulate_fixed_pair() {
    let r = json(&xorcomm(&[
        "simulate", "--protocol", "fullsend", "--profile", "threshold:1", "--n", "4", "--x",
        "0110", "--y", "0000", "--trials", "3", "--aggregate",
    ]));
    assert_eq!(r["weight"], 2);
    assert_eq!(r["success_rate"], 1.0);
    assert_eq!(r["mean_bits"], 4.0);
}

#[test]
fn ham_takes_d_from_flag_or_threshold() {
    let by_flag = xorcomm(&[
        "simulate", "--protocol", "ham", "--profile", "threshold:3", "--d", "3", "--n", "64",
        "--weight", "2", "--trials", "5", "--aggregate",
    ]);
    let by_profile = xorcomm(&[
        "simulate", "--protocol", "ham", "--profile", "threshold:3", "--n", "64", "--weight",
        "2", "--trials", "5", "--aggregate",
    ]);
    assert_eq!(stdout(&by_flag), stdout(&by_profile));
    assert_eq!(json(&by_flag)["mean_bits"], 32.0);
    let out = xorcomm(&[
        "simulate", "--protocol", "ham", "--profile", "exact:3", "--n", "64", "--weight", "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_precedence() {
    let args = [
        "simulate", "--protocol", "xor2way", "--profile", "mod:3:0", "--n", "30", "--weight",
        "4", "--trials", "3",
    ];
    let run = |env: Option<&str>, seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_xorcomm"));
        cmd.args(args).env_remove("XORCOMM_SEED");
        if let Some(v) = env {
            cmd.env("XORCOMM_SEED", v);
        }
        if let Some(s) = seed {
            cmd.args(["--seed", s]);
        }
        stdout(&cmd.output().unwrap())
    };
    assert_eq!(run(None, None), run(None, Some("0")));
    assert_eq!(run(Some("5"), None), run(None, Some("5")));
    assert_eq!(run(Some("5"), Some("9")), run(None, Some("9")));
    assert_ne!(run(Some("5"), None), run(None, None));
}

const HEADER: &str =
    "n,family,r0,r1,r,protocol,weight,trials,success_rate,mean_bits,max_bits,rounds_mean";

#[test]
fn sweep_empty_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    let out = xorcomm(&[
        "sweep", "--protocol", "xor2way", "--family", "threshold:8", "--n", "", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(path).unwrap(), format!("{HEADER}\n"));
}

#[test]
fn sweep_rows_are_sorted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let out = xorcomm(&[
        "sweep", "--protocol", "xor2way", "--family", "threshold:2", "--n", "20,12,16",
        "--weight", "5,0,3", "--trials", "10", "--seed", "1", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(HEADER));
    let keys: Vec<(usize, usize)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f[1], "threshold:2");
            assert_eq!(f[5], "xor2way");
            (f[0].parse().unwrap(), f[6].parse().unwrap())
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(keys.len(), 9);
}

#[test]
fn sweep_unwritable_path() {
    let out = xorcomm(&[
        "sweep", "--protocol", "parity", "--family", "parity", "--n", "4", "--out",
        "/nonexistent-dir/x.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sequential_matches_parallel() {
    let args = [
        "sweep", "--protocol", "xor1way", "--family", "exact:1", "--n", "16", "--trials", "20",
        "--seed", "4",
    ];
    let par = xorcomm(&args);
    let mut seq_args = vec!["--sequential"];
    seq_args.extend(args);
    let seq = xorcomm(&seq_args);
    assert!(par.status.success());
    assert_eq!(par.stdout, seq.stdout);
}
