use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use catacode_core::machine::{programs, write_program, MachineSpec};
use serde_json::Value;
use tempfile::TempDir;

fn catacode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catacode")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

struct Dir(TempDir);

impl Dir {
    fn new() -> Dir {
        Dir(TempDir::new().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn write(&self, name: &str, text: &str) -> String {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    }

    fn program(&self, name: &str, spec: &MachineSpec) -> String {
        self.write(name, &write_program(spec))
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }
}

fn tape_text(bits: &[bool]) -> String {
    let mut s = format!("{}\n", bits.len());
    for chunk in bits.chunks(4) {
        let v = chunk.iter().enumerate().fold(0u32, |a, (i, &b)| a | (b as u32) << (3 - i));
        s.push(char::from_digit(v, 16).unwrap());
    }
    s.push('\n');
    s
}

fn pattern(n: usize) -> Vec<bool> {
    (0..n).map(|i| (i * 5 + i / 3) % 7 < 3).collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn field_prints_modulus_and_order() {
    let out = catacode(&["field", "--r", "4"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "modulus 0x13 (x^4 + x + 1)\ngenerator order 15\n");
    assert_eq!(code(&catacode(&["field", "--r", "1"])), 2);
    assert_eq!(code(&catacode(&["field", "--r", "40"])), 2);
}

#[test]
fn encode_decode_without_flips() {
    let d = Dir::new();
    let tape = d.write("t.txt", &tape_text(&pattern(256)));
    assert_eq!(code(&catacode(&["encode", "--tape", &tape, "--e", "4", "--out", &d.s("enc.txt")])), 0);
    let out = catacode(&[
        "decode", "--in", &d.s("enc.txt"), "--e", "4", "--c", "256", "--out", &d.s("dec.txt"), "--report",
        &d.s("r.json"),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_to_string(d.path("dec.txt")).unwrap(), tape_text(&pattern(256)));
    let r = json(&d.path("r.json"));
    assert_eq!(r["support"], Value::Array(vec![]));
    assert_eq!(r["hamming_distance"], 0);
    assert_eq!(r["params"]["delta"], 9);
    assert!(r["meter"]["peak"].as_u64().unwrap() > 0);
}

#[test]
fn corrupt_then_decode_recovers_the_tape() {
    let d = Dir::new();
    let tape = d.write("t.txt", &tape_text(&pattern(300)));
    assert_eq!(code(&catacode(&["encode", "--tape", &tape, "--e", "3", "--out", &d.s("enc.txt")])), 0);
    for seed in 0..10 {
        let seed = seed.to_string();
        let flips = ["1", "2", "3"][seed.parse::<usize>().unwrap() % 3];
        let c = catacode(&["corrupt", "--in", &d.s("enc.txt"), "--flips", flips, "--seed", &seed, "--out", &d.s("bad.txt")]);
        assert_eq!(code(&c), 0);
        let out = catacode(&["decode", "--in", &d.s("bad.txt"), "--e", "3", "--c", "300", "--out", &d.s("dec.txt")]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(fs::read_to_string(d.path("dec.txt")).unwrap(), tape_text(&pattern(300)));
    }
}

#[test]
fn over_budget_corruption_exits_3_or_miscorrects() {
    // c = 256, e = 2: r = 9, 29 data symbols; check bits follow the tape
    let symbol = |p: usize| if p < 256 { p / 9 } else { 29 + (p - 256) / 9 };
    let d = Dir::new();
    let tape = d.write("t.txt", &tape_text(&pattern(256)));
    assert_eq!(code(&catacode(&["encode", "--tape", &tape, "--e", "2", "--out", &d.s("enc.txt")])), 0);
    let (mut detected, mut miscorrected, mut within) = (0, 0, 0);
    for seed in 0..30 {
        let seed = seed.to_string();
        let c = catacode(&["corrupt", "--in", &d.s("enc.txt"), "--flips", "3", "--seed", &seed, "--out", &d.s("bad.txt")]);
        let listed = stdout(&c);
        let positions: Vec<usize> = listed
            .trim()
            .trim_start_matches("flipped bits [")
            .trim_end_matches(']')
            .split(", ")
            .map(|x| x.parse().unwrap())
            .collect();
        let mut symbols: Vec<usize> = positions.iter().map(|&p| symbol(p)).collect();
        symbols.dedup();
        let out = catacode(&["decode", "--in", &d.s("bad.txt"), "--e", "2", "--c", "256", "--out", &d.s("dec.txt")]);
        let recovered = code(&out) == 0 && fs::read_to_string(d.path("dec.txt")).unwrap() == tape_text(&pattern(256));
        if symbols.len() <= 2 {
            assert!(recovered, "seed {seed}: flips {positions:?} span {} symbols", symbols.len());
            within += 1;
            continue;
        }
        match code(&out) {
            3 => detected += 1,
            0 => {
                assert!(!recovered);
                miscorrected += 1;
            }
            other => panic!("exit {other}"),
        }
    }
    assert!(detected > 0, "detected {detected}, miscorrected {miscorrected}, within budget {within}");
}

#[test]
fn corrupt_is_seeded() {
    let d = Dir::new();
    let tape = d.write("t.txt", &tape_text(&pattern(64)));
    for name in ["a.txt", "b.txt"] {
        catacode(&["corrupt", "--in", &tape, "--flips", "5", "--seed", "9", "--out", &d.s(name)]);
    }
    assert_eq!(fs::read(d.path("a.txt")).unwrap(), fs::read(d.path("b.txt")).unwrap());
    let out = catacode(&["corrupt", "--in", &tape, "--flips", "1", "--out", &d.s("c.txt")]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed: "));
}

#[test]
fn malformed_files_and_bad_parameters() {
    let d = Dir::new();
    for (i, text) in ["", "12\nzz1\n", "8\nf\n", "3\n9\n"].iter().enumerate() {
        let p = d.write(&format!("bad{i}.txt"), text);
        assert_eq!(code(&catacode(&["encode", "--tape", &p, "--e", "1", "--out", &d.s("o.txt")])), 4, "{text:?}");
    }
    let small = d.write("small.txt", &tape_text(&pattern(16)));
    assert_eq!(code(&catacode(&["encode", "--tape", &small, "--e", "5", "--out", &d.s("o.txt")])), 2);
    let tape = d.write("t.txt", &tape_text(&pattern(64)));
    assert_eq!(code(&catacode(&["decode", "--in", &tape, "--e", "1", "--c", "64", "--out", &d.s("o.txt")])), 4);
    let prog = d.write("p.txt", "machine m\ntapes work=1 cat=4 aux=none\n");
    let out = catacode(&["sim", "run", "--program", &prog, "--tape", &tape, "--mode", "plain"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn plain_mode_reports_contract_violation() {
    let d = Dir::new();
    let prog = d.program("p.txt", &programs::flip_positions(64, &[3, 40]));
    let tape = d.write("t.txt", &tape_text(&pattern(64)));
    let report = d.s("r.json");
    let out = catacode(&["sim", "run", "--program", &prog, "--tape", &tape, "--mode", "plain", "--e", "1", "--report", &report]);
    assert_eq!(code(&out), 5);
    assert_eq!(json(&d.path("r.json"))["hamming_distance"], 2);
    let out = catacode(&["sim", "run", "--program", &prog, "--tape", &tape, "--mode", "plain", "--e", "2", "--report", &report]);
    assert_eq!(code(&out), 0);
}

#[test]
fn bch_wrap_restores_and_reports_identically() {
    let d = Dir::new();
    let prog = d.program("p.txt", &programs::flip_positions(128, &[0, 64, 127]));
    let tape = d.write("t.txt", &tape_text(&pattern(128)));
    let mut reports = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = catacode(&[
            "sim", "run", "--program", &prog, "--tape", &tape, "--mode", "bch-wrap", "--e", "3", "--report", &d.s(name),
            "--out", &d.s("final.txt"),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        reports.push(fs::read(d.path(name)).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let r = json(&d.path("a.json"));
    assert_eq!(r["hamming_distance"], 0);
    assert_eq!(r["output"], pattern(128)[0]);
    assert_eq!(r["support"].as_array().unwrap().len(), 3);
    for phase in ["init", "sim", "cleanup", "peak"] {
        assert!(r["meter"][phase].is_u64(), "{phase}");
    }
    assert_eq!(fs::read_to_string(d.path("final.txt")).unwrap(), tape_text(&pattern(128)));
}

#[test]
fn bch_wrap_over_budget_is_uncorrectable() {
    let d = Dir::new();
    let prog = d.program("p.txt", &programs::flip_positions(128, &[0, 30, 60, 90]));
    let tape = d.write("t.txt", &tape_text(&pattern(128)));
    let out = catacode(&["sim", "run", "--program", &prog, "--tape", &tape, "--mode", "bch-wrap", "--e", "1"]);
    assert!(matches!(code(&out), 3 | 5), "exit {}", code(&out));
}

#[test]
fn mem_expand_fills_blocks_from_the_seed() {
    let d = Dir::new();
    let prog = d.program("p.txt", &programs::copy_parity(12, 16));
    let tape = d.write("t.txt", &tape_text(&pattern(16)));
    let mut reports = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = catacode(&[
            "sim", "run", "--program", &prog, "--tape", &tape, "--mode", "mem-expand", "--e", "3", "--seed", "42",
            "--report", &d.s(name),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        reports.push(fs::read(d.path(name)).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let r = json(&d.path("a.json"));
    assert_eq!(r["seed"], 42);
    assert_eq!(r["params"]["layout"]["blocks"], 3);
    assert_eq!(r["params"]["layout"]["k"], 4);
    assert!(r["hamming_distance"].as_u64().unwrap() <= 3);
    let parity = pattern(16)[..12].iter().filter(|&&b| b).count() % 2 == 1;
    assert_eq!(r["output"], parity);

    let out = catacode(&[
        "sim", "run", "--program", &prog, "--tape", &tape, "--mode", "mem-expand", "--blocks", "2", "--k", "3",
        "--plain", "0", "--seed", "1",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn mem_expand_compact_layout() {
    let d = Dir::new();
    let prog = d.program("p.txt", &programs::copy_parity(20, 1024));
    let tape = d.write("t.txt", &tape_text(&pattern(1024)));
    let out = catacode(&[
        "sim", "run", "--program", &prog, "--tape", &tape, "--mode", "mem-expand", "--e", "2", "--delta-hat", "4",
        "--seed", "5", "--report", &d.s("r.json"),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&d.path("r.json"));
    assert_eq!(r["params"]["layout"]["blocks"], 3);
    assert_eq!(r["params"]["layout"]["k"], 7);
    assert_eq!(r["details"]["extra_len_within_bound"], true);
}

#[test]
fn reverse_count_restores_exactly() {
    let d = Dir::new();
    let prog = d.program("p.txt", &programs::force_bit(8, 5, true));
    let mut bits = pattern(8);
    bits[5] = false;
    let tape = d.write("t.txt", &tape_text(&bits));
    let out = catacode(&[
        "sim", "run", "--program", &prog, "--tape", &tape, "--mode", "reverse-count", "--e", "1", "--report", &d.s("r.json"),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&d.path("r.json"));
    assert_eq!(r["hamming_distance"], 0);
    assert_eq!(r["details"]["peak_num_start"], 2);
    assert!(r["meter"]["backward"].is_u64());
}

#[test]
fn witness_enumeration_over_bch_wrap() {
    let d = Dir::new();
    let prog = d.program("p.txt", &programs::witness_flipper(64, 3));
    let tape = d.write("t.txt", &tape_text(&pattern(64)));
    let out = catacode(&[
        "sim", "run", "--program", &prog, "--tape", &tape, "--mode", "bch-wrap", "--e", "3", "--witness-enum", "8",
        "--report", &d.s("r.json"),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&d.path("r.json"));
    assert_eq!(r["details"]["witnesses_tried"], 511);
    assert_eq!(r["details"]["max_distance"], 0);
    assert_eq!(r["output"], true);

    let out = catacode(&["sim", "run", "--program", &prog, "--tape", &tape, "--mode", "plain", "--e", "2", "--witness-enum", "4"]);
    assert_eq!(code(&out), 5);
    let out = catacode(&["sim", "run", "--program", &prog, "--tape", &tape, "--mode", "plain", "--e", "3", "--aux", "1011"]);
    assert_eq!(code(&out), 0);
    let out = catacode(&["sim", "run", "--program", &prog, "--tape", &tape, "--mode", "plain", "--e", "3"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn randomized_runs_are_seeded() {
    let d = Dir::new();
    let text = write_program(&programs::witness_flipper(8, 0)).replace("aux=witness", "aux=random");
    let prog = d.write("p.txt", &text);
    let tape = d.write("t.txt", &tape_text(&[false; 8]));
    let run = |name: &str| {
        catacode(&[
            "sim", "run", "--program", &prog, "--tape", &tape, "--mode", "plain", "--trials", "200", "--aux-len", "2",
            "--seed", "11", "--report", &d.s(name),
        ])
    };
    assert_eq!(code(&run("a.json")), 0);
    assert_eq!(code(&run("b.json")), 0);
    assert_eq!(fs::read(d.path("a.json")).unwrap(), fs::read(d.path("b.json")).unwrap());
    let f = json(&d.path("a.json"))["details"]["frequency"].as_f64().unwrap();
    assert!((f - 0.5).abs() < 0.15, "{f}");
}

#[test]
fn step_cap_from_environment() {
    let d = Dir::new();
    let prog = d.program("p.txt", &programs::flip_positions(64, &[63]));
    let tape = d.write("t.txt", &tape_text(&pattern(64)));
    let out = Command::new(env!("CARGO_BIN_EXE_catacode"))
        .args(["sim", "run", "--program", &prog, "--tape", &tape, "--mode", "plain", "--e", "1"])
        .env("CATACODE_STEP_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(code(&out), 6);
}

#[test]
fn mem_demo_scripts() {
    let d = Dir::new();
    let tape = d.write("t.txt", &tape_text(&pattern(16)));
    let cases = [
        ("", "final distance 0"),
        ("write 2 1\n", "final distance 1"),
        ("write 0 1\nwrite 3 1\nwrite 0 0\nwrite 3 0\n", "final distance 0"),
        ("# comment\nsteer 9\nsteer 9\n", "final distance 1"),
    ];
    let zeros = d.write("z.txt", &tape_text(&[false; 16]));
    for (script, last) in cases {
        let s = d.write("s.txt", script);
        let out = catacode(&["mem", "demo", "--k", "4", "--script", &s, "--tape", &zeros]);
        assert_eq!(code(&out), 0);
        assert_eq!(stdout(&out).lines().last().unwrap(), last, "{script:?}");
    }
    let s = d.write("bad.txt", "write 7 1\n");
    assert_eq!(code(&catacode(&["mem", "demo", "--k", "4", "--script", &s, "--tape", &tape])), 4);
    let s = d.write("ok.txt", "steer 3\n");
    let out = catacode(&["mem", "demo", "--k", "4", "--script", &s, "--seed", "2", "--report", &d.s("r.json")]);
    assert_eq!(code(&out), 0);
    let r = json(&d.path("r.json"));
    assert_eq!(r["seed"], 2);
    assert_eq!(r["details"]["mem_trajectory"].as_array().unwrap().last().unwrap(), 3);
}
