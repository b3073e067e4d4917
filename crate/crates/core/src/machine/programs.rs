//! Small machines used by tests, the acceptance suite and the CLI examples.
//! Each is generated as program text and parsed.

use std::fmt::Write as _;

use super::{parse_program, MachineSpec};

const INPUTS: [char; 3] = ['0', '1', '_'];

struct Text {
    out: String,
}

impl Text {
    fn new(name: &str, work: usize, cat: usize, aux: &str) -> Text {
        let mut out = String::new();
        let _ = writeln!(out, "machine {name}\ntapes work={work} cat={cat} aux={aux}");
        Text { out }
    }

    fn state(&mut self, name: &str, kind: &str) {
        let _ = writeln!(self.out, "state {name} {kind}");
    }

    fn trans(&mut self, from: &str, read: &str, to: &str, writes: &str, moves: &str) {
        let _ = writeln!(self.out, "trans {from} {read} -> {to} {writes} {moves}");
    }

    fn build(self) -> MachineSpec {
        parse_program(&self.out).expect("generated program parses")
    }
}

fn b(bit: bool) -> char {
    if bit {
        '1'
    } else {
        '0'
    }
}

/// Halts after one step without touching the catalytic tape.
pub fn halt_immediately(cat: usize, accept: bool) -> MachineSpec {
    let mut t = Text::new("halt", 1, cat, "none");
    t.state("s", "start");
    t.state("h", if accept { "accept" } else { "reject" });
    for i in INPUTS {
        for c in [false, true] {
            t.trans("s", &format!("{i}0{}", b(c)), "h", &format!("0{}", b(c)), "SSS");
        }
    }
    t.build()
}

/// Walks right over the catalytic tape flipping the listed cells, then halts.
/// Accepts iff the original first cell was 1.
pub fn flip_positions(cat: usize, positions: &[usize]) -> MachineSpec {
    assert!(positions.iter().all(|&p| p < cat), "positions inside the tape");
    let last = positions.iter().copied().max().unwrap_or(0);
    let mut t = Text::new("flip", 1, cat, "none");
    t.state("s", "start");
    for i in 1..=last {
        for v in [0, 1] {
            t.state(&format!("q{i}_{v}"), "");
        }
    }
    t.state("yes", "accept");
    t.state("no", "reject");
    for i in 0..=last {
        let flip = positions.contains(&i);
        for v in [false, true] {
            let from = if i == 0 { "s".to_string() } else { format!("q{i}_{}", b(v)) };
            for c in [false, true] {
                // at cell 0 the remembered value is the cell itself
                if i == 0 && c != v {
                    continue;
                }
                let (to, mv) = if i == last {
                    ((if v { "yes" } else { "no" }).to_string(), "SSS")
                } else {
                    (format!("q{}_{}", i + 1, b(v)), "SSR")
                };
                for inp in INPUTS {
                    t.trans(&from, &format!("{inp}0{}", b(c)), &to, &format!("0{}", b(c ^ flip)), mv);
                }
            }
        }
    }
    t.build()
}

/// Flips the first catalytic cell and flips it back; accepts iff it was 1.
pub fn xor_restore(cat: usize) -> MachineSpec {
    let mut t = Text::new("xor-restore", 1, cat, "none");
    t.state("s", "start");
    t.state("r0", "");
    t.state("r1", "");
    t.state("yes", "accept");
    t.state("no", "reject");
    for i in INPUTS {
        t.trans("s", &format!("{i}00"), "r0", "01", "SSS");
        t.trans("s", &format!("{i}01"), "r1", "00", "SSS");
        t.trans("r0", &format!("{i}01"), "no", "00", "SSS");
        t.trans("r1", &format!("{i}00"), "yes", "01", "SSS");
    }
    t.build()
}

/// Accepts iff the witness starts with the input.
pub fn prefix_witness(cat: usize) -> MachineSpec {
    let mut t = Text::new("prefix", 1, cat, "witness");
    t.state("m", "start");
    t.state("yes", "accept");
    t.state("no", "reject");
    for c in ['0', '1'] {
        for a in INPUTS {
            t.trans("m", &format!("_0{c}{a}"), "yes", &format!("0{c}"), "SSS");
        }
        for i in ['0', '1'] {
            for a in INPUTS {
                if a == i {
                    t.trans("m", &format!("{i}0{c}{a}"), "m", &format!("0{c}"), "RSSA");
                } else {
                    t.trans("m", &format!("{i}0{c}{a}"), "no", &format!("0{c}"), "SSS");
                }
            }
        }
    }
    t.build()
}

/// Reads `e` witness bits, flipping catalytic cell `i` when bit `i` is 1,
/// then accepts iff witness bit `e` is 1. Leaves at most `e` errors.
pub fn witness_flipper(cat: usize, e: usize) -> MachineSpec {
    assert!(e < cat, "needs e < cat");
    let mut t = Text::new("witness-flip", 1, cat, "witness");
    for i in 0..=e {
        t.state(&format!("f{i}"), if i == 0 { "start" } else { "" });
    }
    t.state("yes", "accept");
    t.state("no", "reject");
    for inp in INPUTS {
        for c in [false, true] {
            for i in 0..e {
                let (from, to) = (format!("f{i}"), format!("f{}", i + 1));
                t.trans(&from, &format!("{inp}0{}0", b(c)), &to, &format!("0{}", b(c)), "SSRA");
                t.trans(&from, &format!("{inp}0{}1", b(c)), &to, &format!("0{}", b(!c)), "SSRA");
                t.trans(&from, &format!("{inp}0{}_", b(c)), &to, &format!("0{}", b(c)), "SSR");
            }
            let last = format!("f{e}");
            t.trans(&last, &format!("{inp}0{}1", b(c)), "yes", &format!("0{}", b(c)), "SSS");
            t.trans(&last, &format!("{inp}0{}0", b(c)), "no", &format!("0{}", b(c)), "SSS");
            t.trans(&last, &format!("{inp}0{}_", b(c)), "no", &format!("0{}", b(c)), "SSS");
        }
    }
    t.build()
}

/// Copies catalytic cells `0..work` onto the work tape, then walks back over
/// the work tape computing its parity. Accepts iff the parity is odd. Every
/// work cell is written once and read once.
pub fn copy_parity(work: usize, cat: usize) -> MachineSpec {
    assert!(work >= 1 && work <= cat, "needs 1 <= work <= cat");
    let mut t = Text::new("copy-parity", work, cat, "none");
    for i in 0..work {
        t.state(&format!("cp{i}"), if i == 0 { "start" } else { "" });
    }
    for i in 0..work {
        for p in [0, 1] {
            t.state(&format!("pr{i}_{p}"), "");
        }
    }
    t.state("odd", "accept");
    t.state("even", "reject");
    for inp in INPUTS {
        for w in [false, true] {
            for c in [false, true] {
                let read = format!("{inp}{}{}", b(w), b(c));
                let writes = format!("{}{}", b(c), b(c));
                for i in 0..work {
                    if i + 1 < work {
                        t.trans(&format!("cp{i}"), &read, &format!("cp{}", i + 1), &writes, "SRR");
                    } else {
                        t.trans(&format!("cp{i}"), &read, &format!("pr{i}_0"), &writes, "SSS");
                    }
                }
                for i in 0..work {
                    for p in [false, true] {
                        let q = p ^ w;
                        let same = format!("{}{}", b(w), b(c));
                        let from = format!("pr{i}_{}", b(p));
                        if i > 0 {
                            t.trans(&from, &read, &format!("pr{}_{}", i - 1, b(q)), &same, "SLL");
                        } else {
                            t.trans(&from, &read, if q { "odd" } else { "even" }, &same, "SSS");
                        }
                    }
                }
            }
        }
    }
    t.build()
}

/// A reversible machine that walks to catalytic cell `p` and forces it to
/// `value`. When the cell already holds `value` it halts there; otherwise it
/// writes `value` and walks back into its start state, so two start tapes
/// share each halting configuration. Always accepts.
pub fn force_bit(cat: usize, p: usize, value: bool) -> MachineSpec {
    assert!(p < cat, "cell inside the tape");
    let mut t = Text::new(&format!("force{}-{p}", b(value)), 1, cat, "none");
    t.state("s", "start");
    for i in 1..=p {
        t.state(&format!("w{i}"), "");
    }
    for i in 1..p {
        t.state(&format!("k{i}"), "");
    }
    t.state("h", "accept");
    let walker = |i: usize| if i == 0 { "s".to_string() } else { format!("w{i}") };
    for inp in INPUTS {
        for c in [false, true] {
            let read = format!("{inp}0{}", b(c));
            let same = format!("0{}", b(c));
            for i in 0..p {
                t.trans(&walker(i), &read, &walker(i + 1), &same, "SSR");
            }
            for i in 1..p {
                let back = if i == 1 { "s".to_string() } else { format!("k{}", i - 1) };
                t.trans(&format!("k{i}"), &read, &back, &same, "SSL");
            }
            if c == value {
                t.trans(&walker(p), &read, "h", &same, "SSS");
            } else {
                let (to, mv) = match p {
                    0 => ("s".to_string(), "SSS"),
                    1 => ("s".to_string(), "SSL"),
                    _ => (format!("k{}", p - 1), "SSL"),
                };
                t.trans(&walker(p), &read, &to, &format!("0{}", b(value)), mv);
            }
        }
    }
    t.build()
}
