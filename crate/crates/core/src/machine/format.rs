//! Line-based program text.
//!
//! ```text
//! machine <name>
//! tapes work=<s> cat=<c> aux=<none|witness|random>
//! state <name> [start|accept|reject]
//! trans <state> <in><work><cat>[<aux>] -> <state> <work'><cat'> <mvI><mvW><mvC>[A]
//! ```
//!
//! Symbols are `0`, `1` or `_`; moves are `L`, `R` or `S`; a trailing `A`
//! advances the auxiliary head. `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Action, AuxMode, Key, MachineError, MachineSpec, Move, StateDecl, StateKind, Sym};

fn err(line: usize, msg: impl Into<String>) -> MachineError {
    MachineError::Parse { line, msg: msg.into() }
}

fn syms(line: usize, s: &str) -> Result<Vec<Sym>, MachineError> {
    s.chars().map(|c| Sym::from_char(c).ok_or_else(|| err(line, format!("bad symbol `{c}`")))).collect()
}

fn bit(line: usize, c: char) -> Result<bool, MachineError> {
    match c {
        '0' => Ok(false),
        '1' => Ok(true),
        _ => Err(err(line, format!("work and catalytic writes must be 0 or 1, got `{c}`"))),
    }
}

pub fn parse_program(text: &str) -> Result<MachineSpec, MachineError> {
    let mut name = None;
    let mut tapes = None;
    let mut states: Vec<StateDecl> = Vec::new();
    let mut raw_trans = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        match words[0] {
            "machine" => {
                if words.len() != 2 {
                    return Err(err(line, "expected `machine <name>`"));
                }
                if name.replace(words[1].to_string()).is_some() {
                    return Err(err(line, "duplicate `machine` line"));
                }
            }
            "tapes" => {
                let (mut work, mut cat, mut aux) = (None, None, None);
                for w in &words[1..] {
                    let (k, v) = w.split_once('=').ok_or_else(|| err(line, format!("bad tape field `{w}`")))?;
                    match k {
                        "work" => work = Some(v.parse::<usize>().map_err(|_| err(line, "bad work length"))?),
                        "cat" => cat = Some(v.parse::<usize>().map_err(|_| err(line, "bad cat length"))?),
                        "aux" => {
                            aux = Some(match v {
                                "none" => AuxMode::None,
                                "witness" => AuxMode::Witness,
                                "random" => AuxMode::Random,
                                _ => return Err(err(line, format!("bad aux mode `{v}`"))),
                            })
                        }
                        _ => return Err(err(line, format!("unknown tape field `{k}`"))),
                    }
                }
                match (work, cat, aux) {
                    (Some(w), Some(c), Some(a)) => {
                        if tapes.replace((w, c, a)).is_some() {
                            return Err(err(line, "duplicate `tapes` line"));
                        }
                    }
                    _ => return Err(err(line, "`tapes` needs work=, cat= and aux=")),
                }
            }
            "state" => {
                let kind = match words.get(2).copied() {
                    None => StateKind::Normal,
                    Some("start") => StateKind::Start,
                    Some("accept") => StateKind::Accept,
                    Some("reject") => StateKind::Reject,
                    Some(k) => return Err(err(line, format!("unknown state kind `{k}`"))),
                };
                if words.len() < 2 || words.len() > 3 {
                    return Err(err(line, "expected `state <name> [start|accept|reject]`"));
                }
                if states.iter().any(|s| s.name == words[1]) {
                    return Err(err(line, format!("state `{}` declared twice", words[1])));
                }
                states.push(StateDecl { name: words[1].to_string(), kind });
            }
            "trans" => {
                if words.len() < 6 || words.len() > 7 || words[3] != "->" {
                    return Err(err(line, "expected `trans <state> <syms> -> <state> <writes> <moves>`"));
                }
                raw_trans.push((line, words[1..].iter().map(|s| s.to_string()).collect::<Vec<_>>()));
            }
            other => return Err(err(line, format!("unknown directive `{other}`"))),
        }
    }

    let name = name.ok_or_else(|| err(0, "missing `machine` line"))?;
    let (work_len, cat_len, aux_mode) = tapes.ok_or_else(|| err(0, "missing `tapes` line"))?;
    if work_len == 0 || cat_len == 0 {
        return Err(MachineError::Spec("work and catalytic tapes need at least one cell".into()));
    }
    let starts: Vec<usize> = (0..states.len()).filter(|&i| states[i].kind == StateKind::Start).collect();
    let start = match starts.as_slice() {
        [s] => *s,
        [] => return Err(MachineError::Spec("no start state".into())),
        _ => return Err(MachineError::Spec("more than one start state".into())),
    };
    let lookup = |line: usize, n: &str| -> Result<usize, MachineError> {
        states.iter().position(|s| s.name == n).ok_or_else(|| err(line, format!("undeclared state `{n}`")))
    };

    let mut transitions = BTreeMap::new();
    for (line, w) in raw_trans {
        let from = lookup(line, &w[0])?;
        if states[from].kind.is_halting() {
            return Err(err(line, format!("transition out of halting state `{}`", w[0])));
        }
        let read = syms(line, &w[1])?;
        let with_aux = aux_mode != AuxMode::None;
        if read.len() != if with_aux { 4 } else { 3 } {
            return Err(err(line, format!("read pattern `{}` has the wrong length for aux={aux_mode}", w[1])));
        }
        let to = lookup(line, &w[3])?;
        let writes: Vec<char> = w[4].chars().collect();
        if writes.len() != 2 {
            return Err(err(line, "expected two written symbols"));
        }
        let moves: Vec<char> = w[5].chars().collect();
        let aux_advance = match moves.len() {
            3 => false,
            4 if moves[3] == 'A' => true,
            _ => return Err(err(line, format!("bad move field `{}`", w[5]))),
        };
        if aux_advance && !with_aux {
            return Err(err(line, "aux advance on a machine without an auxiliary tape"));
        }
        if w.len() == 7 {
            return Err(err(line, format!("unexpected trailing field `{}`", w[6])));
        }
        let mv = |c: char| Move::from_char(c).ok_or_else(|| err(line, format!("bad move `{c}`")));
        let key = Key { state: from, input: read[0], work: read[1], cat: read[2], aux: read.get(3).copied() };
        let action = Action {
            next: to,
            work_write: bit(line, writes[0])?,
            cat_write: bit(line, writes[1])?,
            input_move: mv(moves[0])?,
            work_move: mv(moves[1])?,
            cat_move: mv(moves[2])?,
            aux_advance,
        };
        if transitions.insert(key, action).is_some() {
            return Err(err(line, "two transitions for the same configuration"));
        }
    }

    Ok(MachineSpec { name, work_len, cat_len, aux_mode, states, start, transitions })
}

pub fn write_program(spec: &MachineSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "machine {}", spec.name);
    let _ = writeln!(out, "tapes work={} cat={} aux={}", spec.work_len, spec.cat_len, spec.aux_mode);
    for s in &spec.states {
        let kind = match s.kind {
            StateKind::Normal => "",
            StateKind::Start => " start",
            StateKind::Accept => " accept",
            StateKind::Reject => " reject",
        };
        let _ = writeln!(out, "state {}{kind}", s.name);
    }
    for (k, a) in &spec.transitions {
        let bitc = |b: bool| if b { '1' } else { '0' };
        let _ = writeln!(
            out,
            "trans {} {} -> {} {}{} {}{}{}{}",
            spec.state_name(k.state),
            super::key_string(k),
            spec.state_name(a.next),
            bitc(a.work_write),
            bitc(a.cat_write),
            a.input_move.as_char(),
            a.work_move.as_char(),
            a.cat_move.as_char(),
            if a.aux_advance { "A" } else { "" },
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::programs;
    use super::*;

    const SAMPLE: &str = "\
# restores its tape
machine demo
tapes work=2 cat=3 aux=witness
state q start
state yes accept
state no reject
trans q _000 -> yes 01 SSSA   # flip
trans q _001 -> no 00 SRS
";

    #[test]
    fn parses_sample() {
        let spec = parse_program(SAMPLE).unwrap();
        assert_eq!((spec.work_len, spec.cat_len, spec.aux_mode), (2, 3, AuxMode::Witness));
        assert_eq!(spec.states.len(), 3);
        assert_eq!(spec.transitions.len(), 2);
        let a = spec.transitions.values().next().unwrap();
        assert!(a.aux_advance && a.cat_write);
    }

    #[test]
    fn text_roundtrip() {
        for spec in [
            parse_program(SAMPLE).unwrap(),
            programs::flip_positions(12, &[1, 7]),
            programs::xor_restore(3),
            programs::prefix_witness(4),
        ] {
            assert_eq!(parse_program(&write_program(&spec)).unwrap(), spec);
        }
    }

    #[test]
    fn rejects_malformed_programs() {
        let bad = [
            "tapes work=1 cat=1 aux=none\nstate a start\n",
            "machine m\nstate a start\n",
            "machine m\ntapes work=1 cat=1 aux=none\nstate a\n",
            "machine m\ntapes work=1 cat=1 aux=none\nstate a start\nstate b start\n",
            "machine m\ntapes work=1 cat=1 aux=none\nstate a start\ntrans a 000 -> z 00 SSS\n",
            "machine m\ntapes work=1 cat=1 aux=none\nstate a start\ntrans a 000 -> a 0_ SSS\n",
            "machine m\ntapes work=1 cat=1 aux=none\nstate a start\ntrans a 0000 -> a 00 SSS\n",
            "machine m\ntapes work=1 cat=1 aux=none\nstate a start\ntrans a 000 -> a 00 SSSA\n",
            "machine m\ntapes work=1 cat=1 aux=none\nstate a start\ntrans a 000 -> a 00 SSS\ntrans a 000 -> a 11 SSS\n",
            "machine m\ntapes work=1 cat=1 aux=none\nstate a start\nstate h accept\ntrans h 000 -> a 00 SSS\n",
            "machine m\ntapes work=1 cat=1 aux=maybe\nstate a start\n",
            "machine m\ntapes work=0 cat=1 aux=none\nstate a start\n",
            "machine m\ntapes work=1 cat=1 aux=none\nstate a start\nbogus\n",
        ];
        for text in bad {
            assert!(parse_program(text).is_err(), "{text}");
        }
    }
}
