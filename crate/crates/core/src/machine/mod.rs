//! Catalytic Turing machines and their simulations.
//!
//! A machine has a read-only input tape, a clean work tape of `s` bits, a
//! catalytic tape of `c` bits and optionally a read-once auxiliary tape
//! (witness or random bits). Each step reads one cell of every tape, writes
//! at most one work cell and one catalytic cell, and moves each head by at
//! most one cell.
//!
//! The runners in this module wrap a machine in one of the simulations:
//! [`Plain`] runs it directly, [`BchWrapped`] protects the catalytic tape with
//! a BCH code, [`MemExpanded`] backs extra work bits by single flips in
//! catalytic blocks, and [`ReversalCounting`] undoes a reversible machine's
//! errors by running it backwards.

mod expand;
mod format;
mod lossy;
pub mod programs;
mod reversal;
mod witness;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::bch::CodecError;
use crate::meter::MeterReport;

pub use expand::{expand_space_with_errors, Layout, MemExpanded, VirtualMemory};
pub use format::{parse_program, write_program};
pub use lossy::{wrap_lossy_with_bch, BchWrapped};
pub use reversal::{
    count_start_tapes, simulate_errors_via_reversal, tapes_within, ReversalCounting, ReversibleHooks,
    TableReversible,
};
pub use witness::{enumerate_witnesses, run_randomized, RandomizedSummary, WitnessSummary};

/// Default bound on simulated steps.
pub const DEFAULT_STEP_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid machine: {0}")]
    Spec(String),
    #[error("no halt within {cap} steps")]
    StepCap { cap: u64 },
    #[error("no transition from state `{state}` reading {key}")]
    Stuck { state: String, key: String },
    #[error("{tape} head moved to {pos}, outside 0..{len}")]
    HeadOutOfRange { tape: &'static str, pos: i64, len: usize },
    #[error("expected {expected} {what}, got {got}")]
    TapeLength { what: &'static str, expected: usize, got: usize },
    #[error("machine reads an auxiliary tape but none was supplied")]
    MissingAux,
    #[error("auxiliary tape supplied to a machine without one")]
    UnexpectedAux,
    #[error("layout: {0}")]
    Layout(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("reversibility hooks inconsistent: {0}")]
    HookInconsistent(String),
    #[error("start-state counter reached {count}, above the bound {bound}")]
    CounterOverflow { count: u64, bound: u64 },
    #[error("catalytic contract violated: distance {distance} exceeds budget {budget}{}", witness.as_ref().map(|w| format!(" (witness {w})")).unwrap_or_default())]
    ContractViolation { distance: usize, budget: usize, witness: Option<String> },
}

/// A tape symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    Zero,
    One,
    Blank,
}

impl Sym {
    pub fn from_bit(b: bool) -> Sym {
        if b {
            Sym::One
        } else {
            Sym::Zero
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sym::Zero => '0',
            Sym::One => '1',
            Sym::Blank => '_',
        }
    }

    pub fn from_char(c: char) -> Option<Sym> {
        match c {
            '0' => Some(Sym::Zero),
            '1' => Some(Sym::One),
            '_' => Some(Sym::Blank),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    L,
    R,
    S,
}

impl Move {
    pub fn delta(self) -> i64 {
        match self {
            Move::L => -1,
            Move::R => 1,
            Move::S => 0,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Move::L => 'L',
            Move::R => 'R',
            Move::S => 'S',
        }
    }

    pub fn from_char(c: char) -> Option<Move> {
        match c {
            'L' => Some(Move::L),
            'R' => Some(Move::R),
            'S' => Some(Move::S),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AuxMode {
    None,
    Witness,
    Random,
}

impl fmt::Display for AuxMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AuxMode::None => "none",
            AuxMode::Witness => "witness",
            AuxMode::Random => "random",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StateKind {
    Normal,
    Start,
    Accept,
    Reject,
}

impl StateKind {
    pub fn is_halting(self) -> bool {
        matches!(self, StateKind::Accept | StateKind::Reject)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDecl {
    pub name: String,
    pub kind: StateKind,
}

/// What a transition reads: state and the symbol under each head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key {
    pub state: usize,
    pub input: Sym,
    pub work: Sym,
    pub cat: Sym,
    pub aux: Option<Sym>,
}

/// What a transition does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub next: usize,
    pub work_write: bool,
    pub cat_write: bool,
    pub input_move: Move,
    pub work_move: Move,
    pub cat_move: Move,
    pub aux_advance: bool,
}

/// A deterministic catalytic machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineSpec {
    pub name: String,
    pub work_len: usize,
    pub cat_len: usize,
    pub aux_mode: AuxMode,
    pub states: Vec<StateDecl>,
    pub start: usize,
    pub transitions: BTreeMap<Key, Action>,
}

/// Head positions. The input head ranges over `0..=n`, cell `n` reading
/// blank; the auxiliary head only advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Heads {
    pub input: usize,
    pub work: usize,
    pub cat: usize,
    pub aux: usize,
}

/// A full machine configuration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub state: usize,
    pub work: Vec<bool>,
    pub cat: Vec<bool>,
    pub heads: Heads,
}

/// Result of one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Continue,
    Halt(bool),
}

/// Storage behind the machine's work tape.
pub trait WorkTape {
    fn len(&self) -> usize;
    fn read(&mut self, pos: usize) -> bool;
    fn write(&mut self, pos: usize, bit: bool);
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl WorkTape for Vec<bool> {
    fn len(&self) -> usize {
        <[bool]>::len(self)
    }

    fn read(&mut self, pos: usize) -> bool {
        self[pos]
    }

    fn write(&mut self, pos: usize, bit: bool) {
        self[pos] = bit;
    }
}

fn moved(tape: &'static str, pos: usize, mv: Move, len: usize) -> Result<usize, MachineError> {
    let p = pos as i64 + mv.delta();
    if p < 0 || p >= len as i64 {
        return Err(MachineError::HeadOutOfRange { tape, pos: p, len });
    }
    Ok(p as usize)
}

impl MachineSpec {
    pub fn state_name(&self, id: usize) -> &str {
        &self.states[id].name
    }

    pub fn state_id(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn kind(&self, id: usize) -> StateKind {
        self.states[id].kind
    }

    /// `Some(output)` if `state` halts.
    pub fn halt_output(&self, state: usize) -> Option<bool> {
        match self.states[state].kind {
            StateKind::Accept => Some(true),
            StateKind::Reject => Some(false),
            _ => None,
        }
    }

    pub fn check_tau(&self, tau: &[bool]) -> Result<(), MachineError> {
        if tau.len() != self.cat_len {
            return Err(MachineError::TapeLength { what: "catalytic bits", expected: self.cat_len, got: tau.len() });
        }
        Ok(())
    }

    pub fn check_aux(&self, aux: Option<&[bool]>) -> Result<(), MachineError> {
        match (self.aux_mode, aux) {
            (AuxMode::None, Some(_)) => Err(MachineError::UnexpectedAux),
            (AuxMode::Witness | AuxMode::Random, None) => Err(MachineError::MissingAux),
            _ => Ok(()),
        }
    }

    /// The start configuration on catalytic tape `tau`: clean work tape, all
    /// heads at cell 0.
    pub fn start_config(&self, tau: &[bool]) -> Result<Configuration, MachineError> {
        self.check_tau(tau)?;
        Ok(Configuration {
            state: self.start,
            work: vec![false; self.work_len],
            cat: tau.to_vec(),
            heads: Heads::default(),
        })
    }

    pub fn key_at<W: WorkTape + ?Sized>(
        &self,
        state: usize,
        input: &[bool],
        aux: Option<&[bool]>,
        heads: &Heads,
        work: &mut W,
        cat: &[bool],
    ) -> Key {
        let input_sym = input.get(heads.input).map_or(Sym::Blank, |&b| Sym::from_bit(b));
        let aux_sym = match self.aux_mode {
            AuxMode::None => None,
            _ => Some(aux.and_then(|a| a.get(heads.aux)).map_or(Sym::Blank, |&b| Sym::from_bit(b))),
        };
        Key {
            state,
            input: input_sym,
            work: Sym::from_bit(work.read(heads.work)),
            cat: Sym::from_bit(cat[heads.cat]),
            aux: aux_sym,
        }
    }

    /// Executes one transition, or reports the halting output.
    pub fn step_on<W: WorkTape + ?Sized>(
        &self,
        input: &[bool],
        aux: Option<&[bool]>,
        state: &mut usize,
        heads: &mut Heads,
        work: &mut W,
        cat: &mut [bool],
    ) -> Result<Step, MachineError> {
        if let Some(out) = self.halt_output(*state) {
            return Ok(Step::Halt(out));
        }
        let key = self.key_at(*state, input, aux, heads, work, cat);
        let Some(action) = self.transitions.get(&key) else {
            return Err(MachineError::Stuck { state: self.state_name(*state).to_string(), key: key_string(&key) });
        };
        work.write(heads.work, action.work_write);
        cat[heads.cat] = action.cat_write;
        heads.input = moved("input", heads.input, action.input_move, input.len() + 1)?;
        heads.work = moved("work", heads.work, action.work_move, self.work_len)?;
        heads.cat = moved("catalytic", heads.cat, action.cat_move, self.cat_len)?;
        if action.aux_advance {
            heads.aux += 1;
        }
        *state = action.next;
        Ok(Step::Continue)
    }

    pub fn step(&self, input: &[bool], aux: Option<&[bool]>, cfg: &mut Configuration) -> Result<Step, MachineError> {
        let Configuration { state, work, cat, heads } = cfg;
        self.step_on(input, aux, state, heads, work, cat)
    }

    /// Runs from the start state until halting. Returns `(output, steps)`.
    pub fn execute<W: WorkTape + ?Sized>(
        &self,
        input: &[bool],
        aux: Option<&[bool]>,
        work: &mut W,
        cat: &mut [bool],
        step_cap: u64,
    ) -> Result<(bool, u64), MachineError> {
        self.check_tau(cat)?;
        self.check_aux(aux)?;
        if work.len() != self.work_len {
            return Err(MachineError::TapeLength { what: "work bits", expected: self.work_len, got: work.len() });
        }
        let mut state = self.start;
        let mut heads = Heads::default();
        let mut steps = 0u64;
        loop {
            match self.step_on(input, aux, &mut state, &mut heads, work, cat)? {
                Step::Halt(out) => return Ok((out, steps)),
                Step::Continue => {
                    steps += 1;
                    if steps > step_cap {
                        return Err(MachineError::StepCap { cap: step_cap });
                    }
                }
            }
        }
    }
}

pub(crate) fn key_string(key: &Key) -> String {
    let mut s = String::new();
    s.push(key.input.as_char());
    s.push(key.work.as_char());
    s.push(key.cat.as_char());
    if let Some(a) = key.aux {
        s.push(a.as_char());
    }
    s
}

pub fn hamming(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len())
}

/// The audited outcome of one simulated run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationReport {
    pub mode: String,
    pub output: bool,
    /// Steps of the simulated machine (forward and backward for reversal).
    pub steps: u64,
    pub catalytic_len: usize,
    pub hamming_distance: usize,
    pub error_budget: usize,
    pub meter: MeterReport,
    pub final_tape: Vec<bool>,
    /// Corrected `(symbol position, value)` pairs from BCH cleanup.
    pub support: Vec<(usize, u32)>,
    /// Blocks flipped while steering every `mem` to zero.
    pub init_flips: Option<usize>,
    pub peak_num_start: Option<u64>,
    pub notes: Vec<String>,
}

impl SimulationReport {
    pub fn contract_holds(&self) -> bool {
        self.hamming_distance <= self.error_budget
    }
}

/// A machine packaged with one of the simulations.
pub trait CatalyticRunner {
    fn mode(&self) -> &'static str;
    /// Length of the catalytic tape the runner expects.
    fn catalytic_len(&self) -> usize;
    /// Final Hamming distance the runner promises not to exceed.
    fn error_budget(&self) -> usize;
    fn aux_mode(&self) -> AuxMode;
    fn run(&self, input: &[bool], tau: &[bool], aux: Option<&[bool]>) -> Result<SimulationReport, MachineError>;
}

/// Runs the machine directly on the catalytic tape.
#[derive(Debug, Clone)]
pub struct Plain {
    pub spec: MachineSpec,
    pub budget: usize,
    pub step_cap: u64,
}

impl Plain {
    pub fn new(spec: MachineSpec, budget: usize) -> Plain {
        Plain { spec, budget, step_cap: DEFAULT_STEP_CAP }
    }
}

impl CatalyticRunner for Plain {
    fn mode(&self) -> &'static str {
        "plain"
    }

    fn catalytic_len(&self) -> usize {
        self.spec.cat_len
    }

    fn error_budget(&self) -> usize {
        self.budget
    }

    fn aux_mode(&self) -> AuxMode {
        self.spec.aux_mode
    }

    fn run(&self, input: &[bool], tau: &[bool], aux: Option<&[bool]>) -> Result<SimulationReport, MachineError> {
        let mut meter = crate::meter::MeterScope::new("plain");
        meter.enter_phase("sim");
        let work_reg = meter.lease(self.spec.work_len as u64);
        let mut work = vec![false; self.spec.work_len];
        let mut cat = tau.to_vec();
        let result = self.spec.execute(input, aux, &mut work, &mut cat, self.step_cap);
        meter.end(work_reg);
        let (output, steps) = result?;
        meter.close().expect("all registers released");
        Ok(SimulationReport {
            mode: self.mode().into(),
            output,
            steps,
            catalytic_len: tau.len(),
            hamming_distance: hamming(&cat, tau),
            error_budget: self.budget,
            meter: meter.report().expect("closed"),
            final_tape: cat,
            support: Vec::new(),
            init_flips: None,
            peak_num_start: None,
            notes: Vec::new(),
        })
    }
}

pub fn run(
    spec: &MachineSpec,
    input: &[bool],
    tau: &[bool],
    aux: Option<&[bool]>,
    step_cap: u64,
) -> Result<SimulationReport, MachineError> {
    Plain { spec: spec.clone(), budget: 0, step_cap }.run(input, tau, aux)
}

#[cfg(test)]
mod tests {
    use super::programs;
    use super::*;

    #[test]
    fn halting_machine_leaves_tape_alone() {
        let spec = programs::halt_immediately(4, true);
        let tau = [true, false, true, true];
        let rep = run(&spec, &[], &tau, None, 100).unwrap();
        assert!(rep.output);
        assert_eq!((rep.steps, rep.hamming_distance), (1, 0));
        let spec = programs::halt_immediately(4, false);
        assert!(!run(&spec, &[], &tau, None, 100).unwrap().output);
    }

    #[test]
    fn flip_first_cell_costs_one_error() {
        let spec = programs::flip_positions(8, &[0]);
        let tau = [false; 8];
        let rep = run(&spec, &[], &tau, None, 1000).unwrap();
        assert_eq!(rep.hamming_distance, 1);
        assert!(rep.final_tape[0]);
    }

    #[test]
    fn xor_restore_outputs_first_cell() {
        let spec = programs::xor_restore(5);
        for b in [false, true] {
            let tau = [b, true, false, false, true];
            let rep = run(&spec, &[], &tau, None, 1000).unwrap();
            assert_eq!((rep.output, rep.hamming_distance), (b, 0));
        }
    }

    #[test]
    fn step_cap_and_stuck_machines() {
        let spec = parse_program(
            "machine loop\ntapes work=1 cat=1 aux=none\nstate a start\nstate h accept\n\
             trans a _00 -> a 00 SSS\n",
        )
        .unwrap();
        assert_eq!(run(&spec, &[], &[false], None, 50), Err(MachineError::StepCap { cap: 50 }));
        assert!(matches!(run(&spec, &[], &[true], None, 50), Err(MachineError::Stuck { .. })));
    }

    #[test]
    fn heads_cannot_leave_their_tapes() {
        let spec = parse_program(
            "machine left\ntapes work=1 cat=2 aux=none\nstate a start\nstate h accept\n\
             trans a _00 -> h 00 SSL\n",
        )
        .unwrap();
        assert!(matches!(
            run(&spec, &[], &[false, false], None, 50),
            Err(MachineError::HeadOutOfRange { tape: "catalytic", pos: -1, .. })
        ));
    }

    #[test]
    fn aux_presence_is_checked() {
        let spec = programs::halt_immediately(2, true);
        assert_eq!(run(&spec, &[], &[false; 2], Some(&[true]), 10), Err(MachineError::UnexpectedAux));
        let spec = programs::prefix_witness(2);
        assert_eq!(run(&spec, &[true], &[false; 2], None, 10), Err(MachineError::MissingAux));
    }

    #[test]
    fn runs_are_deterministic() {
        let spec = programs::flip_positions(16, &[3, 9]);
        let tau: Vec<bool> = (0..16).map(|i| i % 3 == 0).collect();
        assert_eq!(run(&spec, &[], &tau, None, 1000), run(&spec, &[], &tau, None, 1000));
    }
}
