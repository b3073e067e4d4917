//! Undoing a reversible machine's catalytic errors by running it backwards.
//!
//! On a reversible machine every configuration has at most one successor and
//! one predecessor, so the run from `start(τ)` is a path that may pass through
//! the start configurations of other tapes before halting. The forward run
//! counts the start configurations it meets; the backward run from the halting
//! configuration counts them down again and stops at the one where the count
//! reaches zero, which is `start(τ)`.

use crate::gf2r::bits_for;
use crate::meter::MeterScope;

use super::{
    hamming, AuxMode, CatalyticRunner, Configuration, Heads, MachineError, MachineSpec, SimulationReport, Step, Sym,
    DEFAULT_STEP_CAP,
};

/// Forward and backward steps of a machine whose configuration graph has in-
/// and out-degree at most one.
pub trait ReversibleHooks {
    fn work_len(&self) -> usize;
    fn cat_len(&self) -> usize;
    fn start(&self, tau: &[bool]) -> Result<Configuration, MachineError>;
    /// The successor, or `None` at a halting configuration.
    fn forward(&self, input: &[bool], cfg: &Configuration) -> Result<Option<Configuration>, MachineError>;
    /// The predecessor, or `None` if there is none.
    fn backward(&self, input: &[bool], cfg: &Configuration) -> Result<Option<Configuration>, MachineError>;
    fn is_start(&self, cfg: &Configuration) -> bool;
    fn halt_output(&self, cfg: &Configuration) -> Option<bool>;
}

/// Hooks for a table machine without an auxiliary tape. The backward step
/// searches the transition table for the unique transition leading into the
/// current configuration.
#[derive(Debug, Clone)]
pub struct TableReversible {
    pub spec: MachineSpec,
}

impl TableReversible {
    pub fn new(spec: MachineSpec) -> Result<TableReversible, MachineError> {
        if spec.aux_mode != AuxMode::None {
            return Err(MachineError::Spec("reversal needs a machine without an auxiliary tape".into()));
        }
        Ok(TableReversible { spec })
    }
}

fn undo(pos: usize, delta: i64, len: usize) -> Option<usize> {
    let p = pos as i64 - delta;
    (p >= 0 && (p as usize) < len).then_some(p as usize)
}

fn sym_bit(s: Sym) -> Option<bool> {
    match s {
        Sym::Zero => Some(false),
        Sym::One => Some(true),
        Sym::Blank => None,
    }
}

impl ReversibleHooks for TableReversible {
    fn work_len(&self) -> usize {
        self.spec.work_len
    }

    fn cat_len(&self) -> usize {
        self.spec.cat_len
    }

    fn start(&self, tau: &[bool]) -> Result<Configuration, MachineError> {
        self.spec.start_config(tau)
    }

    fn forward(&self, input: &[bool], cfg: &Configuration) -> Result<Option<Configuration>, MachineError> {
        let mut next = cfg.clone();
        match self.spec.step(input, None, &mut next)? {
            Step::Halt(_) => Ok(None),
            Step::Continue => Ok(Some(next)),
        }
    }

    fn backward(&self, input: &[bool], cfg: &Configuration) -> Result<Option<Configuration>, MachineError> {
        let mut found: Option<Configuration> = None;
        for (key, action) in &self.spec.transitions {
            if action.next != cfg.state {
                continue;
            }
            let (Some(work_bit), Some(cat_bit)) = (sym_bit(key.work), sym_bit(key.cat)) else {
                continue;
            };
            let h = &cfg.heads;
            let (Some(i), Some(w), Some(c)) = (
                undo(h.input, action.input_move.delta(), input.len() + 1),
                undo(h.work, action.work_move.delta(), self.spec.work_len),
                undo(h.cat, action.cat_move.delta(), self.spec.cat_len),
            ) else {
                continue;
            };
            let input_sym = input.get(i).map_or(Sym::Blank, |&b| Sym::from_bit(b));
            if input_sym != key.input || cfg.work[w] != action.work_write || cfg.cat[c] != action.cat_write {
                continue;
            }
            let mut prev = cfg.clone();
            prev.state = key.state;
            prev.work[w] = work_bit;
            prev.cat[c] = cat_bit;
            prev.heads = Heads { input: i, work: w, cat: c, aux: 0 };
            if found.replace(prev).is_some() {
                return Err(MachineError::HookInconsistent(format!(
                    "state `{}` has two predecessors",
                    self.spec.state_name(cfg.state)
                )));
            }
        }
        Ok(found)
    }

    fn is_start(&self, cfg: &Configuration) -> bool {
        cfg.state == self.spec.start && cfg.heads == Heads::default() && cfg.work.iter().all(|&b| !b)
    }

    fn halt_output(&self, cfg: &Configuration) -> Option<bool> {
        self.spec.halt_output(cfg.state)
    }
}

fn binomial_ball(c: usize, e: usize) -> u64 {
    let mut total = 0u64;
    let mut term = 1u64;
    for i in 0..=e.min(c) {
        total = total.saturating_add(term);
        term = term.saturating_mul((c - i) as u64) / (i as u64 + 1);
    }
    total
}

/// Runs a reversible machine with at most `e` catalytic errors so that it
/// leaves none.
#[derive(Debug, Clone)]
pub struct ReversalCounting<H> {
    pub hooks: H,
    pub e: usize,
    pub step_cap: u64,
    /// Verify `backward(forward(v)) = v` every this many steps.
    pub check_every: u64,
}

pub fn simulate_errors_via_reversal<H: ReversibleHooks>(hooks: H, e: usize) -> ReversalCounting<H> {
    ReversalCounting { hooks, e, step_cap: DEFAULT_STEP_CAP, check_every: 1 }
}

impl<H: ReversibleHooks> ReversalCounting<H> {
    pub fn with_step_cap(mut self, cap: u64) -> Self {
        self.step_cap = cap;
        self
    }

    /// Number of tapes within distance `e` of a `c`-bit tape, an upper bound
    /// on the start configurations one run can meet.
    pub fn counter_bound(&self) -> u64 {
        binomial_ball(self.hooks.cat_len(), self.e)
    }

    pub fn counter_bits(&self) -> u32 {
        bits_for(self.counter_bound() + 1)
    }

    fn check_pair(&self, input: &[bool], from: &Configuration, to: &Configuration, dir: &str) -> Result<(), MachineError> {
        let back = match dir {
            "forward" => self.hooks.backward(input, to)?,
            _ => self.hooks.forward(input, to)?,
        };
        if back.as_ref() != Some(from) {
            return Err(MachineError::HookInconsistent(format!("{dir} step is not undone by its inverse")));
        }
        Ok(())
    }
}

impl<H: ReversibleHooks> CatalyticRunner for ReversalCounting<H> {
    fn mode(&self) -> &'static str {
        "reverse-count"
    }

    fn catalytic_len(&self) -> usize {
        self.hooks.cat_len()
    }

    fn error_budget(&self) -> usize {
        0
    }

    fn aux_mode(&self) -> AuxMode {
        AuxMode::None
    }

    fn run(&self, input: &[bool], tau: &[bool], aux: Option<&[bool]>) -> Result<SimulationReport, MachineError> {
        if aux.is_some() {
            return Err(MachineError::UnexpectedAux);
        }
        let bound = self.counter_bound();
        let mut cfg = self.hooks.start(tau)?;
        let mut meter = MeterScope::new("reverse-count");

        meter.enter_phase("forward");
        let work = meter.lease(self.hooks.work_len() as u64);
        let counter = meter.lease(self.counter_bits() as u64);
        let mut num_start = 1u64;
        let mut peak = 1u64;
        let mut steps = 0u64;
        let output = loop {
            if let Some(out) = self.hooks.halt_output(&cfg) {
                break out;
            }
            let Some(next) = self.hooks.forward(input, &cfg)? else {
                return Err(MachineError::HookInconsistent("no successor at a non-halting configuration".into()));
            };
            steps += 1;
            if steps.is_multiple_of(self.check_every) {
                self.check_pair(input, &cfg, &next, "forward")?;
            }
            cfg = next;
            if self.hooks.is_start(&cfg) {
                num_start += 1;
                peak = peak.max(num_start);
                if num_start > bound {
                    return Err(MachineError::CounterOverflow { count: num_start, bound });
                }
            }
            if steps > self.step_cap {
                return Err(MachineError::StepCap { cap: self.step_cap });
            }
        };
        let answer = meter.lease(1);

        meter.enter_phase("backward");
        let mut back_steps = 0u64;
        loop {
            if self.hooks.is_start(&cfg) {
                num_start -= 1;
                if num_start == 0 {
                    break;
                }
            }
            let Some(prev) = self.hooks.backward(input, &cfg)? else {
                return Err(MachineError::HookInconsistent(format!(
                    "backward run stopped with {num_start} start configurations outstanding"
                )));
            };
            back_steps += 1;
            if back_steps.is_multiple_of(self.check_every) {
                self.check_pair(input, &cfg, &prev, "backward")?;
            }
            cfg = prev;
            if back_steps > self.step_cap {
                return Err(MachineError::StepCap { cap: self.step_cap });
            }
        }
        meter.end(answer);
        meter.end(counter);
        meter.end(work);
        meter.close().expect("all registers released");

        Ok(SimulationReport {
            mode: self.mode().into(),
            output,
            steps: steps + back_steps,
            catalytic_len: tau.len(),
            hamming_distance: hamming(&cfg.cat, tau),
            error_budget: 0,
            meter: meter.report().expect("closed"),
            final_tape: cfg.cat,
            support: Vec::new(),
            init_flips: None,
            peak_num_start: Some(peak),
            notes: Vec::new(),
        })
    }
}

/// All tapes within Hamming distance `e` of `center`.
pub fn tapes_within(center: &[bool], e: usize) -> Vec<Vec<bool>> {
    fn rec(tape: &mut Vec<bool>, from: usize, left: usize, out: &mut Vec<Vec<bool>>) {
        out.push(tape.clone());
        if left == 0 {
            return;
        }
        for i in from..tape.len() {
            tape[i] = !tape[i];
            rec(tape, i + 1, left - 1, out);
            tape[i] = !tape[i];
        }
    }
    let mut out = Vec::new();
    rec(&mut center.to_vec(), 0, e, &mut out);
    out
}

/// Counts the tapes within distance `e` of the halting tape whose forward run
/// ends in `halt`.
pub fn count_start_tapes<H: ReversibleHooks>(
    hooks: &H,
    input: &[bool],
    halt: &Configuration,
    e: usize,
    step_cap: u64,
) -> Result<u64, MachineError> {
    let mut count = 0;
    for tau in tapes_within(&halt.cat, e) {
        let mut cfg = hooks.start(&tau)?;
        let mut steps = 0u64;
        while hooks.halt_output(&cfg).is_none() {
            match hooks.forward(input, &cfg) {
                Ok(Some(next)) => cfg = next,
                // a tape the machine cannot run on does not reach `halt`
                Ok(None) | Err(MachineError::Stuck { .. } | MachineError::HeadOutOfRange { .. }) => break,
                Err(e) => return Err(e),
            }
            steps += 1;
            if steps > step_cap {
                return Err(MachineError::StepCap { cap: step_cap });
            }
        }
        if &cfg == halt {
            count += 1;
        }
    }
    Ok(count)
}
