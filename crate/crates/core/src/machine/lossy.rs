//! Running a lossy machine with exact restoration: encode the tape's check
//! symbols into clean space, run the machine, then decode and repair.

use crate::bch::CodecParams;
use crate::meter::MeterScope;

use super::{hamming, AuxMode, CatalyticRunner, MachineError, MachineSpec, SimulationReport, DEFAULT_STEP_CAP};

/// A machine allowed `e` catalytic errors, wrapped so that it leaves none.
#[derive(Debug, Clone)]
pub struct BchWrapped {
    pub spec: MachineSpec,
    pub params: CodecParams,
    pub step_cap: u64,
}

pub fn wrap_lossy_with_bch(spec: MachineSpec, e: usize) -> Result<BchWrapped, MachineError> {
    let params = CodecParams::new(spec.cat_len, e)?;
    Ok(BchWrapped { spec, params, step_cap: DEFAULT_STEP_CAP })
}

impl BchWrapped {
    pub fn with_step_cap(mut self, cap: u64) -> BchWrapped {
        self.step_cap = cap;
        self
    }
}

impl CatalyticRunner for BchWrapped {
    fn mode(&self) -> &'static str {
        "bch-wrap"
    }

    fn catalytic_len(&self) -> usize {
        self.spec.cat_len
    }

    fn error_budget(&self) -> usize {
        0
    }

    fn aux_mode(&self) -> AuxMode {
        self.spec.aux_mode
    }

    fn run(&self, input: &[bool], tau: &[bool], aux: Option<&[bool]>) -> Result<SimulationReport, MachineError> {
        self.spec.check_tau(tau)?;
        self.spec.check_aux(aux)?;
        let p = &self.params;
        let mut meter = MeterScope::new("bch-wrap");

        meter.enter_phase("init");
        let codeword = p.encode_metered(tau, &mut meter)?;
        let checks = codeword.checks().to_vec();
        let stored = meter.lease(p.check_bits() as u64);
        drop(codeword);

        meter.enter_phase("sim");
        let work_reg = meter.lease(self.spec.work_len as u64);
        let answer_reg = meter.lease(1);
        let mut work = vec![false; self.spec.work_len];
        let mut cat = tau.to_vec();
        let result = self.spec.execute(input, aux, &mut work, &mut cat, self.step_cap);
        meter.end(work_reg);
        let (output, steps) = match result {
            Ok(v) => v,
            Err(e) => {
                meter.end(answer_reg);
                meter.end(stored);
                return Err(e);
            }
        };

        meter.enter_phase("cleanup");
        let mut word = p.pack_tape(&cat)?;
        word.extend_from_slice(&checks);
        let decoded = p.decode_metered(&word, &mut meter);
        meter.end(stored);
        meter.end(answer_reg);
        let outcome = decoded?;
        let repaired = outcome.codeword.tape();
        meter.close().expect("all registers released");

        let distance = hamming(&repaired, tau);
        Ok(SimulationReport {
            mode: self.mode().into(),
            output,
            steps,
            catalytic_len: tau.len(),
            hamming_distance: distance,
            error_budget: 0,
            meter: meter.report().expect("closed"),
            final_tape: repaired,
            support: outcome.support.entries.iter().map(|&(pos, v)| (pos, v.value())).collect(),
            init_flips: None,
            peak_num_start: None,
            notes: Vec::new(),
        })
    }
}
