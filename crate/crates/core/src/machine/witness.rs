//! Running machines with auxiliary tapes: every witness up to a length, or
//! seeded random bits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AuxMode, CatalyticRunner, MachineError};

/// Witness lengths above this are refused.
pub const MAX_WITNESS_LEN: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessSummary {
    /// Some witness made the machine accept.
    pub accepted: bool,
    pub tried: u64,
    pub accepting: u64,
    pub max_distance: usize,
    pub first_accepting: Option<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedSummary {
    pub trials: u64,
    pub accepts: u64,
    pub frequency: f64,
    pub max_distance: usize,
}

fn bits_string(bits: &[bool]) -> String {
    if bits.is_empty() {
        return "ε".into();
    }
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Runs every witness of length `0..=max_len` and checks that each run,
/// accepting or not, stays within the runner's error budget.
pub fn enumerate_witnesses<R: CatalyticRunner + ?Sized>(
    runner: &R,
    input: &[bool],
    tau: &[bool],
    max_len: usize,
) -> Result<WitnessSummary, MachineError> {
    if runner.aux_mode() != AuxMode::Witness {
        return Err(MachineError::Spec("witness enumeration needs a machine with aux=witness".into()));
    }
    if max_len > MAX_WITNESS_LEN {
        return Err(MachineError::Spec(format!("witness length {max_len} above {MAX_WITNESS_LEN}")));
    }
    let mut summary = WitnessSummary { accepted: false, tried: 0, accepting: 0, max_distance: 0, first_accepting: None };
    for len in 0..=max_len {
        for v in 0u32..1 << len {
            let w: Vec<bool> = (0..len).map(|i| (v >> i) & 1 == 1).collect();
            let rep = runner.run(input, tau, Some(&w)).map_err(|e| match e {
                MachineError::Codec(err) => MachineError::ContractViolation {
                    distance: usize::MAX,
                    budget: runner.error_budget(),
                    witness: Some(format!("{} ({err})", bits_string(&w))),
                },
                other => other,
            })?;
            if !rep.contract_holds() {
                return Err(MachineError::ContractViolation {
                    distance: rep.hamming_distance,
                    budget: rep.error_budget,
                    witness: Some(bits_string(&w)),
                });
            }
            summary.tried += 1;
            summary.max_distance = summary.max_distance.max(rep.hamming_distance);
            if rep.output {
                summary.accepting += 1;
                if !summary.accepted {
                    summary.accepted = true;
                    summary.first_accepting = Some(w);
                }
            }
        }
    }
    Ok(summary)
}

/// Runs `trials` times on `aux_len` seeded random bits each and reports the
/// acceptance frequency.
pub fn run_randomized<R: CatalyticRunner + ?Sized>(
    runner: &R,
    input: &[bool],
    tau: &[bool],
    aux_len: usize,
    trials: u64,
    seed: u64,
) -> Result<RandomizedSummary, MachineError> {
    if runner.aux_mode() != AuxMode::Random {
        return Err(MachineError::Spec("randomized runs need a machine with aux=random".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepts = 0;
    let mut max_distance = 0;
    for _ in 0..trials {
        let bits: Vec<bool> = (0..aux_len).map(|_| rng.random()).collect();
        let rep = runner.run(input, tau, Some(&bits))?;
        if !rep.contract_holds() {
            return Err(MachineError::ContractViolation {
                distance: rep.hamming_distance,
                budget: rep.error_budget,
                witness: Some(bits_string(&bits)),
            });
        }
        max_distance = max_distance.max(rep.hamming_distance);
        accepts += rep.output as u64;
    }
    let frequency = if trials == 0 { 0.0 } else { accepts as f64 / trials as f64 };
    Ok(RandomizedSummary { trials, accepts, frequency, max_distance })
}

#[cfg(test)]
mod tests {
    use super::super::{parse_program, programs, wrap_lossy_with_bch, write_program, Plain};
    use super::*;

    #[test]
    fn prefix_machine_accepts_iff_some_witness_matches() {
        let runner = Plain::new(programs::prefix_witness(2), 0);
        for input in [vec![], vec![true], vec![false, true, true]] {
            let s = enumerate_witnesses(&runner, &input, &[false; 2], 4).unwrap();
            // witnesses of length >= |input| starting with the input
            let expected: u64 = (input.len()..=4).map(|l| 1u64 << (l - input.len())).sum();
            assert_eq!(s.accepting, expected);
            assert!(s.accepted);
            assert_eq!(s.first_accepting, Some(input.clone()));
        }
        let s = enumerate_witnesses(&runner, &[true; 5], &[false; 2], 4).unwrap();
        assert!(!s.accepted);
        assert_eq!(s.tried, 31);
    }

    #[test]
    fn lossy_witness_machine_violates_plain_budget() {
        let runner = Plain::new(programs::witness_flipper(8, 2), 1);
        match enumerate_witnesses(&runner, &[], &[false; 8], 3) {
            Err(MachineError::ContractViolation { distance: 2, budget: 1, witness: Some(w) }) => assert_eq!(w, "11"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bch_wrapped_witness_machine_restores_every_tape() {
        let runner = wrap_lossy_with_bch(programs::witness_flipper(32, 3), 3).unwrap();
        let tau: Vec<bool> = (0..32).map(|i| i % 5 == 1).collect();
        let s = enumerate_witnesses(&runner, &[], &tau, 6).unwrap();
        assert_eq!(s.max_distance, 0);
        assert_eq!(s.tried, 127);
        assert!(s.accepted);
    }

    #[test]
    fn ignored_witness_matches_no_aux() {
        let plain = programs::flip_positions(6, &[2]);
        let text = write_program(&plain).replace("aux=none", "aux=witness");
        let mut lines = Vec::new();
        for l in text.lines() {
            if let Some(rest) = l.strip_prefix("trans ") {
                let w: Vec<&str> = rest.split(' ').collect();
                for a in ['0', '1', '_'] {
                    lines.push(format!("trans {} {}{a} {} {} {} {}", w[0], w[1], w[2], w[3], w[4], w[5]));
                }
            } else {
                lines.push(l.to_string());
            }
        }
        let with_aux = parse_program(&lines.join("\n")).unwrap();
        let tau = [true, false, true, true, false, false];
        let base = Plain::new(plain, 1).run(&[], &tau, None).unwrap();
        let s = enumerate_witnesses(&Plain::new(with_aux, 1), &[], &tau, 3).unwrap();
        assert_eq!(s.max_distance, base.hamming_distance);
        assert_eq!(s.accepting, if base.output { s.tried } else { 0 });
    }

    #[test]
    fn randomized_frequency_is_seeded() {
        let text = write_program(&programs::witness_flipper(8, 0)).replace("aux=witness", "aux=random");
        let runner = Plain::new(parse_program(&text).unwrap(), 0);
        let a = run_randomized(&runner, &[], &[false; 8], 4, 400, 5).unwrap();
        let b = run_randomized(&runner, &[], &[false; 8], 4, 400, 5).unwrap();
        assert_eq!(a, b);
        assert!((a.frequency - 0.5).abs() < 0.1, "{}", a.frequency);
        assert!(enumerate_witnesses(&runner, &[], &[false; 8], 2).is_err());
    }
}
