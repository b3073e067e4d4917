use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use catacode_core::bch::{CodecError, CodecParams};
use catacode_core::chessboard::{MemBlock, MAX_K};
use catacode_core::gf2r::FieldCtx;
use catacode_core::machine::{
    enumerate_witnesses, expand_space_with_errors, parse_program, run_randomized, simulate_errors_via_reversal,
    wrap_lossy_with_bch, AuxMode, CatalyticRunner, Layout, MachineError, Plain, SimulationReport, TableReversible,
    DEFAULT_STEP_CAP,
};
use catacode_core::meter::MeterScope;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::report::{LayoutParams, Report};
use crate::tapefile;
use crate::{
    CliError, MemDemoArgs, Mode, SimRunArgs, EXIT_CONTRACT, EXIT_OTHER, EXIT_STEP_CAP, EXIT_UNCORRECTABLE,
};

fn codec_error(err: CodecError) -> CliError {
    match err {
        CodecError::Params(_) => CliError::params(err.to_string()),
        CodecError::Uncorrectable(_) => CliError::new(EXIT_UNCORRECTABLE, err.to_string()),
        CodecError::Length { .. } => CliError::malformed(err.to_string()),
        _ => CliError::new(EXIT_OTHER, err.to_string()),
    }
}

fn machine_error(err: MachineError) -> CliError {
    let msg = err.to_string();
    match err {
        MachineError::Parse { .. } => CliError::malformed(msg),
        MachineError::Spec(_)
        | MachineError::Layout(_)
        | MachineError::TapeLength { .. }
        | MachineError::MissingAux
        | MachineError::UnexpectedAux
        | MachineError::HookInconsistent(_) => CliError::params(msg),
        MachineError::StepCap { .. } => CliError::new(EXIT_STEP_CAP, msg),
        MachineError::ContractViolation { .. } | MachineError::CounterOverflow { .. } => {
            CliError::new(EXIT_CONTRACT, msg)
        }
        MachineError::Codec(e) => codec_error(e),
        MachineError::Stuck { .. } | MachineError::HeadOutOfRange { .. } => CliError::new(EXIT_OTHER, msg),
    }
}

/// The given seed, or one from the clock. Printed so the run can be repeated.
fn resolve_seed(seed: Option<u64>) -> u64 {
    let seed = seed.unwrap_or_else(|| {
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos() as u64).unwrap_or(0)
    });
    eprintln!("seed: {seed}");
    seed
}

fn step_cap() -> Result<u64, CliError> {
    match std::env::var("CATACODE_STEP_CAP") {
        Ok(v) => v.trim().parse().map_err(|_| CliError::params(format!("CATACODE_STEP_CAP: bad value `{v}`"))),
        Err(_) => Ok(DEFAULT_STEP_CAP),
    }
}

fn codec_params(report: &mut Report, p: &CodecParams) {
    report.params.c = Some(p.c());
    report.params.e = Some(p.e());
    report.params.r = Some(p.r());
    report.params.delta = Some(p.delta());
}

pub fn field(r: u32) -> Result<(), CliError> {
    let ctx = FieldCtx::new(r).map_err(|e| CliError::params(e.to_string()))?;
    let m = ctx.modulus();
    let terms: Vec<String> = (0..=r)
        .rev()
        .filter(|&i| m.coeff(i))
        .map(|i| match i {
            0 => "1".to_string(),
            1 => "x".to_string(),
            _ => format!("x^{i}"),
        })
        .collect();
    let order = ctx.order(ctx.generator()).map_err(|e| CliError::params(e.to_string()))?;
    println!("modulus {:#x} ({})", m.0, terms.join(" + "));
    println!("generator order {order}");
    Ok(())
}

/// Check symbols are stored after the tape, `r` bits each, low bit first.
fn checks_to_bits(p: &CodecParams, checks: &[catacode_core::gf2r::Symbol]) -> Vec<bool> {
    let r = p.r();
    checks.iter().flat_map(|s| (0..r).map(move |b| (s.value() >> b) & 1 == 1)).collect()
}

pub fn encode(tape: &Path, e: usize, out: &Path) -> Result<(), CliError> {
    let bits = tapefile::read(tape)?;
    let p = CodecParams::new(bits.len(), e).map_err(codec_error)?;
    let cw = p.encode(&bits).map_err(codec_error)?;
    let mut word = bits;
    word.extend(checks_to_bits(&p, cw.checks()));
    tapefile::write(out, &word)?;
    println!(
        "encoded {} tape bits with {} check symbols of {} bits ({} stored bits)",
        p.c(),
        p.n_checks(),
        p.r(),
        p.check_bits()
    );
    Ok(())
}

pub fn corrupt(input: &Path, flips: usize, seed: Option<u64>, out: &Path) -> Result<(), CliError> {
    let mut bits = tapefile::read(input)?;
    if flips > bits.len() {
        return Err(CliError::params(format!("{flips} flips requested on a {}-bit tape", bits.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(resolve_seed(seed));
    let mut positions = sample(&mut rng, bits.len(), flips).into_vec();
    positions.sort_unstable();
    for &i in &positions {
        bits[i] = !bits[i];
    }
    tapefile::write(out, &bits)?;
    println!("flipped bits {positions:?}");
    Ok(())
}

pub fn decode(input: &Path, e: usize, c: usize, out: &Path, report_path: Option<&Path>) -> Result<(), CliError> {
    let bits = tapefile::read(input)?;
    let p = CodecParams::new(c, e).map_err(codec_error)?;
    let r = p.r() as usize;
    let expected = c + p.n_checks() * r;
    if bits.len() != expected {
        return Err(CliError::malformed(format!(
            "{}: expected {expected} bits (c = {c} plus {} check bits), found {}",
            input.display(),
            p.n_checks() * r,
            bits.len()
        )));
    }
    let mut word = p.pack_tape(&bits[..c]).map_err(codec_error)?;
    for chunk in bits[c..].chunks(r) {
        let v = chunk.iter().enumerate().fold(0u64, |acc, (b, &x)| acc | (x as u64) << b);
        word.push(p.field().symbol(v).map_err(|e| CliError::new(EXIT_OTHER, e.to_string()))?);
    }
    let mut report = Report::new("decode");
    codec_params(&mut report, &p);
    let mut meter = MeterScope::new("decode");
    meter.enter_phase("decode");
    let outcome = p.decode_metered(&word, &mut meter).map_err(codec_error)?;
    meter.close().map_err(|e| CliError::new(EXIT_OTHER, e.to_string()))?;
    let decoded = outcome.codeword.tape();
    let mut full = decoded.clone();
    full.extend(checks_to_bits(&p, outcome.codeword.checks()));
    report.hamming_distance = Some(full.iter().zip(&bits).filter(|(a, b)| a != b).count());
    report.set_support(outcome.support.entries.iter().map(|&(pos, v)| (pos, v.value())));
    report.set_meter(&meter.report().expect("closed"));
    report.detail("locator_degree", outcome.locator_degree);
    report.detail("final_j", outcome.final_j);
    tapefile::write(out, &decoded)?;
    match report_path {
        Some(path) => report.emit(Some(path))?,
        None => println!("corrected {} symbols", outcome.support.len()),
    }
    Ok(())
}

fn read_program(path: &Path) -> Result<catacode_core::machine::MachineSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_program(&text).map_err(|e| CliError::malformed(format!("{}: {e}", path.display())))
}

fn need_e(args: &SimRunArgs) -> Result<usize, CliError> {
    args.e.ok_or_else(|| CliError::params(format!("--e is required for mode {:?}", args.mode)))
}

fn fill_report(report: &mut Report, rep: &SimulationReport) {
    report.output = Some(rep.output);
    report.steps = Some(rep.steps);
    report.hamming_distance = Some(rep.hamming_distance);
    report.set_support(rep.support.iter().copied());
    report.set_meter(&rep.meter);
    report.detail("mode", rep.mode.clone());
    report.detail("error_budget", rep.error_budget);
    report.detail("contract_holds", rep.contract_holds());
    if let Some(n) = rep.init_flips {
        report.detail("init_flips", n);
    }
    if let Some(n) = rep.peak_num_start {
        report.detail("peak_num_start", n);
    }
    report.notes.extend(rep.notes.iter().cloned());
}

pub fn sim_run(args: &SimRunArgs) -> Result<(), CliError> {
    let spec = read_program(&args.program)?;
    let mut tau = tapefile::read(&args.tape)?;
    let input = tapefile::parse_bits(&args.input).map_err(CliError::params)?;
    let cap = step_cap()?;
    let c = spec.cat_len;
    let mut report = Report::new("sim run");
    report.params.c = Some(c);
    report.params.e = args.e;
    let mut seed = None;

    let runner: Box<dyn CatalyticRunner> = match args.mode {
        Mode::Plain => Box::new(Plain { spec: spec.clone(), budget: args.e.unwrap_or(0), step_cap: cap }),
        Mode::BchWrap => {
            let wrapped = wrap_lossy_with_bch(spec.clone(), need_e(args)?).map_err(machine_error)?;
            codec_params(&mut report, &wrapped.params);
            Box::new(wrapped.with_step_cap(cap))
        }
        Mode::MemExpand => {
            let layout = match (args.blocks, args.k, args.delta_hat) {
                (Some(b), Some(k), _) => Layout::new(b, k),
                (_, _, Some(d)) => Layout::main_rev(c, need_e(args)?, args.eps, d),
                _ => Layout::default_for(c, need_e(args)?),
            }
            .map_err(machine_error)?;
            if let Some(d) = args.delta_hat {
                let bound = c as f64 * 2.0 * (1.0 + args.eps) / d as f64;
                report.detail("extra_len_bound", bound);
                report.detail("extra_len_within_bound", layout.extra_len() as f64 <= bound);
            }
            let expanded = expand_space_with_errors(spec.clone(), layout.clone(), args.plain).map_err(machine_error)?;
            report.params.layout = Some(LayoutParams {
                blocks: layout.blocks,
                k: layout.k,
                plain: expanded.plain_len,
                extra_len: layout.extra_len(),
            });
            if tau.len() == c {
                let s = resolve_seed(args.seed);
                seed = Some(s);
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                tau.extend((0..layout.extra_len()).map(|_| rng.random::<bool>()));
                report.notes.push(format!("block bits drawn from seed {s}"));
            }
            Box::new(expanded.with_step_cap(cap))
        }
        Mode::ReverseCount => {
            let hooks = TableReversible::new(spec.clone()).map_err(machine_error)?;
            let counting = simulate_errors_via_reversal(hooks, need_e(args)?).with_step_cap(cap);
            report.detail("counter_bits", counting.counter_bits());
            Box::new(counting)
        }
    };
    if tau.len() != runner.catalytic_len() {
        return Err(CliError::params(format!(
            "tape has {} bits but mode {:?} needs {}",
            tau.len(),
            args.mode,
            runner.catalytic_len()
        )));
    }

    let rep = match spec.aux_mode {
        AuxMode::None => {
            if args.aux.is_some() || args.witness_enum.is_some() {
                return Err(CliError::params("the program has no auxiliary tape"));
            }
            runner.run(&input, &tau, None).map_err(machine_error)?
        }
        AuxMode::Witness => match (&args.witness_enum, &args.aux) {
            (Some(max_len), _) => {
                let summary = enumerate_witnesses(runner.as_ref(), &input, &tau, *max_len).map_err(machine_error)?;
                report.detail("witnesses_tried", summary.tried);
                report.detail("witnesses_accepting", summary.accepting);
                report.detail("max_distance", summary.max_distance);
                let shown = summary.first_accepting.clone().unwrap_or_default();
                report.detail("first_accepting", summary.first_accepting.as_ref().map(|w| bits_string(w)));
                let mut rep = runner.run(&input, &tau, Some(&shown)).map_err(machine_error)?;
                rep.output = summary.accepted;
                rep
            }
            (None, Some(w)) => {
                let w = tapefile::parse_bits(w).map_err(CliError::params)?;
                runner.run(&input, &tau, Some(&w)).map_err(machine_error)?
            }
            (None, None) => return Err(CliError::params("witness program needs --aux or --witness-enum")),
        },
        AuxMode::Random => {
            let s = resolve_seed(args.seed);
            seed = Some(s);
            let summary =
                run_randomized(runner.as_ref(), &input, &tau, args.aux_len, args.trials, s).map_err(machine_error)?;
            report.detail("trials", summary.trials);
            report.detail("accepts", summary.accepts);
            report.detail("frequency", summary.frequency);
            report.detail("max_distance", summary.max_distance);
            // the first trial's bits, for the meter and step counts
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let first: Vec<bool> = (0..args.aux_len).map(|_| rng.random()).collect();
            let mut rep = runner.run(&input, &tau, Some(&first)).map_err(machine_error)?;
            rep.output = 2 * summary.accepts > summary.trials;
            rep
        }
    };

    fill_report(&mut report, &rep);
    report.seed = seed;
    if let Some(out) = &args.out {
        tapefile::write(out, &rep.final_tape)?;
    }
    report.emit(args.report.as_deref())?;
    if !rep.contract_holds() {
        return Err(CliError::new(
            EXIT_CONTRACT,
            format!("distance {} exceeds budget {}", rep.hamming_distance, rep.error_budget),
        ));
    }
    Ok(())
}

fn bits_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

enum ScriptOp {
    Write(u32, bool),
    Steer(u64),
    Flip(usize),
}

fn parse_script(text: &str, k: u32) -> Result<Vec<(String, ScriptOp)>, String> {
    let mut ops = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |m: &str| format!("line {}: {m}", idx + 1);
        let words: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<u64>().map_err(|_| bad(&format!("bad number `{s}`")));
        let op = match words.as_slice() {
            ["write", j, b] => {
                let j = num(j)?;
                if j >= k as u64 {
                    return Err(bad(&format!("mem bit {j} outside 0..{k}")));
                }
                let bit = match *b {
                    "0" => false,
                    "1" => true,
                    _ => return Err(bad("written bit must be 0 or 1")),
                };
                ScriptOp::Write(j as u32, bit)
            }
            ["steer", v] => ScriptOp::Steer(num(v)?),
            ["flip", i] => ScriptOp::Flip(num(i)? as usize),
            _ => return Err(bad(&format!("expected `write <j> <bit>`, `steer <value>` or `flip <index>`, got `{line}`"))),
        };
        ops.push((line.to_string(), op));
    }
    Ok(ops)
}

pub fn mem_demo(args: &MemDemoArgs) -> Result<(), CliError> {
    if !(1..=MAX_K).contains(&args.k) {
        return Err(CliError::params(format!("k = {} outside 1..={MAX_K}", args.k)));
    }
    let k = args.k;
    let text = fs::read_to_string(&args.script).map_err(|e| CliError::io(&args.script, e))?;
    let ops = parse_script(&text, k).map_err(|m| CliError::malformed(format!("{}: {m}", args.script.display())))?;
    let mut report = Report::new("mem demo");
    let tau = match &args.tape {
        Some(path) => tapefile::read(path)?,
        None => {
            let s = resolve_seed(args.seed);
            report.seed = Some(s);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            (0..1usize << k).map(|_| rng.random()).collect()
        }
    };
    let mut block = MemBlock::new(k, tau.clone()).map_err(|e| CliError::params(e.to_string()))?;
    let width = k as usize;
    println!("start mem={:0width$b}", block.mem());
    let mut trajectory = vec![block.mem()];
    for (line, op) in ops {
        let flipped = match op {
            ScriptOp::Write(j, bit) => {
                let target = (block.mem() & !(1 << j)) | (bit as u64) << j;
                block.steer(target)
            }
            ScriptOp::Steer(v) => block.steer(v),
            ScriptOp::Flip(i) => block.flip(i).map(|()| Some(i)),
        }
        .map_err(|e| CliError::params(format!("`{line}`: {e}")))?;
        let what = flipped.map_or("no flip".to_string(), |i| format!("flip {i}"));
        println!("{line:<16} {what:<12} mem={:0width$b}", block.mem());
        trajectory.push(block.mem());
    }
    let distance = block.tau().iter().zip(&tau).filter(|(a, b)| a != b).count();
    println!("final distance {distance}");
    report.hamming_distance = Some(distance);
    report.detail("k", k);
    report.detail("mem_trajectory", json!(trajectory));
    if let Some(path) = &args.report {
        report.emit(Some(path))?;
    }
    Ok(())
}
