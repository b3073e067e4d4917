//! Systematic BCH code over GF(2^r) with designed distance `δ = 2e + 1`.
//!
//! A tape of `c` bits is cut into `n_data = ⌈c/r⌉` data symbols (the last one
//! zero-padded) and `2e` check symbols are appended so that every syndrome
//! `s_i = Σ_x d_x x^i`, `1 ≤ i ≤ 2e`, vanishes. Position `p` of the codeword is
//! labelled by the field element `g^(p+1)`.
//!
//! Decoding follows the congruence `S(z)σ(z) ≡ ω(z) (mod z^δ)`, where
//! `S(z) = Σ_{l≥1} s_l z^l`, `σ` is the error locator with `σ(0) = 1` and `ω`
//! is the evaluator with `ω(0) = 0`. Its coefficients of `z^1..z^j` form a
//! square system in `(σ_1..σ_t, ω_1..ω_t)`, `t = j/2`; `j` starts at `2e` and
//! drops by two while the system is singular.

use thiserror::Error;

use crate::gf2r::{bits_for, FieldCtx, FieldError, Symbol};
use crate::linalg::{self, LinalgError, SquareSource};
use crate::meter::MeterScope;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("invalid code parameters: {0}")]
    Params(String),
    #[error("expected {expected} {what}, got {got}")]
    Length { what: &'static str, expected: usize, got: usize },
    #[error("position {pos} outside codeword of {len} symbols")]
    Position { pos: usize, len: usize },
    #[error("syndrome index {i} outside 1..={max}")]
    SyndromeIndex { i: usize, max: usize },
    #[error("bit position {pos} listed twice")]
    DuplicateFlip { pos: usize },
    #[error("bit position {pos} outside word of {len} bits")]
    FlipOutOfRange { pos: usize, len: usize },
    #[error("uncorrectable word: {0}")]
    Uncorrectable(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Shape of the code protecting a `c`-bit tape against `e` bit errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodecParams {
    c: usize,
    e: usize,
    r: u32,
    delta: usize,
    n_data: usize,
    pad_bits: usize,
    field: FieldCtx,
}

impl CodecParams {
    pub fn new(c: usize, e: usize) -> Result<CodecParams, CodecError> {
        if c < 2 {
            return Err(CodecError::Params(format!("tape length c = {c} must be at least 2")));
        }
        if e < 1 {
            return Err(CodecError::Params("error budget e must be at least 1".into()));
        }
        let limit = c as f64 / (2.0 * (c as f64).log2());
        if e as f64 > limit {
            return Err(CodecError::Params(format!(
                "e = {e} exceeds c/(2 log2 c) = {limit:.2} for c = {c}"
            )));
        }
        let r = bits_for((c + e) as u64);
        let field = FieldCtx::new(r).map_err(|err| CodecError::Params(err.to_string()))?;
        let n_data = c.div_ceil(r as usize);
        let pad_bits = n_data * r as usize - c;
        if (n_data + 2 * e) as u64 > field.group_order() {
            return Err(CodecError::Params(format!(
                "{} symbols do not fit in GF(2^{r})*",
                n_data + 2 * e
            )));
        }
        Ok(CodecParams { c, e, r, delta: 2 * e + 1, n_data, pad_bits, field })
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    pub fn pad_bits(&self) -> usize {
        self.pad_bits
    }

    pub fn n_checks(&self) -> usize {
        2 * self.e
    }

    pub fn n_total(&self) -> usize {
        self.n_data + self.n_checks()
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    /// Bits stored besides the tape: the check symbols plus the zero padding
    /// of the last data symbol.
    pub fn check_bits(&self) -> usize {
        self.n_checks() * self.r as usize + self.pad_bits
    }

    /// Bits in a full codeword, padding included.
    pub fn codeword_bits(&self) -> usize {
        self.n_total() * self.r as usize
    }

    /// The field element labelling codeword position `pos`: `g^(pos+1)`.
    pub fn index_of(&self, pos: usize) -> Result<Symbol, CodecError> {
        if pos >= self.n_total() {
            return Err(CodecError::Position { pos, len: self.n_total() });
        }
        Ok(self.field.exp(pos as u64 + 1))
    }

    fn check_len(&self, what: &'static str, expected: usize, got: usize) -> Result<(), CodecError> {
        if expected == got {
            Ok(())
        } else {
            Err(CodecError::Length { what, expected, got })
        }
    }

    /// Cuts the tape into `r`-bit symbols, tape bit `k·r + b` becoming bit `b`
    /// of symbol `k`. The last symbol is padded with zeros.
    pub fn pack_tape(&self, tape: &[bool]) -> Result<Vec<Symbol>, CodecError> {
        self.check_len("tape bits", self.c, tape.len())?;
        let r = self.r as usize;
        Ok(tape
            .chunks(r)
            .map(|chunk| {
                let v = chunk.iter().enumerate().fold(0u64, |acc, (b, &bit)| acc | ((bit as u64) << b));
                self.field.symbol(v).expect("r-bit chunk")
            })
            .collect())
    }

    pub fn unpack_tape(&self, data: &[Symbol]) -> Result<Vec<bool>, CodecError> {
        self.check_len("data symbols", self.n_data, data.len())?;
        let r = self.r as usize;
        Ok((0..self.c).map(|t| (data[t / r].value() >> (t % r)) & 1 == 1).collect())
    }

    fn check_syndrome_index(&self, i: usize) -> Result<(), CodecError> {
        if i == 0 || i >= self.delta {
            return Err(CodecError::SyndromeIndex { i, max: self.delta - 1 });
        }
        Ok(())
    }

    /// `Σ_x d_x x^i` over the leading symbols of a word, labelled from
    /// position 0. Index and power registers are advanced by iterated
    /// multiplication.
    fn power_sum(&self, symbols: &[Symbol], i: usize, meter: &mut MeterScope) -> Symbol {
        let ctx = &self.field;
        let w = self.r as u64;
        // G, I, P, M, S, E and two counters up to δ
        let regs = meter.lease(6 * w + 2 * bits_for(self.delta as u64) as u64);
        let g = ctx.generator();
        let mut index = g;
        let mut sum = Symbol::ZERO;
        for &d in symbols {
            let power = ctx.pow(index, i as u64);
            sum = ctx.add(sum, ctx.mul(power, d));
            index = ctx.mul(index, g);
        }
        meter.end(regs);
        sum
    }

    /// `s_i` of a full word.
    pub fn compute_syndrome(&self, word: &[Symbol], i: usize) -> Result<Symbol, CodecError> {
        self.check_len("codeword symbols", self.n_total(), word.len())?;
        self.check_syndrome_index(i)?;
        Ok(self.power_sum(word, i, &mut MeterScope::new("syndrome")))
    }

    /// `s_i'`: the power sum over data positions only. The check symbols must
    /// then satisfy `Σ_{x∈C} d_x x^i = s_i'` (the sign is immaterial in
    /// characteristic 2).
    pub fn compute_partial(&self, data: &[Symbol], i: usize) -> Result<Symbol, CodecError> {
        self.check_len("data symbols", self.n_data, data.len())?;
        self.check_syndrome_index(i)?;
        Ok(self.power_sum(data, i, &mut MeterScope::new("partial")))
    }

    pub fn syndrome(&self, word: &[Symbol]) -> Result<Syndrome, CodecError> {
        self.check_len("codeword symbols", self.n_total(), word.len())?;
        let mut meter = MeterScope::new("syndrome");
        Ok(Syndrome { values: (1..self.delta).map(|i| self.power_sum(word, i, &mut meter)).collect() })
    }

    pub fn encode(&self, tape: &[bool]) -> Result<Codeword, CodecError> {
        self.encode_metered(tape, &mut MeterScope::new("encode"))
    }

    pub fn encode_metered(&self, tape: &[bool], meter: &mut MeterScope) -> Result<Codeword, CodecError> {
        let data = self.pack_tape(tape)?;
        self.encode_symbols_metered(&data, meter)
    }

    pub fn encode_symbols(&self, data: &[Symbol]) -> Result<Codeword, CodecError> {
        self.encode_symbols_metered(data, &mut MeterScope::new("encode"))
    }

    /// Appends the check symbols solving the `2e × 2e` Vandermonde system
    /// `Σ_{x∈C} d_x x^i = s_i'` over the check positions `C`.
    pub fn encode_symbols_metered(&self, data: &[Symbol], meter: &mut MeterScope) -> Result<Codeword, CodecError> {
        self.check_len("data symbols", self.n_data, data.len())?;
        let w = self.r as u64;
        let init = meter.lease(2 * w + 1);
        let partials = meter.lease(self.n_checks() as u64 * w);
        let rhs: Vec<Symbol> = (1..self.delta).map(|i| self.power_sum(data, i, meter)).collect();
        let n_data = self.n_data;
        let checks = linalg::solve_vandermonde(
            &self.field,
            self.n_checks(),
            |j| self.field.exp((n_data + j) as u64 + 1),
            1,
            &rhs,
            meter,
        );
        meter.end(partials);
        meter.end(init);
        let checks = checks?;
        let mut symbols = data.to_vec();
        symbols.extend(checks);
        Ok(Codeword { params: self.clone(), symbols })
    }

    pub fn decode(&self, word: &[Symbol]) -> Result<DecodeOutcome, CodecError> {
        self.decode_metered(word, &mut MeterScope::new("decode"))
    }

    pub fn decode_metered(&self, word: &[Symbol], meter: &mut MeterScope) -> Result<DecodeOutcome, CodecError> {
        self.check_len("codeword symbols", self.n_total(), word.len())?;
        let w = self.r as u64;
        let init = meter.lease(2 * w + 1);
        let stored = meter.lease(self.n_checks() as u64 * w);
        let result = self.decode_inner(word, meter);
        meter.end(stored);
        meter.end(init);
        result
    }

    fn decode_inner(&self, word: &[Symbol], meter: &mut MeterScope) -> Result<DecodeOutcome, CodecError> {
        let ctx = &self.field;
        let w = self.r as u64;
        let syndromes: Vec<Symbol> = (1..self.delta).map(|i| self.power_sum(word, i, meter)).collect();

        let j_counter = meter.lease(bits_for(self.delta as u64) as u64);
        let mut j = self.delta - 1;
        let mut det = linalg::determinant_of(ctx, &DecodingSystem::new(&syndromes, j), meter);
        while det.is_zero() && j > 0 {
            j -= 2;
            det = if j == 0 {
                Symbol::ZERO
            } else {
                linalg::determinant_of(ctx, &DecodingSystem::new(&syndromes, j), meter)
            };
        }
        meter.end(j_counter);
        if det.is_zero() {
            return Ok(DecodeOutcome {
                codeword: Codeword { params: self.clone(), symbols: word.to_vec() },
                support: ErrorSupport::default(),
                locator_degree: 0,
                final_j: 0,
            });
        }

        let t = j / 2;
        let system = DecodingSystem::new(&syndromes, j);
        let solution = linalg::solve_cramer_of(ctx, &system, &syndromes[..j], meter)?;
        let poly_regs = meter.lease(j as u64 * w);
        let outcome = self.correct(word, &solution, t, j, meter);
        meter.end(poly_regs);
        outcome
    }

    /// Root search, error values and the post-correction syndrome check.
    fn correct(
        &self,
        word: &[Symbol],
        solution: &[Symbol],
        t: usize,
        j: usize,
        meter: &mut MeterScope,
    ) -> Result<DecodeOutcome, CodecError> {
        let ctx = &self.field;
        let w = self.r as u64;
        let mut sigma = vec![Symbol::ONE];
        sigma.extend_from_slice(&solution[..t]);
        let mut omega = vec![Symbol::ZERO];
        omega.extend_from_slice(&solution[t..]);
        let locator_degree = sigma.iter().rposition(|s| !s.is_zero()).unwrap_or(0);

        let q1 = ctx.group_order() as usize;
        let pos_bits = bits_for(self.n_total() as u64) as u64;
        let support_regs = meter.lease(t as u64 * (w + pos_bits));
        // candidate z, Horner sum, double-width product, counters
        let search_regs = meter.lease(4 * w + 2 * bits_for(2 * t as u64 + 1) as u64);

        let g = ctx.generator();
        let mut roots: Vec<(usize, Symbol)> = Vec::new();
        let mut z = Symbol::ONE;
        let mut failure = None;
        for k in 1..=q1 {
            z = ctx.mul(z, g);
            if horner(ctx, &sigma, z).is_zero() {
                if roots.len() == t {
                    failure = Some(format!("locator has more than {t} roots"));
                    break;
                }
                // z = g^k is the inverse of x = g^(pos+1)
                let pos = (2 * q1 - k - 1) % q1;
                if pos >= self.n_total() {
                    failure = Some(format!("locator root points past the word (position {pos})"));
                    break;
                }
                roots.push((pos, z));
            }
        }
        meter.end(search_regs);
        if failure.is_none() && roots.len() != locator_degree {
            failure = Some(format!("{} roots for a locator of degree {locator_degree}", roots.len()));
        }
        if let Some(msg) = failure {
            meter.end(support_regs);
            return Err(CodecError::Uncorrectable(msg));
        }

        // product, double-width multiply, inverse
        let value_regs = meter.lease(4 * w);
        let mut entries = Vec::with_capacity(roots.len());
        for &(pos, x_inv) in &roots {
            let mut prod = Symbol::ONE;
            for &(other, y_inv) in &roots {
                if other != pos {
                    let y = ctx.inverse(y_inv)?;
                    prod = ctx.mul(prod, ctx.add(Symbol::ONE, ctx.mul(y, x_inv)));
                }
            }
            let value = ctx.mul(horner(ctx, &omega, x_inv), ctx.inverse(prod)?);
            entries.push((pos, value));
        }
        meter.end(value_regs);

        let mut corrected = word.to_vec();
        for &(pos, value) in &entries {
            corrected[pos] = ctx.add(corrected[pos], value);
        }
        meter.end(support_regs);
        if entries.iter().any(|&(_, v)| v.is_zero()) {
            return Err(CodecError::Uncorrectable("zero error value at a locator root".into()));
        }
        if self.pad_bits > 0 {
            let last = corrected[self.n_data - 1].value();
            if last >> (self.r as usize - self.pad_bits) != 0 {
                return Err(CodecError::Uncorrectable("correction touches padding bits".into()));
            }
        }
        let mut check = MeterScope::new("recheck");
        if (1..self.delta).any(|i| !self.power_sum(&corrected, i, &mut check).is_zero()) {
            return Err(CodecError::Uncorrectable("syndrome nonzero after correction".into()));
        }
        entries.sort_unstable_by_key(|&(pos, _)| pos);
        Ok(DecodeOutcome {
            codeword: Codeword { params: self.clone(), symbols: corrected },
            support: ErrorSupport { entries },
            locator_degree,
            final_j: j,
        })
    }

    /// XORs the listed bits of a word; bit `b` of symbol `k` is bit
    /// `k·r + b`.
    pub fn corrupt(&self, word: &[Symbol], flips: &[usize]) -> Result<Vec<Symbol>, CodecError> {
        self.check_len("codeword symbols", self.n_total(), word.len())?;
        let len = self.codeword_bits();
        let r = self.r as usize;
        let mut out = word.to_vec();
        for (k, &pos) in flips.iter().enumerate() {
            if pos >= len {
                return Err(CodecError::FlipOutOfRange { pos, len });
            }
            if flips[..k].contains(&pos) {
                return Err(CodecError::DuplicateFlip { pos });
            }
            let s = &mut out[pos / r];
            *s = self.field.symbol((s.value() ^ (1 << (pos % r))) as u64)?;
        }
        Ok(out)
    }
}

fn horner(ctx: &FieldCtx, coeffs: &[Symbol], z: Symbol) -> Symbol {
    coeffs.iter().rev().fold(Symbol::ZERO, |acc, &c| ctx.add(ctx.mul(acc, z), c))
}

/// The decoding system with parameter `j`: row `k-1` is the coefficient of
/// `z^k` in `S(z)σ(z) + ω(z)` with `σ_0 = 1` moved to the right-hand side
/// (`s_k`). Columns are `σ_1..σ_t` then `ω_1..ω_t`.
struct DecodingSystem<'a> {
    syndromes: &'a [Symbol],
    j: usize,
}

impl<'a> DecodingSystem<'a> {
    fn new(syndromes: &'a [Symbol], j: usize) -> DecodingSystem<'a> {
        DecodingSystem { syndromes, j }
    }
}

impl SquareSource for DecodingSystem<'_> {
    fn dim(&self) -> usize {
        self.j
    }

    fn entry(&self, row: usize, col: usize) -> Symbol {
        let t = self.j / 2;
        let k = row + 1;
        if col < t {
            let m = col + 1;
            if k > m {
                self.syndromes[k - m - 1]
            } else {
                Symbol::ZERO
            }
        } else if col - t + 1 == k {
            Symbol::ONE
        } else {
            Symbol::ZERO
        }
    }
}

/// A word with all-zero syndrome: data symbols followed by check symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    params: CodecParams,
    symbols: Vec<Symbol>,
}

impl Codeword {
    pub fn params(&self) -> &CodecParams {
        &self.params
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn data(&self) -> &[Symbol] {
        &self.symbols[..self.params.n_data]
    }

    pub fn checks(&self) -> &[Symbol] {
        &self.symbols[self.params.n_data..]
    }

    pub fn tape(&self) -> Vec<bool> {
        self.params.unpack_tape(self.data()).expect("data length matches params")
    }

    /// Bits held outside the tape: check symbols plus padding.
    pub fn stored_bits(&self) -> usize {
        self.params.check_bits()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Syndrome {
    pub values: Vec<Symbol>,
}

impl Syndrome {
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|s| s.is_zero())
    }
}

/// Corrected positions and the values that were subtracted, by increasing
/// position.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ErrorSupport {
    pub entries: Vec<(usize, Symbol)>,
}

impl ErrorSupport {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(p, _)| p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub codeword: Codeword,
    pub support: ErrorSupport,
    /// Degree of the solved error locator (0 when no errors were detected).
    pub locator_degree: usize,
    /// Parameter `j` at which the decoding system became nonsingular, or 0.
    pub final_j: usize,
}
