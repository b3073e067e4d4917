//! The Hamming-syndrome map `mem: {0,1}^(2^k) → {0,1}^k`.
//!
//! `mem(τ)` is the XOR of the indices `J` with `τ_J = 1`, so bit `j` of
//! `mem(τ)` is the parity of `τ` over indices whose bit `j` is set. Flipping
//! `τ_J` changes `mem` by exactly `J`; any target value is therefore one flip
//! away. Index 0 is inert: flipping it never changes `mem`.

use thiserror::Error;

/// Largest supported block exponent.
pub const MAX_K: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChessError {
    #[error("block exponent k = {0} outside 1..={MAX_K}")]
    BadK(u32),
    #[error("block of length {got} is not 2^{k} = {expected}")]
    BadLength { k: u32, expected: usize, got: usize },
    #[error("index {index} outside block of {len} bits")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("value {value:#x} does not fit in {k} bits")]
    ValueOutOfRange { value: u64, k: u32 },
    #[error("log step {step} flips index {index}, which does not change exactly one mem bit")]
    NotSingleBit { step: usize, index: usize },
    #[error("no error: parities agree")]
    NoError,
}

fn check_k(k: u32) -> Result<(), ChessError> {
    if (1..=MAX_K).contains(&k) {
        Ok(())
    } else {
        Err(ChessError::BadK(k))
    }
}

/// A `2^k`-bit block of catalytic tape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemBlock {
    k: u32,
    tau: Vec<bool>,
}

impl MemBlock {
    pub fn new(k: u32, tau: Vec<bool>) -> Result<MemBlock, ChessError> {
        check_k(k)?;
        let expected = 1usize << k;
        if tau.len() != expected {
            return Err(ChessError::BadLength { k, expected, got: tau.len() });
        }
        Ok(MemBlock { k, tau })
    }

    pub fn zeros(k: u32) -> Result<MemBlock, ChessError> {
        check_k(k)?;
        Ok(MemBlock { k, tau: vec![false; 1 << k] })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn tau(&self) -> &[bool] {
        &self.tau
    }

    pub fn into_tau(self) -> Vec<bool> {
        self.tau
    }

    /// `mem(τ)` as an integer, bit `j` weighing `2^j`. One streaming pass
    /// with a `k`-bit accumulator.
    pub fn mem(&self) -> u64 {
        mem(&self.tau)
    }

    /// `mem(τ)` as bits, LSB first.
    pub fn mem_bits(&self) -> Vec<bool> {
        let m = self.mem();
        (0..self.k).map(|j| (m >> j) & 1 == 1).collect()
    }

    pub fn flip(&mut self, index: usize) -> Result<(), ChessError> {
        let len = self.tau.len();
        let bit = self.tau.get_mut(index).ok_or(ChessError::IndexOutOfRange { index, len })?;
        *bit = !*bit;
        Ok(())
    }

    /// Makes `mem` equal `target` with at most one flip, at index
    /// `mem XOR target`. Returns the flipped index.
    pub fn steer(&mut self, target: u64) -> Result<Option<usize>, ChessError> {
        if target >> self.k != 0 {
            return Err(ChessError::ValueOutOfRange { value: target, k: self.k });
        }
        let index = (self.mem() ^ target) as usize;
        if index == 0 {
            return Ok(None);
        }
        self.tau[index] = !self.tau[index];
        Ok(Some(index))
    }
}

/// `mem` of an arbitrary bit slice (indices beyond `2^k` simply contribute
/// their own value).
pub fn mem(tau: &[bool]) -> u64 {
    tau.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .fold(0u64, |acc, (j, _)| acc ^ j as u64)
}

/// Indices flipped in order, starting from some initial block.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FlipLog {
    pub steps: Vec<usize>,
}

/// Replays `log` on a copy of `initial`. Every step must flip a power-of-two
/// index, i.e. change `mem` in exactly one bit. Returns whether "final mem
/// equals initial mem" implies "final τ equals initial τ".
pub fn verify_revert(initial: &MemBlock, log: &FlipLog) -> Result<bool, ChessError> {
    let mut block = initial.clone();
    for (step, &index) in log.steps.iter().enumerate() {
        if !index.is_power_of_two() {
            return Err(ChessError::NotSingleBit { step, index });
        }
        block.flip(index)?;
    }
    Ok(block.mem() != initial.mem() || block.tau == initial.tau)
}

/// Index of the single flipped data bit, `Σ_l (before_l ⊕ after_l)·2^l`.
pub fn locate_single_error(before: u64, after: u64) -> Result<usize, ChessError> {
    match before ^ after {
        0 => Err(ChessError::NoError),
        d => Ok(d as usize),
    }
}
