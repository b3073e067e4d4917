//! Extra work space stored in catalytic blocks.
//!
//! `B` blocks of `2^k` catalytic bits each hold `k` virtual work bits: the
//! block's `mem` value. Initialization flips one bit per block to make every
//! `mem` zero; a virtual write of bit `j` flips index `2^j`; cleanup returns
//! every `mem` to zero one bit at a time. By the reversion property each block
//! then differs from its initial contents only in the initialization flip.

use crate::chessboard::{self, MAX_K};
use crate::gf2r::bits_for;
use crate::meter::MeterScope;

use super::{hamming, AuxMode, CatalyticRunner, MachineError, MachineSpec, SimulationReport, WorkTape, DEFAULT_STEP_CAP};

/// Block count and block exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub blocks: usize,
    pub k: u32,
    pub notes: Vec<String>,
}

impl Layout {
    pub fn new(blocks: usize, k: u32) -> Result<Layout, MachineError> {
        if blocks == 0 {
            return Err(MachineError::Layout("need at least one block".into()));
        }
        if !(1..=MAX_K).contains(&k) {
            return Err(MachineError::Layout(format!("block exponent {k} outside 1..={MAX_K}")));
        }
        Ok(Layout { blocks, k, notes: Vec::new() })
    }

    /// `e` blocks of `c` bits each (`c` rounded down to a power of two).
    pub fn default_for(c: usize, e: usize) -> Result<Layout, MachineError> {
        if c < 2 {
            return Err(MachineError::Layout(format!("c = {c} leaves no room for a block")));
        }
        let k = c.ilog2();
        let mut layout = Layout::new(e, k)?;
        if !c.is_power_of_two() {
            layout
                .notes
                .push(format!("c = {c} is not a power of two; blocks use 2^{k} = {} bits", 1usize << k));
        }
        Ok(layout)
    }

    /// `⌈(1+ε)e⌉` blocks of `2^⌈log2(c/(δ̂e))⌉` bits each.
    pub fn main_rev(c: usize, e: usize, eps: f64, delta_hat: u64) -> Result<Layout, MachineError> {
        if delta_hat < 2 {
            return Err(MachineError::Layout(format!("divergence parameter {delta_hat} must be at least 2")));
        }
        if eps <= 0.0 || e == 0 {
            return Err(MachineError::Layout("need eps > 0 and e >= 1".into()));
        }
        let blocks = ((1.0 + eps) * e as f64).ceil() as usize;
        let ratio = c as f64 / (delta_hat as f64 * e as f64);
        let k = ratio.log2().ceil().max(1.0) as u32;
        Layout::new(blocks, k)
    }

    /// Virtual work bits available, `B·k`.
    pub fn capacity(&self) -> usize {
        self.blocks * self.k as usize
    }

    pub fn block_len(&self) -> usize {
        1 << self.k
    }

    /// Catalytic bits taken by the blocks, `B·2^k`.
    pub fn extra_len(&self) -> usize {
        self.blocks * self.block_len()
    }
}

/// A work tape whose first `plain` bits are ordinary clean cells and whose
/// remaining bits live in block `mem` values. Virtual bit `v` is bit
/// `v mod k` of block `⌊v/k⌋`.
#[derive(Debug)]
pub struct VirtualMemory<'a> {
    plain: Vec<bool>,
    virtual_len: usize,
    k: u32,
    blocks: usize,
    region: &'a mut [bool],
    flips: u64,
}

impl<'a> VirtualMemory<'a> {
    pub fn new(plain_len: usize, virtual_len: usize, layout: &Layout, region: &'a mut [bool]) -> Result<VirtualMemory<'a>, MachineError> {
        if virtual_len > layout.capacity() {
            return Err(MachineError::Layout(format!(
                "{virtual_len} virtual bits requested but {} blocks of k = {} hold only {}",
                layout.blocks,
                layout.k,
                layout.capacity()
            )));
        }
        if region.len() != layout.extra_len() {
            return Err(MachineError::TapeLength { what: "block bits", expected: layout.extra_len(), got: region.len() });
        }
        Ok(VirtualMemory { plain: vec![false; plain_len], virtual_len, k: layout.k, blocks: layout.blocks, region, flips: 0 })
    }

    fn block(&self, i: usize) -> &[bool] {
        let n = 1usize << self.k;
        &self.region[i * n..(i + 1) * n]
    }

    pub fn mem_of(&self, i: usize) -> u64 {
        chessboard::mem(self.block(i))
    }

    fn flip(&mut self, i: usize, index: usize) {
        let n = 1usize << self.k;
        self.region[i * n + index] ^= true;
        self.flips += 1;
    }

    /// Steers every block's `mem` to zero. Returns the number of flips.
    pub fn init(&mut self) -> usize {
        let mut flips = 0;
        for i in 0..self.blocks {
            let m = self.mem_of(i) as usize;
            if m != 0 {
                self.flip(i, m);
                flips += 1;
            }
        }
        flips
    }

    /// Returns every `mem` to zero by single-bit steps.
    pub fn cleanup(&mut self) {
        for i in 0..self.blocks {
            let m = self.mem_of(i);
            for j in 0..self.k {
                if (m >> j) & 1 == 1 {
                    self.flip(i, 1 << j);
                }
            }
        }
    }

    /// Total block flips so far.
    pub fn flips(&self) -> u64 {
        self.flips
    }

    pub fn plain_len(&self) -> usize {
        self.plain.len()
    }
}

impl WorkTape for VirtualMemory<'_> {
    fn len(&self) -> usize {
        self.plain.len() + self.virtual_len
    }

    fn read(&mut self, pos: usize) -> bool {
        if pos < self.plain.len() {
            return self.plain[pos];
        }
        let v = pos - self.plain.len();
        let k = self.k as usize;
        (self.mem_of(v / k) >> (v % k)) & 1 == 1
    }

    fn write(&mut self, pos: usize, bit: bool) {
        if pos < self.plain.len() {
            self.plain[pos] = bit;
            return;
        }
        if self.read(pos) != bit {
            let v = pos - self.plain.len();
            let k = self.k as usize;
            self.flip(v / k, 1 << (v % k));
        }
    }
}

/// A clean machine whose work tape is partly stored in catalytic blocks.
/// The catalytic tape is the machine's own `c` bits followed by the blocks.
#[derive(Debug, Clone)]
pub struct MemExpanded {
    pub spec: MachineSpec,
    pub layout: Layout,
    pub plain_len: usize,
    pub step_cap: u64,
}

/// Backs all work bits beyond `plain_len` (default: as few as the layout
/// allows) by block `mem` values.
pub fn expand_space_with_errors(
    spec: MachineSpec,
    layout: Layout,
    plain_len: Option<usize>,
) -> Result<MemExpanded, MachineError> {
    let plain_len = plain_len.unwrap_or(spec.work_len.saturating_sub(layout.capacity()));
    if plain_len > spec.work_len {
        return Err(MachineError::Layout(format!(
            "{plain_len} plain bits exceed the machine's {} work bits",
            spec.work_len
        )));
    }
    let virtual_len = spec.work_len - plain_len;
    if virtual_len > layout.capacity() {
        return Err(MachineError::Layout(format!(
            "machine needs {virtual_len} virtual bits but the layout holds {}",
            layout.capacity()
        )));
    }
    Ok(MemExpanded { spec, layout, plain_len, step_cap: DEFAULT_STEP_CAP })
}

impl MemExpanded {
    pub fn with_step_cap(mut self, cap: u64) -> MemExpanded {
        self.step_cap = cap;
        self
    }

    pub fn virtual_len(&self) -> usize {
        self.spec.work_len - self.plain_len
    }
}

impl CatalyticRunner for MemExpanded {
    fn mode(&self) -> &'static str {
        "mem-expand"
    }

    fn catalytic_len(&self) -> usize {
        self.spec.cat_len + self.layout.extra_len()
    }

    fn error_budget(&self) -> usize {
        self.layout.blocks
    }

    fn aux_mode(&self) -> AuxMode {
        self.spec.aux_mode
    }

    fn run(&self, input: &[bool], tau: &[bool], aux: Option<&[bool]>) -> Result<SimulationReport, MachineError> {
        if tau.len() != self.catalytic_len() {
            return Err(MachineError::TapeLength { what: "catalytic bits", expected: self.catalytic_len(), got: tau.len() });
        }
        self.spec.check_aux(aux)?;
        let c = self.spec.cat_len;
        let mut cat = tau[..c].to_vec();
        let mut region = tau[c..].to_vec();
        let mut vm = VirtualMemory::new(self.plain_len, self.virtual_len(), &self.layout, &mut region)?;
        let mut meter = MeterScope::new("mem-expand");
        // mem accumulator (k bits plus parity) and a block/bit index
        let mem_bits = self.layout.k as u64 + 1;
        let index_bits = bits_for(self.layout.extra_len() as u64) as u64;

        meter.enter_phase("init");
        let scratch = meter.lease(mem_bits + index_bits);
        let init_flips = vm.init();
        meter.end(scratch);

        meter.enter_phase("sim");
        let plain = meter.lease(self.plain_len as u64);
        let scratch = meter.lease(mem_bits + index_bits);
        let answer = meter.lease(1);
        let result = self.spec.execute(input, aux, &mut vm, &mut cat, self.step_cap);
        meter.end(scratch);
        meter.end(plain);

        meter.enter_phase("cleanup");
        let scratch = meter.lease(mem_bits + index_bits);
        vm.cleanup();
        meter.end(scratch);
        meter.end(answer);
        let (output, steps) = result?;
        meter.close().expect("all registers released");
        drop(vm);

        let mut notes = self.layout.notes.clone();
        if init_flips < self.layout.blocks {
            notes.push(format!(
                "initialization flipped {init_flips} of {} blocks; blocks whose mem was already zero need no flip",
                self.layout.blocks
            ));
        }
        let mut final_tape = cat;
        final_tape.extend_from_slice(&region);
        Ok(SimulationReport {
            mode: self.mode().into(),
            output,
            steps,
            catalytic_len: tau.len(),
            hamming_distance: hamming(&final_tape, tau),
            error_budget: self.layout.blocks,
            meter: meter.report().expect("closed"),
            final_tape,
            support: Vec::new(),
            init_flips: Some(init_flips),
            peak_num_start: None,
            notes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::programs;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn layouts() {
        let d = Layout::default_for(1024, 4).unwrap();
        assert_eq!((d.blocks, d.k, d.capacity(), d.extra_len()), (4, 10, 40, 4096));
        assert!(d.notes.is_empty());
        let odd = Layout::default_for(1000, 2).unwrap();
        assert_eq!(odd.k, 9);
        assert_eq!(odd.notes.len(), 1);
        let m = Layout::main_rev(1 << 12, 2, 0.5, 4).unwrap();
        assert_eq!((m.blocks, m.k), (3, 9));
        assert!(Layout::main_rev(1024, 2, 0.5, 1).is_err());
        assert!(Layout::new(0, 3).is_err());
    }

    #[test]
    fn virtual_memory_matches_array() {
        let layout = Layout::new(3, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut region: Vec<bool> = (0..layout.extra_len()).map(|_| rng.random()).collect();
        let original = region.clone();
        let mut vm = VirtualMemory::new(2, 15, &layout, &mut region).unwrap();
        let flips = vm.init();
        let mut oracle = [false; 17];
        for _ in 0..2000 {
            let pos = rng.random_range(0..17);
            if rng.random() {
                let bit = rng.random();
                vm.write(pos, bit);
                oracle[pos] = bit;
            } else {
                assert_eq!(vm.read(pos), oracle[pos]);
            }
        }
        vm.cleanup();
        drop(vm);
        assert_eq!(hamming(&region, &original), flips);
        assert!(flips <= 3);
    }

    #[test]
    fn too_small_layout_is_rejected() {
        let spec = programs::copy_parity(12, 16);
        let layout = Layout::new(1, 4).unwrap();
        assert!(matches!(expand_space_with_errors(spec.clone(), layout.clone(), Some(0)), Err(MachineError::Layout(_))));
        assert!(expand_space_with_errors(spec, layout, None).is_ok());
    }

    #[test]
    fn expanded_machine_keeps_its_answer() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let spec = programs::copy_parity(16, 16);
        let runner = expand_space_with_errors(spec.clone(), Layout::default_for(16, 4).unwrap(), Some(0)).unwrap();
        assert_eq!(runner.catalytic_len(), 5 * 16);
        for _ in 0..50 {
            let tau: Vec<bool> = (0..runner.catalytic_len()).map(|_| rng.random()).collect();
            let rep = runner.run(&[], &tau, None).unwrap();
            let direct = super::super::run(&spec, &[], &tau[..16], None, 10_000).unwrap();
            assert_eq!(rep.output, direct.output);
            assert_eq!(rep.final_tape[..16], tau[..16]);
            assert_eq!(rep.hamming_distance, rep.init_flips.unwrap());
            assert!(rep.hamming_distance <= 4);
        }
    }
}
