//! Workspace accounting.
//!
//! Every algorithmic register (field element, solver vector, counter, stored
//! check symbol) is allocated through a [`MeterScope`], which tracks the bits
//! currently live and the running peak, overall and per phase. Host-language
//! overhead is deliberately invisible here; only named registers count.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeterError {
    #[error("register width must be positive")]
    ZeroWidth,
    #[error("register {0} released twice or never allocated")]
    DoubleRelease(u64),
    #[error("scope `{label}` is still open")]
    ScopeOpen { label: String },
    #[error("scope `{label}` closed with {live_bits} live bits")]
    LiveAtClose { label: String, live_bits: u64 },
}

/// Handle to a live register. Released exactly once with
/// [`MeterScope::release`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Register(u64);

/// An owned register allocation; see [`MeterScope::lease`].
#[derive(Debug, PartialEq, Eq)]
#[must_use = "leases must be returned with MeterScope::end"]
pub struct Lease(Option<Register>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeterScope {
    label: String,
    live_bits: u64,
    peak_bits: u64,
    registers: BTreeMap<u64, u64>,
    next_id: u64,
    phases: Vec<(String, u64)>,
    current_phase: Option<usize>,
    closed: bool,
}

/// Peaks recorded by a closed scope.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MeterReport {
    pub label: String,
    pub peak_bits: u64,
    /// `(phase, peak bits)` in the order phases were entered.
    pub phases: Vec<(String, u64)>,
}

impl MeterReport {
    pub fn phase_peak(&self, name: &str) -> Option<u64> {
        self.phases.iter().find(|(n, _)| n == name).map(|&(_, p)| p)
    }
}

impl MeterScope {
    pub fn new(label: impl Into<String>) -> MeterScope {
        MeterScope {
            label: label.into(),
            live_bits: 0,
            peak_bits: 0,
            registers: BTreeMap::new(),
            next_id: 0,
            phases: Vec::new(),
            current_phase: None,
            closed: false,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn live_bits(&self) -> u64 {
        self.live_bits
    }

    pub fn peak_bits(&self) -> u64 {
        self.peak_bits
    }

    /// Starts (or re-enters) a named phase. The phase's peak starts at the
    /// bits live on entry, since registers carried over still occupy space.
    pub fn enter_phase(&mut self, name: &str) {
        let idx = match self.phases.iter().position(|(n, _)| n == name) {
            Some(i) => i,
            None => {
                self.phases.push((name.to_string(), 0));
                self.phases.len() - 1
            }
        };
        let live = self.live_bits;
        let peak = &mut self.phases[idx].1;
        *peak = (*peak).max(live);
        self.current_phase = Some(idx);
    }

    pub fn alloc(&mut self, width_bits: u64) -> Result<Register, MeterError> {
        if width_bits == 0 {
            return Err(MeterError::ZeroWidth);
        }
        let id = self.next_id;
        self.next_id += 1;
        self.registers.insert(id, width_bits);
        self.live_bits += width_bits;
        self.peak_bits = self.peak_bits.max(self.live_bits);
        if let Some(i) = self.current_phase {
            let peak = &mut self.phases[i].1;
            *peak = (*peak).max(self.live_bits);
        }
        Ok(Register(id))
    }

    /// Allocates `count` registers of `width_bits` each as one block.
    pub fn alloc_many(&mut self, count: u64, width_bits: u64) -> Result<Register, MeterError> {
        self.alloc(count * width_bits)
    }

    pub fn release(&mut self, reg: Register) -> Result<(), MeterError> {
        let width = self.registers.remove(&reg.0).ok_or(MeterError::DoubleRelease(reg.0))?;
        self.live_bits -= width;
        Ok(())
    }

    /// Allocates `bits` for an internal register. Zero-width leases are
    /// permitted and do not touch the accounting; the lease is consumed by
    /// [`MeterScope::end`], so it cannot be released twice.
    pub fn lease(&mut self, bits: u64) -> Lease {
        if bits == 0 {
            return Lease(None);
        }
        Lease(Some(self.alloc(bits).expect("nonzero width")))
    }

    pub fn end(&mut self, lease: Lease) {
        if let Some(reg) = lease.0 {
            self.release(reg).expect("leases are released once");
        }
    }

    /// Closes the scope. Every register must have been released.
    pub fn close(&mut self) -> Result<(), MeterError> {
        if self.live_bits != 0 {
            return Err(MeterError::LiveAtClose {
                label: self.label.clone(),
                live_bits: self.live_bits,
            });
        }
        self.current_phase = None;
        self.closed = true;
        Ok(())
    }

    pub fn report(&self) -> Result<MeterReport, MeterError> {
        if !self.closed {
            return Err(MeterError::ScopeOpen { label: self.label.clone() });
        }
        Ok(MeterReport {
            label: self.label.clone(),
            peak_bits: self.peak_bits,
            phases: self.phases.clone(),
        })
    }
}
