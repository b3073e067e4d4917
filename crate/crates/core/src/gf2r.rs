//! Arithmetic in GF(2)[ξ] and GF(2^r).
//!
//! Polynomials over GF(2) are packed into a machine word, least-significant
//! bit = constant term. A field GF(2^r) is represented by an irreducible
//! modulus of degree `r` found by exhaustive search, and every field element
//! is a polynomial of degree `< r` reduced modulo it.
//!
//! The searches here (irreducible moduli, exhaustive inversion) are the
//! small-space procedures: they hold a constant number of field-sized
//! registers and trade time for space.

use std::fmt;

use thiserror::Error;

/// Smallest supported extension degree.
pub const MIN_DEGREE: u32 = 2;
/// Largest supported extension degree; exhaustive searches are `O(2^r)`.
pub const MAX_DEGREE: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("polynomial division by zero")]
    DivisionByZero,
    #[error("zero has no multiplicative inverse")]
    NoInverse,
    #[error("extension degree {0} outside supported range {MIN_DEGREE}..={MAX_DEGREE}")]
    UnsupportedDegree(u32),
    #[error("value {value:#x} is not an element of GF(2^{r})")]
    NotAnElement { value: u64, r: u32 },
}

/// A polynomial over GF(2), coefficient `i` stored in bit `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly2(pub u64);

impl Poly2 {
    pub const ZERO: Poly2 = Poly2(0);
    pub const ONE: Poly2 = Poly2(1);
    /// The indeterminate ξ.
    pub const XI: Poly2 = Poly2(0b10);

    /// Builds a polynomial from the exponents of its nonzero terms.
    pub fn from_exponents(exps: &[u32]) -> Poly2 {
        Poly2(exps.iter().fold(0u64, |acc, &e| acc ^ (1u64 << e)))
    }

    /// Degree, or `-1` for the zero polynomial.
    pub fn degree(self) -> i32 {
        63 - self.0.leading_zeros() as i32
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn coeff(self, i: u32) -> bool {
        i < 64 && (self.0 >> i) & 1 == 1
    }

    pub fn add(self, other: Poly2) -> Poly2 {
        Poly2(self.0 ^ other.0)
    }

    /// Carry-less product. The caller keeps `deg(a) + deg(b) < 64`.
    pub fn mul(self, other: Poly2) -> Poly2 {
        debug_assert!(self.degree() + other.degree() < 64);
        let (mut a, mut b) = (self.0, other.0);
        let mut acc = 0u64;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            a <<= 1;
            b >>= 1;
        }
        Poly2(acc)
    }
}

impl fmt::Debug for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly2({self})")
    }
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for i in (0..=self.degree() as u32).rev() {
            if !self.coeff(i) {
                continue;
            }
            if !first {
                f.write_str("+")?;
            }
            first = false;
            match i {
                0 => f.write_str("1")?,
                1 => f.write_str("x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Remainder of `numerator` modulo `divisor`.
///
/// Works on a copy of the numerator, cancelling its leading coefficient with a
/// shifted divisor until the degree drops below the divisor's. Over GF(2) the
/// divisor's leading coefficient is always 1, so no inverse is needed.
pub fn poly_rem(numerator: Poly2, divisor: Poly2) -> Result<Poly2, FieldError> {
    if divisor.is_zero() {
        return Err(FieldError::DivisionByZero);
    }
    let dd = divisor.degree();
    let mut rem = numerator.0;
    loop {
        let nd = Poly2(rem).degree();
        if nd < dd {
            return Ok(Poly2(rem));
        }
        rem ^= divisor.0 << (nd - dd);
    }
}

fn check_degree(r: u32) -> Result<(), FieldError> {
    if (MIN_DEGREE..=MAX_DEGREE).contains(&r) {
        Ok(())
    } else {
        Err(FieldError::UnsupportedDegree(r))
    }
}

/// True iff `candidate` has no factor of degree `1..=deg/2`.
///
/// Tries every candidate factor in turn and tests divisibility with
/// [`poly_rem`].
pub fn is_irreducible(candidate: Poly2) -> bool {
    let d = candidate.degree();
    if d < 1 {
        return false;
    }
    for fd in 1..=(d / 2) as u32 {
        for factor in (1u64 << fd)..(1u64 << (fd + 1)) {
            if poly_rem(candidate, Poly2(factor)) == Ok(Poly2::ZERO) {
                return false;
            }
        }
    }
    true
}

/// Irreducible polynomials of degree `r` in increasing order, starting after
/// `after` (or from the smallest when `after` is `None`).
fn irreducibles_from(r: u32, after: Option<Poly2>) -> impl Iterator<Item = Poly2> {
    let lo = after.map_or(1u64 << r, |p| p.0 + 1);
    let hi = 1u64 << (r + 1);
    (lo..hi).map(Poly2).filter(|&p| is_irreducible(p))
}

/// The numerically smallest monic irreducible polynomial of degree `r`.
pub fn find_irreducible(r: u32) -> Result<Poly2, FieldError> {
    check_degree(r)?;
    Ok(irreducibles_from(r, None)
        .next()
        .expect("irreducible polynomials exist in every degree"))
}

/// An element of GF(2^r), valid under the [`FieldCtx`] that produced it.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Symbol(u32);

impl Symbol {
    pub const ZERO: Symbol = Symbol(0);
    pub const ONE: Symbol = Symbol(1);

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn poly(self) -> Poly2 {
        Poly2(self.0 as u64)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.0)
    }
}

/// A concrete GF(2^r): degree, irreducible modulus and a verified generator
/// of the multiplicative group. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldCtx {
    r: u32,
    modulus: Poly2,
    generator: Symbol,
}

impl FieldCtx {
    /// Builds GF(2^r) with generator ξ.
    ///
    /// Irreducible moduli are visited in increasing order and the first one
    /// under which ξ has full multiplicative order is kept, so for most `r`
    /// this is exactly [`find_irreducible`]. (For `r = 8` the smallest
    /// irreducible `x^8+x^4+x^3+x+1` leaves ξ with order 51 and the search
    /// moves on to `x^8+x^4+x^3+x^2+1`.)
    pub fn new(r: u32) -> Result<FieldCtx, FieldError> {
        check_degree(r)?;
        let order = (1u64 << r) - 1;
        let prime_factors = prime_factors(order);
        for modulus in irreducibles_from(r, None) {
            let ctx = FieldCtx { r, modulus, generator: Symbol(Poly2::XI.0 as u32) };
            if ctx.has_full_order(ctx.generator, order, &prime_factors) {
                return Ok(ctx);
            }
        }
        unreachable!("primitive polynomials exist in every degree")
    }

    /// Builds the field over an explicit irreducible modulus, picking the
    /// smallest symbol of full order as generator.
    pub fn with_modulus(modulus: Poly2) -> Result<FieldCtx, FieldError> {
        let d = modulus.degree();
        if d < 0 {
            return Err(FieldError::DivisionByZero);
        }
        let r = d as u32;
        check_degree(r)?;
        if !is_irreducible(modulus) {
            return Err(FieldError::NotAnElement { value: modulus.0, r });
        }
        let order = (1u64 << r) - 1;
        let factors = prime_factors(order);
        let mut ctx = FieldCtx { r, modulus, generator: Symbol(2) };
        for g in 2..=order as u32 {
            if ctx.has_full_order(Symbol(g), order, &factors) {
                ctx.generator = Symbol(g);
                return Ok(ctx);
            }
        }
        unreachable!("the multiplicative group of a finite field is cyclic")
    }

    fn has_full_order(&self, g: Symbol, order: u64, prime_factors: &[u64]) -> bool {
        g.value() > 1
            && self.pow_fast(g, order) == Symbol::ONE
            && prime_factors.iter().all(|&p| self.pow_fast(g, order / p) != Symbol::ONE)
    }

    pub fn degree(&self) -> u32 {
        self.r
    }

    pub fn modulus(&self) -> Poly2 {
        self.modulus
    }

    pub fn generator(&self) -> Symbol {
        self.generator
    }

    /// Number of elements, `2^r`.
    pub fn size(&self) -> u64 {
        1u64 << self.r
    }

    /// Order of the multiplicative group, `2^r - 1`.
    pub fn group_order(&self) -> u64 {
        self.size() - 1
    }

    pub fn symbol(&self, value: u64) -> Result<Symbol, FieldError> {
        if value < self.size() {
            Ok(Symbol(value as u32))
        } else {
            Err(FieldError::NotAnElement { value, r: self.r })
        }
    }

    /// Iterates all `2^r` symbols in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = Symbol> {
        (0..self.size() as u32).map(Symbol)
    }

    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        Symbol(a.0 ^ b.0)
    }

    /// Polynomial product reduced modulo the field's modulus.
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        let product = a.poly().mul(b.poly());
        let rem = poly_rem(product, self.modulus).expect("modulus is nonzero");
        Symbol(rem.0 as u32)
    }

    /// `a^n` by iterated multiplication: one accumulator register, `n` steps.
    pub fn pow(&self, a: Symbol, n: u64) -> Symbol {
        let mut acc = Symbol::ONE;
        for _ in 0..n {
            acc = self.mul(acc, a);
        }
        acc
    }

    /// `a^n` by square-and-multiply.
    pub fn pow_fast(&self, a: Symbol, mut n: u64) -> Symbol {
        let mut base = a;
        let mut acc = Symbol::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by trying every candidate `y` until `a·y = 1`.
    pub fn inverse_exhaustive(&self, a: Symbol) -> Result<Symbol, FieldError> {
        if a.is_zero() {
            return Err(FieldError::NoInverse);
        }
        self.elements()
            .skip(1)
            .find(|&y| self.mul(a, y) == Symbol::ONE)
            .ok_or(FieldError::NoInverse)
    }

    /// Multiplicative inverse as `a^(2^r - 2)`.
    pub fn inverse(&self, a: Symbol) -> Result<Symbol, FieldError> {
        if a.is_zero() {
            return Err(FieldError::NoInverse);
        }
        Ok(self.pow_fast(a, self.group_order() - 1))
    }

    /// `generator^k`, by square-and-multiply.
    pub fn exp(&self, k: u64) -> Symbol {
        self.pow_fast(self.generator, k % self.group_order())
    }

    /// Multiplicative order of a nonzero symbol.
    pub fn order(&self, a: Symbol) -> Result<u64, FieldError> {
        if a.is_zero() {
            return Err(FieldError::NoInverse);
        }
        let mut order = self.group_order();
        for p in prime_factors(order) {
            while order.is_multiple_of(p) && self.pow_fast(a, order / p) == Symbol::ONE {
                order /= p;
            }
        }
        Ok(order)
    }
}

/// Distinct prime factors by trial division.
fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Number of bits needed to hold values `0..n` (at least 1).
pub(crate) fn bits_for(n: u64) -> u32 {
    if n <= 1 {
        1
    } else {
        64 - (n - 1).leading_zeros()
    }
}
