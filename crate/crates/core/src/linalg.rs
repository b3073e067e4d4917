//! Determinants and square linear systems over GF(2^r).
//!
//! The determinant is computed with Berkowitz's division-free recurrence,
//! reading matrix entries on demand through [`SquareSource`]. It keeps five
//! vectors of length at most `t + 1`, so a system whose entries can be
//! recomputed (syndromes, powers of positions) is solved in `O(t)` field
//! registers. Cramer's rule turns determinants into solutions one unknown at a
//! time. Gaussian elimination is kept as a second, independent route.

use thiserror::Error;

use crate::gf2r::{bits_for, FieldCtx, FieldError, Symbol};
use crate::meter::MeterScope;

/// Largest supported square dimension.
pub const MAX_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("dimension {0} exceeds {MAX_DIM}")]
    TooLarge(usize),
    #[error("singular system")]
    Singular,
    #[error("duplicate Vandermonde node {0:?}")]
    DuplicateNode(Symbol),
    #[error("zero Vandermonde node")]
    ZeroNode,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A dense row-major matrix of symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<Symbol>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Symbol>) -> Result<Matrix, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Matrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, entries: vec![Symbol::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Matrix {
        Matrix::from_fn(n, n, |i, j| if i == j { Symbol::ONE } else { Symbol::ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Symbol) -> Matrix {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Matrix { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Symbol {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Symbol) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Symbol] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, ctx: &FieldCtx, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(Symbol::ZERO, |acc, k| {
                ctx.add(acc, ctx.mul(self.get(i, k), other.get(k, j)))
            })
        }))
    }

    pub fn mul_vec(&self, ctx: &FieldCtx, x: &[Symbol]) -> Result<Vec<Symbol>, LinalgError> {
        if self.cols != x.len() {
            return Err(LinalgError::Shape(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(Symbol::ZERO, |acc, (&a, &b)| ctx.add(acc, ctx.mul(a, b)))
            })
            .collect())
    }
}

/// A square matrix whose entries are produced on demand.
pub trait SquareSource {
    fn dim(&self) -> usize;
    fn entry(&self, i: usize, j: usize) -> Symbol;
}

impl SquareSource for Matrix {
    fn dim(&self) -> usize {
        self.rows
    }

    fn entry(&self, i: usize, j: usize) -> Symbol {
        self.get(i, j)
    }
}

/// `src` with column `col` replaced by `b`, as used by Cramer's rule.
pub struct ColumnReplaced<'a, S: ?Sized> {
    pub src: &'a S,
    pub col: usize,
    pub b: &'a [Symbol],
}

impl<S: SquareSource + ?Sized> SquareSource for ColumnReplaced<'_, S> {
    fn dim(&self) -> usize {
        self.src.dim()
    }

    fn entry(&self, i: usize, j: usize) -> Symbol {
        if j == self.col {
            self.b[i]
        } else {
            self.src.entry(i, j)
        }
    }
}

/// A square linear system `a·x = b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinSystem {
    pub a: Matrix,
    pub b: Vec<Symbol>,
}

impl LinSystem {
    pub fn new(a: Matrix, b: Vec<Symbol>) -> Result<LinSystem, LinalgError> {
        if a.rows != a.cols || a.rows != b.len() {
            return Err(LinalgError::Shape(format!(
                "{}x{} system with {} right-hand sides",
                a.rows,
                a.cols,
                b.len()
            )));
        }
        Ok(LinSystem { a, b })
    }
}

fn check_square(m: &Matrix) -> Result<(), LinalgError> {
    if m.rows != m.cols {
        return Err(LinalgError::Shape(format!("{}x{} is not square", m.rows, m.cols)));
    }
    if m.rows > MAX_DIM {
        return Err(LinalgError::TooLarge(m.rows));
    }
    Ok(())
}

pub fn determinant(ctx: &FieldCtx, m: &Matrix) -> Result<Symbol, LinalgError> {
    check_square(m)?;
    Ok(determinant_of(ctx, m, &mut MeterScope::new("determinant")))
}

/// Berkowitz determinant of an implicit square matrix.
///
/// For `k = 1..=n` the characteristic polynomial of the leading `k×k` block
/// is obtained from that of the leading `(k-1)×(k-1)` block by a Toeplitz
/// product whose first column is `(1, a_kk, R·C, R·A·C, ..)`. In
/// characteristic 2 every sign vanishes and the determinant is the constant
/// coefficient.
pub fn determinant_of<S: SquareSource + ?Sized>(ctx: &FieldCtx, src: &S, meter: &mut MeterScope) -> Symbol {
    let n = src.dim();
    if n == 0 {
        return Symbol::ONE;
    }
    let w = ctx.degree() as u64;
    let nn = n as u64;
    let regs = meter.lease((3 * (nn + 1) + 2 * (nn - 1) + 1) * w);
    let counters = meter.lease(3 * bits_for(nn + 1) as u64);

    // Coefficients of the characteristic polynomial, leading term first.
    let mut poly = vec![Symbol::ZERO; n + 1];
    let mut next = vec![Symbol::ZERO; n + 1];
    let mut col = vec![Symbol::ZERO; n + 1];
    let mut v = vec![Symbol::ZERO; n.saturating_sub(1)];
    let mut tmp = vec![Symbol::ZERO; n.saturating_sub(1)];
    poly[0] = Symbol::ONE;

    for k in 1..=n {
        let last = k - 1;
        col[0] = Symbol::ONE;
        col[1] = src.entry(last, last);
        for (i, vi) in v.iter_mut().enumerate().take(last) {
            *vi = src.entry(i, last);
        }
        for m in 2..=k {
            let dot = (0..last).fold(Symbol::ZERO, |acc, i| {
                ctx.add(acc, ctx.mul(src.entry(last, i), v[i]))
            });
            col[m] = dot;
            if m < k {
                for (i, ti) in tmp.iter_mut().enumerate().take(last) {
                    *ti = (0..last).fold(Symbol::ZERO, |acc, j| {
                        ctx.add(acc, ctx.mul(src.entry(i, j), v[j]))
                    });
                }
                v[..last].copy_from_slice(&tmp[..last]);
            }
        }
        for i in 0..=k {
            let hi = i.min(k - 1);
            next[i] = (0..=hi).fold(Symbol::ZERO, |acc, j| ctx.add(acc, ctx.mul(col[i - j], poly[j])));
        }
        poly[..=k].copy_from_slice(&next[..=k]);
    }

    meter.end(counters);
    meter.end(regs);
    poly[n]
}

/// Determinant by Gaussian elimination with row pivoting. Row swaps do not
/// change the sign in characteristic 2.
pub fn determinant_by_elimination(ctx: &FieldCtx, m: &Matrix) -> Result<Symbol, LinalgError> {
    check_square(m)?;
    let n = m.rows;
    let mut a = m.clone();
    let mut det = Symbol::ONE;
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a.get(i, c).is_zero()) else {
            return Ok(Symbol::ZERO);
        };
        if p != c {
            for j in 0..n {
                let (x, y) = (a.get(p, j), a.get(c, j));
                a.set(p, j, y);
                a.set(c, j, x);
            }
        }
        let pivot = a.get(c, c);
        det = ctx.mul(det, pivot);
        let inv = ctx.inverse(pivot)?;
        for i in c + 1..n {
            let f = ctx.mul(a.get(i, c), inv);
            if f.is_zero() {
                continue;
            }
            for j in c..n {
                let v = ctx.add(a.get(i, j), ctx.mul(f, a.get(c, j)));
                a.set(i, j, v);
            }
        }
    }
    Ok(det)
}

pub fn solve_cramer(ctx: &FieldCtx, sys: &LinSystem) -> Result<Vec<Symbol>, LinalgError> {
    check_square(&sys.a)?;
    solve_cramer_of(ctx, &sys.a, &sys.b, &mut MeterScope::new("solve"))
}

/// Cramer's rule over an implicit matrix: `x_i = det(A_i) / det(A)` where
/// `A_i` has column `i` replaced by `b`.
pub fn solve_cramer_of<S: SquareSource + ?Sized>(
    ctx: &FieldCtx,
    a: &S,
    b: &[Symbol],
    meter: &mut MeterScope,
) -> Result<Vec<Symbol>, LinalgError> {
    let n = a.dim();
    if b.len() != n {
        return Err(LinalgError::Shape(format!("{n}x{n} system with {} right-hand sides", b.len())));
    }
    if n > MAX_DIM {
        return Err(LinalgError::TooLarge(n));
    }
    let w = ctx.degree() as u64;
    let solution = meter.lease(n as u64 * w);
    let scalars = meter.lease(2 * w);
    let det = determinant_of(ctx, a, meter);
    let result = if det.is_zero() {
        Err(LinalgError::Singular)
    } else {
        let inv = ctx.inverse(det)?;
        Ok((0..n)
            .map(|col| ctx.mul(determinant_of(ctx, &ColumnReplaced { src: a, col, b }, meter), inv))
            .collect())
    };
    meter.end(scalars);
    meter.end(solution);
    result
}

fn check_nodes(nodes: &[Symbol]) -> Result<(), LinalgError> {
    for (j, &x) in nodes.iter().enumerate() {
        if x.is_zero() {
            return Err(LinalgError::ZeroNode);
        }
        if nodes[..j].contains(&x) {
            return Err(LinalgError::DuplicateNode(x));
        }
    }
    Ok(())
}

/// The `t×t` matrix with entry `(i, j) = nodes[j]^(i0 + i)`.
pub fn vandermonde(ctx: &FieldCtx, nodes: &[Symbol], i0: u64, t: usize) -> Result<Matrix, LinalgError> {
    if nodes.len() != t {
        return Err(LinalgError::Shape(format!("{} nodes for a {t}x{t} matrix", nodes.len())));
    }
    check_nodes(nodes)?;
    Ok(Matrix::from_fn(t, t, |i, j| ctx.pow_fast(nodes[j], i0 + i as u64)))
}

/// Solves `Σ_j d_j · x_j^(i0+i) = b_i` for `i = 0..t`, where `x_j = node(j)`.
///
/// Uses the explicit inverse of the Vandermonde matrix. With
/// `P(z) = Π_k (z + x_k)` and `Q_j(z) = P(z) / (z + x_j)`,
/// `d_j · x_j^i0 = (Σ_m q_{j,m} b_m) / Q_j(x_j)`. `P` is held in `t + 1`
/// registers, and each `Q_j` is streamed by synthetic division from the top
/// coefficient down while the numerator and `Q_j(x_j)` are accumulated.
pub fn solve_vandermonde(
    ctx: &FieldCtx,
    t: usize,
    node: impl Fn(usize) -> Symbol,
    i0: u64,
    b: &[Symbol],
    meter: &mut MeterScope,
) -> Result<Vec<Symbol>, LinalgError> {
    if b.len() != t {
        return Err(LinalgError::Shape(format!("{t} nodes with {} right-hand sides", b.len())));
    }
    let w = ctx.degree() as u64;
    let p_reg = meter.lease((t as u64 + 1) * w);
    let solution = meter.lease(t as u64 * w);
    // x_j, q, numerator, Horner accumulator, x_j^i0
    let scalars = meter.lease(5 * w);
    let counters = meter.lease(2 * bits_for(t as u64 + 1) as u64);

    let mut p = vec![Symbol::ZERO; t + 1];
    p[0] = Symbol::ONE;
    for k in 0..t {
        let x = node(k);
        // multiply by (z + x); p[m] is the coefficient of z^m
        for m in (0..=k + 1).rev() {
            let shifted = if m > 0 { p[m - 1] } else { Symbol::ZERO };
            p[m] = ctx.add(shifted, ctx.mul(x, p[m]));
        }
    }

    let mut out = Vec::with_capacity(t);
    let mut failure = None;
    for j in 0..t {
        let x = node(j);
        if x.is_zero() {
            failure = Some(LinalgError::ZeroNode);
            break;
        }
        let mut q = p[t];
        let mut num = ctx.mul(b[t - 1], q);
        let mut horner = q;
        for m in (1..t).rev() {
            q = ctx.add(p[m], ctx.mul(x, q));
            num = ctx.add(num, ctx.mul(b[m - 1], q));
            horner = ctx.add(ctx.mul(horner, x), q);
        }
        if horner.is_zero() {
            failure = Some(LinalgError::DuplicateNode(x));
            break;
        }
        let denom = ctx.mul(horner, ctx.pow(x, i0));
        out.push(ctx.mul(num, ctx.inverse(denom)?));
    }

    meter.end(counters);
    meter.end(scalars);
    meter.end(solution);
    meter.end(p_reg);
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use proptest::test_runner::{Config, TestRunner};

    fn field(r: u32) -> FieldCtx {
        FieldCtx::new(r).unwrap()
    }

    fn sym(ctx: &FieldCtx, v: u64) -> Symbol {
        ctx.symbol(v).unwrap()
    }

    /// Laplace expansion along the first row.
    fn cofactor_det(ctx: &FieldCtx, m: &Matrix) -> Symbol {
        let n = m.rows();
        if n == 0 {
            return Symbol::ONE;
        }
        let mut acc = Symbol::ZERO;
        for j in 0..n {
            let minor = Matrix::from_fn(n - 1, n - 1, |a, b| m.get(a + 1, if b < j { b } else { b + 1 }));
            acc = ctx.add(acc, ctx.mul(m.get(0, j), cofactor_det(ctx, &minor)));
        }
        acc
    }

    fn matrix_strategy(r: u32, n: usize) -> impl Strategy<Value = Vec<u32>> {
        prop::collection::vec(0u32..(1 << r), n * n)
    }

    fn to_matrix(ctx: &FieldCtx, n: usize, vals: &[u32]) -> Matrix {
        Matrix::new(n, n, vals.iter().map(|&v| sym(ctx, v as u64)).collect()).unwrap()
    }

    #[test]
    fn identity_and_duplicate_rows() {
        let ctx = field(4);
        for n in 0..6 {
            assert_eq!(determinant(&ctx, &Matrix::identity(n)).unwrap(), Symbol::ONE);
        }
        let mut m = Matrix::from_fn(4, 4, |i, j| sym(&ctx, ((3 * i + 5 * j + 1) % 16) as u64));
        for j in 0..4 {
            let v = m.get(0, j);
            m.set(2, j, v);
        }
        assert_eq!(determinant(&ctx, &m).unwrap(), Symbol::ZERO);
    }

    #[test]
    fn non_square_is_a_shape_error() {
        let ctx = field(3);
        assert!(matches!(determinant(&ctx, &Matrix::zeros(2, 3)), Err(LinalgError::Shape(_))));
        assert!(matches!(determinant(&ctx, &Matrix::zeros(65, 65)), Err(LinalgError::TooLarge(65))));
    }

    #[test]
    fn small_vandermonde_matches_cofactor_oracle() {
        let ctx = field(3);
        let g = ctx.generator();
        let nodes = [g, ctx.mul(g, g)];
        let v = vandermonde(&ctx, &nodes, 1, 2).unwrap();
        assert_eq!(v.row(0), &[g, ctx.pow(g, 2)]);
        assert_eq!(v.row(1), &[ctx.pow(g, 2), ctx.pow(g, 4)]);
        let det = determinant(&ctx, &v).unwrap();
        assert_eq!(det, cofactor_det(&ctx, &v));
        assert!(!det.is_zero());
        // g·g^4 + g^2·g^2 = g^5 + g^4 under x^3+x+1
        assert_eq!(det, ctx.add(ctx.pow(g, 5), ctx.pow(g, 4)));
    }

    #[test]
    fn single_node_vandermonde() {
        let ctx = field(3);
        let g = ctx.generator();
        assert_eq!(vandermonde(&ctx, &[g], 1, 1).unwrap().row(0), &[g]);
        assert_eq!(
            vandermonde(&ctx, &[g, g], 1, 2),
            Err(LinalgError::DuplicateNode(g))
        );
        assert_eq!(vandermonde(&ctx, &[Symbol::ZERO], 1, 1), Err(LinalgError::ZeroNode));
    }

    #[test]
    fn determinant_routes_agree_with_cofactor_for_small_t() {
        for r in [2, 3, 4, 8] {
            let ctx = field(r);
            for n in 1..=5 {
                let mut runner = TestRunner::new(Config { cases: 200, ..Config::default() });
                runner
                    .run(&matrix_strategy(r, n), |vals| {
                        let m = to_matrix(&ctx, n, &vals);
                        let oracle = cofactor_det(&ctx, &m);
                        prop_assert_eq!(determinant(&ctx, &m).unwrap(), oracle);
                        prop_assert_eq!(determinant_by_elimination(&ctx, &m).unwrap(), oracle);
                        Ok(())
                    })
                    .unwrap();
            }
        }
    }

    #[test]
    fn determinant_is_multiplicative() {
        let ctx = field(8);
        let mut runner = TestRunner::new(Config { cases: 1000, ..Config::default() });
        runner
            .run(&(matrix_strategy(8, 3), matrix_strategy(8, 3)), |(a, b)| {
                let a = to_matrix(&ctx, 3, &a);
                let b = to_matrix(&ctx, 3, &b);
                let ab = a.mul(&ctx, &b).unwrap();
                prop_assert_eq!(
                    determinant(&ctx, &ab).unwrap(),
                    ctx.mul(determinant(&ctx, &a).unwrap(), determinant(&ctx, &b).unwrap())
                );
                Ok(())
            })
            .unwrap();
    }

    #[test]
    fn identity_solve_and_homogeneous_solve() {
        let ctx = field(4);
        let b: Vec<Symbol> = (1..=5).map(|v| sym(&ctx, v)).collect();
        let sys = LinSystem::new(Matrix::identity(5), b.clone()).unwrap();
        assert_eq!(solve_cramer(&ctx, &sys).unwrap(), b);
        let g = ctx.generator();
        let nodes: Vec<Symbol> = (1..=4).map(|k| ctx.pow(g, k)).collect();
        let v = vandermonde(&ctx, &nodes, 1, 4).unwrap();
        let sys = LinSystem::new(v, vec![Symbol::ZERO; 4]).unwrap();
        assert_eq!(solve_cramer(&ctx, &sys).unwrap(), vec![Symbol::ZERO; 4]);
    }

    #[test]
    fn singular_system_is_signalled() {
        let ctx = field(4);
        let sys = LinSystem::new(Matrix::zeros(3, 3), vec![Symbol::ONE; 3]).unwrap();
        assert_eq!(solve_cramer(&ctx, &sys), Err(LinalgError::Singular));
        assert!(LinSystem::new(Matrix::zeros(3, 3), vec![Symbol::ONE; 2]).is_err());
    }

    #[test]
    fn cramer_solutions_remultiply_to_b() {
        for n in 1..=8 {
            let ctx = field(4);
            let mut runner = TestRunner::new(Config { cases: 1000, ..Config::default() });
            let strat = (matrix_strategy(4, n), prop::collection::vec(0u32..16, n));
            runner
                .run(&strat, |(a, b)| {
                    let a = to_matrix(&ctx, n, &a);
                    prop_assume!(!determinant(&ctx, &a).unwrap().is_zero());
                    let b: Vec<Symbol> = b.iter().map(|&v| sym(&ctx, v as u64)).collect();
                    let x = solve_cramer(&ctx, &LinSystem::new(a.clone(), b.clone()).unwrap()).unwrap();
                    prop_assert_eq!(a.mul_vec(&ctx, &x).unwrap(), b);
                    Ok(())
                })
                .unwrap();
        }
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        if n < k {
            return vec![];
        }
        let mut out = subsets(n - 1, k);
        for mut s in subsets(n - 1, k - 1) {
            s.push(n - 1);
            out.push(s);
        }
        out
    }

    #[test]
    fn vandermonde_nonsingular_on_all_small_subsets() {
        let ctx = field(4);
        let nonzero: Vec<Symbol> = ctx.elements().skip(1).collect();
        for k in 1..=6 {
            for s in subsets(nonzero.len(), k) {
                let nodes: Vec<Symbol> = s.iter().map(|&i| nonzero[i]).collect();
                let v = vandermonde(&ctx, &nodes, 1, k).unwrap();
                assert!(!determinant(&ctx, &v).unwrap().is_zero(), "{nodes:?}");
            }
        }
    }

    #[test]
    fn streaming_vandermonde_matches_cramer() {
        let ctx = field(8);
        let g = ctx.generator();
        let mut runner = TestRunner::new(Config { cases: 300, ..Config::default() });
        let strat = (1usize..=8, 0u64..200, 0u64..3, prop::collection::vec(0u32..256, 8));
        runner
            .run(&strat, |(t, start, i0, b)| {
                let nodes: Vec<Symbol> = (0..t).map(|k| ctx.exp(start + 7 * k as u64 + 1)).collect();
                let b: Vec<Symbol> = b[..t].iter().map(|&v| sym(&ctx, v as u64)).collect();
                let mut meter = MeterScope::new("v");
                let fast = solve_vandermonde(&ctx, t, |k| nodes[k], i0, &b, &mut meter).unwrap();
                let v = vandermonde(&ctx, &nodes, i0, t).unwrap();
                let slow = solve_cramer(&ctx, &LinSystem::new(v.clone(), b.clone()).unwrap()).unwrap();
                prop_assert_eq!(&fast, &slow);
                prop_assert_eq!(v.mul_vec(&ctx, &fast).unwrap(), b);
                prop_assert_eq!(meter.live_bits(), 0);
                Ok(())
            })
            .unwrap();
        let mut meter = MeterScope::new("v");
        let dup = solve_vandermonde(&ctx, 2, |_| g, 1, &[Symbol::ONE, Symbol::ONE], &mut meter);
        assert_eq!(dup, Err(LinalgError::DuplicateNode(g)));
    }

    #[test]
    fn berkowitz_workspace_is_linear_in_dimension() {
        let ctx = field(8);
        let mut peaks = Vec::new();
        for n in [4usize, 8, 16, 32] {
            let m = Matrix::identity(n);
            let mut meter = MeterScope::new("det");
            determinant_of(&ctx, &m, &mut meter);
            peaks.push(meter.peak_bits());
        }
        for w in peaks.windows(2) {
            assert!(w[1] < 2 * w[0] + 64, "{peaks:?}");
        }
    }
}
