//! Data model for n-fold integer programs.
//!
//! An n-fold program minimizes a separable convex objective over
//!
//! ```text
//! [A1 A1 ... A1]       [ b_0 ]
//! [A2  0 ...  0]       [ b_1 ]
//! [ 0 A2 ...  0] x  =  [ ... ]      l <= x <= u
//! [ 0  0 ... A2]       [ b_n ]
//! ```
//!
//! where `A1` is `r x t`, `A2` is `s x t`, and `x` splits into `n` bricks of
//! `t` consecutive coordinates.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{check_len, invalid, Result};

/// Dense integer matrix with arbitrary-precision entries, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self> {
        check_len(rows * cols, entries.len())?;
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    /// Builds a matrix from small row-major entries.
    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&v| BigInt::from(v)).collect(),
        )
    }

    /// Builds a matrix from a non-empty list of equally long rows.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            check_len(cols, row.len())?;
            entries.extend(row.iter().map(|&v| BigInt::from(v)));
        }
        Self::new(rows.len(), cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> &BigInt {
        &self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: BigInt) {
        self.entries[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[BigInt] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    /// Largest absolute entry, zero for an empty matrix.
    pub fn max_abs_entry(&self) -> BigInt {
        self.entries
            .iter()
            .map(|e| e.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn mul_vec(&self, x: &[BigInt]) -> Result<Vec<BigInt>> {
        check_len(self.cols, x.len())?;
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .filter(|(a, _)| !a.is_zero())
                    .map(|(a, v)| a * v)
                    .sum()
            })
            .collect())
    }

    /// Entries converted to `i64`, if they all fit.
    pub(crate) fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .map(|e| i64::try_from(e).ok())
                    .collect::<Option<Vec<_>>>()
            })
            .collect()
    }
}

/// `f(x) = Σ_i q_i x_i² + c_i x_i` with every `q_i >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparableQuadObjective {
    quadratic: Vec<BigRational>,
    linear: Vec<BigRational>,
}

impl SeparableQuadObjective {
    pub fn new(quadratic: Vec<BigRational>, linear: Vec<BigRational>) -> Result<Self> {
        check_len(quadratic.len(), linear.len())?;
        if let Some(i) = quadratic.iter().position(Signed::is_negative) {
            return Err(invalid(format!(
                "quadratic coefficient {i} is negative; the objective must be convex"
            )));
        }
        Ok(Self { quadratic, linear })
    }

    pub fn zero(len: usize) -> Self {
        Self {
            quadratic: vec![BigRational::zero(); len],
            linear: vec![BigRational::zero(); len],
        }
    }

    pub fn linear(linear: Vec<BigRational>) -> Self {
        Self {
            quadratic: vec![BigRational::zero(); linear.len()],
            linear,
        }
    }

    pub fn len(&self) -> usize {
        self.linear.len()
    }

    pub fn is_empty(&self) -> bool {
        self.linear.is_empty()
    }

    pub fn quadratic_coefficients(&self) -> &[BigRational] {
        &self.quadratic
    }

    pub fn linear_coefficients(&self) -> &[BigRational] {
        &self.linear
    }

    /// No quadratic terms.
    pub fn is_linear(&self) -> bool {
        self.quadratic.iter().all(Zero::is_zero)
    }

    pub fn is_zero(&self) -> bool {
        self.quadratic.iter().chain(&self.linear).all(Zero::is_zero)
    }

    /// The `i`-th summand evaluated at `v`.
    pub fn term(&self, i: usize, v: &BigInt) -> BigRational {
        let v = BigRational::from_integer(v.clone());
        &self.quadratic[i] * &v * &v + &self.linear[i] * &v
    }

    pub fn eval(&self, x: &[BigInt]) -> Result<BigRational> {
        check_len(self.len(), x.len())?;
        Ok(x.iter()
            .enumerate()
            .map(|(i, v)| self.term(i, v))
            .fold(BigRational::zero(), |acc, t| acc + t))
    }

    /// Minimum of the `i`-th summand over the integers in `[lo, hi]`.
    pub fn term_box_minimum(&self, i: usize, lo: &BigInt, hi: &BigInt) -> BigRational {
        let mut best = self.term(i, lo).min(self.term(i, hi));
        let q = &self.quadratic[i];
        if q.is_positive() {
            // vertex of q v² + c v sits at -c / 2q
            let vertex = -&self.linear[i] / (q * BigInt::from(2));
            for cand in [vertex.floor().to_integer(), vertex.ceil().to_integer()] {
                if &cand > lo && &cand < hi {
                    best = best.min(self.term(i, &cand));
                }
            }
        }
        best
    }

    /// Least common multiple of all coefficient denominators.
    pub(crate) fn common_denominator(&self) -> BigInt {
        self.quadratic
            .iter()
            .chain(&self.linear)
            .fold(BigInt::from(1), |acc, c| acc.lcm(c.denom()))
    }
}

/// Identifies a row of the full n-fold matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RowRef {
    /// One of the `r` rows of the `A1` band.
    Global(usize),
    /// Row `row` of the `A2` block belonging to `brick`.
    Local { brick: usize, row: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowViolation {
    pub row: RowRef,
    /// `b - A x` for this row.
    pub residual: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundViolation {
    pub index: usize,
    pub value: BigInt,
    pub lower: BigInt,
    pub upper: BigInt,
}

/// Everything a point violates; empty iff the point is feasible.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub rows: Vec<RowViolation>,
    pub bounds: Vec<BoundViolation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.rows.is_empty() && self.bounds.is_empty()
    }
}

/// An n-fold integer program with finite bounds and a separable convex
/// quadratic objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NFoldInstance {
    a1: IntMatrix,
    a2: IntMatrix,
    bricks: usize,
    rhs: Vec<BigInt>,
    lower: Vec<BigInt>,
    upper: Vec<BigInt>,
    objective: SeparableQuadObjective,
}

impl NFoldInstance {
    /// `rhs` holds the `r` global right-hand sides followed by `s` entries per
    /// brick. Bounds and objective are over the `n·t` brick-major coordinates.
    pub fn new(
        a1: IntMatrix,
        a2: IntMatrix,
        bricks: usize,
        rhs: Vec<BigInt>,
        lower: Vec<BigInt>,
        upper: Vec<BigInt>,
        objective: SeparableQuadObjective,
    ) -> Result<Self> {
        if a1.cols() != a2.cols() {
            return Err(invalid(format!(
                "A1 has {} columns but A2 has {}",
                a1.cols(),
                a2.cols()
            )));
        }
        if bricks == 0 {
            return Err(invalid("an n-fold program needs at least one brick"));
        }
        let dim = bricks * a1.cols();
        check_len(a1.rows() + bricks * a2.rows(), rhs.len())?;
        check_len(dim, lower.len())?;
        check_len(dim, upper.len())?;
        check_len(dim, objective.len())?;
        if let Some(i) = (0..dim).find(|&i| lower[i] > upper[i]) {
            return Err(invalid(format!(
                "lower bound {} exceeds upper bound {} at coordinate {i}",
                lower[i], upper[i]
            )));
        }
        Ok(Self {
            a1,
            a2,
            bricks,
            rhs,
            lower,
            upper,
            objective,
        })
    }

    pub fn a1(&self) -> &IntMatrix {
        &self.a1
    }

    pub fn a2(&self) -> &IntMatrix {
        &self.a2
    }

    /// Number of bricks `n`.
    pub fn bricks(&self) -> usize {
        self.bricks
    }

    /// Number of globally uniform rows `r`.
    pub fn r(&self) -> usize {
        self.a1.rows()
    }

    /// Number of locally uniform rows per brick `s`.
    pub fn s(&self) -> usize {
        self.a2.rows()
    }

    /// Brick width `t`.
    pub fn t(&self) -> usize {
        self.a1.cols()
    }

    pub fn dim(&self) -> usize {
        self.bricks * self.t()
    }

    pub fn rhs(&self) -> &[BigInt] {
        &self.rhs
    }

    pub fn global_rhs(&self) -> &[BigInt] {
        &self.rhs[..self.r()]
    }

    pub fn local_rhs(&self, brick: usize) -> &[BigInt] {
        let start = self.r() + brick * self.s();
        &self.rhs[start..start + self.s()]
    }

    pub fn lower(&self) -> &[BigInt] {
        &self.lower
    }

    pub fn upper(&self) -> &[BigInt] {
        &self.upper
    }

    pub fn objective(&self) -> &SeparableQuadObjective {
        &self.objective
    }

    /// Flat index of position `j` in brick `brick`.
    pub fn coord(&self, brick: usize, j: usize) -> usize {
        brick * self.t() + j
    }

    pub fn brick<'a, T>(&self, x: &'a [T], brick: usize) -> &'a [T] {
        &x[brick * self.t()..(brick + 1) * self.t()]
    }

    /// Largest absolute entry of `A1` and `A2` (the parameter `a`).
    pub fn max_abs_entry(&self) -> BigInt {
        self.a1.max_abs_entry().max(self.a2.max_abs_entry())
    }

    pub fn eval_objective(&self, x: &[BigInt]) -> Result<BigRational> {
        self.objective.eval(x)
    }

    /// `A^(n)·x`, global rows first.
    pub fn constraint_values(&self, x: &[BigInt]) -> Result<Vec<BigInt>> {
        check_len(self.dim(), x.len())?;
        let mut global = vec![BigInt::zero(); self.r()];
        let mut out = Vec::with_capacity(self.rhs.len());
        let mut local = Vec::with_capacity(self.bricks * self.s());
        for i in 0..self.bricks {
            let xb = self.brick(x, i);
            for (g, v) in global.iter_mut().zip(self.a1.mul_vec(xb)?) {
                *g += v;
            }
            local.extend(self.a2.mul_vec(xb)?);
        }
        out.extend(global);
        out.extend(local);
        Ok(out)
    }

    /// Lists every violated row (global rows first, then per-brick rows) and
    /// every violated bound.
    pub fn check_feasible(&self, x: &[BigInt]) -> Result<FeasibilityReport> {
        let values = self.constraint_values(x)?;
        let mut report = FeasibilityReport::default();
        for (idx, (v, b)) in values.iter().zip(&self.rhs).enumerate() {
            if v != b {
                let row = if idx < self.r() {
                    RowRef::Global(idx)
                } else {
                    let local = idx - self.r();
                    RowRef::Local {
                        brick: local / self.s(),
                        row: local % self.s(),
                    }
                };
                report.rows.push(RowViolation {
                    row,
                    residual: b - v,
                });
            }
        }
        for (i, v) in x.iter().enumerate() {
            if v < &self.lower[i] || v > &self.upper[i] {
                report.bounds.push(BoundViolation {
                    index: i,
                    value: v.clone(),
                    lower: self.lower[i].clone(),
                    upper: self.upper[i].clone(),
                });
            }
        }
        Ok(report)
    }

    /// The explicit `(r + n·s) × (n·t)` matrix. Only oracles and tests use it.
    pub fn assemble_full_matrix(&self) -> IntMatrix {
        let (r, s, t, n) = (self.r(), self.s(), self.t(), self.bricks);
        let mut m = IntMatrix::zeros(r + n * s, n * t);
        for i in 0..n {
            for j in 0..t {
                for k in 0..r {
                    m.set(k, i * t + j, self.a1.get(k, j).clone());
                }
                for k in 0..s {
                    m.set(r + i * s + k, i * t + j, self.a2.get(k, j).clone());
                }
            }
        }
        m
    }

    /// `Σ_i min_{l_i <= v <= u_i} f_i(v)`, a lower bound on the optimum.
    pub fn separable_lower_bound(&self) -> BigRational {
        (0..self.dim())
            .map(|i| {
                self.objective
                    .term_box_minimum(i, &self.lower[i], &self.upper[i])
            })
            .fold(BigRational::zero(), |acc, v| acc + v)
    }
}
