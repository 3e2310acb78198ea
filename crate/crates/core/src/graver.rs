//! Graver bases of small integer matrices by box enumeration.
//!
//! The Graver basis of `A` is the set of nonzero kernel vectors that are
//! minimal under the conformal order: `u ⊑ v` iff `u_i·v_i >= 0` and
//! `|u_i| <= |v_i|` for every `i`. Enumerating the kernel inside
//! `[-R, R]^t` and filtering for minimality is exact whenever `R` is at least
//! the largest entry of any Graver element.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{check_len, invalid, Error, Result};
use crate::ilp::IntMatrix;

/// Node budget used by [`graver_basis_box`].
pub const DEFAULT_NODE_BUDGET: u64 = 200_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraverBasis {
    matrix: IntMatrix,
    elements: Vec<Vec<i64>>,
    radius: u64,
}

impl GraverBasis {
    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    /// Elements in lexicographic order.
    pub fn elements(&self) -> &[Vec<i64>] {
        &self.elements
    }

    pub fn radius(&self) -> u64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

fn saturating_radius(t: usize, a: &BigInt, exponent: usize) -> u64 {
    let a = a.to_u64().unwrap_or(u64::MAX).max(1);
    let mut acc = (t as u64).max(1);
    for _ in 0..exponent {
        acc = acc.saturating_mul(a);
    }
    acc
}

/// `t·a^rows` for a standalone matrix.
pub fn default_radius(a: &IntMatrix) -> u64 {
    saturating_radius(a.cols(), &a.max_abs_entry(), a.rows())
}

/// `t·a^(r+s)` for the bimatrix `(A1, A2)`.
pub fn bimatrix_radius(a1: &IntMatrix, a2: &IntMatrix) -> u64 {
    let a = a1.max_abs_entry().max(a2.max_abs_entry());
    saturating_radius(a1.cols(), &a, a1.rows() + a2.rows())
}

/// `u ⊑ v`: sign-compatible and componentwise no larger in absolute value.
pub fn conformally_precedes(u: &[i64], v: &[i64]) -> bool {
    u.iter()
        .zip(v)
        .all(|(&a, &b)| (a == 0) || (a > 0 && b >= a) || (a < 0 && b <= a))
}

pub fn graver_basis_box(a: &IntMatrix, radius: u64) -> Result<GraverBasis> {
    graver_basis_box_with_budget(a, radius, DEFAULT_NODE_BUDGET)
}

pub fn graver_basis_box_with_budget(
    a: &IntMatrix,
    radius: u64,
    node_budget: u64,
) -> Result<GraverBasis> {
    if a.is_zero() {
        return Err(invalid("Graver basis requested for a zero matrix"));
    }
    if radius == 0 {
        return Err(invalid("enumeration radius must be positive"));
    }
    let rows = a
        .to_i64_rows()
        .ok_or_else(|| invalid("matrix entries exceed 64-bit range"))?;
    let radius_i = i64::try_from(radius)
        .ok()
        .filter(|r| r.checked_mul(2).is_some())
        .ok_or_else(|| Error::Resource(format!("radius {radius} cannot be enumerated")))?;
    let kernel = enumerate_kernel_box(&rows, a.cols(), radius_i, node_budget)?;
    let mut elements = minimal_elements(kernel);
    elements.sort();
    Ok(GraverBasis {
        matrix: a.clone(),
        elements,
        radius,
    })
}

/// All nonzero `v` in `[-radius, radius]^cols` with `A v = 0`.
fn enumerate_kernel_box(
    rows: &[Vec<i64>],
    cols: usize,
    radius: i64,
    node_budget: u64,
) -> Result<Vec<Vec<i64>>> {
    // reach[c][k]: largest |contribution| of columns c.. to row k
    let mut reach = vec![vec![0i128; rows.len()]; cols + 1];
    for c in (0..cols).rev() {
        for (k, row) in rows.iter().enumerate() {
            reach[c][k] = reach[c + 1][k] + i128::from(row[c].abs()) * i128::from(radius);
        }
    }
    let mut out = Vec::new();
    let mut v = vec![0i64; cols];
    let mut partial = vec![0i128; rows.len()];
    let mut nodes = 0u64;
    let mut search = Search {
        rows,
        reach: &reach,
        radius,
        node_budget,
    };
    search.descend(0, &mut v, &mut partial, &mut nodes, &mut out)?;
    Ok(out)
}

struct Search<'a> {
    rows: &'a [Vec<i64>],
    reach: &'a [Vec<i128>],
    radius: i64,
    node_budget: u64,
}

impl Search<'_> {
    fn descend(
        &mut self,
        c: usize,
        v: &mut [i64],
        partial: &mut [i128],
        nodes: &mut u64,
        out: &mut Vec<Vec<i64>>,
    ) -> Result<()> {
        *nodes += 1;
        if *nodes > self.node_budget {
            return Err(Error::Resource(format!(
                "kernel enumeration at radius {} exceeded {} nodes",
                self.radius, self.node_budget
            )));
        }
        if c == v.len() {
            if v.iter().any(|&e| e != 0) {
                out.push(v.to_vec());
            }
            return Ok(());
        }
        for value in -self.radius..=self.radius {
            let mut ok = true;
            for (k, row) in self.rows.iter().enumerate() {
                let p = partial[k] + i128::from(row[c]) * i128::from(value);
                if p.abs() > self.reach[c + 1][k] {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            for (k, row) in self.rows.iter().enumerate() {
                partial[k] += i128::from(row[c]) * i128::from(value);
            }
            v[c] = value;
            self.descend(c + 1, v, partial, nodes, out)?;
            for (k, row) in self.rows.iter().enumerate() {
                partial[k] -= i128::from(row[c]) * i128::from(value);
            }
        }
        v[c] = 0;
        Ok(())
    }
}

fn l1(v: &[i64]) -> i64 {
    v.iter().map(|e| e.abs()).sum()
}

/// Keeps the ⊑-minimal vectors. Anything below `v` has strictly smaller
/// 1-norm, so scanning by increasing norm sees every potential dominator
/// first.
fn minimal_elements(mut kernel: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    kernel.sort_by(|a, b| l1(a).cmp(&l1(b)).then_with(|| a.cmp(b)));
    let mut kept: Vec<Vec<i64>> = Vec::new();
    for v in kernel {
        if !kept.iter().any(|u| conformally_precedes(u, &v)) {
            kept.push(v);
        }
    }
    kept
}

/// Writes `v` as a sum of basis elements each conformal to `v`.
///
/// Returns `Ok(None)` when no decomposition exists over the given elements,
/// which means the basis is incomplete at its radius.
pub fn conformal_decompose(v: &[i64], basis: &GraverBasis) -> Result<Option<Vec<Vec<i64>>>> {
    check_len(basis.matrix.cols(), v.len())?;
    let big: Vec<BigInt> = v.iter().map(|&e| BigInt::from(e)).collect();
    if basis.matrix.mul_vec(&big)?.iter().any(|e| !e.is_zero()) {
        return Err(Error::NotInKernel);
    }
    let mut rest = v.to_vec();
    let mut parts = Vec::new();
    // Any g ⊑ rest leaves rest - g ⊑ rest in the kernel, so greedy removal
    // succeeds whenever the basis is complete.
    while rest.iter().any(|&e| e != 0) {
        let Some(g) = basis
            .elements
            .iter()
            .find(|g| conformally_precedes(g, &rest))
        else {
            return Ok(None);
        };
        for (r, e) in rest.iter_mut().zip(g) {
            *r -= e;
        }
        parts.push(g.clone());
    }
    Ok(Some(parts))
}
