//! Exact convex quadratic integer minimization in small dimension.
//!
//! The feasible set is `{x ∈ Z^d : E x = e, l <= x <= u}` and the objective is
//! a separable convex quadratic plus nonnegative multiples of squared linear
//! forms `w·(a·x)²`. The forms carry eliminated prefix-sum variables, which
//! keeps the enumeration over the original coordinates only.
//!
//! Search is depth-first with coordinates ordered by bound width, pruned by
//! equality residuals and by a convex lower bound on the unassigned part.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{check_len, invalid, Error, Result};
use crate::ilp::{IntMatrix, SeparableQuadObjective};

/// `weight · (coefficients · x)²` with `weight >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadForm {
    pub coefficients: Vec<BigInt>,
    pub weight: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallConvexIP {
    equalities: IntMatrix,
    rhs: Vec<BigInt>,
    lower: Vec<BigInt>,
    upper: Vec<BigInt>,
    objective: SeparableQuadObjective,
    forms: Vec<QuadForm>,
}

impl SmallConvexIP {
    pub fn new(
        equalities: IntMatrix,
        rhs: Vec<BigInt>,
        lower: Vec<BigInt>,
        upper: Vec<BigInt>,
        objective: SeparableQuadObjective,
        forms: Vec<QuadForm>,
    ) -> Result<Self> {
        let d = equalities.cols();
        check_len(equalities.rows(), rhs.len())?;
        check_len(d, lower.len())?;
        check_len(d, upper.len())?;
        check_len(d, objective.len())?;
        for f in &forms {
            check_len(d, f.coefficients.len())?;
            if f.weight.is_negative() {
                return Err(invalid("squared form with negative weight"));
            }
        }
        if let Some(i) = (0..d).find(|&i| lower[i] > upper[i]) {
            return Err(invalid(format!("empty bound range at coordinate {i}")));
        }
        Ok(Self {
            equalities,
            rhs,
            lower,
            upper,
            objective,
            forms,
        })
    }

    pub fn dim(&self) -> usize {
        self.equalities.cols()
    }

    pub fn equalities(&self) -> &IntMatrix {
        &self.equalities
    }

    pub fn rhs(&self) -> &[BigInt] {
        &self.rhs
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

    pub fn forms(&self) -> &[QuadForm] {
        &self.forms
    }

    pub fn eval(&self, x: &[BigInt]) -> Result<BigRational> {
        let mut v = self.objective.eval(x)?;
        for f in &self.forms {
            let lin: BigInt = f.coefficients.iter().zip(x).map(|(a, b)| a * b).sum();
            v += &f.weight * BigRational::from_integer(&lin * &lin);
        }
        Ok(v)
    }

    pub fn is_feasible(&self, x: &[BigInt]) -> Result<bool> {
        check_len(self.dim(), x.len())?;
        let inside = (0..self.dim()).all(|i| x[i] >= self.lower[i] && x[i] <= self.upper[i]);
        Ok(inside && self.equalities.mul_vec(x)? == self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedDimConfig {
    pub dimension_cap: usize,
    pub node_budget: u64,
    /// Residual and bound pruning; switching it off enumerates the full box.
    pub prune: bool,
}

impl Default for FixedDimConfig {
    fn default() -> Self {
        Self {
            dimension_cap: 24,
            node_budget: 20_000_000,
            prune: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedDimSolution {
    pub x: Vec<BigInt>,
    pub value: BigRational,
    pub nodes: u64,
}

/// Exact minimizer; `Ok(None)` means infeasible. Among optimal points the
/// lexicographically smallest is returned.
pub fn solve_small_convex_ip(
    p: &SmallConvexIP,
    cfg: &FixedDimConfig,
) -> Result<Option<FixedDimSolution>> {
    let d = p.dim();
    if d > cfg.dimension_cap {
        return Err(Error::Resource(format!(
            "dimension {d} exceeds the fixed-dimension cap of {}",
            cfg.dimension_cap
        )));
    }
    let scaled = Scaled::new(p);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by_key(|&i| &p.upper[i] - &p.lower[i]);

    let rows: Vec<&[BigInt]> = (0..p.equalities.rows())
        .map(|k| p.equalities.row(k))
        .collect();
    let range = |a: &BigInt, i: usize| {
        let (x, y) = (a * &p.lower[i], a * &p.upper[i]);
        if x <= y {
            (x, y)
        } else {
            (y, x)
        }
    };
    // suffix ranges over positions p.. of the search order
    let mut eq_rem = vec![vec![(BigInt::zero(), BigInt::zero()); rows.len()]; d + 1];
    let mut form_rem = vec![vec![(BigInt::zero(), BigInt::zero()); p.forms.len()]; d + 1];
    let mut sep_rem = vec![BigInt::zero(); d + 1];
    for pos in (0..d).rev() {
        let i = order[pos];
        for (k, row) in rows.iter().enumerate() {
            let (lo, hi) = range(&row[i], i);
            eq_rem[pos][k] = (&eq_rem[pos + 1][k].0 + lo, &eq_rem[pos + 1][k].1 + hi);
        }
        for (f, form) in p.forms.iter().enumerate() {
            let (lo, hi) = range(&form.coefficients[i], i);
            form_rem[pos][f] = (&form_rem[pos + 1][f].0 + lo, &form_rem[pos + 1][f].1 + hi);
        }
        let min = p.objective.term_box_minimum(i, &p.lower[i], &p.upper[i]) * &scaled.denom;
        sep_rem[pos] = &sep_rem[pos + 1] + min.to_integer();
    }

    let mut search = Search {
        p,
        cfg,
        scaled: &scaled,
        order: &order,
        rows: &rows,
        eq_rem: &eq_rem,
        form_rem: &form_rem,
        sep_rem: &sep_rem,
        x: p.lower.clone(),
        eq_part: vec![BigInt::zero(); rows.len()],
        form_part: vec![BigInt::zero(); p.forms.len()],
        nodes: 0,
        best: None,
    };
    search.descend(0, BigInt::zero())?;
    let nodes = search.nodes;
    Ok(search.best.map(|(value, x)| FixedDimSolution {
        x,
        value: BigRational::new(value, scaled.denom.clone()),
        nodes,
    }))
}

/// Objective scaled by the common denominator, so search runs on integers.
struct Scaled {
    denom: BigInt,
    quad: Vec<BigInt>,
    lin: Vec<BigInt>,
    weights: Vec<BigInt>,
}

impl Scaled {
    fn new(p: &SmallConvexIP) -> Self {
        let denom = p
            .forms
            .iter()
            .fold(p.objective.common_denominator(), |acc, f| {
                acc.lcm(f.weight.denom())
            });
        let scale = |c: &BigRational| (c * &denom).to_integer();
        Self {
            quad: p
                .objective
                .quadratic_coefficients()
                .iter()
                .map(scale)
                .collect(),
            lin: p
                .objective
                .linear_coefficients()
                .iter()
                .map(scale)
                .collect(),
            weights: p.forms.iter().map(|f| scale(&f.weight)).collect(),
            denom,
        }
    }

    fn term(&self, i: usize, v: &BigInt) -> BigInt {
        &self.quad[i] * v * v + &self.lin[i] * v
    }
}

fn distance_from_zero(lo: &BigInt, hi: &BigInt) -> BigInt {
    if lo.is_positive() {
        lo.clone()
    } else if hi.is_negative() {
        -hi
    } else {
        BigInt::zero()
    }
}

struct Search<'a> {
    p: &'a SmallConvexIP,
    cfg: &'a FixedDimConfig,
    scaled: &'a Scaled,
    order: &'a [usize],
    rows: &'a [&'a [BigInt]],
    eq_rem: &'a [Vec<(BigInt, BigInt)>],
    form_rem: &'a [Vec<(BigInt, BigInt)>],
    sep_rem: &'a [BigInt],
    x: Vec<BigInt>,
    eq_part: Vec<BigInt>,
    form_part: Vec<BigInt>,
    nodes: u64,
    best: Option<(BigInt, Vec<BigInt>)>,
}

impl Search<'_> {
    fn descend(&mut self, pos: usize, sep: BigInt) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.cfg.node_budget {
            return Err(Error::Resource(format!(
                "fixed-dimension enumeration exceeded {} nodes",
                self.cfg.node_budget
            )));
        }
        if self.cfg.prune && !self.can_continue(pos, &sep) {
            return Ok(());
        }
        if pos == self.order.len() {
            self.leaf(sep);
            return Ok(());
        }
        let i = self.order[pos];
        let mut v = self.p.lower[i].clone();
        while v <= self.p.upper[i] {
            for (k, row) in self.rows.iter().enumerate() {
                self.eq_part[k] += &row[i] * &v;
            }
            for (f, form) in self.p.forms.iter().enumerate() {
                self.form_part[f] += &form.coefficients[i] * &v;
            }
            self.x[i] = v.clone();
            let next = &sep + self.scaled.term(i, &v);
            self.descend(pos + 1, next)?;
            for (k, row) in self.rows.iter().enumerate() {
                self.eq_part[k] -= &row[i] * &v;
            }
            for (f, form) in self.p.forms.iter().enumerate() {
                self.form_part[f] -= &form.coefficients[i] * &v;
            }
            v += 1;
        }
        self.x[i] = self.p.lower[i].clone();
        Ok(())
    }

    fn can_continue(&self, pos: usize, sep: &BigInt) -> bool {
        for (k, rhs) in self.p.rhs.iter().enumerate() {
            let need = rhs - &self.eq_part[k];
            let (lo, hi) = &self.eq_rem[pos][k];
            if &need < lo || &need > hi {
                return false;
            }
        }
        let Some((incumbent, _)) = &self.best else {
            return true;
        };
        let mut bound = sep + &self.sep_rem[pos];
        for (f, w) in self.scaled.weights.iter().enumerate() {
            let (lo, hi) = &self.form_rem[pos][f];
            let dist = distance_from_zero(&(&self.form_part[f] + lo), &(&self.form_part[f] + hi));
            bound += w * &dist * &dist;
        }
        // ties survive so the lexicographic rule can still apply
        &bound <= incumbent
    }

    fn leaf(&mut self, sep: BigInt) {
        if self.eq_part != self.p.rhs {
            return;
        }
        let mut value = sep;
        for (f, w) in self.scaled.weights.iter().enumerate() {
            value += w * &self.form_part[f] * &self.form_part[f];
        }
        let better = match &self.best {
            None => true,
            Some((bv, bx)) => value < *bv || (value == *bv && self.x < *bx),
        };
        if better {
            self.best = Some((value, self.x.clone()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn pinned_by_equality() {
        let p = SmallConvexIP::new(
            IntMatrix::from_rows(&[vec![1]]).unwrap(),
            ints(&[3]),
            ints(&[0]),
            ints(&[5]),
            SeparableQuadObjective::new(vec![BigRational::one()], vec![BigRational::zero()])
                .unwrap(),
            vec![],
        )
        .unwrap();
        let sol = solve_small_convex_ip(&p, &FixedDimConfig::default())
            .unwrap()
            .unwrap();
        assert_eq!(sol.x, ints(&[3]));
        assert_eq!(sol.value, BigRational::from_integer(9.into()));
    }

    #[test]
    fn infeasible_returns_none() {
        let p = SmallConvexIP::new(
            IntMatrix::from_rows(&[vec![2, 2]]).unwrap(),
            ints(&[3]),
            ints(&[0, 0]),
            ints(&[5, 5]),
            SeparableQuadObjective::zero(2),
            vec![],
        )
        .unwrap();
        assert_eq!(
            solve_small_convex_ip(&p, &FixedDimConfig::default()).unwrap(),
            None
        );
    }

    #[test]
    fn squared_form_prefers_balance() {
        // minimize (x0 - x1)² subject to x0 + x1 = 4
        let p = SmallConvexIP::new(
            IntMatrix::from_rows(&[vec![1, 1]]).unwrap(),
            ints(&[4]),
            ints(&[0, 0]),
            ints(&[4, 4]),
            SeparableQuadObjective::zero(2),
            vec![QuadForm {
                coefficients: ints(&[1, -1]),
                weight: BigRational::one(),
            }],
        )
        .unwrap();
        let sol = solve_small_convex_ip(&p, &FixedDimConfig::default())
            .unwrap()
            .unwrap();
        assert_eq!(sol.x, ints(&[2, 2]));
        assert!(sol.value.is_zero());
    }

    #[test]
    fn lexicographic_tie_break() {
        // every split of 3 is optimal under a zero objective
        let p = SmallConvexIP::new(
            IntMatrix::from_rows(&[vec![1, 1]]).unwrap(),
            ints(&[3]),
            ints(&[0, 0]),
            ints(&[3, 3]),
            SeparableQuadObjective::zero(2),
            vec![],
        )
        .unwrap();
        let sol = solve_small_convex_ip(&p, &FixedDimConfig::default())
            .unwrap()
            .unwrap();
        assert_eq!(sol.x, ints(&[0, 3]));
    }

    #[test]
    fn dimension_cap_refuses() {
        let d = 30;
        let p = SmallConvexIP::new(
            IntMatrix::zeros(0, d),
            vec![],
            vec![BigInt::zero(); d],
            vec![BigInt::one(); d],
            SeparableQuadObjective::zero(d),
            vec![],
        )
        .unwrap();
        assert!(matches!(
            solve_small_convex_ip(&p, &FixedDimConfig::default()),
            Err(Error::Resource(_))
        ));
    }
}
