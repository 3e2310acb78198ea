//! Exhaustive reference solvers used to certify the main solvers.
//!
//! Nothing here is clever: boxes are enumerated point by point and schedules
//! split by type-count compositions. Each oracle refuses work beyond its
//! budget instead of answering slowly.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{check_len, invalid, Error, Result};
use crate::ilp::{IntMatrix, NFoldInstance, SeparableQuadObjective};
use crate::scheduling::{smith_order, BinPackingInstance, Job, ProblemKind, SchedulingInstance};

/// Default number of points or leaves an oracle may visit.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

fn small(v: &BigInt) -> Result<i64> {
    v.to_i64()
        .ok_or_else(|| Error::Resource(format!("oracle value {v} exceeds 64 bits")))
}

/// Lexicographically smallest minimizer over `{x : A x = b, l <= x <= u}`,
/// or `None` when the box holds no feasible point.
pub fn brute_solve_ip(
    a: &IntMatrix,
    b: &[BigInt],
    lower: &[BigInt],
    upper: &[BigInt],
    objective: &SeparableQuadObjective,
    budget: u64,
) -> Result<Option<(Vec<BigInt>, BigRational)>> {
    let d = a.cols();
    check_len(a.rows(), b.len())?;
    check_len(d, lower.len())?;
    check_len(d, upper.len())?;
    check_len(d, objective.len())?;
    let mut points: u128 = 1;
    for (l, u) in lower.iter().zip(upper) {
        if l > u {
            return Ok(None);
        }
        let width = (u - l + 1u32).to_u128().unwrap_or(u128::MAX);
        points = points.saturating_mul(width);
    }
    if points > u128::from(budget) {
        return Err(Error::Resource(format!(
            "box has {points} points, above the oracle budget of {budget}"
        )));
    }
    let rows = a
        .to_i64_rows()
        .ok_or_else(|| Error::Resource("matrix entries exceed 64 bits".into()))?;
    let lo: Vec<i64> = lower.iter().map(small).collect::<Result<_>>()?;
    let hi: Vec<i64> = upper.iter().map(small).collect::<Result<_>>()?;
    let rhs: Vec<i128> = b
        .iter()
        .map(|v| small(v).map(i128::from))
        .collect::<Result<_>>()?;

    let mut x = lo.clone();
    let mut ax: Vec<i128> = rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(&x)
                .map(|(&c, &v)| i128::from(c) * i128::from(v))
                .sum()
        })
        .collect();
    let mut best: Option<(BigRational, Vec<i64>)> = None;
    loop {
        if ax == rhs {
            let point: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
            let value = objective.eval(&point)?;
            // enumeration runs in lexicographic order, so only strict gains replace
            if best.as_ref().is_none_or(|(bv, _)| value < *bv) {
                best = Some((value, x.clone()));
            }
        }
        // odometer step, last coordinate fastest
        let mut c = d;
        loop {
            if c == 0 {
                return Ok(best.map(|(v, x)| (x.into_iter().map(BigInt::from).collect(), v)));
            }
            c -= 1;
            if x[c] < hi[c] {
                x[c] += 1;
                for (k, row) in rows.iter().enumerate() {
                    ax[k] += i128::from(row[c]);
                }
                break;
            }
            let span = i128::from(x[c] - lo[c]);
            for (k, row) in rows.iter().enumerate() {
                ax[k] -= i128::from(row[c]) * span;
            }
            x[c] = lo[c];
        }
    }
}

/// [`brute_solve_ip`] on the assembled matrix of an n-fold program.
pub fn brute_solve_nfold(
    inst: &NFoldInstance,
    budget: u64,
) -> Result<Option<(Vec<BigInt>, BigRational)>> {
    brute_solve_ip(
        &inst.assemble_full_matrix(),
        inst.rhs(),
        inst.lower(),
        inst.upper(),
        inst.objective(),
        budget,
    )
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Every split of every type's jobs over the machines that accept it.
struct Splits {
    allowed: Vec<Vec<usize>>,
    counts: Vec<Vec<u64>>,
    mults: Vec<u64>,
}

impl Splits {
    fn new(inst: &SchedulingInstance, budget: u64) -> Result<Self> {
        let mults: Vec<u64> = inst
            .job_types()
            .iter()
            .map(|ty| {
                ty.multiplicity
                    .to_u64()
                    .ok_or_else(|| Error::Resource("multiplicity exceeds 64 bits".into()))
            })
            .collect::<Result<_>>()?;
        let allowed: Vec<Vec<usize>> = inst
            .job_types()
            .iter()
            .map(|ty| {
                (0..inst.machine_count())
                    .filter(|&i| ty.on(inst.machines()[i].kind).is_some())
                    .collect()
            })
            .collect();
        let mut leaves: u128 = 1;
        for (n, machines) in mults.iter().zip(&allowed) {
            if *n > 0 && !machines.is_empty() {
                let n = u128::from(*n);
                let m = machines.len() as u128;
                leaves = leaves.saturating_mul(binomial(n + m - 1, m - 1));
            }
        }
        if leaves > u128::from(budget) {
            return Err(Error::Resource(format!(
                "{leaves} splits exceed the oracle budget of {budget}"
            )));
        }
        let counts = vec![vec![0; inst.machine_count()]; inst.type_count()];
        Ok(Self {
            allowed,
            counts,
            mults,
        })
    }

    fn schedulable(&self) -> bool {
        self.mults
            .iter()
            .zip(&self.allowed)
            .all(|(&n, machines)| n == 0 || !machines.is_empty())
    }

    fn visit(&mut self, leaf: &mut dyn FnMut(&[Vec<u64>])) {
        self.place(0, 0, self.mults.first().copied().unwrap_or(0), leaf);
    }

    /// Places the remaining `left` jobs of type `j` from allowed slot `slot` on.
    fn place(&mut self, j: usize, slot: usize, left: u64, leaf: &mut dyn FnMut(&[Vec<u64>])) {
        if j == self.mults.len() {
            leaf(&self.counts);
            return;
        }
        let machines = &self.allowed[j];
        if slot + 1 >= machines.len() {
            if let Some(&i) = machines.get(slot) {
                self.counts[j][i] = left;
            }
            let next = self.mults.get(j + 1).copied().unwrap_or(0);
            self.place(j + 1, 0, next, leaf);
            if let Some(&i) = self.allowed[j].get(slot) {
                self.counts[j][i] = 0;
            }
            return;
        }
        let i = machines[slot];
        for c in 0..=left {
            self.counts[j][i] = c;
            self.place(j, slot + 1, left - c, leaf);
        }
        self.counts[j][i] = 0;
    }
}

fn to_big(counts: &[Vec<u64>]) -> Vec<Vec<BigUint>> {
    counts
        .iter()
        .map(|row| row.iter().map(|&c| BigUint::from(c)).collect())
        .collect()
}

/// Minimum makespan with a witness split, `None` when some job cannot run.
pub fn brute_min_makespan(
    inst: &SchedulingInstance,
    budget: u64,
) -> Result<Option<(BigRational, Vec<Vec<BigUint>>)>> {
    if inst.problem() == ProblemKind::RWc {
        return Err(invalid("makespan oracle needs a makespan problem"));
    }
    let mut splits = Splits::new(inst, budget)?;
    if !splits.schedulable() {
        return Ok(None);
    }
    let mut best: Option<(BigRational, Vec<Vec<u64>>)> = None;
    splits.visit(&mut |counts| {
        let value = (0..inst.machine_count())
            .map(|i| {
                let kind = inst.machines()[i].kind;
                let load: u128 = inst
                    .job_types()
                    .iter()
                    .zip(counts)
                    .filter_map(|(ty, row)| ty.on(kind).map(|p| u128::from(p) * u128::from(row[i])))
                    .sum();
                BigRational::new(load.into(), inst.machines()[i].speed.into())
            })
            .max()
            .unwrap_or_else(BigRational::zero);
        if best.as_ref().is_none_or(|(bv, _)| value < *bv) {
            best = Some((value, counts.to_vec()));
        }
    });
    Ok(best.map(|(v, c)| (v, to_big(&c))))
}

/// Minimum total weighted completion time, each machine sequenced by Smith's
/// rule on its expanded job list.
pub fn brute_min_weighted_completion(
    inst: &SchedulingInstance,
    budget: u64,
) -> Result<Option<(BigRational, Vec<Vec<BigUint>>)>> {
    if inst.problem() != ProblemKind::RWc {
        return Err(invalid(
            "weighted completion oracle needs a weighted completion problem",
        ));
    }
    let mut splits = Splits::new(inst, budget)?;
    if !splits.schedulable() {
        return Ok(None);
    }
    let mut best: Option<(BigRational, Vec<Vec<u64>>)> = None;
    let mut failure = None;
    splits.visit(&mut |counts| {
        let mut total = BigRational::zero();
        for i in 0..inst.machine_count() {
            let kind = inst.machines()[i].kind;
            let mut jobs = Vec::new();
            for (ty, row) in inst.job_types().iter().zip(counts) {
                if let Some(p) = ty.on(kind) {
                    jobs.extend((0..row[i]).map(|_| Job::new(p, ty.weight)));
                }
            }
            match smith_order(&jobs) {
                Ok((_, cost)) => total += cost,
                Err(e) => failure = Some(e),
            }
        }
        if best.as_ref().is_none_or(|(bv, _)| total < *bv) {
            best = Some((total, counts.to_vec()));
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(best.map(|(v, c)| (v, to_big(&c))))
}

/// Whether the items fit into the bins.
pub fn brute_binpacking_feasible(bp: &BinPackingInstance) -> bool {
    let mut items = bp.items().to_vec();
    items.sort_unstable_by(|a, b| b.cmp(a));
    let mut loads = vec![0u64; bp.bins()];
    fn fill(items: &[u64], loads: &mut [u64], cap: u64) -> bool {
        let Some((&o, rest)) = items.split_first() else {
            return true;
        };
        for b in 0..loads.len() {
            // bins with equal load are interchangeable
            if loads[..b].contains(&loads[b]) || loads[b] + o > cap {
                continue;
            }
            loads[b] += o;
            let ok = fill(rest, loads, cap);
            loads[b] -= o;
            if ok {
                return true;
            }
        }
        false
    }
    fill(&items, &mut loads, bp.capacity())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduling::{JobType, Machine};

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn int(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    fn inst(
        problem: ProblemKind,
        kinds: usize,
        machines: &[(usize, u64)],
        types: &[(Vec<Option<u64>>, u64, u32)],
    ) -> SchedulingInstance {
        SchedulingInstance::new(
            problem,
            kinds,
            machines
                .iter()
                .map(|&(kind, speed)| Machine { kind, speed })
                .collect(),
            types
                .iter()
                .map(|(p, w, n)| JobType {
                    processing: p.clone(),
                    weight: *w,
                    multiplicity: (*n).into(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn pinned_point() {
        let a = IntMatrix::from_rows(&[vec![1, 1]]).unwrap();
        let got = brute_solve_ip(
            &a,
            &ints(&[3]),
            &ints(&[1, 2]),
            &ints(&[1, 2]),
            &SeparableQuadObjective::zero(2),
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert_eq!(got, Some((ints(&[1, 2]), int(0))));
        let none = brute_solve_ip(
            &a,
            &ints(&[4]),
            &ints(&[1, 2]),
            &ints(&[1, 2]),
            &SeparableQuadObjective::zero(2),
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert_eq!(none, None);
    }

    #[test]
    fn lexicographic_optimum() {
        let a = IntMatrix::from_rows(&[vec![1, 1, 1]]).unwrap();
        let got = brute_solve_ip(
            &a,
            &ints(&[2]),
            &ints(&[0, 0, 0]),
            &ints(&[2, 2, 2]),
            &SeparableQuadObjective::zero(3),
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert_eq!(got.unwrap().0, ints(&[0, 0, 2]));
    }

    #[test]
    fn budget_refused() {
        let a = IntMatrix::from_rows(&[vec![1, 1]]).unwrap();
        let err = brute_solve_ip(
            &a,
            &ints(&[0]),
            &ints(&[0, 0]),
            &ints(&[9, 9]),
            &SeparableQuadObjective::zero(2),
            50,
        );
        assert!(matches!(err, Err(Error::Resource(_))));
    }

    #[test]
    fn makespan_examples() {
        let three = inst(
            ProblemKind::QCmax,
            1,
            &[(0, 1), (0, 1)],
            &[(vec![Some(2)], 1, 3)],
        );
        assert_eq!(
            brute_min_makespan(&three, DEFAULT_BUDGET)
                .unwrap()
                .unwrap()
                .0,
            int(4)
        );
        let mixed = inst(
            ProblemKind::QCmax,
            1,
            &[(0, 1), (0, 1)],
            &[(vec![Some(1)], 1, 2), (vec![Some(2)], 1, 1)],
        );
        assert_eq!(
            brute_min_makespan(&mixed, DEFAULT_BUDGET)
                .unwrap()
                .unwrap()
                .0,
            int(2)
        );
        let one = inst(ProblemKind::QCmax, 1, &[(0, 3)], &[(vec![Some(2)], 1, 2)]);
        assert_eq!(
            brute_min_makespan(&one, DEFAULT_BUDGET).unwrap().unwrap().0,
            BigRational::new(4.into(), 3.into())
        );
        let stuck = inst(
            ProblemKind::RCmax,
            2,
            &[(0, 1)],
            &[(vec![None, Some(1)], 1, 1)],
        );
        assert_eq!(brute_min_makespan(&stuck, DEFAULT_BUDGET).unwrap(), None);
    }

    #[test]
    fn weighted_completion_examples() {
        let fig1 = inst(
            ProblemKind::RWc,
            1,
            &[(0, 1)],
            &[
                (vec![Some(3)], 1, 1),
                (vec![Some(3)], 3, 1),
                (vec![Some(4)], 1, 1),
            ],
        );
        assert_eq!(
            brute_min_weighted_completion(&fig1, DEFAULT_BUDGET)
                .unwrap()
                .unwrap()
                .0,
            int(25)
        );
        let pair = inst(
            ProblemKind::RWc,
            1,
            &[(0, 1), (0, 1)],
            &[(vec![Some(1)], 1, 2)],
        );
        assert_eq!(
            brute_min_weighted_completion(&pair, DEFAULT_BUDGET)
                .unwrap()
                .unwrap()
                .0,
            int(2)
        );
        let empty = inst(ProblemKind::RWc, 1, &[(0, 1)], &[(vec![Some(1)], 1, 0)]);
        assert_eq!(
            brute_min_weighted_completion(&empty, DEFAULT_BUDGET)
                .unwrap()
                .unwrap()
                .0,
            int(0)
        );
    }

    #[test]
    fn bin_packing() {
        let yes = BinPackingInstance::new(2, 3, vec![1, 2, 3]).unwrap();
        let no = BinPackingInstance::new(2, 3, vec![2, 2, 2]).unwrap();
        assert!(brute_binpacking_feasible(&yes));
        assert!(!brute_binpacking_feasible(&no));
    }
}
