use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;

use super::SchedulingInstance;
use crate::error::{check_len, invalid, Error, Result};

/// A single job on a single machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Job {
    pub p: u64,
    pub w: u64,
}

impl Job {
    pub fn new(p: u64, w: u64) -> Self {
        Self { p, w }
    }
}

/// Compares `w/p` ratios without division, higher ratio first.
fn by_ratio_desc(a: (u64, u64), b: (u64, u64)) -> Ordering {
    let lhs = u128::from(b.1) * u128::from(a.0);
    let rhs = u128::from(a.1) * u128::from(b.0);
    lhs.cmp(&rhs)
}

/// Smith's order (stable, non-increasing `w/p`) and its total weighted
/// completion time.
pub fn smith_order(jobs: &[Job]) -> Result<(Vec<usize>, BigRational)> {
    if let Some(j) = jobs.iter().position(|j| j.p == 0) {
        return Err(invalid(format!("job {j} has processing time 0")));
    }
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    order.sort_by(|&a, &b| by_ratio_desc((jobs[a].p, jobs[a].w), (jobs[b].p, jobs[b].w)));
    let mut clock = BigInt::zero();
    let mut cost = BigInt::zero();
    for &j in &order {
        clock += jobs[j].p;
        cost += &clock * jobs[j].w;
    }
    Ok((order, BigRational::from_integer(cost)))
}

/// Sum of triangle areas plus the per-job linear term, over entries
/// `(p, w, count)` already sorted by non-increasing ratio.
fn triangle_sum(entries: &[(u64, u64, BigInt)]) -> BigRational {
    let half = BigRational::new(1.into(), 2.into());
    let ratio = |k: usize| -> BigRational {
        entries
            .get(k)
            .map(|&(p, w, _)| BigRational::new(w.into(), p.into()))
            .unwrap_or_else(BigRational::zero)
    };
    let mut z = BigInt::zero();
    let mut total = BigRational::zero();
    for (k, (p, w, count)) in entries.iter().enumerate() {
        z += count * p;
        let slope = ratio(k) - ratio(k + 1);
        total += &half * BigRational::from_integer(&z * &z) * slope;
        total += &half * BigRational::from_integer(count * p * w);
    }
    total
}

/// Weighted completion time of jobs already in Smith order, from the
/// triangle decomposition of the weight/time chart.
pub fn cost_by_triangles(jobs: &[Job]) -> Result<BigRational> {
    if jobs.iter().any(|j| j.p == 0) {
        return Err(invalid("processing time 0"));
    }
    if jobs
        .windows(2)
        .any(|w| by_ratio_desc((w[0].p, w[0].w), (w[1].p, w[1].w)) == Ordering::Greater)
    {
        return Err(Error::Unsorted);
    }
    let entries: Vec<_> = jobs.iter().map(|j| (j.p, j.w, BigInt::from(1))).collect();
    Ok(triangle_sum(&entries))
}

/// Types sorted by non-increasing ratio on `kind`; forbidden types last.
/// Ties keep type order.
pub fn ratio_order(inst: &SchedulingInstance, kind: usize) -> Vec<usize> {
    let types = inst.job_types();
    let mut order: Vec<usize> = (0..types.len()).collect();
    order.sort_by(|&a, &b| match (types[a].on(kind), types[b].on(kind)) {
        (Some(pa), Some(pb)) => by_ratio_desc((pa, types[a].weight), (pb, types[b].weight)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    });
    order
}

/// Optimal single-machine `ΣwC` of the multiset given by per-type counts on
/// machine `machine`.
pub fn cost_by_type_counts(
    counts: &[BigUint],
    inst: &SchedulingInstance,
    machine: usize,
) -> Result<BigRational> {
    check_len(inst.type_count(), counts.len())?;
    let kind = inst
        .machines()
        .get(machine)
        .ok_or_else(|| invalid(format!("no machine {machine}")))?
        .kind;
    let mut entries = Vec::new();
    for j in ratio_order(inst, kind) {
        let ty = &inst.job_types()[j];
        match ty.on(kind) {
            Some(p) => entries.push((p, ty.weight, BigInt::from(counts[j].clone()))),
            None if counts[j].is_zero() => {}
            None => {
                return Err(invalid(format!(
                    "type {j} is forbidden on machine {machine}"
                )))
            }
        }
    }
    Ok(triangle_sum(&entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduling::{JobType, Machine, ProblemKind};

    fn jobs(v: &[(u64, u64)]) -> Vec<Job> {
        v.iter().map(|&(p, w)| Job::new(p, w)).collect()
    }

    fn int(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    #[test]
    fn three_job_example() {
        let (order, cost) = smith_order(&jobs(&[(3, 1), (3, 3), (4, 1)])).unwrap();
        assert_eq!(order, vec![1, 0, 2]);
        assert_eq!(cost, int(25));
    }

    #[test]
    fn single_and_tied() {
        assert_eq!(smith_order(&jobs(&[(5, 2)])).unwrap().1, int(10));
        assert_eq!(smith_order(&jobs(&[(1, 1), (2, 2)])).unwrap().1, int(7));
        assert_eq!(smith_order(&jobs(&[(2, 2), (1, 1)])).unwrap().1, int(7));
        assert_eq!(cost_by_triangles(&jobs(&[(5, 2)])).unwrap(), int(10));
    }

    #[test]
    fn seven_job_triangles() {
        let set = jobs(&[(2, 4), (2, 2), (2, 2), (2, 1), (2, 1), (2, 1), (3, 1)]);
        assert_eq!(cost_by_triangles(&set).unwrap(), int(73));
        assert_eq!(smith_order(&set).unwrap().1, int(73));
    }

    #[test]
    fn unsorted_rejected() {
        assert_eq!(
            cost_by_triangles(&jobs(&[(3, 1), (3, 3)])),
            Err(Error::Unsorted)
        );
    }

    #[test]
    fn type_counts() {
        let types = [(2, 4, 1u32), (2, 2, 2), (2, 1, 3), (3, 1, 1)]
            .iter()
            .map(|&(p, w, n)| JobType {
                processing: vec![Some(p)],
                weight: w,
                multiplicity: n.into(),
            })
            .collect();
        let inst = SchedulingInstance::new(
            ProblemKind::RWc,
            1,
            vec![Machine { kind: 0, speed: 1 }],
            types,
        )
        .unwrap();
        let counts: Vec<BigUint> = [1u32, 2, 3, 1].iter().map(|&c| c.into()).collect();
        assert_eq!(cost_by_type_counts(&counts, &inst, 0).unwrap(), int(73));
        let zero = vec![BigUint::zero(); 4];
        assert_eq!(cost_by_type_counts(&zero, &inst, 0).unwrap(), int(0));
    }
}
