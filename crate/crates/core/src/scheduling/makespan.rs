//! Makespan minimization by search over feasibility probes.
//!
//! Makespans are searched on an integer grid: `h / L` with `L` the speed lcm
//! for uniform machines, plain integers otherwise. The search starts at a
//! lower bound, gallops upward until a probe succeeds, then bisects.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::formulation::{build_nfold_qcmax, build_nfold_rcmax, counts_from_nfold, speed_lcm};
use super::{Assignment, ProblemKind, SchedulingInstance};
use crate::error::{invalid, Result};
use crate::nfold::{phase1_feasible_stats, AugmentationConfig, Phase1Outcome, SolveStats};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MakespanResult {
    pub makespan: BigRational,
    pub assignment: Assignment,
    /// Feasibility probes issued.
    pub probes: usize,
    pub stats: SolveStats,
}

/// Grid scale: makespan = grid value / scale.
fn scale(inst: &SchedulingInstance) -> BigInt {
    match inst.problem() {
        ProblemKind::QCmax => speed_lcm(inst),
        _ => BigInt::one(),
    }
}

/// Cheapest processing time of each type over the kinds that are present.
fn cheapest(inst: &SchedulingInstance) -> Vec<Option<u64>> {
    inst.job_types()
        .iter()
        .map(|ty| inst.machines().iter().filter_map(|m| ty.on(m.kind)).min())
        .collect()
}

fn capacity(inst: &SchedulingInstance, h: &BigInt, l: &BigInt) -> BigInt {
    inst.machines()
        .iter()
        .map(|m| (h * BigInt::from(m.speed)).div_floor(l))
        .sum()
}

/// A grid value below which no schedule exists.
pub fn makespan_lower_bound(inst: &SchedulingInstance) -> Result<BigInt> {
    let cheap = cheapest(inst);
    let mut load = BigInt::zero();
    let mut longest = 0u64;
    for (ty, p) in inst.job_types().iter().zip(&cheap) {
        if ty.multiplicity.is_zero() {
            continue;
        }
        let p = p.ok_or_else(|| invalid("a job type cannot run on any machine"))?;
        load += BigInt::from(ty.multiplicity.clone()) * p;
        longest = longest.max(p);
    }
    match inst.problem() {
        ProblemKind::QCmax => {
            let l = scale(inst);
            let speeds: BigInt = inst.machines().iter().map(|m| BigInt::from(m.speed)).sum();
            let fastest = inst.machines().iter().map(|m| m.speed).max().unwrap_or(1);
            let fit = (BigInt::from(longest) * &l).div_ceil(&BigInt::from(fastest));
            // smallest h whose floored capacities cover the load
            let mut lo = (&load * &l).div_ceil(&speeds);
            let mut hi = &lo + &l * BigInt::from(inst.machine_count());
            while lo < hi {
                let mid: BigInt = (&lo + &hi) / 2;
                if capacity(inst, &mid, &l) >= load {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            Ok(lo.max(fit))
        }
        _ => {
            let m = BigInt::from(inst.machine_count());
            Ok(load.div_ceil(&m).max(BigInt::from(longest)))
        }
    }
}

/// A grid value at which a schedule exists, if any does.
pub fn makespan_upper_bound(inst: &SchedulingInstance) -> BigInt {
    let l = scale(inst);
    inst.job_types()
        .iter()
        .map(|ty| {
            let p = ty.processing.iter().flatten().max().copied().unwrap_or(0);
            BigInt::from(ty.multiplicity.clone()) * p
        })
        .sum::<BigInt>()
        * l
}

/// Decides one grid value with the n-fold solver, returning counts on success.
pub fn probe_nfold(
    inst: &SchedulingInstance,
    value: &BigInt,
    cfg: &AugmentationConfig,
    stats: &mut SolveStats,
) -> Result<Option<Vec<Vec<BigUint>>>> {
    let program = match inst.problem() {
        ProblemKind::QCmax => build_nfold_qcmax(inst, value, &scale(inst))?,
        ProblemKind::RCmax => build_nfold_rcmax(inst, value)?,
        ProblemKind::RWc => return Err(invalid("makespan search needs a makespan problem")),
    };
    let (outcome, local) = phase1_feasible_stats(&program, cfg)?;
    stats.merge(&local);
    match outcome {
        Phase1Outcome::Feasible(x) => Ok(Some(counts_from_nfold(inst, &x, program.t())?)),
        Phase1Outcome::Infeasible { .. } => Ok(None),
    }
}

/// Minimum makespan with n-fold feasibility probes; `None` when some job
/// cannot run anywhere.
pub fn minimize_makespan(
    inst: &SchedulingInstance,
    cfg: &AugmentationConfig,
) -> Result<Option<MakespanResult>> {
    let mut stats = SolveStats::default();
    let found = minimize_makespan_with(inst, |v| probe_nfold(inst, v, cfg, &mut stats))?;
    Ok(found.map(|r| MakespanResult { stats, ..r }))
}

/// Minimum makespan with a caller-supplied probe. The probe receives a grid
/// value and returns counts of a schedule within it, or `None`.
pub fn minimize_makespan_with(
    inst: &SchedulingInstance,
    mut probe: impl FnMut(&BigInt) -> Result<Option<Vec<Vec<BigUint>>>>,
) -> Result<Option<MakespanResult>> {
    if inst.problem() == ProblemKind::RWc {
        return Err(invalid("makespan search needs a makespan problem"));
    }
    if !inst.unschedulable_types().is_empty() {
        return Ok(None);
    }
    let lower = makespan_lower_bound(inst)?;
    let upper = makespan_upper_bound(inst).max(lower.clone());
    let mut probes = 0;
    let mut ask = |v: &BigInt| {
        probes += 1;
        probe(v)
    };

    let (mut lo, mut hi, mut best);
    if let Some(counts) = ask(&lower)? {
        hi = lower;
        best = counts;
    } else {
        lo = lower.clone();
        let mut step = BigInt::one();
        loop {
            let v = (&lower + &step).min(upper.clone());
            if let Some(counts) = ask(&v)? {
                hi = v;
                best = counts;
                break;
            }
            if v == upper {
                return Err(invalid("no schedule found at the trivial upper bound"));
            }
            lo = v;
            step *= 2;
        }
        while &hi - &lo > BigInt::one() {
            let mid: BigInt = (&lo + &hi) / 2;
            match ask(&mid)? {
                Some(counts) => {
                    hi = mid;
                    best = counts;
                }
                None => lo = mid,
            }
        }
    }
    let assignment = Assignment::evaluate(inst, best)?;
    let makespan = BigRational::new(hi, scale(inst));
    if assignment.objective > makespan {
        return Err(invalid(
            "probe returned a schedule exceeding the probed makespan",
        ));
    }
    Ok(Some(MakespanResult {
        makespan,
        assignment,
        probes,
        stats: SolveStats::default(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduling::{JobType, Machine};

    fn q(speeds: &[u64], jobs: &[(u64, u32)]) -> SchedulingInstance {
        SchedulingInstance::new(
            ProblemKind::QCmax,
            1,
            speeds
                .iter()
                .map(|&speed| Machine { kind: 0, speed })
                .collect(),
            jobs.iter()
                .map(|&(p, n)| JobType {
                    processing: vec![Some(p)],
                    weight: 1,
                    multiplicity: n.into(),
                })
                .collect(),
        )
        .unwrap()
    }

    fn solve(inst: &SchedulingInstance) -> BigRational {
        minimize_makespan(inst, &AugmentationConfig::default())
            .unwrap()
            .unwrap()
            .makespan
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn identical_and_uniform() {
        assert_eq!(solve(&q(&[1, 1], &[(2, 3)])), rat(4, 1));
        assert_eq!(solve(&q(&[1, 2], &[(2, 3)])), rat(2, 1));
        assert_eq!(solve(&q(&[3], &[(2, 2), (1, 1)])), rat(5, 3));
    }

    #[test]
    fn no_jobs() {
        assert_eq!(solve(&q(&[1, 2], &[(2, 0)])), rat(0, 1));
    }

    #[test]
    fn unschedulable_is_none() {
        let inst = SchedulingInstance::new(
            ProblemKind::RCmax,
            2,
            vec![Machine { kind: 0, speed: 1 }],
            vec![JobType {
                processing: vec![None, Some(1)],
                weight: 1,
                multiplicity: 1u32.into(),
            }],
        )
        .unwrap();
        assert_eq!(
            minimize_makespan(&inst, &AugmentationConfig::default()).unwrap(),
            None
        );
    }

    #[test]
    fn lower_bound_with_speeds() {
        // load 6 on speeds 1 and 2: h/2 with ⌊h/2⌋ + h >= 6 gives h = 4
        assert_eq!(
            makespan_lower_bound(&q(&[1, 2], &[(2, 3)])).unwrap(),
            4.into()
        );
    }
}
