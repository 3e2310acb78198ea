//! Scheduling problems as n-fold and small-dimension integer programs.
//!
//! Every n-fold formulation uses one brick per machine whose first `Θ`
//! coordinates count the jobs of each type on that machine, and one global
//! row per type fixing its multiplicity.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::smith::ratio_order;
use super::{Assignment, ProblemKind, SchedulingInstance};
use crate::error::{check_len, invalid, Error, Result};
use crate::fixed_dim::{solve_small_convex_ip, FixedDimConfig, QuadForm, SmallConvexIP};
use crate::ilp::{IntMatrix, NFoldInstance, SeparableQuadObjective};
use crate::nfold::{solve_nfold, AugmentationConfig, NFoldOutcome, SolveStats};

fn expect(inst: &SchedulingInstance, problem: ProblemKind) -> Result<()> {
    if inst.problem() == problem {
        Ok(())
    } else {
        Err(invalid(format!(
            "expected a {problem:?} instance, got {:?}",
            inst.problem()
        )))
    }
}

fn reject_unschedulable(inst: &SchedulingInstance) -> Result<()> {
    match inst.unschedulable_types().first() {
        Some(j) => Err(invalid(format!("job type {j} cannot run on any machine"))),
        None => Ok(()),
    }
}

fn multiplicities(inst: &SchedulingInstance) -> Vec<BigInt> {
    inst.job_types()
        .iter()
        .map(|ty| BigInt::from(ty.multiplicity.clone()))
        .collect()
}

/// `[I_Θ | 0]` with `extra` zero columns.
fn identity_band(theta: usize, extra: usize) -> IntMatrix {
    let t = theta + extra;
    let mut a1 = IntMatrix::zeros(theta, t);
    for j in 0..theta {
        a1.set(j, j, BigInt::one());
    }
    a1
}

/// Least common multiple of the machine speeds.
pub fn speed_lcm(inst: &SchedulingInstance) -> BigInt {
    inst.machines()
        .iter()
        .fold(BigInt::one(), |acc, m| acc.lcm(&BigInt::from(m.speed)))
}

/// Feasibility program for makespan `h / l` on uniform machines: machine `i`
/// holds at most `⌊s_i·h / l⌋` units of processing.
pub fn build_nfold_qcmax(
    inst: &SchedulingInstance,
    h: &BigInt,
    l: &BigInt,
) -> Result<NFoldInstance> {
    expect(inst, ProblemKind::QCmax)?;
    if h.sign() == Sign::Minus {
        return Err(invalid("scaled makespan must be nonnegative"));
    }
    if l.sign() != Sign::Plus {
        return Err(invalid("speed scale must be positive"));
    }
    let theta = inst.type_count();
    let t = theta + 1;
    let a1 = identity_band(theta, 1);
    let mut a2 = IntMatrix::zeros(1, t);
    for (j, ty) in inst.job_types().iter().enumerate() {
        a2.set(0, j, BigInt::from(ty.processing[0].unwrap_or(0)));
    }
    a2.set(0, theta, BigInt::one());

    let n = multiplicities(inst);
    let mut rhs = n.clone();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for m in inst.machines() {
        let cap = (h * BigInt::from(m.speed)).div_floor(l);
        lower.extend(std::iter::repeat_n(BigInt::zero(), t));
        upper.extend(n.iter().cloned());
        upper.push(cap.clone());
        rhs.push(cap);
    }
    let dim = lower.len();
    NFoldInstance::new(
        a1,
        a2,
        inst.machine_count(),
        rhs,
        lower,
        upper,
        SeparableQuadObjective::zero(dim),
    )
}

/// Feasibility program for makespan `T` on unrelated machines: one capacity
/// row per kind, `T` for the machine's own kind and a non-binding `n·p_max + 1`
/// for the others.
pub fn build_nfold_rcmax(inst: &SchedulingInstance, deadline: &BigInt) -> Result<NFoldInstance> {
    expect(inst, ProblemKind::RCmax)?;
    reject_unschedulable(inst)?;
    if deadline.sign() == Sign::Minus {
        return Err(invalid("makespan must be nonnegative"));
    }
    let (theta, kinds) = (inst.type_count(), inst.kinds());
    let t = theta + kinds;
    let a1 = identity_band(theta, kinds);
    let mut a2 = IntMatrix::zeros(kinds, t);
    for k in 0..kinds {
        for (j, ty) in inst.job_types().iter().enumerate() {
            a2.set(k, j, BigInt::from(ty.on(k).unwrap_or(0)));
        }
        a2.set(k, theta + k, BigInt::one());
    }
    let big: BigInt = BigInt::from(inst.total_jobs()) * inst.p_max() + 1;

    let n = multiplicities(inst);
    let mut rhs = n.clone();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for m in inst.machines() {
        lower.extend(std::iter::repeat_n(BigInt::zero(), t));
        for (j, ty) in inst.job_types().iter().enumerate() {
            upper.push(if ty.on(m.kind).is_some() {
                n[j].clone()
            } else {
                BigInt::zero()
            });
        }
        for k in 0..kinds {
            let cap = if k == m.kind {
                deadline.clone()
            } else {
                big.clone()
            };
            upper.push(cap.clone());
            rhs.push(cap);
        }
    }
    let dim = lower.len();
    NFoldInstance::new(
        a1,
        a2,
        inst.machine_count(),
        rhs,
        lower,
        upper,
        SeparableQuadObjective::zero(dim),
    )
}

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

/// `½(ρ(π(j)) - ρ(π(j+1)))` for every sorted position `j` on `kind`.
fn slopes(inst: &SchedulingInstance, order: &[usize], kind: usize) -> Vec<BigRational> {
    let types = inst.job_types();
    (0..order.len())
        .map(|j| {
            let next = order
                .get(j + 1)
                .map(|&l| types[l].ratio(kind))
                .unwrap_or_else(BigRational::zero);
            half() * (types[order[j]].ratio(kind) - next)
        })
        .collect()
}

/// Convex n-fold program for `R||ΣwjCj`.
///
/// Brick layout: `x_1..x_Θ`, then `z_{j,k}` at `Θ + k·Θ + j`, the processing
/// mass of the first `j+1` types in ratio order on kind `k`. Only the
/// machine's own kind carries quadratic weight.
pub fn build_nfold_rwc(inst: &SchedulingInstance) -> Result<NFoldInstance> {
    expect(inst, ProblemKind::RWc)?;
    reject_unschedulable(inst)?;
    let (theta, kinds) = (inst.type_count(), inst.kinds());
    if theta == 0 {
        return Err(invalid(
            "the weighted completion program needs at least one job type",
        ));
    }
    let t = theta + theta * kinds;
    let a1 = identity_band(theta, theta * kinds);
    let orders: Vec<Vec<usize>> = (0..kinds).map(|k| ratio_order(inst, k)).collect();
    let mut a2 = IntMatrix::zeros(theta * kinds, t);
    for (k, order) in orders.iter().enumerate() {
        for j in 0..theta {
            let row = k * theta + j;
            for &l in &order[..=j] {
                let p = inst.job_types()[l].on(k).unwrap_or(0);
                a2.set(row, l, BigInt::from(p));
            }
            a2.set(row, theta + row, BigInt::from(-1));
        }
    }
    let z_cap: BigInt = BigInt::from(inst.total_jobs()) * inst.p_max();
    let all_slopes: Vec<Vec<BigRational>> = orders
        .iter()
        .enumerate()
        .map(|(k, order)| slopes(inst, order, k))
        .collect();

    let n = multiplicities(inst);
    let mut rhs = n.clone();
    let (mut lower, mut upper) = (Vec::new(), Vec::new());
    let (mut quad, mut lin) = (Vec::new(), Vec::new());
    for m in inst.machines() {
        rhs.extend(std::iter::repeat_n(BigInt::zero(), theta * kinds));
        lower.extend(std::iter::repeat_n(BigInt::zero(), t));
        for (j, ty) in inst.job_types().iter().enumerate() {
            quad.push(BigRational::zero());
            match ty.on(m.kind) {
                Some(p) => {
                    upper.push(n[j].clone());
                    lin.push(half() * BigRational::from_integer(BigInt::from(p) * ty.weight));
                }
                None => {
                    upper.push(BigInt::zero());
                    lin.push(BigRational::zero());
                }
            }
        }
        for (k, slope) in all_slopes.iter().enumerate() {
            for s in slope {
                upper.push(z_cap.clone());
                lin.push(BigRational::zero());
                quad.push(if k == m.kind {
                    s.clone()
                } else {
                    BigRational::zero()
                });
            }
        }
    }
    NFoldInstance::new(
        a1,
        a2,
        inst.machine_count(),
        rhs,
        lower,
        upper,
        SeparableQuadObjective::new(quad, lin)?,
    )
}

/// `R||ΣwjCj` over the counts only, machine-major (`x_{i,j}` at `i·Θ + j`),
/// with each prefix mass folded into a squared linear form.
pub fn build_fixeddim_rwc(
    inst: &SchedulingInstance,
    dimension_cap: usize,
) -> Result<SmallConvexIP> {
    expect(inst, ProblemKind::RWc)?;
    reject_unschedulable(inst)?;
    let (theta, m) = (inst.type_count(), inst.machine_count());
    let d = theta * m;
    if d > dimension_cap {
        return Err(Error::Resource(format!(
            "{theta} types on {m} machines need dimension {d}, above the cap of {dimension_cap}"
        )));
    }
    let mut eq = IntMatrix::zeros(theta, d);
    for i in 0..m {
        for j in 0..theta {
            eq.set(j, i * theta + j, BigInt::one());
        }
    }
    let n = multiplicities(inst);
    let (mut upper, mut lin, mut forms) = (Vec::new(), Vec::new(), Vec::new());
    for (i, machine) in inst.machines().iter().enumerate() {
        let kind = machine.kind;
        for (j, ty) in inst.job_types().iter().enumerate() {
            match ty.on(kind) {
                Some(p) => {
                    upper.push(n[j].clone());
                    lin.push(half() * BigRational::from_integer(BigInt::from(p) * ty.weight));
                }
                None => {
                    upper.push(BigInt::zero());
                    lin.push(BigRational::zero());
                }
            }
        }
        let order = ratio_order(inst, kind);
        let mut coefficients = vec![BigInt::zero(); d];
        for (j, weight) in slopes(inst, &order, kind).into_iter().enumerate() {
            let l = order[j];
            coefficients[i * theta + l] = BigInt::from(inst.job_types()[l].on(kind).unwrap_or(0));
            if !weight.is_zero() {
                forms.push(QuadForm {
                    coefficients: coefficients.clone(),
                    weight,
                });
            }
        }
    }
    SmallConvexIP::new(
        eq,
        n,
        vec![BigInt::zero(); d],
        upper,
        SeparableQuadObjective::new(vec![BigRational::zero(); d], lin)?,
        forms,
    )
}

fn to_count(v: &BigInt) -> Result<BigUint> {
    v.to_biguint()
        .ok_or_else(|| invalid(format!("negative job count {v}")))
}

/// Θ×m counts from an n-fold point with brick width `t`.
pub fn counts_from_nfold(
    inst: &SchedulingInstance,
    x: &[BigInt],
    t: usize,
) -> Result<Vec<Vec<BigUint>>> {
    check_len(inst.machine_count() * t, x.len())?;
    (0..inst.type_count())
        .map(|j| {
            (0..inst.machine_count())
                .map(|i| to_count(&x[i * t + j]))
                .collect()
        })
        .collect()
}

/// Θ×m counts from a machine-major fixed-dimension point.
pub fn counts_from_fixeddim(inst: &SchedulingInstance, x: &[BigInt]) -> Result<Vec<Vec<BigUint>>> {
    counts_from_nfold(inst, x, inst.type_count())
}

fn zero_assignment(inst: &SchedulingInstance) -> Assignment {
    Assignment {
        counts: vec![vec![BigUint::zero(); inst.machine_count()]; inst.type_count()],
        objective: BigRational::zero(),
    }
}

/// Optimal `R||ΣwjCj` schedule through the n-fold program.
pub fn solve_rwc_nfold(
    inst: &SchedulingInstance,
    cfg: &AugmentationConfig,
) -> Result<(Assignment, SolveStats)> {
    expect(inst, ProblemKind::RWc)?;
    if inst.type_count() == 0 {
        return Ok((zero_assignment(inst), SolveStats::default()));
    }
    let program = build_nfold_rwc(inst)?;
    let sol = solve_nfold(&program, cfg)?;
    match sol.outcome {
        NFoldOutcome::Optimal { x, value } => {
            let counts = counts_from_nfold(inst, &x, program.t())?;
            Ok((Assignment { counts, objective: value }, sol.stats))
        }
        NFoldOutcome::Infeasible { .. } => Err(invalid(
            "weighted completion program reported infeasible; every schedulable instance is feasible",
        )),
    }
}

/// Optimal `R||ΣwjCj` schedule through the fixed-dimension program.
pub fn solve_rwc_fixeddim(inst: &SchedulingInstance, cfg: &FixedDimConfig) -> Result<Assignment> {
    expect(inst, ProblemKind::RWc)?;
    if inst.type_count() == 0 {
        return Ok(zero_assignment(inst));
    }
    let program = build_fixeddim_rwc(inst, cfg.dimension_cap)?;
    let sol = solve_small_convex_ip(&program, cfg)?
        .ok_or_else(|| invalid("weighted completion program reported infeasible"))?;
    let counts = counts_from_fixeddim(inst, &sol.x)?;
    Ok(Assignment {
        counts,
        objective: sol.value,
    })
}
