//! Exact separable convex minimization over n-fold integer programs.
//!
//! [`solve_nfold`] finds a feasible point with an auxiliary program
//! ([`phase1_feasible`]) and then augments. Each round runs the brick dynamic
//! program once per step length `λ = 1, 2, 4, ...`, scoring moves by the gain
//! of `x + λg`; [`best_step_length`] then tunes the step of each candidate
//! and the largest decrease wins. For linear objectives the scan runs from
//! the longest step down and stops once `λ` times the unit-step gain cannot
//! beat the best candidate. The loop stops when no move inside the current
//! radii improves.
//!
//! Radii are climbed from 1 up to the configured brick radius, then doubled
//! `escalation_rounds` more times before the point is declared optimal. Each
//! round also tries the next rung and moves up when that more than doubles
//! the decrease; otherwise it stays on the cheap rung. Once the radii cover every bound width the search is
//! exhaustive, and the answer is exact by construction.

mod dp;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{check_len, invalid, Result};
use crate::graver::bimatrix_radius;
use crate::ilp::{IntMatrix, NFoldInstance, SeparableQuadObjective};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentationConfig {
    /// Per-coordinate bound on candidate brick moves. `None` uses `t·a^(r+s)`.
    pub brick_radius: Option<u64>,
    /// Bound on partial `A1` sums across bricks. `None` uses `r·a·t·ρ`.
    pub sigma_radius: Option<u64>,
    /// Radius doublings tried after the configured radius stops improving.
    pub escalation_rounds: u32,
    /// Transition budget of a single direction search.
    pub node_budget: u64,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        Self {
            brick_radius: None,
            sigma_radius: None,
            escalation_rounds: 2,
            node_budget: 50_000_000,
        }
    }
}

/// Concrete radii for one instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Radii {
    pub brick: u64,
    pub sigma: u64,
}

fn max_abs_u64(inst: &NFoldInstance) -> u64 {
    inst.max_abs_entry().to_u64().unwrap_or(u64::MAX).max(1)
}

/// `r·a·t·ρ`, at least 1.
pub fn default_sigma_radius(inst: &NFoldInstance, brick_radius: u64) -> u64 {
    (inst.r().max(1) as u64)
        .saturating_mul(max_abs_u64(inst))
        .saturating_mul(inst.t().max(1) as u64)
        .saturating_mul(brick_radius)
}

impl AugmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.brick_radius == Some(0) || self.sigma_radius == Some(0) {
            return Err(invalid("radii must be positive"));
        }
        if self.node_budget == 0 {
            return Err(invalid("node budget must be positive"));
        }
        Ok(())
    }

    pub fn radii_for(&self, inst: &NFoldInstance) -> Radii {
        let brick = self
            .brick_radius
            .unwrap_or_else(|| bimatrix_radius(inst.a1(), inst.a2()));
        let sigma = self
            .sigma_radius
            .unwrap_or_else(|| default_sigma_radius(inst, brick));
        Radii { brick, sigma }
    }

    /// The radius schedule used by the augmentation loop, clipped to what the
    /// instance's bounds can reach and deduplicated.
    pub fn schedule(&self, inst: &NFoldInstance) -> Vec<Radii> {
        let base = self.radii_for(inst);
        let mut raw = Vec::new();
        let mut rho = 1u64;
        while rho < base.brick {
            let sigma = base.sigma.min(rho.saturating_mul(max_abs_u64(inst)));
            raw.push(Radii { brick: rho, sigma });
            rho = rho.saturating_mul(2);
        }
        raw.push(base);
        for e in 1..=self.escalation_rounds {
            let f = 1u64.checked_shl(e).unwrap_or(u64::MAX);
            raw.push(Radii {
                brick: base.brick.saturating_mul(f),
                sigma: base.sigma.saturating_mul(f),
            });
        }
        let (width, reach) = reach_limits(inst);
        let mut out: Vec<Radii> = Vec::new();
        for lvl in raw {
            let eff = Radii {
                brick: lvl.brick.min(width).max(1),
                sigma: lvl.sigma.min(reach).max(1),
            };
            if out.last() != Some(&eff) {
                out.push(eff);
            }
        }
        out
    }
}

/// Largest bound width and largest possible `|Σ A1·g|` over any feasible move.
fn reach_limits(inst: &NFoldInstance) -> (u64, u64) {
    let widths: Vec<BigInt> = inst
        .lower()
        .iter()
        .zip(inst.upper())
        .map(|(l, u)| u - l)
        .collect();
    let width = widths
        .iter()
        .max()
        .and_then(|w| w.to_u64())
        .unwrap_or(u64::MAX);
    let mut reach = BigInt::zero();
    for k in 0..inst.r() {
        let mut row = BigInt::zero();
        for (idx, w) in widths.iter().enumerate() {
            row += inst.a1().get(k, idx % inst.t()).abs() * w;
        }
        reach = reach.max(row);
    }
    (width, reach.to_u64().unwrap_or(u64::MAX))
}

/// A kernel direction, the step taken along it, and the resulting decrease.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentingStep {
    pub direction: Vec<i64>,
    pub step: BigInt,
    pub improvement: BigRational,
}

/// One augmentation search at the configured radii (no schedule).
///
/// `x` must be feasible. Returns `None` iff no kernel move within the radii
/// improves the objective.
pub fn find_augmenting_step(
    inst: &NFoldInstance,
    x: &[BigInt],
    cfg: &AugmentationConfig,
) -> Result<Option<AugmentingStep>> {
    cfg.validate()?;
    if !inst.check_feasible(x)?.is_feasible() {
        return Err(invalid("augmentation needs a feasible starting point"));
    }
    step_at(inst, x, cfg.radii_for(inst), cfg.node_budget)
}

fn step_at(
    inst: &NFoldInstance,
    x: &[BigInt],
    radii: Radii,
    budget: u64,
) -> Result<Option<AugmentingStep>> {
    // largest room any coordinate has, in either direction
    let room = x
        .iter()
        .zip(inst.lower().iter().zip(inst.upper()))
        .map(|(xi, (l, u))| (u - xi).max(xi - l))
        .max()
        .unwrap_or_else(BigInt::zero);
    let before = inst.eval_objective(x)?;
    let search = |lambda: u64| -> Result<Option<AugmentingStep>> {
        let params = dp::SearchParams {
            radius: radii.brick,
            sigma: radii.sigma,
            budget,
            step: lambda,
        };
        let Some(dir) = dp::best_direction(inst, x, &params)? else {
            return Ok(None);
        };
        let Some(step) = best_step_length(inst, x, &dir.g)? else {
            return Ok(None);
        };
        let after = inst.eval_objective(&apply(x, &dir.g, &step))?;
        Ok(Some(AugmentingStep {
            direction: dir.g,
            step,
            improvement: &before - after,
        }))
    };
    let mut lambdas = vec![1u64];
    while let Some(next) = lambdas.last().and_then(|l| l.checked_mul(2)) {
        if BigInt::from(next) > room {
            break;
        }
        lambdas.push(next);
    }
    let mut best: Option<AugmentingStep> = None;
    let keep = |cand: Option<AugmentingStep>, best: &mut Option<AugmentingStep>| {
        if let Some(c) = cand {
            if best.as_ref().is_none_or(|b| c.improvement > b.improvement) {
                *best = Some(c);
            }
        }
    };
    if inst.objective().is_linear() {
        // f(x) - f(x+λg) = λ·(f(x) - f(x+g)) and the feasible moves shrink as
        // λ grows, so λ times the unit-step optimum bounds every larger step
        let Some(unit) = dp::best_direction(
            inst,
            x,
            &dp::SearchParams {
                radius: radii.brick,
                sigma: radii.sigma,
                budget,
                step: 1,
            },
        )?
        else {
            return Ok(None);
        };
        for &lambda in lambdas.iter().rev() {
            if let Some(b) = &best {
                if &unit.gain * BigInt::from(lambda) <= b.improvement {
                    break;
                }
            }
            keep(search(lambda)?, &mut best);
        }
    } else {
        for &lambda in &lambdas {
            keep(search(lambda)?, &mut best);
        }
    }
    Ok(best.filter(|b| b.improvement.is_positive()))
}

/// `x + λ·g`.
pub fn apply(x: &[BigInt], g: &[i64], step: &BigInt) -> Vec<BigInt> {
    x.iter()
        .zip(g)
        .map(|(xi, &gi)| {
            if gi == 0 {
                xi.clone()
            } else {
                xi + step * BigInt::from(gi)
            }
        })
        .collect()
}

/// Best integer step `λ` in `[1, λ_max]` along `g`, where `λ_max` is the
/// largest step keeping `x + λg` within bounds.
///
/// `λ ↦ f(x+λg)` is convex, so the smallest `λ` whose forward difference is
/// non-negative minimizes it; that point is found by bisection. Returns `None`
/// when `λ_max = 0`.
pub fn best_step_length(inst: &NFoldInstance, x: &[BigInt], g: &[i64]) -> Result<Option<BigInt>> {
    check_len(inst.dim(), x.len())?;
    check_len(inst.dim(), g.len())?;
    let support: Vec<usize> = (0..g.len()).filter(|&i| g[i] != 0).collect();
    if support.is_empty() {
        return Err(invalid("step length requested for the zero direction"));
    }
    let mut lambda_max: Option<BigInt> = None;
    for &i in &support {
        let gi = BigInt::from(g[i]);
        let room = if gi.is_positive() {
            (&inst.upper()[i] - &x[i]).div_floor(&gi)
        } else {
            (&x[i] - &inst.lower()[i]).div_floor(&-gi)
        };
        lambda_max = Some(match lambda_max {
            Some(m) => m.min(room),
            None => room,
        });
    }
    let lambda_max = lambda_max.expect("non-empty support");
    if lambda_max < BigInt::one() {
        return Ok(None);
    }
    let obj = inst.objective();
    let phi = |lambda: &BigInt| -> BigRational {
        support
            .iter()
            .map(|&i| obj.term(i, &(&x[i] + lambda * BigInt::from(g[i]))))
            .fold(BigRational::zero(), |a, b| a + b)
    };
    let (mut lo, mut hi) = (BigInt::one(), lambda_max);
    while lo < hi {
        let mid: BigInt = (&lo + &hi) >> 1u32;
        let next = &mid + 1;
        if phi(&next) >= phi(&mid) {
            hi = mid;
        } else {
            lo = next;
        }
    }
    Ok(Some(lo))
}

/// Which program the augmentation loop is working on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// The auxiliary feasibility program built by [`auxiliary_program`].
    Feasibility,
    /// The original program.
    Optimization,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Augmentations applied while searching for a feasible point.
    pub phase1_steps: usize,
    /// Augmentations applied to the original objective.
    pub steps: usize,
    /// Direction searches run (successful or not).
    pub searches: usize,
    /// Largest effective radii searched.
    pub max_radii: Option<Radii>,
}

impl SolveStats {
    /// Adds counters and keeps the larger radii.
    pub fn merge(&mut self, other: &SolveStats) {
        self.phase1_steps += other.phase1_steps;
        self.steps += other.steps;
        self.searches += other.searches;
        if let Some(r) = other.max_radii {
            self.max_radii = Some(match self.max_radii {
                Some(m) => Radii {
                    brick: m.brick.max(r.brick),
                    sigma: m.sigma.max(r.sigma),
                },
                None => r,
            });
        }
    }

    fn note(&mut self, radii: Radii) {
        self.searches += 1;
        self.max_radii = Some(match self.max_radii {
            Some(m) => Radii {
                brick: m.brick.max(radii.brick),
                sigma: m.sigma.max(radii.sigma),
            },
            None => radii,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Phase1Outcome {
    Feasible(Vec<BigInt>),
    /// The auxiliary optimum is positive.
    Infeasible {
        auxiliary_optimum: BigRational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NFoldOutcome {
    Optimal { x: Vec<BigInt>, value: BigRational },
    Infeasible { auxiliary_optimum: BigRational },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NFoldSolution {
    pub outcome: NFoldOutcome,
    pub stats: SolveStats,
}

impl NFoldSolution {
    pub fn optimal(&self) -> Option<(&[BigInt], &BigRational)> {
        match &self.outcome {
            NFoldOutcome::Optimal { x, value } => Some((x, value)),
            NFoldOutcome::Infeasible { .. } => None,
        }
    }
}

/// The feasibility program: every brick gains `(+I, -I)` columns on the
/// global rows (bounded to zero outside the first brick) and `(+I, -I)`
/// columns on its local rows, and the objective is their sum. Returns it with
/// its starting point: original coordinates at their lower bounds, the
/// auxiliaries holding the signed residuals.
pub fn auxiliary_program(inst: &NFoldInstance) -> Result<(NFoldInstance, Vec<BigInt>)> {
    let (r, s, t, n) = (inst.r(), inst.s(), inst.t(), inst.bricks());
    let t2 = t + 2 * r + 2 * s;
    let mut a1 = IntMatrix::zeros(r, t2);
    let mut a2 = IntMatrix::zeros(s, t2);
    for k in 0..r {
        for j in 0..t {
            a1.set(k, j, inst.a1().get(k, j).clone());
        }
        a1.set(k, t + k, BigInt::one());
        a1.set(k, t + r + k, -BigInt::one());
    }
    for k in 0..s {
        for j in 0..t {
            a2.set(k, j, inst.a2().get(k, j).clone());
        }
        a2.set(k, t + 2 * r + k, BigInt::one());
        a2.set(k, t + 2 * r + s + k, -BigInt::one());
    }

    let values = inst.constraint_values(inst.lower())?;
    let residual: Vec<BigInt> = inst.rhs().iter().zip(&values).map(|(b, v)| b - v).collect();
    let pos = |v: &BigInt| v.max(&BigInt::zero()).clone();
    let neg = |v: &BigInt| (-v).max(BigInt::zero());

    let zero = BigInt::zero();
    let mut lower = Vec::with_capacity(n * t2);
    let mut upper = Vec::with_capacity(n * t2);
    let mut start = Vec::with_capacity(n * t2);
    let mut linear = Vec::with_capacity(n * t2);
    for i in 0..n {
        let brick = |v: &[BigInt]| v[i * t..(i + 1) * t].to_vec();
        lower.extend(brick(inst.lower()));
        upper.extend(brick(inst.upper()));
        start.extend(brick(inst.lower()));
        linear.extend(std::iter::repeat_n(BigRational::zero(), t));
        let global: Vec<BigInt> = if i == 0 {
            residual[..r].to_vec()
        } else {
            vec![zero.clone(); r]
        };
        let local = &residual[r + i * s..r + (i + 1) * s];
        let aux: Vec<BigInt> = global
            .iter()
            .map(pos)
            .chain(global.iter().map(neg))
            .chain(local.iter().map(pos))
            .chain(local.iter().map(neg))
            .collect();
        lower.extend(std::iter::repeat_n(zero.clone(), aux.len()));
        upper.extend(aux.iter().cloned());
        start.extend(aux);
        linear.extend(std::iter::repeat_n(BigRational::one(), 2 * r + 2 * s));
    }
    let aux = NFoldInstance::new(
        a1,
        a2,
        n,
        inst.rhs().to_vec(),
        lower,
        upper,
        SeparableQuadObjective::linear(linear),
    )?;
    Ok((aux, start))
}

type Observer<'a> = dyn FnMut(Phase, &[BigInt], &BigRational) + 'a;

/// Finds a feasible point or certifies infeasibility at the configured radii.
pub fn phase1_feasible(inst: &NFoldInstance, cfg: &AugmentationConfig) -> Result<Phase1Outcome> {
    phase1_feasible_stats(inst, cfg).map(|(outcome, _)| outcome)
}

/// [`phase1_feasible`] with its search statistics.
pub fn phase1_feasible_stats(
    inst: &NFoldInstance,
    cfg: &AugmentationConfig,
) -> Result<(Phase1Outcome, SolveStats)> {
    let mut stats = SolveStats::default();
    let outcome = phase1(inst, cfg, &mut stats, &mut |_, _, _| {})?;
    Ok((outcome, stats))
}

fn phase1(
    inst: &NFoldInstance,
    cfg: &AugmentationConfig,
    stats: &mut SolveStats,
    observer: &mut Observer<'_>,
) -> Result<Phase1Outcome> {
    cfg.validate()?;
    let (aux, start) = auxiliary_program(inst)?;
    let (x, value, steps) = augment(&aux, start, cfg, stats, Phase::Feasibility, observer)?;
    stats.phase1_steps += steps;
    if value.is_zero() {
        let t = inst.t();
        let t2 = aux.t();
        let original = (0..inst.bricks())
            .flat_map(|i| x[i * t2..i * t2 + t].iter().cloned())
            .collect();
        Ok(Phase1Outcome::Feasible(original))
    } else {
        Ok(Phase1Outcome::Infeasible {
            auxiliary_optimum: value,
        })
    }
}

pub fn solve_nfold(inst: &NFoldInstance, cfg: &AugmentationConfig) -> Result<NFoldSolution> {
    solve_nfold_observed(inst, cfg, &mut |_, _, _| {})
}

/// [`solve_nfold`], reporting every iterate (including the starting point of
/// each phase) to `observer`.
pub fn solve_nfold_observed(
    inst: &NFoldInstance,
    cfg: &AugmentationConfig,
    observer: &mut Observer<'_>,
) -> Result<NFoldSolution> {
    let mut stats = SolveStats::default();
    let x = match phase1(inst, cfg, &mut stats, observer)? {
        Phase1Outcome::Feasible(x) => x,
        Phase1Outcome::Infeasible { auxiliary_optimum } => {
            return Ok(NFoldSolution {
                outcome: NFoldOutcome::Infeasible { auxiliary_optimum },
                stats,
            })
        }
    };
    let (x, value, steps) = augment(inst, x, cfg, &mut stats, Phase::Optimization, observer)?;
    stats.steps += steps;
    Ok(NFoldSolution {
        outcome: NFoldOutcome::Optimal { x, value },
        stats,
    })
}

fn augment(
    inst: &NFoldInstance,
    mut x: Vec<BigInt>,
    cfg: &AugmentationConfig,
    stats: &mut SolveStats,
    phase: Phase,
    observer: &mut Observer<'_>,
) -> Result<(Vec<BigInt>, BigRational, usize)> {
    let floor = inst.separable_lower_bound();
    let schedule = cfg.schedule(inst);
    let mut value = inst.eval_objective(&x)?;
    observer(phase, &x, &value);
    let mut steps = 0;
    let mut level = 0;
    while value != floor && level < schedule.len() {
        // look one rung up; climb only when it more than doubles the gain
        stats.note(schedule[level]);
        let here = step_at(inst, &x, schedule[level], cfg.node_budget)?;
        let above = match schedule.get(level + 1) {
            Some(&radii) => {
                stats.note(radii);
                step_at(inst, &x, radii, cfg.node_budget)?
            }
            None => None,
        };
        let chosen = match (here, above) {
            (Some(h), Some(a)) if a.improvement <= &h.improvement * BigInt::from(2) => h,
            (Some(h), None) => h,
            (_, Some(a)) => {
                level += 1;
                a
            }
            (None, None) => {
                level += 2;
                continue;
            }
        };
        x = apply(&x, &chosen.direction, &chosen.step);
        let next = inst.eval_objective(&x)?;
        assert!(
            next < value,
            "augmentation must strictly decrease the objective"
        );
        value = next;
        steps += 1;
        observer(phase, &x, &value);
    }
    Ok((x, value, steps))
}
