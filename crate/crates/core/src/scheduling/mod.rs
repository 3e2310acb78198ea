//! Scheduling instances, Smith's rule costs, the integer programming
//! formulations, the makespan driver, and the bin packing reduction.

mod formulation;
mod makespan;
mod reduction;
mod smith;

pub use formulation::{
    build_fixeddim_rwc, build_nfold_qcmax, build_nfold_rcmax, build_nfold_rwc,
    counts_from_fixeddim, counts_from_nfold, solve_rwc_fixeddim, solve_rwc_nfold, speed_lcm,
};
pub use makespan::{
    makespan_lower_bound, makespan_upper_bound, minimize_makespan, minimize_makespan_with,
    probe_nfold, MakespanResult,
};
pub use reduction::{reduce_binpacking, BinPackingInstance};
pub use smith::{cost_by_triangles, cost_by_type_counts, ratio_order, smith_order, Job};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{check_len, invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    /// Uniformly related machines, makespan.
    QCmax,
    /// Unrelated machines grouped into kinds, makespan.
    RCmax,
    /// Unrelated machines grouped into kinds, total weighted completion time.
    RWc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine {
    pub kind: usize,
    pub speed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobType {
    /// Processing time per machine kind; `None` forbids the kind.
    pub processing: Vec<Option<u64>>,
    pub weight: u64,
    pub multiplicity: BigUint,
}

impl JobType {
    pub fn on(&self, kind: usize) -> Option<u64> {
        self.processing[kind]
    }

    /// `w/p` on `kind`, zero where forbidden.
    pub fn ratio(&self, kind: usize) -> BigRational {
        match self.processing[kind] {
            Some(p) => BigRational::new(self.weight.into(), p.into()),
            None => BigRational::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulingInstance {
    problem: ProblemKind,
    kinds: usize,
    machines: Vec<Machine>,
    job_types: Vec<JobType>,
}

impl SchedulingInstance {
    pub fn new(
        problem: ProblemKind,
        kinds: usize,
        machines: Vec<Machine>,
        job_types: Vec<JobType>,
    ) -> Result<Self> {
        if kinds == 0 {
            return Err(invalid("at least one machine kind is required"));
        }
        if machines.is_empty() {
            return Err(invalid("at least one machine is required"));
        }
        for (i, m) in machines.iter().enumerate() {
            if m.kind >= kinds {
                return Err(invalid(format!("machine {i} has unknown kind {}", m.kind)));
            }
            if m.speed == 0 {
                return Err(invalid(format!("machine {i} has speed 0")));
            }
            if problem != ProblemKind::QCmax && m.speed != 1 {
                return Err(invalid(format!(
                    "machine {i} has speed {} but only uniform machines carry speeds",
                    m.speed
                )));
            }
        }
        for (j, ty) in job_types.iter().enumerate() {
            check_len(kinds, ty.processing.len())?;
            if ty.processing.contains(&Some(0)) {
                return Err(invalid(format!("job type {j} has processing time 0")));
            }
            match problem {
                ProblemKind::QCmax if ty.processing.contains(&None) => {
                    return Err(invalid(format!(
                        "job type {j} forbids a kind, which uniform machines do not allow"
                    )));
                }
                ProblemKind::RWc if ty.weight == 0 => {
                    return Err(invalid(format!("job type {j} has weight 0")));
                }
                _ => {}
            }
            let usable = machines.iter().any(|m| ty.processing[m.kind].is_some());
            if problem == ProblemKind::RWc && !usable && !ty.multiplicity.is_zero() {
                return Err(invalid(format!("job type {j} cannot run on any machine")));
            }
        }
        if problem == ProblemKind::QCmax && kinds != 1 {
            return Err(invalid("uniform machines use exactly one kind"));
        }
        Ok(Self {
            problem,
            kinds,
            machines,
            job_types,
        })
    }

    pub fn problem(&self) -> ProblemKind {
        self.problem
    }

    pub fn kinds(&self) -> usize {
        self.kinds
    }

    pub fn machines(&self) -> &[Machine] {
        &self.machines
    }

    pub fn job_types(&self) -> &[JobType] {
        &self.job_types
    }

    /// Θ.
    pub fn type_count(&self) -> usize {
        self.job_types.len()
    }

    pub fn machine_count(&self) -> usize {
        self.machines.len()
    }

    /// Largest finite processing time, 0 without job types.
    pub fn p_max(&self) -> u64 {
        self.job_types
            .iter()
            .flat_map(|ty| ty.processing.iter().flatten())
            .copied()
            .max()
            .unwrap_or(0)
    }

    pub fn total_jobs(&self) -> BigUint {
        self.job_types.iter().map(|ty| &ty.multiplicity).sum()
    }

    /// Types with jobs that no machine accepts.
    pub fn unschedulable_types(&self) -> Vec<usize> {
        (0..self.job_types.len())
            .filter(|&j| {
                let ty = &self.job_types[j];
                !ty.multiplicity.is_zero()
                    && self
                        .machines
                        .iter()
                        .all(|m| ty.processing[m.kind].is_none())
            })
            .collect()
    }

    /// Same instance with different speeds.
    pub fn with_speeds(&self, speeds: &[u64]) -> Result<Self> {
        check_len(self.machines.len(), speeds.len())?;
        let machines = self
            .machines
            .iter()
            .zip(speeds)
            .map(|(m, &speed)| Machine {
                kind: m.kind,
                speed,
            })
            .collect();
        Self::new(self.problem, self.kinds, machines, self.job_types.clone())
    }

    /// Checks multiplicities and forbidden pairs of a Θ×m count matrix.
    pub fn check_counts(&self, counts: &[Vec<BigUint>]) -> Result<()> {
        check_len(self.job_types.len(), counts.len())?;
        for (j, (ty, row)) in self.job_types.iter().zip(counts).enumerate() {
            check_len(self.machines.len(), row.len())?;
            let total: BigUint = row.iter().sum();
            if total != ty.multiplicity {
                return Err(invalid(format!(
                    "type {j} places {total} jobs but has multiplicity {}",
                    ty.multiplicity
                )));
            }
            for (i, c) in row.iter().enumerate() {
                if !c.is_zero() && ty.processing[self.machines[i].kind].is_none() {
                    return Err(invalid(format!(
                        "type {j} is forbidden on machine {i} but has {c} jobs there"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Load of machine `i` divided by its speed.
    pub fn completion_of(&self, counts: &[Vec<BigUint>], i: usize) -> BigRational {
        let kind = self.machines[i].kind;
        let load: BigInt = self
            .job_types
            .iter()
            .zip(counts)
            .filter_map(|(ty, row)| {
                ty.processing[kind].map(|p| BigInt::from(p) * BigInt::from(row[i].clone()))
            })
            .sum();
        BigRational::new(load, self.machines[i].speed.into())
    }

    /// The objective of this instance's problem at the given counts:
    /// makespan for the makespan problems, `ΣwC` otherwise.
    pub fn objective_of(&self, counts: &[Vec<BigUint>]) -> Result<BigRational> {
        self.check_counts(counts)?;
        let m = self.machines.len();
        match self.problem {
            ProblemKind::QCmax | ProblemKind::RCmax => Ok((0..m)
                .map(|i| self.completion_of(counts, i))
                .max()
                .unwrap_or_else(BigRational::zero)),
            ProblemKind::RWc => {
                let mut total = BigRational::zero();
                for i in 0..m {
                    let column: Vec<BigUint> = counts.iter().map(|row| row[i].clone()).collect();
                    total += cost_by_type_counts(&column, self, i)?;
                }
                Ok(total)
            }
        }
    }
}

/// Job counts per type and machine, with the objective they attain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    /// `counts[j][i]`: jobs of type `j` on machine `i`.
    pub counts: Vec<Vec<BigUint>>,
    pub objective: BigRational,
}

impl Assignment {
    /// Validates the counts and computes their objective.
    pub fn evaluate(inst: &SchedulingInstance, counts: Vec<Vec<BigUint>>) -> Result<Self> {
        let objective = inst.objective_of(&counts)?;
        Ok(Self { counts, objective })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(p: &[Option<u64>], w: u64, n: u32) -> JobType {
        JobType {
            processing: p.to_vec(),
            weight: w,
            multiplicity: n.into(),
        }
    }

    #[test]
    fn unknown_kind_rejected() {
        let err = SchedulingInstance::new(
            ProblemKind::RCmax,
            1,
            vec![Machine { kind: 1, speed: 1 }],
            vec![],
        );
        assert!(err.is_err());
    }

    #[test]
    fn forbidden_everywhere_rejected_for_weighted_completion() {
        let machines = vec![Machine { kind: 0, speed: 1 }];
        let types = vec![ty(&[None, Some(1)], 1, 1)];
        assert!(
            SchedulingInstance::new(ProblemKind::RWc, 2, machines.clone(), types.clone()).is_err()
        );
        let inst = SchedulingInstance::new(ProblemKind::RCmax, 2, machines, types).unwrap();
        assert_eq!(inst.unschedulable_types(), vec![0]);
    }

    #[test]
    fn makespan_objective() {
        let inst = SchedulingInstance::new(
            ProblemKind::QCmax,
            1,
            vec![Machine { kind: 0, speed: 1 }, Machine { kind: 0, speed: 2 }],
            vec![ty(&[Some(2)], 1, 3)],
        )
        .unwrap();
        let counts = vec![vec![BigUint::from(1u32), BigUint::from(2u32)]];
        let a = Assignment::evaluate(&inst, counts).unwrap();
        assert_eq!(a.objective, BigRational::from_integer(2.into()));
        let bad = vec![vec![BigUint::from(1u32), BigUint::from(1u32)]];
        assert!(inst.objective_of(&bad).is_err());
    }
}
