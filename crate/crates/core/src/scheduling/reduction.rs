//! Unary bin packing to `P||ΣwjCj`.
//!
//! Items become jobs with `p = w = o`. Every job has ratio 1, so a machine
//! with load `L` costs `L²/2 + Σ o²/2` over its jobs, and the total is
//! minimized exactly when all loads equal `B`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{JobType, Machine, ProblemKind, SchedulingInstance};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinPackingInstance {
    bins: usize,
    capacity: u64,
    items: Vec<u64>,
    tight: bool,
}

impl BinPackingInstance {
    pub fn new(bins: usize, capacity: u64, items: Vec<u64>) -> Result<Self> {
        if bins == 0 {
            return Err(invalid("bin packing needs at least one bin"));
        }
        if items.contains(&0) {
            return Err(invalid("item sizes must be positive"));
        }
        let total: u128 = items.iter().map(|&o| u128::from(o)).sum();
        let tight = total == bins as u128 * u128::from(capacity);
        Ok(Self {
            bins,
            capacity,
            items,
            tight,
        })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn items(&self) -> &[u64] {
        &self.items
    }

    /// Total size equals `bins · capacity`.
    pub fn is_tight(&self) -> bool {
        self.tight
    }
}

/// The scheduling instance (one job type per distinct item size, identical
/// machines) and the cost reached exactly by perfect packings.
pub fn reduce_binpacking(bp: &BinPackingInstance) -> Result<(SchedulingInstance, BigRational)> {
    if !bp.is_tight() {
        return Err(invalid(
            "the reduction needs a tight instance (total size = bins · capacity)",
        ));
    }
    let mut sizes: BTreeMap<u64, u64> = BTreeMap::new();
    for &o in &bp.items {
        *sizes.entry(o).or_default() += 1;
    }
    let job_types = sizes
        .iter()
        .map(|(&o, &n)| JobType {
            processing: vec![Some(o)],
            weight: o,
            multiplicity: n.into(),
        })
        .collect();
    let machines = vec![Machine { kind: 0, speed: 1 }; bp.bins];
    let inst = SchedulingInstance::new(ProblemKind::RWc, 1, machines, job_types)?;

    let squares: BigInt = bp.items.iter().map(|&o| BigInt::from(o) * o).sum();
    let cap = BigInt::from(bp.capacity);
    let bins_term = BigInt::from(bp.bins) * &cap * &cap;
    let threshold = BigRational::new(squares + bins_term, 2.into());
    Ok((inst, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn threshold(k: usize, b: u64, items: &[u64]) -> BigRational {
        let bp = BinPackingInstance::new(k, b, items.to_vec()).unwrap();
        reduce_binpacking(&bp).unwrap().1
    }

    #[test]
    fn thresholds() {
        assert_eq!(
            threshold(2, 3, &[1, 2, 3]),
            BigRational::from_integer(16.into())
        );
        assert_eq!(
            threshold(2, 3, &[2, 2, 2]),
            BigRational::from_integer(15.into())
        );
        assert_eq!(threshold(1, 7, &[7]), BigRational::from_integer(49.into()));
    }

    #[test]
    fn grouped_types() {
        let bp = BinPackingInstance::new(2, 3, vec![2, 2, 2]).unwrap();
        let (inst, _) = reduce_binpacking(&bp).unwrap();
        assert_eq!(inst.type_count(), 1);
        assert_eq!(inst.machine_count(), 2);
        assert_eq!(inst.total_jobs(), 3u32.into());
    }

    #[test]
    fn loose_rejected() {
        let bp = BinPackingInstance::new(2, 4, vec![1, 2, 3]).unwrap();
        assert!(!bp.is_tight());
        assert!(reduce_binpacking(&bp).is_err());
    }
}
