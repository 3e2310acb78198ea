//! Seeded instance generators shared by the integration and acceptance tests.
#![allow(dead_code)]

use hmsched_core::scheduling::{JobType, Machine, ProblemKind, SchedulingInstance};
use hmsched_core::{IntMatrix, NFoldInstance, SeparableQuadObjective};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

/// Splits `total` jobs over `parts` types uniformly at random.
fn split(rng: &mut ChaCha8Rng, total: u32, parts: usize) -> Vec<u32> {
    let mut out = vec![0; parts];
    for _ in 0..total {
        out[rng.gen_range(0..parts)] += 1;
    }
    out
}

/// Uniform machines: m <= 3, distinct lengths <= 3, speeds <= 3, at most 10 jobs.
pub fn random_qcmax(seed: u64) -> SchedulingInstance {
    let mut rng = rng(seed);
    let m = rng.gen_range(1..=3);
    let mut lengths = vec![1u64, 2, 3];
    lengths.shuffle(&mut rng);
    lengths.truncate(rng.gen_range(1..=3));
    let total = rng.gen_range(0..=10);
    let counts = split(&mut rng, total, lengths.len());
    let machines = (0..m)
        .map(|_| Machine {
            kind: 0,
            speed: rng.gen_range(1..=3),
        })
        .collect();
    let types = lengths
        .iter()
        .zip(counts)
        .map(|(&p, n)| JobType {
            processing: vec![Some(p)],
            weight: 1,
            multiplicity: n.into(),
        })
        .collect();
    SchedulingInstance::new(ProblemKind::QCmax, 1, machines, types).unwrap()
}

fn random_unrelated(
    rng: &mut ChaCha8Rng,
    problem: ProblemKind,
    max_jobs: u32,
    max_weight: u64,
) -> SchedulingInstance {
    let kinds = rng.gen_range(1..=2);
    let m = rng.gen_range(1..=3);
    let machines: Vec<Machine> = (0..m)
        .map(|_| Machine {
            kind: rng.gen_range(0..kinds),
            speed: 1,
        })
        .collect();
    let theta = rng.gen_range(1..=3);
    let total = rng.gen_range(0..=max_jobs);
    let counts = split(rng, total, theta);
    let types = counts
        .into_iter()
        .map(|n| {
            let mut processing: Vec<Option<u64>> = (0..kinds)
                .map(|_| rng.gen_bool(0.8).then(|| rng.gen_range(1..=3)))
                .collect();
            // keep the type runnable on some present machine
            if machines.iter().all(|mc| processing[mc.kind].is_none()) {
                let k = machines[rng.gen_range(0..m)].kind;
                processing[k] = Some(rng.gen_range(1..=3));
            }
            JobType {
                processing,
                weight: rng.gen_range(1..=max_weight),
                multiplicity: n.into(),
            }
        })
        .collect();
    SchedulingInstance::new(problem, kinds, machines, types).unwrap()
}

/// Unrelated machines: K <= 2, m <= 3, p_max <= 3, at most 8 jobs.
pub fn random_rcmax(seed: u64) -> SchedulingInstance {
    random_unrelated(&mut rng(seed), ProblemKind::RCmax, 8, 1)
}

/// Weighted completion: K <= 2, m <= 3, p, w <= 3, at most 7 jobs.
pub fn random_rwc(seed: u64) -> SchedulingInstance {
    random_unrelated(&mut rng(seed), ProblemKind::RWc, 7, 3)
}

/// Small n-fold program: r, s <= 2, t <= 4, n <= 4, entries in [-2, 2],
/// bound widths <= 5, at most 8 coordinates. Half of the instances get a
/// right-hand side from a random box point, so they are feasible.
pub fn random_nfold(seed: u64) -> NFoldInstance {
    let mut rng = rng(seed);
    let t = rng.gen_range(1..=4);
    let n = rng.gen_range(1..=(8 / t).min(4));
    let r = rng.gen_range(0..=2);
    let s = rng.gen_range(if r == 0 { 1 } else { 0 }..=2);
    let entry = |rng: &mut ChaCha8Rng| rng.gen_range(-2i64..=2);
    let a1: Vec<i64> = (0..r * t).map(|_| entry(&mut rng)).collect();
    let a2: Vec<i64> = (0..s * t).map(|_| entry(&mut rng)).collect();
    let a1 = IntMatrix::from_i64(r, t, &a1).unwrap();
    let a2 = IntMatrix::from_i64(s, t, &a2).unwrap();
    let dim = n * t;
    let lower: Vec<i64> = (0..dim).map(|_| rng.gen_range(-2..=1)).collect();
    let upper: Vec<i64> = lower.iter().map(|&l| l + rng.gen_range(0..=5)).collect();
    let quad = (0..dim)
        .map(|_| BigRational::new(rng.gen_range(0..=2).into(), rng.gen_range(1..=2).into()))
        .collect();
    let lin = (0..dim)
        .map(|_| BigRational::from_integer(rng.gen_range(-3..=3).into()))
        .collect();
    let objective = SeparableQuadObjective::new(quad, lin).unwrap();
    let big = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
    let probe = NFoldInstance::new(
        a1.clone(),
        a2.clone(),
        n,
        vec![BigInt::from(0); r + n * s],
        big(&lower),
        big(&upper),
        objective.clone(),
    )
    .unwrap();
    let rhs = if rng.gen_bool(0.5) {
        let x: Vec<i64> = lower
            .iter()
            .zip(&upper)
            .map(|(&l, &u)| rng.gen_range(l..=u))
            .collect();
        probe.constraint_values(&big(&x)).unwrap()
    } else {
        (0..r + n * s)
            .map(|_| BigInt::from(rng.gen_range(-4..=4)))
            .collect()
    };
    NFoldInstance::new(a1, a2, n, rhs, big(&lower), big(&upper), objective).unwrap()
}
