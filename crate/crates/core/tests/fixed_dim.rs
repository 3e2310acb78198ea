mod common;

use common::int;
use hmsched_core::fixed_dim::{solve_small_convex_ip, FixedDimConfig, QuadForm, SmallConvexIP};
use hmsched_core::{IntMatrix, SeparableQuadObjective};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

fn random_program(seed: u64) -> SmallConvexIP {
    let mut rng = common::rng(seed);
    let d = rng.gen_range(1..=4);
    let rows = rng.gen_range(0..=2);
    let e: Vec<i64> = (0..rows * d).map(|_| rng.gen_range(-2..=2)).collect();
    let a = IntMatrix::from_i64(rows, d, &e).unwrap();
    let lower: Vec<BigInt> = (0..d).map(|_| rng.gen_range(-2..=0).into()).collect();
    let upper: Vec<BigInt> = lower.iter().map(|l| l + rng.gen_range(0..=3)).collect();
    let x: Vec<BigInt> = lower
        .iter()
        .zip(&upper)
        .map(|(l, u)| l + rng.gen_range(0..=(u - l).try_into().unwrap_or(0i64)))
        .collect();
    let rhs = if rng.gen_bool(0.7) {
        a.mul_vec(&x).unwrap()
    } else {
        (0..rows).map(|_| rng.gen_range(-3..=3).into()).collect()
    };
    let objective = SeparableQuadObjective::new(
        (0..d).map(|_| int(rng.gen_range(0..=2))).collect(),
        (0..d).map(|_| int(rng.gen_range(-3..=3))).collect(),
    )
    .unwrap();
    let forms = (0..rng.gen_range(0..=2))
        .map(|_| QuadForm {
            coefficients: (0..d).map(|_| rng.gen_range(-1..=2).into()).collect(),
            weight: BigRational::new(rng.gen_range(0..=3).into(), 2.into()),
        })
        .collect();
    SmallConvexIP::new(a, rhs, lower, upper, objective, forms).unwrap()
}

/// Plain box enumeration; keeps the first (lexicographically smallest) minimizer.
fn enumerate(p: &SmallConvexIP) -> Option<(Vec<BigInt>, BigRational)> {
    let d = p.dim();
    let mut x = p.lower().to_vec();
    let mut best: Option<(Vec<BigInt>, BigRational)> = None;
    loop {
        if p.is_feasible(&x).unwrap() {
            let v = p.eval(&x).unwrap();
            if best.as_ref().is_none_or(|(_, b)| &v < b) {
                best = Some((x.clone(), v));
            }
        }
        let mut i = d;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if x[i] < p.upper()[i] {
                x[i] += 1;
                break;
            }
            x[i] = p.lower()[i].clone();
        }
    }
}

#[test]
fn agrees_with_enumeration() {
    for seed in 0..100 {
        let p = random_program(seed);
        let got = solve_small_convex_ip(&p, &FixedDimConfig::default()).unwrap();
        let want = enumerate(&p);
        assert_eq!(got.map(|s| (s.x, s.value)), want, "seed {seed}");
    }
}

#[test]
fn pruning_does_not_change_the_answer() {
    let off = FixedDimConfig {
        prune: false,
        ..FixedDimConfig::default()
    };
    for seed in 100..200 {
        let p = random_program(seed);
        let a = solve_small_convex_ip(&p, &FixedDimConfig::default()).unwrap();
        let b = solve_small_convex_ip(&p, &off).unwrap();
        assert_eq!(
            a.as_ref().map(|s| &s.x),
            b.as_ref().map(|s| &s.x),
            "seed {seed}"
        );
        if let (Some(a), Some(b)) = (a, b) {
            assert!(a.nodes <= b.nodes);
        }
    }
}
