mod common;

use hmsched_core::graver::{
    conformal_decompose, conformally_precedes, default_radius, graver_basis_box,
};
use hmsched_core::IntMatrix;
use num_bigint::BigInt;
use rand::Rng;

fn random_matrix(seed: u64) -> IntMatrix {
    let mut rng = common::rng(seed);
    let rows = rng.gen_range(1..=2);
    let cols = rng.gen_range(2..=3);
    let e: Vec<i64> = (0..rows * cols).map(|_| rng.gen_range(-2..=2)).collect();
    IntMatrix::from_i64(rows, cols, &e).unwrap()
}

fn norm(v: &[i64]) -> i64 {
    v.iter().map(|x| x.abs()).max().unwrap_or(0)
}

#[test]
fn closed_under_negation() {
    for seed in 0..20 {
        let a = random_matrix(seed);
        let basis = graver_basis_box(&a, 4).unwrap();
        for g in basis.elements() {
            let neg: Vec<i64> = g.iter().map(|x| -x).collect();
            assert!(basis.elements().contains(&neg), "seed {seed}: {g:?}");
        }
    }
}

#[test]
fn smaller_radius_keeps_exactly_the_short_elements() {
    for seed in 0..20 {
        let a = random_matrix(seed);
        let big = graver_basis_box(&a, 5).unwrap();
        let small = graver_basis_box(&a, 3).unwrap();
        let short: Vec<Vec<i64>> = big
            .elements()
            .iter()
            .filter(|g| norm(g) <= 3)
            .cloned()
            .collect();
        assert_eq!(small.elements(), &short[..], "seed {seed}");
    }
}

#[test]
fn elements_are_pairwise_incomparable() {
    let a = IntMatrix::from_i64(1, 3, &[1, 2, -1]).unwrap();
    let basis = graver_basis_box(&a, default_radius(&a)).unwrap();
    for u in basis.elements() {
        for v in basis.elements() {
            if u != v {
                assert!(!conformally_precedes(u, v), "{u:?} ⊑ {v:?}");
            }
        }
    }
}

#[test]
fn kernel_vectors_of_one_two_minus_one_decompose() {
    let a = IntMatrix::from_i64(1, 3, &[1, 2, -1]).unwrap();
    let basis = graver_basis_box(&a, default_radius(&a)).unwrap();
    assert_eq!(basis.len(), 8);
    let mut checked = 0;
    for x in -6i64..=6 {
        for y in -6i64..=6 {
            let z = x + 2 * y;
            if z.abs() > 6 || (x, y, z) == (0, 0, 0) {
                continue;
            }
            let v = vec![x, y, z];
            let parts = conformal_decompose(&v, &basis).unwrap().unwrap();
            let mut sum = vec![0i64; 3];
            for p in &parts {
                assert!(conformally_precedes(p, &v));
                for (s, e) in sum.iter_mut().zip(p) {
                    *s += e;
                }
            }
            assert_eq!(sum, v);
            checked += 1;
        }
    }
    assert!(checked > 50);
}

#[test]
fn identity_has_trivial_kernel() {
    let a = IntMatrix::from_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
    assert!(graver_basis_box(&a, 3).unwrap().is_empty());
    let v = [BigInt::from(1), BigInt::from(0)];
    assert_ne!(a.mul_vec(&v).unwrap(), vec![BigInt::from(0); 2]);
}

#[test]
fn non_kernel_vector_rejected() {
    let a = IntMatrix::from_i64(1, 2, &[1, 1]).unwrap();
    let basis = graver_basis_box(&a, 2).unwrap();
    assert!(conformal_decompose(&[1, 0], &basis).is_err());
}
