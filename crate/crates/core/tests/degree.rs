//! Degree, the P and R0 properties and stability.

mod common;

use lcp_atlas::analysis::{degree, degree_at, is_p, is_r0, random_unit};
use lcp_atlas::stability::{is_lcp_stable, minors_sufficient, STABILITY_TOL};
use rand::Rng;

#[test]
fn degree_is_global_for_r0_matrices() {
    let mut rng = common::rng(31);
    let mut tested = 0;
    while tested < 50 {
        let n = rng.gen_range(2..=4);
        let m = common::gaussian_mat(&mut rng, n, n);
        if !is_r0(&m).unwrap().is_r0 {
            continue;
        }
        tested += 1;
        let mut seen = None;
        for _ in 0..100 {
            let q = random_unit(n, &mut rng);
            if let Some((d, _)) = degree_at(&m, &q, 1e-8).unwrap() {
                assert_eq!(*seen.get_or_insert(d), d, "M = {m}");
            }
        }
        assert!(seen.is_some());
    }
}

#[test]
fn p_matrices_have_degree_one() {
    let mut rng = common::rng(32);
    for case in 0..100 {
        let n = 1 + case % 5;
        let m = common::random_p_matrix(&mut rng, n);
        assert_eq!(degree(&m, case as u64, 1e-8).unwrap().degree, 1);
    }
}

#[test]
fn nonzero_minors_imply_stability() {
    let mut rng = common::rng(33);
    let mut hits = 0;
    for case in 0..200 {
        let n = 2 + case % 3;
        let m = common::gaussian_mat(&mut rng, n, n);
        if minors_sufficient(&m).unwrap() {
            hits += 1;
            assert!(is_lcp_stable(&m, STABILITY_TOL).unwrap(), "M = {m}");
        }
    }
    assert!(hits > 20);
    let p = common::random_p_matrix(&mut rng, 3);
    assert!(is_p(&p) && is_lcp_stable(&p, STABILITY_TOL).unwrap());
}
