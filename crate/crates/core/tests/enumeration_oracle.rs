//! Two-dimensional enumeration against a case-by-case closed form.

mod common;

use lcp_atlas::lcp::{solve_enumerate, LcpInstance, SolutionCount, DEFAULT_TOL};
use lcp_atlas::{Mat, Vector};

/// All `z` solving the 2x2 problem, one support at a time, with Cramer's rule.
fn oracle(m: &Mat, q: &Vector) -> Vec<[f64; 2]> {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let (q1, q2) = (q[0], q[1]);
    let mut out = vec![];
    if q1 >= 0.0 && q2 >= 0.0 {
        out.push([0.0, 0.0]);
    }
    let z1 = -q1 / a;
    if z1 > 0.0 && c * z1 + q2 >= 0.0 {
        out.push([z1, 0.0]);
    }
    let z2 = -q2 / d;
    if z2 > 0.0 && b * z2 + q1 >= 0.0 {
        out.push([0.0, z2]);
    }
    let det = a * d - b * c;
    let (y1, y2) = ((-q1 * d + b * q2) / det, (-a * q2 + c * q1) / det);
    if y1 > 0.0 && y2 > 0.0 {
        out.push([y1, y2]);
    }
    out
}

#[test]
fn matches_closed_form_on_random_instances() {
    let mut rng = common::rng(11);
    for _ in 0..2000 {
        let m = common::gaussian_mat(&mut rng, 2, 2);
        let q = common::gaussian_vec(&mut rng, 2);
        let expected = oracle(&m, &q);
        let sols = solve_enumerate(&LcpInstance::new(m.clone(), q.clone()).unwrap(), DEFAULT_TOL).unwrap();
        assert_eq!(sols.count, SolutionCount::Finite(expected.len()), "M = {m}, q = {q}");
        for z in expected {
            let z = Vector::from_row_slice(&z);
            assert!(sols.isolated.iter().any(|s| common::close(&s.z, &z, 1e-9)));
        }
    }
}
