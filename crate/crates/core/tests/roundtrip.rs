//! Solutions of `lcp(M, q)` and solutions of `f_M(x) = q` are in bijection.

mod common;

use common::close;
use lcp_atlas::lcp::{f_eval, solve_enumerate, x_from_z, z_from_x, LcpInstance, SolutionCount, DEFAULT_TOL};
use lcp_atlas::{Mat, Vector};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (Mat, Vector)> {
    (1usize..=6).prop_flat_map(|n| {
        (prop::collection::vec(-1.0f64..1.0, n * n), prop::collection::vec(-1.0f64..1.0, n))
            .prop_map(move |(m, q)| (Mat::from_row_slice(n, n, &m), Vector::from_vec(q)))
    })
}

fn point() -> impl Strategy<Value = (Mat, Vector)> {
    (1usize..=6).prop_flat_map(|n| {
        (prop::collection::vec(-1.0f64..1.0, n * n), prop::collection::vec(-1.0f64..1.0, n))
            .prop_map(move |(m, x)| (Mat::from_row_slice(n, n, &m), Vector::from_vec(x)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn every_solution_is_complementary_and_a_root((m, q) in instance()) {
        let sols = solve_enumerate(&LcpInstance::new(m.clone(), q.clone()).unwrap(), DEFAULT_TOL).unwrap();
        for s in &sols.isolated {
            let w = &m * &s.z + &q;
            prop_assert!(s.z.min() >= -1e-9 && w.min() >= -1e-8 * (1.0 + q.amax()));
            prop_assert!(s.z.dot(&w).abs() <= 1e-8 * (1.0 + q.norm_squared()));
            prop_assert!(close(&f_eval(&m, &s.x).unwrap(), &q, 1e-9));
            prop_assert!(close(&z_from_x(&s.x), &s.z, 1e-9));
            prop_assert!(close(&x_from_z(&m, &q, &s.z), &s.x, 1e-9));
        }
    }

    #[test]
    fn every_root_is_found((m, x) in point()) {
        prop_assume!(x.iter().all(|v| v.abs() > 1e-3));
        let q = f_eval(&m, &x).unwrap();
        let sols = solve_enumerate(&LcpInstance::new(m.clone(), q.clone()).unwrap(), DEFAULT_TOL).unwrap();
        prop_assume!(!sols.count.is_continuum());
        prop_assert!(sols.isolated.iter().any(|s| close(&s.x, &x, 1e-7)), "x = {:?} missing", x.as_slice());
        prop_assert_eq!(sols.count, SolutionCount::Finite(sols.isolated.len()));
    }

    /// `x = (M - I) z + q`, `z = [-x]^+` and `w = [x]^+` describe the same point.
    #[test]
    fn representations_agree((m, x) in point()) {
        let n = x.len();
        let q = f_eval(&m, &x).unwrap();
        let z = z_from_x(&x);
        let w = x.map(|v| v.max(0.0));
        prop_assert!(close(&(&m * &z + &q), &w, 1e-12));
        prop_assert!(close(&((&m - Mat::identity(n, n)) * &z + &q), &x, 1e-12));
        prop_assert!(close(&x_from_z(&m, &q, &z), &x, 1e-12));
    }
}
