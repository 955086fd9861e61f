//! Lawson–Hanson active-set nonnegative least squares.

use crate::linalg::{lstsq, Mat, Vector};

#[derive(Debug, Clone)]
pub struct NnlsSolution {
    pub p: Vector,
    pub residual: f64,
}

/// Minimizes `||g p - v||` over `p >= 0`.
///
/// Zero columns are pinned to zero. The iteration count is capped at
/// `100 * m`; the best iterate found so far is returned if the cap is hit.
pub fn nnls(g: &Mat, v: &Vector) -> NnlsSolution {
    let (n, m) = g.shape();
    assert_eq!(n, v.len(), "nnls dimension mismatch");
    let mut p = Vector::zeros(m);
    if m == 0 {
        return NnlsSolution { residual: v.norm(), p };
    }

    let usable: Vec<bool> = (0..m).map(|j| g.column(j).norm() > 0.0).collect();
    let scale = g.norm() * v.norm().max(1.0);
    let dual_tol = 1e-13 * scale.max(f64::MIN_POSITIVE);
    let mut passive = vec![false; m];
    let cap = 100 * m;
    let mut iters = 0;
    let mut last_added: Option<usize> = None;

    loop {
        let resid = v - g * &p;
        let w = g.transpose() * &resid;
        let candidate = (0..m)
            .filter(|&j| usable[j] && !passive[j] && w[j] > dual_tol)
            .max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(t) = candidate else { break };
        if last_added == Some(t) {
            // Re-selecting the column that was just rejected means no progress is possible.
            break;
        }
        passive[t] = true;
        last_added = Some(t);

        loop {
            iters += 1;
            if iters > cap {
                return finish(g, v, p);
            }
            let z = passive_solve(g, v, &passive);
            let blocking: Vec<usize> = (0..m).filter(|&j| passive[j] && z[j] <= 0.0).collect();
            if blocking.is_empty() {
                p = z;
                last_added = None;
                break;
            }
            let mut alpha = f64::INFINITY;
            for &j in &blocking {
                let denom = p[j] - z[j];
                if denom > 0.0 {
                    alpha = alpha.min(p[j] / denom);
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            p += (z - &p) * alpha;
            for j in 0..m {
                if passive[j] && p[j] <= 1e-15 * (1.0 + p.amax()) {
                    passive[j] = false;
                    p[j] = 0.0;
                }
            }
            if !passive.iter().any(|&b| b) {
                break;
            }
        }
    }
    finish(g, v, p)
}

fn finish(g: &Mat, v: &Vector, p: Vector) -> NnlsSolution {
    let p = p.map(|x| x.max(0.0));
    let residual = (g * &p - v).norm();
    NnlsSolution { p, residual }
}

fn passive_solve(g: &Mat, v: &Vector, passive: &[bool]) -> Vector {
    let cols: Vec<usize> = (0..passive.len()).filter(|&j| passive[j]).collect();
    let sub = Mat::from_fn(g.nrows(), cols.len(), |i, k| g[(i, cols[k])]);
    let sol = lstsq(&sub, v, 1e-14);
    let mut z = Vector::zeros(passive.len());
    for (k, &j) in cols.iter().enumerate() {
        z[j] = sol[k];
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{mat_from_rows, vector};

    #[test]
    fn identity_returns_positive_part() {
        let g = Mat::identity(3, 3);
        let s = nnls(&g, &vector(&[1.0, -2.0, 3.0]));
        assert!((s.p - vector(&[1.0, 0.0, 3.0])).norm() < 1e-14);
        assert!((s.residual - 2.0).abs() < 1e-14);
    }

    #[test]
    fn exact_membership_has_zero_residual() {
        let g = mat_from_rows(&[&[1.0, 1.0, 0.0], &[0.0, 1.0, 1.0]]);
        let v = vector(&[2.0, 3.0]);
        let s = nnls(&g, &v);
        assert!(s.residual < 1e-12);
        assert!(s.p.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn interior_point_is_recovered_exactly() {
        let g = mat_from_rows(&[&[1.0, 0.0, 0.027200845727458327], &[0.0, 1.0, 0.04235778516706633], &[0.0, 0.0, -0.29140778192427047]]);
        let v = vector(&[0.08176870846023379, 1.2027219379646623, -0.24007621109497526]);
        assert!(nnls(&g, &v).residual < 1e-15);
    }

    #[test]
    fn zero_columns_are_ignored() {
        let g = mat_from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let s = nnls(&g, &vector(&[-1.0, 1.0]));
        assert_eq!(s.p, vector(&[0.0, 0.0]));
        assert!((s.residual - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn projection_onto_ray() {
        let g = mat_from_rows(&[&[1.0], &[1.0]]);
        let s = nnls(&g, &vector(&[2.0, 0.0]));
        assert!((s.p[0] - 1.0).abs() < 1e-14);
        assert!((s.residual - 2f64.sqrt()).abs() < 1e-14);
    }
}
