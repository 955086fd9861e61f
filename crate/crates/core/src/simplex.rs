//! Dense two-phase simplex with Bland's rule, for the small feasibility and
//! pointedness questions that arise in cone geometry.

use crate::linalg::{Mat, Vector};

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vector, value: f64 },
    Infeasible,
    Unbounded,
}

const PIVOT_EPS: f64 = 1e-11;

/// Maximizes `c^T x` subject to `a x = b`, `x >= 0`.
pub fn maximize(c: &Vector, a: &Mat, b: &Vector) -> LpOutcome {
    let (m, n) = a.shape();
    assert_eq!(c.len(), n);
    assert_eq!(b.len(), m);

    // Tableau columns: n structural, m artificial, rhs.
    let width = n + m + 1;
    let mut t = Mat::zeros(m, width);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(i, j)] = sign * a[(i, j)];
        }
        t[(i, n + i)] = 1.0;
        t[(i, width - 1)] = sign * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let scale = 1.0 + a.amax() + b.amax();

    let mut phase1 = Vector::zeros(n + m);
    for i in 0..m {
        phase1[n + i] = -1.0;
    }
    if run(&mut t, &mut basis, &phase1, n + m, scale).is_err() {
        return LpOutcome::Unbounded;
    }
    let infeasibility: f64 = basis
        .iter()
        .enumerate()
        .filter(|(_, &bv)| bv >= n)
        .map(|(i, _)| t[(i, width - 1)])
        .sum();
    if infeasibility > 1e-9 * scale {
        return LpOutcome::Infeasible;
    }

    // Drive remaining artificials out of the basis where possible.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[(i, j)].abs() > PIVOT_EPS * scale) {
                pivot(&mut t, i, j);
                basis[i] = j;
            }
        }
    }

    let mut cost = Vector::zeros(n + m);
    cost.rows_mut(0, n).copy_from(c);
    if run(&mut t, &mut basis, &cost, n, scale).is_err() {
        return LpOutcome::Unbounded;
    }
    let mut x = Vector::zeros(n);
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[(i, width - 1)].max(0.0);
        }
    }
    let value = c.dot(&x);
    LpOutcome::Optimal { x, value }
}

/// Simplex iterations over columns `0..allowed`. `Err` signals unboundedness.
fn run(t: &mut Mat, basis: &mut [usize], cost: &Vector, allowed: usize, scale: f64) -> Result<(), ()> {
    let (m, width) = t.shape();
    let rhs = width - 1;
    let max_iter = 50 * (width + m).max(10);
    for _ in 0..max_iter {
        let entering = (0..allowed).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let mut reduced = cost[j];
            for i in 0..m {
                reduced -= cost[basis[i]] * t[(i, j)];
            }
            reduced > 1e-10 * scale
        });
        let Some(e) = entering else { return Ok(()) };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[(i, e)];
            if a > PIVOT_EPS * scale {
                let ratio = t[(i, rhs)] / a;
                let better = match leave {
                    None => true,
                    Some((k, best)) => ratio < best - 1e-14 * scale || (ratio <= best + 1e-14 * scale && basis[i] < basis[k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else { return Err(()) };
        pivot(t, r, e);
        basis[r] = e;
    }
    Ok(())
}

fn pivot(t: &mut Mat, r: usize, e: usize) {
    let p = t[(r, e)];
    let mut row = t.row(r).clone_owned();
    row /= p;
    t.set_row(r, &row);
    for i in 0..t.nrows() {
        if i != r {
            let f = t[(i, e)];
            if f != 0.0 {
                let updated = t.row(i) - &row * f;
                t.set_row(i, &updated);
            }
        }
    }
}

/// Decides whether the subspace spanned by the columns of `basis` meets the
/// nonnegative orthant outside the origin. Returns a witness `u >= 0` with
/// `max(u) = 1` scaled entries when it does.
///
/// Solves `max 1^T u` over `u = basis * y`, `0 <= u <= 1`, `y` free.
pub fn orthant_ray_in_span(basis: &Mat) -> Option<Vector> {
    let (n, k) = basis.shape();
    if k == 0 || n == 0 {
        return None;
    }
    // Variables: u (n), y+ (k), y- (k), s (n).
    let nv = 2 * n + 2 * k;
    let mut a = Mat::zeros(2 * n, nv);
    let mut b = Vector::zeros(2 * n);
    for i in 0..n {
        a[(i, i)] = 1.0;
        for j in 0..k {
            a[(i, n + j)] = -basis[(i, j)];
            a[(i, n + k + j)] = basis[(i, j)];
        }
        a[(n + i, i)] = 1.0;
        a[(n + i, n + 2 * k + i)] = 1.0;
        b[n + i] = 1.0;
    }
    let mut c = Vector::zeros(nv);
    for i in 0..n {
        c[i] = 1.0;
    }
    match maximize(&c, &a, &b) {
        LpOutcome::Optimal { x, value } if value > 1e-7 => {
            let u = x.rows(0, n).clone_owned();
            let top = u.amax();
            Some(u / top)
        }
        _ => None,
    }
}
