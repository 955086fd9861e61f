//! Lemke's complementary pivoting with covering vector `d = 1` and a
//! lexicographic ratio test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lcp::LcpInstance;
use crate::linalg::{self, Mat, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LemkeOutcome {
    Solution {
        #[serde(with = "linalg::serde_vec")]
        z: Vector,
        #[serde(with = "linalg::serde_vec")]
        w: Vector,
        pivots: usize,
    },
    RayTermination { pivots: usize },
}

impl LemkeOutcome {
    pub fn solution(&self) -> Option<&Vector> {
        match self {
            LemkeOutcome::Solution { z, .. } => Some(z),
            LemkeOutcome::RayTermination { .. } => None,
        }
    }
}

/// Runs Lemke's method. Variables are numbered `w_0..w_{n-1}`, `z_0..z_{n-1}`, `z0`.
pub fn solve_lemke(inst: &LcpInstance, tol: f64, max_pivots: usize) -> Result<LemkeOutcome> {
    let n = inst.dim();
    let q = &inst.q;
    if q.iter().all(|&v| v >= -tol) {
        return Ok(LemkeOutcome::Solution { z: Vector::zeros(n), w: q.map(|v| v.max(0.0)), pivots: 0 });
    }

    // Tableau [I | -M | -d | q]; the first n columns track B^{-1}.
    let cols = 2 * n + 2;
    let rhs = cols - 1;
    let artificial = 2 * n;
    let mut t = Mat::zeros(n, cols);
    for i in 0..n {
        t[(i, i)] = 1.0;
        for j in 0..n {
            t[(i, n + j)] = -inst.m[(i, j)];
        }
        t[(i, artificial)] = -1.0;
        t[(i, rhs)] = q[i];
    }
    let mut basis: Vec<usize> = (0..n).collect();

    // Initial pivot: the artificial enters on the row of the most negative q, ties broken lexicographically.
    let mut r = 0;
    for i in 1..n {
        if lex_less(&t, i, r, 1.0, 1.0, n) {
            r = i;
        }
    }
    pivot(&mut t, r, artificial);
    let mut leaving = basis[r];
    basis[r] = artificial;
    let mut pivots = 1;

    loop {
        let entering = complement(leaving, n);
        let scale = 1.0 + t.column(entering).amax();
        let rows: Vec<usize> = (0..n).filter(|&i| t[(i, entering)] > 1e-12 * scale).collect();
        let Some(&first) = rows.first() else {
            return Ok(LemkeOutcome::RayTermination { pivots });
        };
        let mut r = first;
        for &i in &rows[1..] {
            if lex_less(&t, i, r, t[(i, entering)], t[(r, entering)], n) {
                r = i;
            }
        }
        pivot(&mut t, r, entering);
        leaving = basis[r];
        basis[r] = entering;
        pivots += 1;
        if leaving == artificial {
            break;
        }
        if pivots >= max_pivots {
            return Err(Error::PivotLimitExceeded(max_pivots));
        }
    }

    let mut z = Vector::zeros(n);
    for (i, &b) in basis.iter().enumerate() {
        if (n..2 * n).contains(&b) {
            z[b - n] = t[(i, rhs)].max(0.0);
        }
    }
    let w = &inst.m * &z + q;
    Ok(LemkeOutcome::Solution { z, w, pivots })
}

fn complement(var: usize, n: usize) -> usize {
    if var < n {
        var + n
    } else {
        var - n
    }
}

/// Lexicographic comparison of rows `a` and `b` of `[rhs | B^{-1}]`, each divided by its pivot entry.
fn lex_less(t: &Mat, a: usize, b: usize, pa: f64, pb: f64, n: usize) -> bool {
    let rhs = t.ncols() - 1;
    let key = |row: usize, p: f64, k: usize| if k == 0 { t[(row, rhs)] / p } else { t[(row, k - 1)] / p };
    for k in 0..=n {
        let (x, y) = (key(a, pa, k), key(b, pb, k));
        let tol = 1e-12 * (1.0 + x.abs().max(y.abs()));
        if x < y - tol {
            return true;
        }
        if x > y + tol {
            return false;
        }
    }
    false
}

fn pivot(t: &mut Mat, r: usize, e: usize) {
    let p = t[(r, e)];
    let row = t.row(r) / p;
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
