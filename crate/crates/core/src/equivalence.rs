//! Transformations preserving LCP-equivalence and the planar normal form.
//!
//! Each transformation `M -> N` comes with maps `phi` on right-hand sides and
//! `psi` on solutions such that `f_N = phi o f_M o psi`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cone::angle_of;
use crate::error::{Error, Result};
use crate::index_set::IndexSet;
use crate::linalg::{self, ensure_len, ensure_square, submatrix, Mat, Vector};

const TAU: f64 = 2.0 * PI;

struct Blocks {
    beta: Vec<usize>,
    rest: Vec<usize>,
    inv_bb: Mat,
}

fn blocks(m: &Mat, beta: &IndexSet) -> Result<Blocks> {
    let n = ensure_square(m, "M")?;
    if beta.dim() != n {
        return Err(Error::DimensionMismatch("pivot set dimension differs from M".into()));
    }
    let b = beta.members();
    let rest = beta.complement().members();
    let inv_bb = if b.is_empty() {
        Mat::zeros(0, 0)
    } else {
        linalg::inverse(&submatrix(m, &b, &b)).ok_or_else(|| Error::SingularPivotBlock(beta.to_string()))?
    };
    Ok(Blocks { beta: b, rest, inv_bb })
}

/// Principal pivotal transform of `M` with respect to `beta`.
pub fn ppt(m: &Mat, beta: &IndexSet) -> Result<Mat> {
    let Blocks { beta: b, rest: c, inv_bb } = blocks(m, beta)?;
    if b.is_empty() {
        return Ok(m.clone());
    }
    let m_bc = submatrix(m, &b, &c);
    let m_cb = submatrix(m, &c, &b);
    let m_cc = submatrix(m, &c, &c);
    let n_bb = inv_bb.clone();
    let n_bc = -&inv_bb * &m_bc;
    let n_cb = &m_cb * &inv_bb;
    let n_cc = &m_cc - &m_cb * &inv_bb * &m_bc;
    let mut out = Mat::zeros(m.nrows(), m.ncols());
    for (i, &bi) in b.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[(bi, bj)] = n_bb[(i, j)];
        }
        for (j, &cj) in c.iter().enumerate() {
            out[(bi, cj)] = n_bc[(i, j)];
        }
    }
    for (i, &ci) in c.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[(ci, bj)] = n_cb[(i, j)];
        }
        for (j, &cj) in c.iter().enumerate() {
            out[(ci, cj)] = n_cc[(i, j)];
        }
    }
    Ok(out)
}

/// The right-hand-side map `phi` of the pivot: `lcp(M, q)` and
/// `lcp(ppt(M, beta), phi(q))` have corresponding solutions.
pub fn pivot_q_map(m: &Mat, beta: &IndexSet, q: &Vector) -> Result<Vector> {
    let Blocks { beta: b, rest: c, inv_bb } = blocks(m, beta)?;
    ensure_len(q, m.nrows(), "q")?;
    let q_b = linalg::subvector(q, &b);
    let y_b = -(&inv_bb * &q_b);
    let y_c = linalg::subvector(q, &c) - submatrix(m, &c, &b) * (&inv_bb * &q_b);
    Ok(scatter(&b, &y_b, &c, &y_c))
}

/// Inverse of [`pivot_q_map`].
pub fn pivot_q_map_inverse(m: &Mat, beta: &IndexSet, q: &Vector) -> Result<Vector> {
    let Blocks { beta: b, rest: c, .. } = blocks(m, beta)?;
    ensure_len(q, m.nrows(), "q")?;
    let q_b = linalg::subvector(q, &b);
    let y_b = -(submatrix(m, &b, &b) * &q_b);
    let y_c = linalg::subvector(q, &c) - submatrix(m, &c, &b) * &q_b;
    Ok(scatter(&b, &y_b, &c, &y_c))
}

/// The solution map of the pivot: negates the coordinates in `beta`.
/// It is an involution, so it also maps solutions back.
pub fn pivot_x_map(beta: &IndexSet, x: &Vector) -> Vector {
    Vector::from_fn(x.len(), |i, _| if beta.contains(i) { -x[i] } else { x[i] })
}

fn scatter(b: &[usize], y_b: &Vector, c: &[usize], y_c: &Vector) -> Vector {
    let mut out = Vector::zeros(b.len() + c.len());
    for (i, &bi) in b.iter().enumerate() {
        out[bi] = y_b[i];
    }
    for (i, &ci) in c.iter().enumerate() {
        out[ci] = y_c[i];
    }
    out
}

fn check_perm(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::InvalidParameter { name: "perm".into(), reason: format!("not a permutation of 0..{n}") });
    }
    Ok(())
}

/// `P^T M P` with `P e_i = e_{perm[i]}`, i.e. `N[i][j] = M[perm[i]][perm[j]]`.
/// Solutions map as `x_N[i] = x_M[perm[i]]` and `q_N[i] = q_M[perm[i]]`.
pub fn permute_conjugate(m: &Mat, perm: &[usize]) -> Result<Mat> {
    let n = ensure_square(m, "M")?;
    check_perm(perm, n)?;
    Ok(Mat::from_fn(n, n, |i, j| m[(perm[i], perm[j])]))
}

/// `v_N[i] = v_M[perm[i]]`, for right-hand sides and solutions alike.
pub fn permute_vector(v: &Vector, perm: &[usize]) -> Vector {
    Vector::from_fn(v.len(), |i, _| v[perm[i]])
}

fn check_scale(d: &Vector, n: usize) -> Result<()> {
    ensure_len(d, n, "d")?;
    if d.iter().any(|&v| v <= 0.0) {
        return Err(Error::NonpositiveScale);
    }
    Ok(())
}

/// `D^{-1} M D`; solutions and right-hand sides map by `D^{-1}`.
pub fn diag_conjugate(m: &Mat, d: &Vector) -> Result<Mat> {
    let n = ensure_square(m, "M")?;
    check_scale(d, n)?;
    Ok(Mat::from_fn(n, n, |i, j| m[(i, j)] * d[j] / d[i]))
}

/// `M D`; right-hand sides are unchanged and `z_N = D^{-1} z_M`.
pub fn diag_scale(m: &Mat, d: &Vector) -> Result<Mat> {
    let n = ensure_square(m, "M")?;
    check_scale(d, n)?;
    Ok(Mat::from_fn(n, n, |i, j| m[(i, j)] * d[j]))
}

/// The normal form of a 2x2 matrix: `r_i = 0` marks a zero column; otherwise
/// `theta1` is the counterclockwise angle of `-M_1` from `e_1` and `theta2`
/// that of `-M_2` from `e_2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalForm2D {
    pub r1: u8,
    pub r2: u8,
    pub theta1: Option<f64>,
    pub theta2: Option<f64>,
}

pub fn normal_form_2d(m: &Mat) -> Result<NormalForm2D> {
    if m.nrows() != 2 || m.ncols() != 2 {
        return Err(Error::DimensionUnsupported { expected: "2".into(), got: m.nrows() });
    }
    let angle = |j: usize, offset: f64| {
        let c = -m.column(j);
        (c.norm() > 0.0).then(|| (angle_of(&[c[0], c[1]]) - offset).rem_euclid(TAU))
    };
    let theta1 = angle(0, 0.0);
    let theta2 = angle(1, PI / 2.0);
    Ok(NormalForm2D { r1: theta1.is_some() as u8, r2: theta2.is_some() as u8, theta1, theta2 })
}

/// `M(theta1, theta2)`: unit columns with `-M_1` at angle `theta1` from `e_1`
/// and `-M_2` at angle `theta2` from `e_2`.
pub fn normal_form_matrix(theta1: f64, theta2: f64) -> Mat {
    let a1 = theta1 + PI;
    let a2 = theta2 + 1.5 * PI;
    Mat::from_column_slice(2, 2, &[a1.cos(), a1.sin(), a2.cos(), a2.sin()])
}

/// Reconstructs the column-normalized matrix of a normal form.
pub fn matrix_from_normal_form(nf: &NormalForm2D) -> Mat {
    let full = normal_form_matrix(nf.theta1.unwrap_or(0.0), nf.theta2.unwrap_or(0.0));
    let mut out = full;
    if nf.theta1.is_none() {
        out.column_mut(0).fill(0.0);
    }
    if nf.theta2.is_none() {
        out.column_mut(1).fill(0.0);
    }
    out
}

/// The unstable families of 2x2 matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum UnstableFamily {
    /// Both columns vanish.
    Zero,
    /// Exactly one column vanishes.
    UColumn,
    /// Some complementary cone is a line through the origin.
    USubspace,
    /// Unstable but R0: the remaining degenerate configurations.
    UR0,
}

/// Angular distance on the circle.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Distance of `(theta1, theta2)` to the nearest unstable line of the square.
pub fn unstable_line_distance(theta1: f64, theta2: f64) -> f64 {
    let mut gaps = vec![angle_gap(theta2, theta1 + PI / 2.0), angle_gap(theta2, theta1 - PI / 2.0)];
    for line in [0.0, PI / 2.0, 1.5 * PI] {
        gaps.push(angle_gap(theta1, line));
        gaps.push(angle_gap(theta2, line));
    }
    gaps.into_iter().fold(f64::INFINITY, f64::min)
}

/// Unstable family of a normal form, checked in the order zero columns,
/// subspace lines, R0 lines.
///
/// The subspace lines are `theta2 = theta1 + pi/2`, `theta1 = 3pi/2` and
/// `theta2 = pi/2`. The R0 lines are `theta2 = theta1 - pi/2`,
/// `theta1 = pi/2`, `theta2 = 3pi/2`, together with `theta1 = 0` and
/// `theta2 = 0`, where `-M_k` lies on the ray of `e_k`.
pub fn unstable_family_2d(nf: &NormalForm2D, tol: f64) -> Option<UnstableFamily> {
    let (t1, t2) = match (nf.theta1, nf.theta2) {
        (None, None) => return Some(UnstableFamily::Zero),
        (None, _) | (_, None) => return Some(UnstableFamily::UColumn),
        (Some(a), Some(b)) => (a, b),
    };
    let near = |a: f64, b: f64| angle_gap(a, b) <= tol;
    if near(t2, t1 + PI / 2.0) || near(t1, 1.5 * PI) || near(t2, PI / 2.0) {
        return Some(UnstableFamily::USubspace);
    }
    if near(t2, t1 - PI / 2.0) || near(t1, PI / 2.0) || near(t2, 1.5 * PI) || near(t1, 0.0) || near(t2, 0.0) {
        return Some(UnstableFamily::UR0);
    }
    None
}
