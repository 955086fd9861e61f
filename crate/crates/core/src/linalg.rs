//! Dense linear-algebra helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// A matrix is numerically singular when `sigma_min <= SINGULAR_RATIO * sigma_max`.
pub const SINGULAR_RATIO: f64 = 1e-9;

/// Builds a matrix from row slices. Panics on ragged input; meant for literals.
pub fn mat_from_rows(rows: &[&[f64]]) -> Mat {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
    Mat::from_fn(r, c, |i, j| rows[i][j])
}

pub fn vector(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

pub fn rows_of(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn mat_from_nested(rows: &[Vec<f64>], what: &str) -> Result<Mat> {
    let r = rows.len();
    if r == 0 {
        return Err(Error::DimensionMismatch(format!("{what} has no rows")));
    }
    let c = rows[0].len();
    if c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::DimensionMismatch(format!("{what} rows must be nonempty and of equal length")));
    }
    let m = Mat::from_fn(r, c, |i, j| rows[i][j]);
    ensure_finite(&m, what)?;
    Ok(m)
}

pub fn ensure_finite(m: &Mat, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

pub fn ensure_square(m: &Mat, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be square and nonempty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub fn ensure_len(v: &Vector, n: usize, what: &str) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch(format!("{what} has length {}, expected {n}", v.len())));
    }
    if !v.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite(what.to_string()));
    }
    Ok(())
}

/// Singular values in decreasing order.
pub fn singular_values(m: &Mat) -> Vector {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vector::zeros(0);
    }
    m.clone().svd(false, false).singular_values
}

/// Scale-relative rank decision for square or rectangular matrices.
/// A matrix with fewer columns than rows is singular iff its columns are dependent.
pub fn is_singular(m: &Mat) -> bool {
    let s = singular_values(m);
    if s.len() < m.ncols() {
        return true;
    }
    let max = s.max();
    let min = s.min();
    max == 0.0 || min <= SINGULAR_RATIO * max
}

/// Number of singular values above `rel_cutoff` times the largest.
fn numerical_rank(m: &Mat, rel_cutoff: f64) -> usize {
    let s = singular_values(m);
    let max = s.iter().cloned().fold(0.0, f64::max);
    s.iter().filter(|&&v| max > 0.0 && v > rel_cutoff * max).count()
}

// Bases come from a column-pivoted QR; the singular values only fix the rank.
// Singular vectors from the SVD can be off by ~1e-9, which is too coarse for
// kernel directions of exactly singular matrices.

/// Orthonormal basis (as columns) of the numerical kernel of `m`.
pub fn null_space(m: &Mat) -> Mat {
    let (r, c) = m.shape();
    if c == 0 {
        return Mat::zeros(0, 0);
    }
    let rank = numerical_rank(m, SINGULAR_RATIO);
    if rank == 0 {
        return Mat::identity(c, c);
    }
    let mut a = Mat::zeros(c, r.max(c));
    a.view_mut((0, 0), (c, r)).copy_from(&m.transpose());
    let q = a.col_piv_qr().q();
    q.columns(rank, c - rank).into_owned()
}

/// Orthonormal basis of the column space of `m`, with a relative rank cutoff.
pub fn column_space(m: &Mat, rel_cutoff: f64) -> Mat {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Mat::zeros(r, 0);
    }
    let rank = numerical_rank(m, rel_cutoff);
    if rank == 0 {
        return Mat::zeros(r, 0);
    }
    let q = m.clone().col_piv_qr().q();
    q.columns(0, rank).into_owned()
}

/// Minimum-norm least-squares solution of `g x = v`, ignoring singular values
/// below `rel_cutoff` times the largest, with two steps of iterative refinement.
pub fn lstsq(g: &Mat, v: &Vector, rel_cutoff: f64) -> Vector {
    let svd = g.clone().svd(true, true);
    let eps = rel_cutoff * svd.singular_values.max();
    let mut x = svd.solve(v, eps).expect("svd computed with U and V");
    for _ in 0..2 {
        let resid = v - g * &x;
        x += svd.solve(&resid, eps).expect("svd computed with U and V");
    }
    x
}

/// Solves a square system, returning `None` when the matrix is numerically singular.
pub fn solve(m: &Mat, b: &Vector) -> Option<Vector> {
    if is_singular(m) {
        return None;
    }
    m.clone().lu().solve(b)
}

pub fn inverse(m: &Mat) -> Option<Mat> {
    if is_singular(m) {
        return None;
    }
    m.clone().try_inverse()
}

pub fn submatrix(m: &Mat, rows: &[usize], cols: &[usize]) -> Mat {
    Mat::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn subvector(v: &Vector, idx: &[usize]) -> Vector {
    Vector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

pub fn positive_part(v: &Vector) -> Vector {
    v.map(|x| x.max(0.0))
}

pub fn negative_part(v: &Vector) -> Vector {
    v.map(|x| (-x).max(0.0))
}

/// Serde adapter writing a matrix as a list of rows.
pub mod serde_mat {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::{mat_from_nested, rows_of, Mat};

    pub fn serialize<S: Serializer>(m: &Mat, s: S) -> Result<S::Ok, S::Error> {
        rows_of(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Mat, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        if rows.len() == 1 && rows[0].is_empty() {
            return Ok(Mat::zeros(1, 0));
        }
        if rows.is_empty() {
            return Ok(Mat::zeros(0, 0));
        }
        mat_from_nested(&rows, "matrix").map_err(serde::de::Error::custom)
    }
}

/// Serde adapter writing a vector as a plain list.
pub mod serde_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Vector;

    pub fn serialize<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector, D::Error> {
        let xs = Vec::<f64>::deserialize(d)?;
        Ok(Vector::from_vec(xs))
    }
}

/// Serde adapter for a list of vectors.
pub mod serde_vec_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Vector;

    pub fn serialize<S: Serializer>(vs: &[Vector], s: S) -> Result<S::Ok, S::Error> {
        let lists: Vec<&[f64]> = vs.iter().map(|v| v.as_slice()).collect();
        lists.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vector>, D::Error> {
        let lists = Vec::<Vec<f64>>::deserialize(d)?;
        Ok(lists.into_iter().map(Vector::from_vec).collect())
    }
}
