//! The LCP data model, the piecewise-linear map `f_M`, and the exhaustive
//! complementary-cone solver.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::index_set::IndexSet;
use crate::linalg::{self, ensure_finite, ensure_len, ensure_square, negative_part, positive_part, Mat, Vector};
use crate::nnls::nnls;
use crate::simplex::orthant_ray_in_span;

/// Largest dimension accepted by [`solve_enumerate`].
pub const MAX_ENUM_DIM: usize = 16;
/// Default sign-acceptance factor: candidates pass when every coordinate is
/// at least `-DEFAULT_TOL * (1 + ||q||)`.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Isolated solutions closer than this in max-norm of `x` are merged.
pub const DEDUP_TOL: f64 = 1e-7;

/// Finding `z >= 0` with `w = M z + q >= 0` and `z^T w = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcpInstance {
    #[serde(with = "linalg::serde_mat")]
    pub m: Mat,
    #[serde(with = "linalg::serde_vec")]
    pub q: Vector,
}

impl LcpInstance {
    pub fn new(m: Mat, q: Vector) -> Result<Self> {
        let n = ensure_square(&m, "M")?;
        ensure_finite(&m, "M")?;
        ensure_len(&q, n, "q")?;
        Ok(LcpInstance { m, q })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }
}

/// The number of solutions of an LCP, or the marker for a continuum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolutionCount {
    Finite(usize),
    Continuum,
}

impl SolutionCount {
    pub fn is_continuum(&self) -> bool {
        matches!(self, SolutionCount::Continuum)
    }

    pub fn finite(&self) -> Option<usize> {
        match self {
            SolutionCount::Finite(k) => Some(*k),
            SolutionCount::Continuum => None,
        }
    }
}

impl fmt::Display for SolutionCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolutionCount::Finite(k) => write!(f, "{k}"),
            SolutionCount::Continuum => write!(f, "CONTINUUM"),
        }
    }
}

impl Serialize for SolutionCount {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SolutionCount::Finite(k) => s.serialize_u64(*k as u64),
            SolutionCount::Continuum => s.serialize_str("CONTINUUM"),
        }
    }
}

impl<'de> Deserialize<'de> for SolutionCount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(u64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(k) => Ok(SolutionCount::Finite(k as usize)),
            Repr::Text(t) if t == "CONTINUUM" => Ok(SolutionCount::Continuum),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("unknown count marker {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolatedSolution {
    pub alpha: IndexSet,
    #[serde(with = "linalg::serde_vec")]
    pub z: Vector,
    #[serde(with = "linalg::serde_vec")]
    pub x: Vector,
    #[serde(with = "linalg::serde_vec")]
    pub w: Vector,
}

/// Solutions coming from a singular complementary matrix whose cone contains `q`.
///
/// The family is `{p >= 0 : C_M(alpha) p = q}` mapped to `x`-coordinates; it is
/// described by one member and a basis of the kernel directions (also in
/// `x`-coordinates). When the kernel is one-dimensional, `segment` holds the
/// admissible parameter range `[t_lo, t_hi]` along the single generator, with
/// `None` marking an unbounded end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateFamily {
    pub alpha: IndexSet,
    #[serde(with = "linalg::serde_vec")]
    pub particular_z: Vector,
    #[serde(with = "linalg::serde_vec")]
    pub particular_x: Vector,
    #[serde(with = "linalg::serde_vec_list")]
    pub nullspace_generators: Vec<Vector>,
    pub segment: Option<(Option<f64>, Option<f64>)>,
}

impl DegenerateFamily {
    /// The `z` vector of the member at parameter `t` along the first generator.
    pub fn z_at(&self, t: f64) -> Vector {
        let x = &self.particular_x + &self.nullspace_generators[0] * t;
        z_from_x(&x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub isolated: Vec<IsolatedSolution>,
    pub degenerate: Vec<DegenerateFamily>,
    pub count: SolutionCount,
}

/// `C_M(alpha)`: column `j` is `-M_j` when `j` is in `alpha`, else `e_j`.
pub fn complementary_matrix(m: &Mat, alpha: &IndexSet) -> Result<Mat> {
    let n = ensure_square(m, "M")?;
    if alpha.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "index set over {} elements used with a {n}x{n} matrix",
            alpha.dim()
        )));
    }
    Ok(complementary_unchecked(m, alpha))
}

pub(crate) fn complementary_unchecked(m: &Mat, alpha: &IndexSet) -> Mat {
    let n = m.nrows();
    Mat::from_fn(n, n, |i, j| {
        if alpha.contains(j) {
            -m[(i, j)]
        } else if i == j {
            1.0
        } else {
            0.0
        }
    })
}

/// The orthant piece `C_{-M}(alpha)` of `f_M` on the orthant where exactly the
/// coordinates in `alpha` are nonpositive.
pub fn orthant_matrix(m: &Mat, alpha: &IndexSet) -> Result<Mat> {
    complementary_matrix(&(-m), alpha)
}

/// `f_M(x) = [x]^+ - M [-x]^+`.
pub fn f_eval(m: &Mat, x: &Vector) -> Result<Vector> {
    let n = ensure_square(m, "M")?;
    ensure_len(x, n, "x")?;
    Ok(positive_part(x) - m * negative_part(x))
}

/// `z = [-x]^+`.
pub fn z_from_x(x: &Vector) -> Vector {
    negative_part(x)
}

/// `x = (M - I) z + q`.
pub fn x_from_z(m: &Mat, q: &Vector, z: &Vector) -> Vector {
    m * z - z + q
}

/// The sign pattern `{j : x_j < 0}`.
pub fn orthant_of(x: &Vector) -> IndexSet {
    let n = x.len();
    let members: Vec<usize> = (0..n).filter(|&j| x[j] < 0.0).collect();
    IndexSet::from_zero_based(&members, n).expect("in range")
}

enum Candidate {
    Isolated(IsolatedSolution),
    Family(DegenerateFamily),
}

/// Enumerates all `2^n` complementary cones.
///
/// `tol` is the relative sign-acceptance factor (see [`DEFAULT_TOL`]).
pub fn solve_enumerate(inst: &LcpInstance, tol: f64) -> Result<SolutionSet> {
    let n = inst.dim();
    if n > MAX_ENUM_DIM {
        return Err(Error::DimensionExceeded { n, max: MAX_ENUM_DIM });
    }
    let accept = tol * (1.0 + inst.q.norm());
    let alphas: Vec<IndexSet> = IndexSet::all(n).collect();
    let candidates: Vec<Option<Candidate>> = if n >= 10 {
        alphas.par_iter().map(|a| examine_cone(inst, a, accept)).collect()
    } else {
        alphas.iter().map(|a| examine_cone(inst, a, accept)).collect()
    };

    let mut isolated: Vec<IsolatedSolution> = Vec::new();
    let mut degenerate = Vec::new();
    for cand in candidates.into_iter().flatten() {
        match cand {
            Candidate::Isolated(sol) => {
                let dup = isolated.iter().any(|s| (&s.x - &sol.x).amax() <= DEDUP_TOL);
                if !dup {
                    isolated.push(sol);
                }
            }
            Candidate::Family(fam) => degenerate.push(fam),
        }
    }
    let count = if degenerate.is_empty() {
        SolutionCount::Finite(isolated.len())
    } else {
        SolutionCount::Continuum
    };
    Ok(SolutionSet { isolated, degenerate, count })
}

fn examine_cone(inst: &LcpInstance, alpha: &IndexSet, accept: f64) -> Option<Candidate> {
    let c = complementary_unchecked(&inst.m, alpha);
    if let Some(y) = linalg::solve(&c, &inst.q) {
        if y.iter().all(|&v| v >= -accept) {
            let p = y.map(|v| v.max(0.0));
            return Some(Candidate::Isolated(record_from_p(inst, alpha, &p)));
        }
        return None;
    }

    let fit = nnls(&c, &inst.q);
    if fit.residual > accept {
        return None;
    }
    let p0 = fit.p;
    let kernel = linalg::null_space(&c);
    let zero_tol = 1e-9 * (1.0 + p0.amax());
    let zeros: Vec<usize> = (0..p0.len()).filter(|&i| p0[i] <= zero_tol).collect();
    let restricted = Mat::from_fn(zeros.len(), kernel.ncols(), |i, j| kernel[(zeros[i], j)]);
    let moves = kernel.ncols() > 0
        && (linalg::singular_values(&restricted).iter().filter(|&&s| s > 1e-9).count() < kernel.ncols()
            || orthant_ray_in_span(&restricted).is_some());
    if !moves {
        return Some(Candidate::Isolated(record_from_p(inst, alpha, &p0)));
    }

    let signs = Vector::from_fn(p0.len(), |j, _| if alpha.contains(j) { -1.0 } else { 1.0 });
    let generators: Vec<Vector> = kernel.column_iter().map(|d| d.component_mul(&signs)).collect();
    let segment = if kernel.ncols() == 1 {
        let d = kernel.column(0);
        let mut lo: Option<f64> = None;
        let mut hi: Option<f64> = None;
        for i in 0..p0.len() {
            if d[i].abs() <= 1e-12 {
                continue;
            }
            let t = -p0[i] / d[i];
            if d[i] > 0.0 {
                lo = Some(lo.map_or(t, |v: f64| v.max(t)));
            } else {
                hi = Some(hi.map_or(t, |v: f64| v.min(t)));
            }
        }
        Some((lo, hi))
    } else {
        None
    };
    let rec = record_from_p(inst, alpha, &p0);
    Some(Candidate::Family(DegenerateFamily {
        alpha: *alpha,
        particular_z: rec.z,
        particular_x: rec.x,
        nullspace_generators: generators,
        segment,
    }))
}

/// Converts cone coordinates `p` of `q` in `pos C_M(alpha)` into `(z, w, x)`.
fn record_from_p(inst: &LcpInstance, alpha: &IndexSet, p: &Vector) -> IsolatedSolution {
    let z = Vector::from_fn(p.len(), |j, _| if alpha.contains(j) { p[j] } else { 0.0 });
    let w = &inst.m * &z + &inst.q;
    let x = &w - &z;
    IsolatedSolution { alpha: *alpha, z, x, w }
}
