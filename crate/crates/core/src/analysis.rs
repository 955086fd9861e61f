//! Matrix-class predicates and degree theory for `f_M`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cone::skeleton_distance;
use crate::error::{Error, Result};
use crate::index_set::IndexSet;
use crate::lcp::{complementary_unchecked, orthant_matrix, orthant_of, solve_enumerate, LcpInstance, DEFAULT_TOL};
use crate::linalg::{self, ensure_len, ensure_square, is_singular, null_space, Mat, Vector};
use crate::simplex::orthant_ray_in_span;

/// Probes rejected before [`degree`] gives up.
pub const MAX_PROBES: usize = 1000;

/// An index set whose complementary matrix has a nonzero nonnegative kernel vector `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct R0Witness {
    pub alpha: IndexSet,
    #[serde(with = "linalg::serde_vec")]
    pub p: Vector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct R0Report {
    pub is_r0: bool,
    pub witness: Option<R0Witness>,
}

/// Decides the R0 property: every `ker C_M(alpha)` meets the nonnegative
/// orthant only at the origin.
pub fn is_r0(m: &Mat) -> Result<R0Report> {
    let n = ensure_square(m, "M")?;
    if n > crate::lcp::MAX_ENUM_DIM {
        return Err(Error::DimensionExceeded { n, max: crate::lcp::MAX_ENUM_DIM });
    }
    for alpha in IndexSet::all(n) {
        let c = complementary_unchecked(m, &alpha);
        if !is_singular(&c) {
            continue;
        }
        if let Some(p) = orthant_ray_in_span(&null_space(&c)) {
            return Ok(R0Report { is_r0: false, witness: Some(R0Witness { alpha, p }) });
        }
    }
    Ok(R0Report { is_r0: true, witness: None })
}

fn principal(m: &Mat, alpha: &IndexSet) -> Mat {
    let idx = alpha.members();
    linalg::submatrix(m, &idx, &idx)
}

/// `sgn det M_{alpha,alpha}`, with `+1` for the empty set.
pub fn index_at(m: &Mat, alpha: &IndexSet) -> Result<i8> {
    ensure_square(m, "M")?;
    if alpha.is_empty() {
        return Ok(1);
    }
    let sub = principal(m, alpha);
    if is_singular(&sub) {
        return Err(Error::DegenerateIndex(alpha.to_string()));
    }
    Ok(if sub.determinant() > 0.0 { 1 } else { -1 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub degree: i64,
    #[serde(with = "linalg::serde_vec")]
    pub probe_q: Vector,
    pub per_solution_indices: Vec<(IndexSet, i8)>,
    pub probes_tried: usize,
}

/// Sum of indices over the solutions of `f_M(x) = q`, or `None` when `q` is
/// too close to `K(M)` or a solution touches an orthant boundary.
pub fn degree_at(m: &Mat, q: &Vector, tol: f64) -> Result<Option<(i64, Vec<(IndexSet, i8)>)>> {
    if skeleton_distance(m, q)? <= tol * (1.0 + q.norm()) {
        return Ok(None);
    }
    let sols = solve_enumerate(&LcpInstance::new(m.clone(), q.clone())?, DEFAULT_TOL)?;
    if sols.count.is_continuum() {
        return Ok(None);
    }
    let mut indices = Vec::with_capacity(sols.isolated.len());
    for s in &sols.isolated {
        if s.x.iter().any(|v| v.abs() <= tol) {
            return Ok(None);
        }
        let alpha = orthant_of(&s.x);
        match index_at(m, &alpha) {
            Ok(i) => indices.push((alpha, i)),
            Err(_) => return Ok(None),
        }
    }
    let degree = indices.iter().map(|&(_, i)| i as i64).sum();
    Ok(Some((degree, indices)))
}

/// Degree of `f_M` at a seeded random unit probe off the skeleton.
pub fn degree(m: &Mat, seed: u64, tol: f64) -> Result<DegreeReport> {
    let n = ensure_square(m, "M")?;
    let r0 = is_r0(m)?;
    if let Some(w) = r0.witness {
        return Err(Error::NotR0(w.alpha.to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for tried in 1..=MAX_PROBES {
        let q = random_unit(n, &mut rng);
        if let Some((degree, per_solution_indices)) = degree_at(m, &q, tol)? {
            return Ok(DegreeReport { degree, probe_q: q, per_solution_indices, probes_tried: tried });
        }
    }
    Err(Error::ProbeExhausted(MAX_PROBES))
}

/// A uniformly distributed point on the unit sphere.
pub fn random_unit<R: rand::Rng>(n: usize, rng: &mut R) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| StandardNormal.sample(rng));
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

/// Every principal minor, keyed by its index set, in increasing mask order.
pub fn all_principal_minors(m: &Mat) -> Result<Vec<(IndexSet, f64)>> {
    let n = ensure_square(m, "M")?;
    if n > crate::lcp::MAX_ENUM_DIM {
        return Err(Error::DimensionExceeded { n, max: crate::lcp::MAX_ENUM_DIM });
    }
    Ok(IndexSet::all(n).skip(1).map(|a| (a, principal(m, &a).determinant())).collect())
}

/// All principal minors positive (and none numerically vanishing).
pub fn is_p(m: &Mat) -> bool {
    let Ok(n) = ensure_square(m, "M") else { return false };
    if n > crate::lcp::MAX_ENUM_DIM {
        return false;
    }
    IndexSet::all(n).skip(1).all(|a| {
        let sub = principal(m, &a);
        !is_singular(&sub) && sub.determinant() > 0.0
    })
}

/// Minimum of `x^T M x` over the unit simplex, from the KKT points of every face.
pub fn copositivity_minimum(m: &Mat) -> Result<f64> {
    let n = ensure_square(m, "M")?;
    if n > 3 {
        return Err(Error::DimensionUnsupported { expected: "at most 3".into(), got: n });
    }
    let s = (m + m.transpose()) * 0.5;
    let mut best = f64::INFINITY;
    for face in IndexSet::all(n).skip(1) {
        let idx = face.members();
        let k = idx.len();
        // Bordered system [S_FF 1; 1^T 0] [x; mu] = [0; 1].
        let mut kkt = Mat::zeros(k + 1, k + 1);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                kkt[(a, b)] = s[(i, j)];
            }
            kkt[(a, k)] = 1.0;
            kkt[(k, a)] = 1.0;
        }
        let mut rhs = Vector::zeros(k + 1);
        rhs[k] = 1.0;
        let Some(sol) = linalg::solve(&kkt, &rhs) else { continue };
        let x = sol.rows(0, k);
        if x.iter().any(|&v| v < -1e-12) {
            continue;
        }
        let sub = linalg::submatrix(&s, &idx, &idx);
        best = best.min((x.transpose() * &sub * x)[(0, 0)]);
    }
    Ok(best)
}

/// Strict copositivity, decided exactly for `n <= 3`.
pub fn is_strictly_copositive_small(m: &Mat) -> Result<bool> {
    let min = copositivity_minimum(m)?;
    Ok(min > 1e-12 * (1.0 + m.amax()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularityFlags {
    pub on_orthant_boundary: bool,
    pub singular_piece: Option<IndexSet>,
}

impl SingularityFlags {
    pub fn any(&self) -> bool {
        self.on_orthant_boundary || self.singular_piece.is_some()
    }
}

/// Necessary conditions for a nonsmooth singularity of `f_M` at `x`.
pub fn singularity_flags(m: &Mat, x: &Vector, tol: f64) -> Result<SingularityFlags> {
    let n = ensure_square(m, "M")?;
    ensure_len(x, n, "x")?;
    let on_orthant_boundary = x.iter().any(|v| v.abs() <= tol);
    let alpha = orthant_of(x);
    let piece = orthant_matrix(m, &alpha)?;
    let singular_piece = is_singular(&piece).then_some(alpha);
    Ok(SingularityFlags { on_orthant_boundary, singular_piece })
}
