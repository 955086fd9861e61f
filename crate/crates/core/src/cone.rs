//! Polyhedral cones built from complementary matrices: membership, distances,
//! facets, the skeleton `K(M)` and the planar cell decomposition.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index_set::IndexSet;
use crate::lcp::complementary_unchecked;
use crate::linalg::{self, column_space, ensure_square, Mat, Vector};
use crate::nnls::nnls;
use crate::simplex::{maximize, LpOutcome};

const TAU: f64 = 2.0 * PI;
/// Rays closer than this angle are treated as one.
pub const RAY_ANGLE_TOL: f64 = 1e-9;

/// Where a generator of a complementary cone comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    /// The unit vector `e_j` (zero-based `j`).
    Identity(usize),
    /// The negated column `-M_j` (zero-based `j`).
    NegColumn(usize),
}

impl Generator {
    pub fn vector(&self, m: &Mat) -> Vector {
        match *self {
            Generator::Identity(j) => Vector::from_fn(m.nrows(), |i, _| if i == j { 1.0 } else { 0.0 }),
            Generator::NegColumn(j) => -m.column(j).clone_owned(),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Identity(j) => write!(f, "I_{}", j + 1),
            Generator::NegColumn(j) => write!(f, "-M_{}", j + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeLabel {
    pub alpha: IndexSet,
    /// Zero-based column dropped from `C_M(alpha)`, for facets.
    pub dropped: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    #[serde(with = "linalg::serde_mat")]
    pub generators: Mat,
    pub sources: Vec<Generator>,
    pub label: Option<ConeLabel>,
}

impl Cone {
    /// Generator set used for deduplication.
    pub fn key(&self) -> Vec<Generator> {
        let mut k = self.sources.clone();
        k.sort();
        k
    }

    pub fn contains_source(&self, g: Generator) -> bool {
        self.sources.contains(&g)
    }
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sources.iter().map(|g| g.to_string()).collect();
        write!(f, "pos[{}]", parts.join(", "))
    }
}

/// The complementary cone `pos C_M(alpha)` with its generator sources.
pub fn complementary_cone(m: &Mat, alpha: &IndexSet) -> Cone {
    let n = m.nrows();
    let sources = (0..n)
        .map(|j| if alpha.contains(j) { Generator::NegColumn(j) } else { Generator::Identity(j) })
        .collect();
    Cone {
        generators: complementary_unchecked(m, alpha),
        sources,
        label: Some(ConeLabel { alpha: *alpha, dropped: None }),
    }
}

fn nonzero_columns(g: &Mat) -> Mat {
    let keep: Vec<usize> = (0..g.ncols()).filter(|&j| g.column(j).norm() > 0.0).collect();
    Mat::from_fn(g.nrows(), keep.len(), |i, k| g[(i, keep[k])])
}

/// Nonnegative least squares with closed forms for zero or one generator.
fn project(g: &Mat, v: &Vector) -> (Vector, f64) {
    match g.ncols() {
        0 => (Vector::zeros(0), v.norm()),
        1 => {
            let c = g.column(0);
            let nn = c.norm_squared();
            let t = if nn > 0.0 { (c.dot(v) / nn).max(0.0) } else { 0.0 };
            (Vector::from_element(1, t), (v - c * t).norm())
        }
        _ => {
            let fit = nnls(g, v);
            (fit.p, fit.residual)
        }
    }
}

/// Returns `p >= 0` with `||G p - v|| <= tol (1 + ||v||)` when `v` lies in `pos G`.
pub fn cone_membership(g: &Mat, v: &Vector, tol: f64) -> Option<Vector> {
    assert_eq!(g.nrows(), v.len(), "cone dimension mismatch");
    let (p, residual) = project(g, v);
    (residual <= tol * (1.0 + v.norm())).then_some(p)
}

/// Euclidean distance from `v` to `pos G`.
pub fn cone_distance(g: &Mat, v: &Vector) -> f64 {
    assert_eq!(g.nrows(), v.len(), "cone dimension mismatch");
    project(g, v).1
}

/// Euclidean distance from `v` to the linear hull of the columns of `G`.
pub fn span_distance(g: &Mat, v: &Vector) -> f64 {
    assert_eq!(g.nrows(), v.len(), "span dimension mismatch");
    if g.ncols() == 1 {
        let c = g.column(0);
        let nn = c.norm_squared();
        return if nn > 0.0 { (v - c * (c.dot(v) / nn)).norm() } else { v.norm() };
    }
    let g = nonzero_columns(g);
    if g.ncols() == 0 {
        return v.norm();
    }
    let u = column_space(&g, 1e-12);
    (v - &u * (u.transpose() * v)).norm()
}

/// The `n` facets of `pos C_M(alpha)`; facet `i` drops column `i`.
pub fn facets_of_cone(m: &Mat, alpha: &IndexSet) -> Result<Vec<Cone>> {
    let n = ensure_square(m, "M")?;
    if alpha.dim() != n {
        return Err(Error::DimensionMismatch("index set dimension differs from M".into()));
    }
    Ok((0..n).map(|i| facet(m, alpha, i)).collect())
}

fn facet(m: &Mat, alpha: &IndexSet, dropped: usize) -> Cone {
    let full = complementary_cone(m, alpha);
    let keep: Vec<usize> = (0..m.nrows()).filter(|&j| j != dropped).collect();
    Cone {
        generators: Mat::from_fn(m.nrows(), keep.len(), |i, k| full.generators[(i, keep[k])]),
        sources: keep.iter().map(|&j| full.sources[j]).collect(),
        label: Some(ConeLabel { alpha: *alpha, dropped: Some(dropped) }),
    }
}

fn push_unique(out: &mut Vec<Cone>, seen: &mut std::collections::HashSet<Vec<Generator>>, c: Cone) {
    if seen.insert(c.key()) {
        out.push(c);
    }
}

/// `T_k(M)`: facets of cones `C_M(alpha)` with `k` not in `alpha`, over every
/// dropped column, deduplicated by generator set. `k` is zero-based.
pub fn facet_family(m: &Mat, k: usize) -> Result<Vec<Cone>> {
    let n = ensure_square(m, "M")?;
    if k >= n {
        return Err(Error::DimensionMismatch(format!("column {} outside 1..={n}", k + 1)));
    }
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for alpha in IndexSet::all(n).filter(|a| !a.contains(k)) {
        for i in 0..n {
            push_unique(&mut out, &mut seen, facet(m, &alpha, i));
        }
    }
    Ok(out)
}

/// All facets of all complementary cones, deduplicated; their union is `K(M)`.
pub fn skeleton_facets(m: &Mat) -> Result<Vec<Cone>> {
    let n = ensure_square(m, "M")?;
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for alpha in IndexSet::all(n) {
        for i in 0..n {
            push_unique(&mut out, &mut seen, facet(m, &alpha, i));
        }
    }
    Ok(out)
}

/// Distance from `q` to the skeleton `K(M)`.
pub fn skeleton_distance(m: &Mat, q: &Vector) -> Result<f64> {
    let facets = skeleton_facets(m)?;
    Ok(facets.iter().map(|f| cone_distance(&f.generators, q)).fold(f64::INFINITY, f64::min))
}

/// Whether `q` lies within `tol (1 + ||q||)` of `K(M)`.
pub fn in_skeleton(m: &Mat, q: &Vector, tol: f64) -> Result<bool> {
    linalg::ensure_len(q, m.nrows(), "q")?;
    Ok(skeleton_distance(m, q)? <= tol * (1.0 + q.norm()))
}

/// Whether the closed segment `[a, b]` meets `pos G`.
pub fn segment_meets_cone(g: &Mat, a: &Vector, b: &Vector) -> bool {
    // Find p >= 0, t in [0,1] with G p - t (b - a) = a, written with slack s = 1 - t.
    let (n, k) = g.shape();
    let d = b - a;
    let mut lhs = Mat::zeros(n + 1, k + 2);
    let mut rhs = Vector::zeros(n + 1);
    for i in 0..n {
        for j in 0..k {
            lhs[(i, j)] = g[(i, j)];
        }
        lhs[(i, k)] = -d[i];
        rhs[i] = a[i];
    }
    lhs[(n, k)] = 1.0;
    lhs[(n, k + 1)] = 1.0;
    rhs[n] = 1.0;
    matches!(maximize(&Vector::zeros(k + 2), &lhs, &rhs), LpOutcome::Optimal { .. })
}

/// Whether the segment `[a, b]` crosses the skeleton `K(M)`.
pub fn segment_crosses_skeleton(m: &Mat, a: &Vector, b: &Vector) -> Result<bool> {
    Ok(skeleton_facets(m)?.iter().any(|f| segment_meets_cone(&f.generators, a, b)))
}

/// An open counterclockwise sector of the plane between two rays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sector2D {
    pub start_angle: f64,
    pub end_angle: f64,
    pub boundary_rays: [[f64; 2]; 2],
}

impl Sector2D {
    fn new(start: f64, end: f64) -> Self {
        Sector2D {
            start_angle: start,
            end_angle: end,
            boundary_rays: [[start.cos(), start.sin()], [end.cos(), end.sin()]],
        }
    }

    pub fn width(&self) -> f64 {
        let w = (self.end_angle - self.start_angle).rem_euclid(TAU);
        if w == 0.0 {
            TAU
        } else {
            w
        }
    }

    /// Angle of the bisector.
    pub fn mid_angle(&self) -> f64 {
        (self.start_angle + 0.5 * self.width()).rem_euclid(TAU)
    }

    /// Unit vector along the bisector.
    pub fn midpoint(&self) -> Vector {
        let a = self.mid_angle();
        Vector::from_vec(vec![a.cos(), a.sin()])
    }

    pub fn contains_angle(&self, a: f64) -> bool {
        let rel = (a - self.start_angle).rem_euclid(TAU);
        rel > 0.0 && rel < self.width()
    }
}

/// Angle of a planar vector in `[0, 2pi)`.
pub fn angle_of(v: &[f64]) -> f64 {
    v[1].atan2(v[0]).rem_euclid(TAU)
}

/// Distinct ray angles among `e_1`, `e_2`, `-M_1`, `-M_2`, sorted.
pub fn rays_2d(m: &Mat) -> Result<Vec<f64>> {
    if m.nrows() != 2 || m.ncols() != 2 {
        return Err(Error::DimensionUnsupported { expected: "2".into(), got: m.nrows() });
    }
    let mut angles = vec![0.0, PI / 2.0];
    for j in 0..2 {
        let c = -m.column(j);
        if c.norm() > 0.0 {
            angles.push(angle_of(&[c[0], c[1]]));
        }
    }
    angles.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for a in angles {
        if out.last().map_or(true, |&b| a - b > RAY_ANGLE_TOL) {
            out.push(a);
        }
    }
    if out.len() > 1 && out[0] + TAU - out[out.len() - 1] <= RAY_ANGLE_TOL {
        out.pop();
    }
    Ok(out)
}

/// Cells of the plane cut along the rays of `K(M)`, counterclockwise from angle 0.
pub fn cells_2d(m: &Mat) -> Result<Vec<Sector2D>> {
    let rays = rays_2d(m)?;
    let k = rays.len();
    Ok((0..k).map(|i| Sector2D::new(rays[i], rays[(i + 1) % k])).collect())
}
