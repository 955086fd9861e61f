//! LCP-stability: degenerate cones, weak degeneracy, the minors test and the
//! stability margin.

use serde::{Deserialize, Serialize};

use crate::cone::{cone_distance, cone_membership, facet_family, span_distance, Cone, Generator};
use crate::error::{Error, Result};
use crate::index_set::IndexSet;
use crate::lcp::complementary_unchecked;
use crate::linalg::{ensure_square, is_singular, submatrix, Mat, Vector};

/// Default membership tolerance for the facet-containment test.
pub const STABILITY_TOL: f64 = 1e-9;
/// Largest dimension for facet enumeration.
pub const MAX_STABILITY_DIM: usize = 12;
/// Largest dimension for the all-minors test.
pub const MAX_MINORS_DIM: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WitnessKind {
    DegenerateCone,
    FacetContainment,
}

/// Why a matrix is weakly degenerate. `k` is zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakWitness {
    pub kind: WitnessKind,
    pub alpha: Option<IndexSet>,
    pub k: Option<usize>,
    pub facet: Option<Cone>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarginSet {
    A,
    B,
}

/// The term realizing the margin. `k` is zero-based; set A carries a facet of
/// `T_k`, set B the index set whose cone lost column `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginArgmin {
    pub set: MarginSet,
    pub k: usize,
    pub facet: Option<Cone>,
    pub alpha: Option<IndexSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub margin: f64,
    pub argmin: Option<MarginArgmin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub degenerate_alphas: Vec<IndexSet>,
    pub weak_witness: Option<WeakWitness>,
    pub is_stable: bool,
    pub margin: f64,
    pub margin_argmin: Option<MarginArgmin>,
}

fn check_dim(m: &Mat, max: usize) -> Result<usize> {
    let n = ensure_square(m, "M")?;
    if n > max {
        return Err(Error::DimensionExceeded { n, max });
    }
    Ok(n)
}

/// Index sets whose complementary matrix is singular.
pub fn degenerate_cones(m: &Mat) -> Result<Vec<IndexSet>> {
    let n = check_dim(m, crate::lcp::MAX_ENUM_DIM)?;
    Ok(IndexSet::all(n).filter(|a| is_singular(&complementary_unchecked(m, a))).collect())
}

/// Returns a witness when some cone is degenerate or some `-M_k` lies in a
/// facet of `T_k(M)`.
pub fn is_weakly_degenerate(m: &Mat, tol: f64) -> Result<Option<WeakWitness>> {
    let n = check_dim(m, MAX_STABILITY_DIM)?;
    if let Some(alpha) = degenerate_cones(m)?.into_iter().next() {
        return Ok(Some(WeakWitness { kind: WitnessKind::DegenerateCone, alpha: Some(alpha), k: None, facet: None }));
    }
    for k in 0..n {
        let v = -m.column(k).clone_owned();
        for facet in facet_family(m, k)? {
            if cone_membership(&facet.generators, &v, tol).is_some() {
                return Ok(Some(WeakWitness {
                    kind: WitnessKind::FacetContainment,
                    alpha: facet.label.map(|l| l.alpha),
                    k: Some(k),
                    facet: Some(facet),
                }));
            }
        }
    }
    Ok(None)
}

/// A matrix is LCP-stable exactly when it is not weakly degenerate.
pub fn is_lcp_stable(m: &Mat, tol: f64) -> Result<bool> {
    Ok(is_weakly_degenerate(m, tol)?.is_none())
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    IndexSet::all(n).filter(|s| s.len() == size).map(|s| s.members()).collect()
}

/// Every square minor is nonzero; a sufficient condition for stability.
pub fn minors_sufficient(m: &Mat) -> Result<bool> {
    let n = check_dim(m, MAX_MINORS_DIM)?;
    for size in 1..=n {
        let sets = subsets(n, size);
        for rows in &sets {
            for cols in &sets {
                if is_singular(&submatrix(m, rows, cols)) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The minimum over set A (distances from normalized `-M_k` to the facets in
/// `T_k`) and set B (distances to the spans of `C_M(alpha)` without column `k`).
pub fn stability_margin(m: &Mat) -> Result<MarginReport> {
    let n = check_dim(m, MAX_STABILITY_DIM)?;
    let mut normalized = m.clone();
    for k in 0..n {
        let norm = m.column(k).norm();
        if norm == 0.0 {
            return Ok(MarginReport {
                margin: 0.0,
                argmin: Some(MarginArgmin {
                    set: MarginSet::A,
                    k,
                    facet: None,
                    alpha: Some(IndexSet::empty(n).with(k)),
                }),
            });
        }
        normalized.column_mut(k).unscale_mut(norm);
    }

    let mut best = f64::INFINITY;
    let mut argmin = None;
    for k in 0..n {
        let v: Vector = -normalized.column(k).clone_owned();
        for facet in facet_family(&normalized, k)? {
            let d = cone_distance(&facet.generators, &v);
            if d < best {
                best = d;
                argmin = Some(MarginArgmin { set: MarginSet::A, k, alpha: facet.label.map(|l| l.alpha), facet: Some(facet) });
            }
        }
        let keep: Vec<usize> = (0..n).filter(|&j| j != k).collect();
        let mut seen = std::collections::HashSet::new();
        for alpha in IndexSet::all(n) {
            let key: Vec<Generator> = keep
                .iter()
                .map(|&j| if alpha.contains(j) { Generator::NegColumn(j) } else { Generator::Identity(j) })
                .collect();
            if !seen.insert(key) {
                continue;
            }
            let c = complementary_unchecked(&normalized, &alpha);
            let g = Mat::from_fn(n, n - 1, |i, j| c[(i, keep[j])]);
            let d = span_distance(&g, &v);
            if d < best {
                best = d;
                argmin = Some(MarginArgmin { set: MarginSet::B, k, facet: None, alpha: Some(alpha) });
            }
        }
    }
    Ok(MarginReport { margin: best.clamp(0.0, 1.0), argmin })
}

/// Degenerate cones, weak-degeneracy witness, verdict and margin together.
pub fn stability_report(m: &Mat, tol: f64) -> Result<StabilityReport> {
    let degenerate_alphas = degenerate_cones(m)?;
    let weak_witness = is_weakly_degenerate(m, tol)?;
    let margin = stability_margin(m)?;
    Ok(StabilityReport {
        degenerate_alphas,
        is_stable: weak_witness.is_none(),
        weak_witness,
        margin: margin.margin,
        margin_argmin: margin.argmin,
    })
}

/// A local extremum of a scalar function of one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub at: f64,
    pub value: f64,
}

/// Local minima and maxima of `f` on `[a, b]`: a grid scan with spacing
/// `step` followed by golden-section refinement of each bracketed extremum.
pub fn scan_extrema<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, step: f64) -> (Vec<Extremum>, Vec<Extremum>) {
    let count = ((b - a) / step).round() as usize;
    let xs: Vec<f64> = (0..=count).map(|i| a + (b - a) * i as f64 / count as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut minima = Vec::new();
    let mut maxima = Vec::new();
    for i in 1..xs.len() - 1 {
        if ys[i] < ys[i - 1] && ys[i] <= ys[i + 1] {
            let at = golden_section(&f, xs[i - 1], xs[i + 1], false);
            minima.push(Extremum { at, value: f(at) });
        }
        if ys[i] > ys[i - 1] && ys[i] >= ys[i + 1] {
            let at = golden_section(&f, xs[i - 1], xs[i + 1], true);
            maxima.push(Extremum { at, value: f(at) });
        }
    }
    (minima, maxima)
}

fn golden_section<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, maximize: bool) -> f64 {
    let g = |x: f64| if maximize { -f(x) } else { f(x) };
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (g(c), g(d));
    while hi - lo > 1e-12 {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = g(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = g(d);
        }
    }
    0.5 * (lo + hi)
}
