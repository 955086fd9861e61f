//! Bifurcation diagrams along parameter paths `q = q0 + λ d` and over the
//! `(R2, r)` plane of the transistor circuit.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::singularity_flags;
use crate::circuit::{circuit_lcp_data, circuit_mhat, circuit_qhat, CircuitParams};
use crate::cone::{segment_crosses_skeleton, skeleton_distance};
use crate::error::{Error, Result};
use crate::lcp::{orthant_matrix, orthant_of, solve_enumerate, DegenerateFamily, IsolatedSolution, LcpInstance, SolutionCount, DEFAULT_TOL};
use crate::linalg::{ensure_len, ensure_square, singular_values, Mat, Vector};

/// Points closer than this to `K(M)` are flagged.
pub const SKELETON_TOL: f64 = 1e-7;

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub parameter: Vec<f64>,
    pub count: SolutionCount,
    pub solutions: Vec<IsolatedSolution>,
    pub families: Vec<DegenerateFamily>,
    pub skeleton_distance: f64,
    pub on_skeleton: bool,
    /// Some solution lies on an orthant boundary or on a singular piece of `f_M`.
    pub singular: bool,
    /// Count for a second LCP sharing the grid point, when one is tracked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary_count: Option<SolutionCount>,
}

/// A solution branch as `(point index, solution index)` pairs at consecutive grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub members: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationDiagram {
    pub points: Vec<SweepPoint>,
    pub branches: Vec<Branch>,
    /// For a 1D sweep, whether the segment between points `i` and `i+1` meets `K(M)`.
    pub interval_crosses_skeleton: Vec<bool>,
    /// `(rows, cols)` for a 2D sweep, stored row-major.
    pub grid_shape: Option<(usize, usize)>,
}

impl BifurcationDiagram {
    pub fn counts(&self) -> Vec<SolutionCount> {
        self.points.iter().map(|p| p.count).collect()
    }

    /// Counts with consecutive repeats collapsed.
    pub fn profile(&self) -> Vec<SolutionCount> {
        let mut out: Vec<SolutionCount> = Vec::new();
        for c in self.counts() {
            if out.last() != Some(&c) {
                out.push(c);
            }
        }
        out
    }

    /// Intervals `i` where the count differs between points `i` and `i+1`.
    pub fn count_changes(&self) -> Vec<usize> {
        (0..self.points.len().saturating_sub(1)).filter(|&i| self.points[i].count != self.points[i + 1].count).collect()
    }

    /// Whether anything near interval `i` signals a possible change in the solution set.
    pub fn interval_flagged(&self, i: usize) -> bool {
        let (a, b) = (&self.points[i], &self.points[i + 1]);
        self.interval_crosses_skeleton.get(i).copied().unwrap_or(false)
            || a.on_skeleton
            || b.on_skeleton
            || a.singular
            || b.singular
    }

    /// 4-connected components of grid points satisfying `pred`, for 2D sweeps.
    pub fn components_where<F: Fn(&SweepPoint) -> bool>(&self, pred: F) -> Vec<Vec<usize>> {
        let Some((rows, cols)) = self.grid_shape else {
            return vec![];
        };
        let mut seen = vec![false; self.points.len()];
        let mut comps = Vec::new();
        for start in 0..self.points.len() {
            if seen[start] || !pred(&self.points[start]) {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![];
            let mut queue = VecDeque::from([start]);
            while let Some(k) = queue.pop_front() {
                comp.push(k);
                let (i, j) = (k / cols, k % cols);
                let mut nbrs = Vec::with_capacity(4);
                if i > 0 {
                    nbrs.push(k - cols);
                }
                if i + 1 < rows {
                    nbrs.push(k + cols);
                }
                if j > 0 {
                    nbrs.push(k - 1);
                }
                if j + 1 < cols {
                    nbrs.push(k + 1);
                }
                for nb in nbrs {
                    if !seen[nb] && pred(&self.points[nb]) {
                        seen[nb] = true;
                        queue.push_back(nb);
                    }
                }
            }
            comps.push(comp);
        }
        comps
    }
}

fn analyze_point(m: &Mat, q: &Vector, parameter: Vec<f64>) -> Result<SweepPoint> {
    let sols = solve_enumerate(&LcpInstance::new(m.clone(), q.clone())?, DEFAULT_TOL)?;
    let dist = skeleton_distance(m, q)?;
    let mut singular = !sols.degenerate.is_empty();
    for s in &sols.isolated {
        singular |= singularity_flags(m, &s.x, DEFAULT_TOL)?.any();
    }
    Ok(SweepPoint {
        parameter,
        count: sols.count,
        solutions: sols.isolated,
        families: sols.degenerate,
        skeleton_distance: dist,
        on_skeleton: dist <= SKELETON_TOL * (1.0 + q.norm()),
        singular,
        secondary_count: None,
    })
}

/// Local gain `‖Δx‖ / ‖Δq‖` on the piece of `f_M` containing `x`.
fn piece_gain(m: &Mat, x: &Vector) -> f64 {
    let piece = orthant_matrix(m, &orthant_of(x)).expect("square");
    let sv = singular_values(&piece);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin > 0.0 {
        1.0 / smin
    } else {
        f64::INFINITY
    }
}

/// Greedy nearest-neighbour matching of solutions at consecutive points.
fn stitch(m: &Mat, points: &[SweepPoint], qs: &[Vector]) -> Vec<Branch> {
    let mut branches: Vec<Branch> = vec![];
    // open[s] = branch index of solution s at the previous point
    let mut open: Vec<usize> = vec![];
    for (k, p) in points.iter().enumerate() {
        let mut next = vec![usize::MAX; p.solutions.len()];
        if k > 0 {
            let prev = &points[k - 1];
            let dq = (&qs[k] - &qs[k - 1]).norm();
            let mut pairs = vec![];
            for (a, sa) in prev.solutions.iter().enumerate() {
                for (b, sb) in p.solutions.iter().enumerate() {
                    let gain = piece_gain(m, &sa.x).max(piece_gain(m, &sb.x)).max(1.0);
                    let d = (&sa.x - &sb.x).norm();
                    if d <= 10.0 * dq * gain + 1e-9 {
                        pairs.push((d, a, b));
                    }
                }
            }
            pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut used_prev = vec![false; prev.solutions.len()];
            for (_, a, b) in pairs {
                if !used_prev[a] && next[b] == usize::MAX {
                    used_prev[a] = true;
                    next[b] = open[a];
                }
            }
        }
        for (b, slot) in next.iter_mut().enumerate() {
            if *slot == usize::MAX {
                branches.push(Branch { members: vec![] });
                *slot = branches.len() - 1;
            }
            branches[*slot].members.push((k, b));
        }
        open = next;
    }
    branches
}

/// Solves `lcp(M, q0 + λ d)` along `lambdas`, flags skeleton contact and
/// stitches solution branches.
pub fn sweep_1d(m: &Mat, q0: &Vector, direction: &Vector, lambdas: &[f64]) -> Result<BifurcationDiagram> {
    let n = ensure_square(m, "M")?;
    ensure_len(q0, n, "q0")?;
    ensure_len(direction, n, "direction")?;
    if direction.norm() == 0.0 {
        return Err(Error::InvalidParameter { name: "direction".into(), reason: "must be nonzero".into() });
    }
    let qs: Vec<Vector> = lambdas.iter().map(|&l| q0 + direction * l).collect();
    let points = lambdas
        .par_iter()
        .zip(qs.par_iter())
        .map(|(&l, q)| analyze_point(m, q, vec![l]))
        .collect::<Result<Vec<_>>>()?;
    let interval_crosses_skeleton = qs
        .par_windows(2)
        .map(|w| segment_crosses_skeleton(m, &w[0], &w[1]))
        .collect::<Result<Vec<_>>>()?;
    let branches = stitch(m, &points, &qs);
    Ok(BifurcationDiagram { points, branches, interval_crosses_skeleton, grid_shape: None })
}

/// Counts for `lcp(M̂, q̂)` over the `(R2, r)` grid, row-major with one row per
/// `R2` value. The equilibrium count of the full circuit model is recorded as
/// the secondary count.
pub fn sweep_2d_circuit(params: &CircuitParams, r2_grid: &[f64], r_grid: &[f64]) -> Result<BifurcationDiagram> {
    if r2_grid.is_empty() || r_grid.is_empty() {
        return Err(Error::InvalidParameter { name: "grid".into(), reason: "grids must be nonempty".into() });
    }
    let per_row = r2_grid
        .par_iter()
        .map(|&r2| {
            let p = params.with_r2(r2);
            let mhat = circuit_mhat(&p)?;
            r_grid
                .iter()
                .map(|&r| {
                    let qhat = circuit_qhat(&p, r, p.s)?;
                    let mut point = analyze_point(&mhat, &qhat, vec![r2, r])?;
                    let (m, q) = circuit_lcp_data(&p, r)?;
                    point.secondary_count = Some(solve_enumerate(&LcpInstance::new(m, q)?, DEFAULT_TOL)?.count);
                    Ok(point)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let points = per_row.into_iter().flatten().collect();
    Ok(BifurcationDiagram {
        points,
        branches: vec![],
        interval_crosses_skeleton: vec![],
        grid_shape: Some((r2_grid.len(), r_grid.len())),
    })
}
