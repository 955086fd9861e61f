//! Classification of 2x2 matrices up to LCP-equivalence.
//!
//! A stable 2x2 matrix has four distinct rays in `K(M)` and therefore four
//! cells. Each cell is covered by some subset of the four complementary
//! cones. The cyclic sequence of covering sets, taken up to rotation,
//! reflection and relabeling of the cones, is an equivalence invariant that
//! separates the five stable classes. The per-cell solution counts alone do
//! not: two classes share the counts `(0, 2, 2, 2)`.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{index_at, is_p};
use crate::cone::{cells_2d, Sector2D};
use crate::equivalence::{normal_form_2d, normal_form_matrix, unstable_family_2d, unstable_line_distance, UnstableFamily};
use crate::error::{Error, Result};
use crate::index_set::IndexSet;
use crate::lcp::{solve_enumerate, LcpInstance, SolutionCount, DEFAULT_TOL};
use crate::linalg::Mat;
use crate::stability::{is_lcp_stable, stability_margin, STABILITY_TOL};

/// Default angular tolerance for the unstable-line tests.
pub const LINE_TOL: f64 = 1e-7;
/// Classifications closer than this to an unstable line are flagged.
pub const NEAR_LINE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClassLabel {
    Zero,
    UColumn,
    USubspace,
    UR0,
    C1,
    C2,
    C3,
    C4,
    C5,
}

impl ClassLabel {
    pub fn is_stable(&self) -> bool {
        matches!(self, ClassLabel::C1 | ClassLabel::C2 | ClassLabel::C3 | ClassLabel::C4 | ClassLabel::C5)
    }
}

impl From<UnstableFamily> for ClassLabel {
    fn from(f: UnstableFamily) -> Self {
        match f {
            UnstableFamily::Zero => ClassLabel::Zero,
            UnstableFamily::UColumn => ClassLabel::UColumn,
            UnstableFamily::USubspace => ClassLabel::USubspace,
            UnstableFamily::UR0 => ClassLabel::UR0,
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClassLabel::Zero => "ZERO",
            ClassLabel::UColumn => "U_COLUMN",
            ClassLabel::USubspace => "U_SUBSPACE",
            ClassLabel::UR0 => "U_R0",
            ClassLabel::C1 => "C1",
            ClassLabel::C2 => "C2",
            ClassLabel::C3 => "C3",
            ClassLabel::C4 => "C4",
            ClassLabel::C5 => "C5",
        };
        f.write_str(s)
    }
}

/// Canonical cyclic sequence of per-cell covering-cone sets.
pub type Signature = Vec<Vec<u8>>;

/// The five stable classes keyed by canonical signature. C1 holds the
/// P-matrices and C3 the remaining Q-matrices; C2 and C4 share their counts
/// and differ in which cones overlap.
pub fn class_table() -> Vec<(Signature, ClassLabel)> {
    vec![
        (vec![vec![0], vec![1], vec![2], vec![3]], ClassLabel::C1),
        (vec![vec![], vec![0, 1], vec![0, 2], vec![0, 3]], ClassLabel::C2),
        (vec![vec![0], vec![0, 1, 2], vec![1], vec![3]], ClassLabel::C3),
        (vec![vec![], vec![0, 1], vec![0, 2], vec![2, 3]], ClassLabel::C4),
        (vec![vec![], vec![0, 1], vec![0, 1, 2, 3], vec![0, 2]], ClassLabel::C5),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassLabel2D {
    pub label: ClassLabel,
    /// Sorted per-cell solution counts (stable matrices only).
    pub fingerprint: Vec<usize>,
    pub signature: Option<Signature>,
    pub degree: Option<i64>,
    /// Set when the normal form is within [`NEAR_LINE`] of an unstable line.
    pub near_unstable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub sector: Sector2D,
    pub count: SolutionCount,
    pub index_sum: i64,
    /// Masks of the complementary cones covering the cell.
    pub covering: Vec<u8>,
}

fn require_2x2(m: &Mat) -> Result<()> {
    if m.nrows() != 2 || m.ncols() != 2 {
        return Err(Error::DimensionUnsupported { expected: "2".into(), got: m.nrows() });
    }
    Ok(())
}

fn cell_reports(m: &Mat) -> Result<Vec<CellReport>> {
    cells_2d(m)?
        .into_iter()
        .map(|sector| {
            let sols = solve_enumerate(&LcpInstance::new(m.clone(), sector.midpoint())?, DEFAULT_TOL)?;
            let mut index_sum = 0;
            let mut covering = Vec::new();
            for s in &sols.isolated {
                covering.push(s.alpha.mask() as u8);
                index_sum += index_at(m, &s.alpha).map(i64::from).unwrap_or(0);
            }
            covering.sort();
            Ok(CellReport { sector, count: sols.count, index_sum, covering })
        })
        .collect()
}

/// Per-cell solution counts and index sums of a stable 2x2 matrix.
pub fn q_region_2d(m: &Mat) -> Result<Vec<CellReport>> {
    require_2x2(m)?;
    if !is_lcp_stable(m, STABILITY_TOL)? {
        return Err(Error::UnstableMatrix);
    }
    cell_reports(m)
}

/// Canonical form of a cyclic sequence of cone sets under rotation,
/// reflection and all relabelings of the four cones.
pub fn canonical_signature(cells: &[Vec<u8>]) -> Signature {
    let mut best: Option<Signature> = None;
    let perms = permutations4();
    let k = cells.len();
    for perm in &perms {
        let relabeled: Vec<Vec<u8>> = cells
            .iter()
            .map(|c| {
                let mut v: Vec<u8> = c.iter().map(|&a| perm[a as usize]).collect();
                v.sort();
                v
            })
            .collect();
        for reversed in [false, true] {
            let seq: Vec<Vec<u8>> = if reversed { relabeled.iter().rev().cloned().collect() } else { relabeled.clone() };
            for shift in 0..k {
                let rotated: Signature = (0..k).map(|i| seq[(i + shift) % k].clone()).collect();
                if best.as_ref().map_or(true, |b| rotated < *b) {
                    best = Some(rotated);
                }
            }
        }
    }
    best.unwrap_or_default()
}

fn permutations4() -> Vec<[u8; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4u8 {
        for b in 0..4u8 {
            for c in 0..4u8 {
                for d in 0..4u8 {
                    let p = [a, b, c, d];
                    if (0..4u8).all(|x| p.contains(&x)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Label of a 2x2 matrix: an unstable family, or one of the five stable classes.
pub fn classify_2d(m: &Mat, tol: f64) -> Result<ClassLabel2D> {
    require_2x2(m)?;
    let nf = normal_form_2d(m)?;
    let near_unstable = match (nf.theta1, nf.theta2) {
        (Some(a), Some(b)) => unstable_line_distance(a, b) < NEAR_LINE,
        _ => true,
    };
    if let Some(family) = unstable_family_2d(&nf, tol) {
        return Ok(ClassLabel2D { label: family.into(), fingerprint: vec![], signature: None, degree: None, near_unstable });
    }
    let cells = cell_reports(m)?;
    let mut fingerprint: Vec<usize> = cells.iter().map(|c| c.count.finite().unwrap_or(usize::MAX)).collect();
    fingerprint.sort();
    let covering: Vec<Vec<u8>> = cells.iter().map(|c| c.covering.clone()).collect();
    let signature = canonical_signature(&covering);
    let label = if is_p(m) {
        ClassLabel::C1
    } else {
        class_table()
            .into_iter()
            .find(|(s, l)| *s == signature && *l != ClassLabel::C1)
            .map(|(_, l)| l)
            .ok_or_else(|| Error::InvalidParameter {
                name: "M".into(),
                reason: format!("cell structure {signature:?} matches no stable class"),
            })?
    };
    let degree = cells.first().map(|c| c.index_sum);
    Ok(ClassLabel2D { label, fingerprint, signature: Some(signature), degree, near_unstable })
}

/// One connected stable region of the `(theta1, theta2)` square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasComponent {
    pub label: ClassLabel,
    pub size: usize,
    /// The grid point of largest stability margin in the region.
    pub representative: (f64, f64),
    pub representative_margin: f64,
}

/// Flood fill of the `(theta1, theta2)` square. Grid point `(i, j)` sits at
/// `((i + 1/2) h, (j + 1/2) h)` with `h = 2 pi / resolution`, and is blocked
/// when the stability margin of `M(theta1, theta2)` is below `0.75 h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atlas2D {
    pub resolution: usize,
    pub margins: Vec<f64>,
    /// Component id per grid point, `-1` when blocked. Row-major in `theta1`.
    pub component_of: Vec<i32>,
    pub components: Vec<AtlasComponent>,
}

impl Atlas2D {
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.resolution as f64
    }

    pub fn angles(&self, i: usize, j: usize) -> (f64, f64) {
        let h = self.spacing();
        ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h)
    }

    pub fn is_blocked(&self, i: usize, j: usize) -> bool {
        self.component_of[i * self.resolution + j] < 0
    }

    /// Components grouped by class label.
    pub fn classes(&self) -> Vec<(ClassLabel, Vec<usize>)> {
        let mut out: Vec<(ClassLabel, Vec<usize>)> = Vec::new();
        for (id, c) in self.components.iter().enumerate() {
            match out.iter_mut().find(|(l, _)| *l == c.label) {
                Some((_, ids)) => ids.push(id),
                None => out.push((c.label, vec![id])),
            }
        }
        out.sort_by_key(|(l, _)| *l);
        out
    }
}

pub fn flood_fill_atlas(resolution: usize) -> Result<Atlas2D> {
    let h = 2.0 * PI / resolution as f64;
    let threshold = 0.75 * h;
    let margins: Vec<f64> = (0..resolution * resolution)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / resolution, idx % resolution);
            let m = normal_form_matrix((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            stability_margin(&m).map(|r| r.margin).unwrap_or(0.0)
        })
        .collect();

    let mut component_of = vec![-1i32; margins.len()];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for start in 0..margins.len() {
        if margins[start] < threshold || component_of[start] >= 0 {
            continue;
        }
        let id = members.len() as i32;
        let mut queue = VecDeque::from([start]);
        component_of[start] = id;
        let mut cells = Vec::new();
        while let Some(idx) = queue.pop_front() {
            cells.push(idx);
            let (i, j) = (idx / resolution, idx % resolution);
            let mut visit = |ni: usize, nj: usize| {
                let nidx = ni * resolution + nj;
                if margins[nidx] >= threshold && component_of[nidx] < 0 {
                    component_of[nidx] = id;
                    queue.push_back(nidx);
                }
            };
            if i > 0 {
                visit(i - 1, j);
            }
            if i + 1 < resolution {
                visit(i + 1, j);
            }
            if j > 0 {
                visit(i, j - 1);
            }
            if j + 1 < resolution {
                visit(i, j + 1);
            }
        }
        members.push(cells);
    }

    let mut components = Vec::with_capacity(members.len());
    for cells in &members {
        let &best = cells.iter().max_by(|&&a, &&b| margins[a].total_cmp(&margins[b])).expect("nonempty");
        let (i, j) = (best / resolution, best % resolution);
        let rep = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
        let label = classify_2d(&normal_form_matrix(rep.0, rep.1), LINE_TOL)?.label;
        components.push(AtlasComponent { label, size: cells.len(), representative: rep, representative_margin: margins[best] });
    }
    Ok(Atlas2D { resolution, margins, component_of, components })
}

/// The index set of the complementary cone with the given mask.
pub fn cone_of_mask(mask: u8) -> IndexSet {
    IndexSet::from_mask(mask as u32, 2)
}
