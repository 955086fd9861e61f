//! Linear complementarity systems
//!
//! ```text
//! xi' = A xi + B z + E1 r
//! w   = C xi + D z + E2 s
//! 0 <= z  ⟂  w >= 0
//! ```
//!
//! and the correspondence between their equilibria and the solutions of
//! `f_M(x) = q(r, s)` with `M = D - C A^{-1} B`, `q = E2 s - C A^{-1} E1 r`.

use serde::{Deserialize, Serialize};

use crate::analysis::is_p;
use crate::error::{Error, Result};
use crate::lcp::{solve_enumerate, x_from_z, DegenerateFamily, LcpInstance, SolutionCount, DEFAULT_TOL};
use crate::lemke::{solve_lemke, LemkeOutcome};
use crate::linalg::{self, ensure_finite, ensure_len, negative_part, Mat, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcsModel {
    #[serde(with = "linalg::serde_mat")]
    pub a: Mat,
    #[serde(with = "linalg::serde_mat")]
    pub b: Mat,
    #[serde(with = "linalg::serde_mat")]
    pub c: Mat,
    #[serde(with = "linalg::serde_mat")]
    pub d: Mat,
    #[serde(with = "linalg::serde_mat")]
    pub e1: Mat,
    #[serde(with = "linalg::serde_mat")]
    pub e2: Mat,
}

fn shape_err(what: &str, got: (usize, usize), want: (usize, usize)) -> Error {
    Error::DimensionMismatch(format!("{what} is {}x{}, expected {}x{}", got.0, got.1, want.0, want.1))
}

impl LcsModel {
    pub fn new(a: Mat, b: Mat, c: Mat, d: Mat, e1: Mat, e2: Mat) -> Result<Self> {
        let model = LcsModel { a, b, c, d, e1, e2 };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.a.nrows();
        let m = self.d.nrows();
        let l = self.e1.ncols();
        let checks = [
            ("A", &self.a, (n, n)),
            ("B", &self.b, (n, m)),
            ("C", &self.c, (m, n)),
            ("D", &self.d, (m, m)),
            ("E1", &self.e1, (n, l)),
            ("E2", &self.e2, (m, l)),
        ];
        for (name, mat, want) in checks {
            if mat.shape() != want || want.0 == 0 {
                return Err(shape_err(name, mat.shape(), want));
            }
            ensure_finite(mat, name)?;
        }
        Ok(())
    }

    /// `(n, m, l)`: state, complementarity and input dimensions.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.a.nrows(), self.d.nrows(), self.e1.ncols())
    }

    fn check_inputs(&self, r: &Vector, s: &Vector) -> Result<()> {
        let (_, _, l) = self.dims();
        ensure_len(r, l, "r")?;
        ensure_len(s, l, "s")
    }

    fn a_inverse(&self) -> Result<Mat> {
        linalg::inverse(&self.a).ok_or(Error::SingularA)
    }
}

/// `M = D - C A^{-1} B` and `q = E2 s - C A^{-1} E1 r`.
pub fn lcp_data(model: &LcsModel, r: &Vector, s: &Vector) -> Result<(Mat, Vector)> {
    model.check_inputs(r, s)?;
    let a_inv = model.a_inverse()?;
    let m = &model.d - &model.c * &a_inv * &model.b;
    let q = &model.e2 * s - &model.c * &a_inv * (&model.e1 * r);
    Ok((m, q))
}

/// Unique solution `z` of `lcp(D, v)` for a P-matrix `D`. Not checked.
fn p_lcp(d: &Mat, v: &Vector) -> Result<Vector> {
    let n = v.len();
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || d[(i, j)] == 0.0));
    if diagonal {
        return Ok(Vector::from_fn(n, |i, _| (-v[i]).max(0.0) / d[(i, i)]));
    }
    let inst = LcpInstance::new(d.clone(), v.clone())?;
    if let Ok(LemkeOutcome::Solution { z, .. }) = solve_lemke(&inst, 1e-12, 50 * (n + 1)) {
        return Ok(z);
    }
    let sols = solve_enumerate(&inst, DEFAULT_TOL)?;
    sols.isolated.first().map(|s| s.z.clone()).ok_or(Error::NotPMatrix)
}

/// `x = f_D^{-1}(v)`, computed from the unique solution of `lcp(D, v)`.
pub fn fd_inverse(d: &Mat, v: &Vector) -> Result<Vector> {
    ensure_len(v, d.nrows(), "v")?;
    if !is_p(d) {
        return Err(Error::NotPMatrix);
    }
    let z = p_lcp(d, v)?;
    Ok(x_from_z(d, v, &z))
}

/// Complementarity variable selected by the state: `z = [-f_D^{-1}(C xi + E2 s)]^+`.
fn z_of_state(model: &LcsModel, xi: &Vector, s: &Vector) -> Result<Vector> {
    let v = &model.c * xi + &model.e2 * s;
    p_lcp(&model.d, &v)
}

fn field_unchecked(model: &LcsModel, xi: &Vector, r: &Vector, s: &Vector) -> Result<(Vector, Vector)> {
    let z = z_of_state(model, xi, s)?;
    let f = &model.a * xi + &model.b * &z + &model.e1 * r;
    Ok((f, z))
}

/// `F(xi, r, s) = A xi + B [-f_D^{-1}(C xi + E2 s)]^+ + E1 r`.
pub fn vector_field(model: &LcsModel, xi: &Vector, r: &Vector, s: &Vector) -> Result<Vector> {
    model.check_inputs(r, s)?;
    ensure_len(xi, model.dims().0, "xi")?;
    if !is_p(&model.d) {
        return Err(Error::NotPMatrix);
    }
    Ok(field_unchecked(model, xi, r, s)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    #[serde(with = "linalg::serde_vec")]
    pub xi: Vector,
    #[serde(with = "linalg::serde_vec")]
    pub x: Vector,
    #[serde(with = "linalg::serde_vec")]
    pub z: Vector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSet {
    pub equilibria: Vec<Equilibrium>,
    pub count: SolutionCount,
    /// Continuum witnesses, in LCP coordinates.
    pub families: Vec<DegenerateFamily>,
}

/// `Xi(x, r) = -A^{-1} (B [-x]^+ + E1 r)`.
pub fn state_of(model: &LcsModel, x: &Vector, r: &Vector) -> Result<Vector> {
    let a_inv = model.a_inverse()?;
    Ok(-(a_inv * (&model.b * negative_part(x) + &model.e1 * r)))
}

/// Equilibria through the solutions of `f_M(x) = q(r, s)`.
pub fn equilibria(model: &LcsModel, r: &Vector, s: &Vector) -> Result<EquilibriumSet> {
    if !is_p(&model.d) {
        return Err(Error::NotPMatrix);
    }
    let (m, q) = lcp_data(model, r, s)?;
    let sols = solve_enumerate(&LcpInstance::new(m, q)?, DEFAULT_TOL)?;
    let mut equilibria = Vec::with_capacity(sols.isolated.len());
    for sol in sols.isolated {
        let xi = state_of(model, &sol.x, r)?;
        equilibria.push(Equilibrium { xi, x: sol.x, z: sol.z });
    }
    Ok(EquilibriumSet { equilibria, count: sols.count, families: sols.degenerate })
}

/// Piecewise-constant input: `r(t)` is the value of the last breakpoint at or before `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RSchedule {
    pub breakpoints: Vec<(f64, Vec<f64>)>,
}

impl RSchedule {
    pub fn constant(r: &Vector) -> Self {
        RSchedule { breakpoints: vec![(f64::NEG_INFINITY, r.as_slice().to_vec())] }
    }

    pub fn value_at(&self, t: f64) -> Vector {
        let mut current = &self.breakpoints[0].1;
        for (start, value) in &self.breakpoints {
            if *start <= t {
                current = value;
            } else {
                break;
            }
        }
        Vector::from_column_slice(current)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    #[serde(with = "linalg::serde_vec_list")]
    pub states: Vec<Vector>,
    #[serde(with = "linalg::serde_vec_list")]
    pub z: Vec<Vector>,
    #[serde(with = "linalg::serde_vec_list")]
    pub inputs: Vec<Vector>,
}

impl Trajectory {
    pub fn final_state(&self) -> &Vector {
        self.states.last().expect("nonempty trajectory")
    }

    /// The last sampled state at or before `t`.
    pub fn state_at(&self, t: f64) -> &Vector {
        let idx = self.times.iter().rposition(|&s| s <= t + 1e-12).unwrap_or(0);
        &self.states[idx]
    }
}

/// Fixed-step RK4 with one `lcp(D, .)` solve per stage. The input is held at
/// its value at the start of each step. Every `sample_every`-th step is kept.
pub fn simulate(
    model: &LcsModel,
    xi0: &Vector,
    schedule: &RSchedule,
    s: &Vector,
    dt: f64,
    t_end: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    let (n, _, l) = model.dims();
    ensure_len(xi0, n, "xi0")?;
    ensure_len(s, l, "s")?;
    if schedule.breakpoints.is_empty() || schedule.breakpoints.iter().any(|(_, r)| r.len() != l) {
        return Err(Error::DimensionMismatch(format!("schedule values must have length {l}")));
    }
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidParameter { name: "dt".into(), reason: "step and horizon must be positive".into() });
    }
    if !is_p(&model.d) {
        return Err(Error::NotPMatrix);
    }
    let every = sample_every.max(1);
    let steps = (t_end / dt).round() as usize;
    let mut traj = Trajectory { times: vec![], states: vec![], z: vec![], inputs: vec![] };
    let mut xi = xi0.clone();
    for step in 0..=steps {
        let t = step as f64 * dt;
        let r = schedule.value_at(t);
        let (k1, z) = field_unchecked(model, &xi, &r, s)?;
        if step % every == 0 || step == steps {
            traj.times.push(t);
            traj.states.push(xi.clone());
            traj.z.push(z);
            traj.inputs.push(r.clone());
        }
        if step == steps {
            break;
        }
        let (k2, _) = field_unchecked(model, &(&xi + &k1 * (0.5 * dt)), &r, s)?;
        let (k3, _) = field_unchecked(model, &(&xi + &k2 * (0.5 * dt)), &r, s)?;
        let (k4, _) = field_unchecked(model, &(&xi + &k3 * dt), &r, s)?;
        xi += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    Ok(traj)
}
