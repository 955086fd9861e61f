//! Two-transistor negative-resistance circuit with Ebers–Moll transistor models.
//!
//! State `xi = (x1a, x2a, x1b, x2b)` holds capacitor voltages, `z` the diode
//! currents, `r` the potential difference across the port and `s` the diode
//! forward voltage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lcs::{lcp_data, LcsModel};
use crate::linalg::{self, mat_from_rows, Mat, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitParams {
    pub r0a: f64,
    pub r1a: f64,
    pub r2a: f64,
    pub r0b: f64,
    pub r1b: f64,
    pub r2b: f64,
    pub r1: f64,
    pub r2: f64,
    pub c1a: f64,
    pub c2a: f64,
    pub c1b: f64,
    pub c2b: f64,
    pub alpha_f: f64,
    pub alpha_r: f64,
    /// Reverse diode resistance `R_R` of the transistor model.
    pub rr: f64,
    /// Forward diode resistance `R_F` of the transistor model.
    pub rf: f64,
    pub s: f64,
    pub r: f64,
}

impl Default for CircuitParams {
    /// Reference design with `R2 = 10 Ω`, which has three equilibria for `r` near 1 V.
    fn default() -> Self {
        CircuitParams {
            r0a: 100.0,
            r1a: 2200.0,
            r2a: 100.0,
            r0b: 100.0,
            r1b: 100.0,
            r2b: 10_000.0,
            r1: 10.0,
            r2: 10.0,
            c1a: 100e-6,
            c2a: 100e-6,
            c1b: 100e-6,
            c2b: 100e-6,
            alpha_f: 0.99,
            alpha_r: 0.5,
            rr: 1.0,
            rf: 1.0,
            s: 0.7,
            r: 1.1,
        }
    }
}

/// Conductances `G = 1/R`.
#[derive(Debug, Clone, Copy)]
struct Conductances {
    g0a: f64,
    g1a: f64,
    g2a: f64,
    g0b: f64,
    g1b: f64,
    g2b: f64,
    g1: f64,
    g2: f64,
}

impl CircuitParams {
    pub fn with_r2(&self, r2: f64) -> Self {
        CircuitParams { r2, ..self.clone() }
    }

    pub fn with_r(&self, r: f64) -> Self {
        CircuitParams { r, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("r0a", self.r0a),
            ("r1a", self.r1a),
            ("r2a", self.r2a),
            ("r0b", self.r0b),
            ("r1b", self.r1b),
            ("r2b", self.r2b),
            ("r1", self.r1),
            ("r2", self.r2),
            ("c1a", self.c1a),
            ("c2a", self.c2a),
            ("c1b", self.c1b),
            ("c2b", self.c2b),
            ("rr", self.rr),
            ("rf", self.rf),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter { name: name.into(), reason: format!("must be finite and positive, got {v}") });
            }
        }
        for (name, v) in [("alpha_f", self.alpha_f), ("alpha_r", self.alpha_r)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter { name: name.into(), reason: format!("must lie in (0, 1), got {v}") });
            }
        }
        for (name, v) in [("s", self.s), ("r", self.r)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name: name.into(), reason: "must be finite".into() });
            }
        }
        Ok(())
    }

    fn conductances(&self) -> Conductances {
        Conductances {
            g0a: 1.0 / self.r0a,
            g1a: 1.0 / self.r1a,
            g2a: 1.0 / self.r2a,
            g0b: 1.0 / self.r0b,
            g1b: 1.0 / self.r1b,
            g2b: 1.0 / self.r2b,
            g1: 1.0 / self.r1,
            g2: 1.0 / self.r2,
        }
    }

    fn q_scale(&self) -> Mat {
        Mat::from_diagonal(&Vector::from_vec(vec![1.0 / self.c1a, 1.0 / self.c2a, 1.0 / self.c1b, 1.0 / self.c2b]))
    }

    /// Unscaled state matrix, `A = Q * a_blocks`.
    fn a_blocks(&self) -> Mat {
        let Conductances { g0a, g1a, g2a, g0b, g1b, g2b, g1, g2 } = self.conductances();
        mat_from_rows(&[
            &[-(g0a + g2a + g2), g2a + g2, 0.0, g2],
            &[g2a + g2, -(g1a + g2a + g1 + g2), g1, -(g1 + g2)],
            &[0.0, g1, -(g0b + g2b + g1), g2b + g1],
            &[g2, -(g1 + g2), g2b + g1, -(g1b + g2b + g1 + g2)],
        ])
    }

    fn b_blocks(&self) -> Mat {
        let t = mat_from_rows(&[&[-1.0 / self.alpha_r, 1.0], &[1.0, -1.0 / self.alpha_f]]);
        let mut b = Mat::zeros(4, 4);
        b.view_mut((0, 0), (2, 2)).copy_from(&t);
        b.view_mut((2, 2), (2, 2)).copy_from(&t);
        b
    }
}

pub fn circuit_model(params: &CircuitParams) -> Result<LcsModel> {
    params.validate()?;
    let Conductances { g1, g2, .. } = params.conductances();
    let q = params.q_scale();
    let a = &q * params.a_blocks();
    let b = &q * params.b_blocks();
    let c = -Mat::identity(4, 4);
    let d = Mat::from_diagonal(&Vector::from_vec(vec![
        params.rr / params.alpha_r,
        params.rf / params.alpha_f,
        params.rr / params.alpha_r,
        params.rf / params.alpha_f,
    ]));
    let e1 = &q * Mat::from_column_slice(4, 1, &[-g2, g1 + g2, -g1, g1 + g2]);
    let e2 = Mat::from_element(4, 1, 1.0);
    LcsModel::new(a, b, c, d, e1, e2)
}

/// `(M, q)` of the full circuit model at port voltage `r` and forward voltage `params.s`.
pub fn circuit_lcp_data(params: &CircuitParams, r: f64) -> Result<(Mat, Vector)> {
    let model = circuit_model(params)?;
    lcp_data(&model, &Vector::from_element(1, r), &Vector::from_element(1, params.s))
}

/// `M̂ = -B^{-1} A C^{-1}` evaluated as a matrix product.
pub fn circuit_mhat_product(params: &CircuitParams) -> Result<Mat> {
    let model = circuit_model(params)?;
    let b_inv = linalg::inverse(&model.b).ok_or(Error::SingularB)?;
    let c_inv = linalg::inverse(&model.c).ok_or(Error::DimensionMismatch("C is singular".into()))?;
    Ok(-(b_inv * &model.a * c_inv))
}

/// Entrywise closed form of `M̂`. The capacitances cancel, and the common
/// factor `aF aR / (1 - aF aR)` comes from the inverse of the gain block.
pub fn circuit_mhat(params: &CircuitParams) -> Result<Mat> {
    params.validate()?;
    let Conductances { g0a, g1a, g2a, g0b, g1b, g2b, g1, g2 } = params.conductances();
    let (af, ar) = (params.alpha_f, params.alpha_r);
    let (bf, br) = (1.0 - af, 1.0 - ar);
    let (ga, gb) = (g2a + g2, g2b + g1);
    let kappa = af * ar / (1.0 - af * ar);
    let m = mat_from_rows(&[
        &[(g0a + bf * ga) / af, (af * (g1a + g1) - bf * ga) / af, -g1, (af * g1 - bf * g2) / af],
        &[(ar * g0a - br * ga) / ar, (g1a + g1 + br * ga) / ar, -g1 / ar, (g1 + br * g2) / ar],
        &[-g2, (af * g2 - bf * g1) / af, (g0b + bf * gb) / af, (af * (g1b + g2) - bf * gb) / af],
        &[-g2 / ar, (g2 + br * g1) / ar, (ar * g0b - br * gb) / ar, (g1b + g2 + br * gb) / ar],
    ]);
    Ok(m * kappa)
}

/// `q̂ = B^{-1}(A C^{-1} E2 s - E1 r)`.
pub fn circuit_qhat(params: &CircuitParams, r: f64, s: f64) -> Result<Vector> {
    let model = circuit_model(params)?;
    let b_inv = linalg::inverse(&model.b).ok_or(Error::SingularB)?;
    let c_inv = linalg::inverse(&model.c).ok_or(Error::DimensionMismatch("C is singular".into()))?;
    let rhs = &model.a * c_inv * &model.e2 * s - &model.e1 * r;
    Ok(Vector::from_column_slice((b_inv * rhs).as_slice()))
}

/// Sign indicator for the `{1,3}` principal minor of `M̂`. Positive gives a
/// unique equilibrium for every `r`, negative allows three.
pub fn gamma(params: &CircuitParams) -> Result<f64> {
    params.validate()?;
    let Conductances { g0a, g2a, g0b, g2b, g1, g2, .. } = params.conductances();
    let af = params.alpha_f;
    let bf = 1.0 - af;
    Ok(g0a * g0b
        + bf * (g0a * g2b + g0b * g2a + bf * g2a * g2b)
        + bf * (g0a + bf * g2a) * g1
        - ((2.0 * af - 1.0) * g1 - bf * (g0b + bf * g2b)) * g2)
}
