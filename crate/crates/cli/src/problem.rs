//! Problem files: one JSON object with a `kind` of `lcp`, `lcs` or `circuit`.
//!
//! ```json
//! {"kind": "lcp", "name": "sign map", "m": [[1, 1], [1, 1]], "q": [2, -4]}
//! {"kind": "lcs", "a": ..., "b": ..., "c": ..., "d": ..., "e1": ..., "e2": ..., "r": [1.1], "s": [0.7]}
//! {"kind": "circuit", "params": {"r2": 10, "r": 1.1}}
//! ```

use std::fs;
use std::path::Path;

use lcp_atlas::circuit::{circuit_lcp_data, CircuitParams};
use lcp_atlas::lcs::{lcp_data, LcsModel};
use lcp_atlas::linalg::{serde_mat, serde_vec};
use lcp_atlas::{LcpInstance, Mat, Vector};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Lcp,
    Lcs,
    Circuit,
}

#[derive(Deserialize)]
struct Header {
    kind: Kind,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LcpFile {
    #[allow(dead_code)]
    kind: Kind,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(with = "serde_mat")]
    m: Mat,
    #[serde(with = "serde_vec")]
    q: Vector,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LcsFile {
    #[allow(dead_code)]
    kind: Kind,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(with = "serde_mat")]
    a: Mat,
    #[serde(with = "serde_mat")]
    b: Mat,
    #[serde(with = "serde_mat")]
    c: Mat,
    #[serde(with = "serde_mat")]
    d: Mat,
    #[serde(with = "serde_mat")]
    e1: Mat,
    #[serde(with = "serde_mat")]
    e2: Mat,
    #[serde(with = "serde_vec")]
    r: Vector,
    #[serde(with = "serde_vec")]
    s: Vector,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitFile {
    #[allow(dead_code)]
    kind: Kind,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    params: CircuitParams,
}

#[derive(Debug, Clone)]
pub enum Problem {
    Lcp(LcpInstance),
    Lcs { model: LcsModel, r: Vector, s: Vector },
    Circuit(CircuitParams),
}

#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub name: Option<String>,
    pub tol: Option<f64>,
    pub problem: Problem,
}

impl ProblemFile {
    /// The LCP posed by the file. LCS files use their `r` and `s`; circuit
    /// files use the LCP of the circuit at its `r`.
    pub fn lcp(&self) -> Result<LcpInstance, CliError> {
        let (m, q) = match &self.problem {
            Problem::Lcp(inst) => return Ok(inst.clone()),
            Problem::Lcs { model, r, s } => lcp_data(model, r, s).map_err(CliError::input)?,
            Problem::Circuit(p) => circuit_lcp_data(p, p.r).map_err(CliError::input)?,
        };
        LcpInstance::new(m, q).map_err(CliError::input)
    }
}

fn parse_as<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Parse(inner.to_string())
        } else {
            CliError::Parse(format!("field `{path}`: {inner}"))
        }
    })
}

pub fn parse(text: &str) -> Result<ProblemFile, CliError> {
    let header: Header = parse_as(text)?;
    let file = match header.kind {
        Kind::Lcp => {
            let f: LcpFile = parse_as(text)?;
            let inst = LcpInstance::new(f.m, f.q).map_err(CliError::input)?;
            ProblemFile { name: f.name, tol: f.tol, problem: Problem::Lcp(inst) }
        }
        Kind::Lcs => {
            let f: LcsFile = parse_as(text)?;
            let model = LcsModel::new(f.a, f.b, f.c, f.d, f.e1, f.e2).map_err(CliError::input)?;
            let (_, _, l) = model.dims();
            if f.r.len() != l || f.s.len() != l {
                return Err(CliError::Parse(format!("fields `r` and `s` must have length {l}")));
            }
            ProblemFile { name: f.name, tol: f.tol, problem: Problem::Lcs { model, r: f.r, s: f.s } }
        }
        Kind::Circuit => {
            let f: CircuitFile = parse_as(text)?;
            f.params.validate().map_err(CliError::input)?;
            ProblemFile { name: f.name, tol: f.tol, problem: Problem::Circuit(f.params) }
        }
    };
    if let Some(tol) = file.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::Parse(format!("field `tol`: must be positive, got {tol}")));
        }
    }
    Ok(file)
}

pub fn load(path: &Path) -> Result<ProblemFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}
