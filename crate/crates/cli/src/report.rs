//! Report types printed by the subcommands, as JSON or as text.

use std::fmt::Write;

use lcp_atlas::analysis::{DegreeReport, R0Report};
use lcp_atlas::circuit::CircuitParams;
use lcp_atlas::classify::ClassLabel2D;
use lcp_atlas::equivalence::NormalForm2D;
use lcp_atlas::lcp::{x_from_z, DegenerateFamily, IsolatedSolution};
use lcp_atlas::lcs::EquilibriumSet;
use lcp_atlas::lemke::LemkeOutcome;
use lcp_atlas::stability::{MarginReport, MarginSet, WeakWitness, WitnessKind};
use lcp_atlas::sweep::BifurcationDiagram;
use lcp_atlas::{IndexSet, LcpInstance, SolutionCount, SolutionSet, Vector};
use serde::{Deserialize, Serialize};

/// Shortest decimal with at most ten fractional digits.
pub fn num(v: f64) -> String {
    let s = format!("{v:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

pub fn vec_text(v: &Vector) -> String {
    let parts: Vec<String> = v.iter().map(|&x| num(x)).collect();
    format!("[{}]", parts.join(", "))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum SolveReport {
    Enumerate { name: Option<String>, solutions: SolutionSet },
    Lemke { name: Option<String>, outcome: LemkeOutcome },
}

fn solution_text(out: &mut String, k: usize, s: &IsolatedSolution) {
    let _ = writeln!(out, "solution {k}: alpha = {}", s.alpha);
    let _ = writeln!(out, "  z = {}", vec_text(&s.z));
    let _ = writeln!(out, "  x = {}", vec_text(&s.x));
    let _ = writeln!(out, "  w = {}", vec_text(&s.w));
}

fn family_text(out: &mut String, k: usize, f: &DegenerateFamily) {
    let _ = writeln!(out, "family {k}: alpha = {}, dimension {}", f.alpha, f.nullspace_generators.len());
    let _ = writeln!(out, "  z0 = {}", vec_text(&f.particular_z));
    if let Some((lo, hi)) = f.segment {
        let end = |t: Option<f64>, inf: &str| t.map(num).unwrap_or_else(|| inf.into());
        let _ = writeln!(out, "  x = x0 + t g, g = {}, t in [{}, {}]", vec_text(&f.nullspace_generators[0]), end(lo, "-inf"), end(hi, "inf"));
        if let (Some(lo), Some(hi)) = (lo, hi) {
            let _ = writeln!(out, "  endpoints z = {} and {}", vec_text(&f.z_at(lo)), vec_text(&f.z_at(hi)));
        }
    }
}

impl SolveReport {
    pub fn text(&self, inst: &LcpInstance) -> String {
        let mut out = String::new();
        match self {
            SolveReport::Enumerate { solutions, .. } => {
                let _ = writeln!(out, "count: {}", solutions.count);
                for (k, s) in solutions.isolated.iter().enumerate() {
                    solution_text(&mut out, k + 1, s);
                }
                for (k, f) in solutions.degenerate.iter().enumerate() {
                    family_text(&mut out, k + 1, f);
                }
            }
            SolveReport::Lemke { outcome, .. } => match outcome {
                LemkeOutcome::Solution { z, w, pivots } => {
                    let alpha = IndexSet::from_zero_based(&(0..z.len()).filter(|&i| z[i] > 0.0).collect::<Vec<_>>(), z.len())
                        .expect("index within range");
                    let s = IsolatedSolution { alpha, z: z.clone(), x: x_from_z(&inst.m, &inst.q, z), w: w.clone() };
                    let _ = writeln!(out, "lemke: solution after {pivots} pivots");
                    solution_text(&mut out, 1, &s);
                }
                LemkeOutcome::RayTermination { pivots } => {
                    let _ = writeln!(out, "lemke: ray termination after {pivots} pivots, no solution found");
                }
            },
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub name: Option<String>,
    pub r0: R0Report,
    pub degenerate_alphas: Vec<IndexSet>,
    pub weak_witness: Option<WeakWitness>,
    pub is_stable: bool,
    pub margin: Option<MarginReport>,
    pub degree: Option<DegreeReport>,
}

impl AnalyzeReport {
    pub fn text(&self) -> String {
        let mut out = String::new();
        match &self.r0.witness {
            None => out.push_str("R0: yes\n"),
            Some(w) => {
                let _ = writeln!(out, "R0: no (nonzero solution with q = 0 on alpha = {}: z = {})", w.alpha, vec_text(&w.p));
            }
        }
        let cones: Vec<String> = self.degenerate_alphas.iter().map(|a| a.to_string()).collect();
        let _ = writeln!(out, "degenerate cones: {}", if cones.is_empty() { "none".into() } else { cones.join(" ") });
        match &self.weak_witness {
            None => out.push_str("weakly degenerate: no\n"),
            Some(w) => match w.kind {
                WitnessKind::DegenerateCone => {
                    let alpha = w.alpha.as_ref().map(|a| a.to_string()).unwrap_or_default();
                    let _ = writeln!(out, "weakly degenerate: degenerate cone alpha = {alpha}");
                }
                WitnessKind::FacetContainment => {
                    let k = w.k.map(|k| (k + 1).to_string()).unwrap_or_default();
                    let facet = w.facet.as_ref().map(|f| f.to_string()).unwrap_or_default();
                    let _ = writeln!(out, "weakly degenerate: k={k}, facet {facet}");
                }
            },
        }
        out.push_str(if self.is_stable { "STABLE\n" } else { "UNSTABLE\n" });
        if let Some(m) = &self.margin {
            let _ = write!(out, "margin: {}", num(m.margin));
            if let Some(a) = &m.argmin {
                let set = match a.set {
                    MarginSet::A => "A",
                    MarginSet::B => "B",
                };
                let _ = write!(out, " (set {set}, k={}", a.k + 1);
                if let Some(f) = &a.facet {
                    let _ = write!(out, ", facet {f}");
                }
                if let Some(alpha) = &a.alpha {
                    let _ = write!(out, ", alpha = {alpha}");
                }
                out.push(')');
            }
            out.push('\n');
        }
        match (&self.degree, self.r0.is_r0) {
            (Some(d), _) => {
                let k = d.per_solution_indices.len();
                let _ = writeln!(out, "degree: {} (probe q = {}, {k} solution{})", d.degree, vec_text(&d.probe_q), if k == 1 { "" } else { "s" });
            }
            (None, false) => out.push_str("degree: undefined (not R0)\n"),
            (None, true) => {}
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub name: Option<String>,
    pub normal_form: NormalForm2D,
    pub class: ClassLabel2D,
}

impl ClassifyReport {
    pub fn text(&self) -> String {
        let mut out = format!("{}\n", self.class.label);
        let fp: Vec<String> = self.class.fingerprint.iter().map(|c| c.to_string()).collect();
        if !fp.is_empty() {
            let _ = writeln!(out, "fingerprint: [{}]", fp.join(", "));
        }
        if let Some(d) = self.class.degree {
            let _ = writeln!(out, "degree: {d}");
        }
        let angle = |t: Option<f64>| t.map(num).unwrap_or_else(|| "-".into());
        let nf = &self.normal_form;
        let _ = writeln!(out, "normal form: theta1 = {}, theta2 = {} (column ranks {}, {})", angle(nf.theta1), angle(nf.theta2), nf.r1, nf.r2);
        if self.class.near_unstable {
            out.push_str("warning: close to an unstable line\n");
        }
        out
    }
}

pub fn sweep_text(d: &BifurcationDiagram) -> String {
    let mut out = String::new();
    let counts: Vec<String> = d.points.iter().map(|p| p.count.to_string()).collect();
    let _ = writeln!(out, "points: {}", d.points.len());
    let _ = writeln!(out, "counts: {}", counts.join(" "));
    let _ = writeln!(out, "branches: {}", d.branches.len());
    for i in d.count_changes() {
        let (a, b) = (&d.points[i], &d.points[i + 1]);
        let flagged = if d.interval_flagged(i) { "crosses K(M)" } else { "NOT on K(M)" };
        let _ = writeln!(out, "count change {} -> {} between lambda {} and {} ({flagged})", a.count, b.count, num(a.parameter[0]), num(b.parameter[0]));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSample {
    pub r2: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitInfo {
    pub params: CircuitParams,
    pub mhat: Vec<Vec<f64>>,
    pub gamma: f64,
    pub samples: Vec<GammaSample>,
    /// Consecutive grid values of `R2` where `gamma` changes sign.
    pub sign_change: Option<[f64; 2]>,
    /// Root of `gamma` inside the bracket, by bisection.
    pub root: Option<f64>,
}

impl CircuitInfo {
    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "R2 = {}, r = {}, s = {}", num(self.params.r2), num(self.params.r), num(self.params.s));
        out.push_str("pivoted matrix:\n");
        for row in &self.mhat {
            let _ = writeln!(out, "  {}", vec_text(&Vector::from_vec(row.clone())));
        }
        let _ = writeln!(out, "gamma = {}", num(self.gamma));
        out.push_str("R2 gamma\n");
        for s in &self.samples {
            let _ = writeln!(out, "{} {:.6e}", num(s.r2), s.gamma);
        }
        match (self.sign_change, self.root) {
            (Some([a, b]), Some(root)) => {
                let _ = writeln!(out, "gamma changes sign between R2 = {} and {} (root {})", num(a), num(b), num(root));
            }
            _ => out.push_str("gamma keeps its sign on the grid\n"),
        }
        out
    }
}

pub fn equilibria_text(set: &EquilibriumSet) -> String {
    let mut out = format!("count: {}\n", set.count);
    for (k, e) in set.equilibria.iter().enumerate() {
        let _ = writeln!(out, "equilibrium {}: xi = {}", k + 1, vec_text(&e.xi));
        let _ = writeln!(out, "  z = {}", vec_text(&e.z));
    }
    for f in &set.families {
        let _ = writeln!(out, "continuum on alpha = {}", f.alpha);
    }
    out
}

pub fn grid_text(d: &BifurcationDiagram) -> String {
    let mut out = String::new();
    let mut tally: Vec<(SolutionCount, usize)> = vec![];
    for p in &d.points {
        match tally.iter_mut().find(|(c, _)| *c == p.count) {
            Some((_, n)) => *n += 1,
            None => tally.push((p.count, 1)),
        }
    }
    tally.sort_by_key(|(c, _)| c.finite().unwrap_or(usize::MAX));
    for (c, n) in tally {
        let _ = writeln!(out, "count {c}: {n} points");
    }
    let three = d.components_where(|p| p.count == SolutionCount::Finite(3));
    let _ = writeln!(out, "three-equilibrium components: {}", three.len());
    let differ = d.points.iter().filter(|p| p.secondary_count.is_some_and(|c| c != p.count)).count();
    let _ = writeln!(out, "points where the unpivoted LCP count differs: {differ}");
    out
}
