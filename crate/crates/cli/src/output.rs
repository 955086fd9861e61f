//! CSV tables and SVG plots for sweeps and trajectories.
//!
//! CSV headers:
//! - 1D sweep: `lambda,q_1..q_n,count,on_skeleton,skeleton_distance,singular,crosses_skeleton_next`
//! - circuit grid: `r2,r,count,unpivoted_count`
//! - trajectory: `t,xi_1..xi_n,z_1..z_m,r_1..r_l`
//!
//! `count` is an integer or `CONTINUUM`.

use lcp_atlas::lcs::Trajectory;
use lcp_atlas::sweep::BifurcationDiagram;
use lcp_atlas::{SolutionCount, Vector};

use crate::svg::{frame, Axis, SvgScene};
use crate::CliError;

const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![])
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn count_value(c: SolutionCount) -> f64 {
    match c {
        SolutionCount::Finite(k) => k as f64,
        SolutionCount::Continuum => f64::NAN,
    }
}

pub fn sweep_csv(d: &BifurcationDiagram, q0: &Vector, dir: &Vector) -> Result<String, CliError> {
    let mut w = writer();
    let mut header = vec!["lambda".to_string()];
    header.extend((1..=q0.len()).map(|i| format!("q_{i}")));
    header.extend(["count", "on_skeleton", "skeleton_distance", "singular", "crosses_skeleton_next"].map(String::from));
    w.write_record(&header).map_err(csv_err)?;
    for (i, p) in d.points.iter().enumerate() {
        let lambda = p.parameter[0];
        let mut row = vec![lambda.to_string()];
        row.extend((q0 + dir * lambda).iter().map(|v| v.to_string()));
        row.push(p.count.to_string());
        row.push(u8::from(p.on_skeleton).to_string());
        row.push(p.skeleton_distance.to_string());
        row.push(u8::from(p.singular).to_string());
        row.push(d.interval_crosses_skeleton.get(i).map(|&b| u8::from(b).to_string()).unwrap_or_default());
        w.write_record(&row).map_err(csv_err)?;
    }
    finish(w)
}

pub fn grid_csv(d: &BifurcationDiagram) -> Result<String, CliError> {
    let mut w = writer();
    w.write_record(["r2", "r", "count", "unpivoted_count"]).map_err(csv_err)?;
    for p in &d.points {
        let secondary = p.secondary_count.map(|c| c.to_string()).unwrap_or_default();
        w.write_record([p.parameter[0].to_string(), p.parameter[1].to_string(), p.count.to_string(), secondary]).map_err(csv_err)?;
    }
    finish(w)
}

pub fn trajectory_csv(t: &Trajectory) -> Result<String, CliError> {
    let mut w = writer();
    let (n, m, l) = (t.states[0].len(), t.z[0].len(), t.inputs[0].len());
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("xi_{i}")));
    header.extend((1..=m).map(|i| format!("z_{i}")));
    header.extend((1..=l).map(|i| format!("r_{i}")));
    w.write_record(&header).map_err(csv_err)?;
    for k in 0..t.times.len() {
        let mut row = vec![t.times[k].to_string()];
        for v in [&t.states[k], &t.z[k], &t.inputs[k]] {
            row.extend(v.iter().map(|x| x.to_string()));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    finish(w)
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = 0.05 * (hi - lo).max(1e-9);
    (lo - pad, hi + pad)
}

/// Solution branches as `|z|` over `lambda`, with the solution count below.
pub fn sweep_svg(d: &BifurcationDiagram, title: &str) -> String {
    let mut scene = SvgScene::new(640.0, 480.0);
    scene.text(320.0, 20.0, 14.0, "middle", title);
    let lambdas: Vec<f64> = d.points.iter().map(|p| p.parameter[0]).collect();
    let (l0, l1) = bounds(lambdas.iter().copied());
    let x = Axis::new(l0, l1, 70.0, 610.0);

    let mut norms: Vec<f64> = d.points.iter().flat_map(|p| p.solutions.iter().map(|s| s.z.norm())).collect();
    for p in &d.points {
        for f in &p.families {
            if let Some((Some(lo), Some(hi))) = f.segment {
                norms.extend([f.z_at(lo).norm(), f.z_at(hi).norm()]);
            }
        }
    }
    let (lo, hi) = bounds(norms.into_iter());
    let (z0, z1) = padded(lo.min(0.0), hi.max(1.0));
    let y = Axis::new(z0, z1, 300.0, 40.0);
    frame(&mut scene, &x, &y, "lambda", "|z|");
    for (b, branch) in d.branches.iter().enumerate() {
        let pts: Vec<(f64, f64)> =
            branch.members.iter().map(|&(p, s)| (x.map(d.points[p].parameter[0]), y.map(d.points[p].solutions[s].z.norm()))).collect();
        let color = PALETTE[b % PALETTE.len()];
        scene.polyline(&pts, color, 1.5);
        for &(px, py) in &pts {
            scene.circle(px, py, 2.5, color);
        }
    }
    for p in &d.points {
        for f in &p.families {
            let px = x.map(p.parameter[0]);
            match f.segment {
                Some((Some(lo), Some(hi))) => scene.line(px, y.map(f.z_at(lo).norm()), px, y.map(f.z_at(hi).norm()), "#c0392b", 3.0),
                _ => scene.line(px, y.to, px, y.from, "#c0392b", 1.0),
            }
        }
    }

    let counts: Vec<f64> = d.points.iter().map(|p| count_value(p.count)).collect();
    let cmax = bounds(counts.iter().copied()).1.max(1.0);
    let yc = Axis::new(0.0, cmax + 1.0, 430.0, 340.0);
    frame(&mut scene, &x, &yc, "", "count");
    let steps: Vec<(f64, f64)> = lambdas.iter().zip(&counts).map(|(&l, &c)| (x.map(l), yc.map(if c.is_nan() { cmax + 1.0 } else { c }))).collect();
    scene.polyline(&steps, "black", 1.0);
    for (p, &(px, py)) in d.points.iter().zip(&steps) {
        scene.circle(px, py, 2.5, if p.count.is_continuum() { "#c0392b" } else { "black" });
    }
    for i in d.count_changes() {
        let color = if d.interval_flagged(i) { "#7f8c8d" } else { "#c0392b" };
        let mid = x.map(0.5 * (lambdas[i] + lambdas[i + 1]));
        scene.line(mid, yc.from, mid, yc.to, color, 0.5);
    }
    scene.render()
}

fn grid_color(c: SolutionCount) -> &'static str {
    match c {
        SolutionCount::Finite(0) => "#ffffff",
        SolutionCount::Finite(1) => "#dfe7f2",
        SolutionCount::Finite(3) => "#3a6ea5",
        SolutionCount::Finite(_) => "#9bb8d8",
        SolutionCount::Continuum => "#c0392b",
    }
}

/// Equilibrium count over the `(r, R2)` grid. Dots mark points where the
/// unpivoted LCP has a different count.
pub fn grid_svg(d: &BifurcationDiagram, r2: &[f64], r: &[f64]) -> String {
    let mut scene = SvgScene::new(640.0, 560.0);
    scene.text(320.0, 20.0, 14.0, "middle", "equilibrium count");
    let x = Axis::new(r[0], r[r.len() - 1], 70.0, 610.0);
    let y = Axis::new(r2[0], r2[r2.len() - 1], 500.0, 40.0);
    let cw = (x.to - x.from) / r.len() as f64;
    let ch = (y.from - y.to) / r2.len() as f64;
    for (i, _) in r2.iter().enumerate() {
        for (j, _) in r.iter().enumerate() {
            let p = &d.points[i * r.len() + j];
            let (px, py) = (x.from + j as f64 * cw, y.from - (i + 1) as f64 * ch);
            scene.rect(px, py, cw, ch, grid_color(p.count));
            if p.secondary_count.is_some_and(|c| c != p.count) {
                scene.circle(px + cw / 2.0, py + ch / 2.0, (cw.min(ch) / 4.0).max(0.5), "black");
            }
        }
    }
    frame(&mut scene, &x, &y, "r", "R2");
    for (k, (label, c)) in [("1", SolutionCount::Finite(1)), ("3", SolutionCount::Finite(3)), ("continuum", SolutionCount::Continuum)].iter().enumerate() {
        let lx = 80.0 + 120.0 * k as f64;
        scene.rect(lx, 535.0, 12.0, 12.0, grid_color(*c));
        scene.text(lx + 16.0, 545.0, 11.0, "start", label);
    }
    scene.render()
}

/// States over time (top, with the input in gray) and complementarity variables (bottom).
pub fn trajectory_svg(t: &Trajectory) -> String {
    let mut scene = SvgScene::new(640.0, 520.0);
    let (t0, t1) = bounds(t.times.iter().copied());
    let x = Axis::new(t0, t1, 70.0, 610.0);
    let (s0, s1) = bounds(t.states.iter().chain(&t.inputs).flat_map(|v| v.iter().copied()));
    let (s0, s1) = padded(s0, s1);
    let ys = Axis::new(s0, s1, 230.0, 30.0);
    let (c0, c1) = bounds(t.z.iter().flat_map(|v| v.iter().copied()));
    let (c0, c1) = padded(c0, c1);
    let yz = Axis::new(c0, c1, 470.0, 280.0);
    frame(&mut scene, &x, &ys, "", "xi");
    frame(&mut scene, &x, &yz, "t", "z");
    let series = |scene: &mut SvgScene, data: &[Vector], axis: &Axis, color: &dyn Fn(usize) -> &'static str| {
        for k in 0..data[0].len() {
            let pts: Vec<(f64, f64)> = t.times.iter().zip(data).map(|(&tt, v)| (x.map(tt), axis.map(v[k]))).collect();
            scene.polyline(&pts, color(k), 1.2);
        }
    };
    series(&mut scene, &t.inputs, &ys, &|_| "#999999");
    series(&mut scene, &t.states, &ys, &|k| PALETTE[k % PALETTE.len()]);
    series(&mut scene, &t.z, &yz, &|k| PALETTE[k % PALETTE.len()]);
    scene.render()
}
