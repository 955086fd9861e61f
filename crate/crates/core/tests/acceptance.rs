//! Acceptance criteria 1-8, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) and exits nonzero if any
//! criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use lcp_atlas::analysis::{degree_at, is_p, is_r0, random_unit};
use lcp_atlas::circuit::{circuit_mhat, circuit_mhat_product, circuit_model, gamma, CircuitParams};
use lcp_atlas::classify::{flood_fill_atlas, q_region_2d, ClassLabel};
use lcp_atlas::equivalence::*;
use lcp_atlas::lcp::{f_eval, solve_enumerate, x_from_z, z_from_x, LcpInstance, SolutionCount, SolutionSet, DEFAULT_TOL};
use lcp_atlas::lcs::{equilibria, simulate, Equilibrium, RSchedule};
use lcp_atlas::lemke::{solve_lemke, LemkeOutcome};
use lcp_atlas::linalg::{mat_from_rows, vector};
use lcp_atlas::stability::{degenerate_cones, is_lcp_stable, is_weakly_degenerate, scan_extrema, stability_margin, WitnessKind, STABILITY_TOL};
use lcp_atlas::sweep::{linspace, sweep_1d, sweep_2d_circuit};
use lcp_atlas::{IndexSet, Mat, Vector};
use rand::seq::SliceRandom;
use rand::Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn sm(m: &Mat) -> f64 {
    stability_margin(m).unwrap().margin
}

fn example_family(eps: f64) -> Mat {
    mat_from_rows(&[&[-1.0 + eps, eps], &[eps, -1.0 + eps]])
}

/// Minimum over the closed-form sets A and B for the example family.
fn example_closed_form(eps: f64) -> f64 {
    let d = ((1.0 - eps).powi(2) + eps * eps).sqrt();
    let cos = (2.0 * eps * (1.0 - eps) / (d * d)).clamp(-1.0, 1.0);
    [1.0, eps.abs() / d, (1.0 - eps).abs() / d, cos.acos().sin()].into_iter().fold(f64::INFINITY, f64::min)
}

fn criterion_1() -> Check {
    let grid = linspace(-5.0, 5.0, 2000);
    let worst = grid.iter().map(|&e| (sm(&example_family(e)) - example_closed_form(e)).abs()).fold(0.0, f64::max);
    ensure!(worst <= 1e-8, "margin differs from closed form by {worst:e}");

    let (minima, maxima) = scan_extrema(|e| sm(&example_family(e)), -5.0, 5.0, 0.005);
    let mut zeros: Vec<f64> = minima.iter().filter(|m| m.value <= 1e-6).map(|m| m.at).collect();
    zeros.sort_by(f64::total_cmp);
    ensure!(zeros.len() == 3, "zeros at {zeros:?}");
    for (z, expected) in zeros.iter().zip([0.0, 0.5, 1.0]) {
        ensure!((z - expected).abs() <= 1e-6, "zero at {z}, expected {expected}");
    }
    let peaks: Vec<f64> = maxima.iter().map(|m| m.at).collect();
    ensure!(peaks.len() == 4, "maxima at {peaks:?}");
    for (p, expected) in peaks.iter().zip([-1.37, 0.37, 0.64, 2.37]) {
        ensure!((p - expected).abs() <= 0.01, "maximum at {p}, expected {expected}");
    }
    Ok(format!("max |sm - closed form| = {worst:.1e}; zeros {zeros:.7?}; maxima {peaks:.4?}"))
}

fn criterion_2() -> Check {
    let m = mat_from_rows(&[&[0.5, 5.0 / 3.0, 0.0], &[1.0, 1.0, 0.0], &[-0.3, -1.0, 1.0]]);
    ensure!(degenerate_cones(&m).unwrap().is_empty(), "unexpected degenerate cones");
    let w = is_weakly_degenerate(&m, STABILITY_TOL).unwrap().ok_or("not flagged weakly degenerate")?;
    let facet = w.facet.as_ref().map(|f| f.to_string()).unwrap_or_default();
    ensure!(w.kind == WitnessKind::FacetContainment && w.k == Some(1), "witness {w:?}");
    ensure!(facet == "pos[-M_1, I_2]", "witness facet {facet}");
    let margin = sm(&m);
    ensure!(margin <= 1e-9, "margin {margin:e}");

    // Rotate -M_2 by 0.1 rad about the facet plane's normal direction.
    let minus_m1: Vector = -m.column(0).clone_owned();
    let e2 = vector(&[0.0, 1.0, 0.0]);
    let normal = minus_m1.cross(&e2).normalize();
    let minus_m2: Vector = -m.column(1).clone_owned();
    let rotated = &minus_m2 * 0.1f64.cos() + &normal * (minus_m2.norm() * 0.1f64.sin());
    let mut tilted = m.clone();
    tilted.set_column(1, &(-rotated));
    ensure!(is_lcp_stable(&tilted, STABILITY_TOL).unwrap(), "perturbed matrix not stable");
    let tilted_margin = sm(&tilted);
    ensure!(tilted_margin > 0.0, "perturbed margin {tilted_margin}");
    Ok(format!("witness k=2 {facet}, margin {margin:.1e}; perturbed: stable, margin {tilted_margin:.4}"))
}

fn criterion_3() -> Check {
    let m = mat_from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
    let n = mat_from_rows(&[&[1.0, -1.0], &[1.0, 0.0]]);
    let dm = degenerate_cones(&m).unwrap();
    let dn = degenerate_cones(&n).unwrap();
    ensure!(dm == vec![IndexSet::full(2)], "degenerate cones of M: {dm:?}");
    ensure!(dn == vec![IndexSet::from_one_based(&[2], 2).unwrap()], "degenerate cones of N: {dn:?}");
    let lambdas = linspace(-1.0, 1.0, 21);
    let sweep_m = sweep_1d(&m, &vector(&[-1.0, -1.0]), &vector(&[1.0, -1.0]), &lambdas).unwrap();
    let sweep_n = sweep_1d(&n, &vector(&[1.0, 0.0]), &vector(&[0.0, 1.0]), &lambdas).unwrap();
    let expected = vec![SolutionCount::Finite(1), SolutionCount::Continuum, SolutionCount::Finite(1)];
    ensure!(sweep_m.profile() == expected, "M profile {:?}", sweep_m.profile());
    ensure!(sweep_n.profile() == expected, "N profile {:?}", sweep_n.profile());
    Ok(format!("degenerate {{1,2}} and {{2}}; both profiles {expected:?}"))
}

fn criterion_4() -> Check {
    let m = mat_from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
    let solve = |c: f64| solve_enumerate(&LcpInstance::new(m.clone(), vector(&[-1.0 + c, -1.0 - c])).unwrap(), DEFAULT_TOL).unwrap();
    for (c, z) in [(-2.0, [3.0, 0.0]), (3.0, [0.0, 4.0])] {
        let s = solve(c);
        ensure!(s.count == SolutionCount::Finite(1), "C xi = {c}: count {:?}", s.count);
        let err = (&s.isolated[0].z - vector(&z)).amax();
        ensure!(err <= 1e-10, "C xi = {c}: z = {}", s.isolated[0].z);
    }
    let s = solve(0.0);
    ensure!(s.count == SolutionCount::Continuum && s.degenerate.len() == 1, "C xi = 0: {:?}", s.count);
    let fam = &s.degenerate[0];
    let (lo, hi) = fam.segment.ok_or("no segment")?;
    let (lo, hi) = (lo.ok_or("unbounded")?, hi.ok_or("unbounded")?);
    for k in 0..=10 {
        let t = lo + (hi - lo) * k as f64 / 10.0;
        let z = fam.z_at(t);
        // z = (1 + theta, -theta) with theta in [-1, 0]
        let theta = -z[1];
        ensure!((z[0] - (1.0 + theta)).abs() <= 1e-10 && (-1e-10..=1.0 + 1e-10).contains(&z[1]), "member {z}");
    }
    let ends = [fam.z_at(lo), fam.z_at(hi)];
    for target in [vector(&[1.0, 0.0]), vector(&[0.0, 1.0])] {
        ensure!(ends.iter().any(|z| (z - &target).amax() <= 1e-10), "segment ends {ends:?}");
    }
    Ok("z(-2) = (3,0), z(3) = (0,4), z(0) = {(1+t,-t): t in [-1,0]}".into())
}

fn circuit_count(p: &CircuitParams, r: f64) -> SolutionCount {
    let model = circuit_model(p).unwrap();
    equilibria(&model, &Vector::from_element(1, r), &Vector::from_element(1, p.s)).unwrap().count
}

fn criterion_5() -> Check {
    let base = CircuitParams::default();
    let pair = IndexSet::from_one_based(&[1, 3], 4).unwrap();
    let mut worst = 0.0f64;
    let mut sign_changes = 0;
    let mut last_sign = None;
    for r2 in linspace(1.0, 1000.0, 200) {
        let p = base.with_r2(r2);
        let closed = circuit_mhat(&p).unwrap();
        worst = worst.max((&closed - circuit_mhat_product(&p).unwrap()).amax());
        let g = gamma(&p).unwrap();
        for (alpha, det) in lcp_atlas::analysis::all_principal_minors(&closed).unwrap() {
            if alpha == pair {
                ensure!((det > 0.0) == (g > 0.0), "R2 = {r2}: det {det:e}, gamma {g:e}");
            } else {
                ensure!(det > 0.0, "R2 = {r2}: minor {alpha} = {det:e}");
            }
        }
        if last_sign.is_some_and(|s| s != (g > 0.0)) {
            sign_changes += 1;
        }
        last_sign = Some(g > 0.0);
    }
    ensure!(worst <= 1e-10, "closed form differs from product by {worst:e}");
    ensure!(sign_changes == 1, "gamma changed sign {sign_changes} times");

    let p = base.with_r2(10.0);
    ensure!(gamma(&p).unwrap() < 0.0, "gamma not negative at R2 = 10");
    ensure!(circuit_count(&p, 1.1) == SolutionCount::Finite(3), "R2 = 10, r = 1.1: {:?}", circuit_count(&p, 1.1));
    for r in [0.5, 2.0] {
        ensure!(circuit_count(&p, r) == SolutionCount::Finite(1), "R2 = 10, r = {r}: {:?}", circuit_count(&p, r));
    }
    let q = base.with_r2(1000.0);
    ensure!(gamma(&q).unwrap() > 0.0, "gamma not positive at R2 = 1000");
    for r in linspace(-2.0, 4.0, 25) {
        ensure!(circuit_count(&q, r) == SolutionCount::Finite(1), "R2 = 1000, r = {r}: {:?}", circuit_count(&q, r));
    }

    let start = Instant::now();
    let diagram = sweep_2d_circuit(&base, &linspace(1.0, 250.0, 50), &linspace(0.5, 2.5, 50)).unwrap();
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(120), "sweep took {elapsed:?}");
    let counts: Vec<SolutionCount> = diagram.points.iter().map(|p| p.count).collect();
    ensure!(counts.iter().all(|c| matches!(c, SolutionCount::Finite(1) | SolutionCount::Finite(3))), "counts outside {{1, 3}}");
    let three = diagram.components_where(|p| p.count == SolutionCount::Finite(3));
    ensure!(three.len() == 1, "three-solution region has {} components", three.len());
    Ok(format!(
        "closed form err {worst:.1e}; minors ok on 200 R2 values; 3 equilibria at (10, 1.1); 50x50 sweep {:.2}s, one region of {} points",
        elapsed.as_secs_f64(),
        three[0].len()
    ))
}

fn nearest(eqs: &[Equilibrium], x: &Vector) -> (usize, f64) {
    eqs.iter().enumerate().map(|(i, e)| (i, (&e.xi - x).amax())).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap()
}

fn criterion_6() -> Check {
    let p = CircuitParams::default();
    let model = circuit_model(&p).unwrap();
    let (r, s) = (Vector::from_element(1, p.r), Vector::from_element(1, p.s));
    let eqs = equilibria(&model, &r, &s).unwrap().equilibria;
    ensure!(eqs.len() == 3, "{} equilibria", eqs.len());
    let run = |xi0: &Vector, sched: &RSchedule, t: f64| simulate(&model, xi0, sched, &s, 1e-4, t, 100).unwrap();

    let low = run(&Vector::zeros(4), &RSchedule::constant(&r), 2.0);
    let high = run(&Vector::from_element(4, 1.0), &RSchedule::constant(&r), 2.0);
    let (a, da) = nearest(&eqs, low.final_state());
    let (b, db) = nearest(&eqs, high.final_state());
    ensure!(da <= 1e-5 && db <= 1e-5, "distances {da:e}, {db:e}");
    ensure!(a != b, "both runs reached equilibrium {a}");
    let saddle = 3 - a - b;
    let mut rng = common::rng(61);
    let kick = Vector::from_fn(4, |_, _| rng.gen_range(-1e-3..1e-3));
    let pushed = run(&(&eqs[saddle].xi + kick), &RSchedule::constant(&r), 2.0);
    let (c, _) = nearest(&eqs, pushed.final_state());
    ensure!(c != saddle, "perturbed middle equilibrium did not leave");

    let pulses = RSchedule { breakpoints: vec![(0.0, vec![1.1]), (0.5, vec![2.0]), (0.6, vec![1.1]), (1.5, vec![0.3]), (1.6, vec![1.1])] };
    let traj = run(&Vector::zeros(4), &pulses, 3.0);
    let mut labels: Vec<usize> = vec![];
    for x in &traj.states {
        let (i, d) = nearest(&[eqs[a].clone(), eqs[b].clone()], x);
        if d < 0.05 && labels.last() != Some(&i) {
            labels.push(i);
        }
    }
    ensure!(labels == vec![0, 1, 0], "visited stable states {labels:?}");
    let (end, dend) = nearest(&eqs, traj.final_state());
    ensure!(end == a && dend <= 1e-5, "pulse run ended at {end} ({dend:e})");
    Ok(format!("limits within {:.1e} of two distinct equilibria; pulses switch low -> high -> low", da.max(db)))
}

fn criterion_7() -> Check {
    let start = Instant::now();
    let atlas = flood_fill_atlas(720).unwrap();
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(120), "flood fill took {elapsed:?}");
    let res = atlas.resolution;
    let h = atlas.spacing();

    let classes = atlas.classes();
    let labels: Vec<ClassLabel> = classes.iter().map(|(l, _)| *l).collect();
    ensure!(labels == vec![ClassLabel::C1, ClassLabel::C2, ClassLabel::C3, ClassLabel::C4, ClassLabel::C5], "classes {labels:?}");
    ensure!(atlas.components.len() == 17, "{} components", atlas.components.len());

    let mut q_classes = vec![];
    for (label, ids) in &classes {
        let all_covered = ids.iter().all(|&id| {
            let (t1, t2) = atlas.components[id].representative;
            q_region_2d(&normal_form_matrix(t1, t2)).unwrap().iter().all(|c| c.count.finite().is_some_and(|k| k > 0))
        });
        if all_covered {
            q_classes.push(*label);
        }
    }
    ensure!(q_classes == vec![ClassLabel::C1, ClassLabel::C3], "classes with full coverage {q_classes:?}");

    ensure!(classes[0].1.len() == 1, "C1 split into {} components", classes[0].1.len());
    let c1 = classes[0].1[0] as i32;
    let mut worst_blocked = 0.0f64;
    for i in 0..res {
        for j in 0..res {
            let (t1, t2) = atlas.angles(i, j);
            let comp = atlas.component_of[i * res + j];
            if comp < 0 {
                worst_blocked = worst_blocked.max(unstable_line_distance(t1, t2) / h);
                continue;
            }
            let p = is_p(&normal_form_matrix(t1, t2));
            ensure!(p == (comp == c1), "P predicate {p} at ({t1:.4}, {t2:.4}) in component {comp}");
        }
    }
    ensure!(worst_blocked <= 1.5, "blocked point {worst_blocked:.2} grid steps from the unstable lines");
    let sizes: Vec<String> = classes.iter().map(|(l, ids)| format!("{l:?} x{}", ids.len())).collect();
    Ok(format!(
        "{} components in 5 classes ({}); Q classes C1, C3; blocked points within {worst_blocked:.2} h of the unstable lines; {:.2}s",
        atlas.components.len(),
        sizes.join(", "),
        elapsed.as_secs_f64()
    ))
}

fn solve(m: &Mat, q: &Vector) -> SolutionSet {
    solve_enumerate(&LcpInstance::new(m.clone(), q.clone()).unwrap(), DEFAULT_TOL).unwrap()
}

fn criterion_8() -> Check {
    let mut rng = common::rng(81);

    for _ in 0..1000 {
        let n = rng.gen_range(1..=6);
        let m = common::gaussian_mat(&mut rng, n, n);
        let x = common::gaussian_vec(&mut rng, n);
        let q = f_eval(&m, &x).unwrap();
        let sols = solve(&m, &q);
        ensure!(sols.isolated.iter().any(|s| common::close(&s.x, &x, 1e-7)), "root {x} not recovered");
        for s in &sols.isolated {
            ensure!(common::close(&f_eval(&m, &s.x).unwrap(), &q, 1e-9), "f_M(x) != q");
            let w = &m * &s.z + &q;
            ensure!(s.z.min() >= -1e-9 && w.min() >= -1e-8 * (1.0 + q.amax()), "sign violation");
            ensure!(s.z.dot(&w).abs() <= 1e-8 * (1.0 + q.norm_squared()), "complementarity violation");
            ensure!(common::close(&z_from_x(&s.x), &s.z, 1e-9) && common::close(&x_from_z(&m, &q, &s.z), &s.x, 1e-9), "representations disagree");
        }
    }

    let mut r0 = 0;
    while r0 < 50 {
        let n = rng.gen_range(2..=4);
        let m = common::gaussian_mat(&mut rng, n, n);
        if !is_r0(&m).unwrap().is_r0 {
            continue;
        }
        r0 += 1;
        let mut seen = None;
        for _ in 0..100 {
            if let Some((d, _)) = degree_at(&m, &random_unit(n, &mut rng), 1e-8).unwrap() {
                ensure!(*seen.get_or_insert(d) == d, "degree not constant for {m}");
            }
        }
    }

    for case in 0..200 {
        let n = 1 + case % 4;
        let m = common::gaussian_mat(&mut rng, n, n);
        let q = common::gaussian_vec(&mut rng, n);
        let base = solve(&m, &q);
        let mapped = |other: &SolutionSet, f: &dyn Fn(&Vector) -> Vector| {
            other.count == base.count && base.isolated.iter().all(|s| other.isolated.iter().any(|t| common::close(&t.x, &f(&s.x), 1e-7)))
        };
        let beta = IndexSet::from_mask(rng.gen_range(0..1u32 << n), n);
        let pivoted = solve(&ppt(&m, &beta).unwrap(), &pivot_q_map(&m, &beta, &q).unwrap());
        ensure!(mapped(&pivoted, &|x| pivot_x_map(&beta, x)), "pivot on {beta} breaks case {case}");
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let permuted = solve(&permute_conjugate(&m, &perm).unwrap(), &permute_vector(&q, &perm));
        ensure!(mapped(&permuted, &|x| permute_vector(x, &perm)), "permutation breaks case {case}");
        let d = Vector::from_fn(n, |_, _| rng.gen_range(0.2..5.0));
        let conj = solve(&diag_conjugate(&m, &d).unwrap(), &q.component_div(&d));
        ensure!(mapped(&conj, &|x| x.component_div(&d)), "diagonal conjugation breaks case {case}");
        let scaled = solve(&diag_scale(&m, &d).unwrap(), &q);
        ensure!(
            mapped(&scaled, &|x| Vector::from_fn(n, |i, _| if x[i] < 0.0 { x[i] / d[i] } else { x[i] })),
            "column scaling breaks case {case}"
        );
    }

    for case in 0..500 {
        let n = 1 + case % 6;
        let m = common::random_p_matrix(&mut rng, n);
        let q = common::gaussian_vec(&mut rng, n);
        let inst = LcpInstance::new(m, q).unwrap();
        let sols = solve_enumerate(&inst, DEFAULT_TOL).unwrap();
        ensure!(sols.count == SolutionCount::Finite(1), "P-matrix case {case} count {:?}", sols.count);
        match solve_lemke(&inst, 1e-12, 1000).unwrap() {
            LemkeOutcome::Solution { z, .. } => ensure!(common::close(&z, &sols.isolated[0].z, 1e-8), "Lemke differs on case {case}"),
            other => return Err(format!("Lemke failed on case {case}: {other:?}")),
        }
    }
    Ok("1000 roundtrips, 50 R0 degrees x 100 probes, 200 x 4 transformations, 500 Lemke runs".into())
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("stability margin curve", criterion_1),
        ("weak degeneracy", criterion_2),
        ("equivalent pair", criterion_3),
        ("sign-map LCP", criterion_4),
        ("transistor circuit", criterion_5),
        ("bistability simulation", criterion_6),
        ("2x2 classification", criterion_7),
        ("property suites", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.1}s] {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.1}s] {why}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 8 acceptance criteria passed");
}
