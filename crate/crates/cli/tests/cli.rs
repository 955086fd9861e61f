use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lcp-atlas"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, contents: &str) -> PathBuf {
    let path = tmp(name);
    fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let text = stdout(&run(args));
    serde_json::from_str(&text).unwrap()
}

fn floats(v: &serde_json::Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn identity_with_nonnegative_q_has_the_zero_solution() {
    let f = write("identity.json", r#"{"kind": "lcp", "m": [[1, 0], [0, 1]], "q": [0.5, 2]}"#);
    let v = json(&["solve", f.to_str().unwrap(), "--json"]);
    assert_eq!(v["method"], "enumerate");
    assert_eq!(v["solutions"]["count"], 1);
    assert_eq!(floats(&v["solutions"]["isolated"][0]["z"]), vec![0.0, 0.0]);
    let lemke = json(&["solve", f.to_str().unwrap(), "--method", "lemke", "--json"]);
    assert_eq!(floats(&lemke["outcome"]["Solution"]["z"]), vec![0.0, 0.0]);
}

#[test]
fn sign_map_solution_at_positive_input() {
    // C xi = 3: q = (-1 + 3, -1 - 3)
    let f = write("sign.json", r#"{"kind": "lcp", "m": [[1, 1], [1, 1]], "q": [2, -4]}"#);
    let v = json(&["solve", f.to_str().unwrap(), "--json"]);
    let z = floats(&v["solutions"]["isolated"][0]["z"]);
    assert!((z[0]).abs() < 1e-12 && (z[1] - 4.0).abs() < 1e-12, "{z:?}");
    assert!(stdout(&run(&["solve", f.to_str().unwrap()])).contains("z = [0, 4]"));
}

#[test]
fn malformed_input_exits_2_with_location() {
    let f = write("broken.json", "{\"kind\": \"lcp\",\n \"m\": [[1, 0], [0, 1]],\n \"q\": [1, }");
    let out = run(&["solve", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");

    let f = write("wrongtype.json", r#"{"kind": "lcp", "m": [[1, 0], [0, "one"]], "q": [1, 1]}"#);
    let out = run(&["solve", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("m[1][1]"));

    let out = run(&["solve", tmp("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(run(&["solve"]).status.code(), Some(2));
}

#[test]
fn unsupported_dimension_exits_4() {
    let f = write("three.json", r#"{"kind": "lcp", "m": [[1, 0, 0], [0, 1, 0], [0, 0, 1]], "q": [1, 1, 1]}"#);
    assert_eq!(run(&["classify2d", f.to_str().unwrap()]).status.code(), Some(4));
    let n = 17;
    let rows: Vec<String> = (0..n).map(|i| format!("[{}]", (0..n).map(|j| if i == j { "1" } else { "0" }).collect::<Vec<_>>().join(","))).collect();
    let f = write("big.json", &format!(r#"{{"kind": "lcp", "m": [{}], "q": [{}]}}"#, rows.join(","), vec!["1"; n].join(",")));
    assert_eq!(run(&["solve", f.to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn analyze_reports_weak_degeneracy_and_zero_margin() {
    let f = write("partition.json", r#"{"kind": "lcp", "m": [[0.5, 1.6666666666666667, 0], [1, 1, 0], [-0.3, -1, 1]], "q": [1, 1, 1]}"#);
    let text = stdout(&run(&["analyze", f.to_str().unwrap()]));
    assert!(text.contains("weakly degenerate: k=2, facet pos[-M_1, I_2]"), "{text}");
    assert!(text.contains("UNSTABLE\n") && text.contains("margin: 0 "), "{text}");
}

#[test]
fn analyze_identity() {
    let f = write("identity3.json", r#"{"kind": "lcp", "m": [[1, 0, 0], [0, 1, 0], [0, 0, 1]], "q": [1, 1, 1]}"#);
    let text = stdout(&run(&["analyze", f.to_str().unwrap()]));
    assert!(text.contains("STABLE\n") && !text.contains("UNSTABLE"), "{text}");
    assert!(text.contains("margin: 1 ") && text.contains("degree: 1 "), "{text}");
    let only_margin = stdout(&run(&["analyze", f.to_str().unwrap(), "--margin"]));
    assert!(only_margin.contains("margin:") && !only_margin.contains("degree:"));
}

#[test]
fn analyze_margin_matches_closed_form() {
    let eps: f64 = 0.37;
    let f = write("eps.json", &format!(r#"{{"kind": "lcp", "m": [[{a}, {eps}], [{eps}, {a}]], "q": [1, 1]}}"#, a = -1.0 + eps));
    let v = json(&["analyze", f.to_str().unwrap(), "--margin", "--json"]);
    let d = ((1.0 - eps).powi(2) + eps * eps).sqrt();
    let expected = [1.0, eps / d, (1.0 - eps) / d, (2.0 * eps * (1.0 - eps) / (d * d)).acos().sin()].into_iter().fold(f64::INFINITY, f64::min);
    let got = v["margin"]["margin"].as_f64().unwrap();
    assert!((got - expected).abs() <= 1e-9, "{got} vs {expected}");
    assert!(v["degree"].is_null());
}

#[test]
fn classify2d_labels() {
    let cases = [
        ("c_identity.json", "[[1, 0], [0, 1]]", "C1"),
        // theta1 = 3pi/2, theta2 = 0: -M_1 = (0, -1), -M_2 = e_2
        ("c_subspace.json", "[[0, 0], [1, -1]]", "U_SUBSPACE"),
        ("c_zero.json", "[[0, 0], [0, 0]]", "ZERO"),
    ];
    for (name, m, label) in cases {
        let f = write(name, &format!(r#"{{"kind": "lcp", "m": {m}, "q": [1, 1]}}"#));
        let text = stdout(&run(&["classify2d", f.to_str().unwrap()]));
        assert_eq!(text.lines().next(), Some(label), "{m}: {text}");
    }
}

#[test]
fn sweep_csv_counts_and_deterministic_svg() {
    let f = write("ones.json", r#"{"kind": "lcp", "m": [[1, 1], [1, 1]], "q": [-1, -1]}"#);
    let (csv, svg) = (tmp("ones.csv"), tmp("ones.svg"));
    let args = ["sweep", f.to_str().unwrap(), "--dir", "1,-1", "--lambda", "-1:1:21", "--out", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap()];
    stdout(&run(&args));
    let table = fs::read_to_string(&csv).unwrap();
    assert!(!table.contains('\r'));
    let counts: Vec<String> = table.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().to_string()).collect();
    let mut expected = vec!["1".to_string(); 21];
    expected[10] = "CONTINUUM".into();
    assert_eq!(counts, expected);
    let first = fs::read(&svg).unwrap();
    stdout(&run(&args));
    assert_eq!(fs::read(&svg).unwrap(), first);
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("<?xml") && text.contains("version=\"1.1\"") && text.ends_with("</svg>\n"));
}

#[test]
fn sweep_of_p_matrix_has_constant_count() {
    let f = write("pmat.json", r#"{"kind": "lcp", "m": [[2, -1], [1, 3]], "q": [0, 0]}"#);
    let v = json(&["sweep", f.to_str().unwrap(), "--q0=-3,2", "--dir=5,-4", "--lambda=-2:2:41", "--json"]);
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 41);
    assert!(points.iter().all(|p| p["count"] == 1));
}

#[test]
fn circuit_info_brackets_the_sign_change() {
    let v = json(&["circuit", "info", "--json"]);
    let [a, b] = [v["sign_change"][0].as_f64().unwrap(), v["sign_change"][1].as_f64().unwrap()];
    let root = v["root"].as_f64().unwrap();
    assert!(a < root && root < b && b <= 1000.0);
    assert!(v["samples"][0]["gamma"].as_f64().unwrap() < 0.0);
    assert!(stdout(&run(&["circuit", "info"])).contains("gamma changes sign between"));
}

#[test]
fn circuit_equilibria_at_three_solution_point() {
    let f = write("circuit.json", r#"{"kind": "circuit", "params": {"r2": 10, "r": 1.1}}"#);
    let v = json(&["circuit", "equilibria", f.to_str().unwrap(), "--json"]);
    assert_eq!(v["count"], 3);
    assert_eq!(v["equilibria"].as_array().unwrap().len(), 3);
    let v = json(&["circuit", "equilibria", "--r2", "1000", "--json"]);
    assert_eq!(v["count"], 1);
}

#[test]
fn circuit_pulses_switch_twice() {
    let csv = tmp("pulses.csv");
    let args = [
        "circuit",
        "simulate",
        "--schedule",
        "0:1.1,0.5:2.0,0.6:1.1,1.5:0.3,1.6:1.1",
        "--t-end",
        "3",
        "--out",
        csv.to_str().unwrap(),
    ];
    stdout(&run(&args));
    let table = fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("t,xi_1,xi_2,xi_3,xi_4,z_1,z_2,z_3,z_4,r_1"));
    // low equilibrium has xi_1 near 0.01, high near 0.74
    let mut levels = vec![];
    for line in lines {
        let xi1: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        let level = if xi1 < 0.1 { Some(0) } else if xi1 > 0.65 { Some(1) } else { None };
        if let Some(l) = level {
            if levels.last() != Some(&l) {
                levels.push(l);
            }
        }
    }
    assert_eq!(levels, vec![0, 1, 0]);
}

#[test]
fn circuit_sweep2d_writes_full_grid() {
    let csv = tmp("grid.csv");
    let out = bin()
        .env("LCP_ATLAS_THREADS", "1")
        .args(["circuit", "sweep2d", "--r2", "1:100:6", "--r", "0.8:1.4:5", "--out", csv.to_str().unwrap()])
        .output()
        .unwrap();
    let text = stdout(&out);
    assert!(text.contains("count 3:"), "{text}");
    let table = fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().count(), 31);
    assert_eq!(table.lines().next(), Some("r2,r,count,unpivoted_count"));
}

#[test]
fn invalid_thread_count_is_an_input_error() {
    let out = bin().env("LCP_ATLAS_THREADS", "zero").args(["circuit", "info"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
