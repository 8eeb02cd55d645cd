use std::path::PathBuf;
use std::process::{Command, Output};

use num_complex::Complex64;
use pointlim::cli::{ClassifyOutput, ConvergeOutput, ResonanceOutput, ScatterOutput};
use pointlim::fixtures;
use pointlim::resonance::{compute_invariants, HalfBoundKind, Tolerances, Triple};
use pointlim::profiles::Profile;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pointlim"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pointlim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn classify_pseudo_hamiltonian() {
    let o = run(&["classify", "--builtin", "pseudo_hamiltonian alpha=1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out: ClassifyOutput = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(out.schema_version, 1);
    assert_eq!(out.interaction.case.to_string(), "B3");
    assert!(stdout(&o).contains("\"kind\": \"separated\""));
}

#[test]
fn classify_a2_fixture_round_trips() {
    let o = run(&["classify", "--builtin", "a2_fixture"]);
    assert_eq!(o.status.code(), Some(0));
    let out: ClassifyOutput = serde_json::from_str(&stdout(&o)).unwrap();
    let lim = &out.interaction;
    assert_eq!(lim.case.to_string(), "A2");
    assert!((lim.phase.unwrap() - std::f64::consts::PI).abs() < 1e-12);
    let m = lim.matrix.unwrap();
    assert!((m[0][0] - 2.0 / 3.0).abs() < 1e-12 && (m[1][1] - 1.5).abs() < 1e-12);
    assert!(m[0][1].abs() < 1e-12 && m[1][0].abs() < 1e-12);
    let again: ClassifyOutput = serde_json::from_str(&serde_json::to_string(&out).unwrap()).unwrap();
    assert_eq!(again, out);
}

#[test]
fn rational_config_matches_builtin() {
    let cfg = write_config("a2.toml", "[triple]\nf = [\"1\"]\ng = [\"15/2\", \"15/2\"]\n");
    let o = run(&["classify", "--input", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("q omitted"));
    let from_cfg: ClassifyOutput = serde_json::from_str(&stdout(&o)).unwrap();
    let builtin: ClassifyOutput = serde_json::from_str(&stdout(&run(&["classify", "--builtin", "a2"]))).unwrap();
    assert_eq!(from_cfg.interaction.matrix, builtin.interaction.matrix);
}

#[test]
fn malformed_profile_names_field() {
    let cfg = write_config("bad.toml", "[triple]\nf = [1, \"one\"]\ng = [0, 1]\n");
    let o = run(&["classify", "--input", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("triple.f[1]"), "{}", stderr(&o));

    let cfg = write_config("bad.json", "{\"triple\": {\"f\": [1], \"g\": {\"breaks\": [0, 1]}}}");
    let o = run(&["classify", "--input", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("triple.g.pieces"), "{}", stderr(&o));

    let cfg = write_config("syntax.toml", "[triple\nf = 1\n");
    let o = run(&["classify", "--input", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));
}

#[test]
fn strict_mode_flags_near_boundary() {
    // detune the A2 pair until lambda sits a few thresholds away from zero
    let f = Profile::poly_re(&[1.0]).unwrap();
    let lambda = |t: f64| {
        let tr = Triple::without_potential(f.clone(), Profile::poly_re(&[t, t]).unwrap()).unwrap();
        let inv = compute_invariants(&tr, &Tolerances::default());
        let z = inv.test("lambda");
        (z.value, z.threshold)
    };
    let (v1, th) = lambda(7.5 + 1e-6);
    let t = 7.5 + 1e-6 * 3.0 * th / v1;
    let (v, th) = lambda(t);
    assert!(v > th && v < 10.0 * th);
    let cfg = write_config("near.toml", &format!("[triple]\nf = [1]\ng = [{t:?}, {t:?}]\n"));
    let p = cfg.to_str().unwrap();
    let o = run(&["classify", "--input", p, "--strict"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("lambda"));
    let o = run(&["classify", "--input", p]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn scatter_limit_rows() {
    let o = run(&["scatter", "--builtin", "a3", "--k", "0.5,1,2", "--eps", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "eps,k,re_t,im_t,re_r,im_r,unitarity_defect,status");
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert_eq!(row[0], "0");
        let k: f64 = row[1].parse().unwrap();
        let t = Complex64::new(row[2].parse().unwrap(), row[3].parse().unwrap());
        let ik = Complex64::new(0.0, k);
        assert!((t - 2.0 * ik / (2.0 * ik - 2.0)).norm() < 1e-12);
        assert_eq!(row[7], "ok");
    }
}

#[test]
fn scatter_free_line_and_json() {
    let cfg = write_config("free.toml", "eps = [0.5, 0.1]\nk = [1, 3]\n[triple]\nq = [0]\n");
    let o = run(&["scatter", "--input", cfg.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out: ScatterOutput = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(out.rows.len(), 6);
    for r in &out.rows {
        assert!((r.t.unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(r.r.unwrap().norm() < 1e-12);
    }
    let again: ScatterOutput = serde_json::from_str(&serde_json::to_string(&out).unwrap()).unwrap();
    assert_eq!(again, out);
}

#[test]
fn scatter_rejects_empty_eps_and_background() {
    let o = run(&["scatter", "--builtin", "a3", "--eps", ""]);
    assert_eq!(o.status.code(), Some(1));
    let cfg = write_config("v.toml", "v = [1]\n[triple]\nbuiltin = \"a3\"\n");
    let o = run(&["scatter", "--input", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("V = 0"));
}

#[test]
fn converge_default_and_wrong_limit() {
    let out_path = write_config("conv.json", "");
    let o = run(&["converge", "--builtin", "a1", "--output", out_path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out: ConvergeOutput = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(out.report.passed && out.report.fitted_slope.unwrap() >= 0.45);
    assert_eq!(out.report.eps_list.len(), 7);
    let again: ConvergeOutput = serde_json::from_str(&serde_json::to_string(&out).unwrap()).unwrap();
    assert_eq!(again, out);

    let o = run(&["converge", "--builtin", "a1", "--limit-matrix", "1,0,0,1", "--eps", "0.125:0.0078125:5"]);
    assert_eq!(o.status.code(), Some(3));
    let out: ConvergeOutput = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(out.report.fitted_slope.unwrap().abs() < 0.1);
}

#[test]
fn converge_resolvent() {
    let o = run(&["converge", "--builtin", "a1", "--metric", "resolvent"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("zeta"));
    let o = run(&[
        "converge", "--builtin", "a3", "--metric", "resolvent", "--zeta", "0,1", "--eps", "0.125:0.0078125:5", "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("eps,error,flag\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn resonance_reports() {
    let o = run(&["resonance", "--builtin", "a1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out: ResonanceOutput = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(out.kind, HalfBoundKind::Double);
    assert_eq!(out.states.len(), 2);
    assert!(out.residual < 1e-8);
    let again: ResonanceOutput = serde_json::from_str(&serde_json::to_string(&out).unwrap()).unwrap();
    assert_eq!(again, out);

    let o = run(&["resonance", "--builtin", "b3_nonresonant"]);
    let out: ResonanceOutput = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(out.kind, HalfBoundKind::None);
    assert!(out.det_minus_lambda < 1e-12);

    let cfg = write_config("noq.toml", "[triple]\nf = [\"1/2\"]\ng = [0, 1]\n");
    let o = run(&["resonance", "--input", cfg.to_str().unwrap()]);
    let out: ResonanceOutput = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(out.notes.iter().any(|n| n.contains("q omitted")));
}

#[test]
fn every_fixture_classifies_through_the_cli() {
    for fx in fixtures::all() {
        let o = run(&["classify", "--builtin", fx.name]);
        let out: ClassifyOutput = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(out.interaction.case, fx.case, "{}", fx.name);
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["classify"]).status.code(), Some(1));
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["classify", "--builtin", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
