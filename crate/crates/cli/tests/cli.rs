use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn meanfield(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meanfield"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn first_value(csv: &Path) -> f64 {
    let text = std::fs::read_to_string(csv).unwrap();
    let row = text.lines().nth(1).unwrap();
    row.split(',').last().unwrap().parse().unwrap()
}

fn write_radial(path: &Path, nodes: &[f64], f: impl Fn(f64) -> f64) {
    let mut s = String::from("r,value\n");
    for &r in nodes {
        s.push_str(&format!("{r},{}\n", f(r)));
    }
    std::fs::write(path, s).unwrap();
}

fn bubble(lambda: f64, r: f64) -> f64 {
    -2.0 * (1.0 + lambda * lambda * r * r / 8.0).ln() + 2.0 * lambda.ln()
}

#[test]
fn oracle_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = meanfield(dir.path(), &["oracle"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let out = String::from_utf8_lossy(&o.stdout);
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 10);
}

#[test]
fn solve_recovers_the_exact_centre_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = meanfield(dir.path(), &["solve", "--rho", "4pi", "--domain", "disc", "--out", "s"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // λ² = 8ρ/(8π − ρ) = 8 at ρ = 4π, so u(0) = 2 ln(1 + 1) on the unit disc
    let u0 = first_value(&dir.path().join("s.csv"));
    assert!((u0 - 2.0 * 2f64.ln()).abs() < 1e-6, "{u0}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s_report.json")).unwrap()).unwrap();
    assert_eq!(report["converged"], true);
    // w = u + ln(ρ/∫e^u) is U_λ itself, whose centre value is 2 ln λ = ln 8
    let w0 = first_value(&dir.path().join("s_liouville.csv"));
    assert!((w0 - 8f64.ln()).abs() < 1e-6, "{w0}");
}

#[test]
fn exterior_check_rejects_a_non_decreasing_field() {
    let dir = tempfile::tempdir().unwrap();
    let nodes: Vec<f64> = (0..200).map(|k| 1.0 + k as f64 * 0.05).collect();
    write_radial(&dir.path().join("up.csv"), &nodes, |r| r.ln());
    let o = meanfield(dir.path(), &["verify-bol", "--field", "up.csv", "--mode", "exterior"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn exterior_check_holds_on_a_bubble() {
    let dir = tempfile::tempdir().unwrap();
    let nodes: Vec<f64> = (0..4097).map(|k| 1e3f64.powf(k as f64 / 4096.0)).collect();
    write_radial(&dir.path().join("b.csv"), &nodes, |r| bubble(2.0, r));
    let o = meanfield(
        dir.path(),
        &["verify-bol", "--field", "b.csv", "--mode", "exterior", "--tail", "bubble", "--tail-lambda", "2"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn solve_then_verify_interior_holds_at_every_level() {
    let dir = tempfile::tempdir().unwrap();
    for (mesh, nodes) in [("radial", "2048"), ("grid", "65")] {
        let prefix = format!("s_{mesh}");
        let o = meanfield(
            dir.path(),
            &["solve", "--rho", "6pi", "--mesh", mesh, "--nodes", nodes, "--out", &prefix],
        );
        assert_eq!(code(&o), 0);
        let field = format!("{prefix}_liouville.csv");
        let out = format!("{prefix}_bol.json");
        let o = meanfield(
            dir.path(),
            &["verify-bol", "--field", &field, "--mode", "interior", "--count", "12", "--out", &out],
        );
        assert_eq!(code(&o), 0, "{mesh}: {}", String::from_utf8_lossy(&o.stderr));
        let reports: Vec<serde_json::Value> =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(&out)).unwrap()).unwrap();
        assert_eq!(reports.len(), 12);
        for r in &reports {
            let v = r["verdict"].as_str().unwrap();
            assert!(matches!(v, "holds" | "holds_strictly" | "violated_within_tolerance"), "{mesh}: {r}");
        }
    }
}

#[test]
fn malformed_config_names_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.toml"),
        "[domain]\nshape = \"disc\"\ndiscretization = \"radial\"\nnodes = \"many\"\n\n[equation]\nmode = \"mean_field\"\nrho = \"4pi\"\n",
    )
    .unwrap();
    let o = meanfield(dir.path(), &["solve", "--config", "bad.toml"]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("nodes") && err.contains("line"), "{err}");
}

#[test]
fn config_file_drives_the_solver() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("ok.toml"),
        "[domain]\nshape = \"disc\"\ndiscretization = \"radial\"\nnodes = 4096\n\n[equation]\nmode = \"mean_field\"\nrho = \"7pi\"\n",
    )
    .unwrap();
    let o = meanfield(dir.path(), &["solve", "--config", "ok.toml", "--out", "c"]);
    assert_eq!(code(&o), 0);
    // λ² = 56 at ρ = 7π: u(0) = 2 ln 8 = 6 ln 2
    assert!((first_value(&dir.path().join("c.csv")) - 6.0 * 2f64.ln()).abs() < 1e-6);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&meanfield(dir.path(), &["solve", "--bogus"])), 1);
    assert_eq!(code(&meanfield(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&meanfield(dir.path(), &["solve", "--rho", "four"])), 1);
    assert_eq!(code(&meanfield(dir.path(), &["verify-bol", "--field", "missing.csv", "--mode", "interior"])), 1);
    assert_eq!(code(&meanfield(dir.path(), &["--help"])), 0);
}

#[test]
fn pipeline_null_and_distinct_pair() {
    let dir = tempfile::tempdir().unwrap();
    let nodes: Vec<f64> = (0..2049).map(|k| k as f64 / 2048.0).collect();
    let rho = 4.0 * PI;
    let lam = (8.0 * rho / (8.0 * PI - rho)).sqrt();
    write_radial(&dir.path().join("w1.csv"), &nodes, |r| bubble(lam, r));
    // a second bubble rescaled to the same mass on B_1
    let mu: f64 = 2.0;
    let ball = 8.0 * PI * mu * mu / (8.0 + mu * mu);
    write_radial(&dir.path().join("w2.csv"), &nodes, |r| bubble(mu, r) + (rho / ball).ln());

    let o = meanfield(dir.path(), &["pipeline", "--w1", "w1.csv", "--w2", "w1.csv", "--out", "null.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let null: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("null.json")).unwrap()).unwrap();
    assert_eq!(null["contradiction"], false);

    let o = meanfield(
        dir.path(),
        &["pipeline", "--w1", "w1.csv", "--w2", "w2.csv", "--out", "pair.json", "--profile", "psi.csv"],
    );
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stdout));
    let pair: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("pair.json")).unwrap()).unwrap();
    assert_eq!(pair["contradiction"], true);
    // ψ(1) − U_λ(1) = (w2 − w1)(1) + min φ shift, which is ln(3/4) for this pair
    let d = pair["boundary_defect"].as_f64().unwrap();
    assert!((d - 0.75f64.ln()).abs() < 1e-3, "{d}");
    assert!(dir.path().join("psi.csv").exists());
}

#[test]
fn rearrange_writes_its_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let nodes: Vec<f64> = (0..1025).map(|k| k as f64 / 1024.0).collect();
    write_radial(&dir.path().join("u.csv"), &nodes, |r| bubble(2.0, r));
    write_radial(&dir.path().join("phi.csv"), &nodes, |r| bubble(2.0, r));
    let o = meanfield(
        dir.path(),
        &["rearrange", "--phi", "phi.csv", "--u", "u.csv", "--lambda", "2", "--radius", "1", "--out", "re"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["re_phi_star.csv", "re_table.csv", "re_meta.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    // the bubble rearranged against itself is itself
    let text = std::fs::read_to_string(dir.path().join("re_phi_star.csv")).unwrap();
    for line in text.lines().skip(1) {
        let mut it = line.split(',').map(|s| s.parse::<f64>().unwrap());
        let (r, v) = (it.next().unwrap(), it.next().unwrap());
        assert!((v - bubble(2.0, r)).abs() < 1e-8, "r = {r}: {v}");
    }
}

#[test]
fn uniqueness_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec!["uniqueness", "--rho", "4pi", "--mesh", "grid", "--nodes", "33", "--starts", "4", "--seed", "11", "--out", out]
    };
    assert_eq!(code(&meanfield(dir.path(), &args("a.json"))), 0);
    assert_eq!(code(&meanfield(dir.path(), &args("b.json"))), 0);
    let a = std::fs::read_to_string(dir.path().join("a.json")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["distinct"], 1);
}

#[test]
fn sweep_writes_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = meanfield(dir.path(), &["sweep", "--nodes", "2048", "--rho-list", "2pi,4pi,6pi,7pi", "--out", "sw.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("sw.csv")).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().next().unwrap().starts_with("eps,rho,u_max"));
}
