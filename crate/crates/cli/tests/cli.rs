use std::process::{Command, Output};

use serde_json::Value;

fn lobound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lobound"))
        .args(args)
        .env_remove("LOBOUND_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let o = lobound(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn constants_csv_and_json() {
    let o = lobound(&["constants", "--format", "csv"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 13);
    let v = json(&["constants", "--format", "json"]);
    assert!(v["schema_version"].is_number());
    assert_eq!(v["entries"].as_array().unwrap().len(), 12);
    let all = json(&["constants", "--format", "json", "--all"]);
    assert!(all["entries"].as_array().unwrap().len() > 12);
}

#[test]
fn constants_zero_tolerance_fails() {
    let o = lobound(&["constants", "--check", "--tolerance", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("MISMATCH"));
    assert_eq!(lobound(&["constants", "--tolerance", "-1"]).status.code(), Some(2));
}

#[test]
fn bound_on_gaussian_spec() {
    let v = json(&["bound", "--spec", "gaussian:width=1,n=1", "--format", "json"]);
    assert_eq!(v["reports"].as_array().unwrap().len(), 6);
    let f43 = v["functionals"]["f_rho43"].as_f64().unwrap();
    assert!((f43 - 0.75f64.powf(1.5)).abs() < 1e-8, "{f43}");
    let classic = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["variant"] == "classic_168")
        .unwrap();
    assert!((classic["bound_value"].as_f64().unwrap() + 1.68 * f43).abs() < 1e-10);

    let same = json(&["bound", "--spec", r#"{"type":"gaussian","width":1,"n":1}"#, "--format", "json"]);
    assert_eq!(v["reports"], same["reports"]);
}

#[test]
fn bound_fixed_alpha_above_cap_is_clamped() {
    let v = json(&[
        "bound", "--spec", "gaussian:width=1,n=1", "--variant", "grad_l1", "--alpha", "0.5", "--format", "json",
    ]);
    let r = &v["reports"][0];
    assert_eq!(r["clamped"], true);
    let f43 = v["functionals"]["f_rho43"].as_f64().unwrap();
    assert!((r["bound_value"].as_f64().unwrap() + 1.68 * f43).abs() < 1e-10);
}

#[test]
fn bound_input_errors_exit_2() {
    assert_eq!(lobound(&["bound", "--spec", "gaussian:width=oops"]).status.code(), Some(2));
    assert_eq!(lobound(&["bound", "--spec", "gaussian:width=-1,n=1"]).status.code(), Some(2));
    assert_eq!(lobound(&["bound"]).status.code(), Some(2));
    assert_eq!(lobound(&["bound", "--spec", "gaussian:width=1,n=1", "--variant", "nope"]).status.code(), Some(2));
}

fn write_cube(dir: &tempfile::TempDir, negative: bool) -> String {
    let n = 12;
    let h = 0.5;
    let o = -0.5 * h * (n - 1) as f64;
    let mut s = format!("t\nc\n0 {o} {o} {o}\n{n} {h} 0 0\n{n} 0 {h} 0\n{n} 0 0 {h}\n");
    let mut k = 0;
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let p = [i, j, l].map(|m| o + h * m as f64);
                let r2 = p.iter().map(|x| x * x).sum::<f64>();
                let v = if negative && k == 5 { -1e-6 } else { (-r2).exp() };
                s.push_str(&format!("{v:e} "));
                k += 1;
            }
            s.push('\n');
        }
    }
    let path = dir.path().join(if negative { "neg.cube" } else { "pos.cube" });
    std::fs::write(&path, s).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn bound_reads_cube_files() {
    let dir = tempfile::tempdir().unwrap();
    let pos = write_cube(&dir, false);
    let v = json(&["bound", "--cube", &pos, "--format", "json"]);
    assert!(v["direct_coulomb"].is_null());
    assert!(v["functionals"]["f_rho43"].as_f64().unwrap() > 0.0);

    let neg = write_cube(&dir, true);
    let o = lobound(&["bound", "--cube", &neg]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&["bound", "--cube", &neg, "--clamp-negative", "--format", "json"]);
    assert_eq!(v["clamped_voxels"], 1);

    let missing = dir.path().join("missing.cube");
    assert_eq!(lobound(&["bound", "--cube", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn certify_quick_passes_and_writes_witness() {
    let dir = tempfile::tempdir().unwrap();
    let witness = dir.path().join("w.csv");
    let o = lobound(&["certify", "--quick", "--alphas", "0.1,0.2", "--witness", witness.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("certificate: PASS"));
    let csv = std::fs::read_to_string(witness).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    let corpus = lines[1..].iter().map(|l| l.split("\",").next().unwrap()).collect::<std::collections::BTreeSet<_>>();
    assert!(corpus.len() >= 5);
    // Per density: the Ψ₂ step plus one line per α and gradient side.
    assert_eq!(lines.len() - 1, corpus.len() * (1 + 2 * 2));
}

#[test]
fn maxfn_summary_and_curves() {
    let v = json(&["maxfn", "--format", "json"]);
    assert!((v["ball_plateau"].as_f64().unwrap() - 0.4701).abs() < 5e-4);
    assert!((v["hl_constant_heat"].as_f64().unwrap() - 7.5831).abs() < 2e-3);
    let o = lobound(&["maxfn", "--curve", "chi", "--points", "31"]);
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("r,chi,psi,psi1,psi2"));
    assert_eq!(text.lines().count(), 32);
    let o = lobound(&["maxfn", "--curve", "k", "--points", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn jellium_single_and_table() {
    let v = json(&["jellium", "--format", "json"]);
    assert!((v["indirect"].as_f64().unwrap() + 0.9507).abs() < 1e-3);
    assert_eq!(v["converged"], true);
    let o = lobound(&["jellium", "--table", "--format", "csv"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 4);
    let y = json(&["jellium", "--lattice", "sc", "--yukawa", "1.0", "--format", "json"]);
    assert!(y["yukawa_shift"].as_f64().unwrap().abs() < 1e-6);
}

#[test]
fn jellium_rejects_bad_input() {
    assert_eq!(lobound(&["jellium", "--lattice", "hcp"]).status.code(), Some(2));
    assert_eq!(lobound(&["jellium", "--yukawa", "0"]).status.code(), Some(2));
    assert_eq!(lobound(&["jellium", "--cutoff", "2"]).status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_lobound"))
            .args(["jellium", "--table", "--finite", "27", "--format", "json"])
            .env("LOBOUND_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        o.stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn show_defaults_and_missing_subcommand() {
    let o = lobound(&["--show-defaults"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["shell_cutoff"], 20);
    assert_eq!(lobound(&[]).status.code(), Some(2));
}
