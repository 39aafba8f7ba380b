use std::path::Path;
use std::process::{Command, Output};

fn dirac_tomo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirac-tomo")).args(args).output().expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn fierz_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fierz.csv");
    let o = dirac_tomo(&["fierz-check", "--trials", "1000", "--seed", "42", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&out);
    assert!(text.starts_with("# dirac-tomography "));
    assert_eq!(text.lines().filter(|l| l.ends_with(",true")).count(), 27);
}

#[test]
fn explicit_spinor_has_zero_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("out.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"command": "fierz_check", "trials": 1, "spinor": [1,0,0,0,0,0,0,0],
                "format": "json", "output_path": {:?}}}"#,
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = dirac_tomo(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 27);
    assert!(rows.iter().all(|r| r["max_residual"].as_f64().unwrap().abs() < 1e-12));
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\"command\": \"roundtrip\",").unwrap();
    let o = dirac_tomo(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed config"));

    std::fs::write(&cfg, r#"{"command": "roundtrip", "trials": 0}"#).unwrap();
    assert_eq!(dirac_tomo(&["--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(dirac_tomo(&["roundtrip", "--rep", "nope"]).status.code(), Some(2));
    assert_eq!(dirac_tomo(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(dirac_tomo(&["--help"]).status.code(), Some(0));
}

#[test]
fn roundtrip_protocols() {
    for protocol in ["discrete_majorana", "combined_st_chiral", "continuous_grid(16,32)"] {
        let o = dirac_tomo(&["roundtrip", "--trials", "20", "--protocol", protocol]);
        assert_eq!(o.status.code(), Some(0), "{protocol}");
        let text = String::from_utf8(o.stdout).unwrap();
        let max = text.lines().find(|l| l.starts_with("max,")).unwrap();
        assert!(max.ends_with("failures=0,true"), "{max}");
    }
}

#[test]
fn shot_roundtrip_reports_median() {
    let o = dirac_tomo(&["roundtrip", "--trials", "30", "--shots", "1000000", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let median: f64 = text.lines().find(|l| l.starts_with("median,")).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(median > 1e-4 && median < 1e-2, "{median}");
}

#[test]
fn too_coarse_grid_exits_3() {
    // exact data on a 2×2 grid cannot meet the continuous threshold
    let o = dirac_tomo(&["roundtrip", "--trials", "3", "--protocol", "continuous_grid(2,2)"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8(o.stdout).unwrap().contains("failures="));
}

#[test]
fn feasibility_table() {
    let o = dirac_tomo(&["feasibility", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let rank = |prefix: &str| -> usize {
        let line = text.lines().find(|l| l.starts_with(prefix)).unwrap_or_else(|| panic!("{prefix}"));
        line.split(',').nth(3).unwrap().parse().unwrap()
    };
    assert_eq!(rank("majorana,rotations,generic"), 7);
    assert!(rank("standard,rotations,generic") < 7);
    assert_eq!(rank("standard,full,generic"), 7);
    assert!(rank("chiral,full,generic") <= 6);
    assert!(text.lines().any(|l| l.starts_with("chiral,full,weyl,3,3,complete")));
    assert_eq!(text, String::from_utf8(dirac_tomo(&["feasibility", "--seed", "3"]).stdout).unwrap());
}

#[test]
fn ambiguity_standard_rotations() {
    let o = dirac_tomo(&["ambiguity", "--rep", "standard", "--group", "rotations", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(3).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.contains(",standard,rotations,true,")));
}

#[test]
fn kernel_check() {
    let o = dirac_tomo(&["kernel-check", "--trials", "200", "--grid", "32x64"]);
    assert_eq!(o.status.code(), Some(0));
    let o = dirac_tomo(&["kernel-check", "--trials", "20", "--grid", "2x3"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn outputs_are_independent_of_path_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = ["roundtrip", "--trials", "16", "--shots", "2000", "--seed", "8", "--out"];
    let mut first = args.to_vec();
    first.extend([a.to_str().unwrap(), "--threads", "1"]);
    let mut second = args.to_vec();
    second.extend([b.to_str().unwrap(), "--threads", "4"]);
    assert_eq!(dirac_tomo(&first).status.code(), Some(0));
    assert_eq!(dirac_tomo(&second).status.code(), Some(0));
    assert_eq!(read(&a), read(&b));
}
