use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn semilin(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_semilin"));
    cmd.args(args).env_remove("SEMILIN_SEED");
    if let Some(s) = env_seed {
        cmd.env("SEMILIN_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn forward_zero_gives_linear_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "u.csv");
    let o = semilin(&["forward", "--set", "f_true=zero", "--set", "fine_n=16", "-o", &out], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 17);
    for (j, row) in rows.iter().enumerate() {
        let vals: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(vals.len(), 17);
        for v in vals {
            assert!((v - j as f64 / 16.0).abs() <= 1e-8, "row {j}: {v}");
        }
    }
}

#[test]
fn forward_cubic_respects_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "u.csv");
    let o = semilin(&["forward", "--set", "f_true=-u^3", "-o", &out], None);
    assert_eq!(o.status.code(), Some(0));
    let vals: Vec<f64> =
        fs::read_to_string(&out).unwrap().split([',', '\n']).filter(|s| !s.is_empty()).map(|v| v.parse().unwrap()).collect();
    assert_eq!(vals.len(), 65 * 65);
    assert!(vals.iter().all(|&v| (-1e-7..=1.0 + 1e-7).contains(&v)));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "u.csv");
    let o = semilin(&["forward", "--set", "f_true=u^7", "-o", &out], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown nonlinearity"));
    assert_eq!(semilin(&["table", "4"], None).status.code(), Some(2));
    assert_eq!(semilin(&["frobnicate"], None).status.code(), Some(2));
    assert_eq!(semilin(&["synth", "--set", "bogus=1", "-o", &out], None).status.code(), Some(2));
    let missing = path(dir.path(), "nope.cfg");
    assert_eq!(semilin(&["synth", "-c", &missing, "-o", &out], None).status.code(), Some(2));
    assert!(!Path::new(&out).exists());
}

#[test]
fn synth_is_reproducible_and_honours_seed_variable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (path(dir.path(), "a.json"), path(dir.path(), "b.json"), path(dir.path(), "c.json"));
    let args = |out: &str| vec!["synth".to_string(), "--set".into(), "N=5".into(), "-o".into(), out.to_string()];
    let run = |out: &str, seed: Option<&str>| {
        let a: Vec<String> = args(out);
        semilin(&a.iter().map(String::as_str).collect::<Vec<_>>(), seed)
    };
    let o = run(&a, Some("123"));
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("seed = 123 (from SEMILIN_SEED)"));
    run(&b, Some("123"));
    run(&c, None);
    let (ta, tb, tc) = (fs::read(&a).unwrap(), fs::read(&b).unwrap(), fs::read(&c).unwrap());
    assert_eq!(ta, tb);
    assert_ne!(ta, tc);
    let json: serde_json::Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(json["seed"], 123);
}

#[test]
fn synth_noise_stays_within_level() {
    let dir = tempfile::tempdir().unwrap();
    let (clean, noisy) = (path(dir.path(), "clean.json"), path(dir.path(), "noisy.json"));
    semilin(&["synth", "--set", "N=4", "--set", "epsilon0=0", "-o", &clean], None);
    semilin(&["synth", "--set", "N=4", "--set", "epsilon0=0.05", "-o", &noisy], None);
    let read = |p: &str| serde_json::from_str::<serde_json::Value>(&fs::read_to_string(p).unwrap()).unwrap();
    let (c, n) = (read(&clean), read(&noisy));
    for k in 0..4 {
        let eps = n["noise_levels"][k].as_f64().unwrap();
        let (tc, tn) = (c["traces"][k].as_array().unwrap(), n["traces"][k].as_array().unwrap());
        for (a, b) in tc.iter().zip(tn) {
            assert!((a.as_f64().unwrap() - b.as_f64().unwrap()).abs() <= eps);
        }
    }
}

#[test]
fn config_file_then_cli_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = path(dir.path(), "run.cfg");
    fs::write(&cfg, "# small run\nN = 3\nseed = 11\nepsilon0 = 0.02\n").unwrap();
    let out = path(dir.path(), "m.json");
    let o = semilin(&["synth", "-c", &cfg, "--set", "seed=12", "-o", &out], Some("99"));
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json["seed"], 12);
    assert_eq!(json["epsilon0"], 0.02);
    assert_eq!(json["deltas"].as_array().unwrap().len(), 3);
}

#[test]
fn invert_writes_reproducible_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = path(dir.path(), "m.json");
    semilin(&["synth", "--set", "N=6", "--set", "seed=5", "-o", &data], None);
    let mut outputs = Vec::new();
    for name in ["r1", "r2"] {
        let out = path(dir.path(), name);
        let o = semilin(&["invert", "--set", "max_outer=50", "-d", &data, "-o", &out, "--save-levels"], None);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let csv = fs::read_to_string(dir.path().join(name).join("reconstruction.csv")).unwrap();
        let report = fs::read_to_string(dir.path().join(name).join("report.json")).unwrap();
        assert!(dir.path().join(name).join("levels.json").exists());
        outputs.push((csv, report));
    }
    assert_eq!(outputs[0], outputs[1]);
    let (csv, report) = &outputs[0];
    assert!(csv.starts_with("s,F_true,F_hat,missing\n"));
    assert_eq!(csv.lines().count(), 7);
    let r: serde_json::Value = serde_json::from_str(report).unwrap();
    assert_eq!(r["config"]["seed"], 5);
    assert_eq!(r["levels"].as_array().unwrap().len(), 6);
    assert!(r.get("wall_clock_seconds").is_none());
    assert!(r["err"].as_f64().unwrap().is_finite());
}

#[test]
fn invert_zero_truth_flags_denominator() {
    let dir = tempfile::tempdir().unwrap();
    let data = path(dir.path(), "m.json");
    semilin(&["synth", "--set", "f_true=zero", "--set", "N=4", "--set", "epsilon0=0", "-o", &data], None);
    let out = path(dir.path(), "r");
    let o = semilin(&["invert", "--set", "f0=zero", "-d", &data, "-o", &out, "--timing"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r/report.json")).unwrap()).unwrap();
    assert_eq!(r["err_zero_denominator"], true);
    assert!(r["err"].as_f64().unwrap() <= 1e-6);
    assert!(r["wall_clock_seconds"].as_f64().is_some());
}

#[test]
fn invert_rejects_malformed_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = path(dir.path(), "m.json");
    fs::write(&data, "{\"geometry\": 3}").unwrap();
    let o = semilin(&["invert", "-d", &data, "-o", &path(dir.path(), "r")], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_passes_by_default_and_catches_fault() {
    let dir = tempfile::tempdir().unwrap();
    let good = path(dir.path(), "good.json");
    let o = semilin(&["check", "-o", &good], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let reports: Vec<serde_json::Value> = serde_json::from_str(&fs::read_to_string(&good).unwrap()).unwrap();
    assert!(reports.iter().all(|r| r["pass"] == true));
    assert_eq!(reports.iter().filter(|r| r["name"].as_str().unwrap().starts_with("max-principle")).count(), 48);

    let bad = path(dir.path(), "bad.json");
    let o = semilin(&["check", "--set", "sor_tol=1", "-o", &bad], None);
    assert_eq!(o.status.code(), Some(1));
    let reports: Vec<serde_json::Value> = serde_json::from_str(&fs::read_to_string(&bad).unwrap()).unwrap();
    assert!(reports
        .iter()
        .any(|r| r["name"].as_str().unwrap().starts_with("max-principle") && r["pass"] == false));
}

#[test]
fn table_shapes_with_cheap_overrides() {
    let dir = tempfile::tempdir().unwrap();
    for (id, rows) in [("1", 6), ("3", 8)] {
        let out = path(dir.path(), &format!("t{id}.csv"));
        let o = semilin(
            &[
                "table", id, "--set", "N=3", "--set", "fine_n=16", "--set", "coarse_n=8", "--set", "max_outer=10", "-o",
                &out,
            ],
            None,
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let text = fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "table,group,index,f_true,f0,geometry,N,epsilon0,M,lambda,seed,paper_err,err,status");
        assert_eq!(lines.len(), rows + 1);
        if id == "1" {
            assert!(lines[4].starts_with("1,2,1,-u^3,-u^2,gamma1,3,0.005,0.8,0.00094,1021,0.0406,"));
        }
    }
}
