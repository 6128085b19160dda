use std::path::Path;
use std::process::{Command, Output};

use gammaexp_cli::output::DensityResult;
use serde_json::Value;

fn gammaexp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gammaexp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn density_table_shape() {
    let out = gammaexp(&[
        "density", "--model", "pure-jump-ou", "--delta", "1/52", "--order", "3",
        "--grid", "0.3:0.8:201", "--methods", "expansion,fourier",
    ]);
    let text = stdout(&out);
    let r = DensityResult::read_csv(text.as_bytes()).unwrap();
    assert_eq!(r.header(), vec!["x", "p_m0", "p_m1", "p_m2", "p_m3", "p_fourier"]);
    assert_eq!(r.x.len(), 201);
    assert!(r.columns.iter().all(|(_, c)| c.len() == 201 && c.iter().all(Option::is_some)));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let args = [
        "density", "--model", "sqrt-diffusion", "--delta", "1/12", "--order", "1",
        "--grid", "0.1:0.7:31", "--methods", "expansion,mc", "--paths", "2000", "--seed", "9",
    ];
    let a = stdout(&gammaexp(&args));
    let b = stdout(&gammaexp(&args));
    assert_eq!(a, b);
    assert!(a.starts_with("x,p_m0,p_m1,p_mc\n"));
}

#[test]
fn pure_jump_grid_below_support_is_flagged() {
    let text = stdout(&gammaexp(&[
        "density", "--model", "pure-jump-ou", "--delta", "1/52", "--order", "0", "--grid", "0.1:0.29:20",
    ]));
    let r = DensityResult::read_csv(text.as_bytes()).unwrap();
    assert_eq!(r.x.len(), 20);
    assert!(r.columns[0].1.iter().all(Option::is_none));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",NA")));
}

#[test]
fn csv_round_trip_and_config_echo_reproduce_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    stdout(&gammaexp(&[
        "density", "--model", "pure-jump-ou", "--delta", "1/12", "--order", "2",
        "--grid", "0.25:0.9:41", "--out", path_str(&first),
    ]));
    let text = std::fs::read_to_string(&first).unwrap();
    let parsed = DensityResult::read_csv(text.as_bytes()).unwrap();
    assert_eq!(parsed.to_csv_string().unwrap(), text);

    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("first.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["schema"], 1);
    assert_eq!(meta["config"]["delta"], "1/12");
    let mut config = meta["config"].clone();
    config.as_object_mut().unwrap().remove("out");
    let cfg_path = dir.path().join("config.json");
    std::fs::write(&cfg_path, serde_json::to_string(&config).unwrap()).unwrap();
    let again = stdout(&gammaexp(&["density", "--config", path_str(&cfg_path)]));
    assert_eq!(again, text);
}

#[test]
fn custom_models_use_the_expansion_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("custom.json");
    std::fs::write(
        &cfg,
        r#"{"schema":1,"custom":{"x0":0.3,"mu_derivs":[-0.168,-0.6,0,0,0,0],"sigma_derivs":[0.3,0,0,0,0,0],"a":100,"b":10},
            "delta":"1/52","orders":[0,1,2],"grid":"0.1:0.8:15"}"#,
    )
    .unwrap();
    let custom = stdout(&gammaexp(&["density", "--config", path_str(&cfg)]));
    let builtin = stdout(&gammaexp(&[
        "density", "--model", "constant-diffusion", "--delta", "1/52", "--order", "2", "--grid", "0.1:0.8:15",
    ]));
    assert_eq!(custom, builtin);
    let out = gammaexp(&["density", "--config", path_str(&cfg), "--methods", "fourier"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config field `model`"));
}

#[test]
fn invalid_flags_report_the_field() {
    for (flag, value, field) in [("--grid", "0.3:0.1:5", "grid"), ("--delta", "1/0", "delta"), ("--order", "7", "orders")] {
        let mut args = vec!["density", "--model", "constant-diffusion"];
        for (f, v) in [("--delta", "1/52"), ("--grid", "0:1:5"), (flag, value)] {
            if f != flag || v == value {
                args.extend([f, v]);
            }
        }
        let out = gammaexp(&args);
        assert_eq!(out.status.code(), Some(2), "{flag}");
        assert!(String::from_utf8_lossy(&out.stderr).contains(&format!("config field `{field}`")), "{flag}");
    }
}

#[test]
fn error_table_lists_every_interval_and_order() {
    let text = stdout(&gammaexp(&["error-table", "--model", "constant-diffusion", "--delta", "1/12,1/252", "--order", "2"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("model,delta,order,max_rel_error,argmax"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    let err = |d: &str, m: &str| -> f64 {
        rows.iter().find(|r| r[1] == d && r[2] == m).unwrap()[3].parse().unwrap()
    };
    assert!(err("1/252", "2") <= 1e-4);
    for m in ["0", "1", "2"] {
        assert!(err("1/12", m) > err("1/252", m));
    }
}

#[test]
fn corrupted_closed_form_coefficient_fails_validation() {
    let report = |extra: &[&str]| -> (Option<i32>, Value) {
        let mut args = vec!["validate", "--reduced-mc"];
        args.extend_from_slice(extra);
        let out = gammaexp(&args);
        (out.status.code(), serde_json::from_slice(&out.stdout).unwrap())
    };
    let check = |v: &Value| -> bool {
        v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "closed-form/pure-jump-ou").unwrap()["passed"]
            .as_bool()
            .unwrap()
    };
    let (_, clean) = report(&[]);
    assert_eq!(clean["schema"], 1);
    assert!(check(&clean));
    let (code, mutated) = report(&["--perturb-closed-form", "1e-6"]);
    assert_eq!(code, Some(1));
    assert!(!check(&mutated));
    assert_eq!(mutated["passed"], false);
}
