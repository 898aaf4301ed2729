use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowlab"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn gerstner_three_labels_hundred_times() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "m.json",
        r#"{"flow":{"preset":"gerstner"},"times":{"t0":0,"t1":5,"n":100},
            "labels":[[0,-0.5],[1,-1],[2,-1.5]],"outputs":{"trajectories":"out/t.csv"}}"#,
    );
    std::fs::create_dir(dir.path().join("out")).unwrap();
    let o = run(dir.path(), &["simulate", "m.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("out/t.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,a,b,x,y,u,v,J,omega,K");
    assert_eq!(lines.len(), 301);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 10));
    // grouped by label, then time
    assert!(lines[1].starts_with("0.0,0.0,-0.5,"));
    assert!(lines[101].starts_with("0.0,1.0,-1.0,"));
    // no temp file left behind
    assert_eq!(
        std::fs::read_dir(dir.path().join("out")).unwrap().count(),
        1
    );
}

#[test]
fn fields_follow_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "m.json",
        r#"{"flow":{"preset":"kirchhoff"},"grid":{"a_min":0,"a_max":3,"b_min":-0.4,"b_max":0.4,"na":4,"nb":3},
            "times":[0,0.5,1],"outputs":{"fields":"f.csv"}}"#,
    );
    let o = run(dir.path(), &["simulate", "m.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("f.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 12);
    let second: Vec<f64> = text
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(&second[..3], &[0.0, 1.0, -0.4]);
}

#[test]
fn explicit_family_manifest() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "m.json",
        r#"{"flow":{"family":"lin_indep_case1",
                    "params":{"r":0.5,"psi":{"kind":"linear","a":1,"b":0},"h":0.2,"d0":0.1},
                    "f0":{"kind":"exp_linear","A":1,"k":[0,1]},
                    "g0":{"kind":"exp_linear","A":[0.3,0.1],"k":[0,2]}},
            "grid":{"a_min":0,"a_max":5,"b_min":0.3,"b_max":1.2,"na":5,"nb":4},
            "times":{"t0":0,"t1":1.5,"n":8},
            "tolerances":{"samples_t":6},
            "outputs":{"report":"r.json","trajectories":"t.csv"}}"#,
    );
    let o = run(dir.path(), &["verify", "m.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["family"], "lin_indep_case1");
    assert_eq!(report["window"], serde_json::json!([0.0, 1.5]));
    assert_eq!(report["flow"]["params"]["h"], 0.2);
    // verify writes only the report
    assert!(!dir.path().join("t.csv").exists());
}

#[test]
fn kirchhoff_verifies() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "m.json",
        r#"{"flow":{"preset":"kirchhoff"},"times":[0,6.28],"outputs":{"report":"r.json"}}"#,
    );
    let o = run(dir.path(), &["verify", "m.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("jacobian_invariance") && out.contains("pass"));
}

#[test]
fn corrupted_fixture_exits_one_and_names_the_check() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "m.json",
        r#"{"flow":{"preset":"kirchhoff"},"times":[0,1],"corruption":{"kind":"scale_beta","factor":1.01},
            "outputs":{"report":"r.json"}}"#,
    );
    let o = run(dir.path(), &["verify", "m.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("jacobian_invariance"));
    let report = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
    assert!(report.contains("\"pass\": false"));
}

fn expect_exit(manifest: &str, cmd: &str, code: i32, needle: &str) {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "m.json", manifest);
    let o = run(dir.path(), &[cmd, "m.json"]);
    assert_eq!(o.status.code(), Some(code), "{manifest}: {}", stderr(&o));
    assert!(
        stderr(&o).contains(needle),
        "{manifest}: '{}' lacks '{needle}'",
        stderr(&o)
    );
}

#[test]
fn validation_failures_exit_two_and_name_the_field() {
    let cases = [
        (
            r#"{"flow":{"preset":"kirchhoff"},"times":[0,1],"outputs":{}}"#,
            "verify",
            "outputs",
        ),
        (
            r#"{"flow":{"preset":"kirchhoff"},"times":[0,1],"outputs":{"trajectories":"t.csv"}}"#,
            "verify",
            "outputs.report",
        ),
        (
            r#"{"flow":{"preset":"kirchhoff"},"times":[0,1],"outputs":{"report":"r.json"}}"#,
            "simulate",
            "outputs",
        ),
        (
            r#"{"flow":{"preset":"kirchhoff"},"times":[0,1,1],"outputs":{"fields":"f.csv"}}"#,
            "simulate",
            "times",
        ),
        (
            r#"{"flow":{"preset":"kirchhoff"},"times":[1,0.5],"outputs":{"fields":"f.csv"}}"#,
            "simulate",
            "times",
        ),
        (
            r#"{"flow":{"preset":"vortex"},"times":[0,1],"outputs":{"fields":"f.csv"}}"#,
            "simulate",
            "flow.preset",
        ),
        (
            r#"{"flow":{"preset":"kirchhoff","lambda":1.5},"times":[0,1],"outputs":{"fields":"f.csv"}}"#,
            "simulate",
            "flow.lambda",
        ),
        (
            r#"{"flow":{"preset":"kirchhoff"},"times":[0,1],"outputs":{"fields":"f.csv"},"colour":1}"#,
            "simulate",
            "colour",
        ),
        (
            r#"{"flow":{"preset":"kirchhoff"},"grid":{"a_min":0,"a_max":1,"b_min":0,"b_max":1,"na":1,"nb":3},"times":[0,1],"outputs":{"fields":"f.csv"}}"#,
            "simulate",
            "grid",
        ),
        (
            r#"{"flow":{"preset":"kirchhoff"},"times":[0,1],"tolerances":{"fd_tol":-1},"outputs":{"report":"r.json"}}"#,
            "verify",
            "tolerances.fd_tol",
        ),
        (
            r#"{"flow":{"preset":"kirchhoff"},"times":[0,1],"tolerances":{"fd_tolerance":1},"outputs":{"report":"r.json"}}"#,
            "verify",
            "tolerances",
        ),
        (
            r#"{"flow":{"family":"lin_dep_scaled","params":{"lambda":0.5,"r":0.4,"phi":0,"c":0,"d":1},"f0":{"kind":"const","c":1},"g0":{"kind":"const","c":0.5}},"grid":{"a_min":0,"a_max":1,"b_min":0,"b_max":1,"na":2,"nb":2},"times":[0,1],"outputs":{"fields":"f.csv"}}"#,
            "simulate",
            "flow.params.r",
        ),
        (
            r#"{"flow":{"family":"lin_indep_case1","params":{"r":0.5,"psi":0,"h":0,"d0":0},"g0":{"kind":"const","c":0.5}},"grid":{"a_min":0,"a_max":1,"b_min":0,"b_max":1,"na":2,"nb":2},"times":[0,1],"outputs":{"fields":"f.csv"}}"#,
            "simulate",
            "flow.f0",
        ),
        (
            r#"{"flow":{"preset":"kirchhoff"},"times":[0,1],"seed":1,"seeds":2,"outputs":{"report":"r.json"}}"#,
            "verify",
            "seeds",
        ),
        ("not json", "simulate", "manifest"),
    ];
    for (m, cmd, field) in cases {
        expect_exit(m, cmd, 2, &format!("invalid {field}"));
    }
}

#[test]
fn time_outside_validity_exits_three_with_predicate() {
    let m = r#"{"flow":{"family":"general",
                 "params":{"d1":1,"d2":1,"c4mod":{"kind":"linear","a":1,"b":0},"phi":0},
                 "f0":{"kind":"const","c":1},"g0":{"kind":"exp_linear","A":-0.1,"k":[0,-1]}},
                "grid":{"a_min":0,"a_max":1,"b_min":-1,"b_max":-0.1,"na":3,"nb":3},
                "times":[0,0.5,1.5],"outputs":{"fields":"f.csv"}}"#;
    expect_exit(m, "simulate", 3, "D1(t) + D2(t) > 2 |C4(t)|");
    expect_exit(
        &m.replace("\"fields\":\"f.csv\"", "\"report\":\"r.json\""),
        "verify",
        3,
        "outside the validity",
    );
    let case2 = r#"{"flow":{"preset":"example-4-3"},"times":[0,1],"outputs":{"fields":"f.csv"}}"#;
    expect_exit(case2, "simulate", 3, "(w t + p) / c2 > 1");
}

#[test]
fn io_failures_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["simulate", "missing.json"]);
    assert_eq!(o.status.code(), Some(4));
    write(
        dir.path(),
        "m.json",
        r#"{"flow":{"preset":"kirchhoff"},"times":[0,1],"outputs":{"fields":"no/such/dir/f.csv"}}"#,
    );
    let o = run(dir.path(), &["simulate", "m.json"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn output_paths_resolve_against_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("sub")).unwrap();
    write(
        &dir.path().join("sub"),
        "m.json",
        r#"{"flow":{"preset":"gerstner"},"times":[0,1],"outputs":{"fields":"f.csv"}}"#,
    );
    let o = run(dir.path(), &["simulate", "sub/m.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("sub/f.csv").exists());
}

#[test]
fn presets_listing() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["presets"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("gerstner") && text.contains("kirchhoff"));
    assert_eq!(text.lines().count(), 10);

    let o = run(dir.path(), &["presets", "--json"]);
    let arr: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(arr.len(), 10);
    for item in &arr {
        for key in ["name", "family", "paper_example"] {
            assert!(item[key].as_str().is_some_and(|s| !s.is_empty()), "{item}");
        }
    }
    assert_eq!(arr[1]["family"], "general");
}

#[test]
fn bad_thread_count_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_flowlab"))
        .arg("presets")
        .env("FLOWLAB_THREADS", "many")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("FLOWLAB_THREADS"));
}
