use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use turretguard::commands::{status_code, EXIT_UNRESOLVED};
use turretguard::render::{attribute, SCALE};
use turretguard::report::SolutionReport;
use turretguard::scenario::{parse_scenario, ScenarioFile, SimBlock};
use turretguard_core::{classify, GameParams, GameState, GameStatus, Point};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_turretguard"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&std::ffi::OsStr]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_scenario(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn solve_solo_turret_scenario() {
    let out = run(&["solve".as_ref(), scenario("solo_turret.json").as_os_str()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["case"], "SoloTurret");
    assert!((r["value"].as_f64().unwrap() - 0.7739).abs() < 1e-3);
}

#[test]
fn solve_collinear_scenario() {
    let out = run(&["solve".as_ref(), scenario("collinear.json").as_os_str()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["case"], "SoloDefender");
    assert!((r["value"].as_f64().unwrap() - 0.833_334).abs() < 1e-6);
}

#[test]
fn solve_attacker_win_exits_two() {
    let out = run(&["solve".as_ref(), scenario("attacker_wins.json").as_os_str()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["status"], "AttackerWins");
    assert!(!out.stderr.is_empty());
}

#[test]
fn unresolved_status_maps_to_exit_three() {
    assert_eq!(status_code(&GameStatus::Unresolved("x".into())), EXIT_UNRESOLVED);
    let r = SolutionReport::from_status(&GameStatus::Unresolved("x".into()));
    assert_eq!(serde_json::to_value(&r).unwrap()["status"], "Unresolved");
}

#[test]
fn solve_is_deterministic() {
    let a = run(&["solve".as_ref(), scenario("simultaneous.json").as_os_str()]);
    let b = run(&["solve".as_ref(), scenario("simultaneous.json").as_os_str()]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn invalid_scenario_reports_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(
        dir.path(),
        "bad.json",
        r#"{"nu":1.2,"mu":1,"omega":1,"attacker":[2,0],"defender":[3,0],"turret_angle":0}"#,
    );
    let out = run(&["solve".as_ref(), p.as_os_str()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`nu`"));
}

#[test]
fn open_loop_simulation_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let out = run(&[
        "simulate".as_ref(),
        scenario("solo_turret.json").as_os_str(),
        "--open-loop".as_ref(),
        "--csv".as_ref(),
        csv.as_os_str(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let s = json(&out);
    assert_eq!(s["outcome"], "TurretCapture");
    assert!(s["residual"].as_f64().unwrap() <= 1e-3);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,x_D,y_D,x_A,y_A,theta_T");
    assert!(text.lines().last().unwrap().starts_with("# outcome=TurretCapture"));
}

#[test]
fn wrong_guess_feedback_is_not_better_for_attacker() {
    let out = run(&[
        "simulate".as_ref(),
        scenario("dispersal_turret.json").as_os_str(),
        "--feedback".as_ref(),
        "--guess".as_ref(),
        "cw".as_ref(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let s = json(&out);
    let (r, v) = (s["terminal_distance"].as_f64().unwrap(), s["value"].as_f64().unwrap());
    assert!(r >= v + 1.0 - 1e-3, "{r} < {v} + 1");
}

#[test]
fn timeout_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let mut s: ScenarioFile = parse_scenario(&std::fs::read_to_string(scenario("solo_defender.json")).unwrap()).unwrap();
    s.sim = Some(SimBlock { max_time: Some(0.01), ..SimBlock::default() });
    let p = write_scenario(dir.path(), "short.json", &s.to_json());
    let out = run(&["simulate".as_ref(), p.as_os_str()]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["outcome"], "Timeout");
}

fn sweep_csv(dir: &Path, axes: &str, threads: Option<&str>) -> String {
    let text = format!(
        r#"{{"nu":0.7,"mu":1,"omega":1,"attacker":[1.9106729783,0.5910404134],"defender":[1.5,0.6],"turret_angle":0,"sweep":{{"axes":[{axes}]}}}}"#
    );
    let p = write_scenario(dir, "sweep.json", &text);
    let out_path = dir.join("sweep.csv");
    let mut cmd = bin();
    cmd.arg("sweep").arg(&p).arg("--out").arg(&out_path);
    if let Some(t) = threads {
        cmd.env("TURRETGUARD_THREADS", t);
    }
    let out = cmd.output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read_to_string(out_path).unwrap()
}

#[test]
fn sweep_two_by_two_has_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = sweep_csv(
        dir.path(),
        r#"{"axis":"defender_x","min":1,"max":2,"count":2},{"axis":"defender_y","min":0,"max":1,"count":2}"#,
        None,
    );
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "defender_x,defender_y,case,value,direction");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("1,0,") && lines[2].starts_with("1,1,") && lines[3].starts_with("2,0,"));
}

#[test]
fn sweep_output_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let axes = r#"{"axis":"defender_x","min":0.5,"max":3.5,"count":9},{"axis":"defender_y","min":-1,"max":1,"count":7}"#;
    assert_eq!(sweep_csv(dir.path(), axes, Some("1")), sweep_csv(dir.path(), axes, Some("3")));
}

#[test]
fn sweep_value_continuous_across_case_boundaries() {
    let dir = tempfile::tempdir().unwrap();
    let h = 0.005;
    let csv = sweep_csv(dir.path(), r#"{"axis":"defender_x","min":1.3,"max":1.8,"count":101}"#, None);
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let cases: std::collections::BTreeSet<&str> = rows.iter().map(|r| r[1]).collect();
    assert!(cases.contains("SoloDefender") && cases.contains("Simultaneous"), "{cases:?}");
    let v: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    let mut slopes: Vec<f64> = v.windows(2).map(|w| (w[1] - w[0]).abs() / h).collect();
    let biggest = slopes.iter().cloned().fold(0.0, f64::max);
    slopes.sort_by(f64::total_cmp);
    let typical = slopes[slopes.len() / 2];
    assert!(biggest * h <= 10.0 * h * typical, "jump {} vs slope {typical}", biggest * h);
}

#[test]
fn sweep_inside_target_strip_is_attacker_win() {
    let dir = tempfile::tempdir().unwrap();
    let csv = sweep_csv(dir.path(), r#"{"axis":"attacker_r","min":0.2,"max":0.9,"count":4}"#, None);
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(&f[1..], ["AttackerWins", "", ""]);
    }
}

#[test]
fn oversize_sweep_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"nu":0.7,"mu":1,"omega":1,"attacker":[2,0],"defender":[3,0],"turret_angle":0,"sweep":{"axes":[{"axis":"defender_x","min":0,"max":1,"count":5000},{"axis":"defender_y","min":0,"max":1,"count":5000}]}}"#;
    let p = write_scenario(dir.path(), "big.json", text);
    let out = run(&["sweep".as_ref(), p.as_os_str(), "--out".as_ref(), dir.path().join("o.csv").as_os_str()]);
    assert_eq!(out.status.code(), Some(1));
}

fn render(input: &Path, dir: &Path) -> (Output, String) {
    let svg = dir.join("fig.svg");
    let out = run(&["render".as_ref(), input.as_os_str(), "--svg".as_ref(), svg.as_os_str()]);
    let text = std::fs::read_to_string(&svg).unwrap_or_default();
    (out, text)
}

#[test]
fn render_simultaneous_has_single_value_ring() {
    let dir = tempfile::tempdir().unwrap();
    let (out, svg) = render(&scenario("simultaneous.json"), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let value = json(&run(&["solve".as_ref(), scenario("simultaneous.json").as_os_str()]))["value"].as_f64().unwrap();
    let dashed: Vec<&str> = svg.lines().filter(|l| l.contains("stroke-dasharray")).collect();
    assert_eq!(dashed.len(), 1);
    assert!((attribute(dashed[0], "r").unwrap() - (value + 1.0) * SCALE).abs() < 1e-2);
}

#[test]
fn render_capture_marker_on_solo_defender_point() {
    let dir = tempfile::tempdir().unwrap();
    let (_, svg) = render(&scenario("solo_defender.json"), dir.path());
    let s = parse_scenario(&std::fs::read_to_string(scenario("solo_defender.json")).unwrap()).unwrap();
    let p = GameParams::new(s.nu, s.mu, s.omega).unwrap();
    let state = s.state().unwrap();
    let circle = turretguard_core::geometry::apollonius_circle(state.attacker, state.defender, &p).unwrap();
    let pd = circle.closest_to_origin().unwrap();
    let target = svg.lines().find(|l| l.contains("class=\"target\"")).unwrap();
    let cap = svg.lines().find(|l| l.contains("class=\"capture\"")).unwrap();
    let x = attribute(target, "cx").unwrap() + pd.x * SCALE;
    let y = attribute(target, "cy").unwrap() - pd.y * SCALE;
    let err = (attribute(cap, "cx").unwrap() - x).hypot(attribute(cap, "cy").unwrap() - y);
    assert!(err <= 1.0, "{err}");
}

#[test]
fn render_is_byte_identical() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    assert_eq!(render(&scenario("solo_turret.json"), d1.path()).1, render(&scenario("solo_turret.json"), d2.path()).1);
}

#[test]
fn render_skips_attacker_win() {
    let dir = tempfile::tempdir().unwrap();
    let (out, svg) = render(&scenario("attacker_wins.json"), dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(svg.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("render skipped"));
}

#[test]
fn render_trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    run(&["simulate".as_ref(), scenario("simultaneous.json").as_os_str(), "--csv".as_ref(), csv.as_os_str()]);
    let (out, svg) = render(&csv, dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(svg.lines().filter(|l| l.contains("class=\"path ")).count(), 2);
    assert_eq!(svg.lines().filter(|l| l.contains("stroke-dasharray")).count(), 1);
}

fn scenario_strategy() -> impl Strategy<Value = ScenarioFile> {
    (
        0.1f64..0.95,
        0.05f64..2.0,
        1.01f64..6.0,
        -3.2f64..3.2,
        -6.0f64..6.0,
        -6.0f64..6.0,
        -7.0f64..7.0,
        proptest::option::of((1e-5f64..1e-2, 1usize..500)),
    )
        .prop_map(|(ratio, omega, r, th, dx, dy, look, sim)| ScenarioFile {
            nu: ratio,
            mu: 1.0,
            omega: ratio + omega,
            attacker: [r * th.cos(), r * th.sin()],
            defender: [dx, dy],
            turret_angle: look,
            sim: sim.map(|(dt, period)| SimBlock { dt: Some(dt), resolve_period: Some(period), ..SimBlock::default() }),
            sweep: None,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn scenario_round_trips(s in scenario_strategy()) {
        prop_assert_eq!(parse_scenario(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn report_round_trips(r in 1.2f64..5.0, th in -3.2f64..3.2, dx in -5.0f64..5.0, dy in -5.0f64..5.0) {
        let p = GameParams::new(0.7, 1.0, 1.0).unwrap();
        let s = GameState::new(Point::new(dx, dy), Point::new(r * th.cos(), r * th.sin()), 0.0).unwrap();
        let report = SolutionReport::from_status(&classify(&s, &p));
        let back: SolutionReport = serde_json::from_str(&report.to_json()).unwrap();
        prop_assert_eq!(back, report);
    }
}
