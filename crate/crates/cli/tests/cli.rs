use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_microind")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn cfg(name: &str) -> String {
    configs().join(name).display().to_string()
}

#[test]
fn analyze_prototype() {
    let o = run(&["analyze", "--design", &cfg("prototype_cofecu.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("winding-limited"), "{text}");
    assert!(text.contains("efficiency     77.8 %"), "{text}");
    assert!(text.contains("P_out          92.308 mW"), "{text}");
    assert!(!text.contains("generated at"));
}

#[test]
fn analyze_errors() {
    let o = run(&["analyze", "--design", "/no/such/design.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("design file not found: /no/such/design.json"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(configs().join("prototype_cofecu.json")).unwrap();
    std::fs::write(&bad, text.replace("\"f_hz\": 5e5", "\"f_hz\": 0")).unwrap();
    let o = run(&["analyze", "--design", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.json"), "{}", stderr(&o));
    assert!(stderr(&o).contains("frequency"), "{}", stderr(&o));

    std::fs::write(&bad, text.replace("\"n_lam\"", "\"n_lams\"")).unwrap();
    let o = run(&["analyze", "--design", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("n_lams"), "{}", stderr(&o));
}

#[test]
fn sweep_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = run(&[
        "sweep", "--design", &cfg("prototype_cofecu.json"), "--out", out.to_str().unwrap(),
        "--f-start", "1e3", "--f-stop", "1e7", "--points-per-decade", "20",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 82);
    assert!(csv.starts_with("f_hz,l_h,r_winding_ohm,r_core_ohm,q,p_eddy_w,p_hys_w,p_cu_w,efficiency\n"));
    assert!(stdout(&o).contains("Q peak         7.261 at 0.6310 MHz"), "{}", stdout(&o));

    let o = run(&[
        "sweep", "--design", &cfg("prototype_cofecu.json"), "--out", out.to_str().unwrap(),
        "--f-start", "5e5", "--f-stop", "5e5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 2);

    let o = run(&[
        "sweep", "--design", &cfg("prototype_cofecu.json"), "--out", out.to_str().unwrap(),
        "--f-start", "1e6", "--f-stop", "1e3",
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&[
        "sweep", "--design", &cfg("prototype_cofecu.json"), "--out", "/no/such/dir/s.csv",
    ]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn synthesize_scenario_and_lamination_cap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("design.json");
    let o = run(&["synthesize", "--config", &cfg("synthesis_cofecu.json"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("x 8.700 um CoFeCu"), "{text}");
    assert!(text.contains("sizing N*A*B/I") && text.contains("magnetic circuit L_dc"));
    let written = std::fs::read_to_string(&out).unwrap();
    assert!(written.contains("\"feasibility\""));

    // The written design is itself a valid design file.
    let o = run(&["analyze", "--design", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let o = run(&["synthesize", "--config", &cfg("synthesis_1h.json"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("lamination cap binding"), "{}", stderr(&o));
}

#[test]
fn optimize_relamination() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("frontier.csv");
    let best = dir.path().join("best.json");
    let o = run(&[
        "optimize", "--config", &cfg("relamination.json"), "--out", out.to_str().unwrap(),
        "--best", best.to_str().unwrap(), "--objective", "efficiency",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("evaluated      40"), "{text}");
    assert!(text.contains("max efficiency         33 turns, 10 x 1.00 um"), "{text}");
    assert!(text.contains("max power density"), "{text}");
    let frontier = std::fs::read_to_string(&out).unwrap();
    assert_eq!(frontier.lines().count(), 41);
    assert!(frontier.starts_with("efficiency,power_density_w_per_cm3,n_turns,n_lam,t_lam_m,t_w_m,w_w_m,feasible\n"));
    let best_text = std::fs::read_to_string(&best).unwrap();
    assert!(best_text.contains("\"n_lam\": 10"), "{best_text}");

    // Unattainable target: nothing feasible.
    let cfg_text = std::fs::read_to_string(configs().join("relamination.json")).unwrap();
    let v: String = cfg_text
        .lines()
        .filter(|l| !l.contains("reference_design"))
        .collect::<Vec<_>>()
        .join("\n")
        .replace("\"objective\": \"efficiency\",", "\"objective\": \"efficiency\", \"l_target_h\": 1.0,");
    let empty_cfg = dir.path().join("empty.json");
    std::fs::write(&empty_cfg, v).unwrap();
    let o = run(&["optimize", "--config", empty_cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("no feasible candidate"));
}

#[test]
fn tables_deterministic_with_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let oa = run(&["tables", "--out", a.to_str().unwrap()]);
    let ob = run(&["tables", "--out", b.to_str().unwrap()]);
    assert_eq!(oa.status.code(), Some(0));
    assert_eq!(oa.stdout, ob.stdout);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let text = stdout(&oa);
    assert!(text.contains("deviates: published 83%, loss-row arithmetic 52.6%"));
    assert!(text.contains("published: X"));

    let stamped = run(&["--timestamps", "tables"]);
    assert!(stdout(&stamped).starts_with("generated at unix time "));
}

#[test]
fn tables_missing_material() {
    let dir = tempfile::tempdir().unwrap();
    let reg = dir.path().join("reg.json");
    std::fs::write(&reg, "[]").unwrap();
    let o = run(&["--registry", reg.to_str().unwrap(), "tables"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("unknown material `NiFe`"), "{}", stderr(&o));
}

#[test]
fn fit_reproduces_shipped_registry() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("materials.json");
    let o = run(&["fit", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let shipped = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/materials.json")).unwrap();
    assert_eq!(std::fs::read_to_string(&out).unwrap(), shipped);
}
