use std::process::Command;

use pipir_cli::{run_with, EXIT_EMPTY, EXIT_OK, EXIT_USAGE};

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn pipir(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("pipir").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

fn nums(line: &str) -> Vec<f64> {
    line.split(',').filter_map(|s| s.parse().ok()).collect()
}

#[test]
fn ik_home_pose_line() {
    let r = pipir(&["ik", "--mode", "1", "--pose", "0,0,0,0", "--wm", "+++", "--digits", "6"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(r.out.lines().nth(1), Some("0.988686,0.988686,0.600000"));
    let r = pipir(&["ik", "--mode", "1", "--pose", "0,0,0,0"]);
    assert_eq!(r.out.lines().nth(1), Some("0.9886859967,0.9886859967,0.6000000000"));
}

#[test]
fn ik_all_lists_eight_branches() {
    let r = pipir(&["ik", "--mode", "3", "--pose", "0.1,0.2,0,0.3", "--wm", "all"]);
    assert_eq!(r.code, EXIT_OK);
    let rows = data_rows(&r.out);
    assert_eq!(rows.len(), 8);
    assert!(rows[0].ends_with(",---") && rows[7].ends_with(",+++"));
}

#[test]
fn ik_fk_round_trip() {
    let cases = [
        ("1", "0.2,-0.1,0.3,0"),
        ("1", "-0.35,0.4,0.1,0"),
        ("2", "0.1,0.3,0,0.7"),
        ("2", "-0.3,-0.2,0,-2.5"),
        ("3", "0.25,0.1,0,1.2"),
        ("3", "-0.4,0,0,-0.6"),
        ("4", "0,0.2,0.3,0.9"),
        ("4", "0,-0.5,0.5,1.0"),
    ];
    for (mode, pose) in cases {
        let want = nums(pose);
        let ik = pipir(&["ik", "--mode", mode, "--pose", pose, "--wm", "all", "--digits", "17"]);
        assert_eq!(ik.code, EXIT_OK, "{}", ik.err);
        for row in data_rows(&ik.out) {
            let joints = row.rsplit_once(',').unwrap().0;
            let fk = pipir(&["fk", "--mode", mode, "--joints", joints, "--digits", "17"]);
            assert_eq!(fk.code, EXIT_OK, "{}", fk.err);
            let hit = data_rows(&fk.out).into_iter().any(|line| {
                let p = nums(line);
                let da =
                    (p[3] - want[3] + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
                (0..3).all(|k| (p[k] - want[k]).abs() < 1e-8) && da.abs() < 1e-8
            });
            assert!(hit, "mode {mode} pose {pose} joints {joints}:\n{}", fk.out);
        }
    }
}

#[test]
fn degrees_convert_at_the_boundary() {
    let rad = pipir(&["ik", "--mode", "2", "--pose", "0.1,0,0,0.5"]);
    let deg = pipir(&[
        "ik",
        "--mode",
        "2",
        "--pose",
        &format!("0.1,0,0,{}", 0.5f64.to_degrees()),
        "--degrees",
    ]);
    assert_eq!(rad.out, deg.out);
    let fk = pipir(&[
        "fk",
        "--mode",
        "2",
        "--joints",
        "0.9886859966,0.9886859966,0.6",
        "--degrees",
    ]);
    let alphas: Vec<f64> = data_rows(&fk.out).iter().map(|l| nums(l)[3]).collect();
    assert!(alphas.iter().any(|a| a.abs() < 1e-6));
    assert!(alphas.iter().any(|a| a.abs() > 90.0));
}

#[test]
fn singular_verdicts() {
    let r = pipir(&["singular", "--mode", "1", "--pose", "0,0,0,0", "--digits", "5"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.contains("kind: regular"));
    assert!(r.out.contains("det_a: 1.8983"));
    assert!(r.out.contains("b_diag: 1.9774,1.9774,1.2000"));

    let r = pipir(&["singular", "--mode", "2", "--pose", "-0.225,0,0,0"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.contains("kind: parallel"), "{}", r.out);
}

#[test]
fn unreachable_and_empty_exit_three() {
    let r = pipir(&["ik", "--mode", "1", "--pose", "2,0,0,0"]);
    assert_eq!(r.code, EXIT_EMPTY);
    assert!(r.err.contains("leg(s) 1, 2, 3"));
    assert_eq!(r.err.lines().count(), 1);
    let r = pipir(&["fk", "--mode", "1", "--joints", "0,5,-5"]);
    assert_eq!(r.code, EXIT_EMPTY);
    let r = pipir(&["ik", "--mode", "2", "--pose", "0,0,0,0", "--wm", "all", "--digits", "3"]);
    assert_eq!(r.code, EXIT_OK);
}

#[test]
fn usage_errors_exit_two_with_one_line() {
    for args in [
        vec!["ik", "--mode", "5", "--pose", "0,0,0,0"],
        vec!["ik", "--mode", "1", "--pose", "0,x,0,0"],
        vec!["ik", "--mode", "2", "--pose", "0,0,0.5,0"],
        vec!["ik", "--mode", "1", "--pose", "0,0,0,0", "--wm", "++"],
        vec!["fk", "--mode", "1"],
        vec!["frobnicate"],
        vec!["jsmap", "--mode", "1", "--res", "1"],
        vec![
            "ik",
            "--mode",
            "1",
            "--pose",
            "0,0,0,0",
            "--config",
            "/nonexistent/pipir.conf",
        ],
    ] {
        let r = pipir(&args);
        assert_eq!(r.code, EXIT_USAGE, "{args:?}");
        assert_eq!(r.err.lines().count(), 1, "{args:?}: {}", r.err);
        assert!(r.err.starts_with("pipir: "));
    }
}

#[test]
fn help_exits_zero() {
    let r = pipir(&["--help"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.contains("wsmap"));
}

#[test]
fn jsmap_rows_and_header() {
    let r = pipir(&["jsmap", "--mode", "1", "--res", "16"]);
    assert_eq!(r.code, EXIT_OK);
    let body: Vec<&str> = r.out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "rho2,rho3,n_fk");
    assert_eq!(body.len(), 257);
    for key in [
        "mode=1",
        "rho1=",
        "preset=consistent",
        "resolution=16,16",
        "coord1_range=",
    ] {
        assert!(r.out.lines().any(|l| l.starts_with("# ") && l.contains(key)), "{key}");
    }
    assert!(body[1..]
        .iter()
        .all(|l| matches!(l.rsplit(',').next(), Some("0" | "2" | "4"))));
}

#[test]
fn wsmap_schema_and_determinism() {
    let a = pipir(&["wsmap", "--mode", "2", "--wm", "+++", "--res", "40", "--threads", "1"]);
    let b = pipir(&["wsmap", "--mode", "2", "--wm", "+++", "--res", "40", "--threads", "3"]);
    assert_eq!(a.code, EXIT_OK);
    assert_eq!(a.out, b.out);
    let body: Vec<&str> = a.out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "coord1,coord2,feasible,detA_sign,aspect_id");
    assert_eq!(body.len(), 1601);
    for row in &body[1..] {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f.len(), 5);
        if f[2] == "0" {
            assert_eq!(f[3], "0");
            assert_eq!(f[4], "");
        }
    }
    assert!(a.out.contains("# wm=+++"));
    assert!(a.out.contains("# coord2=alpha"));
}

#[test]
fn wsmap_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("maps/ws1.csv");
    let r = pipir(&["wsmap", "--mode", "1", "--res", "12", "--out", path.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(data_rows(&text).len(), 144);
}

#[test]
fn transitions_report() {
    let dir = tempfile::tempdir().unwrap();
    let r = pipir(&["transitions", "--res", "128", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.contains("mode 2: boundary x = -0.2250000000"));
    assert!(r.out.contains("mode 3: no boundary on the home line"));
    assert!(r.out.contains("mode 4: boundary z = 0.3977243258"));
    let txt = std::fs::read_to_string(dir.path().join("transitions.txt")).unwrap();
    assert_eq!(txt, r.out);
    let csv = std::fs::read_to_string(dir.path().join("transitions.csv")).unwrap();
    let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "mode,record,coord,value1,value2,aspect_id");
    assert!(body.contains(&"2,boundary,x,-0.2250000000,,"));
    assert_eq!(body.iter().filter(|l| l.starts_with("3,reachable,")).count(), 1);

    let r = pipir(&["transitions", "--res", "128", "--preset", "paper-ik-mode4"]);
    assert!(r.out.contains("mode 4: boundary z = 0.4054484815"), "{}", r.out);
}

#[test]
fn config_file_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("robot.conf");
    std::fs::write(&cfg, "# longer legs\nl = 1.2\n").unwrap();
    let base = pipir(&["ik", "--mode", "1", "--pose", "0,0,0,0"]);
    let with = pipir(&[
        "ik",
        "--mode",
        "1",
        "--pose",
        "0,0,0,0",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(with.code, EXIT_OK);
    assert_ne!(base.out, with.out);
    // l = 1.2: rho3 = sqrt(1.44 - 0.64)
    assert!(with.out.contains(&format!(",{:.10}", 0.8f64.sqrt())));

    let bin = env!("CARGO_BIN_EXE_pipir");
    let out = Command::new(bin)
        .args(["ik", "--mode", "1", "--pose", "0,0,0,0"])
        .env("PIPIR_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), with.out);

    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "colour = blue\n").unwrap();
    let out = Command::new(bin)
        .args(["ik", "--mode", "1", "--pose", "0,0,0,0"])
        .env("PIPIR_CONFIG", &bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("unknown key `colour`"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_pipir");
    let code = |args: &[&str]| {
        Command::new(bin)
            .args(args)
            .env_remove("PIPIR_CONFIG")
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(code(&["ik", "--mode", "1", "--pose", "0,0,0,0"]), Some(0));
    assert_eq!(code(&["ik", "--mode", "1", "--pose", "3,0,0,0"]), Some(3));
    assert_eq!(code(&["ik", "--mode", "9", "--pose", "0,0,0,0"]), Some(2));
}

struct ClosedPipe;

impl std::io::Write for ClosedPipe {
    fn write(&mut self, _: &[u8]) -> std::io::Result<usize> {
        Err(std::io::ErrorKind::BrokenPipe.into())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

#[test]
fn closed_stdout_is_quiet() {
    let mut err = Vec::new();
    let code = run_with(
        ["pipir", "jsmap", "--mode", "1", "--res", "8"],
        &mut ClosedPipe,
        &mut err,
    );
    assert_eq!(code, EXIT_OK);
    assert!(err.is_empty());
}
