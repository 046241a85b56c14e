use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_starhairs"));
    c.env_remove("STARHAIRS_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("starhairs-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn info_reports_normalization() {
    let o = run(&["--preset", "broken", "info"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("r_norm"));
    assert!(out.contains("critical points  2"));
}

#[test]
fn usage_errors_exit_with_two() {
    let o = run(&["--preset", "nope", "info"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[cli_io.unknown_preset]"));

    let o = run(&["info"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--preset"));
}

#[test]
fn unknown_config_key_names_its_line() {
    let path = scratch("bad.json");
    std::fs::write(&path, "{\n  \"map\": {\"preset\": \"broken\"},\n  \"colour\": 3\n}\n").unwrap();
    let o = run(&["--config", path.to_str().unwrap(), "info"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("colour") && err.contains("line 3"), "{err}");
}

#[test]
fn tiny_render_is_an_exact_p6() {
    let path = scratch("tiny.ppm");
    let o = run(&[
        "--preset", "disjoint", "--out", path.to_str().unwrap(), "render",
        "--width", "2", "--height", "1", "--half-width", "2", "--half-height", "1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(bytes.len(), 17);
    assert_eq!(&bytes[..11], b"P6\n2 1\n255\n");
    let dump = std::fs::read_to_string(format!("{}.raster.tsv", path.display())).unwrap();
    assert_eq!(dump.lines().filter(|l| !l.starts_with('#')).count(), 2);
}

#[test]
fn ray_file_has_header_and_records() {
    let path = scratch("ray.tsv");
    let o = run(&[
        "--preset", "landing", "--out", path.to_str().unwrap(), "trace-ray",
        "--address", "[] ([(inf,0,0),(0,0,0)])", "--t-count", "5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# starhairs "));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 5);
    for r in rows {
        assert_eq!(r.len(), 6);
        let im: f64 = r[5].parse().unwrap();
        assert!(im.abs() < 1e-8);
    }
}

#[test]
fn check_ends_with_json_summary() {
    let o = run(&["--preset", "broken", "check", "--samples", "300", "--pairs", "60"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let last = out.lines().last().unwrap();
    let v: serde_json::Value = serde_json::from_str(last).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["expansivity"]["derivative_violations"], 0);
    assert!(!v["head_start"].as_array().unwrap().is_empty());
}

#[test]
fn periodic_address_lands_on_the_repelling_point() {
    let path = scratch("cycle.tsv");
    let o = run(&[
        "--preset", "landing", "--out", path.to_str().unwrap(), "periodic",
        "--address", "[] ([(inf,0,0),(0,0,0)])",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("verdict   lands_repelling"), "{out}");
    assert!(out.contains("multiplier -2.000000000000"), "{out}");
    assert!(path.exists());
}

#[test]
fn arnold_has_no_period_four_orbit_on_the_circle() {
    let o = run(&["--preset", "arnold", "periodic", "--period", "4", "--on-circle"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("no orbit of exact period 4"), "{}", stdout(&o));
}

#[test]
fn thread_count_does_not_change_the_image() {
    let a = scratch("t1.ppm");
    let b = scratch("t4.ppm");
    for (p, t) in [(&a, "1"), (&b, "4")] {
        let o = run(&[
            "--preset", "landing", "--threads", t, "--out", p.to_str().unwrap(), "render",
            "--width", "48", "--half-width", "3",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
