use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn morphosim(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_morphosim"));
    cmd.args(args).env_remove("MORPHOSIM_OUT");
    cmd
}

fn run(args: &[&str]) -> Output {
    morphosim(args).output().expect("binary runs")
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

const SHORT_RUN: &str = "\
sigma = 0.05
m = 40
t_end = 1
output_interval = 0.1
snapshot_every = 5
mesh_every = 5
mesh_segments = 12
seed = 7
";

fn short_config(dir: &Path) -> String {
    let path = dir.join("run.conf");
    fs::write(&path, SHORT_RUN).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn simulate_is_deterministic_and_lists_its_files() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = short_config(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = run(&[
            "simulate",
            "--config",
            &conf,
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let m = manifest(&a);
    assert_eq!(m["exit_status"], 0);
    assert_eq!(m["seed"], 7);
    assert_eq!(m["grid"]["m"], 40);
    let files: Vec<&str> = m["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap())
        .collect();
    for f in &files {
        assert!(a.join(f).is_file(), "listed but missing: {f}");
    }
    for f in [
        "timeseries.csv",
        "final_profile.csv",
        "final_mesh.obj",
        "profiles/profile_00000.csv",
        "meshes/mesh_00005.obj",
    ] {
        assert!(files.contains(&f), "{f} not listed");
    }
    for f in files.iter().filter(|f| **f != "manifest.json") {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f} differs between reruns"
        );
    }
}

#[test]
fn seed_flag_changes_random_data() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = short_config(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(
        run(&["simulate", "--config", &conf, "--out", a.to_str().unwrap()])
            .status
            .success()
    );
    assert!(run(&[
        "simulate",
        "--config",
        &conf,
        "--seed",
        "8",
        "--out",
        b.to_str().unwrap()
    ])
    .status
    .success());
    assert_eq!(manifest(&b)["seed"], 8);
    assert_ne!(
        fs::read(a.join("timeseries.csv")).unwrap(),
        fs::read(b.join("timeseries.csv")).unwrap()
    );
}

#[test]
fn environment_overrides_out() {
    let tmp = tempfile::tempdir().unwrap();
    let env_dir = tmp.path().join("from_env");
    let flag_dir = tmp.path().join("from_flag");
    let out = morphosim(&[
        "ellipsoid",
        "--a",
        "1",
        "--c",
        "0.5",
        "--t-end",
        "1",
        "--out",
        flag_dir.to_str().unwrap(),
    ])
    .env("MORPHOSIM_OUT", &env_dir)
    .output()
    .unwrap();
    assert!(out.status.success());
    assert!(env_dir.join("ellipsoid.csv").is_file());
    assert!(!flag_dir.exists());
}

#[test]
fn bad_config_exits_2_and_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("bad.conf");
    fs::write(&conf, "sigma = 0.1\nnu = 1.5\n").unwrap();
    let out = run(&[
        "simulate",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nu"));

    let out = run(&["simulate", "--preset", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parametrization_loss_exits_3_with_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("loss.conf");
    fs::write(
        &conf,
        "dim = 2\nsigma = 0.01\nd = 8\nm = 40\nt_end = 50\ninitial = modes\nperturbation = 2:2.5\n",
    )
    .unwrap();
    let dir = tmp.path().join("o");
    let out = run(&[
        "simulate",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let m = manifest(&dir);
    assert_eq!(m["exit_status"], 3);
    assert!(dir.join("final_profile.csv").is_file());
}

#[test]
fn verify_fast_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "verify",
        "--suite",
        "fast",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(
        stdout.lines().filter(|l| l.contains("[PASS]")).count(),
        10,
        "{stdout}"
    );
    let table = fs::read_to_string(tmp.path().join("verify.csv")).unwrap();
    assert_eq!(table.lines().count(), 11);
}

#[test]
fn unwritable_out_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = run(&[
        "verify",
        "--suite",
        "fast",
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn stability_scan_writes_region_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "stability",
        "--nu",
        "0.3,0.5",
        "--d-range",
        "2:8:10",
        "--sigma-range",
        "0.01:0.5:10",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in [
        "region_nu0.3.csv",
        "boundary_nu0.5.csv",
        "root_gap_nu0.5.csv",
        "necessary_nu0.3.csv",
        "summary.csv",
    ] {
        assert!(tmp.path().join(f).is_file(), "{f}");
    }
    let region = fs::read_to_string(tmp.path().join("region_nu0.5.csv")).unwrap();
    assert_eq!(region.lines().count(), 101);
}

#[test]
fn presets_are_listed_and_printed() {
    let out = run(&["preset"]);
    let names = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(names.lines().any(|l| l == "fig4"));
    let out = run(&["preset", "fig6"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("inflating = true"));
}
