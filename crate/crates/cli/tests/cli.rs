use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn baplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_baplab")).current_dir(root()).args(args).output().unwrap()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn spectrum_report_embeds_version_and_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("s");
    let o = baplab(&["spectrum", "--model", "gallery:burgers1d", "--signal", "configs/signals/quasi.json", "--grid-l", "100", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["version"], baplab_core::VERSION);
    assert_eq!(r["command"], "spectrum");
    assert_eq!(r["config"]["grid_l"], 100.0);
    assert_eq!(r["config"]["cfl_convective"], 0.4);
    assert!(out.join("terms.csv").exists());
}

#[test]
fn verdict_mismatch_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("adv");
    let o = baplab(&[
        "decay",
        "--model",
        "gallery:linear-advection1d",
        "--signal",
        "configs/signals/sine.json",
        "--grid-n",
        "64",
        "--end-time",
        "0.5",
        "--refinement",
        "64,128",
        "--expect",
        "decays",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(report(&out)["verdict"], "fail");
}

#[test]
fn config_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, r#"{"command":"simulate","model":"gallery:burgers1d","clf_convective":0.3}"#).unwrap();
    let o = baplab(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("clf_convective"));

    let o = baplab(&["nondegeneracy", "--model", "no/such/model.json"]);
    assert_eq!(o.status.code(), Some(2));

    let o = baplab(&["simulate", "--model", "gallery:burgers1d", "--signal", "configs/signals/sine.json", "--end-time", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("end_time"));

    // 1D data on a 2D model
    let out = tmp.path().join("dims");
    let o = baplab(&[
        "simulate",
        "--model",
        "gallery:anisotropic2d",
        "--signal",
        "configs/signals/sine.json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("c");
    let o = baplab(&["--config", "configs/experiments/contraction.json", "--grid-n", "64", "--end-time", "0.2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["command"], "contraction");
    assert_eq!(r["config"]["grid_n"], 64);
    assert_eq!(r["config"]["end_time"], 0.2);
}

#[test]
fn repeated_invocations_are_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("k");
    let args = ["--config", "configs/experiments/simulate-2d.json", "--grid-n", "32", "--out", out.to_str().unwrap()];
    let mut runs = Vec::new();
    for _ in 0..2 {
        assert_eq!(baplab(&args).status.code(), Some(0));
        let mut files: Vec<(PathBuf, Vec<u8>)> =
            fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).map(|p| (p.clone(), fs::read(p).unwrap())).collect();
        files.sort();
        runs.push(files);
        fs::remove_dir_all(&out).unwrap();
    }
    assert_eq!(runs[0], runs[1]);
    assert!(runs[0].iter().any(|(p, _)| p.ends_with("fields.bin")));
}

#[test]
fn every_example_config_runs() {
    let tmp = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(root().join("configs/experiments")).unwrap() {
        let path = entry.unwrap().path();
        let out = tmp.path().join(path.file_stem().unwrap());
        let o = baplab(&["--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", path.display(), String::from_utf8_lossy(&o.stderr));
    }
}
