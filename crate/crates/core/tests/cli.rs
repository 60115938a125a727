//! End-to-end runs of the `onewave` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use onewave::analysis::read_section;
use onewave::Seismogram;

const SMALL: &str = r#"
[model]
layers = "0:1600, 200:2400"
z_max = 400.0

[grid]
dx = 10.0
dz = 10.0
nx = 64
nz = 40
dt = 0.002
nt = 256

[shot]
source_x = 320.0
receiver_depth = 250.0
"#;

fn onewave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onewave"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

/// Runs a command expected to succeed and returns the run directory it
/// prints.
fn run_ok(args: &[&str]) -> PathBuf {
    let out = onewave(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    PathBuf::from(String::from_utf8(out.stdout).unwrap().trim())
}

fn seismogram(path: &Path) -> Seismogram {
    Seismogram::from_section(read_section(path).unwrap()).unwrap()
}

#[test]
fn oneway_writes_sections_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "vm.toml", SMALL);
    let out = tmp.path().join("out");
    let dir = run_ok(&[
        "oneway",
        cfg.to_str().unwrap(),
        "--epsilon",
        "0",
        "--multiples",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    for name in ["seismogram.owf", "multiple_0.owf", "multiple_1.owf", "manifest.json"] {
        assert!(dir.join(name).is_file(), "{name} missing");
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["multiples"], serde_json::json!([0, 1]));
    assert_eq!(manifest["epsilon"], 0);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);

    // The total is the sum of the per-multiple sections.
    let total = seismogram(&dir.join("seismogram.owf"));
    let m0 = seismogram(&dir.join("multiple_0.owf"));
    let m1 = seismogram(&dir.join("multiple_1.owf"));
    let scale = total.max_abs();
    for ((t, a), b) in total.values.iter().zip(&m0.values).zip(&m1.values) {
        assert!((t - a - b).abs() <= 1e-12 * scale);
    }
}

#[test]
fn identical_runs_are_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "vm.toml", SMALL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let da = run_ok(&["oneway", cfg.to_str().unwrap(), "--multiples", "1", "--out", a.to_str().unwrap()]);
    let db = run_ok(&[
        "--workers",
        "2",
        "oneway",
        cfg.to_str().unwrap(),
        "--multiples",
        "1",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!(da.file_name(), db.file_name());
    for name in ["seismogram.owf", "multiple_1.owf", "manifest.json"] {
        assert_eq!(fs::read(da.join(name)).unwrap(), fs::read(db.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn homogeneous_record_at_source_depth_is_empty() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL
        .replace("0:1600, 200:2400", "0:2000")
        .replace("receiver_depth = 250.0", "receiver_depth = 0.0");
    let cfg = write_config(tmp.path(), "h.toml", &text);
    let deep = write_config(tmp.path(), "d.toml", &SMALL.replace("0:1600, 200:2400", "0:2000"));
    let out = tmp.path().join("out");
    let top = run_ok(&["oneway", cfg.to_str().unwrap(), "--epsilon", "1", "--out", out.to_str().unwrap()]);
    let below = run_ok(&["oneway", deep.to_str().unwrap(), "--epsilon", "1", "--out", out.to_str().unwrap()]);
    let up = seismogram(&top.join("seismogram.owf")).max_abs();
    let direct = seismogram(&below.join("seismogram.owf")).max_abs();
    assert!(direct > 0.0);
    assert!(up <= 1e-12 * direct, "up-going record {up} vs direct {direct}");
}

#[test]
fn qcurve_of_a_section_with_itself_is_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "vm.toml", SMALL);
    let out = tmp.path().join("out");
    let dir = run_ok(&["oneway", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let section = dir.join("seismogram.owf");
    let csv_path = tmp.path().join("q.csv");
    let status = onewave(&[
        "qcurve",
        section.to_str().unwrap(),
        section.to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let mut defined = 0;
    for row in reader.records() {
        let row = row.unwrap();
        if &row[2] == "1" {
            defined += 1;
            assert_eq!(row[1].parse::<f64>().unwrap(), 1.0);
        }
    }
    assert!(defined > 0);
}

#[test]
fn oneway_and_fullwave_compose_into_a_qcurve() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}\n[fullwave]\nrefine = 1\nsponge_cells = 10\nbuffer_cells = 0\n");
    let cfg = write_config(tmp.path(), "vm.toml", &text);
    let out = tmp.path().join("out");
    let one = run_ok(&["oneway", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let full = run_ok(&["fullwave", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_ne!(one, full);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(full.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["fd_dt"].as_f64().unwrap() > 0.0);
    let csv_path = tmp.path().join("q.csv");
    let q = onewave(&[
        "qcurve",
        full.join("seismogram.owf").to_str().unwrap(),
        one.join("seismogram.owf").to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(q.status.success(), "{}", String::from_utf8_lossy(&q.stderr));
    let rows = csv::Reader::from_path(&csv_path).unwrap().records().count();
    assert_eq!(rows, 64);
}

#[test]
fn exit_codes_follow_the_failure_kind() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();

    let bad = write_config(tmp.path(), "bad.toml", &SMALL.replace("nx = 64", "nx = 60"));
    assert_eq!(onewave(&["oneway", bad.to_str().unwrap(), "--out", out]).status.code(), Some(2));

    let unknown = write_config(tmp.path(), "unknown.toml", &format!("{SMALL}\n[extra]\nx = 1\n"));
    assert_eq!(onewave(&["oneway", unknown.to_str().unwrap(), "--out", out]).status.code(), Some(2));

    let missing = tmp.path().join("missing.toml");
    assert_eq!(onewave(&["oneway", missing.to_str().unwrap(), "--out", out]).status.code(), Some(4));

    let unstable = write_config(tmp.path(), "cfl.toml", &format!("{SMALL}\n[fullwave]\ndt = 0.002\n"));
    let r = onewave(&["fullwave", unstable.to_str().unwrap(), "--out", out]);
    assert_eq!(r.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&r.stderr).contains("use dt <="));

    let nope = tmp.path().join("nope.owf");
    let q = onewave(&["qcurve", nope.to_str().unwrap(), nope.to_str().unwrap(), "--out", out]);
    assert_eq!(q.status.code(), Some(4));
}

#[test]
fn sweep_writes_a_summary_per_contrast() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}\n[fullwave]\nrefine = 1\nsponge_cells = 10\nbuffer_cells = 0\n");
    let cfg = write_config(tmp.path(), "vm.toml", &text);
    let out = tmp.path().join("out");
    let dir = run_ok(&[
        "sweep",
        cfg.to_str().unwrap(),
        "--contrasts",
        "1600,2400",
        "--out",
        out.to_str().unwrap(),
    ]);
    let dir = PathBuf::from(dir.to_str().unwrap().lines().last().unwrap());
    let rows: Vec<_> = csv::Reader::from_path(dir.join("summary.csv"))
        .unwrap()
        .records()
        .map(Result::unwrap)
        .collect();
    assert_eq!(rows.len(), 2);
    assert!(dir.join("q_1600.csv").is_file() && dir.join("q_2400.csv").is_file());
}
