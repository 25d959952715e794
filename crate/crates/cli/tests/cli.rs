use std::path::Path;
use std::process::{Command, Output};

use pinslider::series::Series;

fn pinslider(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pinslider"));
    cmd.args(args).env_remove("PINSLIDER_OUT_DIR");
    if let Some(dir) = out_dir {
        cmd.env("PINSLIDER_OUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn maxwell_check_reports_isostatic_bipod() {
    let o = pinslider(&["check", "--maxwell", "j=3", "s=2", "r=4"], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "n=0, isostatic candidate");
}

#[test]
fn mobility_check_counts_hexapod_freedoms() {
    let o = pinslider(&["check", "--mobility", "n=7", "b=6", "f=6*2,6*3"], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "M=6");
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(pinslider(&["frobnicate"], None).status.code(), Some(1));
    assert_eq!(pinslider(&["modes", "--bogus"], None).status.code(), Some(1));
    assert_eq!(pinslider(&["modes", "--preset", "hexapod-9"], None).status.code(), Some(1));
    assert_eq!(pinslider(&["check", "--maxwell", "j=3", "s=2"], None).status.code(), Some(1));
    assert_eq!(pinslider(&["--help"], None).status.code(), Some(0));
}

#[test]
fn modes_lists_table_frequencies() {
    let o = pinslider(&["modes", "--preset", "hexapod-1-cubic"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for f in ["2.17", "3.31", "2.89", "5.44"] {
        assert!(text.contains(f), "{f} missing from\n{text}");
    }
    assert!(text.contains("vertical rotation"));
}

#[test]
fn bipod_sweep_writes_a_parseable_series() {
    let dir = tempfile::tempdir().unwrap();
    let o = pinslider(&["bipod2d-tf", "--preset", "bipod-table1", "--alpha", "45 deg"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("shear plateau"));
    let s = Series::read(&dir.path().join("bipod2d-tf.tsv")).unwrap();
    assert_eq!(s.len(), 121);
    assert_eq!(s.columns()[0].unit, "Hz");
    let shear = s.get("shear").unwrap();
    assert!((shear.last().unwrap() - (-45.3)).abs() < 0.1);
}

#[test]
fn out_dir_flag_overrides_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let args = ["bipod2d-tf", "--preset", "bipod-table1", "--fmin", "1", "--fmax", "10", "--out-dir"];
    let mut args: Vec<&str> = args.to_vec();
    args.push(flag_dir.path().to_str().unwrap());
    assert!(pinslider(&args, Some(env_dir.path())).status.success());
    assert!(flag_dir.path().join("bipod2d-tf.tsv").exists());
    assert!(!env_dir.path().join("bipod2d-tf.tsv").exists());
}

#[test]
fn bipod_sweep_rejects_hexapods() {
    let o = pinslider(&["bipod2d-tf", "--preset", "hexapod-1-cubic"], None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn tf_point_prints_the_ratio() {
    let o = pinslider(
        &["tf-point", "--preset", "hexapod-1-cubic", "--input", "Fz", "--output", "Fz", "--freq", "50", "--ramp", "1"],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("H(Fz <- Fz) at 50 Hz"));
}

#[test]
fn tf_matrix_writes_all_cells() {
    let dir = tempfile::tempdir().unwrap();
    let o = pinslider(
        &["tf-matrix", "--preset", "hexapod-2-conic", "--fmin", "100", "--fmax", "1000", "--per-decade", "2", "--ramp", "0.5"],
        Some(dir.path()),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for out in 1..=6 {
        for input in 1..=6 {
            let s = Series::read(&dir.path().join(format!("H{out}{input}.tsv"))).unwrap();
            assert_eq!(s.len(), 3);
        }
    }
    assert!(stdout(&o).contains("structural zeros"));
}

#[test]
fn simulate_exports_time_states_and_reactions() {
    let dir = tempfile::tempdir().unwrap();
    let o = pinslider(
        &["simulate", "--preset", "hexapod-3-general", "--input", "Ty", "--freq", "5", "--ramp", "1", "--duration", "2"],
        Some(dir.path()),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = Series::read(&dir.path().join("trajectory.tsv")).unwrap();
    assert_eq!(s.columns().len(), 19);
    assert_eq!(s.len(), 401);
    assert_eq!(s.column(0)[400], 2.0);
}

#[test]
fn config_file_model_matches_the_preset() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/hexapod-3-general.toml");
    let a = pinslider(&["modes", "--config", cfg.to_str().unwrap()], None);
    let b = pinslider(&["modes", "--preset", "hexapod-3-general"], None);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn numerical_failures_exit_with_two() {
    // a huge pitch torque tips the payload through gimbal lock
    let dir = tempfile::tempdir().unwrap();
    let o = pinslider(
        &["simulate", "--preset", "hexapod-1-cubic", "--input", "Ty", "--freq", "0.5", "--amplitude", "1e6", "--ramp", "1", "--duration", "4"],
        Some(dir.path()),
    );
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}
