use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = r#"
[plate]
a_m = 1.0
h_m = 0.01

[plate.isotropic]
youngs_modulus_pa = 70.0e9
poisson_ratio = 0.3
density_kg_m3 = 2700.0

[mesh]
nx = 8
ny = 8
boundary = "simply-supported"

[crack]
d_over_a = 0.3
theta_degrees = 20.0

[solver]
modes = 8
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_panel-flutter"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_accepts_a_good_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ok.toml", SMALL);
    let out = run(&["validate", s(&cfg)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("configuration ok"));
    // Validation must not produce any output files.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn bad_configs_exit_nonzero_with_a_field_message() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown.toml", SMALL.replace("h_m = 0.01", "h_m = 0.01\nthickness_mm = 3")),
        ("negative.toml", SMALL.replace("h_m = 0.01", "h_m = -0.01")),
        ("syntax.toml", "[plate\n".to_string()),
    ];
    for (name, text) in cases {
        let cfg = write_config(dir.path(), name, &text);
        for sub in ["validate", "run"] {
            let out = run(&[sub, s(&cfg), "--out", s(&dir.path().join("o"))]);
            assert!(!out.status.success(), "{sub} {name} succeeded");
            assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"), "{name}");
        }
    }
    let missing = run(&["run", s(&dir.path().join("absent.toml"))]);
    assert!(!missing.status.success());
}

#[test]
fn run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "case.toml", SMALL);
    let out_dir = dir.path().join("out");
    let out = run(&["run", s(&cfg), "--out", s(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("lambda_cr_nd="));
    for name in ["report.txt", "report.json", "modes.csv", "trace.csv"] {
        assert!(out_dir.join(name).is_file(), "missing {name}");
    }
    let report = std::fs::read_to_string(out_dir.join("report.txt")).unwrap();
    assert!(report.contains("# resolved configuration"));
    let trace = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("lambda_nd,branch_id,re_omega2_nd,im_omega2_nd"));
}

#[test]
fn run_is_bitwise_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "case.toml", SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert!(run(&["run", s(&cfg), "--out", s(d)]).status.success());
    }
    for name in ["trace.csv", "modes.csv"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn empty_study_succeeds_with_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}\n[study]\nparameter = \"crack.d_over_a\"\nvalues = []\n");
    let cfg = write_config(dir.path(), "study.toml", &text);
    let out_dir = dir.path().join("study");
    let out = run(&["study", s(&cfg), "--out", s(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("study.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("crack.d_over_a,lambda_cr_nd,omega_cr_nd,omega2_cr_nd"));
}

#[test]
fn study_rows_follow_values() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}\n[study]\nparameter = \"crack.theta_degrees\"\nvalues = [0.0, 90.0]\n");
    let cfg = write_config(dir.path(), "study.toml", &text);
    let out = run(&["study", s(&cfg), "--out", s(&dir.path().join("study"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = stdout.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with('0') && rows[1].starts_with("90"));
    assert!(rows.iter().all(|r| r.ends_with(",ok")), "{stdout}");
}

#[test]
fn dump_matrices_writes_matrix_market() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "case.toml", SMALL);
    let out_dir = dir.path().join("mtx");
    let out = run(&["dump-matrices", s(&cfg), "--out", s(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["K.mtx", "M.mtx", "A.mtx"] {
        let text = std::fs::read_to_string(out_dir.join(name)).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general"), "{name}");
    }
}

#[test]
fn missing_subcommand_is_an_error() {
    assert!(!run(&[]).status.success());
}
