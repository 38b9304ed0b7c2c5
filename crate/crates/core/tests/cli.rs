use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn fedosov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fedosov")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn star_on_flat_fixture() {
    let flat = fixture("flat2d.toml");
    let o = fedosov(&["-c", flat.to_str().unwrap(), "star", "-f", "x1", "-g", "x2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "x1*x2 + 1/2*nu\n");
}

#[test]
fn verify_dsquare_on_curved_fixture() {
    let curved = fixture("curved2d.toml");
    let o = fedosov(&["-c", curved.to_str().unwrap(), "verify", "dsquare"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).ends_with("verify dsquare: PASS (1 checks)\n"));
}

#[test]
fn ck_beyond_certified_order() {
    let curved = fixture("curved2d.toml");
    let o = fedosov(&["-c", curved.to_str().unwrap(), "ck", "-k", "4", "-f", "x1", "-g", "x2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("floor(N/2) = 3"), "{}", stderr(&o));
    let o = fedosov(&["-c", curved.to_str().unwrap(), "ck", "-k", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "C1(x1, x1) = 0\nC1(x1, x2) = 1/2\nC1(x2, x1) = -1/2\nC1(x2, x2) = 0\n");
}

#[test]
fn validate_materialises_auto_potential() {
    let flat = fixture("flat2d.toml");
    let o = fedosov(&["-c", flat.to_str().unwrap(), "validate"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("potential A: theta = (1/2*x2)*dx1 + (-1/2*x1)*dx2"), "{out}");
    assert!(out.contains("potential A: xi = (1/2*x1)*d1 + (1/2*x2)*d2"), "{out}");
}

#[test]
fn torsion_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("torsion.toml");
    std::fs::write(&cfg, "dim = 2\ncap = 4\n[[gamma]]\nk = 1\ni = 1\nj = 2\nvalue = \"x2\"\n").unwrap();
    let o = fedosov(&["-c", cfg.to_str().unwrap(), "validate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL torsion free"), "{}", stdout(&o));
    let o = fedosov(&["-c", cfg.to_str().unwrap(), "solve"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("torsion free"));
}

#[test]
fn schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "dim = 2\ncap = 4\nomega = [[\"0\", \"1\"]]\n").unwrap();
    let o = fedosov(&["-c", cfg.to_str().unwrap(), "solve"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`omega`"), "{}", stderr(&o));
    let o = fedosov(&["-c", cfg.to_str().unwrap(), "frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cache_roundtrip_and_invalidation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("chart.toml");
    let cache = dir.path().join("chart.cache");
    let base = "dim = 2\ncap = 4\n[[gamma]]\nk = 2\ni = 1\nj = 1\nvalue = \"x2\"\n";
    std::fs::write(&cfg, base).unwrap();
    let args = |cmd: &str| fedosov(&["-c", cfg.to_str().unwrap(), "--cache", cache.to_str().unwrap(), cmd]);

    let first = args("solve");
    assert_eq!(first.status.code(), Some(0));
    assert!(stderr(&first).starts_with("cache: wrote"));
    let text = std::fs::read_to_string(&cache).unwrap();
    assert!(text.starts_with("fedosov-cache v1\nchart-sha256 "));

    let second = args("solve");
    assert!(stderr(&second).starts_with("cache: loaded"));
    assert_eq!(stdout(&first), stdout(&second));

    std::fs::write(&cfg, base.replace("\"x2\"", "\"x1\"")).unwrap();
    let o = args("solve");
    assert!(stderr(&o).contains("chart hash differs"), "{}", stderr(&o));

    std::fs::write(&cfg, base.replace("cap = 4", "cap = 6")).unwrap();
    let o = args("solve");
    assert!(stderr(&o).contains("cached cap 4 differs from cap 6"), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("cap 6\n"));
    assert!(stderr(&args("solve")).starts_with("cache: loaded"));
}

#[test]
fn reports_are_deterministic_and_failures_exit_nonzero() {
    let curved = fixture("curved2d.toml");
    let run = || fedosov(&["-c", curved.to_str().unwrap(), "verify", "symmetry"]);
    let (a, b) = (run(), run());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(1));
    assert!(stderr(&a).starts_with("first failure: "));
}

#[test]
fn symmetrize_weyl_fixture() {
    let flat = fixture("flat2d.toml");
    let op = fixture("inner_weyl.op");
    let o = fedosov(&["-c", flat.to_str().unwrap(), "symmetrize", "-T", op.to_str().unwrap(), "--mode", "Weyl"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("dim 2\norder 4\nnu^0: (1) * id\n"));
    assert!(out.contains("PASS C S C = S") && out.contains("PASS P S P = S"));
}
