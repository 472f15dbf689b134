use std::f64::consts::PI;
use std::process::{Command, Output};

fn reebkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reebkit")).args(args).output().expect("spawn reebkit")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn value(out: &Output, key: &str) -> String {
    let text = String::from_utf8_lossy(&out.stdout);
    let prefix = format!("{key} = ");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key} in:\n{text}"))
        .to_string()
}

fn number(out: &Output, key: &str) -> f64 {
    value(out, key).parse().unwrap()
}

fn point(out: &Output, key: &str) -> Vec<f64> {
    let v = value(out, key);
    v.trim_matches(|c| c == '[' || c == ']').split(", ").map(|s| s.parse().unwrap()).collect()
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
    }
}

#[test]
fn exit_codes_of_representative_invocations() {
    let cases: &[(&[&str], i32)] = &[
        (&["catalog", "list"], 0),
        (&["catalog", "show", "darboux:2"], 0),
        (&["verify", "--example", "darboux:3"], 0),
        (&["reeb", "--example", "darboux:1", "--at", "0,1,2"], 0),
        (&["hamfield", "--example", "darboux:1", "--hamiltonian", "q"], 0),
        (&["symplectize", "--example", "deformed-hopf:1,2"], 0),
        (&["reduce", "--example", "std-contactification:symmetric"], 0),
        (&["exactness", "--example", "std-contactification:canonical"], 0),
        (&["verify", "--example", "nope:1"], 1),
        (&["exactness", "--example", "hopf:2"], 1),
        (&["rescale-falsify", "--example", "darboux:1", "--factor", "q - 5"], 2),
        (&["flow", "--example", "darboux:1", "--start", "0,0"], 1),
        (&["verify"], 1),
    ];
    for (args, want) in cases {
        let out = reebkit(args);
        assert_eq!(code(&out), *want, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = ["period", "--example", "hopf:2", "--start", "random:seed=3", "--horizon", "20"];
    let a = reebkit(&args);
    let b = reebkit(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn round_sphere_period_from_seeded_start() {
    let out = reebkit(&["period", "--example", "hopf:2", "--start", "random:seed=7", "--horizon", "50"]);
    assert_eq!(code(&out), 0);
    assert_eq!(value(&out, "classification"), "periodic");
    assert!((number(&out, "period") - PI).abs() <= 1e-6);
    assert_eq!(value(&out, "horizon"), "5e1");
    assert_eq!(value(&out, "seed"), "7");
}

#[test]
fn affine_rescaling_is_not_reeb_preserving() {
    let out = reebkit(&["rescale-falsify", "--example", "darboux:1", "--factor", "1 + q/2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(number(&out, "residual_at_origin"), 0.5);
    assert_eq!(value(&out, "verdict"), "NOT-A-REEB");
    let out = reebkit(&["rescale-falsify", "--example", "darboux:1", "--factor", "3"]);
    assert_eq!(value(&out, "verdict"), "REEB-PRESERVED");
}

#[test]
fn sphere_integrality_passes_and_writes_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let off = dir.path().join("mesh.off");
    let out = reebkit(&["integrality", "--example", "hopf:2", "--mesh-level", "5", "--off", off.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(value(&out, "verdict"), "PASS");
    assert!((number(&out, "integral") - PI).abs() <= 1e-3);
    let mesh = std::fs::read_to_string(&off).unwrap();
    assert!(mesh.starts_with("OFF"));
}

#[test]
fn wrong_hbar_fails_integrality() {
    let out = reebkit(&["integrality", "--example", "hopf:2", "--mesh-level", "3", "--hbar", "0.37"]);
    assert_eq!(code(&out), 2);
    assert_eq!(value(&out, "verdict"), "FAIL");
    assert_eq!(value(&out, "hbar_source"), "given");
}

#[test]
fn reversed_orientation_negates_integral() {
    let out = reebkit(&["integrality", "--example", "hopf:2", "--mesh-level", "3", "--hbar", "0.5", "--reverse"]);
    assert_eq!(value(&out, "nearest"), "-1");
    assert!((number(&out, "integral") + PI).abs() <= 1e-2);
}

#[test]
fn flow_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("orbit.csv");
    let svg = dir.path().join("orbit.svg");
    let out = reebkit(&[
        "flow",
        "--example",
        "hopf:2",
        "--start",
        "1,0,0,0",
        "--time",
        "1",
        "--csv",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
        "--proj",
        "0,1",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(csv).unwrap();
    assert!(csv.starts_with("t,q1,p1,q2,p2\n"));
    assert!(csv.lines().count() > 10);
    assert!(std::fs::read_to_string(svg).unwrap().contains("<svg"));
    assert!(number(&out, "constraint_drift") <= 1e-7);
}

#[test]
fn manifest_settings_apply_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plane.toml");
    std::fs::write(
        &path,
        "[chart]\ncoords = [\"z\", \"q\", \"p\"]\n[forms]\neta = \"dz - p*dq\"\n[fields]\nhamiltonian = \"q\"\n[run]\nseed = 11\nsamples = 30\ntol = 1e-9\ntime = 2.0\nstart = [0.0, 0.0, 0.0]\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let out = reebkit(&["flow", "--manifest", p]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(value(&out, "seed"), "11");
    assert_eq!(value(&out, "samples"), "30");
    assert_eq!(value(&out, "tol"), "1e-9");
    assert_close(&point(&out, "end"), &[2.0, 0.0, 0.0], 1e-12);
    let out = reebkit(&["flow", "--manifest", p, "--seed", "5", "--tol", "1e-11", "--time", "1"]);
    assert_eq!(value(&out, "seed"), "5");
    assert_eq!(value(&out, "tol"), "1e-11");
    assert_close(&point(&out, "end"), &[1.0, 0.0, 0.0], 1e-12);
    let out = reebkit(&["hamfield", "--manifest", p]);
    assert_eq!(code(&out), 0);
    assert_eq!(value(&out, "hamiltonian"), "q");
}

#[test]
fn degenerate_manifest_is_a_quantitative_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[chart]\ncoords = [\"z\", \"q\", \"p\"]\n[forms]\neta = \"dz\"\n").unwrap();
    let out = reebkit(&["verify", "--manifest", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn reduced_form_on_equator_pair() {
    let out = reebkit(&["reduce", "--example", "hopf:2", "--at", "1,0,0"]);
    assert_eq!(code(&out), 0);
    assert!((number(&out, "omega_uv").abs() - 0.25).abs() <= 1e-9);
}
