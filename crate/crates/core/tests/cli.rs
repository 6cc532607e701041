use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

use bipartition::commands::{self, Command as Cmd};
use bipartition::report::{Report, Value};
use bipartition::{config, entanglement, Error};

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bipartition"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Report {
    let out = bin(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    Report::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap()
}

fn number(r: &Report, section: &str, key: &str) -> f64 {
    match r.get(section, key) {
        Some(Value::Number(x)) => *x,
        other => panic!("{section}/{key}: {other:?}"),
    }
}

fn text(r: &Report, section: &str, key: &str) -> String {
    match r.get(section, key) {
        Some(Value::Text(s)) => s.clone(),
        other => panic!("{section}/{key}: {other:?}"),
    }
}

fn temp_config(body: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".cfg").tempfile().unwrap();
    f.write_all(body.as_bytes()).unwrap();
    f
}

#[test]
fn bundled_configs_parse() {
    let pair = config::parse(example("coupled_pair.cfg")).unwrap();
    assert_eq!(pair.n_modes(), 2);
    assert_eq!(pair.divisions.len(), 2);
    let hydrogen = config::parse(example("hydrogen_analog.cfg")).unwrap();
    assert_eq!(hydrogen.system.masses(), [1.0, 1836.0]);
    for def in &hydrogen.transforms {
        let (m, _) = hydrogen.expand(def).unwrap();
        assert!(bipartition::phase_space::validate_symplectic(&hydrogen.system, &m, 1e-10).unwrap());
    }
    config::parse(example("hydrogen_shielding.cfg")).unwrap();
}

#[test]
fn compare_coupled_pair_verdicts() {
    let r = json(&["compare", example("coupled_pair.cfg").to_str().unwrap(), "--json"]);
    assert_eq!(r.schema_version, 1);
    assert_eq!(text(&r, "1|2", "verdict"), "entangled");
    assert_eq!(text(&r, "Q1|Q2", "verdict"), "separable");
    assert_eq!(r.get("summary", "hidden_entanglement"), Some(&Value::Flag(true)));
    assert_eq!(r.conventions.vacuum_symplectic_eigenvalue, 0.5);
    assert_eq!(r.conventions.logarithm, "natural");
    assert_eq!(r.tolerances["canonicity"], 1e-10);
    assert!(r.entries.iter().all(|e| e.provenance.contains("::")));
}

#[test]
fn validate_hydrogen_passes() {
    let out = bin(&["validate", example("hydrogen_analog.cfg").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("canonical") && table.contains("status: ok"));
}

#[test]
fn oracle_check_coupled_pair() {
    let r = json(&["oracle-check", example("coupled_pair.cfg").to_str().unwrap(), "--json", "--grid", "256"]);
    assert!(number(&r, "1|2", "entropy_difference") < 1e-3);
    assert!(number(&r, "1|2", "log_negativity_difference") < 1e-3);
    assert_eq!(r.tolerances["grid_points"], 256.0);
    assert!(r.passed);
}

#[test]
fn json_round_trips_and_is_deterministic() {
    for cmd in Cmd::ALL {
        let path = example("coupled_pair.cfg");
        let args = [cmd.name(), path.to_str().unwrap(), "--json", "--grid", "128", "--horizon", "1"];
        let a = bin(&args);
        let b = bin(&args);
        assert!(a.status.success(), "{cmd}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{cmd} is not deterministic");
        let text = String::from_utf8(a.stdout).unwrap();
        let report = Report::from_json(&text).unwrap();
        assert_eq!(report.to_json().unwrap().trim(), text.trim(), "{cmd}");
    }
}

#[test]
fn timestamp_does_not_affect_equality() {
    let path = example("coupled_pair.cfg");
    let plain = json(&["compare", path.to_str().unwrap(), "--json"]);
    let stamped = json(&["compare", path.to_str().unwrap(), "--json", "--timestamp"]);
    assert!(stamped.timestamp.is_some());
    assert_eq!(plain, stamped);
}

#[test]
fn cli_numbers_match_library_calls() {
    let doc = config::parse(example("coupled_pair.cfg")).unwrap();
    let r = json(&["compare", example("coupled_pair.cfg").to_str().unwrap(), "--json"]);
    let h = doc.hamiltonian().unwrap();
    let registry = doc.registry().unwrap();
    let state = doc.state(&h, &registry).unwrap();
    let reports = entanglement::compare_divisions(&state, &doc.registered_divisions(), &registry).unwrap();
    for rep in reports {
        assert_eq!(number(&r, &rep.division, "log_negativity"), rep.log_negativity);
    }
    let direct = commands::run(Cmd::Compare, &doc, example("coupled_pair.cfg").to_str().unwrap()).unwrap();
    assert_eq!(direct, r);
}

#[test]
fn truncated_file_reports_line_number() {
    let full = std::fs::read_to_string(example("coupled_pair.cfg")).unwrap();
    let cut = &full[..full.find("[0.7071067811865476, -0.7071").unwrap() + 10];
    let f = temp_config(cut);
    match config::parse(f.path()) {
        Err(Error::Parse { line, .. }) => {
            let expected = cut.lines().count();
            assert!(line >= expected - 1 && line <= expected + 1, "line {line}, file has {expected}");
        }
        other => panic!("{other:?}"),
    }
    let out = bin(&["validate", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn unknown_keys_are_all_reported() {
    let full = std::fs::read_to_string(example("coupled_pair.cfg")).unwrap();
    let bad = full.replace("[state]\n", "[state]\nknd = 1\n").replace("[run]\n", "[run]\nhorzon = 2\n");
    let f = temp_config(&bad);
    let out = bin(&["validate", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("state.knd") && err.contains("run.horzon"), "{err}");
}

#[test]
fn exit_codes() {
    // non-canonical matrix: validation fails with a physics-validity code
    let bad = r#"
schema = 1
[system]
masses = [1.0, 1.0]
[potential]
matrix = [[1.0, 0.0], [0.0, 1.0]]
[transforms.skew]
builder = "symplectic"
matrix = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 2, 0], [0, 0, 0, 1]]
"#;
    let f = temp_config(bad);
    assert_eq!(bin(&["validate", f.path().to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(bin(&["partition", f.path().to_str().unwrap()]).status.code(), Some(3));

    // a free mode has no ground state
    let free = bad.replace("[[1.0, 0.0], [0.0, 1.0]]", "[[1.0, -1.0], [-1.0, 1.0]]").replace("[transforms.skew]\nbuilder = \"symplectic\"\nmatrix = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 2, 0], [0, 0, 0, 1]]\n", "");
    let f = temp_config(&free);
    let out = bin(&["ground-state", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trap"));

    // missing section for the command
    let pair = example("hydrogen_shielding.cfg");
    assert_eq!(bin(&["invert-means", pair.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(bin(&["compare", "/nonexistent.cfg"]).status.code(), Some(2));
    assert_eq!(bin(&["compare", pair.to_str().unwrap(), "--tol", "-1"]).status.code(), Some(2));
}

#[test]
fn complementary_moment_frame_is_refused() {
    let cfg = r#"
schema = 1
[system]
masses = [1.0, 1.0]
[potential]
matrix = [[1.0, 0.0], [0.0, 1.0]]
[transforms.fourier]
builder = "symplectic"
matrix = [[0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1]]
[moments]
frame = "fourier"
means = [1.0, 2.0]
"#;
    let f = temp_config(cfg);
    let out = bin(&["invert-means", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("simultaneous sharp values"));
}

#[test]
fn shield_search_hydrogen() {
    let r = json(&["shield-search", example("hydrogen_shielding.cfg").to_str().unwrap(), "--json"]);
    assert_eq!(text(&r, "rank 1", "division"), "CM+R");
    assert!(number(&r, "rank 2", "degradation_rate") > 0.0);
}

#[test]
fn unknown_command_is_rejected() {
    let out = bin(&["frobnicate", example("coupled_pair.cfg").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
