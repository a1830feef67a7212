use std::path::{Path, PathBuf};
use std::process::Command;

use flatrep::presentation::parse_presentation;
use flatrep::{MultiForm, Universe};
use flatrep_cli::{run, solved_defect, EXIT_FAILED, EXIT_NOT_CONVERGED, EXIT_PARSE, EXIT_USAGE};
use serde_json::Value;
use tempfile::TempDir;

const Z2: &str = "gens: a b;\nrels: a b a^-1 b^-1;\n";
const KLEIN: &str = "super(zn(2), 2, klein, betti=[1, 1], loops=[b], group=klein)";

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn flatrep(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("flatrep").chain(args.iter().copied()), &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn parse_echoes_normal_form() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "z2.pres", Z2);
    let r = flatrep(&["parse", s(&f)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let again = parse_presentation(r.stdout.trim()).unwrap();
    assert_eq!(again, parse_presentation(Z2).unwrap());
    let g = write(&dir, "again.pres", &r.stdout);
    assert_eq!(flatrep(&["parse", s(&g)]).stdout, r.stdout);
}

#[test]
fn parse_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.pres", "gens: a;\nrels: a c;\n");
    let r = flatrep(&["parse", s(&f)]);
    assert_eq!(r.code, EXIT_PARSE);
    assert!(r.stderr.contains("undeclared generator `c`"), "{}", r.stderr);
    assert_eq!(flatrep(&["detect", "run", "--group", "zn(", "--family", "char_zn(1, 4)"]).code, EXIT_PARSE);
    assert_eq!(flatrep(&["family", "build", "--family", "char_zn(1, 4"]).code, EXIT_PARSE);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(flatrep(&[]).code, EXIT_USAGE);
    assert_eq!(flatrep(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(flatrep(&["forms", "poincare", "--grid", "1"]).code, EXIT_USAGE);
    assert_eq!(flatrep(&["rep", "solve", "x.pres", "--dim", "2", "--tol", "-1"]).code, EXIT_USAGE);
    assert_eq!(flatrep(&["family", "build"]).code, EXIT_USAGE);
    assert_eq!(flatrep(&["report", "obstruction", "--f", "1", "--index", "3"]).code, EXIT_USAGE);
    assert_eq!(flatrep(&["--help"]).code, 0);
}

#[test]
fn zero_iterations_do_not_converge() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "z2.pres", Z2);
    let out = dir.path().join("solve.json");
    let r = flatrep(&["rep", "solve", s(&f), "--dim", "2", "--max-iter", "0", "--seed", "7", "--out", s(&out)]);
    assert_eq!(r.code, EXIT_NOT_CONVERGED, "{}", r.stderr);
    let v = json(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(v["converged"], false);
    assert_eq!(v["iterations"], 0);
}

#[test]
fn solve_output_is_a_representation() {
    let dir = TempDir::new().unwrap();
    let klein = "gens: a b; rels: b a b^-1 a;";
    let f = write(&dir, "klein.pres", klein);
    let r = flatrep(&["rep", "solve", s(&f), "--dim", "2", "--seed", "4", "--tol", "1e-10"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r.stdout);
    assert_eq!(v["converged"], true);
    let defect = solved_defect(klein, &r.stdout).unwrap();
    assert!(defect <= 1e-9, "{defect}");
    assert_eq!(flatrep(&["rep", "solve", s(&f), "--dim", "2", "--seed", "4", "--tol", "1e-10"]).stdout, r.stdout);
}

#[test]
fn detect_certifies_zn() {
    let dir = TempDir::new().unwrap();
    let fam = write(&dir, "chi.fam", "char_zn(2, 8)\n");
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let r = flatrep(&["detect", "run", "--group", "zn(2)", "--families", s(&fam), "--out", s(out)]);
        assert_eq!(r.code, 0, "{}", r.stderr);
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let v = json(std::str::from_utf8(&ta).unwrap());
    assert_eq!(v["verdict"]["kind"], "fd_certified");
    assert_eq!(v["method"]["kind"], "exact");
    assert_eq!(v["rows"][3]["label"], "[e1 e2]");
    assert_eq!(v["rows"][3]["entries"][3], "-1");
    assert!(v["sign_conventions"]["slant"].as_str().unwrap().contains("right contraction"));

    let table = flatrep(&["report", "render", s(&a)]);
    assert_eq!(table.code, 0);
    assert!(table.stdout.contains("verdict: FD-certified"), "{}", table.stdout);
    assert!(table.stdout.contains("[e1 e2]"));
}

#[test]
fn detect_reports_undetected_classes() {
    let r = flatrep(&["detect", "run", "--group", "surface(1)", "--family", "trivial(surface(1), 2, torus(2, 4))"]);
    assert_eq!(r.code, EXIT_FAILED);
    let v = json(&r.stdout);
    assert_eq!(v["verdict"]["kind"], "undetected");
    assert_eq!(v["verdict"]["classes"].as_array().unwrap().len(), 3);
}

#[test]
fn detect_falls_back_to_numeric_pairing() {
    let r = flatrep(&[
        "detect",
        "run",
        "--group",
        KLEIN,
        "--family",
        "induce(char_zn(2, 8), cover=klein)",
        "--grid",
        "32",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r.stdout);
    assert_eq!(v["method"]["kind"], "numeric");
    assert_eq!(v["method"]["resolution"], 32);
    assert_eq!(v["rows"][1]["label"], "<b>");
    assert_eq!(v["rows"][1]["entries"][2], "-1");
}

#[test]
fn cover_paths_resolve_next_to_family_files() {
    let dir = TempDir::new().unwrap();
    write(
        &dir,
        "k.cover",
        "gens: a b; rels: b a b^-1 a;\naction a: [[1,0],[0,1]] + [0,1];\naction b: [[1,0],[0,-1]] + [1/2,0];\n\
         subgroup: a, b^2;\ncosets: e, b;\n",
    );
    let fam = write(&dir, "ind.fam", "induce(char_zn(2, 8), cover=\"k.cover\")");
    let r = flatrep(&["family", "build", "--families", s(&fam), "--verify"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r.stdout);
    assert_eq!(v[0]["family"]["ranks"][0], 2);
    assert!(v[0]["family"]["chern"].is_null());
    assert!(v[0]["verification"]["max_defect"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn obstruction_marks_reports() {
    let r = flatrep(&[
        "detect",
        "run",
        "--group",
        "free(2)",
        "--family",
        "union(extend(char_zn(1, 8), free(2), at=[g1]), extend(char_zn(1, 8), free(2), at=[g2]))",
        "--bm",
        "2:10",
    ]);
    assert_eq!(r.code, EXIT_FAILED);
    assert_eq!(json(&r.stdout)["verdict"]["kind"], "obstructed");
    let o = flatrep(&["report", "obstruction", "--f", "2", "--index", "10"]);
    assert_eq!(o.code, 0);
    let v = json(&o.stdout);
    assert_eq!((v["g"].as_u64(), v["h2_lower_bound"].as_u64(), v["excluded"].as_bool()), (Some(11), Some(7), Some(true)));
}

#[test]
fn betti_and_forms_reports() {
    let b = flatrep(&["report", "betti", "--m", "2", "--n", "2"]);
    assert_eq!(b.code, 0);
    let v = json(&b.stdout);
    assert_eq!((v["lhs"].as_u64(), v["rhs"].as_u64(), v["holds"].as_bool()), (Some(16), Some(3), Some(true)));

    let c = flatrep(&["forms", "chern", "--family", "tensor(char_zn(1, 8), char_zn(1, 8))"]);
    assert_eq!(c.code, 0, "{}", c.stderr);
    let v = json(&c.stdout);
    let text = v[0]["components"][0]["text"].as_str().unwrap();
    let expect = MultiForm::parse("(1 + z1 x1)(1 + z2 x2)", Universe::new(2, 2)).unwrap();
    assert_eq!(MultiForm::parse(text, Universe::new(2, 2)).unwrap(), expect);
    let no_data = flatrep(&["forms", "chern", "--family", "induce(char_zn(2, 8), cover=klein)"]);
    assert_eq!(no_data.code, EXIT_FAILED);

    let p = flatrep(&["forms", "poincare", "--grid", "16"]);
    assert_eq!(p.code, 0);
    let v = json(&p.stdout);
    assert_eq!(v["chern_number"], -1);
    assert!(v["max_deviation"].as_f64().unwrap() < 1e-9);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_flatrep");
    let st = Command::new(bin).args(["report", "betti", "--m", "1", "--n", "1"]).output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&st.stdout).contains("\"holds\": true"));
    let st = Command::new(bin).args(["report", "betti", "--m", "x"]).output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_USAGE));
}
