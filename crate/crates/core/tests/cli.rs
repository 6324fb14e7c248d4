use std::path::PathBuf;

use hurwitz::algebra::Field;
use hurwitz::cli::dispatch;
use hurwitz::tree::HurwitzTree;
use hurwitz::Q;

const A: &str = "p=5; F=(-2*X+t^10)/((-2)*X^5*(X-t^10)^2*(X-t^5)^5)";

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("hurwitz").chain(args.iter().copied());
    let code = dispatch(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let (code, out, err) = run(&full);
    assert!(code <= 1, "{args:?}: exit {code}: {err}");
    serde_json::from_str(&out).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("hurwitz-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn documented_examples() {
    assert_eq!(run(&["genus", "--p", "5", "--type", "2,3"]), (0, "6\n".into(), String::new()));
    let (code, out, _) = run(&["form", "exists", "--p", "5", "--type", "3,2"]);
    assert_eq!(code, 1);
    assert!(out.starts_with("false\n") && out.contains("residue"), "{out}");
    let (code, out, _) = run(&["moduli", "connected", "--p", "5", "--g", "14"]);
    assert_eq!((code, out.as_str()), (0, "true\n"));
}

#[test]
fn exit_codes() {
    let (code, out, err) = run(&["bogus"]);
    assert_eq!(code, 2);
    assert!(out.is_empty() && !err.is_empty());
    assert_eq!(run(&["genus", "--p", "5"]).0, 2);
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["genus", "--p", "4", "--type", "2,3"]).0, 1);
    assert_eq!(run(&["moduli", "connected", "--p", "5", "--g", "12"]).0, 1);
    assert_eq!(run(&["form", "chain", "--p", "5", "--h", "5", "--target", "3,2"]).0, 1);
    assert_eq!(run(&["form", "chain", "--p", "5", "--h", "12", "--target", "5,4,3"]).0, 0);
}

#[test]
fn json_is_versioned_and_deterministic() {
    let a = run(&["--json", "moduli", "graph", "--p", "5", "--g", "14"]);
    let b = run(&["--json", "moduli", "graph", "--p", "5", "--g", "14"]);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a.1).unwrap();
    assert_eq!(v["schema"], "hurwitz.moduli-graph/1");
    assert_eq!(v["edges"].as_array().unwrap().len(), 6);
    let w = json(&["form", "exists", "--p", "5", "--type", "3,2,2,2"]);
    assert_eq!(w["exists"], true);
    assert_eq!(w["witness"]["form"], "1/(x^3*(x-1)^2*(x^2+x+1)^2)");
    let s = json(&["swan", "--cover", A, "--place", "s=10"]);
    assert_eq!((s["kind"].as_str(), s["delta"].as_str()), (Some("radical"), Some("17")));
    assert_eq!(s["boundary_swan"][0]["swan"], -6);
}

#[test]
fn dot_export_of_genus_fourteen() {
    let (code, out, _) = run(&["moduli", "graph", "--p", "5", "--g", "14", "--format", "dot"]);
    assert_eq!(code, 0);
    assert_eq!(out.matches("->").count(), 6);
    assert!(out.starts_with("digraph"));
}

#[test]
fn tree_json_round_trip() {
    let cover = scratch("a.txt", A);
    let tree = json(&["tree", "from-cover", "--file", cover.to_str().unwrap()]);
    let tree_file = scratch("a.json", &tree.to_string());
    let (code, out, _) = run(&["tree", "validate", "--file", tree_file.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    let parsed = HurwitzTree::from_json_str(&tree.to_string()).unwrap();
    assert_eq!(HurwitzTree::from_json_str(&parsed.to_json().to_string()).unwrap(), parsed);
    let realized = json(&["tree", "realize", "--file", tree_file.to_str().unwrap()]);
    assert!(realized["cover"].as_str().is_some_and(|c| c.starts_with("p=5;")), "{realized}");
    for f in [cover, tree_file] {
        std::fs::remove_file(f).unwrap();
    }
}

#[test]
fn single_vertex_tree_has_no_vertices() {
    let t = HurwitzTree::trivial(Field::prime(5).unwrap(), Q::from_integer(0), 6);
    let j = t.to_json();
    assert_eq!(j["vertices"], serde_json::json!([]));
    assert_eq!(j["leaves"].as_array().unwrap().len(), 1);
    assert_eq!(HurwitzTree::from_json_str(&j.to_string()).unwrap(), t);
}
