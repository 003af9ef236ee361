use std::path::PathBuf;
use std::process::{Command, Output};

fn foxcolor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foxcolor")).args(args).env_remove("FOXCOLOR_CAP").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("foxcolor-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn twelve_twists() -> String {
    ["1"; 12].join(" ")
}

#[test]
fn determinant_of_trefoil() {
    let o = foxcolor(&["det", "--braid", "1 1 1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "3");
}

#[test]
fn counts_and_minimum_colors() {
    assert_eq!(stdout(&foxcolor(&["color-count", "--braid", "1 1 1", "--mod", "3"])).trim(), "9");
    assert_eq!(stdout(&foxcolor(&["color-count", "--braid", "1 1 1", "--mod", "5"])).trim(), "5");
    let o = foxcolor(&["enumerate", "--braid", "1 1 1", "--mod", "3"]);
    assert_eq!(stdout(&o).lines().count(), 6);
    assert_eq!(stdout(&foxcolor(&["mincol", "--braid", &twelve_twists(), "--mod", "9"])).trim(), "3");
    let o = foxcolor(&["mincol", "--braid", "1 1 1", "--mod", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bridge_coloring_uses_every_color() {
    let o = foxcolor(&["snf", "5/2", "--color", "0", "1", "--mod", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("palette size 5"), "{out}");
    let colors = out.lines().find_map(|l| l.strip_prefix("coloring ")).unwrap();
    let mut used: Vec<u64> = colors.split(' ').map(|c| c.parse().unwrap()).collect();
    used.sort();
    used.dedup();
    assert_eq!(used, vec![0, 1, 2, 3, 4]);
}

#[test]
fn inconsistent_bridges_are_a_usage_error() {
    let o = foxcolor(&["snf", "4/1", "--color", "0", "1", "--mod", "8"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn spectrum_runs() {
    let o = foxcolor(&["spectrum", "--snf", "7/2"]);
    assert_eq!(o.status.code(), Some(0));
    let sizes = stdout(&o).lines().next().unwrap().to_string();
    assert!(sizes.starts_with("sizes") && sizes.ends_with('7'), "{sizes}");

    let o = foxcolor(&["spectrum", "--braid", "1 -2 1 -2", "--mod", "5"]);
    let first = stdout(&o).lines().next().unwrap().to_string();
    let sizes: Vec<usize> = first.split(' ').skip(1).map(|s| s.parse().unwrap()).collect();
    assert_eq!(*sizes.last().unwrap(), 5);
    assert!(sizes.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1));
    assert!(sizes[0] < 5);
}

#[test]
fn obstruction_exits_with_failure() {
    let o = foxcolor(&["spectrum", "--braid", &twelve_twists(), "--mod", "9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("obstructed"));
}

#[test]
fn suites_report_and_set_status() {
    let o = foxcolor(&["suite", "n-eq-2d-2", "--pmax", "31"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("n-eq-2d-2: 307 cases, 307 passed, 0 failed, 0 recorded\n"));
    let o = foxcolor(&["suite", "mod9-obstruction"]);
    assert_eq!(o.status.code(), Some(0));
    // T(4,4) and T(6,6) have determinant 0, not 2kl
    let o = foxcolor(&["suite", "torus-determinant", "--kmax", "2", "--lmax", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("FAIL torus 3 2 2 determinant: determinant Some(0)"));
    let o = foxcolor(&["suite", "no-such-suite"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn suite_output_is_deterministic() {
    let a = foxcolor(&["suite", "torus-histogram"]);
    let b = foxcolor(&["suite", "torus-histogram"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(foxcolor(&["bogus"]).status.code(), Some(1));
    assert_eq!(foxcolor(&["det"]).status.code(), Some(1));
    assert_eq!(foxcolor(&["det", "--braid", "0"]).status.code(), Some(1));
    assert_eq!(foxcolor(&["det", "--braid", "1", "--snf", "3/1"]).status.code(), Some(1));
    assert_eq!(foxcolor(&["--help"]).status.code(), Some(0));
    assert_eq!(foxcolor(&["--version"]).status.code(), Some(0));
}

#[test]
fn enumeration_cap_from_environment_and_flag() {
    let run = |extra: &[&str]| {
        let mut args = vec!["enumerate", "--braid", "1 1 1", "--mod", "3"];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_foxcolor")).args(&args).env("FOXCOLOR_CAP", "5").output().unwrap()
    };
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["--cap", "100"]).status.code(), Some(0));
}

#[test]
fn diagram_files_round_trip() {
    let printed = stdout(&foxcolor(&["parse", "--braid", "1 1 1"]));
    assert!(printed.contains("3 arcs, 3 crossings, 1 components, 5 faces"), "{printed}");
    let path = scratch("trefoil.txt");
    std::fs::write(&path, &printed).unwrap();
    let again = stdout(&foxcolor(&["parse", "--file", path.to_str().unwrap()]));
    assert_eq!(again, printed);
    assert_eq!(stdout(&foxcolor(&["det", "--file", path.to_str().unwrap()])).trim(), "3");

    let triples = scratch("triples.txt");
    std::fs::write(&triples, "C 1 0 2\nC 2 1 0\nC 0 2 1\n").unwrap();
    assert_eq!(stdout(&foxcolor(&["det", "--file", triples.to_str().unwrap()])).trim(), "3");

    let bad = scratch("bad.txt");
    std::fs::write(&bad, "arcs=3 components=1\nC 9 0 1\n").unwrap();
    assert_eq!(foxcolor(&["parse", "--file", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(foxcolor(&["parse", "--file", "/nonexistent/diagram"]).status.code(), Some(1));
}

#[test]
fn json_reports() {
    let path = scratch("palette.json");
    let o = foxcolor(&["palette", "--braid", "1 1 1", "--mod", "3", "--colors", "0 1 2", "--json", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["size"], 3);
    assert_eq!(v["histogram"]["0"], 1);

    let path = scratch("snf.json");
    foxcolor(&["snf", "5/2", "--color", "0", "1", "--json", path.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["coloring"]["modulus"], 5);
    assert_eq!(v["coloring"]["colors"].as_object().unwrap().len(), 8);

    let coloring = scratch("coloring.json");
    std::fs::write(&coloring, v["coloring"].to_string()).unwrap();
    let o = foxcolor(&["kh", "--snf", "5/2", "--mod", "5", "--coloring", coloring.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "false");

    let path = scratch("trace.json");
    foxcolor(&["spectrum", "--braid", "1 -2 1 -2", "--mod", "5", "--json", path.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let records = v.as_array().unwrap();
    assert_eq!(records.last().unwrap()["palette_size"], 5);
    assert!(records[0]["crossings"].is_u64());
}

#[test]
fn colorings_are_checked() {
    let o = foxcolor(&["kh", "--braid", "1 1 1", "--mod", "3", "--colors", "0 1 2"]);
    assert_eq!(stdout(&o).trim(), "true");
    let o = foxcolor(&["palette", "--braid", "1 1 1", "--mod", "3", "--colors", "0 1 1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = foxcolor(&["palette", "--braid", "1 1 1", "--mod", "3", "--colors", "0 1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn torus_and_full_palette_search() {
    let out = stdout(&foxcolor(&["torus", "2", "2", "1"]));
    assert!(out.contains("histogram 0:1 1:1 2:2 3:2 4:2"), "{out}");
    let out = stdout(&foxcolor(&["torus", "3", "1", "2"]));
    assert!(out.contains("determinant 4"), "{out}");
    let o = foxcolor(&["search-full", "--torus", "3 1 2", "--mod", "4"]);
    assert!(stdout(&o).starts_with("found"));
    let o = foxcolor(&["search-full", "--braid", "1 1 1", "--mod", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("not found"));
}
