use std::path::Path;
use std::process::{Command, Output};

use heate_core::experiment::CSV_HEADER;
use heate_core::fixtures;

fn heate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heate")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn fig3_run_switches_off_the_direct_link() {
    let dir = tempfile::tempdir().unwrap();
    let demands = write(dir.path(), "fig3.tm", fixtures::FIG3_DEMANDS);
    let cert = dir.path().join("cert.json");
    let out = heate(&[
        "run",
        "--topology",
        "fig3",
        "--demands",
        &demands,
        "--iterations",
        "2",
        "--certificate",
        cert.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("links off          (A,B)"), "{text}");
    assert!(text.contains("energy saving      0.25"), "{text}");

    let check = heate(&[
        "validate",
        "--topology",
        "fig3",
        "--demands",
        &demands,
        "--certificate",
        cert.to_str().unwrap(),
        "--regime",
        "ecmp",
        "--constraints",
        "2,3,4,5,11",
    ]);
    assert!(check.status.success(), "{}", stdout(&check));
    assert!(stdout(&check).contains("no violations"));
}

#[test]
fn generated_matrix_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let tm = dir.path().join("geant.tm");
    let gen = heate(&["gen-tm", "--topology", "geant", "--seed", "3", "--out", tm.to_str().unwrap()]);
    assert!(gen.status.success());
    let again = heate(&["gen-tm", "--topology", "geant", "--seed", "3"]);
    assert_eq!(std::fs::read_to_string(&tm).unwrap(), stdout(&again));
    assert!(stdout(&again).lines().filter(|l| !l.starts_with('#')).all(|l| l.starts_with("demand ")));
}

#[test]
fn sweep_writes_parseable_rows() {
    let out = heate(&[
        "sweep",
        "--topology",
        "fig3",
        "--algorithm",
        "all",
        "--sdn-count",
        "0-1",
        "--matrices",
        "2",
        "--iterations",
        "10",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3 * 2 * 2);
    for row in &rows {
        assert_eq!(row.len(), CSV_HEADER.split(',').count());
        assert!(["heate", "ea-ospf", "ea-fa"].contains(&&row[0]), "{row:?}");
        assert_eq!(&row[9], "");
    }
    assert!(text.contains("# summary"));
}

#[test]
fn overloaded_instance_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let topo = write(dir.path(), "tiny.topo", "node a ip\nnode b ip\nlink a b 1\n");
    let demands = write(dir.path(), "tiny.tm", "demand a b 0.9\n");
    let out = heate(&["run", "--topology", &topo, "--demands", &demands, "--iterations", "5"]);
    assert_eq!(out.status.code(), Some(1));
    let oracle = heate(&["oracle", "--topology", &topo, "--demands", &demands]);
    assert_eq!(oracle.status.code(), Some(1));
}

#[test]
fn bad_input_exits_two() {
    assert_eq!(heate(&["run", "--topology", "no-such-file"]).status.code(), Some(2));
    assert_eq!(heate(&["run", "--topology", "fig3", "--beta", "1.5"]).status.code(), Some(2));
    assert_eq!(heate(&["sweep", "--topology", "fig3", "--algorithm", "rip"]).status.code(), Some(2));
    // Geant is far beyond the oracle's size limit.
    assert_eq!(heate(&["oracle", "--topology", "geant"]).status.code(), Some(2));
}

#[test]
fn lp_export_has_every_section() {
    let out = heate(&["export-lp", "--topology", "triangle", "--seed", "1", "--max-weight", "100"]);
    assert!(out.status.success());
    let lp = stdout(&out);
    assert!(lp.starts_with("\\ nodes 3, links 6, beta 0.8, W_max 100"), "{lp}");
    let mut at = 0;
    for section in ["Minimize\n", "Subject To\n", "Bounds\n", "Binary\n", "End\n"] {
        at += lp[at..].find(section).unwrap_or_else(|| panic!("missing {section}"));
    }
    assert!(lp.contains(" 1 <= w_0 <= 100\n"));
}
