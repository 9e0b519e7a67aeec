use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = r#"
name = "small"
radio_range = 10.0
horizon = 60.0
seed = 2

[nodes]
generator = "uniform"
count = 30
region = { min = [0.0, 0.0], max = [60.0, 60.0] }

[stimulus]
kind = "isotropic"
source = [0.0, 0.0]
r0 = 2.0
speed = 1.0

[strategy]
kind = "pas"
"#;

fn pas_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pas-sim")).args(args).output().expect("binary runs")
}

fn scenario(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("scenario.toml");
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_two_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = pas_sim(&["run", s(&path), "-o", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let nodes = fs::read_to_string(out.join("nodes.csv")).unwrap();
    assert_eq!(nodes.lines().count(), 31);
    assert!(nodes.starts_with("node_id,x,y,first_arrival_s,detection_s,delay_s,"));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    assert!(summary.lines().nth(1).unwrap().starts_with("small,pas,10,10,"));
    assert!(!out.join("trace.tsv").exists());
}

#[test]
fn trace_flag_writes_trace_and_reruns_match() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert!(pas_sim(&["run", s(&path), "-o", s(out), "--trace"]).status.success());
    }
    for name in ["nodes.csv", "summary.csv", "trace.tsv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let trace = fs::read_to_string(a.join("trace.tsv")).unwrap();
    assert!(trace.lines().last().unwrap().contains("\tHorizon\t"));
}

#[test]
fn missing_stimulus_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("[stimulus]\nkind = \"isotropic\"\nsource = [0.0, 0.0]\nr0 = 2.0\nspeed = 1.0\n", "");
    let path = scenario(dir.path(), &text);
    let o = pas_sim(&["run", s(&path), "-o", s(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("stimulus"), "{}", stderr(&o));
}

#[test]
fn unknown_field_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), &SMALL.replace("radio_range", "radio_rnage"));
    let o = pas_sim(&["run", s(&path), "-o", s(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("radio_rnage") && err.contains("line 3"), "{err}");
}

#[test]
fn config_error_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), &SMALL.replace("radio_range = 10.0", "radio_range = -1.0"));
    let o = pas_sim(&["run", s(&path), "-o", s(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), SMALL);
    // a regular file where the output directory should go
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "").unwrap();
    let o = pas_sim(&["run", s(&path), "-o", s(&blocker.join("out"))]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn sweep_writes_rows_and_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), SMALL);
    let out = dir.path().join("sweep");
    let o =
        pas_sim(&["sweep", s(&path), "--param", "max_sleep", "--values", "2,4,6,8,10", "--reps", "5", "-o", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(rows.lines().count(), 26);
    assert_eq!(
        rows.lines().next().unwrap(),
        "scenario,strategy,alert_threshold_s,max_sleep_s,avg_delay_s,avg_energy_j"
    );
    assert!(rows.lines().nth(1).unwrap().starts_with("small#rep0,pas,10,2,"));
    let agg = fs::read_to_string(out.join("aggregate.csv")).unwrap();
    assert_eq!(agg.lines().count(), 6);

    let again = dir.path().join("again");
    pas_sim(&["sweep", s(&path), "--param", "max_sleep", "--values", "2,4,6,8,10", "--reps", "5", "-o", s(&again)]);
    assert_eq!(fs::read(out.join("summary.csv")).unwrap(), fs::read(again.join("summary.csv")).unwrap());
}

#[test]
fn sweep_section_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}\n[sweep]\nparam = \"alert_threshold\"\nvalues = [10.0, 20.0, 30.0]\n");
    let path = scenario(dir.path(), &text);
    let out = dir.path().join("sweep");
    let o = pas_sim(&["sweep", s(&path), "-o", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out.join("summary.csv")).unwrap().lines().count(), 16);
    assert_eq!(fs::read_to_string(out.join("aggregate.csv")).unwrap().lines().count(), 4);
}

#[test]
fn unknown_sweep_param_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), SMALL);
    let o = pas_sim(&["sweep", s(&path), "--param", "radio_range", "--values", "1,2", "-o", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("radio_range"));
}

#[test]
fn unsorted_values_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), SMALL);
    let o = pas_sim(&["sweep", s(&path), "--param", "max_sleep", "--values", "4,2", "-o", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
}
