use std::path::Path;
use std::process::{Command, Output};

const SMALL: &[&str] = &["--train-len", "400", "--test-len", "150", "--washout", "30", "--horizon", "5", "--n-r", "24"];

fn deepesn(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deepesn"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn with_small<'a>(args: &[&'a str]) -> Vec<&'a str> {
    let mut v = args.to_vec();
    v.extend_from_slice(SMALL);
    v
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn run_is_deterministic_and_tabular() {
    let dir = tempfile::tempdir().unwrap();
    let a = deepesn(&with_small(&["run", "--runs", "2", "--seed", "5"]), dir.path());
    let b = deepesn(&with_small(&["run", "--runs", "2", "--seed", "5"]), dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("topology,n_l,n_r,ip,rmse_e3,nrmse_e3,mape_e3"));
    assert!(lines.next().unwrap().starts_with("wide:3,3,24,false,"));
    assert_eq!(lines.next(), None);
}

#[test]
fn output_file_and_text_format() {
    let dir = tempfile::tempdir().unwrap();
    let o = deepesn(&with_small(&["run", "--runs", "1", "--ip", "--format", "text", "--output", "r.json"]), dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
    assert!(text.trim_start().starts_with('['));
    assert!(text.contains("\"per_run\""));
    assert!(text.contains("\"ip\": true"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "topology = \"layered:2\"\nn_r = 16\nruns = 1\ntrain_len = 300\ntest_len = 100\nwashout = 20\nhorizon = 3\n",
    )
    .unwrap();
    let o = deepesn(&["run", "--config", "c.toml", "--topology", "wide+layered:2x2"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("wide+layered:2x2,4,16,false,"));
}

#[test]
fn sweep_covers_topologies_with_and_without_ip() {
    let dir = tempfile::tempdir().unwrap();
    let o = deepesn(
        &with_small(&["sweep", "--runs", "1", "--set", "sweep.topologies=wide:2,layered:2", "--set", "ip.epochs=1"]),
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<String> = stdout(&o).lines().skip(1).map(|l| l.split(',').take(4).collect::<Vec<_>>().join(",")).collect();
    assert_eq!(rows, ["wide:2,2,24,false", "wide:2,2,24,true", "layered:2,2,24,false", "layered:2,2,24,true"]);
}

#[test]
fn generate_data_writes_series() {
    let dir = tempfile::tempdir().unwrap();
    let o = deepesn(&["generate-data", "--samples", "50", "--column", "x", "--output", "mg.csv"], dir.path());
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("mg.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 51);
    assert_eq!(lines[0], "x");
    assert!(lines[1..].iter().all(|l| l.parse::<f64>().unwrap() > 0.0));

    // a generated file is accepted as a CSV dataset
    let run = deepesn(
        &["run", "--csv", "mg.csv", "--column", "x", "--train-len", "30", "--test-len", "15", "--washout", "5", "--horizon", "1", "--n-r", "8", "--runs", "1"],
        dir.path(),
    );
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
}

#[test]
fn evolve_writes_log_and_usable_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = deepesn(
        &[
            "evolve", "--train-len", "400", "--test-len", "100", "--washout", "30", "--horizon", "5",
            "--set", "ga.population=5", "--set", "ga.generations=3", "--set", "ga.n_r=8,16",
            "--set", "ga.max_width=2", "--set", "ga.max_depth=2", "--set", "ga.fitness_seeds=1",
            "--set", "ip.epochs=1", "--output", "ga.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let log = std::fs::read_to_string(dir.path().join("ga.csv")).unwrap();
    let lines: Vec<&str> = log.lines().collect();
    assert_eq!(lines[0], "generation,best_fitness,mean_fitness,best_genome");
    assert_eq!(lines.len(), 4);
    let best: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(best.windows(2).all(|w| w[1] <= w[0]));
    let run = deepesn(&["run", "--config", "ga.toml", "--runs", "1"], dir.path());
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| deepesn(args, dir.path()).status.code().unwrap();
    assert_eq!(code(&["run", "--s-in", "1.5"]), 2);
    assert_eq!(code(&["run", "--set", "nonsense=1"]), 2);
    assert_eq!(code(&["run", "--topology", "ring:3"]), 2);
    assert_eq!(code(&["run", "--config", "missing.toml"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["run", "--csv", "missing.csv"]), 3);
    std::fs::write(dir.path().join("short.csv"), "value\n1\n2\n3\n").unwrap();
    assert_eq!(code(&["run", "--csv", "short.csv"]), 3);
    // the identity term alone exceeds the requested radius
    assert_eq!(code(&["run", "--alpha", "0.3", "--rho-hat", "0.5", "--n-r", "8", "--runs", "1"]), 4);
    assert_eq!(code(&["generate-data", "--samples", "3"]), 0);
}
