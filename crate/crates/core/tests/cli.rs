use std::process::{Command, Output};

fn qvelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qvelab")).args(args).output().expect("run qvelab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SUBCOMMANDS: [&str; 11] = [
    "qve-solve",
    "qve-measure",
    "moments",
    "rate",
    "k-alpha",
    "sample",
    "tilt",
    "spectrum",
    "compare",
    "cutnorm",
    "verify",
];

#[test]
fn every_subcommand_documents_its_output() {
    for cmd in SUBCOMMANDS {
        let o = qvelab(&[cmd, "--help"]);
        assert!(o.status.success(), "{cmd}");
        let help = stdout(&o);
        assert!(help.contains("Output"), "{cmd} --help lacks an output description:\n{help}");
    }
    let help = stdout(&qvelab(&["qve-measure", "--help"]));
    assert!(help.contains("x,density,cdf") && help.contains("boundaries"));
}

#[test]
fn exit_codes() {
    assert_eq!(qvelab(&["bogus"]).status.code(), Some(2));
    assert_eq!(qvelab(&["sample", "--p", "0.1"]).status.code(), Some(2));
    assert_eq!(qvelab(&["sample", "--n", "10", "--p", "1.5"]).status.code(), Some(2));
    assert_eq!(qvelab(&["moments", "--kernel", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(qvelab(&["verify", "--suite", "oracles", "--trials", "2"]).status.code(), Some(0));
}

#[test]
fn sample_spectrum_and_compare_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let triplets = dir.path().join("x.csv");
    let spectrum = dir.path().join("ev.csv");
    let t = triplets.to_str().unwrap();
    let s = spectrum.to_str().unwrap();

    assert!(qvelab(&["sample", "--n", "300", "--p", "0.2", "--seed", "4", "--out", t]).status.success());
    let csv = std::fs::read_to_string(&triplets).unwrap();
    assert!(csv.starts_with("i,j,value\n"));

    assert!(qvelab(&["spectrum", "--n", "300", "--input", t, "--out", s]).status.success());
    let ev = std::fs::read_to_string(&spectrum).unwrap();
    assert_eq!(ev.lines().count(), 301);

    // sampling inside `spectrum` matches sampling then reading the triplets
    let direct = qvelab(&["spectrum", "--n", "300", "--p", "0.2", "--seed", "4"]);
    assert_eq!(stdout(&direct), ev);

    let ks: f64 =
        stdout(&qvelab(&["compare", "--a", s, "--b", "semicircle", "--metric", "ks"])).trim().parse().unwrap();
    assert!(ks < 0.1, "ks = {ks}");
}

#[test]
fn kernel_commands() {
    let dir = tempfile::tempdir().unwrap();
    let k = dir.path().join("w.json");
    std::fs::write(&k, r#"{"boundaries":[1.0],"values":[[1.0]]}"#).unwrap();
    let k = k.to_str().unwrap();

    let moments = stdout(&qvelab(&["moments", "--kernel", k, "--max-order", "6"]));
    assert_eq!(moments, "order,value\n0,1\n1,0\n2,1\n3,0\n4,2\n5,0\n6,5\n");

    let measure = stdout(&qvelab(&["qve-measure", "--kernel", k, "--grid", "-3:3:601:0.001"]));
    assert!(measure.starts_with("x,density,cdf\n"));
    assert_eq!(measure.lines().count(), 602);

    let cut: serde_json::Value = serde_json::from_str(&stdout(&qvelab(&["cutnorm", "--kernel", k]))).unwrap();
    assert_eq!(cut["value"].as_f64(), Some(1.0));
    assert_eq!(cut["exact"].as_bool(), Some(true));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n": 20, "p": 0.5, "seed": 3}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let from_config = stdout(&qvelab(&["sample", "--config", c]));
    let explicit = stdout(&qvelab(&["sample", "--n", "20", "--p", "0.5", "--seed", "3"]));
    assert_eq!(from_config, explicit);
    let overridden = stdout(&qvelab(&["sample", "--config", c, "--seed", "4"]));
    assert_ne!(from_config, overridden);

    std::fs::write(&cfg, r#"{"n": 20, "colour": "blue"}"#).unwrap();
    assert_eq!(qvelab(&["sample", "--config", c]).status.code(), Some(2));
}

#[test]
fn rate_table_and_k_alpha() {
    let table = stdout(&qvelab(&["rate", "--law", "rademacher", "--u", "0:2:3"]));
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "u,h");
    assert_eq!(rows[1], "0,1");
    assert_eq!(rows[2], "1,0");
    let h2: f64 = rows[3].split(',').nth(1).unwrap().parse().unwrap();
    assert!((h2 - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-12);

    let v: serde_json::Value =
        serde_json::from_str(&stdout(&qvelab(&["k-alpha", "--alpha", "1", "--eps", "0.5"]))).unwrap();
    let u = v["k_alpha"].as_f64().unwrap();
    assert!((u.ln() - 1.0 + 1.0 / u - 2.0).abs() < 1e-9);
}
