use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_qwitness");

fn qwitness(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

const DIMER: &str = r#"
temperatures = { from = 0.1, to = 2.0, steps = 39 }
witnesses = ["concurrence", "susceptibility"]
formats = ["csv", "json", "svg"]

[model]
kind = "HeisenbergChain"
n_sites = 2
"#;

#[test]
fn dimer_sweep_crosses_at_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), DIMER);
    let out = dir.path().join("out");
    let o = qwitness(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let step = 1.9 / 38.0;
    let t_star = 1.0 / 3f64.ln();
    for name in ["concurrence.csv", "susceptibility.csv"] {
        let rows = csv_rows(&out.join(name));
        assert_eq!(rows.len(), 39);
        let last_certified = rows
            .iter()
            .filter(|r| &r[5] == "certified")
            .map(|r| r[0].parse::<f64>().unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        let first_not = rows
            .iter()
            .filter(|r| &r[5] != "certified")
            .map(|r| r[0].parse::<f64>().unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(last_certified < t_star && first_not > t_star, "{name}");
        assert!(first_not - last_certified <= step + 1e-12);
        // every row carries the run digest
        let digest = &rows[0][8];
        assert_eq!(digest.len(), 64);
        assert!(rows.iter().all(|r| &r[8] == digest));
    }
    for f in [
        "summary.jsonl",
        "provenance.json",
        "concurrence.svg",
        "susceptibility.svg",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
temperatures = [0.2, 0.7, 1.5]
witnesses = ["concurrence", "discord", "tangle", "qfi", "nqfi", "coherence"]
filter = "skew-0.3"
formats = ["csv", "json", "svg"]

[model]
kind = "AlternatingChain"
n_sites = 6
alpha = 0.5
boundary = "Periodic"
"#,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let o = qwitness(&[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 10);
    for name in names {
        let x = fs::read(a.join(&name)).unwrap();
        let y = fs::read(b.join(&name)).unwrap();
        if name == "provenance.json" {
            // differs only in the recorded output directory
            let strip = |v: &[u8]| {
                let mut j: serde_json::Value = serde_json::from_slice(v).unwrap();
                j["config"]["out"] = serde_json::Value::Null;
                j
            };
            assert_eq!(strip(&x), strip(&y));
        } else {
            assert_eq!(x, y, "{name:?}");
        }
    }
}

#[test]
fn empty_witness_list_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &DIMER.replace(r#"["concurrence", "susceptibility"]"#, "[]"));
    let out = dir.path().join("out");
    let o = qwitness(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("witness list is empty"));
    assert!(!out.exists());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "temperatures = [1.0]\nwitnesses = [\"qfi\"]\n");
    let o = qwitness(&["qfi", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = qwitness(&["sweep", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = write_config(dir.path(), &format!("{DIMER}\n"));
    let o = qwitness(&["sweep", "--config", cfg.to_str().unwrap(), "--format", "csv,pdf"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn nqfi_decreases_with_temperature() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
temperatures = [0.1, 0.2, 0.4, 0.8, 1.6, 3.2]
k = [3.141592653589793]
witnesses = ["nqfi"]
formats = ["csv", "svg"]

[model]
kind = "HeisenbergChain"
n_sites = 8
boundary = "Periodic"
"#,
    );
    let out = dir.path().join("out");
    let o = qwitness(&["qfi", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let values: Vec<f64> = csv_rows(&out.join("nqfi.csv"))
        .iter()
        .map(|r| r[3].parse().unwrap())
        .collect();
    assert_eq!(values.len(), 6);
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
    assert!(out.join("nqfi-depth.svg").is_file());
    assert!(!out.join("summary.jsonl").exists());
}

#[test]
fn simulate_then_ingest_matches_direct_route() {
    let dir = tempfile::tempdir().unwrap();
    let model = r#"
[model]
kind = "HeisenbergChain"
n_sites = 6
boundary = "Periodic"
"#;
    let sim_cfg = write_config(
        dir.path(),
        &format!("temperatures = [0.5]\nbins = 400\nformats = [\"csv\"]\n{model}"),
    );
    let sim = dir.path().join("sim");
    let o = qwitness(&[
        "simulate",
        "--config",
        sim_cfg.to_str().unwrap(),
        "--out",
        sim.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(sim.join("thermal.csv").is_file());

    let qfi_cfg = dir.path().join("qfi.toml");
    fs::write(
        &qfi_cfg,
        format!("temperatures = [0.5]\nwitnesses = [\"qfi\"]\n{model}"),
    )
    .unwrap();
    let direct = dir.path().join("direct");
    let o = qwitness(&[
        "qfi",
        "--config",
        qfi_cfg.to_str().unwrap(),
        "--out",
        direct.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let exact: Vec<f64> = csv_rows(&direct.join("qfi.csv"))
        .iter()
        .map(|r| r[3].parse().unwrap())
        .collect();

    let ing_cfg = dir.path().join("ingest.toml");
    fs::write(
        &ing_cfg,
        format!(
            "formats = [\"csv\", \"json\"]\n[ingest]\nfile = \"{}\"\n",
            sim.join("spectrum-000.csv").display()
        ),
    )
    .unwrap();
    let ing = dir.path().join("ing");
    let o = qwitness(&[
        "ingest-qfi",
        "--config",
        ing_cfg.to_str().unwrap(),
        "--out",
        ing.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&ing.join("ingest-qfi.csv"));
    assert_eq!(rows.len(), exact.len());
    let mut depth_by_fq: Vec<(f64, usize)> = Vec::new();
    for (r, want) in rows.iter().zip(&exact) {
        let f: f64 = r[2].parse().unwrap();
        let err: f64 = r[6].parse().unwrap();
        assert!((f - want).abs() <= err, "{f} vs {want} +- {err}");
        depth_by_fq.push((f, r[4].parse().unwrap()));
    }
    depth_by_fq.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert!(depth_by_fq.windows(2).all(|w| w[1].1 >= w[0].1));
}

#[test]
fn temperature_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let spectrum = dir.path().join("s.csv");
    fs::write(
        &spectrum,
        "# weights=1,1,1\nchi,1.0,0.5,1,4\nk,3.14159\n-1.5,-0.2\n-0.5,-0.1\n0.5,0.1\n1.5,0.2\n",
    )
    .unwrap();
    let cfg = write_config(
        dir.path(),
        "formats = [\"csv\", \"json\"]\n[ingest]\nfile = \"s.csv\"\ntemperature_override = 0.25\n",
    );
    let out = dir.path().join("out");
    let o = qwitness(&[
        "ingest-qfi",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let prov: serde_json::Value = serde_json::from_slice(&fs::read(out.join("provenance.json")).unwrap()).unwrap();
    let warnings = prov["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("override")));
    assert_eq!(prov["inputs"].as_array().unwrap().len(), 1);
    let rows = csv_rows(&out.join("ingest-qfi.csv"));
    assert_eq!(&rows[0][1], "0.25");
}

#[test]
fn malformed_spectrum_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.csv"), "chi,1.0,0.5,1,2\nk,0\n0.5,abc\n").unwrap();
    let cfg = write_config(dir.path(), "[ingest]\nfile = \"s.csv\"\n");
    let o = qwitness(&[
        "ingest-qfi",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn report_rebuilds_from_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), DIMER);
    let out = dir.path().join("out");
    assert!(qwitness(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap()
    ])
    .status
    .success());
    fs::remove_file(out.join("concurrence.svg")).unwrap();
    let o = qwitness(&["report", "--out", out.to_str().unwrap(), "--format", "svg"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("concurrence.svg").is_file());
    let text = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(text.starts_with("concurrence"));
    assert!(text.contains("susceptibility"));
}
