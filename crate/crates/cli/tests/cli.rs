use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_profile-gan"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn assert_ok(out: &Output) {
    assert_eq!(code(out), 0, "stderr: {}", stderr(out));
}

/// A synthetic store of the given built-in families over two years.
fn synth_store(dir: &TempDir, families: &str) -> PathBuf {
    let store = dir.path().join("store");
    let out = run(&[
        "synth-data",
        "--families",
        families,
        "--years",
        "2018,2019",
        "--seed",
        "3",
        "--out",
        s(&store),
    ]);
    assert_ok(&out);
    store
}

fn train_untrained(dir: &TempDir, store: &Path, mode: &str) -> PathBuf {
    let models = dir.path().join(format!("models_{mode}"));
    let out = run(&[
        "train",
        "--store",
        s(store),
        "--mode",
        mode,
        "--epochs",
        "0",
        "--out",
        s(&models),
    ]);
    assert_ok(&out);
    models
}

fn write_targets(dir: &TempDir, rows: &[&str]) -> PathBuf {
    let path = dir.path().join("targets.csv");
    let mut text = String::from("site_id,type,target_year,annual_energy_mwh,capacity_mw\n");
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    fs::write(&path, text).unwrap();
    path
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn synth_data_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = synth_store(&dir, "solar,wind");
    let b = dir.path().join("again");
    assert_ok(&run(&[
        "synth-data",
        "--families",
        "solar,wind",
        "--years",
        "2018,2019",
        "--seed",
        "3",
        "--out",
        s(&b),
    ]));
    assert_eq!(
        fs::read(a.join("data.csv")).unwrap(),
        fs::read(b.join("data.csv")).unwrap()
    );
    assert_eq!(
        fs::read(a.join("meta.csv")).unwrap(),
        fs::read(b.join("meta.csv")).unwrap()
    );
}

#[test]
fn ingest_round_trip_and_refusals() {
    let dir = TempDir::new().unwrap();
    let store = synth_store(&dir, "solar,wind");
    let data = store.join("data.csv");
    let meta = store.join("meta.csv");
    let target = dir.path().join("ingested");

    let out = run(&[
        "ingest",
        "--data",
        s(&data),
        "--meta",
        s(&meta),
        "--out",
        s(&target),
    ]);
    assert_ok(&out);
    // one summary line per site-year
    assert_eq!(stdout(&out).lines().count(), 4);
    assert_eq!(
        fs::read(&data).unwrap(),
        fs::read(target.join("data.csv")).unwrap()
    );

    let again = run(&[
        "ingest",
        "--data",
        s(&data),
        "--meta",
        s(&meta),
        "--out",
        s(&target),
    ]);
    assert_eq!(code(&again), 1);
    assert!(stderr(&again).contains("--force"));
    assert_ok(&run(&[
        "ingest",
        "--data",
        s(&data),
        "--meta",
        s(&meta),
        "--out",
        s(&target),
        "--force",
    ]));

    let missing = dir.path().join("nope").join("meta.csv");
    let out = run(&[
        "ingest",
        "--data",
        s(&data),
        "--meta",
        s(&missing),
        "--out",
        s(&dir.path().join("x")),
    ]);
    assert_ne!(code(&out), 0);
    assert!(stderr(&out).contains(s(&missing)), "{}", stderr(&out));
}

#[test]
fn ingest_rejects_gaps_with_data_error() {
    let dir = TempDir::new().unwrap();
    let store = synth_store(&dir, "wind");
    let text = fs::read_to_string(store.join("data.csv")).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.remove(100);
    let gappy = dir.path().join("gappy.csv");
    fs::write(&gappy, lines.join("\n") + "\n").unwrap();
    let out = run(&[
        "ingest",
        "--data",
        s(&gappy),
        "--meta",
        s(&store.join("meta.csv")),
        "--out",
        s(&dir.path().join("x")),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("missing hour"), "{}", stderr(&out));
}

#[test]
fn train_modes_and_type_filter() {
    let dir = TempDir::new().unwrap();
    let store = synth_store(&dir, "solar,wind");

    let only_wind = dir.path().join("wind_only");
    let out = run(&[
        "train",
        "--store",
        s(&store),
        "--type",
        "wind",
        "--epochs",
        "2",
        "--out",
        s(&only_wind),
    ]);
    assert_ok(&out);
    assert!(only_wind.join("model_wind.json").exists());
    assert!(!only_wind.join("model_solar.json").exists());
    let history = fs::read_to_string(only_wind.join("loss_history_wind.csv")).unwrap();
    assert_eq!(history.lines().count(), 3);
    assert!(stdout(&out).contains("wind: epoch 1"));

    let untrained = train_untrained(&dir, &store, "single");
    let checkpoint = fs::read_to_string(untrained.join("model_solar.json")).unwrap();
    assert!(checkpoint.contains("\"schema_version\""));
    assert!(checkpoint.contains("\"loss_history\": []"));

    let bad = run(&[
        "train",
        "--store",
        s(&store),
        "--mode",
        "sideways",
        "--out",
        s(&dir.path().join("b")),
    ]);
    assert_eq!(code(&bad), 1);
}

#[test]
fn multi_mode_needs_two_types() {
    let dir = TempDir::new().unwrap();
    let store = synth_store(&dir, "wind");
    let out = run(&[
        "train",
        "--store",
        s(&store),
        "--mode",
        "multi",
        "--out",
        s(&dir.path().join("m")),
    ]);
    assert_eq!(code(&out), 1);
    assert!(
        stderr(&out).contains("multi-type requires ≥ 2 types"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn generate_is_deterministic_and_reports_partial_failure() {
    let dir = TempDir::new().unwrap();
    let store = synth_store(&dir, "solar,wind");
    let models = train_untrained(&dir, &store, "single");
    let targets = write_targets(
        &dir,
        &[
            "s1,solar,2030,150000,100",
            "w1,wind,2030,300000,100",
            "w2,wind,2031,900000,100",
        ],
    );
    let (solar, wind) = (
        models.join("model_solar.json"),
        models.join("model_wind.json"),
    );
    let generate = |out: &Path, extra: &[&str]| {
        let mut args = vec![
            "generate",
            "--model",
            s(&solar),
            "--model",
            s(&wind),
            "--targets",
            s(&targets),
            "--seed",
            "17",
            "--out",
            s(out),
        ];
        args.extend_from_slice(extra);
        run(&args)
    };

    let a = dir.path().join("a");
    let out = generate(&a, &[]);
    // w2 exceeds capacity x hours; the others are still written
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(stderr(&out).contains("w2 2031"));
    assert!(a.join("s1_2030.csv").exists() && a.join("w1_2030.csv").exists());
    assert!(!a.join("w2_2031.csv").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("generate_manifest.json")).unwrap())
            .unwrap();
    let entries = manifest["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    assert!(entries[2]["error"].is_string());
    assert!(entries.iter().all(|e| e["seed"].is_u64()));

    let csv = fs::read_to_string(a.join("w1_2030.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("timestamp,power_mw"));
    assert_eq!(
        lines.next().unwrap().split(',').next(),
        Some("2030-01-01T00:00")
    );
    assert_eq!(csv.lines().count(), 8761);
    assert!(csv.lines().skip(1).all(|l| l
        .split(',')
        .nth(1)
        .unwrap()
        .split('.')
        .nth(1)
        .unwrap()
        .len()
        == 3));

    let b = dir.path().join("b");
    assert_eq!(code(&generate(&b, &[])), 4);
    assert_eq!(read_dir_bytes(&a), read_dir_bytes(&b));

    let zero = dir.path().join("zero");
    assert_eq!(code(&generate(&zero, &["--for", "0"])), 4);
    assert_eq!(read_dir_bytes(&a), read_dir_bytes(&zero));

    let outages = dir.path().join("outages");
    assert_eq!(
        code(&generate(&outages, &["--for", "0.1", "--mttr", "12"])),
        4
    );
    assert_ne!(read_dir_bytes(&a), read_dir_bytes(&outages));

    assert_eq!(code(&generate(&a, &[])), 1, "existing outputs need --force");
    assert_eq!(code(&generate(&dir.path().join("c"), &["--for", "1.5"])), 1);
}

#[test]
fn compare_emits_three_rows_per_site() {
    let dir = TempDir::new().unwrap();
    let store = synth_store(&dir, "solar,wind");
    let models = train_untrained(&dir, &store, "single");
    let targets = write_targets(
        &dir,
        &[
            "s1,solar,2030,150000,100",
            "s1,solar,2031,150000,100",
            "w1,wind,2030,300000,100",
        ],
    );
    let generated = dir.path().join("gen");
    assert_ok(&run(&[
        "generate",
        "--model",
        s(&models.join("model_solar.json")),
        "--model",
        s(&models.join("model_wind.json")),
        "--targets",
        s(&targets),
        "--out",
        s(&generated),
    ]));

    let report = dir.path().join("report");
    let out = run(&[
        "compare",
        "--generated",
        s(&generated),
        "--store",
        s(&store),
        "--out",
        s(&report),
    ]);
    assert_ok(&out);
    let csv = fs::read_to_string(report.join("compare.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 1 + 6);
    assert!(rows.iter().all(|r| r.len() == rows[0].len()));
    assert_eq!(&rows[0][..2], ["site_id", "method"]);
    let methods: Vec<&str> = rows[1..4].iter().map(|r| r[1]).collect();
    assert_eq!(methods, ["gan", "average_profile", "random_sampling"]);
    assert!(report.join("compare.json").exists());

    let metrics = dir.path().join("metrics");
    let out = run(&[
        "evaluate",
        "--generated",
        s(&generated),
        "--store",
        s(&store),
        "--site",
        "w1",
        "--out",
        s(&metrics),
    ]);
    assert_ok(&out);
    assert_eq!(
        fs::read_to_string(metrics.join("metrics.csv"))
            .unwrap()
            .lines()
            .count(),
        2
    );
}

#[test]
fn self_evaluation_has_zero_distances() {
    let dir = TempDir::new().unwrap();
    let store = synth_store(&dir, "wind");
    let out_dir = dir.path().join("self");
    assert_ok(&run(&[
        "evaluate",
        "--generated",
        s(&store),
        "--store",
        s(&store),
        "--out",
        s(&out_dir),
    ]));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("metrics.json")).unwrap()).unwrap();
    let report = &doc["sites"][0]["methods"][0]["report"];
    for key in [
        "magnitude_error",
        "hourly_profile_rmse",
        "acf_rmse",
        "ramp_w1",
        "memorization_nn_distance",
    ] {
        assert_eq!(report[key].as_f64(), Some(0.0), "{key}");
    }
    assert!(report["value_distribution_w1"]
        .as_array()
        .unwrap()
        .iter()
        .all(|v| v.as_f64() == Some(0.0)));
}

#[test]
fn evaluate_error_paths() {
    let dir = TempDir::new().unwrap();
    let store = synth_store(&dir, "wind");
    let out = run(&[
        "evaluate",
        "--generated",
        s(&dir.path().join("missing")),
        "--store",
        s(&store),
        "--out",
        s(&dir.path().join("r")),
    ]);
    assert_ne!(code(&out), 0);

    // a solar store scored against wind-only history
    let other = TempDir::new().unwrap();
    let solar = synth_store(&other, "solar");
    let out = run(&[
        "evaluate",
        "--generated",
        s(&solar),
        "--store",
        s(&store),
        "--out",
        s(&dir.path().join("r")),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["train"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "seed = 1\nbogus = 2\n").unwrap();
    assert_eq!(
        code(&run(&[
            "--config",
            s(&cfg),
            "synth-data",
            "--out",
            s(&dir.path().join("o"))
        ])),
        1
    );
}

#[test]
fn config_file_drives_a_run() {
    let dir = TempDir::new().unwrap();
    let store = synth_store(&dir, "wind");
    let out_dir = dir.path().join("from_config");
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        format!(
            "seed = 5\nout = {:?}\n\n[data]\nstore = {:?}\n\n[gan]\nepochs = 1\nlatent_dim = 4\ngenerator_hidden = [8]\ndiscriminator_hidden = [8]\n",
            out_dir, store
        ),
    )
    .unwrap();
    assert_ok(&run(&["--config", s(&cfg), "train"]));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("train_manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["gan"]["latent_dim"], 4);

    // flags override the file
    let over = dir.path().join("override");
    assert_ok(&run(&[
        "--config",
        s(&cfg),
        "train",
        "--seed",
        "6",
        "--out",
        s(&over),
    ]));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(over.join("train_manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 6);
}
