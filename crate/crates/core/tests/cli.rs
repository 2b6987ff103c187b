use std::path::Path;
use std::process::{Command, Output};

use dirconf::calibration::PiecewiseLinearMap;
use dirconf::data::load_examples;
use dirconf::methods::read_log;
use dirconf::metrics::{accuracy_f1, mean_stderr};
use dirconf::table::{parse_f64, Table};

const SMALL: &str = r#"
[data.synthetic]
per_class = [60, 40]
dim = 5

[train]
hidden = [12]
epochs = 4

[method]
test_samples = 8
ensemble_size = 2
"#;

fn dirconf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirconf"))
        .args(args)
        .output()
        .unwrap()
}

fn setup(dir: &Path, extra: &str) -> String {
    let cfg = dir.join("config.in.toml");
    std::fs::write(&cfg, format!("{SMALL}{extra}")).unwrap();
    cfg.display().to_string()
}

fn run_ok(cmd: &str, cfg: &str, out: &Path, extra: &[&str]) {
    let out_s = out.display().to_string();
    let mut args = vec![cmd, "--config", cfg, "--out", &out_s, "--quiet"];
    args.extend_from_slice(extra);
    let o = dirconf(&args);
    assert!(
        o.status.success(),
        "{cmd}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

const FLAGS: [&str; 4] = [
    "--seeds",
    "1,2",
    "--methods",
    "evidential,l2,mcdp,bbb,ensemble",
];

#[test]
fn generate_is_deterministic_and_respects_fractions() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(tmp.path(), "");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_ok("generate", &cfg, &a, &[]);
    run_ok("generate", &cfg, &b, &[]);
    for part in ["train", "val", "test", "train_augmented"] {
        let name = format!("data/{part}.txt");
        assert_eq!(
            std::fs::read(a.join(&name)).unwrap(),
            std::fs::read(b.join(&name)).unwrap()
        );
    }
    let sizes: Vec<usize> = ["train", "val", "test"]
        .iter()
        .map(|p| {
            load_examples(&a.join(format!("data/{p}.txt")))
                .unwrap()
                .len()
        })
        .collect();
    assert_eq!(sizes, vec![60, 20, 20]);
    let aug = load_examples(&a.join("data/train_augmented.txt")).unwrap();
    // 24 positives doubled, negatives resampled to match.
    assert_eq!(aug.class_counts(), vec![48, 48]);
    assert!(std::fs::read_to_string(a.join("data/val.txt"))
        .unwrap()
        .starts_with("# config-hash: "));
}

#[test]
fn invalid_fraction_exits_nonzero_naming_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(tmp.path(), "\n[split]\ntrain = 0.9\n");
    let o = dirconf(&[
        "generate",
        "--config",
        &cfg,
        "--out",
        &tmp.path().join("x").display().to_string(),
    ]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("split.train"), "{err}");
}

#[test]
fn missing_logs_fail_with_diagnostic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(tmp.path(), "");
    let o = dirconf(&[
        "evaluate",
        "--config",
        &cfg,
        "--out",
        &tmp.path().join("none").display().to_string(),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("val.tsv"));
}

#[test]
fn unknown_method_is_rejected() {
    let o = dirconf(&["train", "--methods", "svm"]);
    assert!(!o.status.success());
}

#[test]
fn full_pipeline_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(tmp.path(), "");
    let out = tmp.path().join("run");
    for cmd in [
        "generate",
        "train",
        "predict",
        "calibrate",
        "evaluate",
        "reject",
    ] {
        run_ok(cmd, &cfg, &out, &FLAGS);
    }
    let test = load_examples(&out.join("data/test.txt")).unwrap();
    let log = read_log(&out.join("predictions/test.tsv")).unwrap();
    assert_eq!(log.len(), test.len() * 5 * 2);

    // Every written file carries the provenance header.
    let hash = std::fs::read_to_string(out.join("config.toml"))
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    for rel in [
        "predictions/val.tsv",
        "predictions/test.tsv",
        "predictions/test_calibrated.tsv",
        "reports/metrics.tsv",
        "reports/reliability.tsv",
        "reports/reject.tsv",
        "calibration/evidential_seed1.pwlm",
        "checkpoints/bbb_seed2.ckpt",
    ] {
        let text = std::fs::read_to_string(out.join(rel)).unwrap();
        assert_eq!(text.lines().next().unwrap(), hash, "{rel}");
    }
    PiecewiseLinearMap::load(&out.join("calibration/l2_seed2.pwlm")).unwrap();

    let metrics = Table::read(&out.join("reports/metrics.tsv")).unwrap();
    let col = |name: &str| {
        metrics
            .column(name)
            .unwrap_or_else(|| panic!("missing column {name}"))
    };
    for name in [
        "ece_raw", "ece_pwlm", "nce_raw", "nce_pwlm", "auroc", "auprc", "acc", "f1",
    ] {
        col(name);
    }
    for row in &metrics.rows {
        assert_eq!(row[col("auroc")], row[col("auroc_pwlm")]);
        assert_eq!(row[col("auprc")], row[col("auprc_pwlm")]);
    }
    for method in ["evidential", "l2", "mcdp", "bbb", "ensemble"] {
        let mine: Vec<&Vec<String>> = metrics.rows.iter().filter(|r| r[0] == method).collect();
        assert_eq!(mine.len(), 4);
        for name in ["acc", "ece_raw", "ece_pwlm", "f1"] {
            let c = col(name);
            let per_seed: Vec<Option<f64>> = mine[..2].iter().map(|r| parse_f64(&r[c])).collect();
            let mean = parse_f64(&mine[2][c]).unwrap();
            let manual = per_seed.iter().flatten().sum::<f64>() / 2.0;
            assert!((mean - manual).abs() <= 1e-12);
            assert_eq!(mean_stderr(&per_seed).1, parse_f64(&mine[3][c]));
            assert_eq!(mine[2][1], "mean");
            assert_eq!(mine[3][1], "stderr");
        }
    }

    // At threshold 0.5 on a binary task nothing is rejected.
    let reject = Table::read(&out.join("reports/reject.tsv")).unwrap();
    for r in reject
        .rows
        .iter()
        .filter(|r| r[2] == "raw" && r[3] == "0.5" && r[1] != "mean")
    {
        let seed: u64 = r[1].parse().unwrap();
        let subset: Vec<_> = log
            .iter()
            .filter(|x| x.method == r[0] && x.seed == seed)
            .cloned()
            .collect();
        let (acc, f1) = accuracy_f1(&subset).unwrap();
        assert_eq!(r[4], "1.0");
        assert_eq!(parse_f64(&r[7]), Some(acc));
        assert_eq!(parse_f64(&r[6]), Some(f1));
    }

    // Rerunning a stage leaves its outputs byte-identical.
    let before = std::fs::read(out.join("reports/metrics.tsv")).unwrap();
    let preds = std::fs::read(out.join("predictions/test.tsv")).unwrap();
    run_ok("predict", &cfg, &out, &FLAGS);
    run_ok("evaluate", &cfg, &out, &FLAGS);
    assert_eq!(
        preds,
        std::fs::read(out.join("predictions/test.tsv")).unwrap()
    );
    assert_eq!(
        before,
        std::fs::read(out.join("reports/metrics.tsv")).unwrap()
    );
}

#[test]
fn dimension_mismatch_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(tmp.path(), "");
    let out = tmp.path().join("run");
    let flags = ["--seeds", "1", "--methods", "l2"];
    run_ok("generate", &cfg, &out, &flags);
    run_ok("train", &cfg, &out, &flags);
    let wider = setup(tmp.path(), "");
    std::fs::write(&wider, SMALL.replace("dim = 5", "dim = 7")).unwrap();
    run_ok("generate", &wider, &out, &flags);
    let o = dirconf(&[
        "predict",
        "--config",
        &wider,
        "--out",
        &out.display().to_string(),
        "--seeds",
        "1",
        "--methods",
        "l2",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension"));
}
