//! The subcommands. Each reads the files the previous stage wrote under the
//! output directory, so any stage can be rerun on its own.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use crate::calibration::{fit_pwlm, PiecewiseLinearMap};
use crate::data::{
    balance_augment, generate_synthetic, load_examples, save_examples, split, Dataset,
};
use crate::error::{Error, Result};
use crate::methods::{
    load_checkpoint, log_header, log_row, read_log, save_checkpoint, train_method, write_log,
    MethodKind, PredictionRecord,
};
use crate::metrics::{
    compute_report, mean_stderr, metrics_table, push_reject_rows, reject_sweep, reject_table,
    reliability_rows, reliability_table, EceConfig, EvaluationRow, RejectPoint,
};
use crate::numeric::SeededStream;
use crate::par;
use crate::table::{fmt_f64, fmt_opt, Table};

const AUGMENT_STREAM: u64 = 0x4155_474D;

/// A validated configuration plus its provenance header.
pub struct Context {
    pub config: ExperimentConfig,
    pub quiet: bool,
    comments: Vec<String>,
}

impl Context {
    pub fn new(config: ExperimentConfig, quiet: bool) -> Result<Self> {
        config.validate()?;
        let comments = vec![format!("config-hash: {}", config.hash()?)];
        Ok(Self {
            config,
            quiet,
            comments,
        })
    }

    pub fn out(&self) -> &Path {
        &self.config.out
    }

    pub fn comments(&self) -> &[String] {
        &self.comments
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }

    fn dir(&self, name: &str) -> Result<PathBuf> {
        let d = self.out().join(name);
        std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        Ok(d)
    }

    pub fn data_path(&self, part: &str) -> PathBuf {
        self.out().join("data").join(format!("{part}.txt"))
    }

    pub fn checkpoint_path(&self, method: MethodKind, seed: u64) -> PathBuf {
        self.out()
            .join("checkpoints")
            .join(format!("{method}_seed{seed}.ckpt"))
    }

    pub fn log_path(&self, part: &str) -> PathBuf {
        self.out().join("predictions").join(format!("{part}.tsv"))
    }

    pub fn report_path(&self, name: &str) -> PathBuf {
        self.out().join("reports").join(name)
    }

    fn jobs(&self) -> Vec<(MethodKind, u64)> {
        let c = &self.config;
        c.methods
            .iter()
            .flat_map(|&m| c.seeds.iter().map(move |&s| (m, s)))
            .collect()
    }

    fn write_resolved_config(&self) -> Result<()> {
        std::fs::create_dir_all(self.out()).map_err(|e| Error::io(self.out(), e))?;
        let path = self.out().join("config.toml");
        let text = format!("# {}\n{}", self.comments[0], self.config.to_toml()?);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    fn augmenting(&self) -> bool {
        let a = &self.config.augment;
        a.per_positive_sample() > 0 || a.balance
    }
}

/// Splits the source data and writes `train`, `val`, `test` and, when
/// augmentation is configured, `train_augmented`.
pub fn cmd_generate(ctx: &Context) -> Result<()> {
    let cfg = &ctx.config;
    let full = match &cfg.data.path {
        Some(p) => load_examples(p)?,
        None => generate_synthetic(&cfg.data.synthetic)?,
    };
    full.validate()?;
    let (train, val, test) = split(&full.examples, &cfg.split)?;
    ctx.write_resolved_config()?;
    ctx.dir("data")?;
    let mut parts = vec![
        ("train", full.with_examples(train.clone())),
        ("val", full.with_examples(val)),
        ("test", full.with_examples(test)),
    ];
    if ctx.augmenting() {
        if cfg.augment.positive_class >= full.num_classes {
            return Err(Error::config(
                "augment.positive_class",
                "outside the label range",
            ));
        }
        let totals = cfg.augment.class_totals(&train, full.num_classes);
        let rng = SeededStream::new(cfg.split.seed, AUGMENT_STREAM);
        let augmented = balance_augment(&train, &totals, cfg.augment.min_len, &rng)?;
        parts.push(("train_augmented", full.with_examples(augmented)));
    }
    for (name, ds) in &parts {
        save_examples(ds, &ctx.data_path(name), ctx.comments())?;
        let counts: Vec<String> = ds.class_counts().iter().map(usize::to_string).collect();
        ctx.say(format!(
            "{name}: {} examples, per class [{}]",
            ds.len(),
            counts.join(", ")
        ));
    }
    Ok(())
}

fn load_part(ctx: &Context, part: &str) -> Result<Dataset> {
    let ds = load_examples(&ctx.data_path(part))?;
    if ds.is_empty() {
        return Err(Error::contract(format!("{part} set is empty")));
    }
    Ok(ds)
}

/// Trains every (method, seed) job and writes one checkpoint per job.
pub fn cmd_train(ctx: &Context) -> Result<()> {
    let train_part = if ctx.augmenting() {
        "train_augmented"
    } else {
        "train"
    };
    let train = load_part(ctx, train_part)?;
    let val = load_part(ctx, "val")?;
    ctx.dir("checkpoints")?;
    let jobs = ctx.jobs();
    let results = par::map(&jobs, |&(method, seed)| -> Result<String> {
        let model = train_method(
            &train,
            &val,
            &ctx.config.job(method, seed),
            &ctx.config.train,
        )?;
        save_checkpoint(&model, &ctx.checkpoint_path(method, seed), ctx.comments())?;
        let epochs: Vec<usize> = model.histories.iter().map(|h| h.selected_epoch).collect();
        Ok(format!(
            "trained {method} seed {seed} (selected epochs {epochs:?})"
        ))
    });
    for r in results {
        ctx.say(r?);
    }
    Ok(())
}

/// Writes `predictions/val.tsv` and `predictions/test.tsv` covering every job.
pub fn cmd_predict(ctx: &Context) -> Result<()> {
    let val = load_part(ctx, "val")?;
    let test = load_part(ctx, "test")?;
    ctx.dir("predictions")?;
    let mut val_records = Vec::new();
    let mut test_records = Vec::new();
    for (method, seed) in ctx.jobs() {
        let model = load_checkpoint(&ctx.checkpoint_path(method, seed))?;
        if model.kind() != method || model.seed() != seed {
            return Err(Error::contract(format!(
                "checkpoint for {method} seed {seed} holds another job"
            )));
        }
        if model.input_dim != test.dim || model.num_classes != test.num_classes {
            return Err(Error::contract(format!(
                "{method} seed {seed} expects dimension {} with {} classes; data has {} and {}",
                model.input_dim, model.num_classes, test.dim, test.num_classes
            )));
        }
        val_records.extend(model.predict_all(&val.examples)?);
        test_records.extend(model.predict_all(&test.examples)?);
    }
    write_log(&ctx.log_path("val"), &val_records, ctx.comments())?;
    write_log(&ctx.log_path("test"), &test_records, ctx.comments())?;
    ctx.say(format!(
        "wrote {} validation and {} test predictions",
        val_records.len(),
        test_records.len()
    ));
    Ok(())
}

type Group = ((String, u64), Vec<PredictionRecord>);

/// Splits records by (method, seed) in order of first appearance.
pub fn group_records(records: Vec<PredictionRecord>) -> Vec<Group> {
    let mut groups: Vec<Group> = Vec::new();
    let mut index: BTreeMap<(String, u64), usize> = BTreeMap::new();
    for r in records {
        let key = (r.method.clone(), r.seed);
        let i = *index.entry(key.clone()).or_insert_with(|| {
            groups.push((key, Vec::new()));
            groups.len() - 1
        });
        groups[i].1.push(r);
    }
    groups
}

/// Test groups paired with the map fitted on the matching validation group.
fn calibrated_groups(ctx: &Context) -> Result<Vec<(Group, PiecewiseLinearMap)>> {
    let val = group_records(read_log(&ctx.log_path("val"))?);
    let test = group_records(read_log(&ctx.log_path("test"))?);
    let val: BTreeMap<_, _> = val.into_iter().collect();
    test.into_iter()
        .map(|(key, records)| {
            let fit_on = val.get(&key).ok_or_else(|| {
                Error::contract(format!(
                    "no validation predictions for {} seed {}",
                    key.0, key.1
                ))
            })?;
            let map = fit_pwlm(fit_on, ctx.config.eval.pwlm_bins)?;
            Ok(((key, records), map))
        })
        .collect()
}

/// Fits one map per job on validation predictions and applies it to test.
pub fn cmd_calibrate(ctx: &Context) -> Result<()> {
    let groups = calibrated_groups(ctx)?;
    let dir = ctx.dir("calibration")?;
    let k = groups.first().map_or(2, |g| g.0 .1[0].num_classes());
    let mut header = log_header(k);
    header.push("calibrated".into());
    let mut table = Table::new(header).with_comments(ctx.comments());
    for ((key, records), map) in &groups {
        map.save(
            &dir.join(format!("{}_seed{}.pwlm", key.0, key.1)),
            ctx.comments(),
        )?;
        for r in records {
            let mut row = log_row(r);
            row.push(fmt_f64(map.apply(r.confidence)));
            table.push(row);
        }
    }
    table.write(&ctx.log_path("test_calibrated"))?;
    ctx.say(format!("fitted {} calibration maps", groups.len()));
    Ok(())
}

/// Metrics with and without calibration, per job and aggregated over seeds,
/// plus reliability-diagram points.
pub fn cmd_evaluate(ctx: &Context) -> Result<Vec<EvaluationRow>> {
    let groups = calibrated_groups(ctx)?;
    let ece_cfg = EceConfig {
        num_bins: ctx.config.eval.ece_bins,
    };
    let mut rows = Vec::with_capacity(groups.len());
    let mut reliability = reliability_table(ctx.comments());
    for ((key, records), map) in &groups {
        let calibrated = map.apply_records(records);
        rows.push(EvaluationRow {
            raw: compute_report(records, &ece_cfg, &key.0, key.1)?,
            calibrated: compute_report(&calibrated, &ece_cfg, &key.0, key.1)?,
        });
        reliability_rows(
            &mut reliability,
            records,
            ece_cfg.num_bins,
            &key.0,
            key.1,
            "raw",
        )?;
        reliability_rows(
            &mut reliability,
            &calibrated,
            ece_cfg.num_bins,
            &key.0,
            key.1,
            "pwlm",
        )?;
    }
    ctx.dir("reports")?;
    let table = metrics_table(&rows, ctx.comments());
    table.write(&ctx.report_path("metrics.tsv"))?;
    reliability.write(&ctx.report_path("reliability.tsv"))?;
    if !ctx.quiet {
        let cols = [
            "method", "acc", "f1", "ece_raw", "ece_pwlm", "nce_raw", "nce_pwlm", "auroc", "auprc",
        ];
        println!("{}", cols.join("\t"));
        for row in table.rows.iter().filter(|r| r[1] == "mean") {
            let cells: Vec<String> = cols
                .iter()
                .map(|c| {
                    let v = &row[table.column(c).unwrap()];
                    v.parse::<f64>()
                        .map_or_else(|_| v.clone(), |x| format!("{x:.4}"))
                })
                .collect();
            println!("{}", cells.join("\t"));
        }
    }
    Ok(rows)
}

/// Coverage, accuracy and F1 above each confidence threshold, on raw and on
/// calibrated test confidences.
pub fn cmd_reject(ctx: &Context) -> Result<Vec<(String, u64, Vec<RejectPoint>)>> {
    let groups = calibrated_groups(ctx)?;
    let thresholds = &ctx.config.eval.thresholds;
    let mut table = reject_table(ctx.comments());
    let mut calibrated_points = Vec::new();
    let mut per_method: Vec<(String, &str, Vec<Vec<RejectPoint>>)> = Vec::new();
    for ((key, records), map) in &groups {
        for (stage, recs) in [
            ("raw", records.clone()),
            ("pwlm", map.apply_records(records)),
        ] {
            let points = reject_sweep(&recs, thresholds);
            push_reject_rows(&mut table, &points, &key.0, &key.1.to_string(), stage);
            match per_method
                .iter_mut()
                .find(|(m, s, _)| *m == key.0 && *s == stage)
            {
                Some(entry) => entry.2.push(points.clone()),
                None => per_method.push((key.0.clone(), stage, vec![points.clone()])),
            }
            if stage == "pwlm" {
                calibrated_points.push((key.0.clone(), key.1, points));
            }
        }
    }
    for (method, stage, sweeps) in &per_method {
        for (t, &threshold) in thresholds.iter().enumerate() {
            let column = |f: fn(&RejectPoint) -> Option<f64>| {
                mean_stderr(&sweeps.iter().map(|s| f(&s[t])).collect::<Vec<_>>()).0
            };
            table.push(vec![
                method.clone(),
                "mean".into(),
                stage.to_string(),
                fmt_f64(threshold),
                fmt_opt(column(|p| Some(p.coverage))),
                fmt_opt(column(|p| Some(p.retained as f64))),
                fmt_opt(column(|p| p.f1)),
                fmt_opt(column(|p| p.accuracy)),
            ]);
        }
    }
    ctx.dir("reports")?;
    table.write(&ctx.report_path("reject.tsv"))?;
    if !ctx.quiet {
        println!("method\tstage\tthreshold\tcoverage\tf1\tacc");
        for row in table.rows.iter().filter(|r| r[1] == "mean") {
            println!(
                "{}\t{}\t{}\t{}\t{}\t{}",
                row[0], row[2], row[3], row[4], row[6], row[7]
            );
        }
    }
    Ok(calibrated_points)
}

/// Every stage in order.
pub fn cmd_run(ctx: &Context) -> Result<()> {
    cmd_generate(ctx)?;
    cmd_train(ctx)?;
    cmd_predict(ctx)?;
    cmd_calibrate(ctx)?;
    cmd_evaluate(ctx)?;
    cmd_reject(ctx)?;
    Ok(())
}
