//! Writing run artifacts. Every file starts with a comment header holding
//! the resolved configuration and its hash, and contains nothing that
//! varies between identical runs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::tasks::{reference_values, ExperimentReport, Readout};
use crate::textfmt::{fmt_f64, NumericDoc};

const CONFIG_BEGIN: &str = "--- config ---";
const CONFIG_END: &str = "--- end config ---";

/// Comment lines (without the `# ` prefix) identifying the run.
fn provenance(cfg: &ExperimentConfig, title: &str) -> Vec<String> {
    let mut lines = vec![
        format!("photonic-ngrc {title}"),
        format!("config_hash = {}", cfg.hash()),
        CONFIG_BEGIN.to_string(),
    ];
    lines.extend(cfg.to_toml().lines().map(str::to_string));
    lines.push(CONFIG_END.to_string());
    lines
}

fn comment_block(cfg: &ExperimentConfig, title: &str) -> String {
    let mut out = String::new();
    for line in provenance(cfg, title) {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            let _ = writeln!(out, "# {line}");
        }
    }
    out
}

/// Recovers the configuration embedded in any artifact written by
/// [`write_artifacts`].
pub fn embedded_config(text: &str) -> Result<ExperimentConfig> {
    let mut inside = false;
    let mut toml = String::new();
    for line in text.lines() {
        let Some(body) = line.strip_prefix('#') else {
            continue;
        };
        let body = body.strip_prefix(' ').unwrap_or(body);
        match (inside, body) {
            (false, CONFIG_BEGIN) => inside = true,
            (true, CONFIG_END) => return ExperimentConfig::from_toml(&toml),
            (true, _) => {
                toml.push_str(body);
                toml.push('\n');
            }
            _ => {}
        }
    }
    Err(Error::Config("no embedded configuration found".into()))
}

/// True when `text` carries an embedded configuration block.
pub fn has_embedded_config(text: &str) -> bool {
    text.lines().any(|l| l == format!("# {CONFIG_BEGIN}"))
}

fn opt(doc: &mut NumericDoc, key: &str, v: Option<f64>) {
    if let Some(v) = v {
        doc.push_f64(key, v);
    }
}

/// Flat key-value metrics, including the reference figures for the task.
pub fn metrics_doc(report: &ExperimentReport) -> NumericDoc {
    let cfg = &report.config;
    let m = &report.metrics;
    let mut doc = NumericDoc {
        comments: provenance(cfg, "metrics"),
        ..NumericDoc::default()
    };
    doc.push("task", cfg.task.name());
    doc.push("features", format!("{:?}", cfg.readout.features).to_lowercase());
    doc.push("config_hash", cfg.hash());
    match cfg.noise.snr_db {
        Some(s) => doc.push_f64("snr_db", s),
        None => doc.push("snr_db", "none"),
    }
    if let Some(chip) = &report.chip {
        doc.push("chip_effective_seed", chip.effective_seed());
    }
    if let Some(s) = report.narma_seed_used {
        doc.push("narma_seed_used", s);
    }
    doc.push("train_rows", m.train_rows);
    doc.push("test_rows", m.test_rows);
    doc.push("feature_columns", m.feature_columns);
    doc.push("clipped_train", m.clipped_train);
    doc.push("clipped_test", m.clipped_test);
    opt(&mut doc, "lambda", m.lambda);
    for (lambda, sse) in &m.lambda_scores {
        doc.push(&format!("validation_sse[{}]", fmt_f64(*lambda)), fmt_f64(*sse));
    }
    opt(&mut doc, "train_nmse", m.train_nmse);
    opt(&mut doc, "test_nmse", m.test_nmse);
    opt(&mut doc, "train_accuracy", m.train_accuracy);
    opt(&mut doc, "accuracy", m.accuracy);
    opt(&mut doc, "auc", m.auc);
    if let Some(c) = &m.confusion {
        doc.push("true_negative", c.true_negative);
        doc.push("false_positive", c.false_positive);
        doc.push("false_negative", c.false_negative);
        doc.push("true_positive", c.true_positive);
    }
    if let Readout::Logistic(model) = &report.readout {
        doc.push("iterations", model.iterations);
        doc.push("converged", model.converged);
        doc.push_f64("final_grad_norm", model.final_grad_norm);
    }
    for (key, value) in reference_values(cfg.task) {
        doc.push_f64(key, *value);
    }
    doc
}

/// Human-readable summary.
pub fn render_report(report: &ExperimentReport) -> String {
    let cfg = &report.config;
    let m = &report.metrics;
    let mut out = comment_block(cfg, "experiment report");
    let _ = writeln!(out, "task: {}", cfg.task.name());
    let _ = writeln!(out, "features: {}", format!("{:?}", cfg.readout.features).to_lowercase());
    if let Some(chip) = &report.chip {
        let _ = writeln!(
            out,
            "chip: n = {}, m = {}, {} coupler, seed {} (effective {})",
            chip.n(),
            chip.m(),
            chip.kind(),
            chip.seed(),
            chip.effective_seed()
        );
    }
    let _ = writeln!(out, "rows: {} train, {} test", m.train_rows, m.test_rows);
    let _ = writeln!(out, "clipped inputs: {} train, {} test", m.clipped_train, m.clipped_test);
    if let Some(l) = m.lambda {
        let _ = writeln!(out, "lambda: {}", fmt_f64(l));
    }
    if let (Some(tr), Some(te)) = (m.train_nmse, m.test_nmse) {
        let _ = writeln!(out, "train NMSE: {}", fmt_f64(tr));
        let _ = writeln!(out, "test NMSE: {}", fmt_f64(te));
    }
    if let (Some(acc), Some(auc)) = (m.accuracy, m.auc) {
        let _ = writeln!(out, "test accuracy: {}", fmt_f64(acc));
        let _ = writeln!(out, "test AUC: {}", fmt_f64(auc));
    }
    if let Some(c) = &m.confusion {
        let [[tn, fp], [fn_, tp]] = c.as_matrix();
        let _ = writeln!(out, "confusion [[tn, fp], [fn, tp]]: [[{tn}, {fp}], [{fn_}, {tp}]]");
    }
    for (key, value) in reference_values(cfg.task) {
        let _ = writeln!(out, "{key}: {}", fmt_f64(*value));
    }
    out
}

pub fn predictions_csv(report: &ExperimentReport) -> String {
    let p = &report.predictions;
    let mut out = comment_block(&report.config, "test predictions");
    match &p.labels {
        None => {
            out.push_str("index,truth,predicted\n");
            for ((i, t), y) in p.index.iter().zip(&p.truth).zip(&p.predicted) {
                let _ = writeln!(out, "{i},{},{}", fmt_f64(*t), fmt_f64(*y));
            }
        }
        Some(labels) => {
            out.push_str("index,truth,probability,predicted_label\n");
            for (((i, t), prob), label) in p.index.iter().zip(&p.truth).zip(&p.predicted).zip(labels) {
                let _ = writeln!(out, "{i},{},{},{}", *t as u8, fmt_f64(*prob), *label as u8);
            }
        }
    }
    out
}

/// Writes the run artifacts into `dir` (created if needed) and returns the
/// paths written.
///
/// Files: `config.toml`, `report.txt`, `metrics.txt`, `predictions.csv`,
/// `readout.txt`, plus `chip.txt` (photonic route), `series.csv`
/// (forecasting) and `roc.csv` (classification).
pub fn write_artifacts(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let cfg = &report.config;
    let mut files: Vec<(&str, String)> = vec![
        ("config.toml", format!("{}{}", comment_block(cfg, "resolved configuration"), cfg.to_toml())),
        ("report.txt", render_report(report)),
        ("metrics.txt", metrics_doc(report).render()),
        ("predictions.csv", predictions_csv(report)),
    ];
    let mut readout = match &report.readout {
        Readout::Ridge(m) => m.to_doc(),
        Readout::Logistic(m) => m.to_doc(),
    };
    readout.comments.extend(provenance(cfg, "readout").into_iter().skip(1));
    files.push(("readout.txt", readout.render()));
    if let Some(chip) = &report.chip {
        let mut doc = chip.to_doc();
        doc.comments.extend(provenance(cfg, "chip").into_iter().skip(1));
        files.push(("chip.txt", doc.render()));
    }
    if let Some(series) = &report.series {
        files.push(("series.csv", format!("{}{}", comment_block(cfg, "generated series"), series.to_csv())));
    }
    if let Some(roc) = &report.roc {
        let mut out = comment_block(cfg, "roc curve");
        out.push_str("fpr,tpr\n");
        for (fpr, tpr) in &roc.points {
            let _ = writeln!(out, "{},{}", fmt_f64(*fpr), fmt_f64(*tpr));
        }
        files.push(("roc.csv", out));
    }
    let mut written = Vec::with_capacity(files.len());
    for (name, text) in files {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
