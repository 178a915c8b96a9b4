//! Output files. Every file starts with the configuration snapshot that
//! produced it (`#` comment lines for CSV, a `config` object for JSON).

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use gaitphase_core::classifiers::ModelKind;
use gaitphase_core::dataset::ScreeningReport;
use gaitphase_core::evaluation::{ReplayEvent, SweepCell, SweepReport};
use gaitphase_core::windowing::{FeatureMatrix, FEATURE_NAMES};
use serde::Serialize;

use crate::runner::CellFailure;

pub type Snapshot = [(String, String)];

fn header(snapshot: &Snapshot) -> String {
    let mut out = String::from("# gaitphase\n");
    for (k, v) in snapshot {
        let _ = writeln!(out, "# {k} = {v}");
    }
    out
}

fn csv_file(path: &Path, snapshot: &Snapshot, fill: impl FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>) -> io::Result<()> {
    let mut buf = header(snapshot).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        fill(&mut w).map_err(io::Error::other)?;
        w.flush()?;
    }
    fs::write(path, buf)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Best cell per model: `model,auc,window_ms,delay_ms`.
pub fn write_summary_csv(path: &Path, report: &SweepReport) -> io::Result<()> {
    csv_file(path, &report.config, |w| {
        w.write_record(["model", "auc", "window_ms", "delay_ms"])?;
        for c in &report.best_per_model {
            w.write_record([c.kind.display_name().to_string(), c.mean_auc.to_string(), c.window_ms.to_string(), c.delay_ms.to_string()])?;
        }
        Ok(())
    })
}

/// One row per evaluated cell.
pub fn write_cells_csv(path: &Path, report: &SweepReport) -> io::Result<()> {
    csv_file(path, &report.config, |w| {
        w.write_record(["window_ms", "delay_ms", "model", "mean_auc", "pooled_auc", "folds_defined", "folds", "params"])?;
        for c in &report.cells {
            w.write_record([
                c.window_ms.to_string(),
                c.delay_ms.to_string(),
                c.kind.short_name().to_string(),
                c.mean_auc.to_string(),
                opt(c.pooled_auc),
                c.per_fold_auc.iter().flatten().count().to_string(),
                c.per_fold_auc.len().to_string(),
                c.winning_params.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// Mean-AUC matrix of one model: rows are window sizes, columns delays.
pub fn write_heatmap_csv(path: &Path, report: &SweepReport, kind: ModelKind) -> io::Result<()> {
    let h = report.heatmap(kind);
    csv_file(path, &report.config, |w| {
        let mut head = vec!["window_ms\\delay_ms".to_string()];
        head.extend(h.delays_ms.iter().map(f64::to_string));
        w.write_record(&head)?;
        for (win, row) in h.windows_ms.iter().zip(&h.values) {
            let mut rec = vec![win.to_string()];
            rec.extend(row.iter().map(|v| opt(*v)));
            w.write_record(&rec)?;
        }
        Ok(())
    })
}

#[derive(Serialize)]
struct JsonReport<'a> {
    seed: u64,
    config: serde_json::Map<String, serde_json::Value>,
    best_per_model: &'a [SweepCell],
    cells: &'a [SweepCell],
    failures: &'a [CellFailure],
}

pub fn write_report_json(path: &Path, report: &SweepReport, failures: &[CellFailure]) -> io::Result<()> {
    let json = JsonReport {
        seed: report.seed,
        config: report.config.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect(),
        best_per_model: &report.best_per_model,
        cells: &report.cells,
        failures,
    };
    let mut text = serde_json::to_string_pretty(&json).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// Writes summary, cells, per-model heatmaps and the JSON report into `dir`.
pub fn write_sweep_outputs(dir: &Path, report: &SweepReport, failures: &[CellFailure]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    write_summary_csv(&dir.join("summary.csv"), report)?;
    write_cells_csv(&dir.join("cells.csv"), report)?;
    for kind in report.models() {
        write_heatmap_csv(&dir.join(format!("heatmap_{}.csv", kind.short_name())), report, kind)?;
    }
    write_report_json(&dir.join("report.json"), report, failures)
}

pub fn best_table(report: &SweepReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<6} {:>7} {:>16} {:>15}", "model", "AUC", "window-size (ms)", "delay-time (ms)");
    for c in &report.best_per_model {
        let _ = writeln!(out, "{:<6} {:>7.3} {:>16} {:>15}", c.kind.display_name(), c.mean_auc, c.window_ms, c.delay_ms);
    }
    out
}

pub fn write_screening_csv(path: &Path, report: &ScreeningReport, snapshot: &Snapshot) -> io::Result<()> {
    csv_file(path, snapshot, |w| {
        w.write_record(["subject", "p50", "p90", "p95", "excluded", "reason"])?;
        for q in &report.quantiles {
            w.write_record([
                q.subject_id.to_string(),
                q.p50.to_string(),
                q.p90.to_string(),
                q.p95.to_string(),
                report.is_excluded(q.subject_id).to_string(),
                report.exclusion_reasons.get(&q.subject_id).cloned().unwrap_or_default(),
            ])?;
        }
        Ok(())
    })
}

pub fn write_features_csv(path: &Path, m: &FeatureMatrix, snapshot: &Snapshot) -> io::Result<()> {
    csv_file(path, snapshot, |w| {
        let mut head: Vec<&str> = FEATURE_NAMES.to_vec();
        head.extend(["label", "subject", "end_ms"]);
        w.write_record(&head)?;
        for r in &m.rows {
            let f = r.features.to_array();
            let mut rec: Vec<String> = f.iter().map(f64::to_string).collect();
            rec.extend([r.label.to_string(), r.subject.to_string(), r.end_ms.to_string()]);
            w.write_record(&rec)?;
        }
        Ok(())
    })
}

pub fn write_replay_csv(path: &Path, events: &[ReplayEvent], snapshot: &Snapshot) -> io::Result<()> {
    csv_file(path, snapshot, |w| {
        w.write_record(["time_ms", "score", "latency_ms"])?;
        for e in events {
            w.write_record([e.time_ms.to_string(), e.score.to_string(), e.latency_ms.to_string()])?;
        }
        Ok(())
    })
}

pub fn write_config_snapshot(path: &Path, ini: &str) -> io::Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(ini.as_bytes())
}
