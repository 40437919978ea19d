//! Report types and their canonical JSON / CSV / SVG renderings.
//!
//! JSON is the primary format. CSV holds one row per model with per-class
//! columns `precision_<c>`, `recall_<c>`, `f1_<c>`, `support_<c>`,
//! `zero_division_<c>` and reads back into identical model records.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::metrics::ClassMetrics;
use super::models::ModelKind;
use super::svg;
use crate::config::ReportFormat;
use crate::data::Task;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelScores {
    /// Percent, two decimals.
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    /// `train_accuracy − test_accuracy`, percentage points.
    pub generalization_gap: f64,
    /// Test-set metrics per class.
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub parameter_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub model: ModelKind,
    pub task: Task,
    pub status: Status,
    pub error: Option<String>,
    pub scores: Option<ModelScores>,
    pub seed: u64,
    /// Hyperparameters this model ran with.
    pub config: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapRecord {
    pub map: String,
    pub n_qubits: usize,
    pub status: Status,
    pub error: Option<String>,
    pub train_accuracy: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub generalization_gap: Option<f64>,
    /// Mean k-fold accuracy in percent over the sampled rows.
    pub cv_accuracy: Option<f64>,
    pub cv_std: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub n_train: usize,
    pub n_test: usize,
    pub train_class_counts: BTreeMap<usize, usize>,
    pub test_class_counts: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    /// SHA-256 of the full dataset's canonical CSV.
    pub dataset_fingerprint: String,
    pub dataset_provenance: String,
    pub task: Task,
    pub split: SplitSummary,
    pub models: Vec<ModelRecord>,
    pub feature_maps: Vec<FeatureMapRecord>,
    /// Effective experiment configuration.
    pub config: serde_json::Value,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports are always serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn class_columns(&self) -> Vec<usize> {
        let mut classes: Vec<usize> = self
            .models
            .iter()
            .filter_map(|m| m.scores.as_ref())
            .flat_map(|s| s.per_class.iter().map(|c| c.class))
            .collect();
        classes.sort_unstable();
        classes.dedup();
        classes
    }

    pub fn to_csv(&self) -> String {
        const FIXED: [&str; 17] = [
            "dataset_fingerprint",
            "model",
            "task",
            "status",
            "error",
            "train_accuracy",
            "test_accuracy",
            "generalization_gap",
            "macro_precision",
            "macro_recall",
            "macro_f1",
            "weighted_precision",
            "weighted_recall",
            "weighted_f1",
            "parameter_count",
            "seed",
            "config",
        ];
        let classes = self.class_columns();
        let mut header: Vec<String> = FIXED.iter().map(|s| s.to_string()).collect();
        for c in &classes {
            for m in ["precision", "recall", "f1", "support", "zero_division"] {
                header.push(format!("{m}_{c}"));
            }
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&header).expect("in-memory write");
        for m in &self.models {
            let mut row = vec![
                self.dataset_fingerprint.clone(),
                m.model.to_string(),
                enum_str(&m.task),
                enum_str(&m.status),
                m.error.clone().unwrap_or_default(),
            ];
            let cell = |f: &dyn Fn(&ModelScores) -> String| m.scores.as_ref().map(f).unwrap_or_default();
            row.push(cell(&|s| s.train_accuracy.to_string()));
            row.push(cell(&|s| s.test_accuracy.to_string()));
            row.push(cell(&|s| s.generalization_gap.to_string()));
            row.push(cell(&|s| s.macro_precision.to_string()));
            row.push(cell(&|s| s.macro_recall.to_string()));
            row.push(cell(&|s| s.macro_f1.to_string()));
            row.push(cell(&|s| s.weighted_precision.to_string()));
            row.push(cell(&|s| s.weighted_recall.to_string()));
            row.push(cell(&|s| s.weighted_f1.to_string()));
            row.push(cell(&|s| s.parameter_count.to_string()));
            row.push(m.seed.to_string());
            row.push(m.config.to_string());
            for c in &classes {
                let pc = m.scores.as_ref().and_then(|s| s.per_class.iter().find(|p| p.class == *c));
                match pc {
                    Some(p) => row.extend([
                        p.precision.to_string(),
                        p.recall.to_string(),
                        p.f1.to_string(),
                        p.support.to_string(),
                        p.zero_division.to_string(),
                    ]),
                    None => row.extend(std::iter::repeat_n(String::new(), 5)),
                }
            }
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    /// Parses the CSV produced by [`EvalReport::to_csv`] back into model
    /// records and the dataset fingerprint.
    pub fn models_from_csv(text: &str) -> Result<(String, Vec<ModelRecord>)> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers()?.clone();
        let col = |name: &str| header.iter().position(|h| h == name).ok_or_else(|| Error::Schema(name.to_string()));
        let classes: Vec<usize> = header
            .iter()
            .filter_map(|h| h.strip_prefix("precision_"))
            .map(|c| c.parse::<usize>().map_err(|_| Error::Schema(format!("precision_{c}"))))
            .collect::<Result<_>>()?;
        let mut fingerprint = String::new();
        let mut models = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let row = i + 1;
            let rec = rec?;
            let get = |name: &str| -> Result<&str> { Ok(rec.get(col(name)?).unwrap_or("")) };
            let parse_err = |name: &str, e: &dyn std::fmt::Display| Error::Parse { row, msg: format!("{name}: {e}") };
            let f = |name: &str| -> Result<f64> { get(name)?.parse::<f64>().map_err(|e| parse_err(name, &e)) };
            let u = |name: &str| -> Result<usize> { get(name)?.parse::<usize>().map_err(|e| parse_err(name, &e)) };
            fingerprint = get("dataset_fingerprint")?.to_string();
            let status: Status = parse_enum(get("status")?).map_err(|e| parse_err("status", &e))?;
            let scores = if status == Status::Ok {
                let per_class = classes
                    .iter()
                    .filter(|c| rec.get(header.iter().position(|h| h == format!("precision_{c}")).unwrap_or(0)) != Some(""))
                    .map(|c| {
                        Ok(ClassMetrics {
                            class: *c,
                            precision: f(&format!("precision_{c}"))?,
                            recall: f(&format!("recall_{c}"))?,
                            f1: f(&format!("f1_{c}"))?,
                            support: u(&format!("support_{c}"))?,
                            zero_division: get(&format!("zero_division_{c}"))? == "true",
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(ModelScores {
                    train_accuracy: f("train_accuracy")?,
                    test_accuracy: f("test_accuracy")?,
                    generalization_gap: f("generalization_gap")?,
                    per_class,
                    macro_precision: f("macro_precision")?,
                    macro_recall: f("macro_recall")?,
                    macro_f1: f("macro_f1")?,
                    weighted_precision: f("weighted_precision")?,
                    weighted_recall: f("weighted_recall")?,
                    weighted_f1: f("weighted_f1")?,
                    parameter_count: u("parameter_count")?,
                })
            } else {
                None
            };
            let error = Some(get("error")?.to_string()).filter(|e| !e.is_empty());
            models.push(ModelRecord {
                model: get("model")?.parse()?,
                task: parse_enum(get("task")?).map_err(|e| parse_err("task", &e))?,
                status,
                error,
                scores,
                seed: get("seed")?.parse::<u64>().map_err(|e| parse_err("seed", &e))?,
                config: serde_json::from_str(get("config")?)?,
            });
        }
        Ok((fingerprint, models))
    }

    pub fn to_svg(&self) -> String {
        svg::render_models(self)
    }

    pub fn feature_maps_svg(&self) -> Option<String> {
        (!self.feature_maps.is_empty()).then(|| svg::render_feature_maps(self))
    }

    /// Writes the requested formats into `dir` and returns the paths written.
    pub fn emit(&self, dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let mut put = |name: &str, body: String| -> Result<()> {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            written.push(path);
            Ok(())
        };
        let mut formats = formats.to_vec();
        formats.sort_unstable();
        formats.dedup();
        for f in formats {
            match f {
                ReportFormat::Json => put("report.json", self.to_json())?,
                ReportFormat::Csv => put("report.csv", self.to_csv())?,
                ReportFormat::Svg => {
                    put("report.svg", self.to_svg())?;
                    if let Some(s) = self.feature_maps_svg() {
                        put("feature_maps.svg", s)?;
                    }
                }
            }
        }
        Ok(written)
    }
}

fn enum_str<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        other => panic!("expected a unit enum, got {other:?}"),
    }
}

fn parse_enum<T: for<'de> Deserialize<'de>>(s: &str) -> std::result::Result<T, serde_json::Error> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
}
