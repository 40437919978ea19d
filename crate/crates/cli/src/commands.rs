use std::io::Write;
use std::path::{Path, PathBuf};

use qstress::bench::compare::{experiment_split, score, select};
use qstress::bench::{classification_metrics_for, compare_on, cross_validate, fit_and_score, EvalReport, ModelKind, TrainedModel};
use qstress::config::{ExperimentConfig, ReportFormat};
use qstress::data::{synth_generate, Dataset, PipelineKind, Preprocessor, Split, SynthParams};
use qstress::encodings::FeatureMapSpec;
use qstress::qkernel::{kernel_matrix_with_ids, Kernel};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::*;
use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{} does not exist", path.display())))
    }
}

fn write_out(out: Option<&Path>, body: &[u8]) -> Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            }
            std::fs::write(p, body).map_err(|e| CliError::io(p, e))
        }
        None => match std::io::stdout().write_all(body) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Runtime(e.to_string())),
            _ => Ok(()),
        },
    }
}

/// Parameters of a CSV output, written next to it as `<out>.meta.json`.
fn write_sidecar(out: Option<&Path>, meta: &serde_json::Value) -> Result<()> {
    let Some(out) = out else { return Ok(()) };
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    let path = PathBuf::from(name);
    let body = serde_json::to_string_pretty(meta).expect("metadata is serializable") + "\n";
    std::fs::write(&path, body).map_err(|e| CliError::io(&path, e))
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let body = serde_json::to_string_pretty(value).expect("values are serializable") + "\n";
    write_out(None, body.as_bytes())
}

fn echo_config(cfg: &ExperimentConfig) {
    log::info!("effective config:\n{}", cfg.to_json());
}

pub fn load_config(args: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(p) => {
            require_file(p)?;
            ExperimentConfig::load(p)?
        }
        None => ExperimentConfig::default(),
    };
    args.apply(&mut cfg);
    cfg.validate()?;
    echo_config(&cfg);
    Ok(cfg)
}

pub fn gen_data(a: &GenDataArgs) -> Result<()> {
    let data = synth_generate(a.n, a.seed, &SynthParams::default())?;
    write_out(a.out.as_deref(), &data.to_csv_bytes())?;
    write_sidecar(
        a.out.as_deref(),
        &json!({ "generator": { "n": a.n, "seed": a.seed, "params": SynthParams::default() }, "fingerprint": data.fingerprint() }),
    )?;
    log::info!("wrote {} events (fingerprint {})", data.len(), data.fingerprint());
    Ok(())
}

fn kernel_for(a: &KernelArgs) -> Result<Kernel> {
    let spec = match a.map {
        MapArg::Rbf => return Ok(Kernel::Rbf { gamma: a.gamma }),
        MapArg::Linear => return Ok(Kernel::Linear),
        MapArg::Zz => FeatureMapSpec::zz(a.qubits.unwrap_or(8))
            .with_alpha(a.alpha)
            .with_repetitions(a.reps)
            .with_entanglement(a.entanglement.into()),
        MapArg::Angle => FeatureMapSpec::angle(a.qubits.unwrap_or(4)),
        MapArg::Amplitude => FeatureMapSpec::amplitude(a.qubits.unwrap_or(2)),
    };
    spec.validate()?;
    spec.check_features(4)?;
    Ok(Kernel::Quantum(spec))
}

pub fn kernel(a: &KernelArgs) -> Result<()> {
    require_file(&a.input)?;
    let kernel = kernel_for(a)?;
    let data = Dataset::load_csv(&a.input)?;
    let n = a.limit.unwrap_or(data.len()).min(data.len());
    let raw: Vec<Vec<f64>> = data.features().into_iter().take(n).collect();
    let pipeline = match kernel {
        Kernel::Quantum(_) => PipelineKind::Quantum,
        _ => PipelineKind::Classical,
    };
    let x = Preprocessor::fit(pipeline, &raw)?.transform(&raw)?;
    let ids = (0..n).map(|i| i.to_string()).collect();
    let k = kernel_matrix_with_ids(&x, ids, &kernel)?;
    let mut buf = Vec::new();
    k.write_csv(&mut buf)?;
    write_out(a.out.as_deref(), &buf)?;
    write_sidecar(
        a.out.as_deref(),
        &json!({ "kernel": kernel, "pipeline": pipeline, "rows": n, "input": a.input, "fingerprint": data.fingerprint() }),
    )?;
    log::info!("{n}x{n} kernel, max asymmetry {:.1e}", k.max_asymmetry());
    Ok(())
}

/// What `train` writes: the model plus everything needed to replay it.
#[derive(Serialize, Deserialize)]
pub struct ModelArtifact {
    pub config: ExperimentConfig,
    pub dataset_fingerprint: String,
    pub split: Split,
    pub scores: qstress::bench::report::ModelScores,
    pub model: TrainedModel,
}

pub fn train(a: &TrainArgs) -> Result<()> {
    let cfg = load_config(&a.experiment)?;
    let kind = ModelKind::from(a.model);
    let data = cfg.dataset.load()?;
    let split = experiment_split(&data, &cfg)?;
    let (model, scores) = fit_and_score(kind, &cfg, &data, &split)?;
    let artifact = ModelArtifact { config: cfg, dataset_fingerprint: data.fingerprint(), split, scores, model };
    let body = serde_json::to_string_pretty(&artifact).expect("models are serializable") + "\n";
    write_out(Some(&a.out), body.as_bytes())?;
    print_json(&json!({ "model": kind, "scores": artifact.scores }))
}

pub fn evaluate(a: &EvaluateArgs) -> Result<()> {
    require_file(&a.model)?;
    let text = std::fs::read_to_string(&a.model).map_err(|e| CliError::io(&a.model, e))?;
    let art: ModelArtifact =
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", a.model.display())))?;
    let labels_for = |d: &Dataset| d.labels(art.model.task);
    let out = match &a.input {
        Some(path) => {
            require_file(path)?;
            let data = Dataset::load_csv(path)?;
            let labels = labels_for(&data);
            let classes: Vec<usize> = (0..art.model.task.n_classes()).collect();
            let metrics = classification_metrics_for(&art.model.predict(&data.features())?, &labels, &classes)?;
            json!({ "model": art.model.kind, "input": path, "dataset_fingerprint": data.fingerprint(), "metrics": metrics, "config": art.config })
        }
        None => {
            let data = art.config.dataset.load()?;
            if data.fingerprint() != art.dataset_fingerprint {
                return Err(CliError::Validation("configured dataset differs from the one the model was trained on".into()));
            }
            let labels = labels_for(&data);
            let (xtr, ytr) = select(&data, &art.split.train, &labels);
            let (xte, yte) = select(&data, &art.split.test, &labels);
            let scores = score(&art.model, (&xtr, &ytr), (&xte, &yte))?;
            json!({ "model": art.model.kind, "dataset_fingerprint": art.dataset_fingerprint, "scores": scores, "config": art.config })
        }
    };
    print_json(&out)
}

pub fn cross_validate_cmd(a: &CrossValidateArgs) -> Result<()> {
    let cfg = load_config(&a.experiment)?;
    if a.folds < 2 {
        return Err(CliError::Validation("--folds must be at least 2".into()));
    }
    let kind = ModelKind::from(a.model);
    let data = cfg.dataset.load()?;
    let split = experiment_split(&data, &cfg)?;
    let mut rows: Vec<usize> = split.train.iter().chain(&split.test).copied().collect();
    rows.sort_unstable();
    let cv = cross_validate(&data, &rows, kind, &cfg, a.folds, cfg.seeds.sampling)?;
    let out = json!({ "model": kind, "folds": a.folds, "cv": cv, "dataset_fingerprint": data.fingerprint(), "config": cfg });
    print_json(&out)
}

fn formats(args: &[FormatArg], fallback: &[ReportFormat]) -> Vec<ReportFormat> {
    if args.is_empty() {
        fallback.to_vec()
    } else {
        args.iter().map(|&f| f.into()).collect()
    }
}

pub fn compare(a: &CompareArgs) -> Result<()> {
    let mut cfg = load_config(&a.experiment)?;
    if let Some(out) = &a.out {
        cfg.output.dir = out.clone();
    }
    if !a.format.is_empty() {
        cfg.output.formats = formats(&a.format, &[]);
    }
    if a.no_feature_maps {
        cfg.compare_feature_maps = false;
    }
    let data = cfg.dataset.load()?;
    let report = compare_on(&data, &cfg)?;
    for path in report.emit(&cfg.output.dir, &cfg.output.formats)? {
        log::info!("wrote {}", path.display());
    }
    for m in &report.models {
        match &m.scores {
            Some(s) => eprintln!(
                "{:<12} train {:>6.2}%  test {:>6.2}%  gap {:>6.2}  params {}",
                m.model.display_name(),
                s.train_accuracy,
                s.test_accuracy,
                s.generalization_gap,
                s.parameter_count
            ),
            None => eprintln!("{:<12} failed: {}", m.model.display_name(), m.error.as_deref().unwrap_or("")),
        }
    }
    Ok(())
}

pub fn report(a: &ReportArgs) -> Result<()> {
    require_file(&a.input)?;
    let text = std::fs::read_to_string(&a.input).map_err(|e| CliError::io(&a.input, e))?;
    let report = EvalReport::from_json(&text).map_err(|e| CliError::Validation(format!("{}: {e}", a.input.display())))?;
    for path in report.emit(&a.out, &formats(&a.format, &[]))? {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}
