//! Command implementations behind the `colortouch` binary.
//!
//! Every command is deterministic in its inputs and seeds. `train-eval`
//! reports embed the seed, the configuration hash and the dataset hash.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use colortouch::classify::{
    cross_validate, cross_validate_hierarchical, evaluate, evaluate_hierarchical, split_by_trial,
    train, train_hierarchical, LabelKind, Method, ModelFile, ModelMetadata, TrainOptions,
    TrainedModel,
};
use colortouch::dataset::{generate_sweep, Dataset};
use colortouch::descriptor::{extract_roi_means, FeatureVector, N_FEATURES};
use colortouch::geometry::{depth_of_level, ContactState};
use colortouch::optics::{add_noise, deformed_response, render_frame, Frame};
use colortouch::Config;
use serde::{Deserialize, Serialize};

pub fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p).with_context(|| format!("loading config {}", p.display())),
        None => Ok(Config::default()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateSummary {
    pub samples: usize,
    pub per_class: usize,
    pub classes: usize,
}

impl std::fmt::Display for GenerateSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} samples, {} per class", self.samples, self.per_class)
    }
}

pub fn cmd_generate(config: &Config, out: &Path, seed: u64) -> Result<GenerateSummary> {
    let sensor = config.build()?;
    let dataset = generate_sweep(
        &sensor.geometry,
        &sensor.grid,
        &sensor.optics,
        &config.sweep,
        seed,
    )?;
    dataset
        .save(out)
        .with_context(|| format!("writing {}", out.display()))?;
    let counts = dataset.class_counts();
    let per_class = *counts.values().next().unwrap_or(&0);
    if counts.values().any(|&c| c != per_class) {
        bail!("generated classes are unbalanced");
    }
    Ok(GenerateSummary {
        samples: dataset.len(),
        per_class,
        classes: counts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Flat,
    Hier,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "flat" => Ok(Mode::Flat),
            "hier" | "hierarchical" => Ok(Mode::Hier),
            _ => Err(format!("unknown mode `{s}` (expected flat|hier)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainEvalArgs {
    pub dataset: PathBuf,
    pub methods: Vec<Method>,
    pub mode: Mode,
    pub seed: u64,
    pub train_trials: usize,
    pub folds: usize,
    pub model_out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: Method,
    pub cv_accuracy: f64,
    pub cv_fold_accuracies: Vec<f64>,
    pub generalization_accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub combined_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub mode: Mode,
    pub seed: u64,
    pub config_hash: String,
    pub dataset_hash: String,
    pub train_trials: Vec<usize>,
    pub test_trials: Vec<usize>,
    pub folds: usize,
    pub rows: Vec<ReportRow>,
}

pub fn cmd_train_eval(config: &Config, args: &TrainEvalArgs) -> Result<Report> {
    let dataset = Dataset::load(&args.dataset)
        .with_context(|| format!("loading dataset {}", args.dataset.display()))?;
    if args.model_out.is_some() && args.methods.len() != 1 {
        bail!("--model-out needs exactly one --method");
    }
    let opts = TrainOptions {
        seed: args.seed,
        ..config.train.clone()
    };
    let dataset_hash = dataset.content_hash();
    let (train_set, test_set) = split_by_trial(&dataset, args.train_trials, args.seed)?;

    let mut rows = Vec::new();
    for &method in &args.methods {
        let row = match args.mode {
            Mode::Flat => {
                let cv = cross_validate(&train_set, method, args.folds, &opts)?;
                let model = train(method, &train_set.samples, LabelKind::Flat, &opts)?;
                let gen = evaluate(&model, &test_set.samples, LabelKind::Flat)?;
                save_model(
                    args,
                    method,
                    &opts,
                    &dataset_hash,
                    TrainedModel::Flat(model),
                )?;
                ReportRow {
                    method,
                    cv_accuracy: cv.mean_accuracy,
                    cv_fold_accuracies: cv.fold_accuracies,
                    generalization_accuracy: gen.accuracy,
                    location_accuracy: None,
                    depth_accuracy: None,
                    combined_accuracy: None,
                }
            }
            Mode::Hier => {
                let cv = cross_validate_hierarchical(&train_set, method, args.folds, &opts)?;
                let model = train_hierarchical(method, &train_set.samples, &opts)?;
                let m = evaluate_hierarchical(&model, &test_set.samples)?;
                save_model(
                    args,
                    method,
                    &opts,
                    &dataset_hash,
                    TrainedModel::Hierarchical(model),
                )?;
                ReportRow {
                    method,
                    cv_accuracy: cv.mean_accuracy,
                    cv_fold_accuracies: cv.fold_accuracies,
                    generalization_accuracy: m.combined_accuracy,
                    location_accuracy: Some(m.location_accuracy),
                    depth_accuracy: Some(m.depth_accuracy),
                    combined_accuracy: Some(m.combined_accuracy),
                }
            }
        };
        rows.push(row);
    }
    Ok(Report {
        mode: args.mode,
        seed: args.seed,
        config_hash: config.hash(),
        dataset_hash,
        train_trials: train_set.trials(),
        test_trials: test_set.trials(),
        folds: args.folds,
        rows,
    })
}

fn save_model(
    args: &TrainEvalArgs,
    method: Method,
    opts: &TrainOptions,
    dataset_hash: &str,
    model: TrainedModel,
) -> Result<()> {
    let Some(path) = &args.model_out else {
        return Ok(());
    };
    let file = ModelFile {
        metadata: ModelMetadata {
            method,
            seed: args.seed,
            dataset_hash: dataset_hash.to_string(),
            options: opts.clone(),
        },
        model,
    };
    file.save(path)
        .with_context(|| format!("writing model {}", path.display()))
}

impl Report {
    /// Human-readable table. Numbers use the same shortest round-trip
    /// formatting as the JSON encoding.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "mode: {}",
            match self.mode {
                Mode::Flat => "flat",
                Mode::Hier => "hier",
            }
        );
        let _ = writeln!(s, "seed: {}", self.seed);
        let _ = writeln!(s, "config_hash: {}", self.config_hash);
        let _ = writeln!(s, "dataset_hash: {}", self.dataset_hash);
        let _ = writeln!(s, "train_trials: {:?}", self.train_trials);
        let _ = writeln!(s, "test_trials: {:?}", self.test_trials);
        let _ = writeln!(s, "folds: {}", self.folds);
        let _ = writeln!(s);
        match self.mode {
            Mode::Flat => {
                let _ = writeln!(
                    s,
                    "{:<8}{:<24}{:<24}",
                    "method", "cv_accuracy", "generalization_accuracy"
                );
                for r in &self.rows {
                    let _ = writeln!(
                        s,
                        "{:<8}{:<24}{:<24}",
                        r.method.name(),
                        r.cv_accuracy,
                        r.generalization_accuracy
                    );
                }
            }
            Mode::Hier => {
                let _ = writeln!(
                    s,
                    "{:<8}{:<24}{:<24}{:<24}{:<24}{:<24}",
                    "method",
                    "cv_accuracy",
                    "generalization_accuracy",
                    "location_accuracy",
                    "depth_accuracy",
                    "combined_accuracy"
                );
                for r in &self.rows {
                    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                    let _ = writeln!(
                        s,
                        "{:<8}{:<24}{:<24}{:<24}{:<24}{:<24}",
                        r.method.name(),
                        r.cv_accuracy,
                        r.generalization_accuracy,
                        opt(r.location_accuracy),
                        opt(r.depth_accuracy),
                        opt(r.combined_accuracy)
                    );
                }
            }
        }
        s
    }

    /// Writes `path` as JSON and a `.txt` sibling with the text table.
    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
        let text_path = path.with_extension("txt");
        std::fs::write(&text_path, self.to_text())
            .with_context(|| format!("writing {}", text_path.display()))?;
        Ok(text_path)
    }
}

/// Input for `infer`.
#[derive(Debug, Clone)]
pub enum InferInput {
    Frame(PathBuf),
    Response(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub location: usize,
    pub depth_level: usize,
    pub depth_mm: f64,
    pub force_n: f64,
}

impl std::fmt::Display for Inference {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "location {} depth_level {} depth {:.1} mm force {:.3} N",
            self.location, self.depth_level, self.depth_mm, self.force_n
        )
    }
}

pub fn cmd_infer(config: &Config, model_path: &Path, input: &InferInput) -> Result<Inference> {
    let sensor = config.build()?;
    let model = ModelFile::load(model_path)
        .with_context(|| format!("loading model {}", model_path.display()))?;
    let features = match input {
        InferInput::Frame(path) => {
            let frame = Frame::read_ppm(path)
                .with_context(|| format!("reading frame {}", path.display()))?;
            extract_roi_means(&frame, &sensor.roi)?
        }
        InferInput::Response(path) => read_response_csv(path)?,
    };
    let (location, depth_level) = model.model.predict_contact(features.as_slice())?;
    let depth_mm = depth_of_level(depth_level)?;
    Ok(Inference {
        location,
        depth_level,
        depth_mm,
        force_n: sensor.mechanics.force_from_depth(depth_mm)?,
    })
}

/// First row of 27 numbers in a CSV file; a non-numeric header row is skipped.
pub fn read_response_csv(path: &Path) -> Result<FeatureVector> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(values) => {
                return FeatureVector::from_slice(&values)
                    .with_context(|| format!("{}:{}", path.display(), i + 1))
            }
            Err(_) if i == 0 => continue,
            Err(e) => bail!("{}:{}: {e}", path.display(), i + 1),
        }
    }
    bail!("{}: no response row found", path.display())
}

/// Renders the camera frame for one contact state.
pub fn cmd_render(
    config: &Config,
    location: usize,
    depth_level: usize,
    seed: u64,
    noise: bool,
    out: &Path,
) -> Result<()> {
    let sensor = config.build()?;
    let contact = ContactState::new(&sensor.grid, location, depth_level)?;
    let mut response = deformed_response(&sensor.geometry, &sensor.optics, &contact)?;
    if noise {
        response = add_noise(&response, sensor.optics.noise_sigma, seed)?;
    }
    render_frame(&response, &sensor.frame)?
        .write_ppm(out)
        .with_context(|| format!("writing {}", out.display()))
}

/// Mean feature vector of each requested `(location, depth level)` pair.
pub fn cmd_export_bars(
    dataset_path: &Path,
    locations: &[usize],
    levels: &[usize],
    out: &Path,
) -> Result<Vec<(usize, usize, [f64; N_FEATURES])>> {
    let dataset = Dataset::load(dataset_path)
        .with_context(|| format!("loading dataset {}", dataset_path.display()))?;
    let mut rows = Vec::new();
    for &location in locations {
        for &level in levels {
            let mut sum = [0.0; N_FEATURES];
            let mut count = 0usize;
            for s in dataset
                .samples
                .iter()
                .filter(|s| s.location == location && s.depth_level == level)
            {
                for (acc, v) in sum.iter_mut().zip(s.features.0) {
                    *acc += v;
                }
                count += 1;
            }
            if count == 0 {
                bail!("dataset has no samples at location {location}, depth level {level}");
            }
            rows.push((location, level, sum.map(|v| v / count as f64)));
        }
    }
    let mut text = String::from("location,depth_level");
    for i in 0..N_FEATURES {
        let _ = write!(text, ",f{i:02}");
    }
    text.push('\n');
    for (loc, lvl, mean) in &rows {
        let _ = write!(text, "{loc},{lvl}");
        for v in mean {
            let _ = write!(text, ",{v:.8e}");
        }
        text.push('\n');
    }
    std::fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
    Ok(rows)
}
