//! Synthetic calibration sweeps and their CSV persistence.
//!
//! A sweep visits every (trial, location, depth level) and records
//! `samples_per_state` noisy readings of each. Every reading draws its noise
//! from its own generator, seeded by [`derive_seed`] from the master seed and
//! the reading's coordinates, so any subset of the sweep can be regenerated
//! on its own and the output never depends on execution order.
//!
//! Features are stored at single precision. The CSV writer prints nine
//! significant digits, which is exactly enough to round-trip an `f32`.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::descriptor::{features_from_response, FeatureVector, N_FEATURES};
use crate::error::{Error, Result};
use crate::geometry::{
    check_depth_level, check_location, ContactGrid, ContactState, SensorGeometry, N_DEPTH_LEVELS,
    N_LOCATIONS,
};
use crate::optics::{add_noise, deformed_response, OpticsParams, ReceiverResponse};

/// One recorded feature vector with its contact labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledSample {
    pub features: FeatureVector,
    pub location: usize,
    pub depth_level: usize,
    pub trial: usize,
}

impl LabeledSample {
    /// `location * 5 + depth_level - 1`.
    pub fn flat_class(&self) -> usize {
        self.location * N_DEPTH_LEVELS + self.depth_level - 1
    }
}

/// Samples in canonical order: trial-major, then location, depth level and
/// sample index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub samples: Vec<LabeledSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub n_trials: usize,
    pub samples_per_state: usize,
    pub depth_levels: usize,
    /// Standard deviation of a per-trial, per-channel additive offset.
    /// Zero disables drift.
    pub drift_sigma: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            n_trials: 27,
            samples_per_state: 10,
            depth_levels: N_DEPTH_LEVELS,
            drift_sigma: 0.0,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 || self.samples_per_state == 0 {
            return Err(Error::Config(
                "n_trials and samples_per_state must be at least 1".into(),
            ));
        }
        if !(1..=N_DEPTH_LEVELS).contains(&self.depth_levels) {
            return Err(Error::Config(format!(
                "depth_levels must be in 1..={N_DEPTH_LEVELS}, got {}",
                self.depth_levels
            )));
        }
        if !(self.drift_sigma.is_finite() && self.drift_sigma >= 0.0) {
            return Err(Error::Config("drift_sigma must be non-negative".into()));
        }
        Ok(())
    }

    pub fn total_samples(&self) -> usize {
        self.n_trials * N_LOCATIONS * self.depth_levels * self.samples_per_state
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Stable seed for a sub-stream: SplitMix64 of the master seed, then one
/// SplitMix64 round per part, each XOR-ed into the running state.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(master), |h, &p| splitmix64(h ^ p))
}

const DRIFT_STREAM: u64 = u64::MAX;

fn sample_seed(master: u64, trial: usize, location: usize, level: usize, sample: usize) -> u64 {
    derive_seed(
        master,
        &[trial as u64, location as u64, level as u64, sample as u64],
    )
}

fn trial_drift(master: u64, trial: usize, sigma: f64) -> Result<[f64; N_FEATURES]> {
    let mut drift = [0.0; N_FEATURES];
    if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::Config(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master, &[DRIFT_STREAM, trial as u64]));
        for d in &mut drift {
            *d = normal.sample(&mut rng);
        }
    }
    Ok(drift)
}

fn to_storage_precision(v: f64) -> f64 {
    v as f32 as f64
}

/// Runs the full calibration sweep.
pub fn generate_sweep(
    geometry: &SensorGeometry,
    grid: &ContactGrid,
    optics: &OpticsParams,
    spec: &SweepSpec,
    master_seed: u64,
) -> Result<Dataset> {
    spec.validate()?;
    optics.validate()?;
    let states: Vec<(usize, usize)> = (0..N_LOCATIONS)
        .flat_map(|loc| (1..=spec.depth_levels).map(move |lvl| (loc, lvl)))
        .collect();
    let clean: Vec<ReceiverResponse> = states
        .par_iter()
        .map(|&(loc, lvl)| deformed_response(geometry, optics, &ContactState::new(grid, loc, lvl)?))
        .collect::<Result<_>>()?;

    let per_trial: Vec<Vec<LabeledSample>> = (0..spec.n_trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<LabeledSample>> {
            let drift = trial_drift(master_seed, trial, spec.drift_sigma)?;
            let mut out = Vec::with_capacity(states.len() * spec.samples_per_state);
            for (&(location, depth_level), response) in states.iter().zip(&clean) {
                let mut shifted = *response;
                for (v, d) in shifted.0.iter_mut().flatten().zip(drift) {
                    *v = (*v + d).clamp(0.0, 1.0);
                }
                for sample in 0..spec.samples_per_state {
                    let seed = sample_seed(master_seed, trial, location, depth_level, sample);
                    let noisy = add_noise(&shifted, optics.noise_sigma, seed)?;
                    let mut features = features_from_response(&noisy);
                    for v in &mut features.0 {
                        *v = to_storage_precision(*v);
                    }
                    out.push(LabeledSample {
                        features,
                        location,
                        depth_level,
                        trial,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    Ok(Dataset {
        samples: per_trial.into_iter().flatten().collect(),
    })
}

const LABEL_COLUMNS: [&str; 3] = ["trial", "location", "depth_level"];

pub fn csv_header() -> String {
    let mut cols: Vec<String> = LABEL_COLUMNS.iter().map(|s| s.to_string()).collect();
    cols.extend((0..N_FEATURES).map(|i| format!("f{i:02}")));
    cols.join(",")
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sorted distinct trial ids.
    pub fn trials(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.samples.iter().map(|s| s.trial).collect();
        t.sort_unstable();
        t.dedup();
        t
    }

    pub fn n_trials(&self) -> usize {
        self.trials().len()
    }

    /// Sample count of each `(trial, flat class)` cell.
    pub fn cell_counts(&self) -> BTreeMap<(usize, usize), usize> {
        let mut counts = BTreeMap::new();
        for s in &self.samples {
            *counts.entry((s.trial, s.flat_class())).or_insert(0) += 1;
        }
        counts
    }

    /// Common per-cell sample count, or `None` when cells are unbalanced.
    pub fn samples_per_state(&self) -> Option<usize> {
        let counts = self.cell_counts();
        let first = *counts.values().next()?;
        counts.values().all(|&c| c == first).then_some(first)
    }

    pub fn class_counts(&self) -> BTreeMap<usize, usize> {
        let mut counts = BTreeMap::new();
        for s in &self.samples {
            *counts.entry(s.flat_class()).or_insert(0) += 1;
        }
        counts
    }

    /// Samples whose trial is in `trials`, in their original order.
    pub fn select_trials(&self, trials: &[usize]) -> Dataset {
        Dataset {
            samples: self
                .samples
                .iter()
                .filter(|s| trials.contains(&s.trial))
                .copied()
                .collect(),
        }
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::Any(b'\n'))
            .quote_style(csv::QuoteStyle::Never)
            .from_writer(writer);
        let write_err = |e: csv::Error| Error::Validation {
            line: None,
            message: format!("write failed: {e}"),
        };
        wtr.write_record(csv_header().split(','))
            .map_err(write_err)?;
        let mut record: Vec<String> = Vec::with_capacity(LABEL_COLUMNS.len() + N_FEATURES);
        for s in &self.samples {
            record.clear();
            record.push(s.trial.to_string());
            record.push(s.location.to_string());
            record.push(s.depth_level.to_string());
            record.extend(s.features.0.iter().map(|v| format!("{:.8e}", *v as f32)));
            wtr.write_record(&record).map_err(write_err)?;
        }
        wtr.flush().map_err(|e| Error::Validation {
            line: None,
            message: format!("write failed: {e}"),
        })?;
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to memory cannot fail");
        buf
    }

    /// SHA-256 of the canonical CSV encoding, hex encoded.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_csv_bytes()))
    }

    pub fn read_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        let mut records = rdr.records();
        let header = match records.next() {
            Some(r) => r.map_err(|e| parse_error(&e, 1))?,
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        };
        let expected = csv_header();
        if header.iter().collect::<Vec<_>>().join(",") != expected {
            return Err(Error::Parse {
                line: 1,
                message: format!("header has {} columns, expected `{expected}`", header.len()),
            });
        }
        let mut samples = Vec::new();
        for record in records {
            let record = record.map_err(|e| parse_error(&e, 0))?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != LABEL_COLUMNS.len() + N_FEATURES {
                return Err(Error::Parse {
                    line,
                    message: format!(
                        "expected {} columns, found {}",
                        LABEL_COLUMNS.len() + N_FEATURES,
                        record.len()
                    ),
                });
            }
            let label = |i: usize| -> Result<usize> {
                record[i].parse().map_err(|e| Error::Parse {
                    line,
                    message: format!("{}: {e}", LABEL_COLUMNS[i]),
                })
            };
            let (trial, location, depth_level) = (label(0)?, label(1)?, label(2)?);
            let validation = |e: Error| Error::Validation {
                line: Some(line),
                message: e.to_string(),
            };
            check_location(location).map_err(validation)?;
            check_depth_level(depth_level).map_err(validation)?;
            let mut features = [0.0; N_FEATURES];
            for (k, slot) in features.iter_mut().enumerate() {
                let text = &record[LABEL_COLUMNS.len() + k];
                let v: f32 = text.parse().map_err(|e| Error::Parse {
                    line,
                    message: format!("f{k:02}: {e}"),
                })?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Validation {
                        line: Some(line),
                        message: format!("f{k:02} = {text} is outside [0, 1]"),
                    });
                }
                *slot = f64::from(v);
            }
            samples.push(LabeledSample {
                features: FeatureVector(features),
                location,
                depth_level,
                trial,
            });
        }
        let dataset = Dataset { samples };
        if !dataset.is_empty() && dataset.samples_per_state().is_none() {
            return Err(Error::Validation {
                line: None,
                message: "(trial, state) cells have unequal sample counts".into(),
            });
        }
        Ok(dataset)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

fn parse_error(e: &csv::Error, fallback_line: u64) -> Error {
    Error::Parse {
        line: e.position().map_or(fallback_line, |p| p.line()),
        message: e.to_string(),
    }
}
