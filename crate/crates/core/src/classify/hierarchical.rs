use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train, FlatModel, LabelKind, Method, TrainOptions};
use crate::dataset::LabeledSample;
use crate::error::{Error, Result};
use crate::geometry::{N_DEPTH_LEVELS, N_LOCATIONS};

/// Two-stage classifier: a 25-way location model, then a 5-way depth model
/// for the predicted location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalModel {
    pub location: FlatModel,
    /// `depth[l]` predicts the depth level of contacts at location `l`.
    pub depth: Vec<FlatModel>,
}

/// Trains stage 1 on location labels (depths merged) and one stage-2 model
/// per location on depth labels. Every `(location, depth level)` pair must be
/// present.
pub fn train_hierarchical(
    method: Method,
    samples: &[LabeledSample],
    opts: &TrainOptions,
) -> Result<HierarchicalModel> {
    let mut by_location: Vec<Vec<LabeledSample>> = vec![Vec::new(); N_LOCATIONS];
    for s in samples {
        by_location[s.location].push(*s);
    }
    for (loc, group) in by_location.iter().enumerate() {
        for level in 1..=N_DEPTH_LEVELS {
            if !group.iter().any(|s| s.depth_level == level) {
                return Err(Error::Training(format!(
                    "no samples for location {loc} at depth level {level}"
                )));
            }
        }
    }
    let location = train(method, samples, LabelKind::Location, opts)?;
    let depth = by_location
        .par_iter()
        .map(|group| train(method, group, LabelKind::Depth, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(HierarchicalModel { location, depth })
}

/// `(location, depth_level)` for one feature vector.
pub fn predict_hierarchical(model: &HierarchicalModel, x: &[f64]) -> Result<(usize, usize)> {
    let location = model.location.predict(x)?;
    let stage2 = model
        .depth
        .get(location)
        .ok_or_else(|| Error::Domain(format!("stage-1 predicted unknown location {location}")))?;
    Ok((location, stage2.predict(x)?))
}
