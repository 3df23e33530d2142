//! Memory-based classification with weighted overlap distance.
//!
//! Distance between two instances is the summed weight of the features on
//! which they differ. The neighbourhood is every stored instance at one of the
//! `k` smallest distinct distances, and the majority class in it wins.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::dataset::{Classes, Dataset};
use super::infogain::{gain_ratio, information_gain};
use super::LearnerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    #[default]
    InfoGain,
    GainRatio,
    /// All weights 1: plain overlap distance.
    Uniform,
}

impl std::str::FromStr for Weighting {
    type Err = LearnerError;

    fn from_str(s: &str) -> Result<Self, LearnerError> {
        match s.to_ascii_lowercase().as_str() {
            "infogain" | "ig" => Ok(Weighting::InfoGain),
            "gainratio" | "gr" => Ok(Weighting::GainRatio),
            "uniform" | "overlap" => Ok(Weighting::Uniform),
            _ => Err(LearnerError::UnknownWeighting(s.to_string())),
        }
    }
}

// distances closer than this are treated as the same distance
const DISTANCE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    k: usize,
    weights: Vec<f64>,
    /// Distinct feature vectors with per-class occurrence counts.
    instances: Vec<Vec<u32>>,
    counts: Vec<Vec<u32>>,
    classes: Classes,
}

pub fn feature_weights(data: &Dataset, weighting: Weighting) -> Vec<f64> {
    (0..data.arity)
        .map(|f| match weighting {
            Weighting::InfoGain => information_gain(&data.column(f), &data.labels),
            Weighting::GainRatio => gain_ratio(&data.column(f), &data.labels),
            Weighting::Uniform => 1.0,
        })
        .collect()
}

impl KnnModel {
    pub fn train(data: &Dataset, k: usize, weighting: Weighting) -> Result<Self, LearnerError> {
        let weights = feature_weights(data, weighting);
        KnnModel::with_weights(data, k, weights)
    }

    pub fn with_weights(data: &Dataset, k: usize, weights: Vec<f64>) -> Result<Self, LearnerError> {
        if k == 0 {
            return Err(LearnerError::Config("k must be at least 1".into()));
        }
        if data.is_empty() {
            return Err(LearnerError::EmptyTrainingSet);
        }
        if weights.len() != data.arity || weights.iter().any(|w| w.is_nan() || *w < 0.0) {
            return Err(LearnerError::Config("weights must be non-negative, one per feature".into()));
        }
        let n_classes = data.classes.len();
        let mut index: HashMap<&[u32], usize> = HashMap::new();
        let mut instances: Vec<Vec<u32>> = Vec::new();
        let mut counts: Vec<Vec<u32>> = Vec::new();
        for (row, &label) in data.rows.iter().zip(&data.labels) {
            let slot = *index.entry(row.as_slice()).or_insert_with(|| {
                instances.push(row.clone());
                counts.push(vec![0; n_classes]);
                instances.len() - 1
            });
            counts[slot][label as usize] += 1;
        }
        Ok(KnnModel { k, weights, instances, counts, classes: data.classes.clone() })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn classes(&self) -> &Classes {
        &self.classes
    }

    /// Number of stored training instances, duplicates included.
    pub fn instance_count(&self) -> usize {
        self.counts.iter().flatten().map(|&c| c as usize).sum()
    }

    pub fn distance(&self, a: &[u32], b: &[u32]) -> f64 {
        a.iter().zip(b).zip(&self.weights).filter(|((x, y), _)| x != y).map(|(_, w)| w).sum()
    }

    /// Class counts at each of the `k` nearest distinct distances.
    pub fn neighbourhood(&self, x: &[u32]) -> Vec<(f64, Vec<u32>)> {
        let mut shells: Vec<(f64, Vec<u32>)> = Vec::with_capacity(self.k + 1);
        for (inst, counts) in self.instances.iter().zip(&self.counts) {
            let d = self.distance(x, inst);
            let pos = shells.partition_point(|(sd, _)| *sd < d - DISTANCE_EPS);
            if pos < shells.len() && (shells[pos].0 - d).abs() <= DISTANCE_EPS {
                for (acc, c) in shells[pos].1.iter_mut().zip(counts) {
                    *acc += c;
                }
            } else if pos < self.k {
                shells.insert(pos, (d, counts.clone()));
                shells.truncate(self.k);
            }
        }
        shells
    }

    pub fn class_votes(&self, x: &[u32]) -> Vec<u32> {
        let mut votes = vec![0u32; self.classes.len()];
        for (_, counts) in self.neighbourhood(x) {
            for (v, c) in votes.iter_mut().zip(&counts) {
                *v += c;
            }
        }
        votes
    }

    pub fn classify(&self, x: &[u32]) -> u32 {
        self.classes.best(&self.class_votes(x))
    }
}
