//! Naive Bayes baseline with add-one smoothed conditionals. Exists to give
//! the ensemble a weaker member.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dataset::{Classes, Dataset, UNSEEN};
use super::LearnerError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    classes: Classes,
    class_counts: Vec<usize>,
    total: usize,
    /// Per feature: value -> per-class counts.
    tables: Vec<BTreeMap<u32, Vec<usize>>>,
}

impl NbModel {
    pub fn train(data: &Dataset) -> Result<Self, LearnerError> {
        if data.is_empty() {
            return Err(LearnerError::EmptyTrainingSet);
        }
        let n_classes = data.classes.len();
        let mut class_counts = vec![0; n_classes];
        let mut tables = vec![BTreeMap::new(); data.arity];
        for (row, &label) in data.rows.iter().zip(&data.labels) {
            class_counts[label as usize] += 1;
            for (table, &v) in tables.iter_mut().zip(row) {
                table.entry(v).or_insert_with(|| vec![0; n_classes])[label as usize] += 1;
            }
        }
        Ok(NbModel { classes: data.classes.clone(), class_counts, total: data.len(), tables })
    }

    pub fn classes(&self) -> &Classes {
        &self.classes
    }

    pub fn prior(&self, class: u32) -> f64 {
        self.class_counts[class as usize] as f64 / self.total as f64
    }

    /// Smoothed P(value | class) for feature `f`.
    pub fn conditional(&self, f: usize, value: u32, class: u32) -> f64 {
        let table = &self.tables[f];
        let count = table.get(&value).map_or(0, |c| c[class as usize]);
        (count + 1) as f64 / (self.class_counts[class as usize] + table.len()) as f64
    }

    /// Unnormalised log posterior per class; unseen values contribute nothing.
    pub fn log_scores(&self, x: &[u32]) -> Vec<f64> {
        (0..self.classes.len() as u32)
            .map(|c| {
                let mut s = self.prior(c).ln();
                for (f, &v) in x.iter().enumerate() {
                    if v != UNSEEN && self.tables[f].contains_key(&v) {
                        s += self.conditional(f, v, c).ln();
                    }
                }
                s
            })
            .collect()
    }

    pub fn posterior(&self, x: &[u32]) -> Vec<f64> {
        let scores = self.log_scores(x);
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let z: f64 = exp.iter().sum();
        exp.into_iter().map(|e| e / z).collect()
    }

    pub fn classify(&self, x: &[u32]) -> u32 {
        self.classes.best(&self.log_scores(x))
    }
}
