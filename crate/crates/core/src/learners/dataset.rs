//! Symbol-encoded training data shared by the slot-based learners.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::features::FeatureVector;
use super::LearnerError;

/// Encoded value for a feature value never seen in training.
pub const UNSEEN: u32 = u32::MAX;

/// Class inventory with the global tie-breaking order.
///
/// Ids follow lexicographic name order. Ties between classes resolve to the
/// one with the higher training frequency, then the lexicographically
/// smaller name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classes {
    names: Vec<String>,
    counts: Vec<usize>,
    /// rank[c]: position of class c in the tie-breaking order.
    rank: Vec<usize>,
}

impl Classes {
    /// Builds the inventory from training labels and returns their ids.
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> (Classes, Vec<u32>) {
        let names: Vec<String> =
            labels.iter().map(|l| l.as_ref().to_string()).collect::<BTreeSet<_>>().into_iter().collect();
        let index: HashMap<&str, u32> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i as u32)).collect();
        let ids: Vec<u32> = labels.iter().map(|l| index[l.as_ref()]).collect();
        let mut counts = vec![0; names.len()];
        for &id in &ids {
            counts[id as usize] += 1;
        }
        let mut order: Vec<usize> = (0..names.len()).collect();
        order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
        let mut rank = vec![0; names.len()];
        for (r, &c) in order.iter().enumerate() {
            rank[c] = r;
        }
        (Classes { names, counts, rank }, ids)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Option<u32> {
        self.names.iter().position(|n| n == name).map(|i| i as u32)
    }

    pub fn count(&self, id: u32) -> usize {
        self.counts[id as usize]
    }

    /// The most frequent training class.
    pub fn majority(&self) -> u32 {
        self.rank.iter().position(|&r| r == 0).unwrap_or(0) as u32
    }

    /// Argmax over per-class scores with the global tie-break.
    pub fn best<T: PartialOrd + Copy>(&self, scores: &[T]) -> u32 {
        let mut best = 0usize;
        for c in 1..scores.len() {
            let better = scores[c] > scores[best] || (scores[c] == scores[best] && self.rank[c] < self.rank[best]);
            if better {
                best = c;
            }
        }
        best as u32
    }
}

/// Per-slot string interning.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Symbols {
    tables: Vec<BTreeMap<String, u32>>,
}

impl Symbols {
    pub fn new(arity: usize) -> Self {
        Symbols { tables: vec![BTreeMap::new(); arity] }
    }

    pub fn arity(&self) -> usize {
        self.tables.len()
    }

    /// Distinct training values of feature `f`.
    pub fn value_count(&self, f: usize) -> usize {
        self.tables[f].len()
    }

    pub fn intern(&mut self, fv: &FeatureVector) -> Vec<u32> {
        fv.values
            .iter()
            .zip(&mut self.tables)
            .map(|((_, v), table)| {
                let next = table.len() as u32;
                *table.entry(v.clone()).or_insert(next)
            })
            .collect()
    }

    pub fn encode(&self, fv: &FeatureVector) -> Vec<u32> {
        fv.values.iter().zip(&self.tables).map(|((_, v), table)| table.get(v).copied().unwrap_or(UNSEEN)).collect()
    }
}

/// Fixed-arity instances with class ids.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub rows: Vec<Vec<u32>>,
    pub labels: Vec<u32>,
    pub classes: Classes,
    pub arity: usize,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<u32>>, labels: &[String]) -> Result<Self, LearnerError> {
        if rows.is_empty() {
            return Err(LearnerError::EmptyTrainingSet);
        }
        if rows.len() != labels.len() {
            return Err(LearnerError::Shape(format!("{} rows, {} labels", rows.len(), labels.len())));
        }
        let arity = rows[0].len();
        if rows.iter().any(|r| r.len() != arity) {
            return Err(LearnerError::Shape("rows of differing arity".into()));
        }
        let (classes, labels) = Classes::from_labels(labels);
        Ok(Dataset { rows, labels, classes, arity })
    }

    /// Builds a dataset directly from small integer rows and label names.
    pub fn from_table(rows: &[&[u32]], labels: &[&str]) -> Result<Self, LearnerError> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        Dataset::new(rows.iter().map(|r| r.to_vec()).collect(), &labels)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, f: usize) -> Vec<u32> {
        self.rows.iter().map(|r| r[f]).collect()
    }
}
