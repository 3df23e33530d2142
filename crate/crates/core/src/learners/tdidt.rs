//! Top-down decision tree induction with multiway splits on information gain.
//! No value grouping and no pruning.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dataset::{Classes, Dataset};
use super::infogain::information_gain;
use super::LearnerError;

const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TdidtNode {
    Leaf { distribution: Vec<usize>, class: u32 },
    Split { feature: usize, distribution: Vec<usize>, class: u32, children: BTreeMap<u32, TdidtNode> },
}

impl TdidtNode {
    pub fn class(&self) -> u32 {
        match self {
            TdidtNode::Leaf { class, .. } | TdidtNode::Split { class, .. } => *class,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TdidtNode::Leaf { .. } => 0,
            TdidtNode::Split { children, .. } => 1 + children.values().map(TdidtNode::depth).max().unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TdidtModel {
    root: TdidtNode,
    classes: Classes,
}

impl TdidtModel {
    pub fn train(data: &Dataset) -> Result<Self, LearnerError> {
        if data.is_empty() {
            return Err(LearnerError::EmptyTrainingSet);
        }
        let all: Vec<usize> = (0..data.len()).collect();
        let available: Vec<usize> = (0..data.arity).collect();
        let root = grow(data, &all, &available);
        Ok(TdidtModel { root, classes: data.classes.clone() })
    }

    pub fn root(&self) -> &TdidtNode {
        &self.root
    }

    pub fn classes(&self) -> &Classes {
        &self.classes
    }

    /// Unseen values stop the descent at the current node's majority class.
    pub fn classify(&self, x: &[u32]) -> u32 {
        let mut node = &self.root;
        loop {
            match node {
                TdidtNode::Leaf { class, .. } => return *class,
                TdidtNode::Split { feature, children, class, .. } => match children.get(&x[*feature]) {
                    Some(child) => node = child,
                    None => return *class,
                },
            }
        }
    }
}

fn grow(data: &Dataset, members: &[usize], available: &[usize]) -> TdidtNode {
    let mut distribution = vec![0usize; data.classes.len()];
    for &i in members {
        distribution[data.labels[i] as usize] += 1;
    }
    let class = data.classes.best(&distribution);
    let pure = distribution.iter().filter(|&&c| c > 0).count() <= 1;
    if pure || available.is_empty() {
        return TdidtNode::Leaf { distribution, class };
    }
    let labels: Vec<u32> = members.iter().map(|&i| data.labels[i]).collect();
    let mut best: Option<(usize, f64)> = None;
    for &f in available {
        let column: Vec<u32> = members.iter().map(|&i| data.rows[i][f]).collect();
        let gain = information_gain(&column, &labels);
        if best.is_none_or(|(_, g)| gain > g) {
            best = Some((f, gain));
        }
    }
    let (feature, gain) = best.expect("available is non-empty");
    if gain <= MIN_GAIN {
        return TdidtNode::Leaf { distribution, class };
    }
    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for &i in members {
        groups.entry(data.rows[i][feature]).or_default().push(i);
    }
    let rest: Vec<usize> = available.iter().copied().filter(|&f| f != feature).collect();
    let children = groups.into_iter().map(|(v, group)| (v, grow(data, &group, &rest))).collect();
    TdidtNode::Split { feature, distribution, class, children }
}
