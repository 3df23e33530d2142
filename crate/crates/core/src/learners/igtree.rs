//! Oblivious decision tree over a global feature order.
//!
//! Features are tested in order of decreasing information gain, the same
//! order on every path. Each node stores the majority class of the training
//! instances that reach it; classification returns the default of the
//! deepest node whose value test succeeded.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dataset::{Classes, Dataset};
use super::infogain::information_gain;
use super::LearnerError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IgNode {
    pub default: u32,
    pub children: BTreeMap<u32, IgNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgTreeModel {
    order: Vec<usize>,
    gains: Vec<f64>,
    root: IgNode,
    classes: Classes,
}

/// Feature indices by decreasing gain; equal gains keep index order.
pub fn gain_order(gains: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]).then(a.cmp(&b)));
    order
}

impl IgTreeModel {
    pub fn train(data: &Dataset) -> Result<Self, LearnerError> {
        if data.is_empty() {
            return Err(LearnerError::EmptyTrainingSet);
        }
        let gains: Vec<f64> = (0..data.arity).map(|f| information_gain(&data.column(f), &data.labels)).collect();
        let order = gain_order(&gains);
        let all: Vec<usize> = (0..data.len()).collect();
        let root = build(data, &order, 0, &all);
        Ok(IgTreeModel { order, gains, root, classes: data.classes.clone() })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn root(&self) -> &IgNode {
        &self.root
    }

    pub fn classes(&self) -> &Classes {
        &self.classes
    }

    pub fn classify(&self, x: &[u32]) -> u32 {
        let mut node = &self.root;
        for &f in &self.order {
            match node.children.get(&x[f]) {
                Some(child) => node = child,
                None => break,
            }
        }
        node.default
    }
}

fn build(data: &Dataset, order: &[usize], depth: usize, members: &[usize]) -> IgNode {
    let mut counts = vec![0usize; data.classes.len()];
    for &i in members {
        counts[data.labels[i] as usize] += 1;
    }
    let default = data.classes.best(&counts);
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    let mut children = BTreeMap::new();
    if !pure && depth < order.len() {
        let f = order[depth];
        let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for &i in members {
            groups.entry(data.rows[i][f]).or_default().push(i);
        }
        for (value, group) in groups {
            children.insert(value, build(data, order, depth + 1, &group));
        }
    }
    IgNode { default, children }
}
