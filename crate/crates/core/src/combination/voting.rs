//! Weighted voting over binary open/close decisions.
//!
//! Per word and side, each classifier adds weight to one or both values
//! (`false`, `true`); the larger total wins and ties give `false`. Weights
//! come from tuning data:
//!
//! - Majority: 1 for the chosen value.
//! - TotPrecision: the classifier's side accuracy for the chosen value.
//! - TagPrecision: precision of the chosen value.
//! - PrecisionRecall: precision of the chosen value, plus 1 - recall of
//!   the competing value for that value.
//! - TagPair: for every classifier pair, the tuning distribution of the
//!   gold value given the pair's outputs.
//!
//! Undefined precision or recall (zero denominator) backs off to the side
//! accuracy. A TagPair output combination never seen in tuning backs off to
//! the two classifiers' TagPrecision votes, and TagPair with a single
//! classifier is TagPrecision.
//!
//! Totals within a relative 1e-9 of each other count as tied, so sums that
//! are equal in exact arithmetic stay tied after rounding.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CombineError, StreamBundle};
use crate::chunk::{to_brackets, BracketStream, PhraseSet, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VoteMethod {
    Majority,
    TotPrecision,
    TagPrecision,
    PrecisionRecall,
    TagPair,
}

impl VoteMethod {
    pub const ALL: [VoteMethod; 5] = [
        VoteMethod::Majority,
        VoteMethod::TotPrecision,
        VoteMethod::TagPrecision,
        VoteMethod::PrecisionRecall,
        VoteMethod::TagPair,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VoteMethod::Majority => "majority",
            VoteMethod::TotPrecision => "totprecision",
            VoteMethod::TagPrecision => "tagprecision",
            VoteMethod::PrecisionRecall => "precisionrecall",
            VoteMethod::TagPair => "tagpair",
        }
    }
}

impl fmt::Display for VoteMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VoteMethod {
    type Err = CombineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VoteMethod::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase().replace(['-', '_'], ""))
            .ok_or_else(|| CombineError::UnknownMethod(s.to_string()))
    }
}

/// Tuning statistics of one classifier on one side. Arrays are indexed by
/// the boolean value (`false` = 0, `true` = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideStats {
    pub accuracy: f64,
    pub precision: [f64; 2],
    pub recall: [f64; 2],
}

/// Gold-value counts for one classifier pair and side, keyed by the pair's
/// outputs: `counts[x][y] = [gold false, gold true]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTable {
    pub first: usize,
    pub second: usize,
    pub counts: [[[usize; 2]; 2]; 2],
}

impl PairTable {
    /// Empirical distribution of the gold value, if the output pair was seen.
    pub fn distribution(&self, x: bool, y: bool) -> Option<[f64; 2]> {
        let [f, t] = self.counts[x as usize][y as usize];
        let n = f + t;
        (n > 0).then(|| [f as f64 / n as f64, t as f64 / n as f64])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteWeights {
    pub method: VoteMethod,
    /// stats[classifier][side]
    pub stats: Vec<[SideStats; 2]>,
    /// pairs[side] lists every classifier pair (i < j) in order.
    pub pairs: [Vec<PairTable>; 2],
}

impl VoteWeights {
    pub fn with_method(&self, method: VoteMethod) -> Self {
        VoteWeights { method, ..self.clone() }
    }

    pub fn classifier_count(&self) -> usize {
        self.stats.len()
    }
}

fn ratio_or(num: usize, den: usize, fallback: f64) -> f64 {
    if den == 0 {
        fallback
    } else {
        num as f64 / den as f64
    }
}

/// Estimates every table from tuning output and gold phrases.
pub fn estimate_weights(
    tune: &StreamBundle,
    gold: &[PhraseSet],
    method: VoteMethod,
) -> Result<VoteWeights, CombineError> {
    tune.check_gold(gold)?;
    let lengths = tune.lengths();
    if lengths.iter().sum::<usize>() == 0 {
        return Err(CombineError::EmptyTuning);
    }
    let truth: Vec<BracketStream> = gold.iter().zip(&lengths).map(|(g, &n)| to_brackets(g, n)).collect();
    let m = tune.classifier_count();

    let mut stats = Vec::with_capacity(m);
    for c in 0..m {
        let mut per_side = [SideStats { accuracy: 0.0, precision: [0.0; 2], recall: [0.0; 2] }; 2];
        for side in Side::BOTH {
            // confusion[out][gold]
            let mut confusion = [[0usize; 2]; 2];
            for (pred, gold) in tune.streams(c).iter().zip(&truth) {
                for (&p, &g) in pred.side(side).iter().zip(gold.side(side)) {
                    confusion[p as usize][g as usize] += 1;
                }
            }
            let total: usize = confusion.iter().flatten().sum();
            let accuracy = ratio_or(confusion[0][0] + confusion[1][1], total, 0.0);
            let mut s = SideStats { accuracy, precision: [0.0; 2], recall: [0.0; 2] };
            #[allow(clippy::needless_range_loop)] // v indexes both axes
            for v in 0..2 {
                let assigned = confusion[v][0] + confusion[v][1];
                let actual = confusion[0][v] + confusion[1][v];
                s.precision[v] = ratio_or(confusion[v][v], assigned, accuracy);
                s.recall[v] = ratio_or(confusion[v][v], actual, accuracy);
            }
            per_side[side.index()] = s;
        }
        stats.push(per_side);
    }

    let mut pairs: [Vec<PairTable>; 2] = [Vec::new(), Vec::new()];
    for side in Side::BOTH {
        for i in 0..m {
            for j in i + 1..m {
                let mut counts = [[[0usize; 2]; 2]; 2];
                for ((a, b), g) in tune.streams(i).iter().zip(tune.streams(j)).zip(&truth) {
                    for w in 0..g.len() {
                        let (x, y, t) = (a.side(side)[w], b.side(side)[w], g.side(side)[w]);
                        counts[x as usize][y as usize][t as usize] += 1;
                    }
                }
                pairs[side.index()].push(PairTable { first: i, second: j, counts });
            }
        }
    }
    Ok(VoteWeights { method, stats, pairs })
}

const TIE_TOLERANCE: f64 = 1e-9;

/// Sum in sorted order, so the result does not depend on classifier order.
fn canonical_sum(mut parts: Vec<f64>) -> f64 {
    parts.sort_by(f64::total_cmp);
    parts.into_iter().sum()
}

fn decide(outputs: &[bool], side: Side, weights: &VoteWeights) -> bool {
    let mut parts: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let s = side.index();
    let stats = |c: usize| &weights.stats[c][s];
    match weights.method {
        VoteMethod::Majority => {
            for &o in outputs {
                parts[o as usize].push(1.0);
            }
        }
        VoteMethod::TotPrecision => {
            for (c, &o) in outputs.iter().enumerate() {
                parts[o as usize].push(stats(c).accuracy);
            }
        }
        VoteMethod::TagPrecision => {
            for (c, &o) in outputs.iter().enumerate() {
                parts[o as usize].push(stats(c).precision[o as usize]);
            }
        }
        VoteMethod::PrecisionRecall => {
            for (c, &o) in outputs.iter().enumerate() {
                let other = !o as usize;
                parts[o as usize].push(stats(c).precision[o as usize]);
                parts[other].push(1.0 - stats(c).recall[other]);
            }
        }
        VoteMethod::TagPair if outputs.len() < 2 => {
            for (c, &o) in outputs.iter().enumerate() {
                parts[o as usize].push(stats(c).precision[o as usize]);
            }
        }
        VoteMethod::TagPair => {
            for table in &weights.pairs[s] {
                let (x, y) = (outputs[table.first], outputs[table.second]);
                match table.distribution(x, y) {
                    Some([f, t]) => {
                        parts[0].push(f);
                        parts[1].push(t);
                    }
                    None => {
                        parts[x as usize].push(stats(table.first).precision[x as usize]);
                        parts[y as usize].push(stats(table.second).precision[y as usize]);
                    }
                }
            }
        }
    }
    let [no, yes] = parts.map(canonical_sum);
    yes - no > TIE_TOLERANCE * (yes.abs() + no.abs())
}

/// Combines a bundle word by word with the given weights.
pub fn vote(bundle: &StreamBundle, weights: &VoteWeights) -> Result<Vec<BracketStream>, CombineError> {
    if bundle.classifier_count() != weights.classifier_count() {
        return Err(CombineError::Misaligned(format!(
            "{} classifiers, weights for {}",
            bundle.classifier_count(),
            weights.classifier_count()
        )));
    }
    if bundle.classifier_count() == 0 {
        return Err(CombineError::Misaligned("empty bundle".into()));
    }
    let lengths = bundle.lengths();
    let mut out = Vec::with_capacity(lengths.len());
    for (sentence, &n) in lengths.iter().enumerate() {
        let mut stream = BracketStream::blank(n);
        for side in Side::BOTH {
            for w in 0..n {
                stream.side_mut(side)[w] = decide(&bundle.decisions(sentence, w, side), side, weights);
            }
        }
        out.push(stream);
    }
    Ok(out)
}
