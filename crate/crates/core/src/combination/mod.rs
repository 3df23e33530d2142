//! Combining chunker outputs.
//!
//! Every combiner works on bracket streams: tag sequences are decoded and
//! turned into open/close decisions first, and a combined stream is paired
//! into phrases only at the end.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chunk::{BracketStream, Chunking, PhraseSet, Representation, Side};
use crate::evaluation::{evaluate_streams, EvalError};
use crate::learners::LearnerError;

mod stacking;
mod voting;

pub use stacking::{stack_apply, stack_train, MetaFeatures, MetaKind, StackConfig, StackedModel};
pub use voting::{estimate_weights, vote, SideStats, VoteMethod, VoteWeights};

#[derive(Debug, Error)]
pub enum CombineError {
    #[error("internal combination needs exactly five outputs, got {0}")]
    WrongInputCount(usize),
    #[error("internal combination needs one output per representation; {0} is missing")]
    MissingRepresentation(Representation),
    #[error("stream misalignment: {0}")]
    Misaligned(String),
    #[error("no tuning data")]
    EmptyTuning,
    #[error("cannot select {n} of {count} classifiers")]
    BadSelection { n: usize, count: usize },
    #[error("unknown classifier `{0}`")]
    UnknownClassifier(String),
    #[error("unknown combination method `{0}`")]
    UnknownMethod(String),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Aligned bracket outputs of several classifiers over the same sentences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamBundle {
    names: Vec<String>,
    /// streams[classifier][sentence]
    streams: Vec<Vec<BracketStream>>,
}

impl StreamBundle {
    pub fn new(names: Vec<String>, streams: Vec<Vec<BracketStream>>) -> Result<Self, CombineError> {
        if names.len() != streams.len() {
            return Err(CombineError::Misaligned(format!("{} names for {} classifiers", names.len(), streams.len())));
        }
        if let Some(first) = streams.first() {
            for (name, s) in names.iter().zip(&streams) {
                if s.len() != first.len() {
                    return Err(CombineError::Misaligned(format!(
                        "{name} covers {} sentences, expected {}",
                        s.len(),
                        first.len()
                    )));
                }
                for (k, (a, b)) in s.iter().zip(first).enumerate() {
                    if a.len() != b.len() {
                        return Err(CombineError::Misaligned(format!("{name}: sentence {k} length differs")));
                    }
                }
            }
        }
        Ok(StreamBundle { names, streams })
    }

    pub fn from_chunkings(names: Vec<String>, outputs: &[Vec<Chunking>]) -> Result<Self, CombineError> {
        let streams = outputs.iter().map(|o| o.iter().map(Chunking::to_bracket_stream).collect()).collect();
        StreamBundle::new(names, streams)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn classifier_count(&self) -> usize {
        self.names.len()
    }

    pub fn sentence_count(&self) -> usize {
        self.streams.first().map_or(0, Vec::len)
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.streams.first().map_or_else(Vec::new, |s| s.iter().map(BracketStream::len).collect())
    }

    pub fn streams(&self, classifier: usize) -> &[BracketStream] {
        &self.streams[classifier]
    }

    /// Output of every classifier at one sentence, word and side.
    pub fn decisions(&self, sentence: usize, word: usize, side: Side) -> Vec<bool> {
        self.streams.iter().map(|s| s[sentence].side(side)[word]).collect()
    }

    /// Sub-bundle with the named classifiers, in the given order.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<Self, CombineError> {
        let mut out_names = Vec::new();
        let mut out = Vec::new();
        for name in names {
            let i = self
                .names
                .iter()
                .position(|n| n == name.as_ref())
                .ok_or_else(|| CombineError::UnknownClassifier(name.as_ref().to_string()))?;
            out_names.push(self.names[i].clone());
            out.push(self.streams[i].clone());
        }
        Ok(StreamBundle { names: out_names, streams: out })
    }

    /// Reorders classifiers: position `k` of the result is classifier `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        StreamBundle {
            names: order.iter().map(|&i| self.names[i].clone()).collect(),
            streams: order.iter().map(|&i| self.streams[i].clone()).collect(),
        }
    }

    pub(crate) fn check_gold(&self, gold: &[PhraseSet]) -> Result<(), CombineError> {
        if gold.len() != self.sentence_count() {
            return Err(CombineError::Misaligned(format!(
                "{} gold sentences for {} bundle sentences",
                gold.len(),
                self.sentence_count()
            )));
        }
        for (k, (g, n)) in gold.iter().zip(self.lengths()).enumerate() {
            if g.check_fits(n).is_err() {
                return Err(CombineError::Misaligned(format!("gold sentence {k} exceeds its length")));
            }
        }
        Ok(())
    }
}

/// Per-word, per-side majority over the five representations of one learner.
pub fn combine_internal(outputs: &[Chunking]) -> Result<BracketStream, CombineError> {
    if outputs.len() != 5 {
        return Err(CombineError::WrongInputCount(outputs.len()));
    }
    for repr in Representation::ALL {
        if !outputs.iter().any(|o| o.representation() == repr) {
            return Err(CombineError::MissingRepresentation(repr));
        }
    }
    let len = outputs[0].len();
    if outputs.iter().any(|o| o.len() != len) {
        return Err(CombineError::Misaligned("outputs differ in length".into()));
    }
    let streams: Vec<BracketStream> = outputs.iter().map(Chunking::to_bracket_stream).collect();
    let mut combined = BracketStream::blank(len);
    for side in Side::BOTH {
        for w in 0..len {
            let yes = streams.iter().filter(|s| s.side(side)[w]).count();
            combined.side_mut(side)[w] = 2 * yes > streams.len();
        }
    }
    Ok(combined)
}

/// [`combine_internal`] over a corpus: `outputs[r][s]` is representation
/// `r`'s output for sentence `s`.
pub fn combine_internal_corpus(outputs: &[Vec<Chunking>]) -> Result<Vec<BracketStream>, CombineError> {
    let n = outputs.first().map_or(0, Vec::len);
    if outputs.iter().any(|o| o.len() != n) {
        return Err(CombineError::Misaligned("representations cover different sentence counts".into()));
    }
    (0..n)
        .map(|s| {
            let column: Vec<Chunking> = outputs.iter().map(|o| o[s].clone()).collect();
            combine_internal(&column)
        })
        .collect()
}

/// Classifiers ordered by tuning F-score, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub ranked: Vec<(String, f64)>,
    pub n: usize,
}

impl Ranking {
    pub fn selected(&self) -> Vec<String> {
        self.ranked.iter().take(self.n).map(|(name, _)| name.clone()).collect()
    }
}

/// Ranks classifiers by phrase F-score on tuning data and keeps the top `n`.
/// Equal scores are ordered by name.
pub fn rank_and_select(tune: &StreamBundle, gold: &[PhraseSet], n: usize) -> Result<Ranking, CombineError> {
    let count = tune.classifier_count();
    if n == 0 || n > count {
        return Err(CombineError::BadSelection { n, count });
    }
    tune.check_gold(gold)?;
    let mut ranked = Vec::with_capacity(count);
    for (i, name) in tune.names().iter().enumerate() {
        let report = evaluate_streams(tune.streams(i), gold)?;
        ranked.push((name.clone(), report.f_beta));
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(Ranking { ranked, n })
}
