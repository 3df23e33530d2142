//! Stacked combination: a second-level classifier learns, per side, the
//! gold bracket decision from the first-level decisions on tuning data.
//!
//! One meta-instance is built per word and side, so a tuning set of `W`
//! words yields `2W` instances split over the two meta-models.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CombineError, StreamBundle};
use crate::chunk::{to_brackets, BracketStream, PhraseSet, Side};
use crate::corpus::Corpus;
use crate::learners::dataset::{Dataset, UNSEEN};
use crate::learners::igtree::IgTreeModel;
use crate::learners::knn::{KnnModel, Weighting};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetaKind {
    MemoryBased,
    DecisionTree,
}

impl fmt::Display for MetaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetaKind::MemoryBased => "memorybased",
            MetaKind::DecisionTree => "decisiontree",
        })
    }
}

impl FromStr for MetaKind {
    type Err = CombineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "memorybased" | "mbl" | "knn" => Ok(MetaKind::MemoryBased),
            "decisiontree" | "tree" | "igtree" => Ok(MetaKind::DecisionTree),
            _ => Err(CombineError::UnknownMethod(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetaFeatures {
    /// The first-level decisions only.
    TagsOnly,
    /// The decisions plus the POS tag of the focus word.
    TagsPos,
}

impl fmt::Display for MetaFeatures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetaFeatures::TagsOnly => "tags",
            MetaFeatures::TagsPos => "tags+pos",
        })
    }
}

impl FromStr for MetaFeatures {
    type Err = CombineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tags" | "tagsonly" => Ok(MetaFeatures::TagsOnly),
            "tags+pos" | "tagspos" => Ok(MetaFeatures::TagsPos),
            _ => Err(CombineError::UnknownMethod(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StackConfig {
    pub kind: MetaKind,
    pub features: MetaFeatures,
    /// Neighbourhood size for the memory-based meta-learner.
    pub k: usize,
    pub weighting: Weighting,
}

impl Default for StackConfig {
    fn default() -> Self {
        StackConfig {
            kind: MetaKind::MemoryBased,
            features: MetaFeatures::TagsOnly,
            k: 1,
            weighting: Weighting::InfoGain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum MetaModel {
    Knn(KnnModel),
    Tree(IgTreeModel),
}

impl MetaModel {
    fn train(data: &Dataset, config: &StackConfig) -> Result<Self, CombineError> {
        Ok(match config.kind {
            MetaKind::MemoryBased => MetaModel::Knn(KnnModel::train(data, config.k, config.weighting)?),
            MetaKind::DecisionTree => MetaModel::Tree(IgTreeModel::train(data)?),
        })
    }

    fn predict(&self, x: &[u32]) -> bool {
        let (classes, id) = match self {
            MetaModel::Knn(m) => (m.classes(), m.classify(x)),
            MetaModel::Tree(m) => (m.classes(), m.classify(x)),
        };
        classes.name(id) == "1"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedModel {
    config: StackConfig,
    classifiers: usize,
    pos: BTreeMap<String, u32>,
    /// models[side]
    models: [MetaModel; 2],
    instance_count: usize,
}

impl StackedModel {
    pub fn config(&self) -> &StackConfig {
        &self.config
    }

    pub fn classifier_count(&self) -> usize {
        self.classifiers
    }

    /// Meta-instances over both sides.
    pub fn instance_count(&self) -> usize {
        self.instance_count
    }
}

fn check_corpus(bundle: &StreamBundle, corpus: &Corpus) -> Result<(), CombineError> {
    if corpus.lengths() != bundle.lengths() {
        return Err(CombineError::Misaligned("corpus and bundle sentences differ".into()));
    }
    Ok(())
}

fn meta_rows(
    bundle: &StreamBundle,
    corpus: &Corpus,
    features: MetaFeatures,
    side: Side,
    mut pos_id: impl FnMut(&str) -> u32,
) -> Vec<Vec<u32>> {
    let mut rows = Vec::with_capacity(corpus.token_count());
    for (s, sentence) in corpus.sentences.iter().enumerate() {
        for (w, token) in sentence.tokens.iter().enumerate() {
            let mut row: Vec<u32> = bundle.decisions(s, w, side).into_iter().map(u32::from).collect();
            if features == MetaFeatures::TagsPos {
                row.push(pos_id(&token.pos));
            }
            rows.push(row);
        }
    }
    rows
}

/// Trains both meta-models on tuning output, gold phrases and the tuning corpus.
pub fn stack_train(
    tune: &StreamBundle,
    gold: &[PhraseSet],
    corpus: &Corpus,
    config: &StackConfig,
) -> Result<StackedModel, CombineError> {
    tune.check_gold(gold)?;
    check_corpus(tune, corpus)?;
    if tune.classifier_count() == 0 {
        return Err(CombineError::Misaligned("empty bundle".into()));
    }
    if corpus.token_count() == 0 {
        return Err(CombineError::EmptyTuning);
    }
    let truth: Vec<BracketStream> = gold.iter().zip(corpus.lengths()).map(|(g, n)| to_brackets(g, n)).collect();
    let mut pos: BTreeMap<String, u32> = BTreeMap::new();
    let mut models = Vec::with_capacity(2);
    let mut instance_count = 0;
    for side in Side::BOTH {
        let rows = meta_rows(tune, corpus, config.features, side, |p| {
            let next = pos.len() as u32;
            *pos.entry(p.to_string()).or_insert(next)
        });
        let labels: Vec<String> =
            truth.iter().flat_map(|t| t.side(side).iter().map(|&b| if b { "1" } else { "0" }.to_string())).collect();
        instance_count += rows.len();
        models.push(MetaModel::train(&Dataset::new(rows, &labels)?, config)?);
    }
    let close = models.pop().expect("two sides");
    let open = models.pop().expect("two sides");
    Ok(StackedModel {
        config: *config,
        classifiers: tune.classifier_count(),
        pos,
        models: [open, close],
        instance_count,
    })
}

/// Applies a trained stack to new first-level output.
pub fn stack_apply(
    model: &StackedModel,
    test: &StreamBundle,
    corpus: &Corpus,
) -> Result<Vec<BracketStream>, CombineError> {
    if test.classifier_count() != model.classifiers {
        return Err(CombineError::Misaligned(format!(
            "{} classifiers, model trained on {}",
            test.classifier_count(),
            model.classifiers
        )));
    }
    check_corpus(test, corpus)?;
    let mut out: Vec<BracketStream> = corpus.lengths().into_iter().map(BracketStream::blank).collect();
    for side in Side::BOTH {
        let rows =
            meta_rows(test, corpus, model.config.features, side, |p| model.pos.get(p).copied().unwrap_or(UNSEEN));
        let mut rows = rows.into_iter();
        for stream in &mut out {
            for slot in stream.side_mut(side) {
                let row = rows.next().expect("one row per word");
                *slot = model.models[side.index()].predict(&row);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Sentence, Token};

    fn corpus(lengths: &[usize]) -> Corpus {
        Corpus::new(
            lengths
                .iter()
                .map(|&n| {
                    let tokens = (0..n)
                        .map(|i| Token::new(format!("w{i}"), if i % 2 == 0 { "NN" } else { "DT" }).unwrap())
                        .collect();
                    Sentence::new(tokens, None).unwrap()
                })
                .collect(),
        )
    }

    #[test]
    fn unanimous_inputs_are_reproduced() {
        let gold = vec![PhraseSet::from_pairs(&[(0, 1), (3, 3)]).unwrap()];
        let s = to_brackets(&gold[0], 5);
        let b = StreamBundle::new(vec!["a".into(), "b".into(), "c".into()], vec![vec![s.clone()]; 3]).unwrap();
        let c = corpus(&[5]);
        for kind in [MetaKind::MemoryBased, MetaKind::DecisionTree] {
            for features in [MetaFeatures::TagsOnly, MetaFeatures::TagsPos] {
                let config = StackConfig { kind, features, ..StackConfig::default() };
                let m = stack_train(&b, &gold, &c, &config).unwrap();
                assert_eq!(m.instance_count(), 10);
                assert_eq!(stack_apply(&m, &b, &c).unwrap(), vec![s.clone()]);
            }
        }
    }

    #[test]
    fn learns_to_trust_the_reliable_classifier() {
        // classifier "good" is always right, "bad" always inverted
        let gold = vec![PhraseSet::from_pairs(&[(0, 0), (2, 3)]).unwrap()];
        let truth = to_brackets(&gold[0], 5);
        let inverted = BracketStream {
            open: truth.open.iter().map(|b| !b).collect(),
            close: truth.close.iter().map(|b| !b).collect(),
        };
        let b =
            StreamBundle::new(vec!["good".into(), "bad".into()], vec![vec![truth.clone()], vec![inverted]]).unwrap();
        let c = corpus(&[5]);
        let m = stack_train(&b, &gold, &c, &StackConfig::default()).unwrap();
        assert_eq!(stack_apply(&m, &b, &c).unwrap(), vec![truth]);
    }

    #[test]
    fn classifier_count_must_match() {
        let gold = vec![PhraseSet::empty()];
        let b = StreamBundle::new(vec!["a".into()], vec![vec![BracketStream::blank(2)]]).unwrap();
        let c = corpus(&[2]);
        let m = stack_train(&b, &gold, &c, &StackConfig::default()).unwrap();
        let b2 = StreamBundle::new(vec!["a".into(), "b".into()], vec![vec![BracketStream::blank(2)]; 2]).unwrap();
        assert!(stack_apply(&m, &b2, &c).is_err());
    }
}
