//! Trainable chunk classifiers.
//!
//! Five learners share one interface: a [`Tagger`] predicts one label per
//! word for a [`Target`], and a [`Chunker`] assembles taggers into a full
//! chunker for one output [`Representation`](crate::chunk::Representation),
//! optionally with a second cascade stage.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod chunker;
pub mod dataset;
pub mod features;
pub mod igtree;
pub mod infogain;
pub mod knn;
pub mod maxent;
pub mod nb;
pub mod tdidt;

pub use chunker::{cross_predict, fold_assignment, run_cascade, Chunker, SavedModel, Tagger, Target};
pub use features::{extract_features, FeatureSpec, FeatureVector, Slot, Window};
pub use knn::Weighting;
pub use maxent::GisConfig;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training sentence {0} has no gold annotation")]
    MissingGold(usize),
    #[error("malformed training data: {0}")]
    Shape(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("word index {index} outside sentence of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("feature spec needs predicted tags before position {0}")]
    MissingHistory(usize),
    #[error("feature spec needs first-stage tags for the whole sentence")]
    MissingGuide,
    #[error("a cascade cannot be applied to bracket output")]
    CascadeOnBrackets,
    #[error("unknown weighting `{0}`")]
    UnknownWeighting(String),
    #[error("unknown learner `{0}`")]
    UnknownKind(String),
    #[error("model file: {0}")]
    ModelFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    /// Memory-based k-nearest-neighbour.
    Knn,
    /// Oblivious information-gain tree.
    IgTree,
    /// Maximum entropy with greedy left-to-right decoding.
    MaxEnt,
    /// Top-down induced decision tree over POS context.
    Tdidt,
    /// Naive Bayes baseline.
    NaiveBayes,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 5] =
        [LearnerKind::Knn, LearnerKind::IgTree, LearnerKind::MaxEnt, LearnerKind::Tdidt, LearnerKind::NaiveBayes];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Knn => "knn",
            LearnerKind::IgTree => "igtree",
            LearnerKind::MaxEnt => "maxent",
            LearnerKind::Tdidt => "tdidt",
            LearnerKind::NaiveBayes => "nb",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = LearnerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "knn" | "mbl" | "ib1" => Ok(LearnerKind::Knn),
            "igtree" => Ok(LearnerKind::IgTree),
            "maxent" => Ok(LearnerKind::MaxEnt),
            "tdidt" | "c5" => Ok(LearnerKind::Tdidt),
            "nb" | "naivebayes" => Ok(LearnerKind::NaiveBayes),
            _ => Err(LearnerError::UnknownKind(s.to_string())),
        }
    }
}

/// Second-stage settings. Stage 2 sees a smaller word/POS context plus the
/// first-stage tags in a window around the focus word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeConfig {
    pub enabled: bool,
    /// Word and POS width on each side for stage 2.
    pub context: usize,
    /// First-stage tag width on each side.
    pub tag_window: usize,
    /// Folds for cross-predicting first-stage tags on training data.
    pub folds: usize,
    pub seed: u64,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        CascadeConfig { enabled: false, context: 2, tag_window: 2, folds: 5, seed: 0 }
    }
}

impl CascadeConfig {
    pub fn stage2_spec(&self, stage1: &FeatureSpec) -> FeatureSpec {
        FeatureSpec {
            words: Some(Window::symmetric(self.context)),
            pos: Some(Window::symmetric(self.context)),
            prev_tags: stage1.prev_tags,
            guide: Some(Window::symmetric(self.tag_window)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub kind: LearnerKind,
    pub features: FeatureSpec,
    pub k: usize,
    pub weighting: Weighting,
    pub gis: GisConfig,
    pub cascade: CascadeConfig,
}

impl LearnerConfig {
    /// Defaults per learner: four words and tags either side for the
    /// memory-based learners (with a cascade), 3 left / 2 right plus two
    /// predicted tags for MaxEnt, POS-only width 2 for the induced tree.
    pub fn default_for(kind: LearnerKind) -> Self {
        let mut config = LearnerConfig {
            kind,
            features: FeatureSpec::symmetric(4),
            k: 3,
            weighting: Weighting::InfoGain,
            gis: GisConfig::default(),
            cascade: CascadeConfig::default(),
        };
        match kind {
            LearnerKind::Knn | LearnerKind::IgTree => config.cascade.enabled = true,
            LearnerKind::MaxEnt => {
                config.features = FeatureSpec {
                    words: Some(Window::new(3, 2)),
                    pos: Some(Window::new(3, 2)),
                    prev_tags: 2,
                    guide: None,
                }
            }
            LearnerKind::Tdidt => config.features = FeatureSpec::pos_only(2),
            LearnerKind::NaiveBayes => {
                config.features = FeatureSpec { words: Some(Window::new(0, 0)), ..FeatureSpec::pos_only(2) }
            }
        }
        config
    }
}
