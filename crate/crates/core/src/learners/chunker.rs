use std::collections::BTreeSet;
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Symbols};
use super::features::{extract_features, FeatureSpec, FeatureVector, Slot};
use super::igtree::IgTreeModel;
use super::knn::KnnModel;
use super::maxent::{context_predicates, MaxEntModel};
use super::nb::NbModel;
use super::tdidt::TdidtModel;
use super::{CascadeConfig, LearnerConfig, LearnerError, LearnerKind};
use crate::chunk::{encode, BracketStream, Chunking, PhraseSet, Representation, Side, Tag, TagScheme, TagSequence};
use crate::corpus::{Corpus, Sentence};

const YES: &str = "1";
const NO: &str = "0";

/// What a tagger predicts per word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    Tags(TagScheme),
    Bracket(Side),
}

impl Target {
    /// Gold labels for a sentence of `len` words.
    pub fn labels(self, gold: &PhraseSet, len: usize) -> Vec<String> {
        match self {
            Target::Tags(scheme) => encode(gold, len, scheme).tags().iter().map(|t| t.to_string()).collect(),
            Target::Bracket(side) => {
                let mut marks = vec![false; len];
                for span in gold.spans() {
                    marks[if side == Side::Open { span.start } else { span.end }] = true;
                }
                marks.into_iter().map(|m| if m { YES } else { NO }.to_string()).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Model {
    Knn(KnnModel),
    IgTree(IgTreeModel),
    MaxEnt(MaxEntModel),
    Tdidt(TdidtModel),
    NaiveBayes(NbModel),
}

/// One trained classifier producing a label per word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tagger {
    target: Target,
    spec: FeatureSpec,
    vocabulary: BTreeSet<String>,
    symbols: Symbols,
    model: Model,
}

fn sentence_gold(corpus: &Corpus) -> Result<Vec<&PhraseSet>, LearnerError> {
    corpus.sentences.iter().enumerate().map(|(i, s)| s.gold.as_ref().ok_or(LearnerError::MissingGold(i))).collect()
}

impl Tagger {
    /// Trains on gold labels. Predicted-tag slots see the gold history;
    /// `guides` supplies first-stage tags per sentence when the spec asks
    /// for them.
    pub fn train(
        config: &LearnerConfig,
        spec: &FeatureSpec,
        corpus: &Corpus,
        target: Target,
        guides: Option<&[Vec<String>]>,
    ) -> Result<Self, LearnerError> {
        if corpus.is_empty() {
            return Err(LearnerError::EmptyTrainingSet);
        }
        if let Some(g) = guides {
            if g.len() != corpus.len() {
                return Err(LearnerError::Shape(format!("{} guide sequences for {} sentences", g.len(), corpus.len())));
            }
        }
        let gold = sentence_gold(corpus)?;
        let mut vectors: Vec<FeatureVector> = Vec::with_capacity(corpus.token_count());
        let mut labels: Vec<String> = Vec::with_capacity(corpus.token_count());
        let mut vocabulary = BTreeSet::new();
        for (n, (sentence, g)) in corpus.sentences.iter().zip(gold).enumerate() {
            let sentence_labels = target.labels(g, sentence.len());
            let guide = guides.map(|gs| gs[n].as_slice());
            for i in 0..sentence.len() {
                vectors.push(extract_features(sentence, i, spec, Some(&sentence_labels), guide)?);
            }
            vocabulary.extend(sentence.words().map(str::to_string));
            labels.extend(sentence_labels);
        }

        let mut symbols = Symbols::new(spec.arity());
        let model = if config.kind == LearnerKind::MaxEnt {
            let contexts: Vec<Vec<String>> = vectors.iter().map(context_predicates).collect();
            Model::MaxEnt(MaxEntModel::train(&contexts, &labels, &config.gis)?.0)
        } else {
            let rows: Vec<Vec<u32>> = vectors.iter().map(|v| symbols.intern(v)).collect();
            let data = Dataset::new(rows, &labels)?;
            match config.kind {
                LearnerKind::Knn => Model::Knn(KnnModel::train(&data, config.k, config.weighting)?),
                LearnerKind::IgTree => Model::IgTree(IgTreeModel::train(&data)?),
                LearnerKind::Tdidt => Model::Tdidt(TdidtModel::train(&data)?),
                LearnerKind::NaiveBayes => Model::NaiveBayes(NbModel::train(&data)?),
                LearnerKind::MaxEnt => unreachable!(),
            }
        };
        Ok(Tagger { target, spec: *spec, vocabulary, symbols, model })
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn spec(&self) -> &FeatureSpec {
        &self.spec
    }

    fn classify(&self, fv: &FeatureVector) -> String {
        match &self.model {
            Model::MaxEnt(m) => m.classes().name(m.classify(&context_predicates(fv))).to_string(),
            model => {
                let x = self.symbols.encode(fv);
                match model {
                    Model::Knn(m) => m.classes().name(m.classify(&x)),
                    Model::IgTree(m) => m.classes().name(m.classify(&x)),
                    Model::Tdidt(m) => m.classes().name(m.classify(&x)),
                    Model::NaiveBayes(m) => m.classes().name(m.classify(&x)),
                    Model::MaxEnt(_) => unreachable!(),
                }
                .to_string()
            }
        }
    }

    /// Greedy left-to-right labelling.
    pub fn predict(&self, sentence: &Sentence, guide: Option<&[String]>) -> Result<Vec<String>, LearnerError> {
        let mut history: Vec<String> = Vec::with_capacity(sentence.len());
        for i in 0..sentence.len() {
            let mut fv = extract_features(sentence, i, &self.spec, Some(&history), guide)?;
            fv.mask_unknown(&self.vocabulary);
            history.push(self.classify(&fv));
        }
        Ok(history)
    }
}

/// A learner trained for one output representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Chunker {
    Tags { scheme: TagScheme, stage1: Tagger, stage2: Option<Tagger> },
    Brackets { open: Tagger, close: Tagger },
}

impl Chunker {
    /// Trains for `repr`. The cascade, when enabled in `config`, applies to
    /// tagging schemes only and is skipped for brackets.
    pub fn train(config: &LearnerConfig, corpus: &Corpus, repr: Representation) -> Result<Self, LearnerError> {
        match repr {
            Representation::Tags(scheme) => {
                let target = Target::Tags(scheme);
                let stage1 = Tagger::train(config, &config.features, corpus, target, None)?;
                let stage2 = if config.cascade.enabled {
                    let c = &config.cascade;
                    let guides = cross_predict(config, &config.features, corpus, target, c.folds, c.seed)?;
                    let spec = c.stage2_spec(&config.features);
                    Some(Tagger::train(config, &spec, corpus, target, Some(&guides))?)
                } else {
                    None
                };
                Ok(Chunker::Tags { scheme, stage1, stage2 })
            }
            Representation::Brackets => Ok(Chunker::Brackets {
                open: Tagger::train(config, &config.features, corpus, Target::Bracket(Side::Open), None)?,
                close: Tagger::train(config, &config.features, corpus, Target::Bracket(Side::Close), None)?,
            }),
        }
    }

    pub fn representation(&self) -> Representation {
        match self {
            Chunker::Tags { scheme, .. } => Representation::Tags(*scheme),
            Chunker::Brackets { .. } => Representation::Brackets,
        }
    }

    /// First-stage output only (identical to [`predict`](Self::predict)
    /// without a cascade).
    pub fn predict_stage1(&self, sentence: &Sentence) -> Result<Chunking, LearnerError> {
        match self {
            Chunker::Tags { scheme, stage1, .. } => to_tags(*scheme, &stage1.predict(sentence, None)?),
            Chunker::Brackets { .. } => self.predict(sentence),
        }
    }

    pub fn predict(&self, sentence: &Sentence) -> Result<Chunking, LearnerError> {
        match self {
            Chunker::Tags { scheme, stage1, stage2 } => {
                let first = stage1.predict(sentence, None)?;
                let labels = match stage2 {
                    Some(s2) => s2.predict(sentence, Some(&first))?,
                    None => first,
                };
                to_tags(*scheme, &labels)
            }
            Chunker::Brackets { open, close } => {
                let o = open.predict(sentence, None)?;
                let c = close.predict(sentence, None)?;
                Ok(Chunking::Brackets(BracketStream {
                    open: o.iter().map(|l| l == YES).collect(),
                    close: c.iter().map(|l| l == YES).collect(),
                }))
            }
        }
    }

    /// Predicts every sentence, in parallel.
    pub fn predict_corpus(&self, corpus: &Corpus) -> Result<Vec<Chunking>, LearnerError> {
        corpus.sentences.par_iter().map(|s| self.predict(s)).collect()
    }
}

fn to_tags(scheme: TagScheme, labels: &[String]) -> Result<Chunking, LearnerError> {
    let tags = labels
        .iter()
        .map(|l| l.parse::<Tag>().map_err(|e| LearnerError::Shape(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    TagSequence::new(scheme, tags).map(Chunking::Tags).map_err(|e| LearnerError::Shape(e.to_string()))
}

/// Fold index per sentence: a seeded shuffle dealt round-robin.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let folds = folds.max(1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for (j, &i) in order.iter().enumerate() {
        fold[i] = j % folds;
    }
    fold
}

/// Out-of-fold predictions on the training corpus: each sentence is
/// labelled by a tagger that did not see it. Corpora with fewer than two
/// sentences fall back to in-sample predictions.
pub fn cross_predict(
    config: &LearnerConfig,
    spec: &FeatureSpec,
    corpus: &Corpus,
    target: Target,
    folds: usize,
    seed: u64,
) -> Result<Vec<Vec<String>>, LearnerError> {
    let folds = folds.min(corpus.len());
    if folds < 2 {
        let tagger = Tagger::train(config, spec, corpus, target, None)?;
        return corpus.sentences.iter().map(|s| tagger.predict(s, None)).collect();
    }
    let assignment = fold_assignment(corpus.len(), folds, seed);
    let mut out: Vec<Vec<String>> = vec![Vec::new(); corpus.len()];
    let per_fold: Vec<Vec<(usize, Vec<String>)>> = (0..folds)
        .into_par_iter()
        .map(|f| {
            let train = Corpus::new(
                corpus.sentences.iter().zip(&assignment).filter(|(_, &a)| a != f).map(|(s, _)| s.clone()).collect(),
            );
            let tagger = Tagger::train(config, spec, &train, target, None)?;
            corpus
                .sentences
                .iter()
                .enumerate()
                .filter(|(i, _)| assignment[*i] == f)
                .map(|(i, s)| Ok((i, tagger.predict(s, None)?)))
                .collect()
        })
        .collect::<Result<_, LearnerError>>()?;
    for (i, labels) in per_fold.into_iter().flatten() {
        out[i] = labels;
    }
    Ok(out)
}

/// Trains `config`'s learner with the given cascade settings on `train` and
/// labels `input`.
pub fn run_cascade(
    config: &LearnerConfig,
    train: &Corpus,
    input: &Corpus,
    repr: Representation,
    cascade: &CascadeConfig,
) -> Result<Vec<Chunking>, LearnerError> {
    if cascade.enabled && repr == Representation::Brackets {
        return Err(LearnerError::CascadeOnBrackets);
    }
    let config = LearnerConfig { cascade: *cascade, ..config.clone() };
    Chunker::train(&config, train, repr)?.predict_corpus(input)
}

const MODEL_FORMAT: &str = "basenp-chunker";
const MODEL_VERSION: u32 = 1;

/// Self-describing model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub format: String,
    pub version: u32,
    pub config: LearnerConfig,
    pub chunker: Chunker,
}

impl SavedModel {
    pub fn new(config: LearnerConfig, chunker: Chunker) -> Self {
        SavedModel { format: MODEL_FORMAT.to_string(), version: MODEL_VERSION, config, chunker }
    }

    pub fn save<W: Write>(&self, sink: W) -> Result<(), LearnerError> {
        serde_json::to_writer(sink, self).map_err(|e| LearnerError::ModelFile(e.to_string()))
    }

    pub fn load<R: Read>(source: R) -> Result<Self, LearnerError> {
        let model: SavedModel = serde_json::from_reader(source).map_err(|e| LearnerError::ModelFile(e.to_string()))?;
        if model.format != MODEL_FORMAT {
            return Err(LearnerError::ModelFile(format!("unexpected format `{}`", model.format)));
        }
        if model.version != MODEL_VERSION {
            return Err(LearnerError::ModelFile(format!("unsupported version {}", model.version)));
        }
        Ok(model)
    }
}

/// Which slots a tagger reads, for diagnostics.
pub fn describe_slots(spec: &FeatureSpec) -> String {
    spec.slots().iter().map(Slot::to_string).collect::<Vec<_>>().join(" ")
}
