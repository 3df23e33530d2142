//! Experiment configuration, read from TOML.
//!
//! ```toml
//! train = "train.txt"
//! test = "test.txt"
//! output = "out"
//! seed = 0
//!
//! [split]
//! train_fraction = 0.9
//! mode = "prefix"
//!
//! [combination]
//! methods = ["majority", "tagpair", "stack-mbl-pos"]
//! top_n = [3, 4, 5]
//!
//! [[learner]]
//! name = "mbl"
//! kind = "knn"
//! internal = true
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use basenp::combination::{MetaFeatures, MetaKind, StackConfig, VoteMethod};
use basenp::learners::{LearnerConfig, LearnerKind, Weighting, Window};
use basenp::{Representation, SplitMode, SplitSpec};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    train: PathBuf,
    test: PathBuf,
    #[serde(default = "default_output")]
    output: PathBuf,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    split: RawSplit,
    #[serde(default)]
    combination: RawCombination,
    #[serde(default, rename = "learner")]
    learners: Vec<RawLearner>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSplit {
    #[serde(default = "default_fraction")]
    train_fraction: f64,
    #[serde(default = "default_mode")]
    mode: SplitMode,
}

fn default_fraction() -> f64 {
    0.9
}

fn default_mode() -> SplitMode {
    SplitMode::Prefix
}

impl Default for RawSplit {
    fn default() -> Self {
        RawSplit { train_fraction: default_fraction(), mode: default_mode() }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCombination {
    methods: Option<Vec<String>>,
    #[serde(default)]
    top_n: Vec<usize>,
    #[serde(default = "default_stack_k")]
    stack_k: usize,
}

fn default_stack_k() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLearner {
    name: String,
    kind: String,
    representations: Option<Vec<String>>,
    #[serde(default)]
    internal: bool,
    k: Option<usize>,
    weighting: Option<Weighting>,
    /// Word and POS width on each side.
    context: Option<usize>,
    iterations: Option<usize>,
    cutoff: Option<usize>,
    cascade: Option<bool>,
    folds: Option<usize>,
}

/// One member of the roster.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerEntry {
    pub name: String,
    pub config: LearnerConfig,
    pub representations: Vec<Representation>,
    /// Whether the system output is the majority over all five
    /// representations; otherwise it is the first listed representation.
    pub internal: bool,
}

/// A combination method applied to the roster's system outputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Vote(VoteMethod),
    Stack(StackConfig),
}

impl Method {
    pub const NAMES: [&'static str; 9] = [
        "majority",
        "totprecision",
        "tagprecision",
        "precisionrecall",
        "tagpair",
        "stack-mbl",
        "stack-mbl-pos",
        "stack-tree",
        "stack-tree-pos",
    ];

    pub fn parse(name: &str, stack_k: usize) -> Result<Method> {
        let stack =
            |kind, features| Method::Stack(StackConfig { kind, features, k: stack_k, weighting: Weighting::InfoGain });
        Ok(match name {
            "stack-mbl" => stack(MetaKind::MemoryBased, MetaFeatures::TagsOnly),
            "stack-mbl-pos" => stack(MetaKind::MemoryBased, MetaFeatures::TagsPos),
            "stack-tree" => stack(MetaKind::DecisionTree, MetaFeatures::TagsOnly),
            "stack-tree-pos" => stack(MetaKind::DecisionTree, MetaFeatures::TagsPos),
            other => Method::Vote(other.parse::<VoteMethod>().with_context(|| format!("method `{other}`"))?),
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Vote(m) => write!(f, "{m}"),
            Method::Stack(c) => {
                let kind = if c.kind == MetaKind::MemoryBased { "mbl" } else { "tree" };
                let pos = if c.features == MetaFeatures::TagsPos { "-pos" } else { "" };
                write!(f, "stack-{kind}{pos}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub train: PathBuf,
    pub test: PathBuf,
    pub output: PathBuf,
    /// Seeds cascade fold assignment; nothing else is random.
    pub seed: u64,
    pub split: SplitSpec,
    pub methods: Vec<Method>,
    /// Ensemble sizes to evaluate; each selects the best `n` systems on the
    /// tuning data.
    pub top_n: Vec<usize>,
    pub learners: Vec<LearnerEntry>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base).with_context(|| format!("config {}", path.display()))
    }

    /// Parses TOML text; relative paths are taken relative to `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)?;
        if raw.learners.is_empty() {
            bail!("the learner roster is empty");
        }
        let mut learners = Vec::with_capacity(raw.learners.len());
        for l in &raw.learners {
            let entry = learner_entry(l, raw.seed).with_context(|| format!("learner `{}`", l.name))?;
            if learners.iter().any(|e: &LearnerEntry| e.name == entry.name) {
                bail!("duplicate learner name `{}`", entry.name);
            }
            learners.push(entry);
        }
        let names = raw.combination.methods.unwrap_or_else(|| Method::NAMES.iter().map(|s| s.to_string()).collect());
        let methods = names.iter().map(|n| Method::parse(n, raw.combination.stack_k)).collect::<Result<Vec<_>>>()?;
        let mut top_n = raw.combination.top_n;
        if top_n.is_empty() {
            top_n.push(learners.len());
        }
        for &n in &top_n {
            if n == 0 || n > learners.len() {
                bail!("top_n value {n} is outside 1..={}", learners.len());
            }
        }
        top_n.sort_unstable();
        top_n.dedup();
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        Ok(ExperimentConfig {
            train: resolve(&raw.train),
            test: resolve(&raw.test),
            output: resolve(&raw.output),
            seed: raw.seed,
            split: SplitSpec { train_fraction: raw.split.train_fraction, mode: raw.split.mode },
            methods,
            top_n,
            learners,
        })
    }

    /// Fails unless the data files exist.
    pub fn check_paths(&self) -> Result<()> {
        for p in [&self.train, &self.test] {
            if !p.is_file() {
                bail!("data file {} does not exist", p.display());
            }
        }
        Ok(())
    }
}

fn learner_entry(raw: &RawLearner, seed: u64) -> Result<LearnerEntry> {
    if raw.name.is_empty() || raw.name.contains(['.', '/', ' ']) {
        bail!("names must be non-empty and free of '.', '/' and spaces");
    }
    let kind: LearnerKind = raw.kind.parse()?;
    let mut config = LearnerConfig::default_for(kind);
    if let Some(k) = raw.k {
        config.k = k;
    }
    if let Some(w) = raw.weighting {
        config.weighting = w;
    }
    if let Some(c) = raw.context {
        let w = Window::symmetric(c);
        if config.features.words.is_some() {
            config.features.words = Some(w);
        }
        if config.features.pos.is_some() {
            config.features.pos = Some(w);
        }
    }
    if let Some(i) = raw.iterations {
        config.gis.iterations = i;
    }
    if let Some(c) = raw.cutoff {
        config.gis.cutoff = c;
    }
    if let Some(c) = raw.cascade {
        config.cascade.enabled = c;
    }
    if let Some(f) = raw.folds {
        config.cascade.folds = f;
    }
    config.cascade.seed = seed;
    let representations = match &raw.representations {
        None => Representation::ALL.to_vec(),
        Some(names) => names.iter().map(|n| n.parse::<Representation>()).collect::<Result<Vec<_>, _>>()?,
    };
    if representations.is_empty() {
        bail!("no representations listed");
    }
    if raw.internal && !Representation::ALL.iter().all(|r| representations.contains(r)) {
        bail!("internal combination needs all five representations");
    }
    Ok(LearnerEntry { name: raw.name.clone(), config, representations, internal: raw.internal })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        train = "data/train.txt"
        test = "/abs/test.txt"

        [[learner]]
        name = "mbl"
        kind = "knn"
        internal = true
    "#;

    #[test]
    fn defaults_and_path_resolution() {
        let c = ExperimentConfig::parse(MINIMAL, Path::new("/base")).unwrap();
        assert_eq!(c.train, PathBuf::from("/base/data/train.txt"));
        assert_eq!(c.test, PathBuf::from("/abs/test.txt"));
        assert_eq!(c.output, PathBuf::from("/base/out"));
        assert_eq!(c.split, SplitSpec::default());
        assert_eq!(c.methods.len(), Method::NAMES.len());
        assert_eq!(c.top_n, vec![1]);
        assert_eq!(c.learners[0].representations.len(), 5);
        assert!(c.learners[0].config.cascade.enabled);
    }

    #[test]
    fn method_names_round_trip() {
        for name in Method::NAMES {
            assert_eq!(Method::parse(name, 1).unwrap().to_string(), name);
        }
        assert!(Method::parse("plurality", 1).is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        let base = Path::new(".");
        assert!(ExperimentConfig::parse("train = \"a\"\ntest = \"b\"\n", base).is_err());
        let bad_n = format!("{MINIMAL}\n[combination]\ntop_n = [2]\n");
        assert!(ExperimentConfig::parse(&bad_n, base).is_err());
        let partial = MINIMAL.replace("internal = true", "internal = true\nrepresentations = [\"iob1\"]");
        assert!(ExperimentConfig::parse(&partial, base).is_err());
        let unknown = MINIMAL.replace("kind = \"knn\"", "kind = \"svm\"");
        assert!(ExperimentConfig::parse(&unknown, base).is_err());
        let typo = format!("{MINIMAL}\nsed = 3\n");
        assert!(ExperimentConfig::parse(&typo, base).is_err());
    }

    #[test]
    fn learner_overrides() {
        let text = MINIMAL.replace("internal = true", "k = 5\ncontext = 2\ncascade = false\nweighting = \"gainratio\"");
        let c = ExperimentConfig::parse(&text, Path::new(".")).unwrap();
        let l = &c.learners[0];
        assert_eq!(l.config.k, 5);
        assert_eq!(l.config.features.words, Some(Window::symmetric(2)));
        assert!(!l.config.cascade.enabled);
        assert_eq!(l.config.weighting, Weighting::GainRatio);
    }
}
