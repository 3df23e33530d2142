//! The full experiment: split, train and predict, combine, evaluate.
//!
//! Every stage reads only files written by earlier stages, so a run can be
//! resumed from any stage. Layout under the output directory:
//!
//! ```text
//! split/{full,fit,tune,test}.txt           gold corpora (IOB1)
//! predictions/{learner}.{repr}.{part}.txt  raw output per representation
//! predictions/{learner}.{part}.txt         system output (O+C)
//! combined/ranking.txt                     tuning F per system, best first
//! combined/{method}.top{n}.txt             combined output (O+C)
//! report.txt, report.kv                    test-set scores
//! ```
//!
//! `fit` is the training share of the split and `tune` the held-out rest.
//! Tuning outputs come from models fit on `fit` only; test outputs come
//! from models fit on all training data.

use std::fmt::{self, Write as _};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use basenp::combination::{
    combine_internal_corpus, estimate_weights, rank_and_select, stack_apply, stack_train, vote, Ranking, StreamBundle,
};
use basenp::corpus::{read_corpus, read_predictions, split_both, write_chunkings, write_corpus};
use basenp::evaluation::{evaluate, evaluate_streams, render_key_values, render_report};
use basenp::learners::Chunker;
use basenp::{BracketStream, Chunking, Corpus, EvalReport, PhraseSet, Representation, SplitMode, TagScheme};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, LearnerEntry, Method};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Split,
    Train,
    Combine,
    Evaluate,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Split, Stage::Train, Stage::Combine, Stage::Evaluate];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Split => "split",
            Stage::Train => "train",
            Stage::Combine => "combine",
            Stage::Evaluate => "evaluate",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL.into_iter().find(|st| st.name() == s).ok_or_else(|| anyhow!("unknown stage `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Tune,
    Test,
}

impl Part {
    fn name(self) -> &'static str {
        match self {
            Part::Tune => "tune",
            Part::Test => "test",
        }
    }
}

/// File locations under the output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn stage_paths(&self, stage: Stage) -> Vec<PathBuf> {
        match stage {
            Stage::Split => vec![self.root.join("split")],
            Stage::Train => vec![self.root.join("predictions")],
            Stage::Combine => vec![self.root.join("combined")],
            Stage::Evaluate => vec![self.report(), self.report_kv()],
        }
    }

    pub fn split(&self, name: &str) -> PathBuf {
        self.root.join("split").join(format!("{name}.txt"))
    }

    pub fn prediction(&self, learner: &str, repr: Option<Representation>, part: Part) -> PathBuf {
        let file = match repr {
            Some(r) => format!("{learner}.{r}.{}.txt", part.name()),
            None => format!("{learner}.{}.txt", part.name()),
        };
        self.root.join("predictions").join(file)
    }

    pub fn combined(&self, method: &Method, n: usize) -> PathBuf {
        self.root.join("combined").join(format!("{method}.top{n}.txt"))
    }

    pub fn ranking(&self) -> PathBuf {
        self.root.join("combined").join("ranking.txt")
    }

    pub fn report(&self) -> PathBuf {
        self.root.join("report.txt")
    }

    pub fn report_kv(&self) -> PathBuf {
        self.root.join("report.kv")
    }

    pub fn failure_marker(&self) -> PathBuf {
        self.root.join("FAILED")
    }
}

/// Scores of every system on the test data, in report order.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub rows: Vec<(String, EvalReport)>,
    pub report: String,
}

impl ExperimentResult {
    pub fn get(&self, name: &str) -> Option<&EvalReport> {
        self.rows.iter().find(|(n, _)| n == name).map(|(_, r)| r)
    }
}

/// Runs every stage from `from` onwards. A failing stage leaves a `FAILED`
/// marker naming it; its partial outputs are removed.
pub fn run_experiment(config: &ExperimentConfig, from: Stage) -> Result<ExperimentResult> {
    let layout = Layout::new(&config.output);
    fs::create_dir_all(layout.root()).with_context(|| format!("creating {}", layout.root().display()))?;
    let marker = layout.failure_marker();
    let mut result = None;
    for stage in Stage::ALL.into_iter().filter(|&s| s >= from) {
        clear(&layout, stage)?;
        let outcome = match stage {
            Stage::Split => split_stage(config, &layout),
            Stage::Train => train_stage(config, &layout),
            Stage::Combine => combine_stage(config, &layout),
            Stage::Evaluate => evaluate_stage(config, &layout).map(|r| result = Some(r)),
        };
        if let Err(e) = outcome {
            clear(&layout, stage)?;
            fs::write(&marker, format!("stage {stage} failed: {e:#}\n"))?;
            return Err(e.context(format!("stage `{stage}`")));
        }
    }
    if marker.exists() {
        fs::remove_file(&marker)?;
    }
    match result {
        Some(r) => Ok(r),
        None => Err(anyhow!("no stage produced a report")),
    }
}

fn clear(layout: &Layout, stage: Stage) -> Result<()> {
    for p in layout.stage_paths(stage) {
        if p.is_dir() {
            fs::remove_dir_all(&p)?;
        } else if p.exists() {
            fs::remove_file(&p)?;
        }
    }
    Ok(())
}

/// Writes through a temporary file so readers never see a partial file.
pub fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("partial");
    {
        let mut w = BufWriter::new(File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?);
        body(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_gold(path: &Path, repr: Option<Representation>) -> Result<Corpus> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let corpus = read_corpus(BufReader::new(file), repr).with_context(|| format!("reading {}", path.display()))?;
    if !corpus.is_annotated() {
        bail!("{} lacks chunk annotation", path.display());
    }
    Ok(corpus)
}

pub fn read_output(path: &Path, repr: Representation) -> Result<Vec<Chunking>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let pairs = read_predictions(BufReader::new(file), repr).with_context(|| format!("reading {}", path.display()))?;
    Ok(pairs.into_iter().map(|(_, c)| c).collect())
}

fn write_output(path: &Path, corpus: &Corpus, chunkings: &[Chunking]) -> Result<()> {
    write_atomic(path, |mut w| Ok(write_chunkings(corpus, chunkings, &mut w)?))
}

fn write_streams(path: &Path, corpus: &Corpus, streams: Vec<BracketStream>) -> Result<()> {
    let chunkings: Vec<Chunking> = streams.into_iter().map(Chunking::Brackets).collect();
    write_output(path, corpus, &chunkings)
}

const GOLD_REPR: Representation = Representation::Tags(TagScheme::Iob1);

fn split_stage(config: &ExperimentConfig, layout: &Layout) -> Result<()> {
    config.check_paths()?;
    let full = read_gold(&config.train, None)?;
    let test = read_gold(&config.test, None)?;
    let (fit, tune) = split_both(&full, &config.split)?;
    for (name, corpus) in [("full", &full), ("fit", &fit), ("tune", &tune), ("test", &test)] {
        write_atomic(&layout.split(name), |mut w| Ok(write_corpus(corpus, GOLD_REPR, &mut w)?))?;
    }
    Ok(())
}

struct Job<'a> {
    learner: &'a LearnerEntry,
    repr: Representation,
    part: Part,
}

fn train_stage(config: &ExperimentConfig, layout: &Layout) -> Result<()> {
    let corpus = |name: &str| read_gold(&layout.split(name), Some(GOLD_REPR));
    let (full, fit, tune, test) = (corpus("full")?, corpus("fit")?, corpus("tune")?, corpus("test")?);
    let jobs: Vec<Job> = config
        .learners
        .iter()
        .flat_map(|l| {
            l.representations
                .iter()
                .flat_map(move |&repr| [Part::Tune, Part::Test].map(|part| Job { learner: l, repr, part }))
        })
        .collect();
    let outputs: Vec<Vec<Chunking>> = jobs
        .par_iter()
        .map(|job| {
            let (train, input) = match job.part {
                Part::Tune => (&fit, &tune),
                Part::Test => (&full, &test),
            };
            let chunker = Chunker::train(&job.learner.config, train, job.repr)
                .with_context(|| format!("training {} for {}", job.learner.name, job.repr))?;
            Ok(chunker.predict_corpus(input)?)
        })
        .collect::<Result<_>>()?;

    for (job, out) in jobs.iter().zip(&outputs) {
        let input = if job.part == Part::Tune { &tune } else { &test };
        write_output(&layout.prediction(&job.learner.name, Some(job.repr), job.part), input, out)?;
    }
    for learner in &config.learners {
        for (part, input) in [(Part::Tune, &tune), (Part::Test, &test)] {
            let mine = |repr: Representation| {
                jobs.iter()
                    .zip(&outputs)
                    .find(|(j, _)| j.learner.name == learner.name && j.repr == repr && j.part == part)
                    .map(|(_, o)| o.clone())
                    .expect("every listed representation was run")
            };
            let streams = if learner.internal {
                let all: Vec<Vec<Chunking>> = Representation::ALL.iter().map(|&r| mine(r)).collect();
                combine_internal_corpus(&all)?
            } else {
                mine(learner.representations[0]).iter().map(Chunking::to_bracket_stream).collect()
            };
            write_streams(&layout.prediction(&learner.name, None, part), input, streams)?;
        }
    }
    Ok(())
}

fn system_bundle(config: &ExperimentConfig, layout: &Layout, part: Part) -> Result<StreamBundle> {
    let mut names = Vec::new();
    let mut outputs = Vec::new();
    for l in &config.learners {
        names.push(l.name.clone());
        outputs.push(read_output(&layout.prediction(&l.name, None, part), Representation::Brackets)?);
    }
    Ok(StreamBundle::from_chunkings(names, &outputs)?)
}

fn combine_stage(config: &ExperimentConfig, layout: &Layout) -> Result<()> {
    let tune_corpus = read_gold(&layout.split("tune"), Some(GOLD_REPR))?;
    let test_corpus = read_gold(&layout.split("test"), Some(GOLD_REPR))?;
    let gold = tune_corpus.gold()?;
    let tune = system_bundle(config, layout, Part::Tune)?;
    let test = system_bundle(config, layout, Part::Test)?;
    let full_ranking = rank_and_select(&tune, &gold, tune.classifier_count())?;
    write_atomic(&layout.ranking(), |w| {
        for (name, f) in &full_ranking.ranked {
            writeln!(w, "{name} {f:.6}")?;
        }
        Ok(())
    })?;

    let tasks: Vec<(Method, usize)> =
        config.methods.iter().flat_map(|&m| config.top_n.iter().map(move |&n| (m, n))).collect();
    let combined: Vec<Vec<BracketStream>> = tasks
        .par_iter()
        .map(|&(method, n)| {
            let selected = Ranking { ranked: full_ranking.ranked.clone(), n }.selected();
            let (tune_sel, test_sel) = (tune.select(&selected)?, test.select(&selected)?);
            let out = match method {
                Method::Vote(v) => vote(&test_sel, &estimate_weights(&tune_sel, &gold, v)?)?,
                Method::Stack(s) => {
                    let model = stack_train(&tune_sel, &gold, &tune_corpus, &s)?;
                    stack_apply(&model, &test_sel, &test_corpus)?
                }
            };
            Ok(out)
        })
        .collect::<Result<_>>()?;
    for ((method, n), streams) in tasks.iter().zip(combined) {
        write_streams(&layout.combined(method, *n), &test_corpus, streams)?;
    }
    Ok(())
}

fn score(output: &[Chunking], gold: &[PhraseSet], lengths: &[usize]) -> Result<EvalReport> {
    if output.iter().all(|c| matches!(c, Chunking::Brackets(_))) {
        let streams: Vec<BracketStream> = output.iter().map(Chunking::to_bracket_stream).collect();
        Ok(evaluate_streams(&streams, gold)?)
    } else {
        let phrases: Vec<PhraseSet> = output.iter().map(Chunking::phrases).collect();
        Ok(evaluate(&phrases, gold, lengths)?)
    }
}

fn evaluate_stage(config: &ExperimentConfig, layout: &Layout) -> Result<ExperimentResult> {
    let test = read_gold(&layout.split("test"), Some(GOLD_REPR))?;
    let gold = test.gold()?;
    let lengths = test.lengths();
    let mut rows: Vec<(String, EvalReport)> = Vec::new();
    for l in &config.learners {
        for &repr in &l.representations {
            let out = read_output(&layout.prediction(&l.name, Some(repr), Part::Test), repr)?;
            rows.push((format!("{}.{repr}", l.name), score(&out, &gold, &lengths)?));
        }
        let out = read_output(&layout.prediction(&l.name, None, Part::Test), Representation::Brackets)?;
        rows.push((l.name.clone(), score(&out, &gold, &lengths)?));
    }
    for method in &config.methods {
        for &n in &config.top_n {
            let out = read_output(&layout.combined(method, n), Representation::Brackets)?;
            rows.push((format!("{method}.top{n}"), score(&out, &gold, &lengths)?));
        }
    }

    let count = |name: &str| -> Result<(usize, usize)> {
        let c = read_gold(&layout.split(name), Some(GOLD_REPR))?;
        Ok((c.len(), c.token_count()))
    };
    let ranking = fs::read_to_string(layout.ranking())?;
    let mut report = String::new();
    let file_name = |p: &Path| p.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    writeln!(report, "# training data: {}", file_name(&config.train))?;
    writeln!(report, "# test data: {}", file_name(&config.test))?;
    for name in ["full", "fit", "tune", "test"] {
        let (s, t) = count(name)?;
        writeln!(report, "# {name}: {s} sentences, {t} tokens")?;
    }
    let mode = match config.split.mode {
        SplitMode::Prefix => "prefix",
        SplitMode::Interleaved => "interleaved",
    };
    writeln!(report, "# split: {mode}, train fraction {}", config.split.train_fraction)?;
    writeln!(report, "# seed: {}", config.seed)?;
    writeln!(report, "# tuning outputs come from models fit on the fit part only;")?;
    writeln!(report, "# test outputs come from models fit on all training data")?;
    let ranked: Vec<String> = ranking.lines().collect::<Vec<_>>().iter().map(|l| l.replace(' ', "=")).collect();
    writeln!(report, "# tuning ranking: {}", ranked.join(" "))?;
    report.push_str(&render_report(&rows));

    write_atomic(&layout.report(), |w| Ok(w.write_all(report.as_bytes())?))?;
    let kv = render_key_values(&rows);
    write_atomic(&layout.report_kv(), |w| Ok(w.write_all(kv.as_bytes())?))?;
    Ok(ExperimentResult { rows, report })
}
