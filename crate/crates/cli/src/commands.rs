//! Command-line interface. Every subcommand reads and writes the column
//! format; `-` or an omitted output means standard output.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use basenp::combination::{estimate_weights, stack_apply, stack_train, vote, StreamBundle};
use basenp::corpus::{read_raw, write_chunkings, write_corpus};
use basenp::evaluation::{evaluate, render_key_values, render_report};
use basenp::learners::{Chunker, LearnerConfig, LearnerKind, SavedModel, Weighting, Window};
use basenp::{Chunking, Corpus, Representation, Sentence, TagScheme};
use clap::{Args, Parser, Subcommand};

use crate::config::{ExperimentConfig, Method};
use crate::experiment::{read_gold, read_output, run_experiment, write_atomic, Stage};
use crate::synth::{generate, SynthConfig};

#[derive(Debug, Parser)]
#[command(name = "basenp", version, about = "Base noun phrase chunking with classifier combination")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a configured experiment, optionally resuming at a stage.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// First stage to run: split, train, combine or evaluate.
        #[arg(long, default_value = "split")]
        stage: Stage,
        /// Overrides the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train one chunker and save it.
    Train(TrainArgs),
    /// Chunk a file with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Rewrite chunk labels in another representation.
    Convert {
        #[arg(long)]
        input: PathBuf,
        /// Representation of the input labels; detected when omitted.
        #[arg(long)]
        from: Option<Representation>,
        #[arg(long)]
        to: Representation,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Combine system outputs with one method.
    Combine(CombineArgs),
    /// Score a chunked file against gold annotation.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Representation of the predicted labels.
        #[arg(long)]
        repr: Representation,
        #[arg(long, default_value = "system")]
        name: String,
        /// Print `name.key=value` lines instead of a table.
        #[arg(long)]
        kv: bool,
    },
    /// Write a synthetic annotated corpus (IOB1).
    Generate {
        #[arg(long, default_value_t = 200)]
        sentences: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.04)]
        noise: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// knn, igtree, tdidt, maxent or nb.
    #[arg(long)]
    pub learner: LearnerKind,
    #[arg(long)]
    pub repr: Representation,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Seeds cascade fold assignment.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub weighting: Option<Weighting>,
    /// Word and POS width on each side.
    #[arg(long)]
    pub context: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub cascade: Option<bool>,
}

#[derive(Debug, Args)]
pub struct CombineArgs {
    /// `NAME,REPR,TUNE,TEST`: one system's outputs on the tuning and test
    /// data. Repeat once per system.
    #[arg(long = "system", required = true)]
    pub systems: Vec<String>,
    /// Gold annotation of the tuning data.
    #[arg(long)]
    pub tune_gold: PathBuf,
    /// Test data; its tokens feed POS-aware stacking and the output.
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, default_value = "majority")]
    pub method: String,
    #[arg(long, default_value_t = 1)]
    pub stack_k: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, stage, out } => {
            let mut config = ExperimentConfig::load(&config)?;
            if let Some(out) = out {
                config.output = out;
            }
            let result = run_experiment(&config, stage)?;
            emit(None, |w| Ok(w.write_all(result.report.as_bytes())?))
        }
        Command::Train(args) => train(&args),
        Command::Predict { model, input, output } => {
            let file = File::open(&model).with_context(|| format!("opening model {}", model.display()))?;
            let saved =
                SavedModel::load(BufReader::new(file)).with_context(|| format!("loading {}", model.display()))?;
            let corpus = read_tokens(&input)?;
            let out = saved.chunker.predict_corpus(&corpus)?;
            emit(output.as_deref(), |mut w| Ok(write_chunkings(&corpus, &out, &mut w)?))
        }
        Command::Convert { input, from, to, output } => {
            let corpus = match from {
                None => read_gold(&input, None)?,
                Some(repr) => {
                    let tokens = read_tokens(&input)?;
                    let labels = read_output(&input, repr)?;
                    with_gold(tokens, &labels)?
                }
            };
            emit(output.as_deref(), |mut w| Ok(write_corpus(&corpus, to, &mut w)?))
        }
        Command::Combine(args) => combine(&args),
        Command::Evaluate { gold, pred, repr, name, kv } => {
            let gold = read_gold(&gold, None)?;
            let out = read_output(&pred, repr)?;
            let phrases: Vec<_> = out.iter().map(Chunking::phrases).collect();
            let report = evaluate(&phrases, &gold.gold()?, &gold.lengths())?;
            let rows = [(name, report)];
            let text = if kv { render_key_values(&rows) } else { render_report(&rows) };
            emit(None, |w| Ok(w.write_all(text.as_bytes())?))
        }
        Command::Generate { sentences, seed, noise, output } => {
            if !(0.0..=1.0).contains(&noise) {
                bail!("noise must lie in [0, 1]");
            }
            let corpus = generate(&SynthConfig { sentences, seed, pos_noise: noise });
            emit(output.as_deref(), |mut w| Ok(write_corpus(&corpus, Representation::Tags(TagScheme::Iob1), &mut w)?))
        }
    }
}

fn train(args: &TrainArgs) -> Result<()> {
    let mut config = LearnerConfig::default_for(args.learner);
    config.cascade.seed = args.seed;
    if let Some(k) = args.k {
        config.k = k;
    }
    if let Some(w) = args.weighting {
        config.weighting = w;
    }
    if let Some(c) = args.context {
        let w = Window::symmetric(c);
        config.features.words = config.features.words.map(|_| w);
        config.features.pos = config.features.pos.map(|_| w);
    }
    if let Some(i) = args.iterations {
        config.gis.iterations = i;
    }
    if let Some(c) = args.cascade {
        config.cascade.enabled = c;
    }
    let corpus = read_gold(&args.train, None)?;
    let chunker = Chunker::train(&config, &corpus, args.repr)?;
    let saved = SavedModel::new(config, chunker);
    write_atomic(&args.model, |w| Ok(saved.save(w)?))
}

fn combine(args: &CombineArgs) -> Result<()> {
    let method = Method::parse(&args.method, args.stack_k)?;
    let tune_corpus = read_gold(&args.tune_gold, None)?;
    let test_corpus = read_tokens(&args.test)?;
    let gold = tune_corpus.gold()?;
    let (mut names, mut tune, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for spec in &args.systems {
        let parts: Vec<&str> = spec.split(',').collect();
        let [name, repr, tune_file, test_file] = parts[..] else {
            bail!("--system expects NAME,REPR,TUNE,TEST, got `{spec}`");
        };
        let repr: Representation = repr.parse()?;
        names.push(name.to_string());
        tune.push(read_output(Path::new(tune_file), repr)?);
        test.push(read_output(Path::new(test_file), repr)?);
    }
    let tune = StreamBundle::from_chunkings(names.clone(), &tune)?;
    let test = StreamBundle::from_chunkings(names, &test)?;
    let streams = match method {
        Method::Vote(v) => vote(&test, &estimate_weights(&tune, &gold, v)?)?,
        Method::Stack(s) => stack_apply(&stack_train(&tune, &gold, &tune_corpus, &s)?, &test, &test_corpus)?,
    };
    let out: Vec<Chunking> = streams.into_iter().map(Chunking::Brackets).collect();
    emit(args.output.as_deref(), |mut w| Ok(write_chunkings(&test_corpus, &out, &mut w)?))
}

/// Reads tokens and ignores any label column.
fn read_tokens(path: &Path) -> Result<Corpus> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let raw = read_raw(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
    let sentences = raw.into_iter().map(|s| Sentence::new(s.tokens, None)).collect::<Result<Vec<_>, _>>()?;
    Ok(Corpus::new(sentences))
}

fn with_gold(corpus: Corpus, labels: &[Chunking]) -> Result<Corpus> {
    if labels.len() != corpus.len() {
        bail!("{} label sequences for {} sentences", labels.len(), corpus.len());
    }
    let sentences = corpus
        .sentences
        .into_iter()
        .zip(labels)
        .map(|(s, l)| Sentence::new(s.tokens, Some(l.phrases())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Corpus::new(sentences))
}

fn emit(output: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match output {
        Some(p) if p != Path::new("-") => write_atomic(p, body),
        _ => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
            Ok(lock.flush()?)
        }
    }
}
