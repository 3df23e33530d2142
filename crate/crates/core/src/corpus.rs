//! Column-format corpora.
//!
//! One token per line, `WORD POS [TAG]`, a blank line after every sentence.
//! Fields may be separated by any run of spaces or tabs on read; a single
//! space is written.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chunk::{ChunkError, Chunking, PhraseSet, Representation, TagScheme};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: expected 2 or 3 columns, found {found}")]
    MalformedLine { line: usize, found: usize },
    #[error("line {line}: chunk tags present for some but not all tokens of the sentence")]
    PartialAnnotation { line: usize },
    #[error("line {line}: {error}")]
    Tag { line: usize, error: ChunkError },
    #[error("sentence {0} has no chunk annotation")]
    MissingAnnotation(usize),
    #[error("sentence {0}: {1}")]
    Invalid(usize, ChunkError),
    #[error("invalid token: {0}")]
    InvalidToken(String),
    #[error("empty sentence")]
    EmptySentence,
    #[error("cannot split an empty corpus")]
    EmptyCorpus,
    #[error("train fraction {0} is outside (0, 1]")]
    BadFraction(f64),
    #[error("split leaves the {0} part empty")]
    EmptyPart(&'static str),
    #[error("{expected} annotations supplied for {found} sentences")]
    CountMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub word: String,
    pub pos: String,
}

fn valid_field(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c == ' ' || c == '\t' || c == '\n' || c == '\r')
}

impl Token {
    pub fn new(word: impl Into<String>, pos: impl Into<String>) -> Result<Self, CorpusError> {
        let (word, pos) = (word.into(), pos.into());
        if !valid_field(&word) || !valid_field(&pos) {
            return Err(CorpusError::InvalidToken(format!("{word:?}/{pos:?}")));
        }
        Ok(Token { word, pos })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub gold: Option<PhraseSet>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>, gold: Option<PhraseSet>) -> Result<Self, CorpusError> {
        if tokens.is_empty() {
            return Err(CorpusError::EmptySentence);
        }
        if let Some(g) = &gold {
            g.check_fits(tokens.len()).map_err(|e| CorpusError::Invalid(0, e))?;
        }
        Ok(Sentence { tokens, gold })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.word.as_str())
    }

    pub fn pos_tags(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.pos.as_str())
    }

    /// The same tokens without annotation.
    pub fn unannotated(&self) -> Sentence {
        Sentence { tokens: self.tokens.clone(), gold: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
}

impl Corpus {
    pub fn new(sentences: Vec<Sentence>) -> Self {
        Corpus { sentences }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.sentences.iter().map(Sentence::len).collect()
    }

    /// Gold phrase sets of every sentence, failing on the first unannotated one.
    pub fn gold(&self) -> Result<Vec<PhraseSet>, CorpusError> {
        self.sentences
            .iter()
            .enumerate()
            .map(|(i, s)| s.gold.clone().ok_or(CorpusError::MissingAnnotation(i)))
            .collect()
    }

    pub fn is_annotated(&self) -> bool {
        self.sentences.iter().all(|s| s.gold.is_some())
    }
}

/// One sentence as read from disk, with its raw third column if present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawSentence {
    pub tokens: Vec<Token>,
    pub labels: Option<Vec<String>>,
    /// Line number of the sentence's first token, 1-based.
    pub line: usize,
}

/// Reads sentences without interpreting the chunk column.
pub fn read_raw<R: BufRead>(source: R) -> Result<Vec<RawSentence>, CorpusError> {
    let mut out = Vec::new();
    let mut tokens = Vec::new();
    let mut labels: Vec<Option<String>> = Vec::new();
    let mut first_line = 0;

    fn finish(
        out: &mut Vec<RawSentence>,
        tokens: &mut Vec<Token>,
        labels: &mut Vec<Option<String>>,
        line: usize,
    ) -> Result<(), CorpusError> {
        if tokens.is_empty() {
            return Ok(());
        }
        let annotated = labels.iter().filter(|l| l.is_some()).count();
        let labels = if annotated == 0 {
            None
        } else if annotated == labels.len() {
            Some(labels.drain(..).map(Option::unwrap).collect())
        } else {
            return Err(CorpusError::PartialAnnotation { line });
        };
        out.push(RawSentence { tokens: std::mem::take(tokens), labels, line });
        Ok(())
    }

    for (n, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        let fields: Vec<&str> = line.split([' ', '\t']).filter(|f| !f.is_empty()).collect();
        if fields.is_empty() {
            finish(&mut out, &mut tokens, &mut labels, first_line)?;
            labels.clear();
            continue;
        }
        if !(2..=3).contains(&fields.len()) {
            return Err(CorpusError::MalformedLine { line: lineno, found: fields.len() });
        }
        if tokens.is_empty() {
            first_line = lineno;
        }
        tokens.push(Token { word: fields[0].to_string(), pos: fields[1].to_string() });
        labels.push(fields.get(2).map(|s| s.to_string()));
    }
    finish(&mut out, &mut tokens, &mut labels, first_line)?;
    Ok(out)
}

/// Reads a corpus. `repr` names the representation of the chunk column;
/// `None` means IOB1, except that bracket codes are recognised as O+C.
pub fn read_corpus<R: BufRead>(source: R, repr: Option<Representation>) -> Result<Corpus, CorpusError> {
    let raw = read_raw(source)?;
    let mut sentences = Vec::with_capacity(raw.len());
    for s in raw {
        let gold = match &s.labels {
            None => None,
            Some(labels) => {
                let repr = repr.unwrap_or_else(|| detect(labels));
                let chunking =
                    Chunking::parse(labels, repr).map_err(|e| CorpusError::Tag { line: s.line, error: e })?;
                Some(chunking.phrases())
            }
        };
        sentences.push(Sentence { tokens: s.tokens, gold });
    }
    Ok(Corpus { sentences })
}

fn detect(labels: &[String]) -> Representation {
    let bracket = labels.iter().all(|l| matches!(l.as_str(), "." | "[" | "]" | "[]"));
    if bracket {
        Representation::Brackets
    } else {
        Representation::Tags(TagScheme::Iob1)
    }
}

/// Reads classifier output: tokens plus the raw chunking in `repr`, kept
/// unrepaired so that bracket streams survive as emitted.
pub fn read_predictions<R: BufRead>(source: R, repr: Representation) -> Result<Vec<(Sentence, Chunking)>, CorpusError> {
    read_raw(source)?
        .into_iter()
        .map(|s| {
            let labels = s.labels.ok_or(CorpusError::MissingAnnotation(s.line))?;
            let chunking = Chunking::parse(&labels, repr).map_err(|e| CorpusError::Tag { line: s.line, error: e })?;
            Ok((Sentence { tokens: s.tokens, gold: None }, chunking))
        })
        .collect()
}

/// Writes the corpus with its gold annotation encoded in `repr`.
pub fn write_corpus<W: Write>(corpus: &Corpus, repr: Representation, sink: &mut W) -> Result<(), CorpusError> {
    let gold = corpus.gold()?;
    write_phrases(corpus, &gold, repr, sink)
}

/// Writes the corpus tokens with the supplied phrase sets encoded in `repr`.
pub fn write_phrases<W: Write>(
    corpus: &Corpus,
    phrases: &[PhraseSet],
    repr: Representation,
    sink: &mut W,
) -> Result<(), CorpusError> {
    if phrases.len() != corpus.len() {
        return Err(CorpusError::CountMismatch { expected: corpus.len(), found: phrases.len() });
    }
    let chunkings: Vec<Chunking> =
        corpus.sentences.iter().zip(phrases).map(|(s, p)| Chunking::encode(p, s.len(), repr)).collect();
    write_chunkings(corpus, &chunkings, sink)
}

/// Writes tokens with an arbitrary (possibly invalid) chunking per sentence.
pub fn write_chunkings<W: Write>(corpus: &Corpus, chunkings: &[Chunking], sink: &mut W) -> Result<(), CorpusError> {
    if chunkings.len() != corpus.len() {
        return Err(CorpusError::CountMismatch { expected: corpus.len(), found: chunkings.len() });
    }
    for (i, (sentence, chunking)) in corpus.sentences.iter().zip(chunkings).enumerate() {
        if chunking.len() != sentence.len() {
            return Err(CorpusError::Invalid(i, ChunkError::LengthMismatch(sentence.len(), chunking.len())));
        }
        for (token, symbol) in sentence.tokens.iter().zip(chunking.symbols()) {
            writeln!(sink, "{} {} {}", token.word, token.pos, symbol)?;
        }
        writeln!(sink)?;
    }
    Ok(())
}

/// Writes tokens only, two columns.
pub fn write_tokens<W: Write>(corpus: &Corpus, sink: &mut W) -> Result<(), CorpusError> {
    for sentence in &corpus.sentences {
        for token in &sentence.tokens {
            writeln!(sink, "{} {}", token.word, token.pos)?;
        }
        writeln!(sink)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    /// The first part of the corpus trains, the tail tunes.
    Prefix,
    /// Every m-th sentence tunes, with m = round(1 / (1 - fraction)).
    Interleaved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub mode: SplitMode,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { train_fraction: 0.9, mode: SplitMode::Prefix }
    }
}

impl SplitSpec {
    /// Whether sentence `i` of `n` goes to the training part.
    fn is_train(&self, i: usize, n: usize) -> bool {
        if self.train_fraction >= 1.0 {
            return true;
        }
        match self.mode {
            SplitMode::Prefix => i < self.train_count(n),
            SplitMode::Interleaved => {
                let period = (1.0 / (1.0 - self.train_fraction)).round().max(1.0) as usize;
                i % period != period - 1
            }
        }
    }

    fn train_count(&self, n: usize) -> usize {
        // tolerance keeps 0.9 * 10 from rounding up to 10
        ((self.train_fraction * n as f64) - 1e-9).ceil().max(0.0) as usize
    }
}

/// Partitions the corpus into training and tuning parts, preserving order.
pub fn split(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus), CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction <= 1.0) {
        return Err(CorpusError::BadFraction(spec.train_fraction));
    }
    let n = corpus.len();
    let (mut train, mut tune) = (Vec::new(), Vec::new());
    for (i, s) in corpus.sentences.iter().enumerate() {
        if spec.is_train(i, n) {
            train.push(s.clone());
        } else {
            tune.push(s.clone());
        }
    }
    Ok((Corpus::new(train), Corpus::new(tune)))
}

/// Like [`split`], but both parts must be non-empty.
pub fn split_both(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus), CorpusError> {
    let (train, tune) = split(corpus, spec)?;
    if train.is_empty() {
        return Err(CorpusError::EmptyPart("train"));
    }
    if tune.is_empty() {
        return Err(CorpusError::EmptyPart("tune"));
    }
    Ok((train, tune))
}
