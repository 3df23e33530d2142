//! Chunk representations.
//!
//! A chunked sentence is canonically a [`PhraseSet`]: non-overlapping,
//! non-nesting inclusive word spans. It can be encoded as a per-word
//! [`TagSequence`] under one of four tagging schemes, or as a pair of
//! per-word open/close decisions ([`BracketStream`]).
//!
//! Decoding is total: classifier output that violates a scheme is repaired
//! rather than rejected.
//!
//! | scheme | phrase start marker              | phrase end marker                |
//! |--------|----------------------------------|----------------------------------|
//! | IOB1   | `B` only directly after a phrase | -                                |
//! | IOB2   | `B` on every first word          | -                                |
//! | IOE1   | -                                | `E` only directly before a phrase|
//! | IOE2   | -                                | `E` on every last word           |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChunkError {
    #[error("invalid span ({start}, {end}): start after end")]
    InvertedSpan { start: usize, end: usize },
    #[error("spans ({0}, {1}) and ({2}, {3}) overlap")]
    Overlap(usize, usize, usize, usize),
    #[error("span ({start}, {end}) exceeds sentence length {len}")]
    OutOfRange { start: usize, end: usize, len: usize },
    #[error("tag {tag} is not part of the {scheme} alphabet")]
    Alphabet { tag: Tag, scheme: TagScheme },
    #[error("unknown tag symbol `{0}`")]
    UnknownTag(String),
    #[error("unknown representation `{0}`")]
    UnknownRepresentation(String),
    #[error("unknown bracket code `{0}`")]
    UnknownBracket(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Inclusive word-index span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.start, self.end)
    }
}

/// The chunk structure of one sentence. Spans are kept sorted by start.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhraseSet {
    spans: Vec<Span>,
}

impl PhraseSet {
    pub fn empty() -> Self {
        PhraseSet::default()
    }

    /// Builds a phrase set, rejecting inverted, overlapping or nesting spans.
    pub fn new(mut spans: Vec<Span>) -> Result<Self, ChunkError> {
        spans.sort();
        for span in &spans {
            if span.start > span.end {
                return Err(ChunkError::InvertedSpan { start: span.start, end: span.end });
            }
        }
        for pair in spans.windows(2) {
            if pair[1].start <= pair[0].end {
                return Err(ChunkError::Overlap(pair[0].start, pair[0].end, pair[1].start, pair[1].end));
            }
        }
        Ok(PhraseSet { spans })
    }

    /// Builds a phrase set from `(start, end)` pairs.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Result<Self, ChunkError> {
        PhraseSet::new(pairs.iter().map(|&(s, e)| Span::new(s, e)).collect())
    }

    /// Spans produced by the decoders are sorted and disjoint by construction.
    fn from_sorted(spans: Vec<Span>) -> Self {
        debug_assert!(spans.windows(2).all(|w| w[0].end < w[1].start));
        PhraseSet { spans }
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn contains(&self, span: &Span) -> bool {
        self.spans.binary_search(span).is_ok()
    }

    /// Checks that every span fits a sentence of `len` words.
    pub fn check_fits(&self, len: usize) -> Result<(), ChunkError> {
        match self.spans.last() {
            Some(last) if last.end >= len => Err(ChunkError::OutOfRange { start: last.start, end: last.end, len }),
            _ => Ok(()),
        }
    }
}

/// The four per-word tagging schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TagScheme {
    Iob1,
    Iob2,
    Ioe1,
    Ioe2,
}

impl TagScheme {
    pub const ALL: [TagScheme; 4] = [TagScheme::Iob1, TagScheme::Iob2, TagScheme::Ioe1, TagScheme::Ioe2];

    /// The boundary marker this scheme uses besides `I` and `O`.
    pub fn marker(self) -> Tag {
        match self {
            TagScheme::Iob1 | TagScheme::Iob2 => Tag::B,
            TagScheme::Ioe1 | TagScheme::Ioe2 => Tag::E,
        }
    }

    pub fn allows(self, tag: Tag) -> bool {
        matches!(tag, Tag::I | Tag::O) || tag == self.marker()
    }

    pub fn name(self) -> &'static str {
        match self {
            TagScheme::Iob1 => "iob1",
            TagScheme::Iob2 => "iob2",
            TagScheme::Ioe1 => "ioe1",
            TagScheme::Ioe2 => "ioe2",
        }
    }
}

impl fmt::Display for TagScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name().to_ascii_uppercase())
    }
}

impl FromStr for TagScheme {
    type Err = ChunkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "iob1" => Ok(TagScheme::Iob1),
            "iob2" => Ok(TagScheme::Iob2),
            "ioe1" => Ok(TagScheme::Ioe1),
            "ioe2" => Ok(TagScheme::Ioe2),
            _ => Err(ChunkError::UnknownRepresentation(s.to_string())),
        }
    }
}

/// A chunk tag. `O` means outside a phrase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    I,
    O,
    B,
    E,
}

impl Tag {
    pub fn as_char(self) -> char {
        match self {
            Tag::I => 'I',
            Tag::O => 'O',
            Tag::B => 'B',
            Tag::E => 'E',
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::I => "I",
            Tag::O => "O",
            Tag::B => "B",
            Tag::E => "E",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tag {
    type Err = ChunkError;

    /// Accepts the bare symbol and also typed forms such as `B-NP`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let head = s.split('-').next().unwrap_or(s);
        match head {
            "I" => Ok(Tag::I),
            "O" if s == "O" => Ok(Tag::O),
            "B" => Ok(Tag::B),
            "E" => Ok(Tag::E),
            _ => Err(ChunkError::UnknownTag(s.to_string())),
        }
    }
}

/// Per-word tags under one scheme. Symbols are always inside the scheme's
/// alphabet, but the sequence may still be structurally invalid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TagSequence {
    scheme: TagScheme,
    tags: Vec<Tag>,
}

impl TagSequence {
    pub fn new(scheme: TagScheme, tags: Vec<Tag>) -> Result<Self, ChunkError> {
        if let Some(&tag) = tags.iter().find(|t| !scheme.allows(**t)) {
            return Err(ChunkError::Alphabet { tag, scheme });
        }
        Ok(TagSequence { scheme, tags })
    }

    /// Parses whitespace-separated symbols, e.g. `"O I I O"`.
    pub fn parse(scheme: TagScheme, text: &str) -> Result<Self, ChunkError> {
        let tags = text.split_whitespace().map(Tag::from_str).collect::<Result<Vec<_>, _>>()?;
        TagSequence::new(scheme, tags)
    }

    pub fn scheme(&self) -> TagScheme {
        self.scheme
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }
}

impl fmt::Display for TagSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, tag) in self.tags.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(tag.as_str())?;
        }
        Ok(())
    }
}

/// Per-word open/close bracket decisions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BracketStream {
    pub open: Vec<bool>,
    pub close: Vec<bool>,
}

impl BracketStream {
    pub fn new(open: Vec<bool>, close: Vec<bool>) -> Result<Self, ChunkError> {
        if open.len() != close.len() {
            return Err(ChunkError::LengthMismatch(open.len(), close.len()));
        }
        Ok(BracketStream { open, close })
    }

    /// A stream with no brackets.
    pub fn blank(len: usize) -> Self {
        BracketStream { open: vec![false; len], close: vec![false; len] }
    }

    pub fn len(&self) -> usize {
        self.open.len()
    }

    pub fn is_empty(&self) -> bool {
        self.open.is_empty()
    }

    pub fn side(&self, side: Side) -> &[bool] {
        match side {
            Side::Open => &self.open,
            Side::Close => &self.close,
        }
    }

    pub fn side_mut(&mut self, side: Side) -> &mut Vec<bool> {
        match side {
            Side::Open => &mut self.open,
            Side::Close => &mut self.close,
        }
    }

    /// Debug code for one word: `.`, `[`, `]` or `[]`.
    pub fn code(&self, i: usize) -> &'static str {
        match (self.open[i], self.close[i]) {
            (false, false) => ".",
            (true, false) => "[",
            (false, true) => "]",
            (true, true) => "[]",
        }
    }

    pub fn codes(&self) -> Vec<&'static str> {
        (0..self.len()).map(|i| self.code(i)).collect()
    }

    pub fn from_codes<S: AsRef<str>>(codes: &[S]) -> Result<Self, ChunkError> {
        let mut stream = BracketStream::blank(codes.len());
        for (i, code) in codes.iter().enumerate() {
            let (open, close) = parse_bracket_code(code.as_ref())?;
            stream.open[i] = open;
            stream.close[i] = close;
        }
        Ok(stream)
    }
}

pub fn parse_bracket_code(code: &str) -> Result<(bool, bool), ChunkError> {
    match code {
        "." => Ok((false, false)),
        "[" => Ok((true, false)),
        "]" => Ok((false, true)),
        "[]" => Ok((true, true)),
        _ => Err(ChunkError::UnknownBracket(code.to_string())),
    }
}

/// The two halves of the bracket representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Open,
    Close,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Open, Side::Close];

    pub fn index(self) -> usize {
        match self {
            Side::Open => 0,
            Side::Close => 1,
        }
    }
}

/// An output representation: one of the tagging schemes, or open+close brackets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Representation {
    Tags(TagScheme),
    Brackets,
}

impl Representation {
    /// IOB1, IOB2, IOE1, IOE2 and O+C, the set used for internal combination.
    pub const ALL: [Representation; 5] = [
        Representation::Tags(TagScheme::Iob1),
        Representation::Tags(TagScheme::Iob2),
        Representation::Tags(TagScheme::Ioe1),
        Representation::Tags(TagScheme::Ioe2),
        Representation::Brackets,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Representation::Tags(s) => s.name(),
            Representation::Brackets => "oc",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Representation::Tags(s) => write!(f, "{s}"),
            Representation::Brackets => f.write_str("O+C"),
        }
    }
}

impl FromStr for Representation {
    type Err = ChunkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "oc" | "o+c" | "brackets" => Ok(Representation::Brackets),
            other => other
                .parse::<TagScheme>()
                .map(Representation::Tags)
                .map_err(|_| ChunkError::UnknownRepresentation(s.to_string())),
        }
    }
}

/// Output of a chunker in some representation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chunking {
    Tags(TagSequence),
    Brackets(BracketStream),
}

impl Chunking {
    pub fn representation(&self) -> Representation {
        match self {
            Chunking::Tags(t) => Representation::Tags(t.scheme()),
            Chunking::Brackets(_) => Representation::Brackets,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Chunking::Tags(t) => t.len(),
            Chunking::Brackets(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Bracket view: tag sequences are decoded first, raw streams are kept as is.
    pub fn to_bracket_stream(&self) -> BracketStream {
        match self {
            Chunking::Tags(t) => to_brackets(&decode(t), t.len()),
            Chunking::Brackets(b) => b.clone(),
        }
    }

    pub fn phrases(&self) -> PhraseSet {
        match self {
            Chunking::Tags(t) => decode(t),
            Chunking::Brackets(b) => pair_brackets(b),
        }
    }

    /// Per-word symbols as written in the third corpus column.
    pub fn symbols(&self) -> Vec<&'static str> {
        match self {
            Chunking::Tags(t) => t.tags().iter().map(|t| t.as_str()).collect(),
            Chunking::Brackets(b) => b.codes(),
        }
    }

    /// Encodes `phrases` in the given representation.
    pub fn encode(phrases: &PhraseSet, len: usize, repr: Representation) -> Chunking {
        match repr {
            Representation::Tags(scheme) => Chunking::Tags(encode(phrases, len, scheme)),
            Representation::Brackets => Chunking::Brackets(to_brackets(phrases, len)),
        }
    }

    /// Parses per-word symbols under a representation.
    pub fn parse<S: AsRef<str>>(symbols: &[S], repr: Representation) -> Result<Chunking, ChunkError> {
        match repr {
            Representation::Tags(scheme) => {
                let tags = symbols.iter().map(|s| s.as_ref().parse()).collect::<Result<Vec<Tag>, _>>()?;
                Ok(Chunking::Tags(TagSequence::new(scheme, tags)?))
            }
            Representation::Brackets => Ok(Chunking::Brackets(BracketStream::from_codes(symbols)?)),
        }
    }
}

/// Encodes a phrase set as the unique valid tag sequence of `scheme`.
pub fn encode(phrases: &PhraseSet, len: usize, scheme: TagScheme) -> TagSequence {
    let mut tags = vec![Tag::O; len];
    let spans = phrases.spans();
    for (k, span) in spans.iter().enumerate() {
        for tag in &mut tags[span.start..=span.end] {
            *tag = Tag::I;
        }
        match scheme {
            TagScheme::Iob1 => {
                let follows = k > 0 && spans[k - 1].end + 1 == span.start;
                if follows {
                    tags[span.start] = Tag::B;
                }
            }
            TagScheme::Iob2 => tags[span.start] = Tag::B,
            TagScheme::Ioe1 => {
                let precedes = spans.get(k + 1).is_some_and(|next| span.end + 1 == next.start);
                if precedes {
                    tags[span.end] = Tag::E;
                }
            }
            TagScheme::Ioe2 => tags[span.end] = Tag::E,
        }
    }
    TagSequence { scheme, tags }
}

/// Decodes a tag sequence, repairing invalid input.
///
/// IOB schemes: a phrase starts at `B`, or at an `I` following `O` or the
/// sentence start, and extends over the following `I`s. IOE schemes mirror
/// this from the right: a phrase ends at `E`, or at an `I` preceding `O` or
/// the sentence end, and extends over the preceding `I`s.
pub fn decode(tags: &TagSequence) -> PhraseSet {
    let t = tags.tags();
    let n = t.len();
    let mut spans = Vec::new();
    match tags.scheme() {
        TagScheme::Iob1 | TagScheme::Iob2 => {
            let mut i = 0;
            while i < n {
                if t[i] == Tag::O {
                    i += 1;
                    continue;
                }
                let start = i;
                i += 1;
                while i < n && t[i] == Tag::I {
                    i += 1;
                }
                spans.push(Span::new(start, i - 1));
            }
        }
        TagScheme::Ioe1 | TagScheme::Ioe2 => {
            let mut i = n;
            while i > 0 {
                if t[i - 1] == Tag::O {
                    i -= 1;
                    continue;
                }
                let end = i - 1;
                i -= 1;
                while i > 0 && t[i - 1] == Tag::I {
                    i -= 1;
                }
                spans.push(Span::new(i, end));
            }
            spans.reverse();
        }
    }
    PhraseSet::from_sorted(spans)
}

pub fn to_brackets(phrases: &PhraseSet, len: usize) -> BracketStream {
    let mut stream = BracketStream::blank(len);
    for span in phrases.spans() {
        stream.open[span.start] = true;
        stream.close[span.end] = true;
    }
    stream
}

/// Builds phrases from candidate brackets, keeping only the shortest ones.
///
/// Closes are scanned left to right; each pairs with the rightmost open seen
/// since the previous pair. Opens left of a completed pair and closes without
/// a pending open are discarded, so the output never overlaps or nests.
pub fn pair_brackets(stream: &BracketStream) -> PhraseSet {
    let mut spans = Vec::new();
    let mut pending: Option<usize> = None;
    for i in 0..stream.len() {
        if stream.open[i] {
            pending = Some(i);
        }
        if stream.close[i] {
            if let Some(start) = pending.take() {
                spans.push(Span::new(start, i));
            }
        }
    }
    PhraseSet::from_sorted(spans)
}

/// Re-encodes a (possibly noisy) tag sequence under another scheme.
pub fn convert(tags: &TagSequence, target: TagScheme) -> TagSequence {
    encode(&decode(tags), tags.len(), target)
}
