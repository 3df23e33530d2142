//! Windowed context features.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::LearnerError;
use crate::corpus::Sentence;

/// Filler for slots outside the sentence. Contains a space, so it can never
/// collide with a real token.
pub const BOUNDARY: &str = "<boundary> ";
/// Replacement for word forms not seen in training.
pub const UNKNOWN: &str = "<unknown> ";

/// A position-relative feature slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slot {
    /// Word at a relative offset.
    Word(i32),
    /// POS tag at a relative offset.
    Pos(i32),
    /// Tag already predicted `n` positions to the left.
    Prev(u32),
    /// First-stage tag at a relative offset (cascade input).
    Guide(i32),
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Slot::Word(o) => write!(f, "w{o:+}"),
            Slot::Pos(o) => write!(f, "p{o:+}"),
            Slot::Prev(n) => write!(f, "t-{n}"),
            Slot::Guide(o) => write!(f, "g{o:+}"),
        }
    }
}

/// Offsets `-left..=right` around the focus word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub left: usize,
    pub right: usize,
}

impl Window {
    pub fn new(left: usize, right: usize) -> Self {
        Window { left, right }
    }

    pub fn symmetric(width: usize) -> Self {
        Window { left: width, right: width }
    }

    fn offsets(self) -> std::ops::RangeInclusive<i32> {
        -(self.left as i32)..=(self.right as i32)
    }
}

/// Context layout for one classifier configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub words: Option<Window>,
    pub pos: Option<Window>,
    /// Number of previously predicted tags.
    pub prev_tags: usize,
    pub guide: Option<Window>,
}

impl FeatureSpec {
    /// Words and POS tags, `width` positions either side.
    pub fn symmetric(width: usize) -> Self {
        FeatureSpec { words: Some(Window::symmetric(width)), pos: Some(Window::symmetric(width)), ..Default::default() }
    }

    /// POS tags only, `width` positions either side.
    pub fn pos_only(width: usize) -> Self {
        FeatureSpec { pos: Some(Window::symmetric(width)), ..Default::default() }
    }

    pub fn slots(&self) -> Vec<Slot> {
        let mut slots = Vec::new();
        if let Some(w) = self.words {
            slots.extend(w.offsets().map(Slot::Word));
        }
        if let Some(w) = self.pos {
            slots.extend(w.offsets().map(Slot::Pos));
        }
        slots.extend((1..=self.prev_tags as u32).map(Slot::Prev));
        if let Some(w) = self.guide {
            slots.extend(w.offsets().map(Slot::Guide));
        }
        slots
    }

    pub fn arity(&self) -> usize {
        self.slots().len()
    }

    pub fn uses_history(&self) -> bool {
        self.prev_tags > 0
    }

    pub fn uses_guide(&self) -> bool {
        self.guide.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureVector {
    pub values: Vec<(Slot, String)>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, slot: Slot) -> Option<&str> {
        self.values.iter().find(|(s, _)| *s == slot).map(|(_, v)| v.as_str())
    }

    /// Replaces word forms outside `vocabulary` with [`UNKNOWN`].
    pub fn mask_unknown(&mut self, vocabulary: &BTreeSet<String>) {
        for (slot, value) in &mut self.values {
            if matches!(slot, Slot::Word(_)) && value != BOUNDARY && !vocabulary.contains(value.as_str()) {
                *value = UNKNOWN.to_string();
            }
        }
    }
}

fn at(values: &[String], i: isize) -> &str {
    if i < 0 {
        return BOUNDARY;
    }
    values.get(i as usize).map_or(BOUNDARY, String::as_str)
}

/// Features of word `index`.
///
/// `history` holds tags already assigned to positions before `index`;
/// `guide` holds first-stage tags for the whole sentence.
pub fn extract_features(
    sentence: &Sentence,
    index: usize,
    spec: &FeatureSpec,
    history: Option<&[String]>,
    guide: Option<&[String]>,
) -> Result<FeatureVector, LearnerError> {
    let n = sentence.len();
    if index >= n {
        return Err(LearnerError::IndexOutOfRange { index, len: n });
    }
    let history = match history {
        Some(h) if h.len() >= index => Some(h),
        _ if spec.uses_history() => return Err(LearnerError::MissingHistory(index)),
        _ => None,
    };
    let guide = match guide {
        Some(g) if g.len() == n => Some(g),
        _ if spec.uses_guide() => return Err(LearnerError::MissingGuide),
        _ => None,
    };
    let token = |i: isize| -> Option<&crate::corpus::Token> {
        if i < 0 {
            None
        } else {
            sentence.tokens.get(i as usize)
        }
    };
    let here = index as isize;
    let values = spec
        .slots()
        .into_iter()
        .map(|slot| {
            let value = match slot {
                Slot::Word(o) => token(here + o as isize).map_or(BOUNDARY, |t| t.word.as_str()),
                Slot::Pos(o) => token(here + o as isize).map_or(BOUNDARY, |t| t.pos.as_str()),
                Slot::Prev(k) => at(history.unwrap_or(&[]), here - k as isize),
                Slot::Guide(o) => at(guide.unwrap_or(&[]), here + o as isize),
            };
            (slot, value.to_string())
        })
        .collect();
    Ok(FeatureVector { values })
}
