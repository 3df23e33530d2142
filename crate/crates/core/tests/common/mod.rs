#![allow(dead_code)]

use basenp::{Corpus, PhraseSet, Sentence, Token};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// (pos, opens a phrase, closes a phrase); phrase membership is a function of
// the tag, and every boundary between adjacent phrases follows a PRP
const TEMPLATES: &[&[(&str, bool, bool)]] = &[
    &[
        ("DT", true, false),
        ("NN", false, true),
        ("VBZ", false, false),
        ("JJ", true, false),
        ("NNS", false, true),
        (".", false, false),
    ],
    &[
        ("PRP", true, true),
        ("VBD", false, false),
        ("PRP", true, true),
        ("DT", true, false),
        ("NN", false, true),
        (".", false, false),
    ],
    &[
        ("NNP", true, false),
        ("NNP", false, true),
        ("VBD", false, false),
        ("IN", false, false),
        ("DT", true, false),
        ("JJ", false, false),
        ("NN", false, true),
        (".", false, false),
    ],
    &[
        ("DT", true, false),
        ("NN", false, true),
        ("IN", false, false),
        ("NNS", true, true),
        ("VBD", false, false),
        (".", false, false),
    ],
];

fn lexicon(pos: &str) -> &'static [&'static str] {
    match pos {
        "DT" => &["the", "a", "this"],
        "NN" => &["dog", "cat", "book", "house"],
        "NNS" => &["dogs", "books", "ideas"],
        "JJ" => &["big", "red", "old"],
        "PRP" => &["he", "him", "she"],
        "NNP" => &["John", "Mary", "Smith"],
        "VBZ" => &["sees", "likes"],
        "VBD" => &["gave", "saw"],
        "IN" => &["of", "in"],
        _ => &["."],
    }
}

/// Sentences whose chunks are fully determined by adjacent POS tags.
pub fn toy_corpus(sentences: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(sentences);
    #[allow(clippy::needless_range_loop)]
    for n in 0..sentences {
        // cycle through templates first so every one is present
        let template = if n < TEMPLATES.len() { TEMPLATES[n] } else { TEMPLATES[rng.gen_range(0..TEMPLATES.len())] };
        let mut tokens = Vec::new();
        let mut spans = Vec::new();
        let mut start = 0;
        for (i, &(pos, open, close)) in template.iter().enumerate() {
            let word = lexicon(pos).choose(&mut rng).unwrap();
            tokens.push(Token::new(*word, pos).unwrap());
            if open {
                start = i;
            }
            if close {
                spans.push((start, i));
            }
        }
        out.push(Sentence::new(tokens, Some(PhraseSet::from_pairs(&spans).unwrap())).unwrap());
    }
    Corpus::new(out)
}
