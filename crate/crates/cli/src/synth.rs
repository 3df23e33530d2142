//! Synthetic chunked corpora.
//!
//! Sentences come from a small grammar over a fixed lexicon. Some words
//! belong to several parts of speech, and a small share of POS tags is
//! replaced by a confusable tag after the chunks are fixed, so the data is
//! learnable but not trivially separable.

use basenp::{Corpus, PhraseSet, Sentence, Token};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub sentences: usize,
    pub seed: u64,
    /// Probability that a token's POS tag is swapped for a confusable one.
    pub pos_noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { sentences: 200, seed: 1, pos_noise: 0.04 }
    }
}

fn lexicon(pos: &str) -> &'static [&'static str] {
    match pos {
        "DT" => &["the", "a", "an", "this", "that", "every", "some", "no"],
        "JJ" => &["big", "small", "old", "new", "red", "strong", "quiet", "public", "total", "early", "light", "major"],
        "NN" => &[
            "company", "market", "price", "report", "rate", "plan", "board", "record", "share", "dog", "house",
            "light", "change", "state", "deal", "bank", "week", "year", "book", "stock",
        ],
        "NNS" => &["shares", "prices", "investors", "years", "reports", "plans", "changes", "banks", "dogs", "records"],
        "NNP" => &["Smith", "Mary", "John", "London", "Tokyo", "IBM", "Ford", "Jones", "Paris", "Reuters"],
        "PRP" => &["he", "she", "it", "they", "we", "him", "them", "us"],
        "PRP$" => &["his", "her", "its", "their", "our"],
        "CD" => &["two", "three", "10", "42", "1990", "five"],
        "VBD" => &["said", "rose", "fell", "bought", "sold", "gave", "saw", "reported", "changed", "closed"],
        "VBZ" => &["says", "rises", "falls", "buys", "sells", "gives", "sees", "plans", "records", "changes"],
        "VBN" => &["sold", "reported", "changed", "closed", "bought"],
        "MD" => &["will", "could", "may"],
        "VB" => &["buy", "sell", "record", "change", "report", "plan", "light"],
        "IN" => &["of", "in", "on", "for", "with", "by", "at", "from"],
        "RB" => &["also", "sharply", "recently", "not", "still"],
        "CC" => &["and", "but"],
        "TO" => &["to"],
        "," => &[","],
        _ => &["."],
    }
}

// tags a noisy tagger tends to confuse
fn confusable(pos: &str) -> &'static [&'static str] {
    match pos {
        "NN" => &["JJ", "VB", "NNP"],
        "JJ" => &["NN", "VBN"],
        "VBD" => &["VBN"],
        "VBN" => &["VBD", "JJ"],
        "VBZ" => &["NNS"],
        "NNS" => &["VBZ"],
        "VB" => &["NN"],
        "NNP" => &["NN"],
        "IN" => &["RB"],
        "RB" => &["IN"],
        _ => &[],
    }
}

struct Builder<'r> {
    rng: &'r mut ChaCha8Rng,
    tokens: Vec<(String, String)>,
    spans: Vec<(usize, usize)>,
}

impl Builder<'_> {
    fn word(&mut self, pos: &str) {
        let w = lexicon(pos).choose(self.rng).expect("non-empty lexicon");
        self.tokens.push((w.to_string(), pos.to_string()));
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn noun_phrase(&mut self) {
        let start = self.tokens.len();
        match self.rng.gen_range(0..10) {
            0 | 1 => {
                self.word("PRP");
            }
            2 => {
                self.word("NNP");
                if self.chance(0.4) {
                    self.word("NNP");
                }
            }
            3 => {
                self.word("CD");
                self.word("NNS");
            }
            4 => {
                self.word("PRP$");
                if self.chance(0.3) {
                    self.word("JJ");
                }
                self.word("NN");
            }
            _ => {
                if self.chance(0.8) {
                    self.word("DT");
                }
                for _ in 0..self.rng.gen_range(0..3) {
                    self.word("JJ");
                }
                if self.chance(0.25) {
                    self.word("NN");
                }
                let head = if self.chance(0.7) { "NN" } else { "NNS" };
                self.word(head);
            }
        }
        self.spans.push((start, self.tokens.len() - 1));
    }

    fn prepositional_phrase(&mut self) {
        self.word("IN");
        self.noun_phrase();
    }

    fn verb_phrase(&mut self) {
        match self.rng.gen_range(0..6) {
            0 => {
                // ditransitive: two adjacent noun phrases
                self.word("VBD");
                self.noun_phrase();
                self.noun_phrase();
            }
            1 => {
                self.word("MD");
                if self.chance(0.3) {
                    self.word("RB");
                }
                self.word("VB");
                self.noun_phrase();
            }
            2 => {
                let v = if self.chance(0.5) { "VBD" } else { "VBZ" };
                self.word(v);
                self.word("RB");
            }
            3 => {
                self.word("VBD");
                self.word("TO");
                self.word("VB");
                self.noun_phrase();
            }
            _ => {
                let v = if self.chance(0.5) { "VBD" } else { "VBZ" };
                self.word(v);
                self.noun_phrase();
            }
        }
        while self.chance(0.35) {
            self.prepositional_phrase();
        }
    }

    fn clause(&mut self) {
        self.noun_phrase();
        if self.chance(0.2) {
            self.prepositional_phrase();
        }
        self.verb_phrase();
    }
}

fn sentence(rng: &mut ChaCha8Rng, pos_noise: f64) -> Sentence {
    let mut b = Builder { rng, tokens: Vec::new(), spans: Vec::new() };
    b.clause();
    if b.chance(0.25) {
        let join = if b.chance(0.5) { "," } else { "CC" };
        b.word(join);
        b.clause();
    }
    b.word(".");
    let Builder { rng, tokens, spans } = b;
    let tokens = tokens
        .into_iter()
        .map(|(word, pos)| {
            let options = confusable(&pos);
            let pos = if !options.is_empty() && rng.gen_bool(pos_noise) {
                options.choose(rng).expect("non-empty").to_string()
            } else {
                pos
            };
            Token::new(word, pos).expect("lexicon tokens are valid")
        })
        .collect();
    let gold = PhraseSet::from_pairs(&spans).expect("grammar yields disjoint phrases");
    Sentence::new(tokens, Some(gold)).expect("non-empty sentence")
}

/// Generates an annotated corpus; identical configs give identical output.
pub fn generate(config: &SynthConfig) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    Corpus::new((0..config.sentences).map(|_| sentence(&mut rng, config.pos_noise)).collect())
}
