//! Independent reference computations shared by the test targets.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use basenp::chunk::to_brackets;
use basenp::{BracketStream, PhraseSet, Span};
use rand::{Rng, SeedableRng};

/// Every set of non-overlapping spans over `len` words.
pub fn all_phrase_sets(len: usize) -> Vec<PhraseSet> {
    fn go(start: usize, len: usize, acc: &mut Vec<Span>, out: &mut Vec<PhraseSet>) {
        if start >= len {
            out.push(PhraseSet::new(acc.clone()).unwrap());
            return;
        }
        go(start + 1, len, acc, out);
        for end in start..len {
            acc.push(Span::new(start, end));
            go(end + 1, len, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(0, len, &mut Vec::new(), &mut out);
    out
}

/// A random valid phrase set; `density` is the chance a word opens a phrase.
pub fn random_phrase_set<R: Rng>(rng: &mut R, len: usize, density: f64) -> PhraseSet {
    let mut spans = Vec::new();
    let mut i = 0;
    while i < len {
        if rng.gen_bool(density) {
            let end = rng.gen_range(i..len.min(i + 4));
            spans.push(Span::new(i, end));
            i = end + 1;
        } else {
            i += 1;
        }
    }
    PhraseSet::new(spans).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counts {
    pub correct: usize,
    pub found: usize,
    pub gold: usize,
    pub open_ok: usize,
    pub close_ok: usize,
    pub words: usize,
}

/// Scoring by explicit set intersection over (sentence, start, end) triples.
pub fn brute_force_counts(pred: &[PhraseSet], gold: &[PhraseSet], lengths: &[usize]) -> Counts {
    let triples = |sets: &[PhraseSet]| -> BTreeSet<(usize, usize, usize)> {
        sets.iter().enumerate().flat_map(|(s, p)| p.spans().iter().map(move |sp| (s, sp.start, sp.end))).collect()
    };
    let (p, g) = (triples(pred), triples(gold));
    let mut c = Counts {
        correct: p.intersection(&g).count(),
        found: p.len(),
        gold: g.len(),
        open_ok: 0,
        close_ok: 0,
        words: 0,
    };
    for (s, &n) in lengths.iter().enumerate() {
        for w in 0..n {
            let opens = |set: &BTreeSet<(usize, usize, usize)>| set.iter().any(|&(x, a, _)| x == s && a == w);
            let closes = |set: &BTreeSet<(usize, usize, usize)>| set.iter().any(|&(x, _, b)| x == s && b == w);
            c.open_ok += (opens(&p) == opens(&g)) as usize;
            c.close_ok += (closes(&p) == closes(&g)) as usize;
            c.words += 1;
        }
    }
    c
}

/// Dense GIS written against the textbook update: every class is scored
/// explicitly and the correction feature is its own column. Returns
/// weights[predicate][class], the correction weight and the log-likelihood
/// trace.
pub fn dense_gis(
    events: &[(Vec<usize>, usize)],
    n_preds: usize,
    n_classes: usize,
    iterations: usize,
) -> (Vec<Vec<f64>>, f64, Vec<f64>) {
    let has = |x: &[usize], p: usize| x.contains(&p) as u8 as f64;
    let active = |x: &[usize]| x.len() as f64;
    let big_c = events.iter().map(|(x, _)| active(x)).fold(1.0, f64::max);
    let mut empirical = vec![vec![0.0; n_classes]; n_preds];
    let mut corr_emp = 0.0;
    for (x, y) in events {
        for (p, row) in empirical.iter_mut().enumerate() {
            row[*y] += has(x, p);
        }
        corr_emp += big_c - active(x);
    }
    let mut w = vec![vec![0.0; n_classes]; n_preds];
    let mut wc = 0.0;
    let mut trace = Vec::new();
    for it in 0..=iterations {
        let mut expected = vec![vec![0.0; n_classes]; n_preds];
        let mut corr_exp = 0.0;
        let mut ll = 0.0;
        for (x, y) in events {
            let raw: Vec<f64> = (0..n_classes)
                .map(|c| (0..n_preds).map(|p| w[p][c] * has(x, p)).sum::<f64>() + wc * (big_c - active(x)))
                .collect();
            let z: f64 = raw.iter().map(|s| s.exp()).sum();
            let prob: Vec<f64> = raw.iter().map(|s| s.exp() / z).collect();
            ll += prob[*y].ln();
            for c in 0..n_classes {
                for (p, row) in expected.iter_mut().enumerate() {
                    row[c] += prob[c] * has(x, p);
                }
                corr_exp += prob[c] * (big_c - active(x));
            }
        }
        trace.push(ll);
        if it == iterations {
            break;
        }
        for p in 0..n_preds {
            for c in 0..n_classes {
                if empirical[p][c] > 0.0 {
                    w[p][c] += (empirical[p][c] / expected[p][c]).ln() / big_c;
                }
            }
        }
        if corr_emp > 0.0 {
            wc += (corr_emp / corr_exp).ln() / big_c;
        }
    }
    (w, wc, trace)
}

/// Toy problem for GIS: three classes, two predicates, every (predicate,
/// class) pair attested.
pub fn gis_toy() -> Vec<(Vec<usize>, usize)> {
    vec![
        (vec![0], 0),
        (vec![0], 0),
        (vec![0, 1], 1),
        (vec![1], 2),
        (vec![0, 1], 2),
        (vec![1], 1),
        (vec![0], 2),
        (vec![1], 0),
        (vec![0, 1], 0),
    ]
}

pub const GIS_PREDICATES: [&str; 2] = ["a", "b"];
pub const GIS_CLASSES: [&str; 3] = ["X", "Y", "Z"];

/// Flattened (open, close) decisions of one classifier over a corpus.
pub fn flatten(streams: &[BracketStream]) -> [Vec<bool>; 2] {
    [
        streams.iter().flat_map(|s| s.open.iter().copied()).collect(),
        streams.iter().flat_map(|s| s.close.iter().copied()).collect(),
    ]
}

/// TagPair decisions recomputed from raw tuning tables; a lone classifier
/// votes its precision.
/// `tune[c][side]` and `truth[side]` are flattened tuning decisions; the
/// result is the decision per flattened test word and side.
pub fn tagpair_oracle(tune: &[[Vec<bool>; 2]], truth: &[Vec<bool>; 2], test: &[[Vec<bool>; 2]]) -> [Vec<bool>; 2] {
    let m = tune.len();
    let mut out: [Vec<bool>; 2] = [Vec::new(), Vec::new()];
    for side in 0..2 {
        let acc = |c: usize| {
            let ok = tune[c][side].iter().zip(&truth[side]).filter(|(a, b)| a == b).count();
            ok as f64 / truth[side].len() as f64
        };
        let precision = |c: usize, v: bool| {
            let assigned = tune[c][side].iter().filter(|&&o| o == v).count();
            let right = tune[c][side].iter().zip(&truth[side]).filter(|(&o, &g)| o == v && g == v).count();
            if assigned == 0 {
                acc(c)
            } else {
                right as f64 / assigned as f64
            }
        };
        #[allow(clippy::needless_range_loop)] // w indexes every classifier
        for w in 0..test[0][side].len() {
            let mut votes: BTreeMap<bool, Vec<f64>> = BTreeMap::new();
            if m == 1 {
                let x = test[0][side][w];
                votes.entry(x).or_default().push(precision(0, x));
            }
            for i in 0..m {
                for j in i + 1..m {
                    let (x, y) = (test[i][side][w], test[j][side][w]);
                    let matching: Vec<bool> = (0..truth[side].len())
                        .filter(|&k| tune[i][side][k] == x && tune[j][side][k] == y)
                        .map(|k| truth[side][k])
                        .collect();
                    if matching.is_empty() {
                        votes.entry(x).or_default().push(precision(i, x));
                        votes.entry(y).or_default().push(precision(j, y));
                    } else {
                        let n = matching.len();
                        let t = matching.iter().filter(|&&g| g).count();
                        votes.entry(true).or_default().push(t as f64 / n as f64);
                        votes.entry(false).or_default().push((n - t) as f64 / n as f64);
                    }
                }
            }
            let total = |v: bool| {
                let mut parts = votes.get(&v).cloned().unwrap_or_default();
                parts.sort_by(f64::total_cmp);
                parts.into_iter().sum::<f64>()
            };
            let (t, f) = (total(true), total(false));
            // relative tie band
            out[side].push(t - f > 1e-9 * (t.abs() + f.abs()));
        }
    }
    out
}

/// Three classifiers that are each wrong on a disjoint 15% of the words of
/// a gold corpus. Returns (gold, lengths, outputs[classifier][sentence]).
pub fn disjoint_error_ensemble() -> (Vec<PhraseSet>, Vec<usize>, Vec<Vec<BracketStream>>) {
    // 20 sentences of 10 words: phrases at 1-2, 4-4 and 6-8
    let lengths = vec![10usize; 20];
    let gold: Vec<PhraseSet> =
        lengths.iter().map(|_| PhraseSet::from_pairs(&[(1, 2), (4, 4), (6, 8)]).unwrap()).collect();
    let words: usize = lengths.iter().sum();
    let mut outputs = Vec::new();
    for c in 0..3 {
        let mut streams: Vec<BracketStream> = gold.iter().zip(&lengths).map(|(g, &n)| to_brackets(g, n)).collect();
        // classifier c errs on flattened words [c*30, c*30+30): 15% each, disjoint
        for flat in c * words * 15 / 100..(c + 1) * words * 15 / 100 {
            let (s, w) = (flat / 10, flat % 10);
            streams[s].open[w] = !streams[s].open[w];
        }
        outputs.push(streams);
    }
    (gold, lengths, outputs)
}

/// Word accuracy: both bracket decisions right.
pub fn word_accuracy(pred: &[BracketStream], gold: &[PhraseSet]) -> f64 {
    let mut ok = 0;
    let mut total = 0;
    for (p, g) in pred.iter().zip(gold) {
        let t = to_brackets(g, p.len());
        for w in 0..p.len() {
            ok += (p.open[w] == t.open[w] && p.close[w] == t.close[w]) as usize;
            total += 1;
        }
    }
    ok as f64 / total as f64
}

use basenp::combination::{estimate_weights, vote, StreamBundle, VoteMethod, VoteWeights};
use rand::seq::SliceRandom;

/// Gold streams with each classifier's bits flipped at its own error rate.
pub fn noisy_bundle<R: Rng>(rng: &mut R, gold: &[PhraseSet], lengths: &[usize], rates: &[f64]) -> StreamBundle {
    let streams = rates
        .iter()
        .map(|&rate| {
            gold.iter()
                .zip(lengths)
                .map(|(g, &n)| {
                    let mut s = to_brackets(g, n);
                    for w in 0..n {
                        if rng.gen_bool(rate) {
                            s.open[w] = !s.open[w];
                        }
                        if rng.gen_bool(rate) {
                            s.close[w] = !s.close[w];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect();
    StreamBundle::new((0..rates.len()).map(|i| format!("c{i}")).collect(), streams).unwrap()
}

fn flat_accuracy(weights: &VoteWeights, scale: f64) -> VoteWeights {
    let mut w = weights.with_method(VoteMethod::TotPrecision);
    for per_side in &mut w.stats {
        for s in per_side.iter_mut() {
            s.accuracy *= scale;
        }
    }
    w
}

/// Checks the voting invariants on one random tuning/test scenario and
/// returns the names of any that fail.
///
/// - unanimity: classifiers that agree are followed (all classifiers here
///   are better than chance, which the weighted methods require)
/// - majority correctness: a strict majority of correct votes wins
/// - permutation invariance: reordering classifiers changes nothing
/// - equal-weight TotPrecision reproduces Majority
/// - scaling every TotPrecision weight keeps every decision
pub fn voting_property_failures(seed: u64) -> Vec<&'static str> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(1..=7);
    let rates: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..0.12)).collect();
    let tune_lengths: Vec<usize> = (0..rng.gen_range(20..40)).map(|_| rng.gen_range(4..15)).collect();
    let tune_gold: Vec<PhraseSet> = tune_lengths.iter().map(|&n| random_phrase_set(&mut rng, n, 0.35)).collect();
    let tune = noisy_bundle(&mut rng, &tune_gold, &tune_lengths, &rates);
    let test_lengths: Vec<usize> = (0..rng.gen_range(1..6)).map(|_| rng.gen_range(1..15)).collect();
    let test_gold: Vec<PhraseSet> = test_lengths.iter().map(|&n| random_phrase_set(&mut rng, n, 0.35)).collect();
    let noisy_rates: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..0.5)).collect();
    let test = noisy_bundle(&mut rng, &test_gold, &test_lengths, &noisy_rates);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng);

    let mut failures = Vec::new();
    let mut fail = |name: &'static str| {
        if !failures.contains(&name) {
            failures.push(name);
        }
    };
    let base = estimate_weights(&tune, &tune_gold, VoteMethod::Majority).unwrap();
    let permuted_tune = tune.permuted(&order);
    let permuted_base = estimate_weights(&permuted_tune, &tune_gold, VoteMethod::Majority).unwrap();

    // unanimous copies of one classifier's test output
    let template = test.streams(rng.gen_range(0..m)).to_vec();
    let unanimous = StreamBundle::new(test.names().to_vec(), vec![template.clone(); m]).unwrap();

    for method in VoteMethod::ALL {
        let w = base.with_method(method);
        if vote(&unanimous, &w).unwrap() != template {
            fail("unanimity");
        }
        let out = vote(&test, &w).unwrap();
        let permuted = vote(&test.permuted(&order), &permuted_base.with_method(method)).unwrap();
        if out != permuted {
            fail("permutation invariance");
        }
    }

    let majority = vote(&test, &base).unwrap();
    let truth: Vec<BracketStream> = test_gold.iter().zip(&test_lengths).map(|(g, &n)| to_brackets(g, n)).collect();
    for (s, t) in truth.iter().enumerate() {
        for side in basenp::Side::BOTH {
            for w in 0..t.len() {
                let correct = test.decisions(s, w, side).iter().filter(|&&d| d == t.side(side)[w]).count();
                if 2 * correct > m && majority[s].side(side)[w] != t.side(side)[w] {
                    fail("majority correctness");
                }
            }
        }
    }

    let mut equal = flat_accuracy(&base, 1.0);
    for per_side in &mut equal.stats {
        for s in per_side.iter_mut() {
            s.accuracy = 0.8;
        }
    }
    if vote(&test, &equal).unwrap() != majority {
        fail("equal-weight TotPrecision");
    }
    let tot = vote(&test, &flat_accuracy(&base, 1.0)).unwrap();
    for scale in [0.5, 2.0, 10.0] {
        if vote(&test, &flat_accuracy(&base, scale)).unwrap() != tot {
            fail("weight scaling");
        }
    }
    failures
}
