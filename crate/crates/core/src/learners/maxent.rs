//! Conditional maximum entropy classifier trained by generalized iterative
//! scaling (GIS).
//!
//! A feature is a (context predicate, class) pair observed in training at
//! least `cutoff` times. GIS needs every event to have the same feature sum
//! `C`, so a correction feature `C - active(x, y)` is added, with `C` the
//! largest active count seen in training. Each iteration applies
//!
//! ```text
//! w_f += ln(empirical_f / model_f) / C
//! ```
//!
//! to every feature, which never lowers the training log-likelihood. The
//! correction weight is only updated while its empirical expectation is
//! positive.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::dataset::Classes;
use super::features::{FeatureVector, Slot};
use super::LearnerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GisConfig {
    pub iterations: usize,
    /// Minimum (predicate, class) count for a feature to be kept.
    pub cutoff: usize,
}

impl Default for GisConfig {
    fn default() -> Self {
        GisConfig { iterations: 100, cutoff: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxEntModel {
    classes: Classes,
    predicates: BTreeMap<String, u32>,
    /// Per predicate id: (class, weight) of its retained features.
    params: Vec<Vec<(u32, f64)>>,
    correction: f64,
    slack: f64,
}

struct Event {
    predicates: Vec<u32>,
    class: u32,
}

impl MaxEntModel {
    /// Fits the model; also returns the training log-likelihood before the
    /// first iteration and after each one.
    pub fn train<S: AsRef<str>>(
        contexts: &[Vec<String>],
        labels: &[S],
        config: &GisConfig,
    ) -> Result<(Self, Vec<f64>), LearnerError> {
        if contexts.is_empty() {
            return Err(LearnerError::EmptyTrainingSet);
        }
        if contexts.len() != labels.len() {
            return Err(LearnerError::Shape(format!("{} contexts, {} labels", contexts.len(), labels.len())));
        }
        let (classes, ids) = Classes::from_labels(labels);
        let n_classes = classes.len();

        let mut predicates: BTreeMap<String, u32> = BTreeMap::new();
        let events: Vec<Event> = contexts
            .iter()
            .zip(&ids)
            .map(|(ctx, &class)| {
                let set: BTreeSet<u32> = ctx
                    .iter()
                    .map(|p| {
                        let next = predicates.len() as u32;
                        *predicates.entry(p.clone()).or_insert(next)
                    })
                    .collect();
                Event { predicates: set.into_iter().collect(), class }
            })
            .collect();

        // joint (predicate, class) counts decide which features exist
        let mut joint = vec![vec![0usize; n_classes]; predicates.len()];
        for e in &events {
            for &p in &e.predicates {
                joint[p as usize][e.class as usize] += 1;
            }
        }
        let cutoff = config.cutoff.max(1);
        let mut feature_of: Vec<Vec<(u32, usize)>> = vec![Vec::new(); predicates.len()];
        let mut empirical = Vec::new();
        for (p, counts) in joint.iter().enumerate() {
            for (c, &n) in counts.iter().enumerate() {
                if n >= cutoff {
                    feature_of[p].push((c as u32, empirical.len()));
                    empirical.push(n as f64);
                }
            }
        }

        let active = |e: &Event, class: u32| -> usize {
            e.predicates.iter().map(|&p| feature_of[p as usize].iter().filter(|(c, _)| *c == class).count()).sum()
        };
        let slack = events
            .iter()
            .flat_map(|e| (0..n_classes as u32).map(move |c| (e, c)))
            .map(|(e, c)| active(e, c))
            .max()
            .unwrap_or(0)
            .max(1) as f64;
        let correction_empirical: f64 = events.iter().map(|e| slack - active(e, e.class) as f64).sum();

        let mut weights = vec![0.0; empirical.len()];
        let mut correction = 0.0;
        let mut trace = Vec::with_capacity(config.iterations + 1);
        let mut scores = vec![0.0; n_classes];
        let mut counts = vec![0usize; n_classes];

        for iteration in 0..=config.iterations {
            let mut expected = vec![0.0; weights.len()];
            let mut correction_expected = 0.0;
            let mut loglik = 0.0;
            for e in &events {
                scores.iter_mut().for_each(|s| *s = 0.0);
                counts.iter_mut().for_each(|c| *c = 0);
                for &p in &e.predicates {
                    for &(c, f) in &feature_of[p as usize] {
                        scores[c as usize] += weights[f];
                        counts[c as usize] += 1;
                    }
                }
                for (s, &n) in scores.iter_mut().zip(&counts) {
                    *s += correction * (slack - n as f64);
                }
                let probs = softmax(&scores);
                loglik += probs[e.class as usize].ln();
                if iteration == config.iterations {
                    continue;
                }
                for &p in &e.predicates {
                    for &(c, f) in &feature_of[p as usize] {
                        expected[f] += probs[c as usize];
                    }
                }
                for (prob, &n) in probs.iter().zip(&counts) {
                    correction_expected += prob * (slack - n as f64);
                }
            }
            trace.push(loglik);
            if iteration == config.iterations {
                break;
            }
            for ((w, &emp), &exp) in weights.iter_mut().zip(&empirical).zip(&expected) {
                if exp > 0.0 {
                    *w += (emp / exp).ln() / slack;
                }
            }
            if correction_empirical > 0.0 && correction_expected > 0.0 {
                correction += (correction_empirical / correction_expected).ln() / slack;
            }
        }

        let params = feature_of.iter().map(|fs| fs.iter().map(|&(c, f)| (c, weights[f])).collect()).collect();
        Ok((MaxEntModel { classes, predicates, params, correction, slack }, trace))
    }

    pub fn classes(&self) -> &Classes {
        &self.classes
    }

    /// Weight of the (predicate, class) feature, if it was retained.
    pub fn weight(&self, predicate: &str, class: &str) -> Option<f64> {
        let p = *self.predicates.get(predicate)?;
        let c = self.classes.id(class)?;
        self.params[p as usize].iter().find(|(fc, _)| *fc == c).map(|&(_, w)| w)
    }

    pub fn correction_weight(&self) -> f64 {
        self.correction
    }

    /// The GIS constant `C`.
    pub fn slack(&self) -> f64 {
        self.slack
    }

    pub fn feature_count(&self) -> usize {
        self.params.iter().map(Vec::len).sum()
    }

    pub fn scores<S: AsRef<str>>(&self, context: &[S]) -> Vec<f64> {
        let n_classes = self.classes.len();
        let mut scores = vec![0.0; n_classes];
        let mut counts = vec![0usize; n_classes];
        let ids: BTreeSet<u32> = context.iter().filter_map(|p| self.predicates.get(p.as_ref()).copied()).collect();
        for p in ids {
            for &(c, w) in &self.params[p as usize] {
                scores[c as usize] += w;
                counts[c as usize] += 1;
            }
        }
        for (s, &n) in scores.iter_mut().zip(&counts) {
            *s += self.correction * (self.slack - n as f64);
        }
        scores
    }

    pub fn probabilities<S: AsRef<str>>(&self, context: &[S]) -> Vec<f64> {
        softmax(&self.scores(context))
    }

    pub fn classify<S: AsRef<str>>(&self, context: &[S]) -> u32 {
        self.classes.best(&self.scores(context))
    }
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / z).collect()
}

/// Context predicates for a feature vector: one per slot value, plus POS
/// bigrams around the focus, the previous-tag bigram and previous tag x
/// focus POS.
pub fn context_predicates(fv: &FeatureVector) -> Vec<String> {
    let mut out = Vec::with_capacity(fv.len() + 5);
    out.push("bias".to_string());
    for (slot, value) in &fv.values {
        out.push(format!("{slot}={value}"));
    }
    let pair = |a: Slot, b: Slot| fv.get(a).zip(fv.get(b));
    if let Some((l, f)) = pair(Slot::Pos(-1), Slot::Pos(0)) {
        out.push(format!("p-1p0={l}|{f}"));
    }
    if let Some((f, r)) = pair(Slot::Pos(0), Slot::Pos(1)) {
        out.push(format!("p0p+1={f}|{r}"));
    }
    if let Some((t2, t1)) = pair(Slot::Prev(2), Slot::Prev(1)) {
        out.push(format!("t-2t-1={t2}|{t1}"));
    }
    if let Some((t1, p)) = pair(Slot::Prev(1), Slot::Pos(0)) {
        out.push(format!("t-1p0={t1}|{p}"));
    }
    out
}
