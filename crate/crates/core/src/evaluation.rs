//! Phrase precision, recall and F-score, plus bracket accuracies.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chunk::{pair_brackets, to_brackets, BracketStream, PhraseSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("beta must be positive, got {0}")]
    BadBeta(f64),
    #[error("{what}: {left} vs {right}")]
    Misaligned { what: &'static str, left: usize, right: usize },
    #[error("sentence {sentence}: phrase ends at {end} but sentence has {len} words")]
    OutOfRange { sentence: usize, end: usize, len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub found_correct: usize,
    pub found_total: usize,
    pub gold_total: usize,
    pub precision: f64,
    pub recall: f64,
    pub beta: f64,
    pub f_beta: f64,
    pub accuracy_open: f64,
    pub accuracy_close: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Weighted harmonic mean of precision and recall, 0 when both are 0.
pub fn f_beta(precision: f64, recall: f64, beta: f64) -> Result<f64, EvalError> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(EvalError::BadBeta(beta));
    }
    let b2 = beta * beta;
    let den = b2 * precision + recall;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 + b2) * precision * recall / den)
}

/// Scores predicted phrases against gold phrases (micro-averaged, F1).
pub fn evaluate(pred: &[PhraseSet], gold: &[PhraseSet], lengths: &[usize]) -> Result<EvalReport, EvalError> {
    evaluate_beta(pred, gold, lengths, 1.0)
}

pub fn evaluate_beta(
    pred: &[PhraseSet],
    gold: &[PhraseSet],
    lengths: &[usize],
    beta: f64,
) -> Result<EvalReport, EvalError> {
    check_len("predicted vs gold sentences", pred.len(), gold.len())?;
    check_len("sentences vs lengths", pred.len(), lengths.len())?;
    for (i, (p, &n)) in pred.iter().zip(lengths).enumerate() {
        check_fits(i, p, n)?;
    }
    let streams: Vec<BracketStream> = pred.iter().zip(lengths).map(|(p, &n)| to_brackets(p, n)).collect();
    score(pred, &streams, gold, lengths, beta)
}

/// Scores raw bracket streams: accuracies come from the streams themselves,
/// phrase scores from their shortest-phrase pairing.
pub fn evaluate_streams(pred: &[BracketStream], gold: &[PhraseSet]) -> Result<EvalReport, EvalError> {
    check_len("predicted vs gold sentences", pred.len(), gold.len())?;
    let lengths: Vec<usize> = pred.iter().map(BracketStream::len).collect();
    let phrases: Vec<PhraseSet> = pred.iter().map(pair_brackets).collect();
    score(&phrases, pred, gold, &lengths, 1.0)
}

fn check_len(what: &'static str, left: usize, right: usize) -> Result<(), EvalError> {
    if left != right {
        return Err(EvalError::Misaligned { what, left, right });
    }
    Ok(())
}

fn check_fits(sentence: usize, p: &PhraseSet, len: usize) -> Result<(), EvalError> {
    match p.spans().last() {
        Some(last) if last.end >= len => Err(EvalError::OutOfRange { sentence, end: last.end, len }),
        _ => Ok(()),
    }
}

fn score(
    pred: &[PhraseSet],
    streams: &[BracketStream],
    gold: &[PhraseSet],
    lengths: &[usize],
    beta: f64,
) -> Result<EvalReport, EvalError> {
    let (mut correct, mut found, mut total) = (0, 0, 0);
    let (mut open_ok, mut close_ok, mut words) = (0, 0, 0);
    for (i, ((p, g), (&n, stream))) in pred.iter().zip(gold).zip(lengths.iter().zip(streams)).enumerate() {
        check_fits(i, p, n)?;
        check_fits(i, g, n)?;
        check_len("stream vs sentence length", stream.len(), n)?;
        found += p.len();
        total += g.len();
        correct += p.spans().iter().filter(|s| g.contains(s)).count();
        let truth = to_brackets(g, n);
        open_ok += (0..n).filter(|&w| stream.open[w] == truth.open[w]).count();
        close_ok += (0..n).filter(|&w| stream.close[w] == truth.close[w]).count();
        words += n;
    }
    let precision = ratio(correct, found);
    let recall = ratio(correct, total);
    Ok(EvalReport {
        found_correct: correct,
        found_total: found,
        gold_total: total,
        precision,
        recall,
        beta,
        f_beta: f_beta(precision, recall, beta)?,
        accuracy_open: ratio(open_ok, words),
        accuracy_close: ratio(close_ok, words),
    })
}

/// Fixed-width table in the usual O / C / P / R / F layout.
pub fn render_report(reports: &[(String, EvalReport)]) -> String {
    let width = reports.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(6);
    let mut out = String::new();
    let _ =
        writeln!(out, "{:<width$}  {:>7}  {:>7}  {:>9}  {:>7}  {:>6}", "system", "O", "C", "precision", "recall", "F");
    for (name, r) in reports {
        let _ = writeln!(
            out,
            "{:<width$}  {:>6.2}%  {:>6.2}%  {:>8.2}%  {:>6.2}%  {:>6.2}",
            name,
            100.0 * r.accuracy_open,
            100.0 * r.accuracy_close,
            100.0 * r.precision,
            100.0 * r.recall,
            100.0 * r.f_beta,
        );
    }
    out
}

/// One `name.metric=value` line per metric.
pub fn render_key_values(reports: &[(String, EvalReport)]) -> String {
    let mut out = String::new();
    for (name, r) in reports {
        let _ = writeln!(out, "{name}.found_correct={}", r.found_correct);
        let _ = writeln!(out, "{name}.found_total={}", r.found_total);
        let _ = writeln!(out, "{name}.gold_total={}", r.gold_total);
        let _ = writeln!(out, "{name}.accuracy_open={:.6}", r.accuracy_open);
        let _ = writeln!(out, "{name}.accuracy_close={:.6}", r.accuracy_close);
        let _ = writeln!(out, "{name}.precision={:.6}", r.precision);
        let _ = writeln!(out, "{name}.recall={:.6}", r.recall);
        let _ = writeln!(out, "{name}.f_beta={:.6}", r.f_beta);
    }
    out
}
