mod common;
mod oracles;

use std::collections::BTreeMap;

use basenp::learners::dataset::Dataset;
use basenp::learners::igtree::IgTreeModel;
use basenp::learners::knn::{KnnModel, Weighting};
use basenp::learners::maxent::{GisConfig, MaxEntModel};
use basenp::learners::nb::NbModel;
use basenp::learners::tdidt::TdidtModel;
use basenp::learners::{
    fold_assignment, run_cascade, CascadeConfig, Chunker, LearnerConfig, LearnerError, LearnerKind, SavedModel,
};
use basenp::{Chunking, Representation, TagScheme};
use common::toy_corpus;
use proptest::prelude::*;

fn entropy(labels: &[&str]) -> f64 {
    let mut counts: BTreeMap<&str, f64> = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1.0;
    }
    let n = labels.len() as f64;
    -counts.values().map(|c| c / n * (c / n).log2()).sum::<f64>()
}

/// Information gain straight from the definition.
fn info_gain(column: &[u32], labels: &[&str]) -> f64 {
    let mut groups: BTreeMap<u32, Vec<&str>> = BTreeMap::new();
    for (v, l) in column.iter().zip(labels) {
        groups.entry(*v).or_default().push(l);
    }
    let n = labels.len() as f64;
    entropy(labels) - groups.values().map(|g| g.len() as f64 / n * entropy(g)).sum::<f64>()
}

/// k-NN by exhaustive scan over the raw (non-deduplicated) instances.
fn knn_oracle(rows: &[Vec<u32>], labels: &[&str], weights: &[f64], k: usize, x: &[u32]) -> String {
    let dist: Vec<f64> =
        rows.iter().map(|r| r.iter().zip(x).zip(weights).filter(|((a, b), _)| a != b).map(|(_, w)| w).sum()).collect();
    let mut distinct: Vec<f64> = Vec::new();
    let mut sorted = dist.clone();
    sorted.sort_by(f64::total_cmp);
    for d in sorted {
        if distinct.last().is_none_or(|&last| d - last > 1e-9) {
            distinct.push(d);
        }
    }
    let cutoff = distinct[(k - 1).min(distinct.len() - 1)] + 1e-9;
    let mut votes: BTreeMap<&str, usize> = BTreeMap::new();
    for (d, l) in dist.iter().zip(labels) {
        if *d <= cutoff {
            *votes.entry(l).or_default() += 1;
        }
    }
    let freq = |c: &str| labels.iter().filter(|&&l| l == c).count();
    // most votes, then most frequent in training, then smallest name
    votes
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(freq(a.0).cmp(&freq(b.0))).then(b.0.cmp(a.0)))
        .unwrap()
        .0
        .to_string()
}

fn small_dataset() -> impl Strategy<Value = (Vec<Vec<u32>>, Vec<&'static str>, Vec<u32>, usize)> {
    (1usize..=20, 1usize..=4).prop_flat_map(|(n, arity)| {
        (
            prop::collection::vec(prop::collection::vec(0u32..3, arity), n),
            prop::collection::vec(prop::sample::select(vec!["A", "B", "C"]), n),
            prop::collection::vec(0u32..4, arity),
            1usize..=4,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn knn_matches_exhaustive_scan((rows, labels, x, k) in small_dataset()) {
        let refs: Vec<&[u32]> = rows.iter().map(Vec::as_slice).collect();
        let data = Dataset::from_table(&refs, &labels).unwrap();
        for weighting in [Weighting::InfoGain, Weighting::Uniform] {
            let model = KnnModel::train(&data, k, weighting).unwrap();
            let expected_weights: Vec<f64> = match weighting {
                Weighting::Uniform => vec![1.0; x.len()],
                _ => (0..x.len()).map(|f| info_gain(&data.column(f), &labels)).collect(),
            };
            for (a, b) in model.weights().iter().zip(&expected_weights) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let got = model.classes().name(model.classify(&x)).to_string();
            prop_assert_eq!(got, knn_oracle(&rows, &labels, &expected_weights, k, &x));
        }
    }

    #[test]
    fn trees_and_bayes_are_deterministic((rows, labels, x, _k) in small_dataset()) {
        let refs: Vec<&[u32]> = rows.iter().map(Vec::as_slice).collect();
        let data = Dataset::from_table(&refs, &labels).unwrap();
        let ig = IgTreeModel::train(&data).unwrap();
        let td = TdidtModel::train(&data).unwrap();
        let nb = NbModel::train(&data).unwrap();
        prop_assert_eq!(ig.classify(&x), IgTreeModel::train(&data).unwrap().classify(&x));
        prop_assert_eq!(td.classify(&x), TdidtModel::train(&data).unwrap().classify(&x));
        prop_assert_eq!(nb.classify(&x), NbModel::train(&data).unwrap().classify(&x));
        let total: f64 = nb.posterior(&x).iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn information_gain_edge_cases() {
    let labels = ["A", "B", "C", "A"];
    let data = Dataset::from_table(&[&[0, 5], &[1, 5], &[2, 5], &[0, 5]], &labels).unwrap();
    let w = KnnModel::train(&data, 1, Weighting::InfoGain).unwrap();
    assert!((w.weights()[0] - entropy(&labels)).abs() < 1e-12);
    assert_eq!(w.weights()[1], 0.0);
}

#[test]
fn gis_matches_dense_reference() {
    let events = oracles::gis_toy();
    let (preds, classes) = (oracles::GIS_PREDICATES, oracles::GIS_CLASSES);
    let contexts: Vec<Vec<String>> =
        events.iter().map(|(x, _)| x.iter().map(|&p| preds[p].to_string()).collect()).collect();
    let labels: Vec<&str> = events.iter().map(|(_, y)| classes[*y]).collect();
    let (model, trace) = MaxEntModel::train(&contexts, &labels, &GisConfig { iterations: 100, cutoff: 1 }).unwrap();
    let (w, wc, reference_trace) = oracles::dense_gis(&events, 2, 3, 100);
    assert_eq!(model.slack(), 2.0);
    for (p, name) in preds.iter().enumerate() {
        for (c, class) in classes.iter().enumerate() {
            let got = model.weight(name, class).unwrap();
            assert!((got - w[p][c]).abs() < 1e-6, "{name}/{class}: {got} vs {}", w[p][c]);
        }
    }
    assert!((model.correction_weight() - wc).abs() < 1e-6);
    assert_eq!(trace.len(), 101);
    for (a, b) in trace.iter().zip(&reference_trace) {
        assert!((a - b).abs() < 1e-6);
    }
    for pair in trace.windows(2) {
        assert!(pair[1] >= pair[0] - 1e-12);
    }
}

fn phrases(outputs: &[Chunking]) -> Vec<basenp::PhraseSet> {
    outputs.iter().map(Chunking::phrases).collect()
}

#[test]
fn every_learner_fits_a_conflict_free_corpus() {
    let corpus = toy_corpus(40, 7);
    let gold = corpus.gold().unwrap();
    for kind in LearnerKind::ALL {
        let mut config = LearnerConfig::default_for(kind);
        config.k = 1;
        config.cascade.enabled = false;
        for repr in Representation::ALL {
            // naive Bayes cannot tie a bracket to the neighbouring tag pair
            if kind == LearnerKind::NaiveBayes && repr == Representation::Brackets {
                continue;
            }
            let chunker = Chunker::train(&config, &corpus, repr).unwrap();
            let out = chunker.predict_corpus(&corpus).unwrap();
            assert_eq!(phrases(&out), gold, "{kind} {repr}");
            for c in &out {
                assert_eq!(c.representation(), repr);
            }
        }
    }
}

#[test]
fn saved_models_predict_identically() {
    let corpus = toy_corpus(30, 3);
    let test = toy_corpus(12, 99);
    for kind in LearnerKind::ALL {
        let config = LearnerConfig::default_for(kind);
        for repr in [Representation::Tags(TagScheme::Ioe1), Representation::Brackets] {
            let chunker = Chunker::train(&config, &corpus, repr).unwrap();
            let mut buf = Vec::new();
            SavedModel::new(config.clone(), chunker.clone()).save(&mut buf).unwrap();
            let loaded = SavedModel::load(buf.as_slice()).unwrap();
            assert_eq!(loaded.config, config);
            assert_eq!(loaded.chunker.predict_corpus(&test).unwrap(), chunker.predict_corpus(&test).unwrap());
        }
    }
}

#[test]
fn saved_model_rejects_foreign_files() {
    assert!(SavedModel::load(&b"{\"format\":\"other\"}"[..]).is_err());
    assert!(SavedModel::load(&b"not json"[..]).is_err());
}

#[test]
fn disabled_cascade_is_stage_one() {
    let corpus = toy_corpus(25, 11);
    let test = toy_corpus(10, 12);
    let config = LearnerConfig::default_for(LearnerKind::IgTree);
    let repr = Representation::Tags(TagScheme::Iob1);
    let off = CascadeConfig { enabled: false, ..config.cascade };
    let cascaded = Chunker::train(&config, &corpus, repr).unwrap();
    let plain = run_cascade(&config, &corpus, &test, repr, &off).unwrap();
    let stage1: Vec<Chunking> = test.sentences.iter().map(|s| cascaded.predict_stage1(s).unwrap()).collect();
    assert_eq!(plain, stage1);
}

#[test]
fn cascade_preserves_perfect_first_stage() {
    let corpus = toy_corpus(40, 5);
    let gold = corpus.gold().unwrap();
    let mut config = LearnerConfig::default_for(LearnerKind::Knn);
    config.k = 1;
    for scheme in TagScheme::ALL {
        let out = run_cascade(&config, &corpus, &corpus, Representation::Tags(scheme), &config.cascade).unwrap();
        assert_eq!(phrases(&out), gold, "{scheme}");
    }
}

#[test]
fn cascade_rejects_brackets() {
    let corpus = toy_corpus(10, 1);
    let config = LearnerConfig::default_for(LearnerKind::Knn);
    let r = run_cascade(&config, &corpus, &corpus, Representation::Brackets, &config.cascade);
    assert!(matches!(r, Err(LearnerError::CascadeOnBrackets)));
}

proptest! {
    #[test]
    fn folds_partition_the_sentences(n in 0usize..200, folds in 1usize..8, seed in any::<u64>()) {
        let a = fold_assignment(n, folds, seed);
        prop_assert_eq!(a.len(), n);
        let mut sizes = vec![0usize; folds];
        for &f in &a {
            prop_assert!(f < folds);
            sizes[f] += 1;
        }
        prop_assert_eq!(sizes.iter().sum::<usize>(), n);
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
        prop_assert_eq!(a, fold_assignment(n, folds, seed));
    }
}

#[test]
fn predictions_are_deterministic() {
    let corpus = toy_corpus(30, 21);
    let test = toy_corpus(15, 22);
    for kind in LearnerKind::ALL {
        let config = LearnerConfig::default_for(kind);
        let a = Chunker::train(&config, &corpus, Representation::Tags(TagScheme::Iob2)).unwrap();
        let b = Chunker::train(&config, &corpus, Representation::Tags(TagScheme::Iob2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.predict_corpus(&test).unwrap(), b.predict_corpus(&test).unwrap());
    }
}
