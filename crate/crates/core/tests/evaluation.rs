mod oracles;

use basenp::chunk::to_brackets;
use basenp::evaluation::{evaluate, evaluate_streams, f_beta, render_key_values, render_report};
use basenp::PhraseSet;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn matches_set_intersection_on_random_corpora() {
    let mut rng = ChaCha8Rng::seed_from_u64(2000);
    for _ in 0..200 {
        let sentences = rng.gen_range(1..8);
        let lengths: Vec<usize> = (0..sentences).map(|_| rng.gen_range(1..12)).collect();
        let gold: Vec<PhraseSet> = lengths.iter().map(|&n| oracles::random_phrase_set(&mut rng, n, 0.4)).collect();
        let pred: Vec<PhraseSet> = lengths.iter().map(|&n| oracles::random_phrase_set(&mut rng, n, 0.4)).collect();
        let r = evaluate(&pred, &gold, &lengths).unwrap();
        let c = oracles::brute_force_counts(&pred, &gold, &lengths);
        assert_eq!((r.found_correct, r.found_total, r.gold_total), (c.correct, c.found, c.gold));
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        assert_eq!(r.precision, ratio(c.correct, c.found));
        assert_eq!(r.recall, ratio(c.correct, c.gold));
        assert_eq!(r.accuracy_open, ratio(c.open_ok, c.words));
        assert_eq!(r.accuracy_close, ratio(c.close_ok, c.words));

        // streams derived from valid phrases score identically
        let streams: Vec<_> = pred.iter().zip(&lengths).map(|(p, &n)| to_brackets(p, n)).collect();
        assert_eq!(evaluate_streams(&streams, &gold).unwrap(), r);
    }
}

#[test]
fn reported_table_values() {
    assert!((f_beta(0.9180, 0.9227, 1.0).unwrap() - 0.9203).abs() <= 0.00005);
    assert!((f_beta(0.9418, 0.9355, 1.0).unwrap() - 0.9386).abs() <= 0.00005);
    assert!(f_beta(0.5, 0.5, 0.0).is_err());
    assert_eq!(f_beta(0.0, 0.0, 1.0).unwrap(), 0.0);
}

#[test]
fn identical_corpora_score_perfectly() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let lengths = vec![9, 4, 12];
    let gold: Vec<PhraseSet> = lengths.iter().map(|&n| oracles::random_phrase_set(&mut rng, n, 0.6)).collect();
    assert!(gold.iter().any(|g| !g.is_empty()));
    let r = evaluate(&gold, &gold, &lengths).unwrap();
    assert_eq!((r.precision, r.recall, r.f_beta), (1.0, 1.0, 1.0));
    let table = render_report(&[("self".into(), r)]);
    assert!(table.lines().nth(1).unwrap().ends_with("100.00"));
    assert!(render_key_values(&[("self".into(), r)]).contains("self.f_beta=1.000000"));
}

proptest! {
    #[test]
    fn f1_is_the_harmonic_mean(p in 0.001f64..1.0, r in 0.001f64..1.0) {
        let f = f_beta(p, r, 1.0).unwrap();
        prop_assert!((f - 2.0 / (1.0 / p + 1.0 / r)).abs() < 1e-12);
    }

    #[test]
    fn score_monotonicity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(4..20);
        let gold = vec![oracles::random_phrase_set(&mut rng, n, 0.5)];
        let pred = vec![oracles::random_phrase_set(&mut rng, n, 0.5)];
        let base = evaluate(&pred, &gold, &[n]).unwrap();
        // dropping a correct span never raises recall
        if let Some(k) = pred[0].spans().iter().position(|s| gold[0].contains(s)) {
            let mut spans = pred[0].spans().to_vec();
            spans.remove(k);
            let fewer = evaluate(&[PhraseSet::new(spans).unwrap()], &gold, &[n]).unwrap();
            prop_assert!(fewer.recall <= base.recall);
        }
        // adding a wrong span never raises precision
        let taken: Vec<bool> = (0..n).map(|w| pred[0].spans().iter().any(|s| s.start <= w && w <= s.end)).collect();
        if let Some(w) = (0..n).find(|&w| !taken[w] && !gold[0].contains(&basenp::Span::new(w, w))) {
            let mut spans = pred[0].spans().to_vec();
            spans.push(basenp::Span::new(w, w));
            let more = evaluate(&[PhraseSet::new(spans).unwrap()], &gold, &[n]).unwrap();
            prop_assert!(more.precision <= base.precision);
        }
    }
}
