//! Entropy-based feature relevance.

use std::collections::BTreeMap;

/// Shannon entropy in bits of a count distribution.
pub fn entropy<I: IntoIterator<Item = usize>>(counts: I) -> f64 {
    let counts: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum()
}

fn class_counts(labels: &[u32]) -> BTreeMap<u32, usize> {
    let mut counts = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0) += 1;
    }
    counts
}

/// H(class) - H(class | feature), clamped at zero.
pub fn information_gain(column: &[u32], labels: &[u32]) -> f64 {
    assert_eq!(column.len(), labels.len());
    if labels.is_empty() {
        return 0.0;
    }
    let prior = entropy(class_counts(labels).into_values());
    let mut by_value: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (&v, &l) in column.iter().zip(labels) {
        by_value.entry(v).or_default().push(l);
    }
    let n = labels.len() as f64;
    let mut values: Vec<_> = by_value.into_iter().collect();
    values.sort_by_key(|(v, _)| *v);
    let conditional: f64 =
        values.iter().map(|(_, ls)| ls.len() as f64 / n * entropy(class_counts(ls).into_values())).sum();
    (prior - conditional).max(0.0)
}

/// Entropy of the feature's own value distribution.
pub fn split_info(column: &[u32]) -> f64 {
    entropy(class_counts(column).into_values())
}

/// Information gain normalised by split info; 0 for single-valued features.
pub fn gain_ratio(column: &[u32], labels: &[u32]) -> f64 {
    let si = split_info(column);
    if si <= 0.0 {
        0.0
    } else {
        information_gain(column, labels) / si
    }
}
