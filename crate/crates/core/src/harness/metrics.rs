use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Percentage of all tests identified correctly.
    pub global_accuracy: f64,
    /// Unweighted mean over speakers of each speaker's own percentage.
    pub per_speaker_mean_accuracy: f64,
    pub n_tests: usize,
    pub n_speakers: usize,
}

/// Aggregates `(speaker, correct)` outcomes.
pub fn compute_metrics<S: AsRef<str>>(results: &[(S, bool)]) -> Result<Metrics> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    let mut per: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    let mut correct = 0usize;
    for (spk, ok) in results {
        let e = per.entry(spk.as_ref()).or_default();
        e.1 += 1;
        if *ok {
            e.0 += 1;
            correct += 1;
        }
    }
    let n = results.len();
    let global = 100.0 * correct as f64 / n as f64;
    let first = per.values().next().map(|c| c.1);
    // Equal per-speaker counts make the two averages the same number.
    let mean = if per.values().all(|c| Some(c.1) == first) {
        global
    } else {
        per.values().map(|&(c, t)| 100.0 * c as f64 / t as f64).sum::<f64>() / per.len() as f64
    };
    Ok(Metrics {
        global_accuracy: global,
        per_speaker_mean_accuracy: mean,
        n_tests: n,
        n_speakers: per.len(),
    })
}
