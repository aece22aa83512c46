//! Closed-set identification: the test is attributed to the registered
//! speaker with the smallest measure value.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::model::{FactorizeOptions, FactorizedModel, GaussianModel};

#[derive(Debug, Clone, Default)]
pub struct SpeakerRegistry {
    entries: Vec<(String, FactorizedModel)>,
    options: FactorizeOptions,
}

impl SpeakerRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_options(options: FactorizeOptions) -> Self {
        Self {
            entries: Vec::new(),
            options,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.entries.first().map(|(_, m)| m.dim())
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(id, _)| id.as_str())
    }

    pub fn get(&self, id: &str) -> Option<&FactorizedModel> {
        self.entries.iter().find(|(i, _)| i == id).map(|(_, m)| m)
    }

    /// Factorizes `model` once and stores it under `id`.
    pub fn register(&mut self, id: impl Into<String>, model: GaussianModel) -> Result<()> {
        let id = id.into();
        if self.entries.iter().any(|(i, _)| *i == id) {
            return Err(Error::DuplicateSpeaker(id));
        }
        if let Some(p) = self.dim() {
            if model.dim() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    actual: model.dim(),
                });
            }
        }
        let factored = FactorizedModel::with_options(model, self.options)?;
        self.entries.push((id, factored));
        Ok(())
    }

    pub fn identify(&self, test_id: &str, test: &GaussianModel, measure: Measure) -> Result<ScoreSheet> {
        let test = FactorizedModel::with_options(test.clone(), self.options)?;
        self.identify_factorized(test_id, &test, measure)
    }

    /// Scores a pre-factorized test against every speaker.
    pub fn identify_factorized(&self, test_id: &str, test: &FactorizedModel, measure: Measure) -> Result<ScoreSheet> {
        if self.entries.is_empty() {
            return Err(Error::EmptyRegistry);
        }
        let scores = self
            .entries
            .iter()
            .map(|(id, reference)| Ok((id.clone(), measure.evaluate(reference, test)?)))
            .collect::<Result<Vec<_>>>()?;
        // Strict `<` keeps the earliest-registered speaker on ties.
        let mut best = 0;
        for (i, (_, s)) in scores.iter().enumerate().skip(1) {
            if *s < scores[best].1 {
                best = i;
            }
        }
        Ok(ScoreSheet {
            test_id: test_id.to_string(),
            decision: scores[best].0.clone(),
            scores,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSheet {
    pub test_id: String,
    /// One score per registered speaker, in registration order.
    pub scores: Vec<(String, f64)>,
    pub decision: String,
}

impl ScoreSheet {
    pub fn decision_score(&self) -> f64 {
        self.scores
            .iter()
            .find(|(id, _)| *id == self.decision)
            .map(|(_, s)| *s)
            .expect("decision is a scored speaker")
    }
}

/// CSV with columns `test_id, decision, <speaker>...`. All sheets must come
/// from the same registry.
pub fn score_sheets_to_csv(sheets: &[ScoreSheet]) -> String {
    let mut out = String::from("test_id,decision");
    if let Some(first) = sheets.first() {
        for (id, _) in &first.scores {
            out.push(',');
            out.push_str(id);
        }
    }
    out.push('\n');
    for s in sheets {
        let _ = write!(out, "{},{}", s.test_id, s.decision);
        for (_, v) in &s.scores {
            let _ = write!(out, ",{v:?}");
        }
        out.push('\n');
    }
    out
}
