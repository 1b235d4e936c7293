use crate::error::{CalibrationError, Result};
use crate::losses::{Loss, SquareLoss};

/// One observation: the estimator's score and the loss of mapping it.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<L> {
    pub score: f64,
    pub loss: L,
}

impl<L> Sample<L> {
    pub fn new(score: f64, loss: L) -> Self {
        Sample { score, loss }
    }
}

/// Samples sorted by strictly increasing score.
///
/// Only constructible through [`normalize`], which sorts the input and folds
/// equal-score samples into a single sample carrying their summed loss.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem<L> {
    samples: Vec<Sample<L>>,
}

impl<L: Loss> Problem<L> {
    pub fn samples(&self) -> &[Sample<L>] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Sample<L>> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.score).collect()
    }

    /// Sum of per-sample losses at the given per-sample fitted values.
    pub fn total_loss(&self, fitted: &[f64]) -> f64 {
        self.samples
            .iter()
            .zip(fitted)
            .map(|(s, &z)| s.loss.value(z))
            .sum()
    }
}

/// Sort samples by score and merge equal scores.
pub fn normalize<L: Loss>(raw: impl IntoIterator<Item = Sample<L>>) -> Result<Problem<L>> {
    let mut raw: Vec<Sample<L>> = raw.into_iter().collect();
    if raw.is_empty() {
        return Err(CalibrationError::EmptyProblem);
    }
    for s in &raw {
        if s.score.is_nan() {
            return Err(CalibrationError::InvalidValue("NaN score".into()));
        }
        s.loss.validate()?;
    }
    raw.sort_by(|a, b| a.score.total_cmp(&b.score));

    let mut samples: Vec<Sample<L>> = Vec::with_capacity(raw.len());
    for s in raw {
        match samples.last_mut() {
            // -0.0 == 0.0, so signed zeros collapse too
            Some(top) if top.score == s.score => top.loss = top.loss.combine(&s.loss),
            _ => samples.push(s),
        }
    }
    Ok(Problem { samples })
}

/// Build weighted-square samples from parallel columns. `weights` defaults
/// to one per sample.
pub fn square_samples(
    scores: &[f64],
    targets: &[f64],
    weights: Option<&[f64]>,
) -> Vec<Sample<SquareLoss>> {
    assert_eq!(scores.len(), targets.len());
    scores
        .iter()
        .zip(targets)
        .enumerate()
        .map(|(i, (&x, &y))| {
            let w = weights.map_or(1.0, |w| w[i]);
            Sample::new(x, SquareLoss::new(y, w))
        })
        .collect()
}

/// Weighted-square problem with scores `1..=N` and unit weights.
pub fn indexed_square_problem(targets: &[f64]) -> Result<Problem<SquareLoss>> {
    let scores: Vec<f64> = (1..=targets.len()).map(|i| i as f64).collect();
    normalize(square_samples(&scores, targets, None))
}
