use crate::error::{CalibrationError, Result};
use crate::losses::Loss;
use crate::problem::Problem;

/// A contiguous run of samples `first..=last` sharing one fitted value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub first: usize,
    pub last: usize,
    pub minimizer: f64,
    pub aux: f64,
}

impl Block {
    /// Number of samples in the block.
    pub fn size(&self) -> usize {
        self.last - self.first + 1
    }
}

/// Piecewise-constant nondecreasing map from scores to calibrated values.
///
/// `values[j]` applies on `[breakpoints[j - 1], breakpoints[j])`, with the
/// first and last values extended to `-inf` and `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct Staircase {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl Staircase {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(CalibrationError::EmptyProblem);
        }
        if breakpoints.len() + 1 != values.len() {
            return Err(CalibrationError::InvalidValue(format!(
                "{} breakpoints for {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(CalibrationError::InvalidValue(format!("step value {v}")));
        }
        if let Some(b) = breakpoints.iter().find(|b| b.is_nan()) {
            return Err(CalibrationError::InvalidValue(format!("breakpoint {b}")));
        }
        if let Some(i) = values.windows(2).position(|w| w[0] >= w[1]) {
            return Err(CalibrationError::NotMonotone {
                index: i + 1,
                previous: values[i],
                next: values[i + 1],
            });
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CalibrationError::InvalidValue(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Staircase {
            breakpoints,
            values,
        })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Staircase::new(Vec::new(), vec![value])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn step_count(&self) -> usize {
        self.values.len()
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(CalibrationError::InvalidValue("NaN score".into()));
        }
        let j = self.breakpoints.partition_point(|&b| b <= x);
        Ok(self.values[j])
    }
}

/// Build the staircase of a fitted partition.
pub fn blocks_to_staircase<L: Loss>(blocks: &[Block], problem: &Problem<L>) -> Result<Staircase> {
    let scores = problem.scores();
    staircase_from_runs(
        &scores,
        blocks.iter().map(|b| (b.first, b.last, b.minimizer)),
    )
}

/// Build a staircase from `(first, last, value)` runs over sorted distinct
/// `scores`. Adjacent runs with equal values are fused; a decrease is an
/// error.
pub fn staircase_from_runs(
    scores: &[f64],
    runs: impl IntoIterator<Item = (usize, usize, f64)>,
) -> Result<Staircase> {
    // (first, last, value) after fusing equal neighbours
    let mut fused: Vec<(usize, usize, f64)> = Vec::new();
    for (index, (first, last, value)) in runs.into_iter().enumerate() {
        match fused.last_mut() {
            Some(prev) if prev.2 == value => prev.1 = last,
            Some(prev) if prev.2 > value => {
                return Err(CalibrationError::NotMonotone {
                    index,
                    previous: prev.2,
                    next: value,
                })
            }
            _ => fused.push((first, last, value)),
        }
    }
    if fused.is_empty() {
        return Err(CalibrationError::EmptyProblem);
    }
    let breakpoints = fused
        .windows(2)
        .map(|w| split_point(scores[w[0].1], scores[w[1].0]))
        .collect();
    let values = fused.iter().map(|r| r.2).collect();
    Staircase::new(breakpoints, values)
}

/// A point `b` in `(left, right]`, the midpoint where both are finite, so
/// that `left` evaluates to the lower step and `right` to the upper one.
fn split_point(left: f64, right: f64) -> f64 {
    match (left.is_finite(), right.is_finite()) {
        (true, true) => {
            let mid = left / 2.0 + right / 2.0;
            if mid > left {
                mid
            } else {
                right
            }
        }
        (false, true) => right,
        (true, false) => left.next_up(),
        (false, false) => 0.0,
    }
}

/// Fitted value of every sample, expanded from the blocks.
pub fn expand_blocks(blocks: &[Block]) -> Vec<f64> {
    blocks
        .iter()
        .flat_map(|b| std::iter::repeat_n(b.minimizer, b.size()))
        .collect()
}
