//! Per-sample loss families.
//!
//! Every family implements [`Loss`], which is all the anytime solver needs:
//! a value and the negative derivative `-l'(z)`. Families whose group
//! minimizer has a closed form additionally implement [`MergeableLoss`],
//! which gives the offline and online solvers an O(1) join of two adjacent
//! groups from their `(minimizer, aux)` summaries.

use crate::error::{CalibrationError, Result};
use crate::problem::Sample;

/// Log-loss values are reported at `z` clamped to `[EPS, 1 - EPS]`.
pub const LOG_LOSS_EPS: f64 = 1e-12;

/// A strictly convex univariate loss attached to one sample.
pub trait Loss: Clone {
    /// Loss incurred when the sample is mapped to `z`.
    fn value(&self, z: f64) -> f64;

    /// `-l'(z)`. Strictly decreasing in `z`; positive below the minimizer.
    fn neg_derivative(&self, z: f64) -> f64;

    /// The loss of two samples that share a score, as a single loss.
    fn combine(&self, other: &Self) -> Self;

    fn validate(&self) -> Result<()> {
        Ok(())
    }
}

/// `(minimizer, aux)` pair carried by a group of a mergeable family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub minimizer: f64,
    pub aux: f64,
}

/// A loss family with closed-form group minimizers and merge rules.
///
/// `merge` must be associative over contiguous runs, and the merged
/// minimizer must be the argmin of the summed loss.
pub trait MergeableLoss: Loss {
    fn minimizer(&self) -> f64;
    fn init_aux(&self) -> f64;
    fn merge(lhs: Summary, rhs: Summary) -> Summary;

    fn summary(&self) -> Summary {
        Summary {
            minimizer: self.minimizer(),
            aux: self.init_aux(),
        }
    }
}

/// `weight * (z - target)^2 + offset`.
///
/// `offset` is zero for a raw sample; it holds the within-group residual
/// `sum a_n (y_n - mean)^2` once equal-score samples have been combined, so
/// the combined loss equals the sum of its members for every `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareLoss {
    pub target: f64,
    pub weight: f64,
    pub offset: f64,
}

impl SquareLoss {
    pub fn new(target: f64, weight: f64) -> Self {
        SquareLoss {
            target,
            weight,
            offset: 0.0,
        }
    }

    pub fn unit(target: f64) -> Self {
        SquareLoss::new(target, 1.0)
    }
}

impl Loss for SquareLoss {
    fn value(&self, z: f64) -> f64 {
        let d = z - self.target;
        self.weight * d * d + self.offset
    }

    fn neg_derivative(&self, z: f64) -> f64 {
        -2.0 * self.weight * (z - self.target)
    }

    fn combine(&self, other: &Self) -> Self {
        let merged = merge_weighted_means(self.summary(), other.summary());
        let gap = self.target - other.target;
        SquareLoss {
            target: merged.minimizer,
            weight: merged.aux,
            offset: self.offset
                + other.offset
                + self.weight * other.weight / merged.aux * gap * gap,
        }
    }

    fn validate(&self) -> Result<()> {
        check_weight(self.weight)?;
        if !self.target.is_finite() {
            return Err(CalibrationError::InvalidValue(format!(
                "target {}",
                self.target
            )));
        }
        Ok(())
    }
}

impl MergeableLoss for SquareLoss {
    fn minimizer(&self) -> f64 {
        self.target
    }

    fn init_aux(&self) -> f64 {
        self.weight
    }

    fn merge(lhs: Summary, rhs: Summary) -> Summary {
        merge_weighted_means(lhs, rhs)
    }
}

#[inline]
fn merge_weighted_means(lhs: Summary, rhs: Summary) -> Summary {
    let aux = lhs.aux + rhs.aux;
    Summary {
        minimizer: (lhs.aux * lhs.minimizer + rhs.aux * rhs.minimizer) / aux,
        aux,
    }
}

fn check_weight(weight: f64) -> Result<()> {
    // `!(w > 0)` also rejects NaN
    if !(weight > 0.0) || !weight.is_finite() {
        return Err(CalibrationError::InvalidWeight(weight));
    }
    Ok(())
}

/// Join two weighted-square groups: weighted mean of the minimizers and the
/// sum of the weights.
pub fn weighted_square_merge(lhs: Summary, rhs: Summary) -> Result<Summary> {
    check_weight(lhs.aux)?;
    check_weight(rhs.aux)?;
    Ok(merge_weighted_means(lhs, rhs))
}

/// `-d/dz sum a_n (z - y_n)^2` over a group.
pub fn weighted_square_neg_derivative(group: &[SquareLoss], z: f64) -> f64 {
    group.iter().map(|l| l.neg_derivative(z)).sum()
}

/// Negative derivative of the summed loss of a run of samples.
pub fn group_neg_derivative<L: Loss>(samples: &[Sample<L>], z: f64) -> f64 {
    samples.iter().map(|s| s.loss.neg_derivative(z)).sum()
}

/// Weighted binary log-loss `-(p ln z + q ln(1 - z))`, where `p` and `q` are
/// the total weights of the positive and negative labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLoss {
    pub positive: f64,
    pub negative: f64,
}

impl LogLoss {
    pub fn new(label: f64, weight: f64) -> Result<Self> {
        check_weight(weight)?;
        if label == 1.0 {
            Ok(LogLoss {
                positive: weight,
                negative: 0.0,
            })
        } else if label == 0.0 {
            Ok(LogLoss {
                positive: 0.0,
                negative: weight,
            })
        } else {
            Err(CalibrationError::InvalidLabel(label))
        }
    }
}

impl Loss for LogLoss {
    fn value(&self, z: f64) -> f64 {
        let z = z.clamp(LOG_LOSS_EPS, 1.0 - LOG_LOSS_EPS);
        let mut v = 0.0;
        if self.positive > 0.0 {
            v -= self.positive * z.ln();
        }
        if self.negative > 0.0 {
            v -= self.negative * (1.0 - z).ln();
        }
        v
    }

    // Outside [0, 1] the loss is treated as +inf, so the derivative points
    // back into the domain.
    fn neg_derivative(&self, z: f64) -> f64 {
        if z < 0.0 {
            return f64::INFINITY;
        }
        if z > 1.0 {
            return f64::NEG_INFINITY;
        }
        let mut d = 0.0;
        if self.positive > 0.0 {
            d += self.positive / z;
        }
        if self.negative > 0.0 {
            d -= self.negative / (1.0 - z);
        }
        d
    }

    fn combine(&self, other: &Self) -> Self {
        LogLoss {
            positive: self.positive + other.positive,
            negative: self.negative + other.negative,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.positive >= 0.0 && self.negative >= 0.0) {
            return Err(CalibrationError::InvalidWeight(
                self.positive.min(self.negative),
            ));
        }
        check_weight(self.positive + self.negative)
    }
}

impl MergeableLoss for LogLoss {
    fn minimizer(&self) -> f64 {
        self.positive / (self.positive + self.negative)
    }

    fn init_aux(&self) -> f64 {
        self.positive + self.negative
    }

    fn merge(lhs: Summary, rhs: Summary) -> Summary {
        merge_weighted_means(lhs, rhs)
    }
}

/// A raw binary-classification observation: predicted probability, label
/// and weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinarySample {
    pub prob: f64,
    pub label: f64,
    pub weight: f64,
}

/// Rewrite log-loss samples as weighted-square samples with the same fitted
/// transform: score `p_n`, target `b_n`, weight `a_n`.
pub fn logloss_reduce(samples: &[BinarySample]) -> Result<Vec<Sample<SquareLoss>>> {
    samples
        .iter()
        .map(|s| {
            if s.label != 0.0 && s.label != 1.0 {
                return Err(CalibrationError::InvalidLabel(s.label));
            }
            check_weight(s.weight)?;
            Ok(Sample::new(s.prob, SquareLoss::new(s.label, s.weight)))
        })
        .collect()
}

/// Log-loss samples for the derivative-only path.
pub fn logloss_samples(samples: &[BinarySample]) -> Result<Vec<Sample<LogLoss>>> {
    samples
        .iter()
        .map(|s| Ok(Sample::new(s.prob, LogLoss::new(s.label, s.weight)?)))
        .collect()
}

/// Sum of arbitrary per-sample losses, for custom families that have no
/// closed-form way to combine equal-score samples.
#[derive(Debug, Clone)]
pub struct LossSum<L>(pub Vec<L>);

impl<L: Loss> LossSum<L> {
    pub fn single(loss: L) -> Self {
        LossSum(vec![loss])
    }
}

impl<L: Loss> Loss for LossSum<L> {
    fn value(&self, z: f64) -> f64 {
        self.0.iter().map(|l| l.value(z)).sum()
    }

    fn neg_derivative(&self, z: f64) -> f64 {
        self.0.iter().map(|l| l.neg_derivative(z)).sum()
    }

    fn combine(&self, other: &Self) -> Self {
        let mut parts = self.0.clone();
        parts.extend(other.0.iter().cloned());
        LossSum(parts)
    }

    fn validate(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(CalibrationError::InvalidValue("empty loss sum".into()));
        }
        self.0.iter().try_for_each(Loss::validate)
    }
}
