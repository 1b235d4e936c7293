//! Brute-force references for checking the solvers.
//!
//! Nothing here shares code with the solvers: group minimizers are computed
//! from scratch (closed form or plain bisection) and every contiguous
//! partition is enumerated.

use crate::error::{CalibrationError, Result};
use crate::losses::{Loss, SquareLoss};
use crate::problem::{Problem, Sample};

/// Largest problem [`brute_force_fit`] accepts.
pub const MAX_BRUTE_FORCE_N: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_loss: f64,
    /// Fitted value of every sample under the best partition.
    pub best_values: Vec<f64>,
    /// Groups of the best partition as inclusive index ranges.
    pub best_partition: Vec<(usize, usize)>,
    pub n_partitions_checked: usize,
}

/// Which partitions count as feasible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    /// Group minimizers nondecreasing.
    NonDecreasing,
    /// Group minimizers strictly increasing.
    Strict,
}

/// Enumerate all `2^(N-1)` contiguous partitions, keep those whose group
/// minimizers are monotone, and return the one with the least total loss.
pub fn brute_force_fit<L, F>(
    problem: &Problem<L>,
    group_minimizer: F,
    monotonicity: Monotonicity,
) -> Result<OracleResult>
where
    L: Loss,
    F: Fn(&[Sample<L>]) -> f64,
{
    let samples = problem.samples();
    let n = samples.len();
    if n == 0 {
        return Err(CalibrationError::EmptyProblem);
    }
    if n > MAX_BRUTE_FORCE_N {
        return Err(CalibrationError::TooLarge {
            n,
            max: MAX_BRUTE_FORCE_N,
        });
    }

    // (minimizer, loss) of every run i..=j
    let mut table = vec![vec![(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in i..n {
            let run = &samples[i..=j];
            let z = group_minimizer(run);
            let loss: f64 = run.iter().map(|s| s.loss.value(z)).sum();
            table[i][j] = (z, loss);
        }
    }

    let total = 1usize << (n - 1);
    let mut best: Option<(f64, usize)> = None;
    let mut groups = Vec::with_capacity(n);
    for cuts in 0..total {
        partition_from_cuts(cuts, n, &mut groups);
        let feasible = groups.windows(2).all(|w| {
            let (a, b) = (table[w[0].0][w[0].1].0, table[w[1].0][w[1].1].0);
            match monotonicity {
                Monotonicity::NonDecreasing => a <= b,
                Monotonicity::Strict => a < b,
            }
        });
        if !feasible {
            continue;
        }
        let loss: f64 = groups.iter().map(|&(i, j)| table[i][j].1).sum();
        if best.is_none_or(|(l, _)| loss < l) {
            best = Some((loss, cuts));
        }
    }

    // the all-in-one partition is always feasible
    let (best_loss, cuts) = best.expect("at least one feasible partition");
    partition_from_cuts(cuts, n, &mut groups);
    let best_values = groups
        .iter()
        .flat_map(|&(i, j)| std::iter::repeat_n(table[i][j].0, j - i + 1))
        .collect();
    Ok(OracleResult {
        best_loss,
        best_values,
        best_partition: groups,
        n_partitions_checked: total,
    })
}

/// Bit `i` of `cuts` set means a group ends after sample `i`.
fn partition_from_cuts(cuts: usize, n: usize, out: &mut Vec<(usize, usize)>) {
    out.clear();
    let mut start = 0;
    for i in 0..n - 1 {
        if cuts >> i & 1 == 1 {
            out.push((start, i));
            start = i + 1;
        }
    }
    out.push((start, n - 1));
}

/// Closed-form weighted mean `sum a y / sum a` of a weighted-square run.
pub fn square_minimizer(run: &[Sample<SquareLoss>]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for s in run {
        num += s.loss.weight * s.loss.target;
        den += s.loss.weight;
    }
    num / den
}

/// Minimizer of a run's summed loss by bisection on the sign of its
/// derivative over `[lo, hi]`, to within `tol`.
pub fn bisect_minimizer<L: Loss>(run: &[Sample<L>], lo: f64, hi: f64, tol: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let d: f64 = run.iter().map(|s| s.loss.neg_derivative(mid)).sum();
        if d > 0.0 {
            lo = mid;
        } else if d < 0.0 {
            hi = mid;
        } else {
            return mid;
        }
    }
    0.5 * (lo + hi)
}

/// Weighted-square brute force with closed-form group means.
pub fn brute_force_square(problem: &Problem<SquareLoss>) -> Result<OracleResult> {
    brute_force_fit(problem, square_minimizer, Monotonicity::NonDecreasing)
}

/// Argmin of `f` over `steps + 1` evenly spaced points of `[lo, hi]`.
pub fn grid_minimize(f: impl Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> Result<f64> {
    if !(lo < hi) || steps < 2 {
        return Err(CalibrationError::InvalidConfig(format!(
            "grid [{lo}, {hi}] with {steps} steps"
        )));
    }
    let h = (hi - lo) / steps as f64;
    let mut best = (f64::INFINITY, lo);
    for i in 0..=steps {
        let z = if i == steps { hi } else { lo + h * i as f64 };
        let v = f(z);
        if v < best.0 {
            best = (v, z);
        }
    }
    Ok(best.1)
}
