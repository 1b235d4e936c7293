//! Anytime solver driven only by a negative-derivative oracle.
//!
//! Every group keeps a bracket `[lower, upper]` on its minimizer. A round
//! probes each open bracket at its midpoint, joins adjacent groups that share
//! a bracket and whose derivative signs say they are out of order
//! (`D_i >= 0 >= D_{i+1}`), then halves every bracket towards the sign of
//! `D`. After `k` rounds from finite bounds `(A, B)` every open bracket has
//! width `2^-k (A - B)`, so the caller may stop after any round and read off
//! values accurate to half that width.
//!
//! Infinite initial bounds are handled by probing `0, ±1, ±2, ±4, ...` until
//! the bracket closes.

use crate::error::{CalibrationError, Result};
use crate::losses::{group_neg_derivative, Loss};
use crate::problem::Problem;
use crate::staircase::{staircase_from_runs, Staircase};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnytimeConfig {
    pub init_upper: f64,
    pub init_lower: f64,
    /// Target bracket width.
    pub delta: f64,
    /// Round cap.
    pub max_iters: usize,
}

impl AnytimeConfig {
    pub const DEFAULT_MAX_ITERS: usize = 4096;

    pub fn bounded(lower: f64, upper: f64, delta: f64) -> Self {
        AnytimeConfig {
            init_upper: upper,
            init_lower: lower,
            delta,
            max_iters: Self::DEFAULT_MAX_ITERS,
        }
    }

    /// No prior bounds; brackets are found by doubling.
    pub fn unbounded(delta: f64) -> Self {
        Self::bounded(f64::NEG_INFINITY, f64::INFINITY, delta)
    }

    pub fn with_max_iters(self, max_iters: usize) -> Self {
        AnytimeConfig { max_iters, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(CalibrationError::InvalidConfig(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if self.init_upper.is_nan() || self.init_lower.is_nan() {
            return Err(CalibrationError::InvalidConfig("NaN bound".into()));
        }
        if self.init_upper <= self.init_lower {
            return Err(CalibrationError::InvalidConfig(format!(
                "upper bound {} must exceed lower bound {}",
                self.init_upper, self.init_lower
            )));
        }
        Ok(())
    }
}

/// Bisection state of one group of consecutive samples `first..=last`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnytimeGroup {
    pub first: usize,
    pub last: usize,
    pub upper: f64,
    pub lower: f64,
    /// Point of the most recent derivative evaluation.
    pub probe: f64,
    /// `-L'(probe)` of the group's summed loss; NaN before the first round.
    pub neg_deriv: f64,
    /// The minimizer is known exactly (`upper == lower`).
    pub settled: bool,
}

impl AnytimeGroup {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Bracket midpoint, within `width / 2` of the group minimizer.
    pub fn value(&self) -> f64 {
        if self.settled {
            self.upper
        } else {
            midpoint(self.upper, self.lower)
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.upper.is_finite() && self.lower.is_finite()
    }

    fn same_bracket(&self, other: &AnytimeGroup) -> bool {
        self.upper == other.upper && self.lower == other.lower
    }
}

fn midpoint(upper: f64, lower: f64) -> f64 {
    let mid = (upper + lower) / 2.0;
    if mid.is_finite() {
        mid
    } else {
        upper / 2.0 + lower / 2.0
    }
}

/// One group per sample, each with the configured bracket.
pub fn anytime_init<L: Loss>(
    problem: &Problem<L>,
    config: &AnytimeConfig,
) -> Result<Vec<AnytimeGroup>> {
    config.validate()?;
    if problem.is_empty() {
        return Err(CalibrationError::EmptyProblem);
    }
    let probe = probe_point(config.init_upper, config.init_lower)?;
    Ok((0..problem.len())
        .map(|i| AnytimeGroup {
            first: i,
            last: i,
            upper: config.init_upper,
            lower: config.init_lower,
            probe,
            neg_deriv: f64::NAN,
            settled: false,
        })
        .collect())
}

/// Where to evaluate the derivative of a group with bracket
/// `[lower, upper]`: the midpoint when both ends are finite, otherwise the
/// next point of the doubling sequence `0, ±1, ±2, ±4, ...`.
pub fn probe_point(upper: f64, lower: f64) -> Result<f64> {
    if upper.is_nan() || lower.is_nan() || upper <= lower {
        return Err(CalibrationError::NoWidth { upper, lower });
    }
    let probe = match (upper == f64::INFINITY, lower == f64::NEG_INFINITY) {
        (false, false) => midpoint(upper, lower),
        (true, true) => 0.0,
        (true, false) => {
            if lower < 0.0 {
                0.0
            } else if lower < 1.0 {
                1.0
            } else {
                (2.0 * lower).min(f64::MAX)
            }
        }
        (false, true) => {
            if upper > 0.0 {
                0.0
            } else if upper > -1.0 {
                -1.0
            } else {
                (2.0 * upper).max(f64::MIN)
            }
        }
    };
    Ok(probe)
}

/// One full round: probe, join, halve.
pub fn iterate<L: Loss>(
    groups: &[AnytimeGroup],
    problem: &Problem<L>,
) -> Result<Vec<AnytimeGroup>> {
    let samples = problem.samples();

    let mut joined: Vec<AnytimeGroup> = Vec::with_capacity(groups.len());
    for g in groups {
        let mut g = *g;
        if !g.settled {
            g.probe = probe_point(g.upper, g.lower)?;
            g.neg_deriv = group_neg_derivative(&samples[g.first..=g.last], g.probe);
            if g.neg_deriv.is_nan() {
                return Err(CalibrationError::OracleFailure {
                    first: g.first,
                    last: g.last,
                    z: g.probe,
                });
            }
        }
        joined.push(g);
        // joining may cascade leftwards; a later push re-tests the right side
        while joined.len() >= 2 {
            let n = joined.len();
            let (left, right) = (&joined[n - 2], &joined[n - 1]);
            let out_of_order = !left.settled
                && left.same_bracket(right)
                && left.neg_deriv >= 0.0
                && right.neg_deriv <= 0.0;
            if !out_of_order {
                break;
            }
            let right = joined.pop().expect("n >= 2");
            let left = joined.last_mut().expect("n >= 1");
            left.last = right.last;
            left.neg_deriv += right.neg_deriv;
        }
    }

    for g in joined.iter_mut().filter(|g| !g.settled) {
        if g.neg_deriv >= 0.0 {
            g.lower = g.probe;
        }
        if g.neg_deriv <= 0.0 {
            g.upper = g.probe;
        }
        g.settled = g.upper == g.lower;
    }
    Ok(joined)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnytimeReport {
    pub staircase: Staircase,
    pub groups: Vec<AnytimeGroup>,
    /// Largest remaining bracket width; zero when every group settled.
    pub width_bound: f64,
    pub iters: usize,
    pub total_loss: f64,
}

impl AnytimeReport {
    /// Fitted value of every sample.
    pub fn fitted_values(&self) -> Vec<f64> {
        self.groups
            .iter()
            .flat_map(|g| std::iter::repeat_n(g.value(), g.last - g.first + 1))
            .collect()
    }
}

fn width_bound(groups: &[AnytimeGroup]) -> f64 {
    groups
        .iter()
        .filter(|g| !g.settled)
        .map(AnytimeGroup::width)
        .fold(0.0, f64::max)
}

/// Iterate until every open bracket is at most `delta` wide or the round
/// cap is reached.
pub fn anytime_run<L: Loss>(problem: &Problem<L>, config: &AnytimeConfig) -> Result<AnytimeReport> {
    let mut groups = anytime_init(problem, config)?;
    let mut iters = 0;
    while width_bound(&groups) > config.delta {
        if iters == config.max_iters {
            if groups.iter().any(|g| !g.is_bounded()) {
                return Err(CalibrationError::Unbounded { iters });
            }
            break;
        }
        groups = iterate(&groups, problem)?;
        iters += 1;
    }
    let staircase = staircase_from_runs(
        &problem.scores(),
        groups.iter().map(|g| (g.first, g.last, g.value())),
    )?;
    let mut report = AnytimeReport {
        staircase,
        width_bound: width_bound(&groups),
        iters,
        total_loss: 0.0,
        groups,
    };
    report.total_loss = problem.total_loss(&report.fitted_values());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{indexed_square_problem, normalize, square_samples};

    #[test]
    fn init_examples() {
        let p = indexed_square_problem(&[1.0, 2.0, 3.0]).unwrap();
        let groups = anytime_init(&p, &AnytimeConfig::bounded(0.0, 128.0, 1e-6)).unwrap();
        assert_eq!(groups.len(), 3);
        assert!(groups.iter().all(|g| g.upper == 128.0 && g.lower == 0.0));

        let open = anytime_init(&p, &AnytimeConfig::unbounded(1e-6)).unwrap();
        assert!(open.iter().all(|g| g.probe == 0.0 && !g.is_bounded()));

        assert!(matches!(
            anytime_init(&p, &AnytimeConfig::bounded(0.0, 1.0, 0.0)),
            Err(CalibrationError::InvalidConfig(_))
        ));
    }

    #[test]
    fn probe_examples() {
        let inf = f64::INFINITY;
        assert_eq!(probe_point(inf, -inf), Ok(0.0));
        assert_eq!(probe_point(inf, 0.0), Ok(1.0));
        assert_eq!(probe_point(inf, 1.0), Ok(2.0));
        assert_eq!(probe_point(inf, 4.0), Ok(8.0));
        assert_eq!(probe_point(0.0, -inf), Ok(-1.0));
        assert_eq!(probe_point(-3.0, -inf), Ok(-6.0));
        assert_eq!(probe_point(10.0, 2.0), Ok(6.0));
        assert_eq!(
            probe_point(2.0, 2.0),
            Err(CalibrationError::NoWidth {
                upper: 2.0,
                lower: 2.0
            })
        );
        assert!(probe_point(1.0, 3.0).is_err());
    }

    #[test]
    fn folded_group_settles_on_its_mean() {
        let p = normalize(square_samples(&[0.0; 4], &[44.0, 52.0, 18.0, 14.0], None)).unwrap();
        let g0 = anytime_init(&p, &AnytimeConfig::bounded(0.0, 128.0, 1e-6)).unwrap();
        let g1 = iterate(&g0, &p).unwrap();
        assert_eq!(g1[0].probe, 64.0);
        assert_eq!(g1[0].neg_deriv, -2.0 * 4.0 * (64.0 - 32.0));
        assert_eq!((g1[0].upper, g1[0].lower), (64.0, 0.0));
        let g2 = iterate(&g1, &p).unwrap();
        assert!(g2[0].settled);
        assert_eq!(g2[0].value(), 32.0);
        // settled groups are left alone
        assert_eq!(iterate(&g2, &p).unwrap(), g2);
    }

    #[test]
    fn violating_pair_joins_when_probe_separates_it() {
        let p = indexed_square_problem(&[52.0, 18.0]).unwrap();
        let g0 = anytime_init(&p, &AnytimeConfig::bounded(0.0, 128.0, 1e-6)).unwrap();
        let g1 = iterate(&g0, &p).unwrap();
        assert_eq!(g1.len(), 2);
        assert_eq!(g1[0].neg_deriv, -24.0);
        assert_eq!(g1[1].neg_deriv, -92.0);
        assert!(g1.iter().all(|g| g.upper == 64.0));
        let g2 = iterate(&g1, &p).unwrap();
        assert_eq!(g2.len(), 1);
        assert_eq!(g2[0].neg_deriv, 40.0 - 28.0);
        assert!(g2[0].lower <= 35.0 && 35.0 <= g2[0].upper);
    }

    #[test]
    fn constant_targets_give_one_group() {
        let p = indexed_square_problem(&[50.0; 6]).unwrap();
        let r = anytime_run(&p, &AnytimeConfig::bounded(0.0, 128.0, 1e-6)).unwrap();
        assert_eq!(r.groups.len(), 1);
        assert!((r.staircase.values()[0] - 50.0).abs() <= 5e-7);
    }

    #[test]
    fn unbounded_run_finds_negative_minimizers() {
        let p = indexed_square_problem(&[-700.25, -3.5, 0.0, 912.0]).unwrap();
        let r = anytime_run(&p, &AnytimeConfig::unbounded(1e-9)).unwrap();
        for (v, exact) in r.fitted_values().iter().zip([-700.25, -3.5, 0.0, 912.0]) {
            assert!((v - exact).abs() <= 5e-10, "{v} vs {exact}");
        }
    }

    #[test]
    fn round_cap_with_open_bounds_is_unbounded() {
        let p = indexed_square_problem(&[1e6 + 0.3]).unwrap();
        let config = AnytimeConfig::unbounded(1e-3).with_max_iters(5);
        assert_eq!(
            anytime_run(&p, &config),
            Err(CalibrationError::Unbounded { iters: 5 })
        );
        // finite bounds just stop early
        let config = AnytimeConfig::bounded(0.0, 2e6, 1e-3).with_max_iters(5);
        let r = anytime_run(&p, &config).unwrap();
        assert_eq!(r.iters, 5);
        assert_eq!(r.width_bound, 2e6 / 32.0);
    }

    #[test]
    fn nan_derivative_is_reported() {
        #[derive(Clone)]
        struct Broken;
        impl Loss for Broken {
            fn value(&self, _: f64) -> f64 {
                0.0
            }
            fn neg_derivative(&self, _: f64) -> f64 {
                f64::NAN
            }
            fn combine(&self, _: &Self) -> Self {
                Broken
            }
        }
        let p = normalize(vec![crate::problem::Sample::new(1.0, Broken)]).unwrap();
        let g = anytime_init(&p, &AnytimeConfig::bounded(0.0, 1.0, 0.1)).unwrap();
        assert!(matches!(
            iterate(&g, &p),
            Err(CalibrationError::OracleFailure { .. })
        ));
    }

    #[test]
    fn example_converges_to_offline_answer() {
        let targets = [
            44.0, 52.0, 18.0, 14.0, 93.0, 37.0, 96.0, 8.0, 1.0, 95.0, 21.0, 77.0, 46.0, 36.0, 69.0,
        ];
        let p = indexed_square_problem(&targets).unwrap();
        let r = anytime_run(&p, &AnytimeConfig::bounded(0.0, 128.0, 1e-6)).unwrap();
        let sizes: Vec<usize> = r.groups.iter().map(|g| g.last - g.first + 1).collect();
        assert_eq!(sizes, vec![4, 5, 5, 1]);
        for (v, exact) in r.staircase.values().iter().zip([32.0, 47.0, 55.0, 69.0]) {
            assert!((v - exact).abs() <= 5e-7);
        }
        assert!(r.iters <= 27);
    }
}
