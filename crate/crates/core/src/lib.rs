//! Optimal monotone calibration of estimator scores.
//!
//! Given scored samples, each with a strictly convex loss over the value the
//! score is mapped to, the loss-minimizing nondecreasing transform is a
//! unique staircase: consecutive samples are pooled into groups and every
//! group is mapped to the minimizer of its summed loss.
//!
//! Three solvers produce it:
//!
//! - [`pav::fit_stack`] / [`pav::fit_direct`]: offline pooling for families
//!   with closed-form merge rules ([`MergeableLoss`]).
//! - [`online::OnlineState`]: the same pooling for score-ordered streams,
//!   optimal after every arrival.
//! - [`anytime::anytime_run`]: bracket bisection that only needs `-L'(z)`,
//!   for losses without a closed-form minimizer.
//!
//! ```
//! use monocal_core::{fit_stack, indexed_square_problem};
//!
//! let problem = indexed_square_problem(&[1.0, 3.0, 2.0, 4.0]).unwrap();
//! let fit = fit_stack(&problem);
//! let staircase = fit.staircase(&problem).unwrap();
//! assert_eq!(staircase.values(), &[1.0, 2.5, 4.0]);
//! assert_eq!(staircase.evaluate(2.0).unwrap(), 2.5);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anytime;
pub mod error;
pub mod losses;
pub mod online;
pub mod oracle;
pub mod pav;
pub mod problem;
pub mod staircase;

pub use anytime::{anytime_run, AnytimeConfig, AnytimeGroup, AnytimeReport};
pub use error::{CalibrationError, Result};
pub use losses::{
    logloss_reduce, BinarySample, LogLoss, Loss, LossSum, MergeableLoss, SquareLoss, Summary,
};
pub use online::OnlineState;
pub use pav::{fit_direct, fit_stack, FitReport};
pub use problem::{indexed_square_problem, normalize, square_samples, Problem, Sample};
pub use staircase::{blocks_to_staircase, Block, Staircase};
