//! Streaming solver for samples that arrive in nondecreasing score order.
//!
//! After every [`OnlineState::push`] the block stack is the optimal fit of
//! everything seen so far. Each arrival is pushed as a new top block and
//! pooled with its predecessors while they violate monotonicity, so the
//! total number of joins over a run is `n_seen - S`.

use crate::error::{CalibrationError, Result};
use crate::losses::{MergeableLoss, Summary};
use crate::pav::join;
use crate::problem::Sample;
use crate::staircase::{staircase_from_runs, Block, Staircase};

#[derive(Debug, Clone)]
pub struct OnlineState<L> {
    stack: Vec<Block>,
    /// Distinct scores seen, ascending.
    scores: Vec<f64>,
    cumulative_merges: usize,
    /// Summed loss of the most recent score.
    last_loss: Option<L>,
    /// Blocks absorbed into the top block by the most recent score, in pop
    /// order, so a tie that raises that score's minimizer can be replayed.
    consumed: Vec<Block>,
}

impl<L: MergeableLoss> Default for OnlineState<L> {
    fn default() -> Self {
        OnlineState {
            stack: Vec::new(),
            scores: Vec::new(),
            cumulative_merges: 0,
            last_loss: None,
            consumed: Vec::new(),
        }
    }
}

impl<L: MergeableLoss> OnlineState<L> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct scores seen.
    pub fn n_seen(&self) -> usize {
        self.scores.len()
    }

    pub fn cumulative_merges(&self) -> usize {
        self.cumulative_merges
    }

    pub fn last_score(&self) -> Option<f64> {
        self.scores.last().copied()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.stack
    }

    pub fn step_count(&self) -> usize {
        self.stack.len()
    }

    /// Add one sample and restore optimality. Returns the number of joins
    /// performed.
    ///
    /// A sample whose score equals the previous one is folded into that
    /// score's loss. Scores below the previous one are rejected; refit with
    /// an offline solver instead.
    pub fn push(&mut self, sample: Sample<L>) -> Result<usize> {
        if sample.score.is_nan() {
            return Err(CalibrationError::InvalidValue("NaN score".into()));
        }
        sample.loss.validate()?;
        match self.last_score() {
            Some(last) if sample.score < last => Err(CalibrationError::OutOfOrder {
                score: sample.score,
                last,
            }),
            Some(last) if sample.score == last => Ok(self.absorb_tie(sample.loss)),
            _ => {
                let index = self.scores.len();
                self.scores.push(sample.score);
                let summary = sample.loss.summary();
                self.last_loss = Some(sample.loss);
                self.consumed.clear();
                let block = Block {
                    first: index,
                    last: index,
                    minimizer: summary.minimizer,
                    aux: summary.aux,
                };
                Ok(self.pool(block))
            }
        }
    }

    fn absorb_tie(&mut self, loss: L) -> usize {
        let previous = self.last_loss.take().expect("a score was seen");
        let combined = previous.combine(&loss);
        self.last_loss = Some(combined.clone());

        if combined.minimizer() <= previous.minimizer() {
            // A lower value for the last score only extends the pooling, so
            // the tie can be folded into the top block directly.
            let top = self.stack.pop().expect("non-empty stack");
            let merged = L::merge(
                Summary {
                    minimizer: top.minimizer,
                    aux: top.aux,
                },
                loss.summary(),
            );
            return self.pool(Block {
                minimizer: merged.minimizer,
                aux: merged.aux,
                ..top
            });
        }

        // Otherwise undo the previous arrival's joins and push it again.
        self.stack.pop();
        let undone = self.consumed.len();
        while let Some(b) = self.consumed.pop() {
            self.stack.push(b);
        }
        self.cumulative_merges -= undone;
        let index = self.scores.len() - 1;
        let summary = combined.summary();
        self.pool(Block {
            first: index,
            last: index,
            minimizer: summary.minimizer,
            aux: summary.aux,
        })
    }

    fn pool(&mut self, mut current: Block) -> usize {
        let mut merges = 0;
        while let Some(prev) = self.stack.last() {
            if prev.minimizer < current.minimizer {
                break;
            }
            let prev = self.stack.pop().expect("checked");
            current = join::<L>(&prev, &current);
            self.consumed.push(prev);
            merges += 1;
        }
        self.stack.push(current);
        self.cumulative_merges += merges;
        merges
    }

    /// The optimal staircase for the samples seen so far.
    pub fn current(&self) -> Result<Staircase> {
        if self.stack.is_empty() {
            return Err(CalibrationError::EmptyProblem);
        }
        staircase_from_runs(
            &self.scores,
            self.stack.iter().map(|b| (b.first, b.last, b.minimizer)),
        )
    }
}
