//! Offline pool-adjacent-violators solvers.
//!
//! [`fit_direct`] runs whole passes: every adjacent pair whose minimizers
//! violate `y_i < y_{i+1}` is joined at once, chains of violating pairs
//! collapsing into one group, until a pass finds nothing to join.
//! [`fit_stack`] reaches the same partition in one left-to-right sweep.

use crate::error::Result;
use crate::losses::{MergeableLoss, Summary};
use crate::problem::Problem;
use crate::staircase::{blocks_to_staircase, expand_blocks, Block, Staircase};

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub blocks: Vec<Block>,
    /// Pairwise joins performed; always `N - S`.
    pub merge_count: usize,
    /// Joining passes of the direct solver; zero for the stack solver.
    pub passes: usize,
    pub total_loss: f64,
}

impl FitReport {
    fn new<L: MergeableLoss>(
        problem: &Problem<L>,
        blocks: Vec<Block>,
        merge_count: usize,
        passes: usize,
    ) -> Self {
        let fitted = expand_blocks(&blocks);
        FitReport {
            merge_count,
            total_loss: problem.total_loss(&fitted),
            blocks,
            passes,
        }
    }

    pub fn fitted_values(&self) -> Vec<f64> {
        expand_blocks(&self.blocks)
    }

    pub fn staircase<L: MergeableLoss>(&self, problem: &Problem<L>) -> Result<Staircase> {
        blocks_to_staircase(&self.blocks, problem)
    }
}

/// One singleton block per sample.
pub fn initial_blocks<L: MergeableLoss>(problem: &Problem<L>) -> Vec<Block> {
    problem
        .samples()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let Summary { minimizer, aux } = s.loss.summary();
            Block {
                first: i,
                last: i,
                minimizer,
                aux,
            }
        })
        .collect()
}

/// Join two adjacent blocks with the family's merge rule.
pub fn join<L: MergeableLoss>(left: &Block, right: &Block) -> Block {
    let merged = L::merge(
        Summary {
            minimizer: left.minimizer,
            aux: left.aux,
        },
        Summary {
            minimizer: right.minimizer,
            aux: right.aux,
        },
    );
    Block {
        first: left.first,
        last: right.last,
        minimizer: merged.minimizer,
        aux: merged.aux,
    }
}

/// One pass of the direct solver. Returns `None` when no adjacent pair
/// violates, i.e. the input is already optimal. Every pass performs
/// `groups.len() - out.len()` joins.
pub fn direct_pass<L: MergeableLoss>(groups: &[Block]) -> Option<Vec<Block>> {
    let violates = |i: usize| groups[i].minimizer >= groups[i + 1].minimizer;
    if !(0..groups.len().saturating_sub(1)).any(violates) {
        return None;
    }
    let mut out: Vec<Block> = Vec::with_capacity(groups.len());
    out.push(groups[0]);
    for (i, g) in groups.iter().enumerate().skip(1) {
        // violation is judged on the values from before this pass
        if violates(i - 1) {
            let top = out.last_mut().expect("non-empty");
            *top = join::<L>(top, g);
        } else {
            out.push(*g);
        }
    }
    Some(out)
}

/// Pass-based solver; reference implementation for [`fit_stack`].
pub fn fit_direct<L: MergeableLoss>(problem: &Problem<L>) -> FitReport {
    let mut groups = initial_blocks(problem);
    let (mut passes, mut merges) = (0, 0);
    while let Some(next) = direct_pass::<L>(&groups) {
        merges += groups.len() - next.len();
        groups = next;
        passes += 1;
    }
    FitReport::new(problem, groups, merges, passes)
}

/// Push `block` on top of an optimal stack and restore optimality by joining
/// the top with its predecessor while the predecessor's minimizer is not
/// smaller. Returns the number of joins.
pub fn push_and_pool<L: MergeableLoss>(stack: &mut Vec<Block>, block: Block) -> usize {
    stack.push(block);
    let mut merges = 0;
    while stack.len() >= 2 {
        let n = stack.len();
        if stack[n - 2].minimizer < stack[n - 1].minimizer {
            break;
        }
        let top = stack.pop().expect("len >= 2");
        let prev = stack.last_mut().expect("len >= 1");
        *prev = join::<L>(prev, &top);
        merges += 1;
    }
    merges
}

/// Single-sweep stack solver. Linear time for O(1) merge rules.
pub fn fit_stack<L: MergeableLoss>(problem: &Problem<L>) -> FitReport {
    let mut stack = Vec::new();
    let mut merges = 0;
    for block in initial_blocks(problem) {
        merges += push_and_pool::<L>(&mut stack, block);
    }
    FitReport::new(problem, stack, merges, 0)
}
