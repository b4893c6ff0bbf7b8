use std::fmt;

use crate::bits::BitString;
use crate::dyadic::DyadicRational;
use crate::machine::{AbstractMachine, Run, StepOutcome};
use crate::scalar::Weight;

use super::SetSpec;

/// Bounds on the probability that a machine enumerates a set.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityInterval<W = DyadicRational> {
    pub lo: W,
    pub hi: W,
}

impl<W: Weight> ProbabilityInterval<W> {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    /// Whether `self` lies inside `outer`.
    pub fn within(&self, outer: &Self) -> bool {
        outer.lo <= self.lo && self.hi <= outer.hi
    }
}

impl<W: Weight> fmt::Display for ProbabilityInterval<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Explores the random-bit tree of `machine` to depth `bit_depth`, running
/// each branch for at most `step_budget` steps (counted from the start).
///
/// Branches that halt with exactly `S` count toward both bounds. Branches
/// that are cut off by either budget count toward `hi` if what they emitted
/// so far lies in `S`. Everything else counts toward neither.
pub fn enumeration_probability<W: Weight>(
    machine: &dyn AbstractMachine,
    s: &SetSpec,
    bit_depth: u64,
    step_budget: u64,
) -> ProbabilityInterval<W> {
    let mut lo = W::zero();
    let mut hi = W::zero();
    let mut stack: Vec<(Box<dyn Run>, u64, Option<bool>)> =
        vec![(machine.boot(&BitString::new()), 0, None)];
    while let Some((mut run, depth, mut supply)) = stack.pop() {
        let weight = W::pow2_neg(depth);
        loop {
            if !s.contains_all(run.emitted()) {
                break;
            }
            if run.halted() {
                if s.equals(run.emitted()) {
                    lo = lo + weight.clone();
                    hi = hi + weight;
                }
                break;
            }
            if run.steps_used() >= step_budget {
                hi = hi + weight;
                break;
            }
            if run.step(supply.take()) == StepOutcome::NeedsRandomBit {
                if depth >= bit_depth {
                    if s.contains_all(run.emitted()) {
                        hi = hi + weight;
                    }
                    break;
                }
                stack.push((run.clone(), depth + 1, Some(true)));
                stack.push((run, depth + 1, Some(false)));
                break;
            }
        }
    }
    ProbabilityInterval { lo, hi }
}
