use std::fmt;

use crate::bits::{count_up_to_length, input_for_index, BitString};
use crate::cats::CatPool;
use crate::dyadic::DyadicRational;
use crate::machine::AbstractMachine;
use std::sync::Arc;

use super::{enumeration_probability, OracleError, SetSpec};

/// Bounds on `-log2` of an enumeration probability; `inf` when the
/// probability bound is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ComplexityInterval {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn within(&self, outer: &Self) -> bool {
        outer.lo <= self.lo && self.hi <= outer.hi
    }
}

impl fmt::Display for ComplexityInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", fmt_bits(self.lo), fmt_bits(self.hi))
    }
}

pub(crate) fn fmt_bits(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else if x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        format!("{x:.4}")
    }
}

/// `-log2` of [`enumeration_probability`], with the bounds swapped.
pub fn complexity_h(
    machine: &dyn AbstractMachine,
    s: &SetSpec,
    bit_depth: u64,
    step_budget: u64,
) -> ComplexityInterval {
    let p = enumeration_probability::<DyadicRational>(machine, s, bit_depth, step_budget);
    ComplexityInterval {
        // adding zero turns -0.0 into 0.0
        lo: -p.hi.log2() + 0.0,
        hi: -p.lo.log2() + 0.0,
    }
}

/// Outcome of a minimal-input search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputSearch {
    /// Length of the shortest input found that enumerates the set.
    pub length: Option<usize>,
    pub input: Option<BitString>,
    /// Some scanned run neither halted nor left the set within budget.
    pub budget_limited: bool,
}

/// How one budgeted run of a deterministic machine relates to a finite set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Verdict {
    Exact,
    Other,
    Unresolved,
}

pub(crate) fn judge(machine: &dyn AbstractMachine, input: &BitString, s: &SetSpec, step_budget: u64) -> Verdict {
    let mut run = machine.boot(input);
    loop {
        if !s.contains_all(run.emitted()) {
            return Verdict::Other;
        }
        if run.halted() {
            return if s.equals(run.emitted()) {
                Verdict::Exact
            } else {
                Verdict::Other
            };
        }
        if run.steps_used() >= step_budget {
            return Verdict::Unresolved;
        }
        run.step(None);
    }
}

/// Scans inputs of length at most `max_len` in length-lexicographic order and
/// reports the first on which `machine` halts having enumerated exactly `S`.
pub fn complexity_i(
    machine: &dyn AbstractMachine,
    s: &SetSpec,
    max_len: u32,
    step_budget: u64,
) -> Result<InputSearch, OracleError> {
    if !s.is_finite() {
        return Err(OracleError::InfiniteSet);
    }
    let mut budget_limited = false;
    for index in 0..count_up_to_length(max_len) {
        let input = input_for_index(index);
        match judge(machine, &input, s, step_budget) {
            Verdict::Exact => {
                return Ok(InputSearch {
                    length: Some(input.len()),
                    input: Some(input),
                    budget_limited,
                })
            }
            Verdict::Unresolved => budget_limited = true,
            Verdict::Other => {}
        }
    }
    Ok(InputSearch {
        length: None,
        input: None,
        budget_limited,
    })
}

/// Number of cats whose inputs have length at most `k`.
pub fn cats_for_complexity(k: u32) -> u64 {
    count_up_to_length(k)
}

/// Checks `I(S) <= k` against "one of the first `2^(k+1) - 1` cats halts
/// having enumerated `S`", computing both sides independently. The cats are
/// run in a [`CatPool`] for `step_budget` fair rounds.
pub fn cat_equivalence(
    machine: Arc<dyn AbstractMachine>,
    s: &SetSpec,
    k: u32,
    step_budget: u64,
) -> Result<bool, OracleError> {
    let search = complexity_i(machine.as_ref(), s, k, step_budget)?;
    if search.budget_limited {
        return Err(OracleError::InconclusiveBudget);
    }
    let l = usize::try_from(cats_for_complexity(k)).map_err(|_| OracleError::InconclusiveBudget)?;
    let mut pool = CatPool::new(machine);
    pool.advance_cats(l, step_budget);
    let mut found = false;
    for cat in pool.cats().iter().take(l) {
        if cat.halted() {
            found |= s.equals(cat.emitted());
        } else if s.contains_all(cat.emitted()) {
            return Err(OracleError::InconclusiveBudget);
        }
    }
    Ok(search.length.is_some_and(|n| n as u32 <= k) == found)
}
