//! Brute-force ground truth for enumeration probabilities, minimal inputs,
//! the cat-count criterion and bound tables.
//!
//! Every oracle is budgeted and reports when a budget kept it from an exact
//! answer.

mod complexity;
mod probability;
mod setspec;
mod table;

use thiserror::Error;

pub use complexity::{
    cat_equivalence, cats_for_complexity, complexity_h, complexity_i, ComplexityInterval, InputSearch,
};
pub use probability::{enumeration_probability, ProbabilityInterval};
pub use setspec::{parse_list, SetSpec, SetSpecError, Tail};
pub use table::{bound_table, BoundRow, BoundTable, Budgets};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("a scanned run was unresolved within the step budget")]
    InconclusiveBudget,
    #[error("the set must be finite")]
    InfiniteSet,
}
