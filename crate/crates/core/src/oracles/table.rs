use std::fmt::Write;
use std::sync::Arc;

use crate::machine::AbstractMachine;
use crate::vertex::Vertex;

use super::complexity::fmt_bits;
use super::{complexity_h, complexity_i, ComplexityInterval, InputSearch, SetSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    pub bit_depth: u64,
    pub step_budget: u64,
    /// Longest input scanned for `I`.
    pub max_len: u32,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            bit_depth: 12,
            step_budget: 2_000,
            max_len: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub set: Vertex,
    /// Best (smallest) `H` interval over the machine family.
    pub h: ComplexityInterval,
    /// Name of the machine attaining `h.hi`.
    pub h_machine: Option<String>,
    pub i: InputSearch,
    /// `I - 2·hi(H) - 2·log2(max(hi(H), 1))`, when both sides are finite.
    pub slack: Option<f64>,
    pub inconclusive: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundTable {
    pub rows: Vec<BoundRow>,
}

impl BoundTable {
    pub const HEADER: &'static str = "S\tH\tI\tslack";

    /// Tab-separated table with a header row. Inconclusive rows carry a `*`
    /// after the slack value.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("{}\n", Self::HEADER);
        for r in &self.rows {
            let h = format!("[{},{}]", fmt_bits(r.h.lo), fmt_bits(r.h.hi));
            let i = match r.i.length {
                Some(n) => n.to_string(),
                None => "none".into(),
            };
            let slack = match r.slack {
                Some(x) => format!("{x:.4}"),
                None => "n/a".into(),
            };
            let mark = if r.inconclusive { "*" } else { "" };
            writeln!(out, "{}\t{h}\t{i}\t{slack}{mark}", r.set).expect("write to string");
        }
        out
    }

    /// Largest slack over rows where it is defined.
    pub fn worst_slack(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.slack)
            .max_by(|a, b| a.total_cmp(b))
    }
}

pub fn slack(i: usize, h_hi: f64) -> Option<f64> {
    h_hi
        .is_finite()
        .then(|| i as f64 - 2.0 * h_hi - 2.0 * h_hi.max(1.0).log2())
}

/// One row per set: `H` is the least interval over `machines`, `I` comes from
/// `cats_machine`. Rows are sorted by `H` (upper bound, then lower bound).
pub fn bound_table(
    cats_machine: &dyn AbstractMachine,
    machines: &[Arc<dyn AbstractMachine>],
    sets: &[Vertex],
    budgets: Budgets,
) -> BoundTable {
    let mut rows: Vec<BoundRow> = sets
        .iter()
        .map(|set| {
            let spec = SetSpec::finite(set.clone());
            let mut h = ComplexityInterval {
                lo: f64::INFINITY,
                hi: f64::INFINITY,
            };
            let mut h_machine = None;
            for m in machines {
                let hm = complexity_h(m.as_ref(), &spec, budgets.bit_depth, budgets.step_budget);
                h.lo = h.lo.min(hm.lo);
                if hm.hi < h.hi {
                    h.hi = hm.hi;
                    h_machine = Some(m.name().to_string());
                }
            }
            let i = complexity_i(cats_machine, &spec, budgets.max_len, budgets.step_budget)
                .expect("finite set");
            let slack = i.length.and_then(|n| slack(n, h.hi));
            let inconclusive = !h.is_exact() || i.length.is_none() || i.budget_limited;
            BoundRow {
                set: set.clone(),
                h,
                h_machine,
                i,
                slack,
                inconclusive,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.h.hi
            .total_cmp(&b.h.hi)
            .then(a.h.lo.total_cmp(&b.h.lo))
            .then_with(|| a.set.cmp(&b.set))
    });
    BoundTable { rows }
}
