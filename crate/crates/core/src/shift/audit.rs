//! Replays an exact trace and checks the invariants of the shift process.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_traits::{One, Zero};

use super::trace::{Trace, TraceRecord};
use crate::dyadic::DyadicRational;
use crate::population::AntId;
use crate::vertex::Vertex;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceAudit {
    pub ticks: u64,
    pub shifts: usize,
    pub splits: usize,
    pub max_ants: usize,
    pub cats_not_found: usize,
}

struct AntReplay {
    weight_exp: u64,
    position: Vertex,
    shadow: Vertex,
    shift_count: u64,
    /// Every real position held by this ant or its ancestors.
    seen: HashSet<Vertex>,
}

fn ant_mut(ants: &mut BTreeMap<AntId, AntReplay>, id: AntId) -> Result<&mut AntReplay, String> {
    ants.get_mut(&id).ok_or_else(|| format!("unknown ant {id}"))
}

/// Checks, record by record:
///
/// * weights of the live ants sum to one at every tick boundary;
/// * `shadow ⊆ position` for every ant after every record;
/// * each settled shadow is a real position held earlier by the ant or an
///   ancestor, and each temporary shadow `X` satisfies `shadow ⊆ X ⊆ position`;
/// * every shift weighs more than `epsilon` and no vertex repeats in a cascade;
/// * `W_0 = 1`, `W_k` is non-increasing in `k` and non-decreasing in time,
///   and each recorded `W_k` matches the replayed shift counts.
pub fn audit_trace(trace: &Trace, epsilon: &DyadicRational) -> Result<TraceAudit, String> {
    let mut ants: BTreeMap<AntId, AntReplay> = BTreeMap::new();
    ants.insert(
        0,
        AntReplay {
            weight_exp: 0,
            position: Vertex::empty(),
            shadow: Vertex::empty(),
            shift_count: 0,
            seen: HashSet::from([Vertex::empty()]),
        },
    );
    let mut audit = TraceAudit {
        max_ants: 1,
        ..TraceAudit::default()
    };
    let mut cascade: BTreeSet<Vertex> = BTreeSet::new();
    let mut last_wk: Option<Vec<DyadicRational>> = None;

    for (line, rec) in trace.records.iter().enumerate() {
        let ctx = |msg: String| format!("record {line} ({rec:?}): {msg}");
        match rec {
            TraceRecord::TickStart { tick } => {
                audit.ticks = *tick;
                let total: DyadicRational = ants
                    .values()
                    .map(|a| DyadicRational::pow2_neg(a.weight_exp))
                    .sum();
                if !total.is_one() {
                    return Err(ctx(format!("total weight {total}")));
                }
            }
            TraceRecord::Split {
                ant,
                children,
                weight_exp,
                ..
            } => {
                let parent = ants.remove(ant).ok_or_else(|| ctx("unknown parent".into()))?;
                if *weight_exp != parent.weight_exp + 1 {
                    return Err(ctx("child weight is not half the parent's".into()));
                }
                for child in children {
                    ants.insert(
                        *child,
                        AntReplay {
                            weight_exp: *weight_exp,
                            position: parent.position.clone(),
                            shadow: parent.shadow.clone(),
                            shift_count: parent.shift_count,
                            seen: parent.seen.clone(),
                        },
                    );
                }
                audit.splits += 1;
                audit.max_ants = audit.max_ants.max(ants.len());
            }
            TraceRecord::Emit {
                ant, value, vertex, ..
            } => {
                let a = ant_mut(&mut ants, *ant).map_err(ctx)?;
                if !a.position.is_subset(vertex) || !vertex.contains(*value) {
                    return Err(ctx("position did not grow by the emitted value".into()));
                }
                a.position = vertex.clone();
                a.seen.insert(vertex.clone());
                if !a.shadow.is_subset(&a.position) {
                    return Err(ctx("shadow escaped position".into()));
                }
            }
            TraceRecord::CatNotFound { .. } => audit.cats_not_found += 1,
            TraceRecord::Halt { .. } | TraceRecord::CatFound { .. } | TraceRecord::CascadeEnd { .. } => {}
            TraceRecord::CascadeStart { .. } => cascade.clear(),
            TraceRecord::ShiftTemp { vertex, ants: ids, .. } => {
                for id in ids {
                    let a = ant_mut(&mut ants, *id).map_err(ctx)?;
                    if !a.shadow.is_subset(vertex) || !vertex.is_subset(&a.position) {
                        return Err(ctx(format!("ant {id} does not qualify")));
                    }
                    a.shadow = vertex.clone();
                }
            }
            TraceRecord::Shift {
                vertex,
                ants: ids,
                weight,
                ..
            } => {
                let weight: DyadicRational = weight.parse().map_err(|_| ctx("inexact weight".into()))?;
                if weight <= *epsilon {
                    return Err(ctx("shift weight not above threshold".into()));
                }
                if !cascade.insert(vertex.clone()) {
                    return Err(ctx("vertex shifted twice in one cascade".into()));
                }
                let mut sum = DyadicRational::zero();
                for id in ids {
                    let a = ant_mut(&mut ants, *id).map_err(ctx)?;
                    if &a.shadow != vertex {
                        return Err(ctx(format!("ant {id} skipped the temporary phase")));
                    }
                    a.shadow = a.position.clone();
                    a.shift_count += 1;
                    if !a.seen.contains(&a.shadow) {
                        return Err(ctx(format!("ant {id} shadow is not an earlier position")));
                    }
                    sum += DyadicRational::pow2_neg(a.weight_exp);
                }
                if sum != weight {
                    return Err(ctx(format!("recorded weight {weight} but ants weigh {sum}")));
                }
                audit.shifts += 1;
            }
            TraceRecord::Measure { wk, .. } => {
                let wk: Vec<DyadicRational> = wk
                    .iter()
                    .map(|s| s.parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| ctx("inexact measure".into()))?;
                if !wk.first().is_some_and(|w| w.is_one()) {
                    return Err(ctx("W_0 is not 1".into()));
                }
                if wk.windows(2).any(|w| w[1] > w[0]) {
                    return Err(ctx("W_k increases with k".into()));
                }
                if let Some(prev) = &last_wk {
                    if prev.iter().zip(&wk).any(|(a, b)| b < a) {
                        return Err(ctx("W_k decreased over time".into()));
                    }
                }
                for (k, recorded) in wk.iter().enumerate() {
                    let recount: DyadicRational = ants
                        .values()
                        .filter(|a| a.shift_count >= k as u64)
                        .map(|a| DyadicRational::pow2_neg(a.weight_exp))
                        .sum();
                    if *recorded != recount {
                        return Err(ctx(format!("W_{k} disagrees with the replayed ants")));
                    }
                }
                last_wk = Some(wk);
            }
        }
    }
    for (id, a) in &ants {
        if !a.shadow.is_subset(&a.position) {
            return Err(format!("ant {id}: final shadow escaped position"));
        }
    }
    Ok(audit)
}
