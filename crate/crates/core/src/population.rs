//! The ant forest: one ant per cone of the random-bit tree.
//!
//! Each ant carries the run of the probabilistic machine along its bits, its
//! real position (what that run has emitted), its shadow position and the
//! number of shifts it and its ancestors took part in. The ants' nodes always
//! form a maximal antichain of the binary tree, so their weights sum to one.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::bits::BitString;
use crate::machine::{AbstractMachine, Run, StepOutcome};
use crate::scalar::Weight;
use crate::vertex::Vertex;

pub type AntId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PopulationError {
    #[error("unknown ant {0}")]
    UnknownAnt(AntId),
    #[error("ant {0} is not waiting for a random bit")]
    NotAwaitingBit(AntId),
    #[error("ant nodes do not form a partition of the Cantor space")]
    NotAPartition,
    #[error("an ant's shadow is not contained in its position")]
    ShadowOutsidePosition,
}

#[derive(Clone)]
pub struct Ant {
    pub id: AntId,
    pub parent: Option<AntId>,
    pub node: BitString,
    pub position: Vertex,
    pub shadow: Vertex,
    pub shift_count: u64,
    run: Box<dyn Run>,
    /// The machine asked for a random bit and the ant has not split yet.
    awaiting: bool,
    /// Bit to hand to the machine on the next step (set on children).
    supply: Option<bool>,
}

impl std::fmt::Debug for Ant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ant")
            .field("id", &self.id)
            .field("node", &self.node.to_string())
            .field("position", &self.position)
            .field("shadow", &self.shadow)
            .field("shift_count", &self.shift_count)
            .finish()
    }
}

impl Ant {
    /// `weight = 2^-weight_exp`, with `weight_exp` the node depth.
    pub fn weight_exp(&self) -> u64 {
        self.node.len() as u64
    }

    pub fn weight<W: Weight>(&self) -> W {
        W::pow2_neg(self.weight_exp())
    }

    pub fn is_awaiting_bit(&self) -> bool {
        self.awaiting
    }

    pub fn is_halted(&self) -> bool {
        self.run.halted()
    }

    pub fn run(&self) -> &dyn Run {
        self.run.as_ref()
    }
}

/// A run that has already halted; backs hand-built ants.
#[derive(Clone)]
struct Frozen {
    emitted: Vertex,
}

impl Run for Frozen {
    fn step(&mut self, _: Option<bool>) -> StepOutcome {
        StepOutcome::Halted
    }

    fn emitted(&self) -> &Vertex {
        &self.emitted
    }

    fn halted(&self) -> bool {
        true
    }

    fn steps_used(&self) -> u64 {
        0
    }

    fn box_clone(&self) -> Box<dyn Run> {
        Box::new(self.clone())
    }
}

/// Hand-built ant description used by [`Population::from_parts`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntSpec {
    pub node: BitString,
    pub position: Vertex,
    pub shadow: Vertex,
    pub shift_count: u64,
}

#[derive(Clone, Debug)]
pub struct Population {
    ants: BTreeMap<AntId, Ant>,
    next_id: AntId,
}

impl Population {
    /// A single unit-weight ant at the empty vertex running `machine`.
    pub fn new(machine: &dyn AbstractMachine) -> Population {
        let root = Ant {
            id: 0,
            parent: None,
            node: BitString::new(),
            position: Vertex::empty(),
            shadow: Vertex::empty(),
            shift_count: 0,
            run: machine.boot(&BitString::new()),
            awaiting: false,
            supply: None,
        };
        Population {
            ants: BTreeMap::from([(0, root)]),
            next_id: 1,
        }
    }

    /// Builds a frozen population from explicit ants. The nodes must be a
    /// maximal prefix-free set and shadows must lie inside positions.
    pub fn from_parts(specs: Vec<AntSpec>) -> Result<Population, PopulationError> {
        let nodes: Vec<&BitString> = specs.iter().map(|s| &s.node).collect();
        if !is_partition(&nodes) {
            return Err(PopulationError::NotAPartition);
        }
        if specs.iter().any(|s| !s.shadow.is_subset(&s.position)) {
            return Err(PopulationError::ShadowOutsidePosition);
        }
        let ants = specs
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                let id = i as AntId;
                let ant = Ant {
                    id,
                    parent: None,
                    run: Box::new(Frozen {
                        emitted: s.position.clone(),
                    }),
                    node: s.node,
                    position: s.position,
                    shadow: s.shadow,
                    shift_count: s.shift_count,
                    awaiting: false,
                    supply: None,
                };
                (id, ant)
            })
            .collect::<BTreeMap<_, _>>();
        let next_id = ants.len() as AntId;
        Ok(Population { ants, next_id })
    }

    pub fn len(&self) -> usize {
        self.ants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ants.is_empty()
    }

    pub fn get(&self, id: AntId) -> Option<&Ant> {
        self.ants.get(&id)
    }

    /// Ants in id order.
    pub fn ants(&self) -> impl Iterator<Item = &Ant> {
        self.ants.values()
    }

    pub fn ids(&self) -> Vec<AntId> {
        self.ants.keys().copied().collect()
    }

    pub(crate) fn get_mut(&mut self, id: AntId) -> Result<&mut Ant, PopulationError> {
        self.ants.get_mut(&id).ok_or(PopulationError::UnknownAnt(id))
    }

    /// Steps the machine of one ant, feeding a pending child bit if any.
    /// A `NeedsRandomBit` outcome marks the ant as awaiting a split.
    pub fn step_ant(&mut self, id: AntId) -> Result<StepOutcome, PopulationError> {
        let ant = self.get_mut(id)?;
        let supplied = ant.supply.take();
        let outcome = ant.run.step(supplied);
        if outcome == StepOutcome::NeedsRandomBit {
            ant.awaiting = true;
        }
        Ok(outcome)
    }

    /// Replaces an awaiting ant by its two children `node·0` and `node·1`.
    /// Each child inherits position, shadow, shift count and machine state,
    /// and will receive its own bit on its next step.
    pub fn split_ant(&mut self, id: AntId) -> Result<(AntId, AntId), PopulationError> {
        let parent = self.ants.get(&id).ok_or(PopulationError::UnknownAnt(id))?;
        if !parent.awaiting {
            return Err(PopulationError::NotAwaitingBit(id));
        }
        let parent = self.ants.remove(&id).expect("checked above");
        let mut ids = [0; 2];
        for (slot, bit) in [false, true].into_iter().enumerate() {
            let child_id = self.next_id;
            self.next_id += 1;
            ids[slot] = child_id;
            let child = Ant {
                id: child_id,
                parent: Some(id),
                node: parent.node.child(bit),
                position: parent.position.clone(),
                shadow: parent.shadow.clone(),
                shift_count: parent.shift_count,
                run: parent.run.clone(),
                awaiting: false,
                supply: Some(bit),
            };
            self.ants.insert(child_id, child);
        }
        Ok((ids[0], ids[1]))
    }

    /// Moves an ant to `position ∪ {m}`; the shadow is left alone.
    pub fn advance_ant(&mut self, id: AntId, m: u64) -> Result<bool, PopulationError> {
        Ok(self.get_mut(id)?.position.insert(m))
    }

    pub fn total_weight<W: Weight>(&self) -> W {
        self.ants().fold(W::zero(), |acc, a| acc + a.weight())
    }

    /// Measure of the ants with at least `k` shifts.
    pub fn measure_wk<W: Weight>(&self, k: u64) -> W {
        self.ants()
            .filter(|a| a.shift_count >= k)
            .fold(W::zero(), |acc, a| acc + a.weight())
    }

    pub fn is_antichain(&self) -> bool {
        let nodes: Vec<&BitString> = self.ants().map(|a| &a.node).collect();
        is_prefix_free(&nodes)
    }
}

fn is_prefix_free(nodes: &[&BitString]) -> bool {
    let mut sorted: Vec<&BitString> = nodes.to_vec();
    sorted.sort_by(|a, b| a.bits().cmp(b.bits()));
    sorted.windows(2).all(|w| !w[0].is_prefix_of(w[1]))
}

/// Prefix-free and complete (Kraft sum exactly one).
fn is_partition(nodes: &[&BitString]) -> bool {
    use crate::dyadic::DyadicRational;
    use num_traits::One;
    let kraft: DyadicRational = nodes
        .iter()
        .map(|n| DyadicRational::pow2_neg(n.len() as u64))
        .sum();
    is_prefix_free(nodes) && kraft.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicRational;
    use crate::machine::parse_program;
    use num_traits::{One, Zero};
    use std::sync::Arc;

    fn v(xs: &[u64]) -> Vertex {
        Vertex::from_elements(xs.iter().copied())
    }

    fn coin() -> Arc<crate::machine::Program> {
        Arc::new(parse_program("RAND R0\nJZ R0 @a\nEMITC 2\nHALT\n@a: EMITC 1\nHALT").unwrap())
    }

    #[test]
    fn root_split_makes_two_halves() {
        let mut pop = Population::new(&coin());
        assert_eq!(pop.step_ant(0), Ok(StepOutcome::NeedsRandomBit));
        let (a, b) = pop.split_ant(0).unwrap();
        assert_eq!(pop.get(a).unwrap().node.to_string(), "0");
        assert_eq!(pop.get(b).unwrap().node.to_string(), "1");
        assert_eq!(pop.get(a).unwrap().weight_exp(), 1);
        assert_eq!(pop.get(b).unwrap().weight_exp(), 1);
        assert!(pop.total_weight::<DyadicRational>().is_one());
        assert!(pop.is_antichain());
        assert_eq!(pop.split_ant(0).unwrap_err(), PopulationError::UnknownAnt(0));
        assert_eq!(pop.split_ant(a).unwrap_err(), PopulationError::NotAwaitingBit(a));
    }

    #[test]
    fn children_inherit_shadow_and_position() {
        let mut pop = Population::new(&coin());
        pop.step_ant(0).unwrap();
        pop.advance_ant(0, 1).unwrap();
        pop.advance_ant(0, 4).unwrap();
        pop.get_mut(0).unwrap().shadow = v(&[1]);
        pop.get_mut(0).unwrap().shift_count = 3;
        let (a, b) = pop.split_ant(0).unwrap();
        for id in [a, b] {
            let ant = pop.get(id).unwrap();
            assert_eq!(ant.position, v(&[1, 4]));
            assert_eq!(ant.shadow, v(&[1]));
            assert_eq!(ant.shift_count, 3);
            assert_eq!(ant.parent, Some(0));
        }
    }

    #[test]
    fn children_follow_their_own_bit() {
        let mut pop = Population::new(&coin());
        pop.step_ant(0).unwrap();
        let (a, b) = pop.split_ant(0).unwrap();
        let mut emitted = Vec::new();
        for id in [a, b] {
            for _ in 0..4 {
                if let StepOutcome::Emitted(m) = pop.step_ant(id).unwrap() {
                    emitted.push(m);
                }
            }
        }
        assert_eq!(emitted, vec![1, 2]);
    }

    #[test]
    fn advance_leaves_shadow() {
        let mut pop = Population::new(&coin());
        pop.advance_ant(0, 1).unwrap();
        assert!(pop.advance_ant(0, 4).unwrap());
        assert!(!pop.advance_ant(0, 1).unwrap());
        assert_eq!(pop.get(0).unwrap().position, v(&[1, 4]));
        assert_eq!(pop.get(0).unwrap().shadow, v(&[]));
        assert_eq!(pop.advance_ant(9, 1), Err(PopulationError::UnknownAnt(9)));
    }

    #[test]
    fn measure_wk_examples() {
        let pop = Population::new(&coin());
        assert!(pop.measure_wk::<DyadicRational>(0).is_one());
        assert!(pop.measure_wk::<DyadicRational>(1).is_zero());

        let spec = |node: &str, shifts| AntSpec {
            node: node.parse().unwrap(),
            position: Vertex::empty(),
            shadow: Vertex::empty(),
            shift_count: shifts,
        };
        let pop = Population::from_parts(vec![spec("0", 2), spec("1", 0)]).unwrap();
        // direct summation: only the first ant has >= 2 shifts
        let oracle: DyadicRational = pop
            .ants()
            .filter(|a| a.shift_count >= 2)
            .map(|a| DyadicRational::pow2_neg(a.node.len() as u64))
            .sum();
        assert_eq!(oracle, "1/2".parse().unwrap());
        assert_eq!(pop.measure_wk::<DyadicRational>(2), oracle);
        assert_eq!(pop.measure_wk::<f64>(2), 0.5);
    }

    #[test]
    fn from_parts_rejects_non_partitions() {
        let spec = |node: &str| AntSpec {
            node: node.parse().unwrap(),
            position: Vertex::empty(),
            shadow: Vertex::empty(),
            shift_count: 0,
        };
        assert!(Population::from_parts(vec![spec("0")]).is_err());
        assert!(Population::from_parts(vec![spec("0"), spec("01"), spec("1")]).is_err());
        assert!(Population::from_parts(vec![spec("0"), spec("10"), spec("11")]).is_ok());
    }
}
