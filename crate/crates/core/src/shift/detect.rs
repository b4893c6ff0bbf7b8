//! Detection of vertices where a shift is possible.
//!
//! A vertex `X` qualifies when the ants with `shadow ⊆ X ⊆ position` weigh
//! more than `ε`. If `X` qualifies through a set of ants, the union of their
//! shadows qualifies through the same ants, so only unions of shadows present
//! in the population need to be examined. Unions are grown one shadow at a
//! time and a union is dropped as soon as the ants whose positions contain it
//! weigh at most `ε`; no superset of such a union can qualify.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::ShiftError;
use crate::population::Population;
use crate::scalar::Weight;
use crate::vertex::Vertex;

/// Ants grouped by `(shadow, position)` with their summed weight.
pub(crate) struct Classes<W> {
    classes: Vec<(Vertex, Vertex, W)>,
}

impl<W: Weight> Classes<W> {
    pub(crate) fn of(pop: &Population) -> Self {
        let mut map: BTreeMap<(&Vertex, &Vertex), W> = BTreeMap::new();
        for ant in pop.ants() {
            let w = map.entry((&ant.shadow, &ant.position)).or_insert_with(W::zero);
            *w = w.clone() + ant.weight();
        }
        Classes {
            classes: map
                .into_iter()
                .map(|((s, p), w)| (s.clone(), p.clone(), w))
                .collect(),
        }
    }

    fn qualifying(&self, x: &Vertex) -> W {
        self.classes
            .iter()
            .filter(|(s, p, _)| s.is_subset(x) && x.is_subset(p))
            .fold(W::zero(), |acc, (_, _, w)| acc + w.clone())
    }

    fn covering(&self, x: &Vertex) -> W {
        self.classes
            .iter()
            .filter(|(_, p, _)| x.is_subset(p))
            .fold(W::zero(), |acc, (_, _, w)| acc + w.clone())
    }

    fn shadows(&self) -> BTreeSet<&Vertex> {
        self.classes.iter().map(|(s, _, _)| s).collect()
    }
}

/// Total weight of ants with `shadow ⊆ x ⊆ position`.
pub fn qualifying_weight<W: Weight>(pop: &Population, x: &Vertex) -> W {
    pop.ants()
        .filter(|a| a.shadow.is_subset(x) && x.is_subset(&a.position))
        .fold(W::zero(), |acc, a| acc + a.weight())
}

/// Unions of shadows (including the empty union) that are covered by
/// positions of weight above `epsilon`, in canonical order.
pub fn candidate_lattice<W: Weight>(
    pop: &Population,
    epsilon: &W,
    cap: usize,
) -> Result<Vec<Vertex>, ShiftError> {
    lattice(&Classes::of(pop), epsilon, cap)
}

fn lattice<W: Weight>(classes: &Classes<W>, epsilon: &W, cap: usize) -> Result<Vec<Vertex>, ShiftError> {
    let shadows = classes.shadows();
    let mut seen: HashSet<Vertex> = HashSet::new();
    let mut frontier = vec![Vertex::empty()];
    if classes.covering(&Vertex::empty()) > *epsilon {
        seen.insert(Vertex::empty());
    } else {
        frontier.clear();
    }
    while let Some(u) = frontier.pop() {
        for s in &shadows {
            let next = u.union(s);
            if seen.contains(&next) || classes.covering(&next) <= *epsilon {
                continue;
            }
            seen.insert(next.clone());
            if seen.len() > cap {
                return Err(ShiftError::LatticeOverflow { size: seen.len(), cap });
            }
            frontier.push(next);
        }
    }
    let mut out: Vec<Vertex> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}

/// All vertices of the candidate lattice with qualifying weight above
/// `epsilon` and not in `excluded`, in canonical vertex order.
pub fn detect_shift_vertices<W: Weight>(
    pop: &Population,
    epsilon: &W,
    excluded: &BTreeSet<Vertex>,
    cap: usize,
) -> Result<Vec<Vertex>, ShiftError> {
    let classes = Classes::of(pop);
    Ok(lattice(&classes, epsilon, cap)?
        .into_iter()
        .filter(|x| !excluded.contains(x) && classes.qualifying(x) > *epsilon)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicRational;
    use crate::population::AntSpec;
    use num_traits::One;

    fn v(xs: &[u64]) -> Vertex {
        Vertex::from_elements(xs.iter().copied())
    }

    fn d(s: &str) -> DyadicRational {
        s.parse().unwrap()
    }

    fn ant(node: &str, pos: &[u64], sh: &[u64]) -> AntSpec {
        AntSpec {
            node: node.parse().unwrap(),
            position: v(pos),
            shadow: v(sh),
            shift_count: 0,
        }
    }

    fn three_ants() -> Population {
        Population::from_parts(vec![
            ant("0", &[1, 2], &[]),
            ant("10", &[1], &[]),
            ant("11", &[3], &[]),
        ])
        .unwrap()
    }

    #[test]
    fn qualifying_weight_examples() {
        let fresh = Population::from_parts(vec![ant("", &[], &[])]).unwrap();
        assert!(qualifying_weight::<DyadicRational>(&fresh, &v(&[])).is_one());
        let pop = three_ants();
        assert_eq!(qualifying_weight::<DyadicRational>(&pop, &v(&[1])), d("3/4"));
        assert_eq!(qualifying_weight::<DyadicRational>(&pop, &v(&[2])), d("1/2"));
        assert_eq!(qualifying_weight::<f64>(&pop, &v(&[1])), 0.75);
    }

    #[test]
    fn detection_examples() {
        let fresh = Population::from_parts(vec![ant("", &[], &[])]).unwrap();
        let none = BTreeSet::new();
        assert_eq!(
            detect_shift_vertices(&fresh, &d("1/2"), &none, 100).unwrap(),
            vec![v(&[])]
        );
        // all shadows empty: the lattice is {∅}
        assert_eq!(
            detect_shift_vertices(&three_ants(), &d("1/2"), &none, 100).unwrap(),
            vec![v(&[])]
        );
        let excluded = BTreeSet::from([v(&[])]);
        assert!(detect_shift_vertices(&three_ants(), &d("1/2"), &excluded, 100)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn strict_threshold() {
        let pop = Population::from_parts(vec![ant("0", &[1], &[1]), ant("1", &[2], &[2])]).unwrap();
        let none = BTreeSet::new();
        // {1} and {2} weigh exactly 1/2 each
        assert!(detect_shift_vertices(&pop, &d("1/2"), &none, 100).unwrap().is_empty());
        assert_eq!(
            detect_shift_vertices(&pop, &d("1/4"), &none, 100).unwrap(),
            vec![v(&[1]), v(&[2])]
        );
    }

    #[test]
    fn lattice_overflow() {
        let specs: Vec<AntSpec> = (0..8u64)
            .map(|i| {
                let node = crate::bits::BitString::from_uint(i, 3).to_string();
                AntSpec {
                    node: node.parse().unwrap(),
                    position: v(&[0, 1, 2, 3, 4, 5, 6, 7]),
                    shadow: v(&[i]),
                    shift_count: 0,
                }
            })
            .collect();
        let pop = Population::from_parts(specs).unwrap();
        let eps = d("1/16");
        assert_eq!(candidate_lattice(&pop, &eps, 1000).unwrap().len(), 256);
        assert!(matches!(
            candidate_lattice(&pop, &eps, 100),
            Err(ShiftError::LatticeOverflow { cap: 100, .. })
        ));
    }
}
