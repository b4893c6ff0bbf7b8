//! Cats: runs of the deterministic machine, one per input string.
//!
//! Cat `i` runs the machine on the `i`-th input in length-lexicographic order.
//! Cats are advanced lazily and fairly, one step per live cat per round, and
//! the pool remembers every vertex each cat has visited.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::bits::{input_for_index, BitString};
use crate::machine::{AbstractMachine, Run};
use crate::vertex::Vertex;

pub struct Cat {
    pub index: usize,
    pub input: BitString,
    run: Box<dyn Run>,
    /// Every vertex visited so far, starting with the empty one.
    pub history: Vec<Vertex>,
}

impl Cat {
    pub fn emitted(&self) -> &Vertex {
        self.run.emitted()
    }

    pub fn halted(&self) -> bool {
        self.run.halted()
    }

    pub fn steps_used(&self) -> u64 {
        self.run.steps_used()
    }
}

pub struct CatPool {
    machine: Arc<dyn AbstractMachine>,
    cats: Vec<Cat>,
    visitors: HashMap<Vertex, BTreeSet<usize>>,
    cursor: usize,
    clock: u64,
}

impl CatPool {
    pub fn new(machine: Arc<dyn AbstractMachine>) -> CatPool {
        CatPool {
            machine,
            cats: Vec::new(),
            visitors: HashMap::new(),
            cursor: 0,
            clock: 0,
        }
    }

    pub fn machine(&self) -> &Arc<dyn AbstractMachine> {
        &self.machine
    }

    /// Total cat steps executed so far.
    pub fn clock(&self) -> u64 {
        self.clock
    }

    /// Materialized cats; cats beyond this have not moved from the empty vertex.
    pub fn cats(&self) -> &[Cat] {
        &self.cats
    }

    fn materialize(&mut self, l: usize) {
        while self.cats.len() < l {
            let index = self.cats.len();
            let input = input_for_index(index as u64);
            let run = self.machine.boot(&input);
            self.visitors
                .entry(Vertex::empty())
                .or_default()
                .insert(index);
            self.cats.push(Cat {
                index,
                input,
                run,
                history: vec![Vertex::empty()],
            });
        }
    }

    /// Least cat index below `l` whose history contains `x`.
    pub fn first_visitor(&self, x: &Vertex, l: usize) -> Option<usize> {
        if x.is_empty() && l > 0 {
            return Some(0);
        }
        self.visitors.get(x)?.range(..l).next().copied()
    }

    fn live_below(&self, l: usize) -> usize {
        self.cats[..l.min(self.cats.len())]
            .iter()
            .filter(|c| !c.halted())
            .count()
    }

    /// Visits the next round-robin slot among the first `l` cats and steps
    /// that cat if it is still running. Returns the stepped index.
    fn step_slot(&mut self, l: usize) -> Option<usize> {
        if self.cursor >= l {
            self.cursor = 0;
        }
        let i = self.cursor;
        self.cursor += 1;
        let cat = &mut self.cats[i];
        if cat.run.halted() {
            return None;
        }
        cat.run.step(None);
        self.clock += 1;
        if cat.history.last() != Some(cat.run.emitted()) {
            let v = cat.run.emitted().clone();
            self.visitors.entry(v.clone()).or_default().insert(i);
            cat.history.push(v);
        }
        Some(i)
    }

    /// Runs `rounds` fair rounds over the first `l` cats.
    pub fn advance_cats(&mut self, l: usize, rounds: u64) {
        self.materialize(l);
        for _ in 0..rounds {
            if self.live_below(l) == 0 {
                break;
            }
            for _ in 0..l {
                self.step_slot(l);
            }
        }
    }

    /// Advances the pool until a cat among the first `l` is found at `x`, or
    /// `step_budget` more cat steps have been spent.
    ///
    /// Once some cat reaches `x`, the search keeps going while a cat with a
    /// smaller index might still reach it, that is, while that cat is running,
    /// has not visited `x` and has emitted only elements of `x`. The least
    /// visitor found when the search stops is returned.
    pub fn find_cat_visiting(&mut self, x: &Vertex, l: usize, step_budget: u64) -> Option<usize> {
        if l == 0 {
            return None;
        }
        self.materialize(l);
        let start = self.clock;
        let mut best = self.first_visitor(x, l);
        loop {
            let bound = best.unwrap_or(l);
            let pending = self.cats[..bound]
                .iter()
                .any(|c| !c.halted() && c.emitted().is_subset(x));
            if !pending || self.clock - start >= step_budget {
                return best;
            }
            if let Some(i) = self.step_slot(l) {
                if i < best.unwrap_or(usize::MAX) && self.cats[i].emitted() == x {
                    best = Some(i);
                }
            }
        }
    }
}
