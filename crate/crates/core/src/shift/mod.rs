//! Shift detection, shift cascades and the interleaved simulation driver.
//!
//! A simulation alternates ticks and cascades. In a tick every live ant
//! executes one step of the probabilistic machine: a random-bit request
//! splits the ant, an emission moves it. After every tick (and once before
//! the first) a cascade applies shifts until no vertex qualifies, never
//! shifting the same vertex twice within one cascade.

mod audit;
mod config;
mod detect;
mod trace;

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

pub use audit::{audit_trace, TraceAudit};
pub use config::Config;
pub use detect::{candidate_lattice, detect_shift_vertices, qualifying_weight};
pub use trace::{Trace, TraceRecord};

use crate::cats::CatPool;
use crate::machine::{AbstractMachine, MachineKind, StepOutcome};
use crate::population::{AntId, Population, PopulationError};
use crate::scalar::Weight;
use crate::vertex::Vertex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShiftError {
    #[error("candidate lattice grew to {size} vertices (cap {cap})")]
    LatticeOverflow { size: usize, cap: usize },
    #[error("cascade at tick {tick} exceeded {limit} shifts")]
    CascadeOverflow { tick: u64, limit: usize },
    #[error("vertex {vertex} does not carry more than the threshold weight")]
    NotAboveThreshold { vertex: Vertex },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Population(#[from] PopulationError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftEvent<W> {
    pub tick: u64,
    pub vertex: Vertex,
    pub ants: Vec<AntId>,
    pub weight: W,
    pub cat_index: Option<usize>,
    pub cat_clock_used: u64,
}

/// A running simulation of a probabilistic machine against a cat pool.
pub struct Simulation<W: Weight> {
    cfg: Config,
    epsilon: W,
    population: Population,
    cats: CatPool,
    tick: u64,
    trace: Trace,
    events: Vec<ShiftEvent<W>>,
}

impl<W: Weight> Simulation<W> {
    /// Sets up the population and runs the cascade of tick 0.
    pub fn new(
        machine: &dyn AbstractMachine,
        cats_machine: Arc<dyn AbstractMachine>,
        cfg: Config,
    ) -> Result<Self, ShiftError> {
        cfg.validate()?;
        if cats_machine.kind() != MachineKind::Deterministic {
            return Err(ShiftError::InvalidConfig(
                "cats must run a deterministic machine".into(),
            ));
        }
        if machine.kind() != MachineKind::Probabilistic {
            return Err(ShiftError::InvalidConfig(
                "ants must run a probabilistic machine".into(),
            ));
        }
        let mut sim = Simulation {
            epsilon: cfg.epsilon(),
            population: Population::new(machine),
            cats: CatPool::new(cats_machine),
            tick: 0,
            trace: Trace::default(),
            events: Vec::new(),
            cfg,
        };
        sim.trace.push(TraceRecord::TickStart { tick: 0 });
        sim.run_cascade()?;
        sim.record_measures();
        Ok(sim)
    }

    /// Wraps an existing population (for instance one built with
    /// [`Population::from_parts`]) without running any cascade.
    pub fn with_population(
        population: Population,
        cats_machine: Arc<dyn AbstractMachine>,
        cfg: Config,
    ) -> Result<Self, ShiftError> {
        cfg.validate()?;
        Ok(Simulation {
            epsilon: cfg.epsilon(),
            population,
            cats: CatPool::new(cats_machine),
            tick: 0,
            trace: Trace::default(),
            events: Vec::new(),
            cfg,
        })
    }

    pub fn config(&self) -> &Config {
        &self.cfg
    }

    pub fn epsilon(&self) -> &W {
        &self.epsilon
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn cats(&self) -> &CatPool {
        &self.cats
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn events(&self) -> &[ShiftEvent<W>] {
        &self.events
    }

    pub fn is_finished(&self) -> bool {
        self.tick >= self.cfg.ant_tick_budget
    }

    /// Executes one tick followed by its cascade; returns the cascade's shifts.
    pub fn advance_tick(&mut self) -> Result<&[ShiftEvent<W>], ShiftError> {
        self.tick += 1;
        let tick = self.tick;
        self.trace.push(TraceRecord::TickStart { tick });
        for id in self.population.ids() {
            let ant = self.population.get(id).expect("listed id");
            if ant.is_halted() {
                continue;
            }
            match self.population.step_ant(id)? {
                StepOutcome::NeedsRandomBit => {
                    let node = ant_node(&self.population, id);
                    let children = self.population.split_ant(id)?;
                    let weight_exp = self.population.get(children.0).expect("child").weight_exp();
                    self.trace.push(TraceRecord::Split {
                        tick,
                        ant: id,
                        node,
                        children: [children.0, children.1],
                        weight_exp,
                    });
                }
                StepOutcome::Emitted(m) => {
                    if self.population.advance_ant(id, m)? {
                        let vertex = self.population.get(id).expect("ant").position.clone();
                        self.trace.push(TraceRecord::Emit {
                            tick,
                            ant: id,
                            value: m,
                            vertex,
                        });
                    }
                }
                StepOutcome::Halted => self.trace.push(TraceRecord::Halt { tick, ant: id }),
                StepOutcome::Continue | StepOutcome::NeedsInputBit => {}
            }
        }
        let first = self.events.len();
        self.run_cascade()?;
        self.record_measures();
        Ok(&self.events[first..])
    }

    /// Runs ticks until the tick budget is spent.
    pub fn run_to_end(&mut self) -> Result<(), ShiftError> {
        while !self.is_finished() {
            self.advance_tick()?;
        }
        Ok(())
    }

    /// Applies one shift at `x`: qualifying shadows move to `x`, a cat
    /// visiting `x` is sought, then those shadows move to the real positions
    /// and their shift counts grow by one.
    pub fn apply_shift(&mut self, x: &Vertex) -> Result<ShiftEvent<W>, ShiftError> {
        let ants: Vec<AntId> = self
            .population
            .ants()
            .filter(|a| a.shadow.is_subset(x) && x.is_subset(&a.position))
            .map(|a| a.id)
            .collect();
        let weight = ants.iter().fold(W::zero(), |acc, id| {
            acc + self.population.get(*id).expect("ant").weight()
        });
        if weight <= self.epsilon {
            return Err(ShiftError::NotAboveThreshold { vertex: x.clone() });
        }
        let tick = self.tick;
        for id in &ants {
            self.population.get_mut(*id)?.shadow = x.clone();
        }
        self.trace.push(TraceRecord::ShiftTemp {
            tick,
            vertex: x.clone(),
            ants: ants.clone(),
        });

        let before = self.cats.clock();
        let cat_index = self
            .cats
            .find_cat_visiting(x, self.cfg.l, self.cfg.cat_step_budget);
        let cat_clock_used = self.cats.clock() - before;
        self.trace.push(match cat_index {
            Some(cat_index) => TraceRecord::CatFound {
                tick,
                vertex: x.clone(),
                cat_index,
                cat_clock_used,
            },
            None => TraceRecord::CatNotFound {
                tick,
                vertex: x.clone(),
                cat_clock_used,
            },
        });

        for id in &ants {
            let ant = self.population.get_mut(*id)?;
            ant.shadow = ant.position.clone();
            ant.shift_count += 1;
        }
        self.trace.push(TraceRecord::Shift {
            tick,
            vertex: x.clone(),
            ants: ants.clone(),
            weight: weight.to_string(),
            cat_index,
            cat_clock_used,
        });
        let event = ShiftEvent {
            tick,
            vertex: x.clone(),
            ants,
            weight,
            cat_index,
            cat_clock_used,
        };
        self.events.push(event.clone());
        Ok(event)
    }

    /// Shifts at the canonically least qualifying vertex until none is left,
    /// excluding vertices already shifted in this cascade.
    pub fn run_cascade(&mut self) -> Result<Vec<ShiftEvent<W>>, ShiftError> {
        let tick = self.tick;
        self.trace.push(TraceRecord::CascadeStart { tick });
        let mut excluded = BTreeSet::new();
        let mut shifts = Vec::new();
        loop {
            let candidates = detect_shift_vertices(
                &self.population,
                &self.epsilon,
                &excluded,
                self.cfg.lattice_cap,
            )?;
            let Some(x) = candidates.into_iter().next() else {
                break;
            };
            if shifts.len() >= self.cfg.max_cascade_length {
                return Err(ShiftError::CascadeOverflow {
                    tick,
                    limit: self.cfg.max_cascade_length,
                });
            }
            shifts.push(self.apply_shift(&x)?);
            excluded.insert(x);
        }
        self.trace.push(TraceRecord::CascadeEnd {
            tick,
            shifts: shifts.len(),
        });
        Ok(shifts)
    }

    fn record_measures(&mut self) {
        let wk = (0..=self.cfg.wk_cap)
            .map(|k| self.population.measure_wk::<W>(k).to_string())
            .collect();
        self.trace.push(TraceRecord::Measure {
            tick: self.tick,
            wk,
        });
    }
}

fn ant_node(pop: &Population, id: AntId) -> String {
    pop.get(id).map(|a| a.node.to_string()).unwrap_or_default()
}

/// Result of a complete simulation.
pub struct SimulationOutcome<W: Weight> {
    pub trace: Trace,
    pub events: Vec<ShiftEvent<W>>,
    pub population: Population,
}

/// Runs the whole interleaved process for `cfg.ant_tick_budget` ticks.
pub fn simulate<W: Weight>(
    machine: &dyn AbstractMachine,
    cats_machine: Arc<dyn AbstractMachine>,
    cfg: Config,
) -> Result<SimulationOutcome<W>, ShiftError> {
    let mut sim = Simulation::<W>::new(machine, cats_machine, cfg)?;
    sim.run_to_end()?;
    Ok(SimulationOutcome {
        trace: sim.trace,
        events: sim.events,
        population: sim.population,
    })
}
