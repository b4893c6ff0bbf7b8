//! Machines derived from others: the shadow machine `M′`, which follows
//! the shadow position of a random ant of a shift simulation, and the
//! randomizer, which turns a deterministic machine into a probabilistic one
//! by drawing its input.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use crate::bits::BitString;
use crate::code::{Decoded, Decoder};
use crate::dyadic::DyadicRational;
use crate::machine::{AbstractMachine, MachineKind, Run, StepOutcome};
use crate::population::Population;
use crate::shift::{Config, ShiftError, Simulation};
use crate::vertex::Vertex;

use num_traits::Zero;

/// Shadow positions of every ant after the cascade of each tick.
#[derive(Debug, Clone, Default)]
pub struct ShadowHistory {
    /// `ticks[t]` maps ant nodes to their shadows after tick `t`.
    pub ticks: Vec<HashMap<BitString, Vertex>>,
    /// Set when the simulation stopped early; `ticks` then ends before it.
    pub error: Option<ShiftError>,
}

impl ShadowHistory {
    /// Runs the simulation for `cfg` and records every tick.
    pub fn record(
        machine: &dyn AbstractMachine,
        cats_machine: Arc<dyn AbstractMachine>,
        cfg: Config,
    ) -> ShadowHistory {
        let mut history = ShadowHistory::default();
        let mut sim = match Simulation::<DyadicRational>::new(machine, cats_machine, cfg) {
            Ok(sim) => sim,
            Err(e) => {
                history.error = Some(e);
                return history;
            }
        };
        history.ticks.push(snapshot(sim.population()));
        while !sim.is_finished() {
            if let Err(e) = sim.advance_tick() {
                history.error = Some(e);
                break;
            }
            history.ticks.push(snapshot(sim.population()));
        }
        history
    }

    /// Shadow of the ant whose node is a prefix of `path` after tick `t`;
    /// `None` if `path` is too short to determine the ant.
    pub fn shadow_on_path(&self, t: usize, path: &BitString) -> Option<&Vertex> {
        let snap = self.ticks.get(t)?;
        (0..=path.len()).find_map(|i| snap.get(&BitString::from_bits(path.bits()[..i].iter().copied())))
    }
}

fn snapshot(pop: &Population) -> HashMap<BitString, Vertex> {
    pop.ants().map(|a| (a.node.clone(), a.shadow.clone())).collect()
}

/// The shadow machine. It reads a self-delimiting code of `k`, runs the shift
/// simulation of `M` with threshold `2^-k`, and then uses further random bits
/// to walk down the ant tree, emitting the shadow position of the ant it is
/// in after each tick.
pub struct ShadowMachine {
    name: String,
    inner: Arc<ShadowInner>,
}

struct ShadowInner {
    machine: Arc<dyn AbstractMachine>,
    cats_machine: Arc<dyn AbstractMachine>,
    template: Config,
    cache: Mutex<HashMap<u32, Arc<ShadowHistory>>>,
}

impl ShadowInner {
    fn history(&self, k: u32) -> Arc<ShadowHistory> {
        let mut cache = self.cache.lock().expect("history cache poisoned");
        Arc::clone(cache.entry(k).or_insert_with(|| {
            let cfg = Config {
                k,
                ..self.template.clone()
            };
            Arc::new(ShadowHistory::record(
                self.machine.as_ref(),
                Arc::clone(&self.cats_machine),
                cfg,
            ))
        }))
    }
}

/// Builds `M′` for the probabilistic `machine` and deterministic
/// `cats_machine`; every field of `template` except `k` is kept.
pub fn build_shadow_machine(
    machine: Arc<dyn AbstractMachine>,
    cats_machine: Arc<dyn AbstractMachine>,
    template: Config,
) -> ShadowMachine {
    ShadowMachine {
        name: format!("shadow({})", machine.name()),
        inner: Arc::new(ShadowInner {
            machine,
            cats_machine,
            template,
            cache: Mutex::default(),
        }),
    }
}

impl ShadowMachine {
    /// The recorded simulation for threshold `2^-k`, computed once.
    pub fn history(&self, k: u32) -> Arc<ShadowHistory> {
        self.inner.history(k)
    }

    /// Boots a run with access to its tick progress.
    pub fn boot_shadow(&self) -> ShadowRun {
        ShadowRun {
            phase: Phase::Decoding(Decoder::new()),
            machine: Arc::clone(&self.inner),
            awaiting: false,
            emitted: Vertex::empty(),
            steps_used: 0,
        }
    }
}

impl AbstractMachine for ShadowMachine {
    fn name(&self) -> &str {
        &self.name
    }

    fn kind(&self) -> MachineKind {
        MachineKind::Probabilistic
    }

    fn boot(&self, _input: &BitString) -> Box<dyn Run> {
        Box::new(self.boot_shadow())
    }
}

#[derive(Clone)]
enum Phase {
    Decoding(Decoder),
    Walking {
        k: u32,
        history: Arc<ShadowHistory>,
        path: BitString,
        /// Next tick whose shadow has not been located yet.
        tick: usize,
        pending: VecDeque<u64>,
    },
    Halted,
}

/// One run of [`ShadowMachine`].
#[derive(Clone)]
pub struct ShadowRun {
    phase: Phase,
    machine: Arc<ShadowInner>,
    awaiting: bool,
    emitted: Vertex,
    steps_used: u64,
}

impl ShadowRun {
    /// The decoded `k`, once the code has been read.
    pub fn k(&self) -> Option<u32> {
        match &self.phase {
            Phase::Walking { k, .. } => Some(*k),
            _ => None,
        }
    }

    /// Number of ticks whose shadow has been fully emitted.
    pub fn ticks_done(&self) -> usize {
        match &self.phase {
            Phase::Walking { tick, pending, .. } => {
                if pending.is_empty() {
                    *tick
                } else {
                    tick - 1
                }
            }
            _ => 0,
        }
    }

    /// Random bits consumed so far.
    pub fn path(&self) -> Option<&BitString> {
        match &self.phase {
            Phase::Walking { path, .. } => Some(path),
            _ => None,
        }
    }

    fn ask(&mut self) -> StepOutcome {
        self.awaiting = true;
        StepOutcome::NeedsRandomBit
    }

    fn halt(&mut self) -> StepOutcome {
        self.phase = Phase::Halted;
        StepOutcome::Halted
    }
}

impl Run for ShadowRun {
    fn step(&mut self, supplied: Option<bool>) -> StepOutcome {
        if matches!(self.phase, Phase::Halted) {
            return StepOutcome::Halted;
        }
        self.steps_used += 1;
        let bit = if std::mem::take(&mut self.awaiting) {
            match supplied {
                Some(b) => Some(b),
                None => return self.ask(),
            }
        } else {
            None
        };

        match &mut self.phase {
            Phase::Decoding(decoder) => {
                let Some(bit) = bit else {
                    return self.ask();
                };
                match decoder.push(bit) {
                    Decoded::NeedMore => StepOutcome::Continue,
                    Decoded::Malformed => self.halt(),
                    Decoded::Value(k) => match u32::try_from(k) {
                        Ok(k) => {
                            let history = self.machine.history(k);
                            self.phase = Phase::Walking {
                                k,
                                history,
                                path: BitString::new(),
                                tick: 0,
                                pending: VecDeque::new(),
                            };
                            StepOutcome::Continue
                        }
                        Err(_) => self.halt(),
                    },
                }
            }
            Phase::Walking {
                history,
                path,
                tick,
                pending,
                ..
            } => {
                if let Some(b) = bit {
                    path.push(b);
                    return StepOutcome::Continue;
                }
                if let Some(m) = pending.pop_front() {
                    self.emitted.insert(m);
                    return StepOutcome::Emitted(m);
                }
                if *tick >= history.ticks.len() {
                    return self.halt();
                }
                match history.shadow_on_path(*tick, path) {
                    None => self.ask(),
                    Some(shadow) => {
                        pending.extend(shadow.difference(&self.emitted));
                        *tick += 1;
                        StepOutcome::Continue
                    }
                }
            }
            Phase::Halted => StepOutcome::Halted,
        }
    }

    fn emitted(&self) -> &Vertex {
        &self.emitted
    }

    fn halted(&self) -> bool {
        matches!(self.phase, Phase::Halted)
    }

    fn steps_used(&self) -> u64 {
        self.steps_used
    }

    fn box_clone(&self) -> Box<dyn Run> {
        Box::new(self.clone())
    }
}

/// Exact distribution of `M′`'s shadow after each tick, restricted to runs
/// that read the code of `k` first. Entry `t` maps each shadow value `X` to
/// the probability that the code of `k` is read and the walk's shadow after
/// tick `t` is `X`. Only as many random bits as the ant tree needs are
/// explored.
pub fn shadow_distribution(machine: &ShadowMachine, k: u32) -> Vec<HashMap<Vertex, DyadicRational>> {
    let code = crate::code::encode_natural(k as u64).expect("k is positive");
    let mut out: Vec<HashMap<Vertex, DyadicRational>> = Vec::new();
    let mut stack = vec![(machine.boot_shadow(), 0u64, None::<bool>)];
    while let Some((mut run, depth, mut supply)) = stack.pop() {
        let mut recorded = run.ticks_done();
        loop {
            let outcome = run.step(supply.take());
            let done = run.ticks_done();
            while recorded < done {
                let slot = out.len().max(recorded + 1);
                out.resize_with(slot, HashMap::new);
                *out[recorded].entry(run.emitted().clone()).or_insert_with(DyadicRational::zero) += DyadicRational::pow2_neg(depth);
                recorded += 1;
            }
            match outcome {
                StepOutcome::Halted => break,
                StepOutcome::NeedsRandomBit => {
                    let d = depth as usize;
                    if d < code.len() {
                        // only the code of `k` is followed
                        let b = code.get(d).expect("inside code");
                        stack.push((run, depth + 1, Some(b)));
                    } else {
                        stack.push((run.clone(), depth + 1, Some(true)));
                        stack.push((run, depth + 1, Some(false)));
                    }
                    break;
                }
                _ => {}
            }
        }
    }
    out
}

/// Exact shadow weights per tick, read from a fresh simulation.
pub fn shadow_weights(history: &ShadowHistory, t: usize) -> HashMap<Vertex, DyadicRational> {
    let mut out: HashMap<Vertex, DyadicRational> = HashMap::new();
    if let Some(snap) = history.ticks.get(t) {
        for (node, shadow) in snap {
            *out.entry(shadow.clone()).or_insert_with(DyadicRational::zero) += DyadicRational::pow2_neg(node.len() as u64);
        }
    }
    out
}

/// Vertices that carry positive weight on either side.
pub fn support<'a>(
    a: &'a HashMap<Vertex, DyadicRational>,
    b: &'a HashMap<Vertex, DyadicRational>,
) -> BTreeSet<&'a Vertex> {
    a.keys().chain(b.keys()).collect()
}

/// Probabilistic wrapper around a deterministic machine: reads the code of
/// `|x| + 1`, then `|x|` raw bits `x`, then runs the machine on `x`.
pub struct Randomizer {
    name: String,
    inner: Arc<dyn AbstractMachine>,
}

pub fn build_randomizer(inner: Arc<dyn AbstractMachine>) -> Randomizer {
    Randomizer {
        name: format!("randomized({})", inner.name()),
        inner,
    }
}

impl AbstractMachine for Randomizer {
    fn name(&self) -> &str {
        &self.name
    }

    fn kind(&self) -> MachineKind {
        MachineKind::Probabilistic
    }

    fn boot(&self, _input: &BitString) -> Box<dyn Run> {
        Box::new(RandomizerRun {
            inner: Arc::clone(&self.inner),
            phase: RandPhase::Length(Decoder::new()),
            awaiting: false,
            steps_used: 0,
            empty: Vertex::empty(),
        })
    }
}

#[derive(Clone)]
enum RandPhase {
    Length(Decoder),
    Input { remaining: u64, x: BitString },
    Running(Box<dyn Run>),
    Halted,
}

#[derive(Clone)]
struct RandomizerRun {
    inner: Arc<dyn AbstractMachine>,
    phase: RandPhase,
    awaiting: bool,
    steps_used: u64,
    empty: Vertex,
}

impl RandomizerRun {
    fn ask(&mut self) -> StepOutcome {
        self.awaiting = true;
        StepOutcome::NeedsRandomBit
    }

    fn start(&mut self, x: &BitString) -> StepOutcome {
        self.phase = RandPhase::Running(self.inner.boot(x));
        StepOutcome::Continue
    }
}

impl Run for RandomizerRun {
    fn step(&mut self, supplied: Option<bool>) -> StepOutcome {
        if self.halted() {
            return StepOutcome::Halted;
        }
        if let RandPhase::Running(run) = &mut self.phase {
            // steps of the wrapped machine are counted by it
            return match run.step(None) {
                StepOutcome::NeedsInputBit => StepOutcome::Continue,
                other => other,
            };
        }
        self.steps_used += 1;
        let bit = if std::mem::take(&mut self.awaiting) {
            match supplied {
                Some(b) => b,
                None => return self.ask(),
            }
        } else {
            return self.ask();
        };
        match &mut self.phase {
            RandPhase::Length(decoder) => match decoder.push(bit) {
                Decoded::NeedMore => StepOutcome::Continue,
                Decoded::Malformed => {
                    self.phase = RandPhase::Halted;
                    StepOutcome::Halted
                }
                Decoded::Value(n) => {
                    if n == 1 {
                        self.start(&BitString::new())
                    } else {
                        self.phase = RandPhase::Input {
                            remaining: n - 1,
                            x: BitString::new(),
                        };
                        StepOutcome::Continue
                    }
                }
            },
            RandPhase::Input { remaining, x } => {
                x.push(bit);
                *remaining -= 1;
                if *remaining == 0 {
                    let x = x.clone();
                    self.start(&x)
                } else {
                    StepOutcome::Continue
                }
            }
            RandPhase::Running(_) | RandPhase::Halted => unreachable!("handled above"),
        }
    }

    fn emitted(&self) -> &Vertex {
        match &self.phase {
            RandPhase::Running(run) => run.emitted(),
            _ => &self.empty,
        }
    }

    fn halted(&self) -> bool {
        match &self.phase {
            RandPhase::Running(run) => run.halted(),
            RandPhase::Halted => true,
            _ => false,
        }
    }

    fn steps_used(&self) -> u64 {
        match &self.phase {
            RandPhase::Running(run) => self.steps_used + run.steps_used(),
            _ => self.steps_used,
        }
    }

    fn box_clone(&self) -> Box<dyn Run> {
        Box::new(self.clone())
    }
}
