//! The toy enumeration-machine formalism.
//!
//! Concrete machines are counter-machine programs ([`Program`]); composite
//! machines such as the shadow machine implement [`AbstractMachine`]
//! directly. Both expose runs that are stepped one outcome at a time.

mod exec;
mod program;

use std::sync::Arc;

pub use exec::{run_deterministic, step, MachineState, RunSummary, StepOutcome, END_OF_INPUT};
pub use program::{
    parse_named_program, parse_program, Instruction, MachineKind, Program, ProgramError, Reg,
    REGISTER_COUNT,
};

use crate::bits::BitString;
use crate::vertex::Vertex;

/// A machine that can be booted into independent runs.
///
/// Probabilistic machines ignore `input` and request random bits through
/// [`StepOutcome::NeedsRandomBit`]. Deterministic machines read `input`
/// themselves; callers step them with `None`.
pub trait AbstractMachine: Send + Sync {
    fn name(&self) -> &str;
    fn kind(&self) -> MachineKind;
    fn boot(&self, input: &BitString) -> Box<dyn Run>;
}

/// One execution of an [`AbstractMachine`].
///
/// Fully determined by the bits supplied so far. After `NeedsRandomBit` the
/// next call must carry `Some(bit)`; any other supplied value is ignored.
pub trait Run: Send {
    fn step(&mut self, supplied: Option<bool>) -> StepOutcome;
    fn emitted(&self) -> &Vertex;
    fn halted(&self) -> bool;
    fn steps_used(&self) -> u64;
    fn box_clone(&self) -> Box<dyn Run>;
}

impl Clone for Box<dyn Run> {
    fn clone(&self) -> Self {
        self.box_clone()
    }
}

#[derive(Clone)]
struct ProgramRun {
    program: Arc<Program>,
    state: MachineState,
    input: BitString,
    pending_input: bool,
}

impl Run for ProgramRun {
    fn step(&mut self, supplied: Option<bool>) -> StepOutcome {
        let supplied = if self.pending_input {
            self.pending_input = false;
            self.input.get(self.state.input_cursor)
        } else {
            supplied
        };
        let outcome = step(&mut self.state, &self.program, supplied);
        if outcome == StepOutcome::NeedsInputBit {
            self.pending_input = true;
        }
        outcome
    }

    fn emitted(&self) -> &Vertex {
        &self.state.emitted
    }

    fn halted(&self) -> bool {
        self.state.halted
    }

    fn steps_used(&self) -> u64 {
        self.state.steps_used
    }

    fn box_clone(&self) -> Box<dyn Run> {
        Box::new(self.clone())
    }
}

/// A shared program is itself an abstract machine.
impl AbstractMachine for Arc<Program> {
    fn name(&self) -> &str {
        Program::name(self)
    }

    fn kind(&self) -> MachineKind {
        Program::kind(self)
    }

    fn boot(&self, input: &BitString) -> Box<dyn Run> {
        let state = match Program::kind(self) {
            MachineKind::Deterministic => MachineState::with_input_len(input.len()),
            MachineKind::Probabilistic => MachineState::new(),
        };
        Box::new(ProgramRun {
            program: Arc::clone(self),
            state,
            input: input.clone(),
            pending_input: false,
        })
    }
}

/// Wraps a program as a shareable abstract machine.
pub fn share(program: Program) -> Arc<dyn AbstractMachine> {
    Arc::new(Arc::new(program))
}

/// Runs any deterministic machine on `input` within `step_budget` steps.
pub fn run_machine(machine: &dyn AbstractMachine, input: &BitString, step_budget: u64) -> RunSummary {
    let mut run = machine.boot(input);
    while !run.halted() && run.steps_used() < step_budget {
        run.step(None);
    }
    RunSummary {
        emitted: run.emitted().clone(),
        halted: run.halted(),
        steps_used: run.steps_used(),
    }
}
