use serde::Serialize;

use super::program::{Instruction, MachineKind, Program, Reg, REGISTER_COUNT};
use crate::bits::BitString;
use crate::vertex::Vertex;

/// Value written by `INBIT` once the input is exhausted.
pub const END_OF_INPUT: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepOutcome {
    Continue,
    /// An `EMIT`/`EMITC` executed; re-emission still reports the value.
    Emitted(u64),
    NeedsRandomBit,
    NeedsInputBit,
    Halted,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MachineState {
    pub pc: usize,
    pub registers: [u64; REGISTER_COUNT],
    pub input_cursor: usize,
    /// Known input length for deterministic runs; `None` means bits are
    /// always requested from the caller.
    pub input_len: Option<usize>,
    pub emitted: Vertex,
    pub halted: bool,
    pub steps_used: u64,
    /// Register waiting for a supplied bit after a `Needs*` outcome.
    awaiting: Option<Reg>,
}

impl MachineState {
    pub fn new() -> Self {
        MachineState {
            pc: 0,
            registers: [0; REGISTER_COUNT],
            input_cursor: 0,
            input_len: None,
            emitted: Vertex::empty(),
            halted: false,
            steps_used: 0,
            awaiting: None,
        }
    }

    pub fn with_input_len(len: usize) -> Self {
        MachineState {
            input_len: Some(len),
            ..MachineState::new()
        }
    }

    pub fn is_awaiting_bit(&self) -> bool {
        self.awaiting.is_some()
    }
}

impl Default for MachineState {
    fn default() -> Self {
        MachineState::new()
    }
}

/// Executes one instruction.
///
/// `RAND`/`INBIT` take two calls: the first returns the matching `Needs*`
/// outcome without advancing, the second consumes `supplied`. A deterministic
/// state with a known input length reads the end-of-input sentinel directly.
/// Every call on a live state counts as one step; a halted state is returned
/// untouched.
pub fn step(state: &mut MachineState, program: &Program, supplied: Option<bool>) -> StepOutcome {
    if state.halted {
        return StepOutcome::Halted;
    }
    state.steps_used += 1;

    if let Some(reg) = state.awaiting {
        let Some(bit) = supplied else {
            return match program.kind() {
                MachineKind::Probabilistic => StepOutcome::NeedsRandomBit,
                MachineKind::Deterministic => StepOutcome::NeedsInputBit,
            };
        };
        state.awaiting = None;
        state.registers[reg.index()] = bit as u64;
        if program.kind() == MachineKind::Deterministic {
            state.input_cursor += 1;
        }
        state.pc += 1;
        return StepOutcome::Continue;
    }

    let Some(&ins) = program.instructions().get(state.pc) else {
        state.halted = true;
        return StepOutcome::Halted;
    };
    let regs = &mut state.registers;
    let mut next = state.pc + 1;
    let outcome = match ins {
        Instruction::Inc(r) => {
            regs[r.index()] = regs[r.index()].saturating_add(1);
            StepOutcome::Continue
        }
        Instruction::Dec(r) => {
            regs[r.index()] = regs[r.index()].saturating_sub(1);
            StepOutcome::Continue
        }
        Instruction::Set(r, c) => {
            regs[r.index()] = c;
            StepOutcome::Continue
        }
        Instruction::Add(dst, src) => {
            regs[dst.index()] = regs[dst.index()].saturating_add(regs[src.index()]);
            StepOutcome::Continue
        }
        Instruction::Jz(r, t) => {
            if regs[r.index()] == 0 {
                next = t;
            }
            StepOutcome::Continue
        }
        Instruction::Jnz(r, t) => {
            if regs[r.index()] != 0 {
                next = t;
            }
            StepOutcome::Continue
        }
        Instruction::Jmp(t) => {
            next = t;
            StepOutcome::Continue
        }
        Instruction::Emit(r) => {
            let v = regs[r.index()];
            state.emitted.insert(v);
            StepOutcome::Emitted(v)
        }
        Instruction::EmitC(c) => {
            state.emitted.insert(c);
            StepOutcome::Emitted(c)
        }
        Instruction::Rand(r) => {
            state.awaiting = Some(r);
            return StepOutcome::NeedsRandomBit;
        }
        Instruction::InBit(r) => match state.input_len {
            Some(n) if state.input_cursor >= n => {
                regs[r.index()] = END_OF_INPUT;
                StepOutcome::Continue
            }
            _ => {
                state.awaiting = Some(r);
                return StepOutcome::NeedsInputBit;
            }
        },
        Instruction::Halt => {
            state.halted = true;
            return StepOutcome::Halted;
        }
    };
    state.pc = next;
    outcome
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub emitted: Vertex,
    pub halted: bool,
    pub steps_used: u64,
}

/// Runs a deterministic program on `input` for at most `step_budget` steps.
pub fn run_deterministic(program: &Program, input: &BitString, step_budget: u64) -> RunSummary {
    debug_assert_eq!(program.kind(), MachineKind::Deterministic);
    let mut state = MachineState::with_input_len(input.len());
    let mut supplied = None;
    while !state.halted && state.steps_used < step_budget {
        let outcome = step(&mut state, program, supplied.take());
        if outcome == StepOutcome::NeedsInputBit {
            supplied = input.get(state.input_cursor);
        }
    }
    RunSummary {
        emitted: state.emitted,
        halted: state.halted,
        steps_used: state.steps_used,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::parse_program;

    fn run(src: &str, input: &str, budget: u64) -> RunSummary {
        run_deterministic(&parse_program(src).unwrap(), &input.parse().unwrap(), budget)
    }

    #[test]
    fn halt_on_fresh_state() {
        let p = parse_program("HALT").unwrap();
        let mut s = MachineState::new();
        assert_eq!(step(&mut s, &p, None), StepOutcome::Halted);
        assert!(s.emitted.is_empty());
        assert_eq!(step(&mut s, &p, None), StepOutcome::Halted);
        assert_eq!(s.steps_used, 1);
    }

    #[test]
    fn emission_is_set_union() {
        let p = parse_program("EMITC 5\nEMITC 5\nHALT").unwrap();
        let mut s = MachineState::new();
        assert_eq!(step(&mut s, &p, None), StepOutcome::Emitted(5));
        assert_eq!(step(&mut s, &p, None), StepOutcome::Emitted(5));
        assert_eq!(s.emitted, Vertex::from_elements([5]));
        assert_eq!(step(&mut s, &p, None), StepOutcome::Halted);
    }

    #[test]
    fn run_deterministic_examples() {
        assert_eq!(
            run("HALT", "", 10),
            RunSummary { emitted: Vertex::empty(), halted: true, steps_used: 1 }
        );
        assert_eq!(
            run("EMITC 3\nEMITC 7\nHALT", "", 10),
            RunSummary { emitted: Vertex::from_elements([3, 7]), halted: true, steps_used: 3 }
        );
        assert_eq!(
            run("@a: JMP @a", "", 100),
            RunSummary { emitted: Vertex::empty(), halted: false, steps_used: 100 }
        );
    }

    #[test]
    fn dec_floors_at_zero() {
        let r = run("DEC R0\nEMIT R0\nHALT", "", 10);
        assert_eq!(r.emitted, Vertex::from_elements([0]));
    }

    #[test]
    fn inbit_reads_input_then_sentinel() {
        // Emits each bit read, then the sentinel.
        let src = "@l: INBIT R0\nEMIT R0\nSET R1 2\n@c: JZ R0 @l\nDEC R0\nDEC R1\nJNZ R1 @c\nHALT";
        let r = run(src, "1", 100);
        assert!(r.halted);
        assert_eq!(r.emitted, Vertex::from_elements([1, 2]));
        let r = run(src, "", 100);
        assert_eq!(r.emitted, Vertex::from_elements([2]));
    }

    #[test]
    fn rand_round_trip() {
        let p = parse_program("RAND R3\nEMIT R3\nHALT").unwrap();
        let mut s = MachineState::new();
        assert_eq!(step(&mut s, &p, None), StepOutcome::NeedsRandomBit);
        assert_eq!(s.pc, 0);
        assert_eq!(step(&mut s, &p, None), StepOutcome::NeedsRandomBit);
        assert_eq!(step(&mut s, &p, Some(true)), StepOutcome::Continue);
        assert_eq!(step(&mut s, &p, None), StepOutcome::Emitted(1));
        assert_eq!(s.steps_used, 4);
    }

    #[test]
    fn falling_off_the_end_halts() {
        let r = run("EMITC 1", "", 10);
        assert!(r.halted);
        assert_eq!(r.steps_used, 2);
    }
}
