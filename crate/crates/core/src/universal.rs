//! The toy-universal deterministic machine.
//!
//! Its input is a self-delimiting program length `L` followed by `L` bits of
//! packed bytecode. The bytecode is decoded into a deterministic program that
//! is then interpreted; any bits after the `L` program bits are ignored and
//! the interpreted program sees an empty input, so `INBIT` yields the
//! end-of-input sentinel.
//!
//! Packed instruction layout, most significant bit first:
//!
//! | opcode | bits   | operands                           |
//! |--------|--------|------------------------------------|
//! | INC    | `0000` | reg(3)                             |
//! | DEC    | `0001` | reg(3)                             |
//! | SET    | `0010` | reg(3), const                      |
//! | ADD    | `0011` | reg(3) dst, reg(3) src             |
//! | JZ     | `0100` | reg(3), target                     |
//! | JNZ    | `0101` | reg(3), target                     |
//! | JMP    | `0110` | target                             |
//! | EMIT   | `0111` | reg(3)                             |
//! | EMITC  | `1000` | const                              |
//! | INBIT  | `1001` | reg(3)                             |
//! | HALT   | `1010` |                                    |
//!
//! Opcodes `1011`..`1111` are invalid. `const` is the self-delimiting code of
//! `c + 1`; `target` is the self-delimiting code of `index + 1`, where an
//! index equal to the instruction count means "jump past the end" (halt).
//! The whole input is malformed, and the machine halts at its first step
//! having emitted nothing, when the length prefix is malformed, the input is
//! shorter than `L` program bits, an opcode is invalid, an instruction
//! straddles the end of the `L` bits, or a jump target is out of range.

use std::sync::Arc;

use thiserror::Error;

use crate::bits::BitString;
use crate::code::{self, Decoded, Decoder};
use crate::machine::{
    step, AbstractMachine, Instruction, MachineKind, MachineState, Program, Reg, Run, StepOutcome,
};
use crate::vertex::Vertex;

pub const TOY_UNIVERSAL_NAME: &str = "toy-universal";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PackError {
    #[error("RAND cannot appear in a packed deterministic program")]
    RandNotEncodable,
    #[error("malformed packed program")]
    Malformed,
}

struct Reader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl Reader<'_> {
    fn uint(&mut self, width: usize) -> Option<u64> {
        let end = self.pos.checked_add(width)?;
        let slice = self.bits.get(self.pos..end)?;
        self.pos = end;
        Some(slice.iter().fold(0, |acc, &b| (acc << 1) | b as u64))
    }

    fn natural(&mut self) -> Option<u64> {
        let mut dec = Decoder::new();
        loop {
            let bit = *self.bits.get(self.pos)?;
            self.pos += 1;
            match dec.push(bit) {
                Decoded::NeedMore => {}
                Decoded::Value(v) => return Some(v),
                Decoded::Malformed => return None,
            }
        }
    }

    fn reg(&mut self) -> Option<Reg> {
        Reg::new(self.uint(3)? as u8)
    }

    fn offset_natural(&mut self) -> Option<u64> {
        self.natural().map(|v| v - 1)
    }
}

/// Decodes exactly `bits` as a sequence of packed instructions.
pub fn unpack_program(bits: &[bool]) -> Result<Program, PackError> {
    let mut r = Reader { bits, pos: 0 };
    let mut out = Vec::new();
    while r.pos < bits.len() {
        let ins = (|| {
            let op = r.uint(4)?;
            Some(match op {
                0 => Instruction::Inc(r.reg()?),
                1 => Instruction::Dec(r.reg()?),
                2 => Instruction::Set(r.reg()?, r.offset_natural()?),
                3 => Instruction::Add(r.reg()?, r.reg()?),
                4 => Instruction::Jz(r.reg()?, r.offset_natural()? as usize),
                5 => Instruction::Jnz(r.reg()?, r.offset_natural()? as usize),
                6 => Instruction::Jmp(r.offset_natural()? as usize),
                7 => Instruction::Emit(r.reg()?),
                8 => Instruction::EmitC(r.offset_natural()?),
                9 => Instruction::InBit(r.reg()?),
                10 => Instruction::Halt,
                _ => return None,
            })
        })()
        .ok_or(PackError::Malformed)?;
        out.push(ins);
    }
    Program::new("packed", MachineKind::Deterministic, out).map_err(|_| PackError::Malformed)
}

fn push_uint(out: &mut BitString, value: u64, width: usize) {
    out.extend_from(&BitString::from_uint(value, width));
}

fn push_natural(out: &mut BitString, value: u64) {
    out.extend_from(&code::encode_natural(value + 1).expect("value + 1 is positive"));
}

/// Packs a program's instructions (without the length prefix).
pub fn pack_program(program: &Program) -> Result<BitString, PackError> {
    let mut out = BitString::new();
    for ins in program.instructions() {
        let reg = |out: &mut BitString, r: Reg| push_uint(out, r.index() as u64, 3);
        match *ins {
            Instruction::Inc(r) => {
                push_uint(&mut out, 0, 4);
                reg(&mut out, r);
            }
            Instruction::Dec(r) => {
                push_uint(&mut out, 1, 4);
                reg(&mut out, r);
            }
            Instruction::Set(r, c) => {
                push_uint(&mut out, 2, 4);
                reg(&mut out, r);
                push_natural(&mut out, c);
            }
            Instruction::Add(a, b) => {
                push_uint(&mut out, 3, 4);
                reg(&mut out, a);
                reg(&mut out, b);
            }
            Instruction::Jz(r, t) => {
                push_uint(&mut out, 4, 4);
                reg(&mut out, r);
                push_natural(&mut out, t as u64);
            }
            Instruction::Jnz(r, t) => {
                push_uint(&mut out, 5, 4);
                reg(&mut out, r);
                push_natural(&mut out, t as u64);
            }
            Instruction::Jmp(t) => {
                push_uint(&mut out, 6, 4);
                push_natural(&mut out, t as u64);
            }
            Instruction::Emit(r) => {
                push_uint(&mut out, 7, 4);
                reg(&mut out, r);
            }
            Instruction::EmitC(c) => {
                push_uint(&mut out, 8, 4);
                push_natural(&mut out, c);
            }
            Instruction::InBit(r) => {
                push_uint(&mut out, 9, 4);
                reg(&mut out, r);
            }
            Instruction::Halt => push_uint(&mut out, 10, 4),
            Instruction::Rand(_) => return Err(PackError::RandNotEncodable),
        }
    }
    Ok(out)
}

/// Full input for the toy-universal machine: length prefix plus packed program.
pub fn encode_input(program: &Program) -> Result<BitString, PackError> {
    let body = pack_program(program)?;
    let mut out = code::encode_natural(body.len() as u64).map_err(|_| PackError::Malformed)?;
    out.extend_from(&body);
    Ok(out)
}

/// Splits an input into its interpreted program, if well formed.
pub fn decode_input(input: &BitString) -> Result<Program, PackError> {
    let bits = input.bits();
    let (len, used) = code::decode_natural(bits).map_err(|_| PackError::Malformed)?;
    let end = used
        .checked_add(usize::try_from(len).map_err(|_| PackError::Malformed)?)
        .ok_or(PackError::Malformed)?;
    let body = bits.get(used..end).ok_or(PackError::Malformed)?;
    unpack_program(body)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ToyUniversal;

impl AbstractMachine for ToyUniversal {
    fn name(&self) -> &str {
        TOY_UNIVERSAL_NAME
    }

    fn kind(&self) -> MachineKind {
        MachineKind::Deterministic
    }

    fn boot(&self, input: &BitString) -> Box<dyn Run> {
        Box::new(ToyRun {
            program: decode_input(input).ok().map(Arc::new),
            state: MachineState::with_input_len(0),
            loaded: false,
        })
    }
}

/// The first step loads the program (or halts on malformed input); each
/// later step is one interpreted instruction.
#[derive(Clone)]
struct ToyRun {
    program: Option<Arc<Program>>,
    state: MachineState,
    loaded: bool,
}

impl Run for ToyRun {
    fn step(&mut self, _supplied: Option<bool>) -> StepOutcome {
        if self.state.halted {
            return StepOutcome::Halted;
        }
        if !self.loaded {
            self.loaded = true;
            self.state.steps_used += 1;
            if self.program.is_none() {
                self.state.halted = true;
                return StepOutcome::Halted;
            }
            return StepOutcome::Continue;
        }
        let program = self.program.as_ref().expect("loaded program");
        step(&mut self.state, program, None)
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{parse_program, run_deterministic, run_machine};

    #[test]
    fn emitc_halt_layout() {
        let p = parse_program("EMITC 2\nHALT").unwrap();
        // EMITC = 1000, const 2 -> code(3) = 111101, HALT = 1010
        assert_eq!(pack_program(&p).unwrap().to_string(), "10001111011010");
        let input = encode_input(&p).unwrap();
        // length 14 = 1110 -> 11111100 01
        assert_eq!(input.to_string(), "1111110001".to_owned() + "10001111011010");
        let r = run_machine(&ToyUniversal, &input, 100);
        assert!(r.halted);
        assert_eq!(r.emitted, Vertex::from_elements([2]));
        assert_eq!(r.steps_used, 3);
    }

    #[test]
    fn malformed_inputs_halt_empty() {
        for s in ["", "0", "1101", "11010000", "1101101111"] {
            let r = run_machine(&ToyUniversal, &s.parse().unwrap(), 10);
            assert!(r.halted, "{s}");
            assert!(r.emitted.is_empty());
            assert_eq!(r.steps_used, 1);
        }
    }

    #[test]
    fn trailing_bits_are_ignored() {
        let p = parse_program("EMITC 0").unwrap();
        let mut input = encode_input(&p).unwrap();
        let r0 = run_machine(&ToyUniversal, &input, 50);
        input.extend_from(&"0110".parse().unwrap());
        assert_eq!(run_machine(&ToyUniversal, &input, 50), r0);
        assert_eq!(r0.emitted, Vertex::from_elements([0]));
    }

    #[test]
    fn interprets_like_the_direct_interpreter() {
        let src = "SET R1 3\n@l: EMIT R1\nDEC R1\nJNZ R1 @l\nINBIT R2\nEMIT R2\nHALT";
        let p = parse_program(src).unwrap();
        let direct = run_deterministic(&p, &BitString::new(), 1000);
        let input = encode_input(&p).unwrap();
        let packed = run_machine(&ToyUniversal, &input, 1000);
        assert_eq!(packed.emitted, direct.emitted);
        assert_eq!(packed.steps_used, direct.steps_used + 1);
        assert_eq!(decode_input(&input).unwrap().instructions(), p.instructions());
    }

    #[test]
    fn out_of_range_jump_is_malformed() {
        // JMP to index 5 in a one-instruction program
        let mut body = BitString::new();
        push_uint(&mut body, 6, 4);
        push_natural(&mut body, 5);
        assert_eq!(unpack_program(body.bits()), Err(PackError::Malformed));
    }
}
