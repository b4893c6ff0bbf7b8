use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub const REGISTER_COUNT: usize = 8;

/// Register index in `0..8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Reg(u8);

impl Reg {
    pub fn new(index: u8) -> Option<Reg> {
        ((index as usize) < REGISTER_COUNT).then_some(Reg(index))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MachineKind {
    Deterministic,
    Probabilistic,
}

impl fmt::Display for MachineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MachineKind::Deterministic => "deterministic",
            MachineKind::Probabilistic => "probabilistic",
        })
    }
}

/// One counter-machine instruction. Jump targets are instruction indices;
/// a target equal to the program length means "fall off the end", which halts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instruction {
    Inc(Reg),
    /// Decrement, flooring at zero.
    Dec(Reg),
    Set(Reg, u64),
    /// `dst += src`
    Add(Reg, Reg),
    Jz(Reg, usize),
    Jnz(Reg, usize),
    Jmp(usize),
    /// Emit the value held in a register.
    Emit(Reg),
    /// Emit a constant.
    EmitC(u64),
    Rand(Reg),
    /// Read the next input bit; writes 2 once the input is exhausted.
    InBit(Reg),
    Halt,
}

impl Instruction {
    pub fn mnemonic(&self) -> &'static str {
        match self {
            Instruction::Inc(_) => "INC",
            Instruction::Dec(_) => "DEC",
            Instruction::Set(..) => "SET",
            Instruction::Add(..) => "ADD",
            Instruction::Jz(..) => "JZ",
            Instruction::Jnz(..) => "JNZ",
            Instruction::Jmp(_) => "JMP",
            Instruction::Emit(_) => "EMIT",
            Instruction::EmitC(_) => "EMITC",
            Instruction::Rand(_) => "RAND",
            Instruction::InBit(_) => "INBIT",
            Instruction::Halt => "HALT",
        }
    }

    fn jump_target(&self) -> Option<usize> {
        match *self {
            Instruction::Jz(_, t) | Instruction::Jnz(_, t) | Instruction::Jmp(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    name: String,
    kind: MachineKind,
    instructions: Vec<Instruction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unresolved label @{label}")]
    UnresolvedLabel { line: usize, label: String },
    #[error("line {line}: label @{label} defined twice")]
    DuplicateLabel { line: usize, label: String },
    #[error("{mnemonic} is not allowed in a {kind} program")]
    KindViolation {
        mnemonic: &'static str,
        kind: MachineKind,
    },
    #[error("program has no instructions")]
    Empty,
    #[error("jump target {target} out of range for {len} instructions")]
    BadJump { target: usize, len: usize },
}

impl Program {
    /// Builds a program from already-resolved instructions, checking the
    /// same invariants as the text parser.
    pub fn new(
        name: impl Into<String>,
        kind: MachineKind,
        instructions: Vec<Instruction>,
    ) -> Result<Program, ProgramError> {
        if instructions.is_empty() {
            return Err(ProgramError::Empty);
        }
        let len = instructions.len();
        for ins in &instructions {
            if let Some(target) = ins.jump_target() {
                if target > len {
                    return Err(ProgramError::BadJump { target, len });
                }
            }
            match (ins, kind) {
                (Instruction::Rand(_), MachineKind::Deterministic)
                | (Instruction::InBit(_), MachineKind::Probabilistic) => {
                    return Err(ProgramError::KindViolation {
                        mnemonic: ins.mnemonic(),
                        kind,
                    })
                }
                _ => {}
            }
        }
        Ok(Program {
            name: name.into(),
            kind,
            instructions,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> MachineKind {
        self.kind
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }
}

/// Writes the program back as assembly with numeric labels `@L<index>`.
impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut targets: Vec<usize> = self
            .instructions
            .iter()
            .filter_map(Instruction::jump_target)
            .collect();
        targets.sort_unstable();
        targets.dedup();
        writeln!(f, "KIND {}", self.kind)?;
        for (i, ins) in self.instructions.iter().enumerate() {
            if targets.binary_search(&i).is_ok() {
                write!(f, "@L{i}: ")?;
            }
            match *ins {
                Instruction::Inc(r)
                | Instruction::Dec(r)
                | Instruction::Emit(r)
                | Instruction::Rand(r)
                | Instruction::InBit(r) => writeln!(f, "{} {r}", ins.mnemonic())?,
                Instruction::Set(r, c) => writeln!(f, "SET {r} {c}")?,
                Instruction::Add(a, b) => writeln!(f, "ADD {a} {b}")?,
                Instruction::Jz(r, t) | Instruction::Jnz(r, t) => {
                    writeln!(f, "{} {r} @L{t}", ins.mnemonic())?
                }
                Instruction::Jmp(t) => writeln!(f, "JMP @L{t}")?,
                Instruction::EmitC(c) => writeln!(f, "EMITC {c}")?,
                Instruction::Halt => writeln!(f, "HALT")?,
            }
        }
        if targets.last() == Some(&self.instructions.len()) {
            writeln!(f, "@L{}:", self.instructions.len())?;
        }
        Ok(())
    }
}

enum Operand {
    Reg,
    Const,
    Label,
}

fn arity(mnemonic: &str) -> Option<&'static [Operand]> {
    use Operand::*;
    Some(match mnemonic {
        "INC" | "DEC" | "EMIT" | "RAND" | "INBIT" => &[Reg],
        "SET" => &[Reg, Const],
        "ADD" => &[Reg, Reg],
        "JZ" | "JNZ" => &[Reg, Label],
        "JMP" => &[Label],
        "EMITC" => &[Const],
        "HALT" => &[],
        _ => return None,
    })
}

fn parse_reg(tok: &str, line: usize) -> Result<Reg, ProgramError> {
    tok.strip_prefix('R')
        .or_else(|| tok.strip_prefix('r'))
        .and_then(|d| d.parse::<u8>().ok())
        .and_then(Reg::new)
        .ok_or_else(|| ProgramError::Syntax {
            line,
            message: format!("bad register {tok:?}"),
        })
}

fn parse_label_name(tok: &str) -> Option<&str> {
    let name = tok.strip_prefix('@')?;
    let ok = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    ok.then_some(name)
}

/// Parses assembly text into a program named `program`.
pub fn parse_program(text: &str) -> Result<Program, ProgramError> {
    parse_named_program("program", text)
}

/// Parses assembly text.
///
/// One instruction per line; `#` starts a comment; `@name:` defines a label
/// for the instruction that follows it (on the same line or a later one).
/// An optional `KIND deterministic|probabilistic` line fixes the kind,
/// otherwise it is inferred from the presence of `RAND`.
pub fn parse_named_program(name: &str, text: &str) -> Result<Program, ProgramError> {
    struct Pending<'a> {
        line: usize,
        mnemonic: &'a str,
        operands: Vec<&'a str>,
    }

    let mut declared: Option<MachineKind> = None;
    let mut labels: HashMap<&str, usize> = HashMap::new();
    let mut pending: Vec<Pending> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut rest = raw.split('#').next().unwrap_or("").trim();
        while let Some(colon) = rest.find(':') {
            let head = rest[..colon].trim();
            let Some(label) = parse_label_name(head) else {
                return Err(ProgramError::Syntax {
                    line,
                    message: format!("bad label definition {head:?}"),
                });
            };
            if labels.insert(label, pending.len()).is_some() {
                return Err(ProgramError::DuplicateLabel {
                    line,
                    label: label.to_string(),
                });
            }
            rest = rest[colon + 1..].trim();
        }
        if rest.is_empty() {
            continue;
        }
        let mut toks = rest.split_whitespace();
        let mnemonic = toks.next().unwrap_or_default();
        let operands: Vec<&str> = toks.collect();
        if mnemonic.eq_ignore_ascii_case("KIND") {
            declared = Some(match operands.as_slice() {
                ["deterministic"] => MachineKind::Deterministic,
                ["probabilistic"] => MachineKind::Probabilistic,
                _ => {
                    return Err(ProgramError::Syntax {
                        line,
                        message: "KIND expects deterministic or probabilistic".into(),
                    })
                }
            });
            continue;
        }
        pending.push(Pending {
            line,
            mnemonic,
            operands,
        });
    }

    let mut instructions = Vec::with_capacity(pending.len());
    for p in &pending {
        let upper = p.mnemonic.to_ascii_uppercase();
        let Some(shape) = arity(&upper) else {
            return Err(ProgramError::Syntax {
                line: p.line,
                message: format!("unknown mnemonic {:?}", p.mnemonic),
            });
        };
        if shape.len() != p.operands.len() {
            return Err(ProgramError::Syntax {
                line: p.line,
                message: format!("{upper} takes {} operand(s)", shape.len()),
            });
        }
        let mut regs = Vec::new();
        let mut konst = 0u64;
        let mut target = 0usize;
        for (kind, tok) in shape.iter().zip(&p.operands) {
            match kind {
                Operand::Reg => regs.push(parse_reg(tok, p.line)?),
                Operand::Const => {
                    konst = tok.parse().map_err(|_| ProgramError::Syntax {
                        line: p.line,
                        message: format!("bad constant {tok:?}"),
                    })?
                }
                Operand::Label => {
                    let Some(name) = parse_label_name(tok) else {
                        return Err(ProgramError::Syntax {
                            line: p.line,
                            message: format!("bad label reference {tok:?}"),
                        });
                    };
                    target = *labels.get(name).ok_or_else(|| ProgramError::UnresolvedLabel {
                        line: p.line,
                        label: name.to_string(),
                    })?;
                }
            }
        }
        instructions.push(match upper.as_str() {
            "INC" => Instruction::Inc(regs[0]),
            "DEC" => Instruction::Dec(regs[0]),
            "SET" => Instruction::Set(regs[0], konst),
            "ADD" => Instruction::Add(regs[0], regs[1]),
            "JZ" => Instruction::Jz(regs[0], target),
            "JNZ" => Instruction::Jnz(regs[0], target),
            "JMP" => Instruction::Jmp(target),
            "EMIT" => Instruction::Emit(regs[0]),
            "EMITC" => Instruction::EmitC(konst),
            "RAND" => Instruction::Rand(regs[0]),
            "INBIT" => Instruction::InBit(regs[0]),
            _ => Instruction::Halt,
        });
    }

    let uses_rand = instructions
        .iter()
        .any(|i| matches!(i, Instruction::Rand(_)));
    let kind = declared.unwrap_or(if uses_rand {
        MachineKind::Probabilistic
    } else {
        MachineKind::Deterministic
    });
    Program::new(name, kind, instructions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_program() {
        let p = parse_program("HALT").unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.kind(), MachineKind::Deterministic);
    }

    #[test]
    fn coin_program_with_labels() {
        let p = parse_program("RAND R0\nJZ R0 @a\nEMITC 2\nHALT\n@a: EMITC 1\nHALT").unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(p.kind(), MachineKind::Probabilistic);
        assert_eq!(p.instructions()[1], Instruction::Jz(Reg(0), 4));
    }

    #[test]
    fn label_on_its_own_line_and_comments() {
        let p = parse_program("# loop\n@top:\n  EMITC 1 # one\n  JMP @top\n").unwrap();
        assert_eq!(p.instructions(), &[Instruction::EmitC(1), Instruction::Jmp(0)]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            parse_program("FOO R0"),
            Err(ProgramError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_program("INC R8"),
            Err(ProgramError::Syntax { .. })
        ));
        assert!(matches!(
            parse_program("JMP @nowhere"),
            Err(ProgramError::UnresolvedLabel { .. })
        ));
        assert!(matches!(
            parse_program("KIND deterministic\nRAND R0\nHALT"),
            Err(ProgramError::KindViolation { mnemonic: "RAND", .. })
        ));
        assert!(matches!(
            parse_program("RAND R0\nINBIT R1"),
            Err(ProgramError::KindViolation { mnemonic: "INBIT", .. })
        ));
        assert_eq!(parse_program("# nothing\n"), Err(ProgramError::Empty));
        assert!(matches!(
            parse_program("@a: HALT\n@a: HALT"),
            Err(ProgramError::DuplicateLabel { .. })
        ));
    }

    #[test]
    fn display_reparses_to_same_program() {
        let src = "KIND probabilistic\n@a: RAND R1\nJNZ R1 @end\nSET R2 7\nADD R2 R1\nEMIT R2\nDEC R2\nJMP @a\n@end:";
        let p = parse_program(src).unwrap();
        let again = parse_program(&p.to_string()).unwrap();
        assert_eq!(p.instructions(), again.instructions());
        assert_eq!(again.kind(), MachineKind::Probabilistic);
    }
}
