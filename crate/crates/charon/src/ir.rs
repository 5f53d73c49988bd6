//! CharonIR: a linear, RISC-V-flavored IR with unbounded virtual registers.
//!
//! Text format: a `.data` section with one `base len` pair per line, then a
//! `.text` section with one instruction per line and `label:` lines of their
//! own. Registers print as `r<N>` plus the named `zero`, `arg`, `ret`,
//! `addr`; immediates are decimal (floats carry a dot or exponent).
//!
//! `JZ r imm` semantics (the single authority both the compiler and the VM
//! follow): when `value(r) == 0`, `pc := pc + 1 + imm`, else `pc := pc + 1`.
//! `JR r` sets `pc := value(r)`; `JAL label` jumps to the label.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::frontend::printer::format_f32;

#[derive(Debug, Error)]
pub enum IrParseError {
    #[error("IR parse error at line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("invalid IR: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reg {
    Zero,
    Arg,
    Ret,
    Addr,
    Temp(u32),
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reg::Zero => write!(f, "zero"),
            Reg::Arg => write!(f, "arg"),
            Reg::Ret => write!(f, "ret"),
            Reg::Addr => write!(f, "addr"),
            Reg::Temp(n) => write!(f, "r{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Imm {
    Int(i32),
    Float(f32),
}

impl fmt::Display for Imm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Imm::Int(v) => write!(f, "{v}"),
            Imm::Float(v) => write!(f, "{}", format_f32(*v)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Opcode {
    Add,
    Sub,
    Mult,
    Div,
    Mod,
    Eq,
    Neq,
    Lt,
    Gt,
    And,
    Or,
    BitAnd,
    BitOr,
    LShift,
    RShift,
    Not,
    Constant,
    Load,
    Store,
    Mov,
    FpToSi,
    SignExt,
    SiToFp,
    Trunc,
    Jal,
    Jr,
    Jz,
    Halt,
    AddF,
    SubF,
    MultF,
    DivF,
    ModF,
    EqF,
    NeqF,
    LtF,
    GtF,
    NotF,
    LoadF,
    StoreF,
}

impl Opcode {
    pub fn name(self) -> &'static str {
        use Opcode::*;
        match self {
            Add => "ADD",
            Sub => "SUB",
            Mult => "MULT",
            Div => "DIV",
            Mod => "MOD",
            Eq => "EQ",
            Neq => "NEQ",
            Lt => "LT",
            Gt => "GT",
            And => "AND",
            Or => "OR",
            BitAnd => "BITAND",
            BitOr => "BITOR",
            LShift => "LSHIFT",
            RShift => "RSHIFT",
            Not => "NOT",
            Constant => "CONSTANT",
            Load => "LOAD",
            Store => "STORE",
            Mov => "MOV",
            FpToSi => "FPTOSI",
            SignExt => "SIGNEXT",
            SiToFp => "SITOFP",
            Trunc => "TRUNC",
            Jal => "JAL",
            Jr => "JR",
            Jz => "JZ",
            Halt => "HALT",
            AddF => "ADDF",
            SubF => "SUBF",
            MultF => "MULTF",
            DivF => "DIVF",
            ModF => "MODF",
            EqF => "EQF",
            NeqF => "NEQF",
            LtF => "LTF",
            GtF => "GTF",
            NotF => "NOTF",
            LoadF => "LOADF",
            StoreF => "STOREF",
        }
    }

    fn from_name(name: &str) -> Option<Opcode> {
        use Opcode::*;
        match name {
            "ADD" => Some(Add),
            "SUB" => Some(Sub),
            "MULT" => Some(Mult),
            "DIV" => Some(Div),
            "MOD" => Some(Mod),
            "EQ" => Some(Eq),
            "NEQ" => Some(Neq),
            "LT" => Some(Lt),
            "GT" => Some(Gt),
            "AND" => Some(And),
            "OR" => Some(Or),
            "BITAND" => Some(BitAnd),
            "BITOR" => Some(BitOr),
            "LSHIFT" => Some(LShift),
            "RSHIFT" => Some(RShift),
            "NOT" => Some(Not),
            "CONSTANT" => Some(Constant),
            "LOAD" => Some(Load),
            "STORE" => Some(Store),
            "MOV" => Some(Mov),
            "FPTOSI" => Some(FpToSi),
            "SIGNEXT" => Some(SignExt),
            "SITOFP" => Some(SiToFp),
            "TRUNC" => Some(Trunc),
            "JAL" => Some(Jal),
            "JR" => Some(Jr),
            "JZ" => Some(Jz),
            "HALT" => Some(Halt),
            "ADDF" => Some(AddF),
            "SUBF" => Some(SubF),
            "MULTF" => Some(MultF),
            "DIVF" => Some(DivF),
            "MODF" => Some(ModF),
            "EQF" => Some(EqF),
            "NEQF" => Some(NeqF),
            "LTF" => Some(LtF),
            "GTF" => Some(GtF),
            "NOTF" => Some(NotF),
            "LOADF" => Some(LoadF),
            "STOREF" => Some(StoreF),
            _ => None,
        }
    }

    /// True for the two-source arithmetic/comparison/logical forms.
    pub fn is_binop(self) -> bool {
        use Opcode::*;
        matches!(
            self,
            Add | Sub
                | Mult
                | Div
                | Mod
                | Eq
                | Neq
                | Lt
                | Gt
                | And
                | Or
                | BitAnd
                | BitOr
                | LShift
                | RShift
                | AddF
                | SubF
                | MultF
                | DivF
                | ModF
                | EqF
                | NeqF
                | LtF
                | GtF
        )
    }

    pub fn is_cast(self) -> bool {
        matches!(
            self,
            Opcode::FpToSi | Opcode::SignExt | Opcode::SiToFp | Opcode::Trunc
        )
    }

    /// Operand shape: (registers, has_imm, has_label).
    fn arity(self) -> (usize, bool, bool) {
        use Opcode::*;
        match self {
            Halt => (0, false, false),
            Jal => (0, false, true),
            Jr => (1, false, false),
            Jz => (1, true, false),
            Constant => (1, true, false),
            Not | NotF | Load | LoadF | Store | StoreF | Mov | FpToSi | SignExt | SiToFp
            | Trunc => (2, false, false),
            _ => (3, false, false),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Reg(Reg),
    Imm(Imm),
    Label(String),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Reg(r) => write!(f, "{r}"),
            Operand::Imm(i) => write!(f, "{i}"),
            Operand::Label(l) => write!(f, "{l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instr {
    pub opcode: Opcode,
    pub operands: Vec<Operand>,
}

impl Instr {
    pub fn new(opcode: Opcode, operands: Vec<Operand>) -> Instr {
        Instr { opcode, operands }
    }

    pub fn reg(&self, idx: usize) -> Option<Reg> {
        match self.operands.get(idx) {
            Some(Operand::Reg(r)) => Some(*r),
            _ => None,
        }
    }

    pub fn imm(&self, idx: usize) -> Option<Imm> {
        match self.operands.get(idx) {
            Some(Operand::Imm(i)) => Some(*i),
            _ => None,
        }
    }

    pub fn int_imm(&self, idx: usize) -> Option<i32> {
        match self.imm(idx) {
            Some(Imm::Int(v)) => Some(v),
            _ => None,
        }
    }

    pub fn label(&self, idx: usize) -> Option<&str> {
        match self.operands.get(idx) {
            Some(Operand::Label(l)) => Some(l),
            _ => None,
        }
    }

    /// Destination register, when the opcode writes one.
    pub fn dest(&self) -> Option<Reg> {
        use Opcode::*;
        match self.opcode {
            Halt | Jal | Jr | Jz | Store | StoreF => None,
            _ => self.reg(0),
        }
    }

    /// Source registers read by this instruction.
    pub fn sources(&self) -> Vec<Reg> {
        use Opcode::*;
        match self.opcode {
            Halt | Jal | Constant => vec![],
            Jr | Jz => vec![self.reg(0).unwrap()],
            Store | StoreF => vec![self.reg(0).unwrap(), self.reg(1).unwrap()],
            Mov | Not | NotF | Load | LoadF | FpToSi | SignExt | SiToFp | Trunc => {
                vec![self.reg(1).unwrap()]
            }
            _ => vec![self.reg(1).unwrap(), self.reg(2).unwrap()],
        }
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.opcode.name())?;
        for op in &self.operands {
            write!(f, " {op}")?;
        }
        Ok(())
    }
}

/// One variable's storage: base byte address and length in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DataEntry {
    pub base: u32,
    pub len: u32,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IrProgram {
    pub data: Vec<DataEntry>,
    pub instrs: Vec<Instr>,
    /// Labels in definition order; the order determines function primes.
    pub labels: Vec<(String, usize)>,
}

impl IrProgram {
    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels
            .iter()
            .find(|(l, _)| l == name)
            .map(|(_, i)| *i)
    }

    pub fn label_map(&self) -> HashMap<&str, usize> {
        self.labels.iter().map(|(l, i)| (l.as_str(), *i)).collect()
    }

    /// Total data-section size in bytes; entries are contiguous from 0.
    pub fn data_size(&self) -> u32 {
        self.data.last().map(|e| e.base + e.len).unwrap_or(0)
    }

    /// Structural sanity: entry layout, label targets, and jump ranges.
    pub fn check(&self) -> Result<(), IrParseError> {
        let mut expected_base = 0;
        for e in &self.data {
            if e.base != expected_base {
                return Err(IrParseError::Invalid(format!(
                    "data entry at base {} expected {}",
                    e.base, expected_base
                )));
            }
            if e.len == 0 {
                return Err(IrParseError::Invalid("zero-length data entry".into()));
            }
            expected_base = e.base + e.len;
        }
        let len = self.instrs.len() as i64;
        for (idx, instr) in self.instrs.iter().enumerate() {
            match instr.opcode {
                Opcode::Jal => {
                    let target = instr.label(0).unwrap_or("");
                    if self.label_index(target).is_none() {
                        return Err(IrParseError::Invalid(format!(
                            "JAL target {target} is not a label"
                        )));
                    }
                }
                Opcode::Jz => {
                    let imm = instr.int_imm(1).unwrap_or(0) as i64;
                    let dest = idx as i64 + 1 + imm;
                    if dest < 0 || dest > len {
                        return Err(IrParseError::Invalid(format!(
                            "JZ at {idx} jumps to {dest}, outside [0, {len}]"
                        )));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Deterministic text form; `parse_ir(serialize(p)) == p`.
pub fn serialize(program: &IrProgram) -> String {
    let mut out = String::from(".data\n");
    for e in &program.data {
        out.push_str(&format!("{} {}\n", e.base, e.len));
    }
    out.push_str(".text\n");
    let mut next_label = 0;
    for (idx, instr) in program.instrs.iter().enumerate() {
        while next_label < program.labels.len() && program.labels[next_label].1 == idx {
            out.push_str(&format!("{}:\n", program.labels[next_label].0));
            next_label += 1;
        }
        out.push_str(&format!("{instr}\n"));
    }
    while next_label < program.labels.len() {
        out.push_str(&format!("{}:\n", program.labels[next_label].0));
        next_label += 1;
    }
    out
}

/// Parse the text form back into a program.
pub fn parse_ir(text: &str) -> Result<IrProgram, IrParseError> {
    let mut program = IrProgram::default();
    let mut section = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        let err = |message: String| IrParseError::Line {
            line: lineno,
            message,
        };
        if line.is_empty() {
            continue;
        }
        match line {
            ".data" => {
                section = Some("data");
                continue;
            }
            ".text" => {
                section = Some("text");
                continue;
            }
            _ => {}
        }
        match section {
            Some("data") => {
                let parts: Vec<_> = line.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(err(format!("expected 'base len', got {line:?}")));
                }
                let base = parts[0]
                    .parse()
                    .map_err(|_| err(format!("bad base address {:?}", parts[0])))?;
                let len = parts[1]
                    .parse()
                    .map_err(|_| err(format!("bad length {:?}", parts[1])))?;
                program.data.push(DataEntry { base, len });
            }
            Some("text") => {
                if let Some(label) = line.strip_suffix(':') {
                    if label.is_empty() || label.contains(char::is_whitespace) {
                        return Err(err(format!("bad label {line:?}")));
                    }
                    program.labels.push((label.to_string(), program.instrs.len()));
                    continue;
                }
                program.instrs.push(parse_instr(line, lineno)?);
            }
            _ => return Err(err("content before .data/.text section".into())),
        }
    }
    program.check()?;
    Ok(program)
}

fn parse_instr(line: &str, lineno: usize) -> Result<Instr, IrParseError> {
    let err = |message: String| IrParseError::Line {
        line: lineno,
        message,
    };
    let mut parts = line.split_whitespace();
    let name = parts.next().unwrap();
    let opcode =
        Opcode::from_name(name).ok_or_else(|| err(format!("unknown opcode {name:?}")))?;
    let args: Vec<&str> = parts.collect();
    let (nregs, has_imm, has_label) = opcode.arity();
    let expected = nregs + usize::from(has_imm) + usize::from(has_label);
    if args.len() != expected {
        return Err(err(format!(
            "{name} takes {expected} operand(s), got {}",
            args.len()
        )));
    }
    let mut operands = Vec::new();
    for (i, arg) in args.iter().enumerate() {
        if i < nregs {
            operands.push(Operand::Reg(parse_reg(arg).ok_or_else(|| {
                err(format!("bad register {arg:?}"))
            })?));
        } else if has_imm {
            operands.push(Operand::Imm(parse_imm(arg).ok_or_else(|| {
                err(format!("bad immediate {arg:?}"))
            })?));
        } else {
            operands.push(Operand::Label(arg.to_string()));
        }
    }
    Ok(Instr::new(opcode, operands))
}

fn parse_reg(text: &str) -> Option<Reg> {
    match text {
        "zero" => Some(Reg::Zero),
        "arg" => Some(Reg::Arg),
        "ret" => Some(Reg::Ret),
        "addr" => Some(Reg::Addr),
        _ => text
            .strip_prefix('r')
            .and_then(|n| n.parse().ok())
            .map(Reg::Temp),
    }
}

fn parse_imm(text: &str) -> Option<Imm> {
    if text.contains('.') || text.contains(['e', 'E']) {
        let v: f32 = text.parse().ok()?;
        if !v.is_finite() {
            return None;
        }
        Some(Imm::Float(v))
    } else {
        text.parse().ok().map(Imm::Int)
    }
}
