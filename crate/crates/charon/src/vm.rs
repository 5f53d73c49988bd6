//! A small interpreter for CharonIR, used to validate compiler output and
//! canonical-form semantic equivalence on concrete inputs.
//!
//! Registers are dynamically typed 32-bit cells (int or float, per last
//! write); memory is a byte array sized by the data section. Loads and
//! stores are bounded by the data entry that owns the address, so 2-byte
//! short slots never clobber their neighbors. Integer arithmetic wraps
//! modulo 2^32; MOD uses C-style truncated remainder.

use std::collections::HashMap;

use thiserror::Error;

use crate::ir::{Imm, IrProgram, Opcode, Reg};

#[derive(Debug, Error)]
pub enum VmError {
    #[error("program has no main label")]
    NoMain,
    #[error("program does not end with HALT")]
    NoHalt,
    #[error("step budget of {0} exhausted")]
    StepBudget(u64),
    #[error("memory access at {addr} outside the data section")]
    OutOfBounds { addr: i64 },
    #[error("division by zero at instruction {0}")]
    DivisionByZero(usize),
    #[error("jump to {target} outside the program at instruction {from}")]
    BadJump { from: usize, target: i64 },
    #[error("type mismatch at instruction {index}: {message}")]
    TypeMismatch { index: usize, message: String },
    #[error("read of undefined register {0:?}")]
    UndefinedRegister(Reg),
}

/// A 32-bit register value; the tag follows the last write.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Int(i32),
    Float(f32),
}

impl Value {
    pub fn is_zero(self) -> bool {
        match self {
            Value::Int(v) => v == 0,
            Value::Float(f) => f == 0.0,
        }
    }

    /// Bit-identical comparison; distinguishes value kinds.
    pub fn same_bits(self, other: Value) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Float(a), Value::Float(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

#[derive(Debug)]
pub struct MachineState {
    pub pc: usize,
    pub registers: HashMap<Reg, Value>,
    pub memory: Vec<u8>,
    pub halted: bool,
    pub steps: u64,
}

pub struct RunResult {
    pub return_value: Value,
    pub memory: Vec<u8>,
    pub steps: u64,
}

/// Execute a program from its `main` label. `arg` lands in the argument
/// register; the return-address register starts at the final HALT so that
/// main's `JR` terminates the machine.
pub fn run(program: &IrProgram, arg: Option<i32>, step_budget: u64) -> Result<RunResult, VmError> {
    let entry = program.label_index("main").ok_or(VmError::NoMain)?;
    let halt_index = program.instrs.len().checked_sub(1).ok_or(VmError::NoHalt)?;
    if program.instrs[halt_index].opcode != Opcode::Halt {
        return Err(VmError::NoHalt);
    }
    let mut state = MachineState {
        pc: entry,
        registers: HashMap::new(),
        memory: vec![0; program.data_size() as usize],
        halted: false,
        steps: 0,
    };
    state.registers.insert(Reg::Zero, Value::Int(0));
    state.registers.insert(Reg::Arg, Value::Int(arg.unwrap_or(0)));
    state
        .registers
        .insert(Reg::Addr, Value::Int(halt_index as i32));

    while !state.halted {
        if state.steps >= step_budget {
            return Err(VmError::StepBudget(step_budget));
        }
        state.steps += 1;
        step(program, &mut state)?;
    }
    let return_value = state
        .registers
        .get(&Reg::Ret)
        .copied()
        .unwrap_or(Value::Int(0));
    Ok(RunResult {
        return_value,
        memory: state.memory,
        steps: state.steps,
    })
}

fn step(program: &IrProgram, state: &mut MachineState) -> Result<(), VmError> {
    let index = state.pc;
    let instr = &program.instrs[index];
    let mut next_pc = index + 1;
    match instr.opcode {
        Opcode::Halt => {
            state.halted = true;
            return Ok(());
        }
        Opcode::Constant => {
            let value = match instr.imm(1).unwrap() {
                Imm::Int(v) => Value::Int(v),
                Imm::Float(f) => Value::Float(f),
            };
            write_reg(state, instr.reg(0).unwrap(), value);
        }
        Opcode::Mov => {
            let v = read_reg(state, instr.reg(1).unwrap())?;
            write_reg(state, instr.reg(0).unwrap(), v);
        }
        Opcode::Load | Opcode::LoadF => {
            let addr = int_of(read_reg(state, instr.reg(1).unwrap())?, index, "address")?;
            let (bytes, width) = read_slot(program, state, addr as i64)?;
            let value = if instr.opcode == Opcode::LoadF {
                if width < 4 {
                    return Err(VmError::TypeMismatch {
                        index,
                        message: format!("LOADF from a {width}-byte slot"),
                    });
                }
                Value::Float(f32::from_bits(u32::from_le_bytes(bytes)))
            } else if width == 2 {
                Value::Int(i16::from_le_bytes([bytes[0], bytes[1]]) as i32)
            } else {
                Value::Int(i32::from_le_bytes(bytes))
            };
            write_reg(state, instr.reg(0).unwrap(), value);
        }
        Opcode::Store | Opcode::StoreF => {
            let addr = int_of(read_reg(state, instr.reg(0).unwrap())?, index, "address")?;
            let value = read_reg(state, instr.reg(1).unwrap())?;
            let bits = match (instr.opcode, value) {
                (Opcode::StoreF, Value::Float(f)) => f.to_bits(),
                (Opcode::StoreF, Value::Int(_)) => {
                    return Err(VmError::TypeMismatch {
                        index,
                        message: "STOREF of an integer value".into(),
                    })
                }
                (_, Value::Int(v)) => v as u32,
                (_, Value::Float(f)) => f.to_bits(),
            };
            write_slot(program, state, addr as i64, bits)?;
        }
        Opcode::Jal => {
            let target =
                program
                    .label_index(instr.label(0).unwrap())
                    .ok_or(VmError::BadJump {
                        from: index,
                        target: -1,
                    })?;
            next_pc = target;
        }
        Opcode::Jr => {
            let target = int_of(read_reg(state, instr.reg(0).unwrap())?, index, "jump target")?;
            next_pc = check_jump(program, index, target as i64)?;
        }
        Opcode::Jz => {
            let v = read_reg(state, instr.reg(0).unwrap())?;
            if v.is_zero() {
                let imm = instr.int_imm(1).unwrap() as i64;
                next_pc = check_jump(program, index, index as i64 + 1 + imm)?;
            }
        }
        Opcode::Trunc | Opcode::SignExt => {
            let v = int_of(read_reg(state, instr.reg(1).unwrap())?, index, "cast input")?;
            write_reg(state, instr.reg(0).unwrap(), Value::Int(v as i16 as i32));
        }
        Opcode::SiToFp => {
            let v = int_of(read_reg(state, instr.reg(1).unwrap())?, index, "cast input")?;
            write_reg(state, instr.reg(0).unwrap(), Value::Float(v as f32));
        }
        Opcode::FpToSi => {
            let f = float_of(read_reg(state, instr.reg(1).unwrap())?, index)?;
            write_reg(state, instr.reg(0).unwrap(), Value::Int(f as i32));
        }
        Opcode::Not => {
            let v = int_of(read_reg(state, instr.reg(1).unwrap())?, index, "operand")?;
            write_reg(
                state,
                instr.reg(0).unwrap(),
                Value::Int(if v == 0 { 1 } else { 0 }),
            );
        }
        Opcode::NotF => {
            let f = float_of(read_reg(state, instr.reg(1).unwrap())?, index)?;
            write_reg(
                state,
                instr.reg(0).unwrap(),
                Value::Int(if f == 0.0 { 1 } else { 0 }),
            );
        }
        op if op.is_binop() => {
            let a = read_reg(state, instr.reg(1).unwrap())?;
            let b = read_reg(state, instr.reg(2).unwrap())?;
            let result = binop(op, a, b, index)?;
            write_reg(state, instr.reg(0).unwrap(), result);
        }
        other => {
            return Err(VmError::TypeMismatch {
                index,
                message: format!("unexpected opcode {}", other.name()),
            })
        }
    }
    if next_pc >= program.instrs.len() {
        return Err(VmError::BadJump {
            from: index,
            target: next_pc as i64,
        });
    }
    state.pc = next_pc;
    Ok(())
}

fn binop(op: Opcode, a: Value, b: Value, index: usize) -> Result<Value, VmError> {
    use Opcode::*;
    let ints = || -> Result<(i32, i32), VmError> {
        match (a, b) {
            (Value::Int(x), Value::Int(y)) => Ok((x, y)),
            _ => Err(VmError::TypeMismatch {
                index,
                message: format!("{} needs integer operands", op.name()),
            }),
        }
    };
    let floats = || -> Result<(f32, f32), VmError> {
        match (a, b) {
            (Value::Float(x), Value::Float(y)) => Ok((x, y)),
            _ => Err(VmError::TypeMismatch {
                index,
                message: format!("{} needs float operands", op.name()),
            }),
        }
    };
    let bool_int = |c: bool| Value::Int(if c { 1 } else { 0 });
    Ok(match op {
        Add => {
            let (x, y) = ints()?;
            Value::Int(x.wrapping_add(y))
        }
        Sub => {
            let (x, y) = ints()?;
            Value::Int(x.wrapping_sub(y))
        }
        Mult => {
            let (x, y) = ints()?;
            Value::Int(x.wrapping_mul(y))
        }
        Div => {
            let (x, y) = ints()?;
            if y == 0 {
                return Err(VmError::DivisionByZero(index));
            }
            Value::Int(x.wrapping_div(y))
        }
        Mod => {
            let (x, y) = ints()?;
            if y == 0 {
                return Err(VmError::DivisionByZero(index));
            }
            Value::Int(x.wrapping_rem(y))
        }
        Eq => {
            let (x, y) = ints()?;
            bool_int(x == y)
        }
        Neq => {
            let (x, y) = ints()?;
            bool_int(x != y)
        }
        Lt => {
            let (x, y) = ints()?;
            bool_int(x < y)
        }
        Gt => {
            let (x, y) = ints()?;
            bool_int(x > y)
        }
        And => {
            let (x, y) = ints()?;
            bool_int(x != 0 && y != 0)
        }
        Or => {
            let (x, y) = ints()?;
            bool_int(x != 0 || y != 0)
        }
        BitAnd => {
            let (x, y) = ints()?;
            Value::Int(x & y)
        }
        BitOr => {
            let (x, y) = ints()?;
            Value::Int(x | y)
        }
        LShift => {
            let (x, y) = ints()?;
            Value::Int(x.wrapping_shl(y as u32))
        }
        RShift => {
            let (x, y) = ints()?;
            Value::Int(x.wrapping_shr(y as u32))
        }
        AddF => {
            let (x, y) = floats()?;
            Value::Float(x + y)
        }
        SubF => {
            let (x, y) = floats()?;
            Value::Float(x - y)
        }
        MultF => {
            let (x, y) = floats()?;
            Value::Float(x * y)
        }
        DivF => {
            let (x, y) = floats()?;
            Value::Float(x / y)
        }
        ModF => {
            let (x, y) = floats()?;
            Value::Float(x % y)
        }
        EqF => {
            let (x, y) = floats()?;
            bool_int(x == y)
        }
        NeqF => {
            let (x, y) = floats()?;
            bool_int(x != y)
        }
        LtF => {
            let (x, y) = floats()?;
            bool_int(x < y)
        }
        GtF => {
            let (x, y) = floats()?;
            bool_int(x > y)
        }
        _ => unreachable!(),
    })
}

fn write_reg(state: &mut MachineState, reg: Reg, value: Value) {
    // Writes to the zero register are discarded.
    if reg != Reg::Zero {
        state.registers.insert(reg, value);
    }
}

fn read_reg(state: &MachineState, reg: Reg) -> Result<Value, VmError> {
    state
        .registers
        .get(&reg)
        .copied()
        .ok_or(VmError::UndefinedRegister(reg))
}

fn int_of(value: Value, index: usize, what: &str) -> Result<i32, VmError> {
    match value {
        Value::Int(v) => Ok(v),
        Value::Float(_) => Err(VmError::TypeMismatch {
            index,
            message: format!("{what} must be an integer value"),
        }),
    }
}

fn float_of(value: Value, index: usize) -> Result<f32, VmError> {
    match value {
        Value::Float(f) => Ok(f),
        Value::Int(_) => Err(VmError::TypeMismatch {
            index,
            message: "expected a float value".into(),
        }),
    }
}

fn check_jump(program: &IrProgram, from: usize, target: i64) -> Result<usize, VmError> {
    if target < 0 || target >= program.instrs.len() as i64 {
        return Err(VmError::BadJump { from, target });
    }
    Ok(target as usize)
}

/// Locate the data entry containing `addr`; the usable width is capped by
/// the end of the entry (2 for standalone shorts).
fn slot_width(program: &IrProgram, addr: i64) -> Result<(usize, usize), VmError> {
    if addr < 0 {
        return Err(VmError::OutOfBounds { addr });
    }
    let a = addr as u32;
    for entry in &program.data {
        if a >= entry.base && a < entry.base + entry.len {
            let width = ((entry.base + entry.len - a) as usize).min(4);
            return Ok((a as usize, width));
        }
    }
    Err(VmError::OutOfBounds { addr })
}

fn read_slot(
    program: &IrProgram,
    state: &MachineState,
    addr: i64,
) -> Result<([u8; 4], usize), VmError> {
    let (a, width) = slot_width(program, addr)?;
    let mut bytes = [0u8; 4];
    bytes[..width].copy_from_slice(&state.memory[a..a + width]);
    Ok((bytes, width))
}

fn write_slot(
    program: &IrProgram,
    state: &mut MachineState,
    addr: i64,
    bits: u32,
) -> Result<(), VmError> {
    let (a, width) = slot_width(program, addr)?;
    let bytes = bits.to_le_bytes();
    state.memory[a..a + width].copy_from_slice(&bytes[..width]);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile;
    use crate::frontend::{bind, parse};

    fn run_src(src: &str, arg: Option<i32>) -> Result<Value, VmError> {
        let compiled = compile(&bind(&parse(src).unwrap()).unwrap()).unwrap();
        run(&compiled.ir, arg, 1_000_000).map(|r| r.return_value)
    }

    #[test]
    fn return_zero() {
        assert_eq!(run_src("int main() { return 0; }", None).unwrap(), Value::Int(0));
    }

    #[test]
    fn gcd_of_48_and_18_is_6() {
        let src = "int gcd(int b) {\n\
                       int a;\n\
                       a = 48;\n\
                       while (b != 0) {\n\
                           int t;\n\
                           t = b;\n\
                           b = a % b;\n\
                           a = t;\n\
                       }\n\
                       return a;\n\
                   }\n\
                   int main() { return gcd(18); }";
        assert_eq!(run_src(src, None).unwrap(), Value::Int(6));
    }

    #[test]
    fn infinite_loop_exhausts_budget() {
        let err = run_src("int main() { while (1) { int x; x = 0; } return 0; }", None)
            .unwrap_err();
        assert!(matches!(err, VmError::StepBudget(_)));
    }

    #[test]
    fn mod_follows_c_truncation() {
        assert_eq!(
            run_src("int main() { return -7 % 3; }", None).unwrap(),
            Value::Int(-1)
        );
        assert_eq!(
            run_src("int main() { return 7 % -3; }", None).unwrap(),
            Value::Int(1)
        );
    }

    #[test]
    fn division_by_zero_errors() {
        let err = run_src("int main(int n) { return 1 / n; }", Some(0)).unwrap_err();
        assert!(matches!(err, VmError::DivisionByZero(_)));
    }

    #[test]
    fn argument_reaches_main() {
        assert_eq!(
            run_src("int main(int n) { return n * 2; }", Some(21)).unwrap(),
            Value::Int(42)
        );
    }

    #[test]
    fn if_else_branches() {
        let src = "int main(int n) { if (n > 0) { return 1; } else { return -1; } }";
        assert_eq!(run_src(src, Some(5)).unwrap(), Value::Int(1));
        assert_eq!(run_src(src, Some(-5)).unwrap(), Value::Int(-1));
        assert_eq!(run_src(src, Some(0)).unwrap(), Value::Int(-1));
    }

    #[test]
    fn plain_if_skips_when_false() {
        let src = "int main(int n) { int r; r = 10; if (n > 0) { r = 20; } return r; }";
        assert_eq!(run_src(src, Some(1)).unwrap(), Value::Int(20));
        assert_eq!(run_src(src, Some(0)).unwrap(), Value::Int(10));
    }

    #[test]
    fn short_arithmetic_truncates() {
        let src = "int main() { short s; s = 70000; return s; }";
        assert_eq!(run_src(src, None).unwrap(), Value::Int(70000i32 as i16 as i32));
    }

    #[test]
    fn short_slot_does_not_clobber_neighbor() {
        let src = "int main() { short a; short b; a = 1; b = 2; a = -1; return b; }";
        assert_eq!(run_src(src, None).unwrap(), Value::Int(2));
    }

    #[test]
    fn float_coercions_round_trip() {
        let src = "int main() { float f; int i; f = 3; i = f * 2.5; return i; }";
        assert_eq!(run_src(src, None).unwrap(), Value::Int(7));
    }

    #[test]
    fn dynamic_array_index() {
        let src = "int main(int n) {\n\
                       int a[4];\n\
                       int i;\n\
                       i = 0;\n\
                       while (i < 4) { a[i] = i * 10; i = i + 1; }\n\
                       return a[n];\n\
                   }";
        assert_eq!(run_src(src, Some(2)).unwrap(), Value::Int(20));
        assert_eq!(run_src(src, Some(3)).unwrap(), Value::Int(30));
    }

    #[test]
    fn short_dynamic_index() {
        let src = "int main(int n) {\n\
                       short a[3];\n\
                       short i;\n\
                       i = 0;\n\
                       while (i < 3) { a[i] = i + 5; i = i + 1; }\n\
                       return a[1];\n\
                   }";
        assert_eq!(run_src(src, None).unwrap(), Value::Int(6));
    }

    #[test]
    fn struct_fields_are_independent() {
        let src = "int main() {\n\
                       struct { int a; short b; float c; } s;\n\
                       s.a = 100; s.b = 200; s.c = 1.5;\n\
                       return s.a + s.b + (s.c * 2.0);\n\
                   }";
        assert_eq!(run_src(src, None).unwrap(), Value::Int(303));
    }

    #[test]
    fn nested_calls_from_main() {
        let src = "int double_it(int x) { return x * 2; }\n\
                   int inc(int x) { return x + 1; }\n\
                   int main() { return double_it(inc(20)); }";
        assert_eq!(run_src(src, None).unwrap(), Value::Int(42));
    }

    #[test]
    fn determinism() {
        let src = "int main(int n) { int a[3]; a[0] = n; a[1] = n * n; a[2] = a[0] + a[1]; return a[2]; }";
        let a = run_src(src, Some(7)).unwrap();
        let b = run_src(src, Some(7)).unwrap();
        assert!(a.same_bits(b));
        assert_eq!(a, Value::Int(56));
    }
}
