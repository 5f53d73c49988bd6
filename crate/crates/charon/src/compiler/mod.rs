//! Syntax-directed translation of bound programs into CharonIR.
//!
//! The translation is deliberately rigid: every construct lowers to a fixed
//! instruction pattern, because the low-level certifier recognizes exactly
//! those patterns. There is no optimization of any kind; certificates are
//! position-sensitive and any reordering would break them.
//!
//! Fixed shapes the rest of the pipeline relies on:
//!
//! - address of a variable or static element (4 instructions):
//!   `CONSTANT base; ADD b base zero; CONSTANT off; ADD a b off`
//! - address of a dynamically indexed element (8-9 instructions): base
//!   materialization, index materialization + load (+ TRUNC for short
//!   indices), `CONSTANT 4; MULT; ADD`
//! - reads append `LOAD`/`LOADF` (+ `TRUNC` for short slots); writes to
//!   short slots always truncate the stored value first
//! - call: arg coercion, `MOV arg`, `CONSTANT addr <ret>; JAL f; MOV r ret`
//!   where `<ret>` is the absolute index of that final `MOV`
//! - return: `MOV ret r; JR addr`
//! - `if`: `cond; JZ r len(then); then`
//! - `if/else`: `cond; JZ r len(then); then; JZ zero len(else); else`
//!   (the false edge lands on the else-skip jump)
//! - `while`: `cond; JZ r len(body)+1; body; JZ zero -(len(cond)+len(body)+2)`

use std::collections::BTreeMap;

use thiserror::Error;

use crate::certnum::nth_prime;
use crate::frontend::ast::{BinOp, Type, UnOp};
use crate::frontend::bound::{
    BExpr, BStmt, BoundProgram, FuncId, Place, Proj, UsageInfo, VarId,
};
use crate::ir::{DataEntry, Imm, Instr, IrProgram, Opcode, Operand, Reg};

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("type error: {0}")]
    Type(String),
}

/// Runtime environment T: variable addresses and function labels.
#[derive(Debug, Clone, Default)]
pub struct AddrEnv {
    pub var_addr: Vec<u32>,
    pub var_len: Vec<u32>,
    pub func_label: Vec<String>,
    pub next_free: u32,
}

/// Variable and function primes as assigned by both certification sides.
///
/// Parameters are always active and take primes first (in declaration
/// order); variables take primes in declaration order if they have at least
/// one use. Unused variables consume no prime.
#[derive(Debug, Clone)]
pub struct PrimeAssignment {
    pub var_vp: Vec<Option<u64>>,
    pub func_fp: Vec<u64>,
}

pub fn assign_primes(program: &BoundProgram, usage: &UsageInfo) -> PrimeAssignment {
    let mut var_vp = vec![None; program.vars.len()];
    let mut next = 0;
    for (id, v) in program.vars.iter().enumerate() {
        if v.is_param {
            next += 1;
            var_vp[id] = Some(nth_prime(next));
        }
    }
    for (id, v) in program.vars.iter().enumerate() {
        if !v.is_param && usage.var_used(id) {
            next += 1;
            var_vp[id] = Some(nth_prime(next));
        }
    }
    let func_fp = (1..=program.functions.len()).map(nth_prime).collect();
    PrimeAssignment { var_vp, func_fp }
}

/// The certification environments C_H (names to primes) and C_L
/// (addresses/labels to primes), as populated during compilation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CertEnv {
    pub c_h_vars: BTreeMap<String, u64>,
    pub c_h_funcs: BTreeMap<String, u64>,
    pub c_l_vars: BTreeMap<u32, u64>,
    pub c_l_funcs: BTreeMap<String, u64>,
}

#[derive(Debug, Clone)]
pub struct CompiledProgram {
    pub ir: IrProgram,
    pub addr_env: AddrEnv,
    pub cert_env: CertEnv,
    pub primes: PrimeAssignment,
    pub usage: UsageInfo,
}

/// Byte size of a type; short is 2 bytes standalone, every aggregate
/// element pads to the 4-byte default alignment.
pub fn sizeof(ty: &Type) -> u32 {
    match ty {
        Type::Short => 2,
        Type::Int | Type::Float | Type::Unknown => 4,
        Type::Array { len, .. } => 4 * len,
        Type::Struct { fields } => 4 * fields.len() as u32,
    }
}

/// Scalar value types that live in registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scalar {
    Short,
    Int,
    Float,
}

pub fn scalar_of(ty: &Type) -> Result<Scalar, CompileError> {
    match ty {
        Type::Short => Ok(Scalar::Short),
        Type::Int => Ok(Scalar::Int),
        Type::Float => Ok(Scalar::Float),
        Type::Unknown => Err(CompileError::Type(
            "value of unknown type cannot be used".into(),
        )),
        other => Err(CompileError::Type(format!(
            "aggregate type {other:?} has no scalar value"
        ))),
    }
}

/// Usual arithmetic conversions restricted to short/int/float.
pub fn unify(a: Scalar, b: Scalar) -> Scalar {
    use Scalar::*;
    match (a, b) {
        (Float, _) | (_, Float) => Float,
        (Int, _) | (_, Int) => Int,
        _ => Short,
    }
}

/// Conversion chain that turns a value of type `from` into type `to`.
pub fn value_chain(from: Scalar, to: Scalar) -> Vec<Opcode> {
    use Scalar::*;
    match (from, to) {
        (a, b) if a == b => vec![],
        (Short, Int) => vec![Opcode::SignExt],
        (Short, Float) => vec![Opcode::SignExt, Opcode::SiToFp],
        (Int, Float) => vec![Opcode::SiToFp],
        (Int, Short) => vec![Opcode::Trunc],
        (Float, Int) => vec![Opcode::FpToSi],
        (Float, Short) => vec![Opcode::FpToSi, Opcode::Trunc],
        _ => unreachable!(),
    }
}

/// Conversion chain for a value being stored into a slot of type `to`.
/// Short slots are always truncated before being written, so the chain for
/// a short target ends with TRUNC even when the value is already short.
pub fn write_chain(from: Scalar, to: Scalar) -> Vec<Opcode> {
    match (from, to) {
        (Scalar::Float, Scalar::Short) => vec![Opcode::FpToSi, Opcode::Trunc],
        (_, Scalar::Short) => vec![Opcode::Trunc],
        _ => value_chain(from, to),
    }
}

/// Float variant of a binary operator, where one exists.
pub fn float_variant(op: BinOp) -> Option<Opcode> {
    Some(match op {
        BinOp::Add => Opcode::AddF,
        BinOp::Sub => Opcode::SubF,
        BinOp::Mult => Opcode::MultF,
        BinOp::Div => Opcode::DivF,
        BinOp::Mod => Opcode::ModF,
        BinOp::Eq => Opcode::EqF,
        BinOp::Neq => Opcode::NeqF,
        BinOp::Lt => Opcode::LtF,
        BinOp::Gt => Opcode::GtF,
        _ => return None,
    })
}

pub fn int_variant(op: BinOp) -> Opcode {
    match op {
        BinOp::Add => Opcode::Add,
        BinOp::Sub => Opcode::Sub,
        BinOp::Mult => Opcode::Mult,
        BinOp::Div => Opcode::Div,
        BinOp::Mod => Opcode::Mod,
        BinOp::Lt => Opcode::Lt,
        BinOp::Gt => Opcode::Gt,
        BinOp::Eq => Opcode::Eq,
        BinOp::Neq => Opcode::Neq,
        BinOp::And => Opcode::And,
        BinOp::Or => Opcode::Or,
        BinOp::LShift => Opcode::LShift,
        BinOp::RShift => Opcode::RShift,
        BinOp::BitAnd => Opcode::BitAnd,
        BinOp::BitOr => Opcode::BitOr,
    }
}

pub fn compile(program: &BoundProgram) -> Result<CompiledProgram, CompileError> {
    let usage = UsageInfo::compute(program);
    let primes = assign_primes(program, &usage);

    let mut addr_env = AddrEnv::default();
    for var in &program.vars {
        let len = sizeof(&var.ty);
        addr_env.var_addr.push(addr_env.next_free);
        addr_env.var_len.push(len);
        addr_env.next_free += len;
    }
    for f in &program.functions {
        addr_env.func_label.push(f.name.clone());
    }

    let mut gen = CodeGen {
        program,
        usage: &usage,
        addr_env: &addr_env,
        instrs: Vec::new(),
        labels: Vec::new(),
        next_reg: 1,
    };
    for id in 0..program.functions.len() {
        gen.function(id)?;
    }
    gen.emit(Opcode::Halt, vec![]);

    let data = program
        .vars
        .iter()
        .enumerate()
        .map(|(id, _)| DataEntry {
            base: addr_env.var_addr[id],
            len: addr_env.var_len[id],
        })
        .collect();
    let ir = IrProgram {
        data,
        instrs: gen.instrs,
        labels: gen.labels,
    };

    let mut cert_env = CertEnv::default();
    for (id, var) in program.vars.iter().enumerate() {
        if let Some(vp) = primes.var_vp[id] {
            cert_env.c_h_vars.insert(var.name.clone(), vp);
            cert_env.c_l_vars.insert(addr_env.var_addr[id], vp);
        }
    }
    for (id, f) in program.functions.iter().enumerate() {
        cert_env.c_h_funcs.insert(f.name.clone(), primes.func_fp[id]);
        cert_env.c_l_funcs.insert(f.name.clone(), primes.func_fp[id]);
    }

    Ok(CompiledProgram {
        ir,
        addr_env,
        cert_env,
        primes,
        usage,
    })
}

struct CodeGen<'a> {
    program: &'a BoundProgram,
    usage: &'a UsageInfo,
    addr_env: &'a AddrEnv,
    instrs: Vec<Instr>,
    labels: Vec<(String, usize)>,
    next_reg: u32,
}

impl<'a> CodeGen<'a> {
    fn fresh(&mut self) -> Reg {
        let r = Reg::Temp(self.next_reg);
        self.next_reg += 1;
        r
    }

    fn emit(&mut self, opcode: Opcode, operands: Vec<Operand>) -> usize {
        self.instrs.push(Instr::new(opcode, operands));
        self.instrs.len() - 1
    }

    fn emit_const_int(&mut self, value: i32) -> Reg {
        let r = self.fresh();
        self.emit(
            Opcode::Constant,
            vec![Operand::Reg(r), Operand::Imm(Imm::Int(value))],
        );
        r
    }

    fn element_scalar(&self, place: &Place) -> Result<Scalar, CompileError> {
        let element = match place.proj {
            Proj::None => 0,
            Proj::ConstIndex(i) => i as usize,
            Proj::Field(i) => i,
            Proj::VarIndex(_) => 0,
        };
        scalar_of(&self.program.element_type(place.var, element))
    }

    fn function(&mut self, id: FuncId) -> Result<(), CompileError> {
        let f = &self.program.functions[id];
        self.labels.push((f.name.clone(), self.instrs.len()));
        if let Some(pid) = f.param {
            // Parameter spill: CONSTANT R n; STORE R R_arg.
            let r = self.emit_const_int(self.addr_env.var_addr[pid] as i32);
            self.emit(Opcode::Store, vec![Operand::Reg(r), Operand::Reg(Reg::Arg)]);
        }
        self.block(&f.body, id)?;
        Ok(())
    }

    fn block(&mut self, stmts: &[BStmt], func: FuncId) -> Result<(), CompileError> {
        for stmt in stmts {
            self.stmt(stmt, func)?;
        }
        Ok(())
    }

    fn stmt(&mut self, stmt: &BStmt, func: FuncId) -> Result<(), CompileError> {
        match stmt {
            BStmt::Decl(_) => {}
            BStmt::Assign { target, value } => {
                let (addr_reg, slot) = self.place_addr(target)?;
                let (val_reg, val_ty) = self.expr(value, func)?;
                let val_reg = self.apply_chain(val_reg, &write_chain(val_ty, slot));
                let store = if slot == Scalar::Float {
                    Opcode::StoreF
                } else {
                    Opcode::Store
                };
                self.emit(store, vec![Operand::Reg(addr_reg), Operand::Reg(val_reg)]);
            }
            BStmt::If { cond, then_body } => {
                let (cond_reg, _) = self.expr(cond, func)?;
                let jz = self.emit(
                    Opcode::Jz,
                    vec![Operand::Reg(cond_reg), Operand::Imm(Imm::Int(0))],
                );
                self.block(then_body, func)?;
                let then_len = (self.instrs.len() - jz - 1) as i32;
                self.instrs[jz].operands[1] = Operand::Imm(Imm::Int(then_len));
            }
            BStmt::IfElse {
                cond,
                then_body,
                else_body,
            } => {
                let (cond_reg, _) = self.expr(cond, func)?;
                let jz = self.emit(
                    Opcode::Jz,
                    vec![Operand::Reg(cond_reg), Operand::Imm(Imm::Int(0))],
                );
                self.block(then_body, func)?;
                // True path falls into this jump and hops the else block;
                // the false edge lands one instruction past it.
                let skip = self.emit(
                    Opcode::Jz,
                    vec![Operand::Reg(Reg::Zero), Operand::Imm(Imm::Int(0))],
                );
                self.instrs[jz].operands[1] = Operand::Imm(Imm::Int((skip - jz) as i32));
                self.block(else_body, func)?;
                let else_len = (self.instrs.len() - skip - 1) as i32;
                self.instrs[skip].operands[1] = Operand::Imm(Imm::Int(else_len));
            }
            BStmt::While { cond, body } => {
                let cond_start = self.instrs.len();
                let (cond_reg, _) = self.expr(cond, func)?;
                let jz = self.emit(
                    Opcode::Jz,
                    vec![Operand::Reg(cond_reg), Operand::Imm(Imm::Int(0))],
                );
                self.block(body, func)?;
                let body_len = self.instrs.len() - jz - 1;
                let cond_len = jz - cond_start;
                let back = -((cond_len + body_len + 2) as i32);
                self.emit(
                    Opcode::Jz,
                    vec![Operand::Reg(Reg::Zero), Operand::Imm(Imm::Int(back))],
                );
                // Exit jump clears the body and the back-jump.
                self.instrs[jz].operands[1] = Operand::Imm(Imm::Int(body_len as i32 + 1));
            }
            BStmt::Return(e) => {
                let f = &self.program.functions[func];
                let ret = scalar_of(&f.ret_type)?;
                let (r, t) = self.expr(e, func)?;
                let r = self.apply_chain(r, &value_chain(t, ret));
                self.emit(Opcode::Mov, vec![Operand::Reg(Reg::Ret), Operand::Reg(r)]);
                self.emit(Opcode::Jr, vec![Operand::Reg(Reg::Addr)]);
            }
            BStmt::CallStmt(e) => {
                self.expr(e, func)?;
            }
        }
        Ok(())
    }

    fn apply_chain(&mut self, mut reg: Reg, chain: &[Opcode]) -> Reg {
        for &op in chain {
            let out = self.fresh();
            self.emit(op, vec![Operand::Reg(out), Operand::Reg(reg)]);
            reg = out;
        }
        reg
    }

    /// Materialize the address of a place. Returns the address register and
    /// the scalar type of the addressed slot.
    fn place_addr(&mut self, place: &Place) -> Result<(Reg, Scalar), CompileError> {
        let base = self.addr_env.var_addr[place.var] as i32;
        let r_base_const = self.emit_const_int(base);
        let r_base = self.fresh();
        self.emit(
            Opcode::Add,
            vec![
                Operand::Reg(r_base),
                Operand::Reg(r_base_const),
                Operand::Reg(Reg::Zero),
            ],
        );
        let slot = self.element_scalar(place)?;
        match place.proj {
            Proj::None | Proj::ConstIndex(_) | Proj::Field(_) => {
                let offset = match place.proj {
                    Proj::None => 0,
                    Proj::ConstIndex(i) => 4 * i,
                    Proj::Field(i) => 4 * i as u32,
                    Proj::VarIndex(_) => unreachable!(),
                };
                let r_off = self.emit_const_int(offset as i32);
                let r_addr = self.fresh();
                self.emit(
                    Opcode::Add,
                    vec![
                        Operand::Reg(r_addr),
                        Operand::Reg(r_base),
                        Operand::Reg(r_off),
                    ],
                );
                Ok((r_addr, slot))
            }
            Proj::VarIndex(iv) => {
                let r_i_const = self.emit_const_int(self.addr_env.var_addr[iv] as i32);
                let r_i_base = self.fresh();
                self.emit(
                    Opcode::Add,
                    vec![
                        Operand::Reg(r_i_base),
                        Operand::Reg(r_i_const),
                        Operand::Reg(Reg::Zero),
                    ],
                );
                let r_i_val = self.fresh();
                self.emit(
                    Opcode::Load,
                    vec![Operand::Reg(r_i_val), Operand::Reg(r_i_base)],
                );
                let r_index = match scalar_of(&self.program.vars[iv].ty)? {
                    Scalar::Short => {
                        let r = self.fresh();
                        self.emit(Opcode::Trunc, vec![Operand::Reg(r), Operand::Reg(r_i_val)]);
                        r
                    }
                    _ => r_i_val,
                };
                let r_size = self.emit_const_int(4);
                let r_mul = self.fresh();
                self.emit(
                    Opcode::Mult,
                    vec![
                        Operand::Reg(r_mul),
                        Operand::Reg(r_index),
                        Operand::Reg(r_size),
                    ],
                );
                let r_addr = self.fresh();
                self.emit(
                    Opcode::Add,
                    vec![
                        Operand::Reg(r_addr),
                        Operand::Reg(r_base),
                        Operand::Reg(r_mul),
                    ],
                );
                Ok((r_addr, slot))
            }
        }
    }

    fn expr(&mut self, expr: &BExpr, func: FuncId) -> Result<(Reg, Scalar), CompileError> {
        match expr {
            BExpr::Int(v) => Ok((self.emit_const_int(*v), Scalar::Int)),
            BExpr::Float(v) => {
                let r = self.fresh();
                self.emit(
                    Opcode::Constant,
                    vec![Operand::Reg(r), Operand::Imm(Imm::Float(*v))],
                );
                Ok((r, Scalar::Float))
            }
            BExpr::Read(place) => {
                let (addr_reg, slot) = self.place_addr(place)?;
                match slot {
                    Scalar::Float => {
                        let r = self.fresh();
                        self.emit(Opcode::LoadF, vec![Operand::Reg(r), Operand::Reg(addr_reg)]);
                        Ok((r, Scalar::Float))
                    }
                    Scalar::Short => {
                        let r = self.fresh();
                        self.emit(Opcode::Load, vec![Operand::Reg(r), Operand::Reg(addr_reg)]);
                        let r2 = self.fresh();
                        self.emit(Opcode::Trunc, vec![Operand::Reg(r2), Operand::Reg(r)]);
                        Ok((r2, Scalar::Short))
                    }
                    Scalar::Int => {
                        let r = self.fresh();
                        self.emit(Opcode::Load, vec![Operand::Reg(r), Operand::Reg(addr_reg)]);
                        Ok((r, Scalar::Int))
                    }
                }
            }
            BExpr::Unary { op: UnOp::Not, operand } => {
                let (r, t) = self.expr(operand, func)?;
                let opcode = if t == Scalar::Float {
                    Opcode::NotF
                } else {
                    Opcode::Not
                };
                let out = self.fresh();
                self.emit(opcode, vec![Operand::Reg(out), Operand::Reg(r)]);
                Ok((out, Scalar::Int))
            }
            BExpr::Binary { op, lhs, rhs } => {
                let (r1, t1) = self.expr(lhs, func)?;
                let (r2, t2) = self.expr(rhs, func)?;
                let unified = unify(t1, t2);
                let opcode = if unified == Scalar::Float {
                    float_variant(*op).ok_or_else(|| {
                        CompileError::Type(format!(
                            "operator {} has no float form; operands must be integers",
                            op.text()
                        ))
                    })?
                } else {
                    int_variant(*op)
                };
                let r1 = self.apply_chain(r1, &value_chain(t1, unified));
                let r2 = self.apply_chain(r2, &value_chain(t2, unified));
                let out = self.fresh();
                self.emit(
                    opcode,
                    vec![Operand::Reg(out), Operand::Reg(r1), Operand::Reg(r2)],
                );
                let result = match op {
                    BinOp::Lt | BinOp::Gt | BinOp::Eq | BinOp::Neq | BinOp::And | BinOp::Or => {
                        Scalar::Int
                    }
                    _ => unified,
                };
                Ok((out, result))
            }
            BExpr::Call { func: callee, arg } => {
                let (ra, ta) = self.expr(arg, func)?;
                let f = &self.program.functions[*callee];
                let ret = scalar_of(&f.ret_type)?;
                // Coerce the argument to the parameter type when the callee
                // actually reads it; an untouched parameter slot keeps the
                // raw value, matching the unknown type it certifies as.
                let ra = match f.param {
                    Some(pid) if self.usage.var_used(pid) => {
                        let pty = scalar_of(&self.program.vars[pid].ty)?;
                        self.apply_chain(ra, &value_chain(ta, pty))
                    }
                    _ => ra,
                };
                self.emit(Opcode::Mov, vec![Operand::Reg(Reg::Arg), Operand::Reg(ra)]);
                // addr = index of the MOV following JAL.
                let ret_addr = self.instrs.len() as i32 + 2;
                let r_addr_const = Reg::Addr;
                self.emit(
                    Opcode::Constant,
                    vec![Operand::Reg(r_addr_const), Operand::Imm(Imm::Int(ret_addr))],
                );
                self.emit(Opcode::Jal, vec![Operand::Label(f.name.clone())]);
                let out = self.fresh();
                self.emit(Opcode::Mov, vec![Operand::Reg(out), Operand::Reg(Reg::Ret)]);
                Ok((out, ret))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{bind, parse};

    fn compiled(src: &str) -> CompiledProgram {
        compile(&bind(&parse(src).unwrap()).unwrap()).unwrap()
    }

    #[test]
    fn sizeof_matches_alignment_rules() {
        assert_eq!(sizeof(&Type::Int), 4);
        assert_eq!(sizeof(&Type::Short), 2);
        assert_eq!(sizeof(&Type::Float), 4);
        let s = Type::Struct {
            fields: vec![
                ("a".into(), Type::Int),
                ("b".into(), Type::Int),
                ("c".into(), Type::Int),
            ],
        };
        assert_eq!(sizeof(&s), 12);
        let short_array = Type::Array {
            elem: Box::new(Type::Short),
            len: 3,
        };
        assert_eq!(sizeof(&short_array), 12);
    }

    #[test]
    fn minimal_main_lowering() {
        let c = compiled("int main() { return 0; }");
        let text = crate::ir::serialize(&c.ir);
        assert_eq!(
            text,
            ".data\n.text\nmain:\nCONSTANT r1 0\nMOV ret r1\nJR addr\nHALT\n"
        );
    }

    #[test]
    fn function_primes_follow_declaration_order() {
        let c = compiled(
            "int f1(int a) { return a; }\n\
             int f2(int b) { return b; }\n\
             int main() { return f1(f2(1)); }",
        );
        assert_eq!(c.cert_env.c_h_funcs["f1"], 2);
        assert_eq!(c.cert_env.c_h_funcs["f2"], 3);
        assert_eq!(c.cert_env.c_h_funcs["main"], 5);
    }

    #[test]
    fn variable_primes_skip_unused_variables() {
        let c = compiled(
            "int main() { int used_1; int dead; int used_2; used_1 = 1; used_2 = 2; return used_1 + used_2; }",
        );
        assert_eq!(c.cert_env.c_h_vars["main::used_1"], 2);
        assert_eq!(c.cert_env.c_h_vars["main::used_2"], 3);
        assert!(!c.cert_env.c_h_vars.contains_key("main::dead"));
    }

    #[test]
    fn params_take_primes_before_variables() {
        let c = compiled(
            "int f(int p) { return p; }\n\
             int main() { int x; x = f(3); return x; }",
        );
        assert_eq!(c.cert_env.c_h_vars["f::p"], 2);
        assert_eq!(c.cert_env.c_h_vars["main::x"], 3);
    }

    #[test]
    fn high_and_low_variable_primes_agree() {
        // Lemma-style check: C_H(a) == C_L(T(a)) for every mapped name.
        let c = compiled(
            "int f(short s) { int local; local = s + 1; return local; }\n\
             int main() { float g; g = 2.5; return f(1) + g; }",
        );
        let b = bind(
            &parse(
                "int f(short s) { int local; local = s + 1; return local; }\n\
                 int main() { float g; g = 2.5; return f(1) + g; }",
            )
            .unwrap(),
        )
        .unwrap();
        for (id, var) in b.vars.iter().enumerate() {
            let high = c.cert_env.c_h_vars.get(&var.name);
            let low = c.cert_env.c_l_vars.get(&c.addr_env.var_addr[id]);
            assert_eq!(high, low, "{}", var.name);
        }
    }

    #[test]
    fn data_section_covers_every_address_constant() {
        let c = compiled(
            "int main() { int a[2]; short s; float f; a[0] = 1; a[1] = 2; s = 3; f = 4.0; return a[0]; }",
        );
        let bases: Vec<u32> = c.ir.data.iter().map(|e| e.base).collect();
        for w in c.ir.instrs.windows(2) {
            if w[0].opcode == Opcode::Constant && w[1].opcode == Opcode::Add {
                if w[1].reg(2) == Some(Reg::Zero) && w[1].reg(1) == w[0].reg(0) {
                    let base = w[0].int_imm(1).unwrap() as u32;
                    assert!(bases.contains(&base), "base {base} not in data section");
                }
            }
        }
    }

    #[test]
    fn while_jump_targets_line_up() {
        let c = compiled("int main(int n) { while (n > 0) { n = n - 1; } return n; }");
        let instrs = &c.ir.instrs;
        // Find the conditional JZ and the backward JZ.
        let (jz_idx, back_idx) = {
            let mut jz = None;
            let mut back = None;
            for (i, ins) in instrs.iter().enumerate() {
                if ins.opcode == Opcode::Jz {
                    if ins.reg(0) == Some(Reg::Zero) {
                        back = Some(i);
                    } else {
                        jz = Some(i);
                    }
                }
            }
            (jz.unwrap(), back.unwrap())
        };
        // Forward exit lands one past the backward jump.
        let fwd = instrs[jz_idx].int_imm(1).unwrap() as usize;
        assert_eq!(jz_idx + 1 + fwd, back_idx + 1);
        // Backward jump lands on the first condition instruction.
        let back_imm = instrs[back_idx].int_imm(1).unwrap();
        let target = back_idx as i64 + 1 + back_imm as i64;
        let cond_start = c.ir.label_index("main").unwrap() + 2; // label, param spill
        assert_eq!(target as usize, cond_start);
    }

    #[test]
    fn call_return_address_is_the_mov_after_jal() {
        let c = compiled(
            "int f(int x) { return x; }\nint main() { return f(41); }",
        );
        let instrs = &c.ir.instrs;
        for (i, ins) in instrs.iter().enumerate() {
            if ins.opcode == Opcode::Jal {
                let addr_const = &instrs[i - 1];
                assert_eq!(addr_const.opcode, Opcode::Constant);
                assert_eq!(addr_const.reg(0), Some(Reg::Addr));
                assert_eq!(addr_const.int_imm(1).unwrap() as usize, i + 1);
                assert_eq!(instrs[i + 1].opcode, Opcode::Mov);
                assert_eq!(instrs[i + 1].reg(1), Some(Reg::Ret));
            }
        }
    }

    #[test]
    fn bitwise_on_floats_is_rejected() {
        let ast = parse("int main() { float f; f = 1.0; return f & 2; }").unwrap();
        let err = compile(&bind(&ast).unwrap()).unwrap_err();
        assert!(err.to_string().contains("no float form"));
    }

    #[test]
    fn short_writes_always_truncate() {
        let c = compiled("int main() { short a; short b; a = 1; b = a; return b; }");
        for (i, ins) in c.ir.instrs.iter().enumerate() {
            if ins.opcode == Opcode::Store && i > 0 {
                // Skip the parameterless main: no param spill here, so every
                // STORE closes an assignment to a short slot.
                assert_eq!(c.ir.instrs[i - 1].opcode, Opcode::Trunc, "at {i}");
            }
        }
    }
}
