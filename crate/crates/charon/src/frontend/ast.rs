//! Surface syntax tree for CharonLang.
//!
//! The grammar, in brief:
//!
//! ```text
//! program    ::= (global_decl | func_def)*
//! func_def   ::= builtin IDENT '(' (builtin IDENT)? ')' '{' stmt+ '}'
//! stmt       ::= decl | lvalue '=' expr ';' | IDENT '(' expr ')' ';'
//!              | 'if' '(' expr ')' block ('else' block)?
//!              | 'while' '(' expr ')' block
//!              | 'return' expr ';'
//! decl       ::= builtin IDENT ';' | builtin IDENT '[' INT ']' ';'
//!              | 'struct' '{' (builtin IDENT ';')+ '}' IDENT ';'
//! expr       ::= literals, variables, x[e], x.y, f(e), unary !/-, binary ops
//! builtin    ::= 'short' | 'int' | 'float' | '__unknown_type__'
//! ```
//!
//! Blocks always take braces and are never empty. Unary minus is desugared
//! to `0 - e` at parse time, so the tree never holds negative literals.

use crate::certnum::schema;

pub type Ident = String;

#[derive(Debug, Clone, PartialEq)]
pub enum Type {
    Short,
    Int,
    Float,
    /// Only produced by canonical reconstruction; values of this type
    /// cannot be read or written.
    Unknown,
    Array { elem: Box<Type>, len: u32 },
    Struct { fields: Vec<(Ident, Type)> },
}

impl Type {
    pub fn is_builtin(&self) -> bool {
        matches!(self, Type::Short | Type::Int | Type::Float | Type::Unknown)
    }

    /// Fig. 8 type symbol for a built-in type.
    pub fn symbol(&self) -> u64 {
        match self {
            Type::Short => schema::TS_SHORT,
            Type::Int => schema::TS_INT,
            Type::Float => schema::TS_FLOAT,
            Type::Unknown => schema::TS_UNKNOWN,
            _ => panic!("aggregate types have per-element symbols"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mult,
    Div,
    Mod,
    Lt,
    Gt,
    Eq,
    Neq,
    And,
    Or,
    LShift,
    RShift,
    BitAnd,
    BitOr,
}

impl BinOp {
    pub fn symbol(self) -> u64 {
        match self {
            BinOp::Add => schema::OP_ADD,
            BinOp::Sub => schema::OP_SUB,
            BinOp::Mult => schema::OP_MULT,
            BinOp::Div => schema::OP_DIV,
            BinOp::Mod => schema::OP_MOD,
            BinOp::Lt => schema::OP_LT,
            BinOp::Gt => schema::OP_GT,
            BinOp::Eq => schema::OP_EQ,
            BinOp::Neq => schema::OP_NEQ,
            BinOp::And => schema::OP_AND,
            BinOp::Or => schema::OP_OR,
            BinOp::LShift => schema::OP_LSHIFT,
            BinOp::RShift => schema::OP_RSHIFT,
            BinOp::BitAnd => schema::OP_BITAND,
            BinOp::BitOr => schema::OP_BITOR,
        }
    }

    pub fn text(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mult => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Eq => "==",
            BinOp::Neq => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::LShift => "<<",
            BinOp::RShift => ">>",
            BinOp::BitAnd => "&",
            BinOp::BitOr => "|",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Not,
}

impl UnOp {
    pub fn symbol(self) -> u64 {
        schema::OP_NOT
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    IntLit(i32),
    FloatLit(f32),
    Var(Ident),
    Unary { op: UnOp, operand: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    /// `x[e]`; the index must be an integer literal or a variable name.
    ArrayIndex { base: Ident, index: Box<Expr> },
    /// `x.y`
    FieldAccess { base: Ident, field: Ident },
    /// `f(e)`; calls carry exactly one argument.
    Call { callee: Ident, arg: Box<Expr> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    VarDecl { ty: Type, name: Ident },
    Assign { target: Expr, value: Expr },
    If { cond: Expr, then_body: Vec<Stmt> },
    IfElse { cond: Expr, then_body: Vec<Stmt>, else_body: Vec<Stmt> },
    While { cond: Expr, body: Vec<Stmt> },
    Return(Expr),
    /// A call whose value is discarded.
    CallStmt(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuncDef {
    pub ret_type: Type,
    pub name: Ident,
    pub param: Option<(Type, Ident)>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    /// Top-level declarations; user programs normally declare inside
    /// functions, canonical programs declare everything here.
    pub globals: Vec<(Type, Ident)>,
    pub functions: Vec<FuncDef>,
}

/// Deterministic node count: every Type/Expr/Stmt/FuncDef node counts once.
pub fn ast_node_count(program: &Program) -> usize {
    let mut n = 0;
    for (ty, _) in &program.globals {
        n += 1 + type_nodes(ty);
    }
    for f in &program.functions {
        n += 1 + type_nodes(&f.ret_type);
        if let Some((ty, _)) = &f.param {
            n += type_nodes(ty);
        }
        n += stmts_nodes(&f.body);
    }
    n
}

fn type_nodes(ty: &Type) -> usize {
    match ty {
        Type::Short | Type::Int | Type::Float | Type::Unknown => 1,
        Type::Array { elem, .. } => 1 + type_nodes(elem),
        Type::Struct { fields } => 1 + fields.iter().map(|(_, t)| type_nodes(t)).sum::<usize>(),
    }
}

fn stmts_nodes(stmts: &[Stmt]) -> usize {
    stmts.iter().map(stmt_nodes).sum()
}

fn stmt_nodes(stmt: &Stmt) -> usize {
    match stmt {
        Stmt::VarDecl { ty, .. } => 1 + type_nodes(ty),
        Stmt::Assign { target, value } => 1 + expr_nodes(target) + expr_nodes(value),
        Stmt::If { cond, then_body } => 1 + expr_nodes(cond) + stmts_nodes(then_body),
        Stmt::IfElse {
            cond,
            then_body,
            else_body,
        } => 1 + expr_nodes(cond) + stmts_nodes(then_body) + stmts_nodes(else_body),
        Stmt::While { cond, body } => 1 + expr_nodes(cond) + stmts_nodes(body),
        Stmt::Return(e) => 1 + expr_nodes(e),
        Stmt::CallStmt(e) => 1 + expr_nodes(e),
    }
}

fn expr_nodes(expr: &Expr) -> usize {
    match expr {
        Expr::IntLit(_) | Expr::FloatLit(_) | Expr::Var(_) => 1,
        Expr::Unary { operand, .. } => 1 + expr_nodes(operand),
        Expr::Binary { lhs, rhs, .. } => 1 + expr_nodes(lhs) + expr_nodes(rhs),
        Expr::ArrayIndex { index, .. } => 1 + expr_nodes(index),
        Expr::FieldAccess { .. } => 1,
        Expr::Call { arg, .. } => 1 + expr_nodes(arg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leaf_counts_one() {
        let p = Program {
            globals: vec![],
            functions: vec![FuncDef {
                ret_type: Type::Int,
                name: "main".into(),
                param: None,
                body: vec![Stmt::Return(Expr::IntLit(0))],
            }],
        };
        // func(1) + ret type(1) + return(1) + literal(1)
        assert_eq!(ast_node_count(&p), 4);
    }

    #[test]
    fn binary_over_two_literals_counts_three() {
        let e = Expr::Binary {
            op: BinOp::Add,
            lhs: Box::new(Expr::IntLit(1)),
            rhs: Box::new(Expr::IntLit(2)),
        };
        assert_eq!(expr_nodes(&e), 3);
    }
}
