//! Name-resolved program form shared by the compiler and the certifiers.
//!
//! Binding assigns every declaration a `VarId` in source order, resolves
//! struct fields to element indices, and checks access shapes against the
//! declared types. The element-usage analysis in this module decides which
//! aggregate slots count as used; unused slots certify as `__unknown_type__`
//! on both sides of the pipeline.

use super::ast::{BinOp, Expr, Program, Stmt, Type, UnOp};
use super::FrontendError;
use crate::certnum::schema::TS_UNKNOWN;
use std::collections::HashMap;

pub type VarId = usize;
pub type FuncId = usize;

#[derive(Debug, Clone)]
pub struct BoundVar {
    /// Scope-qualified name, e.g. `main::x`; globals keep their bare name.
    pub name: String,
    pub ty: Type,
    pub is_param: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Proj {
    None,
    ConstIndex(u32),
    VarIndex(VarId),
    Field(usize),
}

/// A storage location: a variable plus an optional element projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Place {
    pub var: VarId,
    pub proj: Proj,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BExpr {
    Int(i32),
    Float(f32),
    Read(Place),
    Unary {
        op: UnOp,
        operand: Box<BExpr>,
    },
    Binary {
        op: BinOp,
        lhs: Box<BExpr>,
        rhs: Box<BExpr>,
    },
    Call {
        func: FuncId,
        arg: Box<BExpr>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum BStmt {
    Decl(VarId),
    Assign { target: Place, value: BExpr },
    If { cond: BExpr, then_body: Vec<BStmt> },
    IfElse {
        cond: BExpr,
        then_body: Vec<BStmt>,
        else_body: Vec<BStmt>,
    },
    While { cond: BExpr, body: Vec<BStmt> },
    Return(BExpr),
    CallStmt(BExpr),
}

#[derive(Debug, Clone)]
pub struct BoundFunc {
    pub name: String,
    pub ret_type: Type,
    pub param: Option<VarId>,
    pub body: Vec<BStmt>,
}

#[derive(Debug, Clone)]
pub struct BoundProgram {
    /// All declarations in source order: globals first, then per-function
    /// params and locals as they appear.
    pub vars: Vec<BoundVar>,
    pub globals: Vec<VarId>,
    pub functions: Vec<BoundFunc>,
}

impl BoundProgram {
    pub fn var(&self, id: VarId) -> &BoundVar {
        &self.vars[id]
    }

    /// Number of 4-byte element slots (1 for scalars).
    pub fn element_count(&self, id: VarId) -> usize {
        match &self.vars[id].ty {
            Type::Array { len, .. } => *len as usize,
            Type::Struct { fields } => fields.len(),
            _ => 1,
        }
    }

    /// Declared built-in type of one element slot.
    pub fn element_type(&self, id: VarId, element: usize) -> Type {
        match &self.vars[id].ty {
            Type::Array { elem, .. } => (**elem).clone(),
            Type::Struct { fields } => fields[element].1.clone(),
            scalar => scalar.clone(),
        }
    }
}

struct Binder<'a> {
    program: &'a Program,
    vars: Vec<BoundVar>,
    scopes: Vec<HashMap<String, VarId>>,
    func_ids: HashMap<String, FuncId>,
}

/// Resolve names, struct fields, and access shapes.
pub fn bind(program: &Program) -> Result<BoundProgram, FrontendError> {
    let mut b = Binder {
        program,
        vars: Vec::new(),
        scopes: vec![HashMap::new()],
        func_ids: HashMap::new(),
    };
    let mut globals = Vec::new();
    for (ty, name) in &program.globals {
        let id = b.declare(name.clone(), ty.clone(), false, None);
        globals.push(id);
    }
    let mut functions = Vec::new();
    for (idx, f) in program.functions.iter().enumerate() {
        b.func_ids.insert(f.name.clone(), idx);
        b.scopes.push(HashMap::new());
        let param = f
            .param
            .as_ref()
            .map(|(ty, name)| b.declare(name.clone(), ty.clone(), true, Some(&f.name)));
        let body = b.block(&f.body, &f.name)?;
        b.scopes.pop();
        functions.push(BoundFunc {
            name: f.name.clone(),
            ret_type: f.ret_type.clone(),
            param,
            body,
        });
    }
    Ok(BoundProgram {
        vars: b.vars,
        globals,
        functions,
    })
}

impl<'a> Binder<'a> {
    fn declare(&mut self, name: String, ty: Type, is_param: bool, func: Option<&str>) -> VarId {
        let id = self.vars.len();
        let qualified = match func {
            Some(f) => format!("{f}::{name}"),
            None => name.clone(),
        };
        self.vars.push(BoundVar {
            name: qualified,
            ty,
            is_param,
        });
        self.scopes.last_mut().unwrap().insert(name, id);
        id
    }

    fn lookup(&self, name: &str) -> Result<VarId, FrontendError> {
        for scope in self.scopes.iter().rev() {
            if let Some(&id) = scope.get(name) {
                return Ok(id);
            }
        }
        Err(FrontendError::Semantic {
            message: format!("use of undeclared variable {name}"),
        })
    }

    fn block(&mut self, stmts: &[Stmt], func: &str) -> Result<Vec<BStmt>, FrontendError> {
        let mut out = Vec::new();
        for stmt in stmts {
            out.push(self.stmt(stmt, func)?);
        }
        Ok(out)
    }

    fn nested(&mut self, stmts: &[Stmt], func: &str) -> Result<Vec<BStmt>, FrontendError> {
        self.scopes.push(HashMap::new());
        let out = self.block(stmts, func);
        self.scopes.pop();
        out
    }

    fn stmt(&mut self, stmt: &Stmt, func: &str) -> Result<BStmt, FrontendError> {
        Ok(match stmt {
            Stmt::VarDecl { ty, name } => {
                BStmt::Decl(self.declare(name.clone(), ty.clone(), false, Some(func)))
            }
            Stmt::Assign { target, value } => BStmt::Assign {
                target: self.place(target)?,
                value: self.expr(value)?,
            },
            Stmt::If { cond, then_body } => BStmt::If {
                cond: self.expr(cond)?,
                then_body: self.nested(then_body, func)?,
            },
            Stmt::IfElse {
                cond,
                then_body,
                else_body,
            } => BStmt::IfElse {
                cond: self.expr(cond)?,
                then_body: self.nested(then_body, func)?,
                else_body: self.nested(else_body, func)?,
            },
            Stmt::While { cond, body } => BStmt::While {
                cond: self.expr(cond)?,
                body: self.nested(body, func)?,
            },
            Stmt::Return(e) => BStmt::Return(self.expr(e)?),
            Stmt::CallStmt(e) => BStmt::CallStmt(self.expr(e)?),
        })
    }

    fn place(&mut self, expr: &Expr) -> Result<Place, FrontendError> {
        let sem = |message: String| FrontendError::Semantic { message };
        match expr {
            Expr::Var(name) => {
                let var = self.lookup(name)?;
                let ty = &self.vars[var].ty;
                if !ty.is_builtin() {
                    return Err(sem(format!(
                        "aggregate variable {name} needs an index or field access"
                    )));
                }
                if matches!(ty, Type::Unknown) {
                    return Err(sem(format!("variable {name} has unknown type and cannot be accessed")));
                }
                Ok(Place {
                    var,
                    proj: Proj::None,
                })
            }
            Expr::ArrayIndex { base, index } => {
                let var = self.lookup(base)?;
                let Type::Array { elem, len } = self.vars[var].ty.clone() else {
                    return Err(sem(format!("{base} is not an array")));
                };
                if matches!(*elem, Type::Unknown) {
                    return Err(sem(format!("array {base} has unknown element type")));
                }
                let proj = match index.as_ref() {
                    Expr::IntLit(i) => {
                        if *i < 0 || *i as u32 >= len {
                            return Err(sem(format!(
                                "index {i} out of bounds for {base}[{len}]"
                            )));
                        }
                        Proj::ConstIndex(*i as u32)
                    }
                    Expr::Var(iname) => {
                        let ivar = self.lookup(iname)?;
                        match self.vars[ivar].ty {
                            Type::Short | Type::Int => Proj::VarIndex(ivar),
                            _ => {
                                return Err(sem(format!(
                                    "index variable {iname} must be a short or int scalar"
                                )))
                            }
                        }
                    }
                    _ => unreachable!("parser restricts index forms"),
                };
                Ok(Place { var, proj })
            }
            Expr::FieldAccess { base, field } => {
                let var = self.lookup(base)?;
                let Type::Struct { fields } = self.vars[var].ty.clone() else {
                    return Err(sem(format!("{base} is not a struct")));
                };
                let idx = fields
                    .iter()
                    .position(|(fname, _)| fname == field)
                    .ok_or_else(|| sem(format!("{base} has no field {field}")))?;
                if matches!(fields[idx].1, Type::Unknown) {
                    return Err(sem(format!("field {base}.{field} has unknown type")));
                }
                Ok(Place {
                    var,
                    proj: Proj::Field(idx),
                })
            }
            _ => Err(sem("assignment target must be a variable, array element, or field".into())),
        }
    }

    fn expr(&mut self, expr: &Expr) -> Result<BExpr, FrontendError> {
        Ok(match expr {
            Expr::IntLit(v) => BExpr::Int(*v),
            Expr::FloatLit(v) => BExpr::Float(*v),
            Expr::Var(_) | Expr::ArrayIndex { .. } | Expr::FieldAccess { .. } => {
                BExpr::Read(self.place(expr)?)
            }
            Expr::Unary { op, operand } => BExpr::Unary {
                op: *op,
                operand: Box::new(self.expr(operand)?),
            },
            Expr::Binary { op, lhs, rhs } => BExpr::Binary {
                op: *op,
                lhs: Box::new(self.expr(lhs)?),
                rhs: Box::new(self.expr(rhs)?),
            },
            Expr::Call { callee, arg } => {
                let func = *self.func_ids.get(callee).ok_or_else(|| {
                    FrontendError::Semantic {
                        message: format!("call of undeclared function {callee}"),
                    }
                })?;
                BExpr::Call {
                    func,
                    arg: Box::new(self.expr(arg)?),
                }
            }
        })
    }
}

/// Which element slots of each variable the program actually touches.
#[derive(Debug, Clone)]
pub struct UsageInfo {
    pub element_used: Vec<Vec<bool>>,
    pub dynamic: Vec<bool>,
}

impl UsageInfo {
    pub fn compute(program: &BoundProgram) -> UsageInfo {
        let mut info = UsageInfo {
            element_used: program
                .vars
                .iter()
                .enumerate()
                .map(|(id, _)| vec![false; program.element_count(id)])
                .collect(),
            dynamic: vec![false; program.vars.len()],
        };
        for f in &program.functions {
            info.walk_block(&f.body);
        }
        info
    }

    /// A variable is used when any of its elements is read or written.
    pub fn var_used(&self, id: VarId) -> bool {
        self.dynamic[id] || self.element_used[id].iter().any(|&u| u)
    }

    /// Type symbols for the definition tower: declared symbols for used
    /// elements, `__unknown_type__` for untouched ones. Dynamic indexing
    /// touches every element.
    pub fn element_symbols(&self, program: &BoundProgram, id: VarId) -> Vec<u64> {
        (0..program.element_count(id))
            .map(|e| {
                if self.dynamic[id] || self.element_used[id][e] {
                    program.element_type(id, e).symbol()
                } else {
                    TS_UNKNOWN
                }
            })
            .collect()
    }

    fn touch(&mut self, place: &Place) {
        match place.proj {
            Proj::None => self.element_used[place.var][0] = true,
            Proj::ConstIndex(i) => self.element_used[place.var][i as usize] = true,
            Proj::Field(i) => self.element_used[place.var][i] = true,
            Proj::VarIndex(iv) => {
                self.dynamic[place.var] = true;
                self.element_used[iv][0] = true;
            }
        }
    }

    fn walk_block(&mut self, stmts: &[BStmt]) {
        for stmt in stmts {
            match stmt {
                BStmt::Decl(_) => {}
                BStmt::Assign { target, value } => {
                    self.touch(target);
                    self.walk_expr(value);
                }
                BStmt::If { cond, then_body } => {
                    self.walk_expr(cond);
                    self.walk_block(then_body);
                }
                BStmt::IfElse {
                    cond,
                    then_body,
                    else_body,
                } => {
                    self.walk_expr(cond);
                    self.walk_block(then_body);
                    self.walk_block(else_body);
                }
                BStmt::While { cond, body } => {
                    self.walk_expr(cond);
                    self.walk_block(body);
                }
                BStmt::Return(e) | BStmt::CallStmt(e) => self.walk_expr(e),
            }
        }
    }

    fn walk_expr(&mut self, expr: &BExpr) {
        match expr {
            BExpr::Int(_) | BExpr::Float(_) => {}
            BExpr::Read(place) => self.touch(place),
            BExpr::Unary { operand, .. } => self.walk_expr(operand),
            BExpr::Binary { lhs, rhs, .. } => {
                self.walk_expr(lhs);
                self.walk_expr(rhs);
            }
            BExpr::Call { arg, .. } => self.walk_expr(arg),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn binds_and_tracks_usage() {
        let ast = parse(
            "int main() { int a[3]; int dead; a[0] = 1; a[2] = 7; return a[0] + a[2]; }",
        )
        .unwrap();
        let b = bind(&ast).unwrap();
        let usage = UsageInfo::compute(&b);
        // a: elements 0 and 2 used, middle untouched; dead: unused.
        assert_eq!(usage.element_symbols(&b, 0), vec![3, TS_UNKNOWN, 3]);
        assert!(!usage.var_used(1));
        assert_eq!(usage.element_symbols(&b, 1), vec![TS_UNKNOWN]);
    }

    #[test]
    fn dynamic_index_touches_all_elements() {
        let ast = parse(
            "int main(int i) { int a[3]; a[i] = 1; return a[0]; }",
        )
        .unwrap();
        let b = bind(&ast).unwrap();
        let usage = UsageInfo::compute(&b);
        let a = b.vars.iter().position(|v| v.name == "main::a").unwrap();
        assert!(usage.dynamic[a]);
        assert_eq!(usage.element_symbols(&b, a), vec![3, 3, 3]);
    }

    #[test]
    fn index_out_of_bounds_is_rejected() {
        let ast = parse("int main() { int a[3]; a[3] = 1; return 0; }").unwrap();
        assert!(bind(&ast).is_err());
    }

    #[test]
    fn aggregate_value_use_is_rejected() {
        let ast = parse("int main() { int a[3]; return a; }").unwrap();
        assert!(bind(&ast).is_err());
    }

    #[test]
    fn unknown_field_is_rejected() {
        let ast = parse("int main() { struct { int a; } s; return s.b; }").unwrap();
        assert!(bind(&ast).is_err());
    }
}
