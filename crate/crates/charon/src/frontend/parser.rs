//! Recursive-descent parser and the post-parse semantic checks.
//!
//! Operator precedence and associativity follow ANSI C, restricted to the
//! operator set the language actually has (there is no `^`, `<=`, or `>=`).

use std::collections::HashSet;

use super::ast::*;
use super::token::{Token, TokenKind};
use super::FrontendError;

pub fn parse_tokens(tokens: Vec<Token>) -> Result<Program, FrontendError> {
    let mut p = Parser { tokens, pos: 0 };
    let program = p.program()?;
    validate(&program)?;
    Ok(program)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_at(&self, offset: usize) -> Option<&TokenKind> {
        self.tokens.get(self.pos + offset).map(|t| &t.kind)
    }

    fn bump(&mut self) -> Result<Token, FrontendError> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.err_eof("unexpected end of input"))?;
        self.pos += 1;
        Ok(tok)
    }

    fn err_here(&self, message: impl Into<String>) -> FrontendError {
        match self.tokens.get(self.pos) {
            Some(t) => FrontendError::Syntax {
                line: t.line,
                col: t.col,
                message: message.into(),
            },
            None => self.err_eof(message),
        }
    }

    fn err_eof(&self, message: impl Into<String>) -> FrontendError {
        let (line, col) = self
            .tokens
            .last()
            .map(|t| (t.line, t.col))
            .unwrap_or((1, 1));
        FrontendError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Token, FrontendError> {
        if self.peek() == Some(&kind) {
            self.bump()
        } else {
            Err(self.err_here(format!("expected {what}")))
        }
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.peek() == Some(&kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, FrontendError> {
        match self.peek() {
            Some(TokenKind::Ident(_)) => {
                let tok = self.bump()?;
                match tok.kind {
                    TokenKind::Ident(name) => Ok(name),
                    _ => unreachable!(),
                }
            }
            _ => Err(self.err_here(format!("expected {what}"))),
        }
    }

    fn builtin_type(&mut self) -> Result<Type, FrontendError> {
        let ty = match self.peek() {
            Some(TokenKind::KwShort) => Type::Short,
            Some(TokenKind::KwInt) => Type::Int,
            Some(TokenKind::KwFloat) => Type::Float,
            Some(TokenKind::KwUnknownType) => Type::Unknown,
            Some(TokenKind::Star) => {
                return Err(self.err_here("pointer types are not supported"))
            }
            _ => return Err(self.err_here("expected a type")),
        };
        self.bump()?;
        if self.peek() == Some(&TokenKind::Star) {
            return Err(self.err_here("pointer types are not supported"));
        }
        Ok(ty)
    }

    fn at_type_start(&self) -> bool {
        matches!(
            self.peek(),
            Some(
                TokenKind::KwShort
                    | TokenKind::KwInt
                    | TokenKind::KwFloat
                    | TokenKind::KwUnknownType
                    | TokenKind::KwStruct
            )
        )
    }

    fn program(&mut self) -> Result<Program, FrontendError> {
        let mut program = Program::default();
        while self.peek().is_some() {
            if self.peek() == Some(&TokenKind::KwStruct) {
                let (ty, name) = self.struct_decl()?;
                program.globals.push((ty, name));
                continue;
            }
            let ty = self.builtin_type()?;
            let name = self.ident("identifier")?;
            if self.peek() == Some(&TokenKind::LParen) {
                program.functions.push(self.func_def(ty, name)?);
            } else {
                let ty = self.maybe_array(ty)?;
                self.expect(TokenKind::Semi, "';'")?;
                program.globals.push((ty, name));
            }
        }
        Ok(program)
    }

    /// `struct { θ x; θ y; ... } name ;`
    fn struct_decl(&mut self) -> Result<(Type, String), FrontendError> {
        self.expect(TokenKind::KwStruct, "'struct'")?;
        self.expect(TokenKind::LBrace, "'{'")?;
        let mut fields = Vec::new();
        loop {
            let fty = self.builtin_type()?;
            let fname = self.ident("field name")?;
            self.expect(TokenKind::Semi, "';'")?;
            fields.push((fname, fty));
            if self.peek() == Some(&TokenKind::RBrace) {
                break;
            }
        }
        self.expect(TokenKind::RBrace, "'}'")?;
        let name = self.ident("variable name")?;
        self.expect(TokenKind::Semi, "';'")?;
        Ok((Type::Struct { fields }, name))
    }

    /// Array suffix after the declared name: `θ x [ n ]`.
    fn maybe_array(&mut self, elem: Type) -> Result<Type, FrontendError> {
        if !self.eat(TokenKind::LBracket) {
            return Ok(elem);
        }
        let len = match self.peek() {
            Some(TokenKind::IntLit(n)) if *n >= 1 => *n as u32,
            Some(TokenKind::IntLit(_)) => {
                return Err(self.err_here("array length must be at least 1"))
            }
            _ => return Err(self.err_here("expected array length")),
        };
        self.bump()?;
        self.expect(TokenKind::RBracket, "']'")?;
        Ok(Type::Array {
            elem: Box::new(elem),
            len,
        })
    }

    fn func_def(&mut self, ret_type: Type, name: String) -> Result<FuncDef, FrontendError> {
        self.expect(TokenKind::LParen, "'('")?;
        let param = if self.peek() == Some(&TokenKind::RParen) {
            None
        } else {
            if self.peek() == Some(&TokenKind::KwStruct) {
                return Err(self.err_here("aggregate parameters are not supported"));
            }
            let pty = self.builtin_type()?;
            let pname = self.ident("parameter name")?;
            if self.peek() == Some(&TokenKind::LBracket) {
                return Err(self.err_here("aggregate parameters are not supported"));
            }
            Some((pty, pname))
        };
        self.expect(TokenKind::RParen, "')'")?;
        let body = self.block()?;
        Ok(FuncDef {
            ret_type,
            name,
            param,
            body,
        })
    }

    /// Brace-delimited, non-empty statement list.
    fn block(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        self.expect(TokenKind::LBrace, "'{'")?;
        let mut stmts = Vec::new();
        while self.peek() != Some(&TokenKind::RBrace) {
            stmts.push(self.stmt()?);
        }
        if stmts.is_empty() {
            return Err(self.err_here("blocks must contain at least one statement"));
        }
        self.expect(TokenKind::RBrace, "'}'")?;
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, FrontendError> {
        match self.peek() {
            Some(TokenKind::KwStruct) => {
                let (ty, name) = self.struct_decl()?;
                Ok(Stmt::VarDecl { ty, name })
            }
            Some(
                TokenKind::KwShort | TokenKind::KwInt | TokenKind::KwFloat | TokenKind::KwUnknownType,
            ) => {
                let ty = self.builtin_type()?;
                let name = self.ident("variable name")?;
                let ty = self.maybe_array(ty)?;
                self.expect(TokenKind::Semi, "';'")?;
                Ok(Stmt::VarDecl { ty, name })
            }
            Some(TokenKind::KwIf) => {
                self.bump()?;
                self.expect(TokenKind::LParen, "'('")?;
                let cond = self.expr()?;
                self.expect(TokenKind::RParen, "')'")?;
                let then_body = self.block()?;
                if self.eat(TokenKind::KwElse) {
                    let else_body = self.block()?;
                    Ok(Stmt::IfElse {
                        cond,
                        then_body,
                        else_body,
                    })
                } else {
                    Ok(Stmt::If { cond, then_body })
                }
            }
            Some(TokenKind::KwWhile) => {
                self.bump()?;
                self.expect(TokenKind::LParen, "'('")?;
                let cond = self.expr()?;
                self.expect(TokenKind::RParen, "')'")?;
                let body = self.block()?;
                Ok(Stmt::While { cond, body })
            }
            Some(TokenKind::KwReturn) => {
                self.bump()?;
                let expr = self.expr()?;
                self.expect(TokenKind::Semi, "';'")?;
                Ok(Stmt::Return(expr))
            }
            Some(TokenKind::Ident(_)) => {
                // Call statement or assignment.
                if self.peek_at(1) == Some(&TokenKind::LParen) {
                    let call = self.expr()?;
                    self.expect(TokenKind::Semi, "';'")?;
                    return Ok(Stmt::CallStmt(call));
                }
                let target = self.lvalue()?;
                self.expect(TokenKind::Assign, "'='")?;
                let value = self.expr()?;
                self.expect(TokenKind::Semi, "';'")?;
                Ok(Stmt::Assign { target, value })
            }
            _ => Err(self.err_here("expected a statement")),
        }
    }

    fn lvalue(&mut self) -> Result<Expr, FrontendError> {
        let base = self.ident("assignment target")?;
        match self.peek() {
            Some(TokenKind::LBracket) => {
                self.bump()?;
                let index = self.expr()?;
                self.check_index_form(&index)?;
                self.expect(TokenKind::RBracket, "']'")?;
                Ok(Expr::ArrayIndex {
                    base,
                    index: Box::new(index),
                })
            }
            Some(TokenKind::Dot) => {
                self.bump()?;
                let field = self.ident("field name")?;
                Ok(Expr::FieldAccess { base, field })
            }
            _ => Ok(Expr::Var(base)),
        }
    }

    fn check_index_form(&self, index: &Expr) -> Result<(), FrontendError> {
        match index {
            Expr::IntLit(_) | Expr::Var(_) => Ok(()),
            _ => Err(self.err_here("array index must be an integer literal or a variable")),
        }
    }

    fn expr(&mut self) -> Result<Expr, FrontendError> {
        self.binary_level(0)
    }

    // Precedence levels, loosest first.
    const LEVELS: [&'static [(TokenKind, BinOp)]; 9] = [
        &[(TokenKind::OrOr, BinOp::Or)],
        &[(TokenKind::AndAnd, BinOp::And)],
        &[(TokenKind::Pipe, BinOp::BitOr)],
        &[(TokenKind::Amp, BinOp::BitAnd)],
        &[(TokenKind::EqEq, BinOp::Eq), (TokenKind::NotEq, BinOp::Neq)],
        &[(TokenKind::Lt, BinOp::Lt), (TokenKind::Gt, BinOp::Gt)],
        &[(TokenKind::Shl, BinOp::LShift), (TokenKind::Shr, BinOp::RShift)],
        &[(TokenKind::Plus, BinOp::Add), (TokenKind::Minus, BinOp::Sub)],
        &[
            (TokenKind::Star, BinOp::Mult),
            (TokenKind::Slash, BinOp::Div),
            (TokenKind::Percent, BinOp::Mod),
        ],
    ];

    fn binary_level(&mut self, level: usize) -> Result<Expr, FrontendError> {
        if level >= Self::LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary_level(level + 1)?;
        'outer: loop {
            for (kind, op) in Self::LEVELS[level] {
                if self.peek() == Some(kind) {
                    self.bump()?;
                    let rhs = self.binary_level(level + 1)?;
                    lhs = Expr::Binary {
                        op: *op,
                        lhs: Box::new(lhs),
                        rhs: Box::new(rhs),
                    };
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, FrontendError> {
        match self.peek() {
            Some(TokenKind::Not) => {
                self.bump()?;
                let operand = self.unary()?;
                Ok(Expr::Unary {
                    op: UnOp::Not,
                    operand: Box::new(operand),
                })
            }
            // Unary minus desugars to 0 - e; there is no NEG instruction and
            // no unary-minus symbol, so both certifiers see the same shape.
            Some(TokenKind::Minus) => {
                self.bump()?;
                let operand = self.unary()?;
                Ok(Expr::Binary {
                    op: BinOp::Sub,
                    lhs: Box::new(Expr::IntLit(0)),
                    rhs: Box::new(operand),
                })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, FrontendError> {
        match self.peek() {
            Some(TokenKind::IntLit(_)) => {
                let tok = self.bump()?;
                match tok.kind {
                    TokenKind::IntLit(v) => Ok(Expr::IntLit(v)),
                    _ => unreachable!(),
                }
            }
            Some(TokenKind::FloatLit(_)) => {
                let tok = self.bump()?;
                match tok.kind {
                    TokenKind::FloatLit(v) => Ok(Expr::FloatLit(v)),
                    _ => unreachable!(),
                }
            }
            Some(TokenKind::LParen) => {
                self.bump()?;
                if self.at_type_start() {
                    return Err(self.err_here("explicit type casts are not supported"));
                }
                let inner = self.expr()?;
                self.expect(TokenKind::RParen, "')'")?;
                Ok(inner)
            }
            Some(TokenKind::Ident(_)) => {
                let name = self.ident("identifier")?;
                match self.peek() {
                    Some(TokenKind::LParen) => {
                        self.bump()?;
                        let arg = self.expr()?;
                        self.expect(TokenKind::RParen, "')'")?;
                        Ok(Expr::Call {
                            callee: name,
                            arg: Box::new(arg),
                        })
                    }
                    Some(TokenKind::LBracket) => {
                        self.bump()?;
                        let index = self.expr()?;
                        self.check_index_form(&index)?;
                        self.expect(TokenKind::RBracket, "']'")?;
                        Ok(Expr::ArrayIndex {
                            base: name,
                            index: Box::new(index),
                        })
                    }
                    Some(TokenKind::Dot) => {
                        self.bump()?;
                        let field = self.ident("field name")?;
                        Ok(Expr::FieldAccess { base: name, field })
                    }
                    _ => Ok(Expr::Var(name)),
                }
            }
            _ => Err(self.err_here("expected an expression")),
        }
    }
}

/// Post-parse checks: name resolution, main placement, recursion, and
/// return-path coverage.
fn validate(program: &Program) -> Result<(), FrontendError> {
    let sem = |message: String| FrontendError::Semantic { message };

    match program.functions.last() {
        Some(f) if f.name == "main" => {}
        Some(_) => {
            return Err(sem("main must be the last declared function".into()));
        }
        None => return Err(sem("program has no functions; main is required".into())),
    }
    let mut func_names = HashSet::new();
    for f in &program.functions {
        if !func_names.insert(f.name.clone()) {
            return Err(sem(format!("duplicate function name {}", f.name)));
        }
        if f.name == "main" && !std::ptr::eq(f, program.functions.last().unwrap()) {
            return Err(sem("main must be the last declared function".into()));
        }
    }

    let mut scope = ScopeChecker::default();
    for (ty, name) in &program.globals {
        check_decl_type(ty)?;
        scope.declare_global(name)?;
    }
    for (idx, f) in program.functions.iter().enumerate() {
        scope.enter_function();
        if let Some((_, pname)) = &f.param {
            scope.declare(pname)?;
        }
        scope.check_block(&f.body, &program.functions[..idx], &f.name)?;
        scope.exit_function();
        if !block_terminates(&f.body) {
            return Err(sem(format!(
                "function {} does not return on every terminating path",
                f.name
            )));
        }
    }
    Ok(())
}

fn check_decl_type(ty: &Type) -> Result<(), FrontendError> {
    if let Type::Struct { fields } = ty {
        let mut seen = HashSet::new();
        for (name, fty) in fields {
            if !fty.is_builtin() {
                return Err(FrontendError::Semantic {
                    message: "struct fields must have built-in types".into(),
                });
            }
            if !seen.insert(name.clone()) {
                return Err(FrontendError::Semantic {
                    message: format!("duplicate struct field {name}"),
                });
            }
        }
    }
    Ok(())
}

#[derive(Default)]
struct ScopeChecker {
    globals: HashSet<String>,
    blocks: Vec<HashSet<String>>,
}

impl ScopeChecker {
    fn declare_global(&mut self, name: &str) -> Result<(), FrontendError> {
        if !self.globals.insert(name.to_string()) {
            return Err(FrontendError::Semantic {
                message: format!("duplicate declaration of {name}"),
            });
        }
        Ok(())
    }

    fn enter_function(&mut self) {
        self.blocks.push(HashSet::new());
    }

    fn exit_function(&mut self) {
        self.blocks.pop();
    }

    fn visible(&self, name: &str) -> bool {
        self.globals.contains(name) || self.blocks.iter().any(|b| b.contains(name))
    }

    fn declare(&mut self, name: &str) -> Result<(), FrontendError> {
        if self.visible(name) {
            return Err(FrontendError::Semantic {
                message: format!("declaration of {name} shadows an existing variable"),
            });
        }
        self.blocks.last_mut().unwrap().insert(name.to_string());
        Ok(())
    }

    fn check_block(
        &mut self,
        stmts: &[Stmt],
        callable: &[FuncDef],
        current: &str,
    ) -> Result<(), FrontendError> {
        for stmt in stmts {
            match stmt {
                Stmt::VarDecl { ty, name } => {
                    check_decl_type(ty)?;
                    self.declare(name)?;
                }
                Stmt::Assign { target, value } => {
                    self.check_expr(target, callable, current)?;
                    self.check_expr(value, callable, current)?;
                }
                Stmt::If { cond, then_body } => {
                    self.check_expr(cond, callable, current)?;
                    self.blocks.push(HashSet::new());
                    self.check_block(then_body, callable, current)?;
                    self.blocks.pop();
                }
                Stmt::IfElse {
                    cond,
                    then_body,
                    else_body,
                } => {
                    self.check_expr(cond, callable, current)?;
                    self.blocks.push(HashSet::new());
                    self.check_block(then_body, callable, current)?;
                    self.blocks.pop();
                    self.blocks.push(HashSet::new());
                    self.check_block(else_body, callable, current)?;
                    self.blocks.pop();
                }
                Stmt::While { cond, body } => {
                    self.check_expr(cond, callable, current)?;
                    self.blocks.push(HashSet::new());
                    self.check_block(body, callable, current)?;
                    self.blocks.pop();
                }
                Stmt::Return(e) => self.check_expr(e, callable, current)?,
                Stmt::CallStmt(e) => self.check_expr(e, callable, current)?,
            }
        }
        Ok(())
    }

    fn check_expr(
        &self,
        expr: &Expr,
        callable: &[FuncDef],
        current: &str,
    ) -> Result<(), FrontendError> {
        let use_of = |name: &str| -> Result<(), FrontendError> {
            if self.visible(name) {
                Ok(())
            } else {
                Err(FrontendError::Semantic {
                    message: format!("use of undeclared variable {name}"),
                })
            }
        };
        match expr {
            Expr::IntLit(_) | Expr::FloatLit(_) => Ok(()),
            Expr::Var(name) => use_of(name),
            Expr::Unary { operand, .. } => self.check_expr(operand, callable, current),
            Expr::Binary { lhs, rhs, .. } => {
                self.check_expr(lhs, callable, current)?;
                self.check_expr(rhs, callable, current)
            }
            Expr::ArrayIndex { base, index } => {
                use_of(base)?;
                self.check_expr(index, callable, current)
            }
            Expr::FieldAccess { base, .. } => use_of(base),
            Expr::Call { callee, arg } => {
                if callee == current {
                    return Err(FrontendError::Semantic {
                        message: format!("recursive call of {callee} is not allowed"),
                    });
                }
                if !callable.iter().any(|f| &f.name == callee) {
                    return Err(FrontendError::Semantic {
                        message: format!(
                            "call of {callee} before its declaration (calls may only target earlier functions)"
                        ),
                    });
                }
                self.check_expr(arg, callable, current)
            }
        }
    }
}

/// A block terminates when its final statement is a return, or an
/// if/else whose branches both terminate.
fn block_terminates(stmts: &[Stmt]) -> bool {
    match stmts.last() {
        Some(Stmt::Return(_)) => true,
        Some(Stmt::IfElse {
            then_body,
            else_body,
            ..
        }) => block_terminates(then_body) && block_terminates(else_body),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn minimal_program() {
        let p = parse("int main() { return 0; }").unwrap();
        assert_eq!(p.functions.len(), 1);
        let f = &p.functions[0];
        assert_eq!(f.name, "main");
        assert_eq!(f.body, vec![Stmt::Return(Expr::IntLit(0))]);
    }

    #[test]
    fn recursion_is_rejected() {
        let err = parse("int f(int x) { return f(x); } int main() { return 0; }").unwrap_err();
        assert!(err.to_string().contains("recursive"));
    }

    #[test]
    fn forward_calls_are_rejected() {
        let err = parse(
            "int f(int x) { return g(x); } int g(int x) { return x; } int main() { return 0; }",
        )
        .unwrap_err();
        assert!(err.to_string().contains("before its declaration"));
    }

    #[test]
    fn use_before_declaration_is_rejected() {
        let err = parse("int main() { x = 1; int x; return 0; }").unwrap_err();
        assert!(err.to_string().contains("undeclared"));
    }

    #[test]
    fn main_must_be_last() {
        let err = parse("int main() { return 0; } int f(int x) { return x; }").unwrap_err();
        assert!(err.to_string().contains("last"));
    }

    #[test]
    fn missing_return_path() {
        let err = parse("int main() { int x; x = 1; }").unwrap_err();
        assert!(err.to_string().contains("return"));
    }

    #[test]
    fn if_else_return_paths_count() {
        assert!(parse(
            "int main(int a) { if (a) { return 1; } else { return 2; } }"
        )
        .is_ok());
        assert!(parse("int main(int a) { if (a) { return 1; } }").is_err());
    }

    #[test]
    fn precedence_follows_c() {
        let p = parse("int main(int a) { return 1 + a * 2 < 3 & 4; }").unwrap();
        let Stmt::Return(e) = &p.functions[0].body[0] else {
            panic!()
        };
        // ((1 + (a * 2)) < 3) & 4
        let Expr::Binary { op: BinOp::BitAnd, lhs, .. } = e else {
            panic!("expected & at top, got {e:?}")
        };
        let Expr::Binary { op: BinOp::Lt, lhs, .. } = lhs.as_ref() else {
            panic!()
        };
        assert!(matches!(lhs.as_ref(), Expr::Binary { op: BinOp::Add, .. }));
    }

    #[test]
    fn unary_minus_desugars() {
        let p = parse("int main() { return -3; }").unwrap();
        let Stmt::Return(e) = &p.functions[0].body[0] else {
            panic!()
        };
        assert_eq!(
            e,
            &Expr::Binary {
                op: BinOp::Sub,
                lhs: Box::new(Expr::IntLit(0)),
                rhs: Box::new(Expr::IntLit(3)),
            }
        );
    }

    #[test]
    fn empty_blocks_are_rejected() {
        assert!(parse("int main() { if (1) { } return 0; }").is_err());
    }

    #[test]
    fn pointers_and_casts_are_rejected() {
        assert!(parse("int main() { int *x; return 0; }").is_err());
        assert!(parse("int main() { int x; x = (int) 1; return 0; }").is_err());
    }

    #[test]
    fn complex_index_expressions_are_rejected() {
        assert!(parse("int main() { int a[3]; return a[1 + 1]; }").is_err());
    }

    #[test]
    fn struct_declarations_parse() {
        let p = parse(
            "int main() { struct { int a; float b; } s; s.a = 1; return s.a; }",
        )
        .unwrap();
        let Stmt::VarDecl { ty, .. } = &p.functions[0].body[0] else {
            panic!()
        };
        assert!(matches!(ty, Type::Struct { fields } if fields.len() == 2));
    }

    #[test]
    fn shadowing_is_rejected() {
        assert!(parse("int main() { int x; while (1) { int x; x = 1; } return 0; }").is_err());
    }
}
