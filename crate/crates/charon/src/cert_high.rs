//! High-level certification: a post-order walk of the syntax tree.
//!
//! Expressions certify operands before operators, mirroring the order in
//! which the compiler emits instructions. After the walk, every variable and
//! parameter definition factor moves to the front of the certificate
//! (parameters first, then variables, each group in declaration order) and
//! the positional primes are recomputed. The relative order of all other
//! factors is preserved; the hoisted prefix is what makes certificates
//! invertible.

use crate::certnum::schema::{self, Construct};
use crate::certnum::{Certificate, ExpTower};
use crate::compiler::{assign_primes, PrimeAssignment};
use crate::frontend::bound::{BExpr, BStmt, BoundProgram, Place, Proj, VarId};
use crate::frontend::UsageInfo;

/// A factor plus its hoisting class.
enum Emitted {
    ParamDef(ExpTower),
    VarDef(ExpTower),
    Body(ExpTower),
}

struct Certifier<'a> {
    program: &'a BoundProgram,
    usage: &'a UsageInfo,
    primes: &'a PrimeAssignment,
    out: Vec<Emitted>,
}

/// Certificate of a bound program; the prime environment is derived by the
/// same first-principles rules the compiler uses.
pub fn cert_high(program: &BoundProgram) -> Certificate {
    let usage = UsageInfo::compute(program);
    let primes = assign_primes(program, &usage);
    cert_high_with(program, &usage, &primes)
}

pub fn cert_high_with(
    program: &BoundProgram,
    usage: &UsageInfo,
    primes: &PrimeAssignment,
) -> Certificate {
    let mut c = Certifier {
        program,
        usage,
        primes,
        out: Vec::new(),
    };
    for &gid in &program.globals {
        c.def_factor(gid);
    }
    for (id, f) in program.functions.iter().enumerate() {
        let num_params = f.param.iter().count() as u64;
        c.emit(Construct::FuncStart {
            return_symbol: f.ret_type.symbol(),
            num_params,
        });
        if let Some(pid) = f.param {
            c.def_factor(pid);
        }
        c.body(&f.body);
        c.emit(Construct::FuncEnd);
        let _ = id;
    }
    c.emit(Construct::Halt);

    // Hoist definitions: parameters first, then variables, then the body.
    let mut params = Vec::new();
    let mut vars = Vec::new();
    let mut body = Vec::new();
    for e in c.out {
        match e {
            Emitted::ParamDef(t) => params.push(t),
            Emitted::VarDef(t) => vars.push(t),
            Emitted::Body(t) => body.push(t),
        }
    }
    params.extend(vars);
    params.extend(body);
    Certificate::from_exponents(params)
}

impl<'a> Certifier<'a> {
    fn emit(&mut self, construct: Construct) {
        self.out.push(Emitted::Body(schema::schema_exponent(&construct)));
    }

    fn def_factor(&mut self, id: VarId) {
        let element_symbols = self.usage.element_symbols(self.program, id);
        let is_param = self.program.vars[id].is_param;
        let construct = if is_param {
            Construct::ParamDef { element_symbols }
        } else {
            Construct::VarDef { element_symbols }
        };
        let tower = schema::schema_exponent(&construct);
        self.out.push(if is_param {
            Emitted::ParamDef(tower)
        } else {
            Emitted::VarDef(tower)
        });
    }

    fn vp(&self, id: VarId) -> u64 {
        self.primes.var_vp[id]
            .expect("used variable without a prime; usage analysis out of sync")
    }

    fn body(&mut self, stmts: &[BStmt]) {
        for stmt in stmts {
            match stmt {
                BStmt::Decl(id) => self.def_factor(*id),
                BStmt::Assign { target, value } => {
                    self.place(target);
                    self.expr(value);
                    self.emit(Construct::Operator(schema::OP_ASSIGN));
                }
                BStmt::If { cond, then_body } => {
                    self.emit(Construct::Conditional);
                    self.expr(cond);
                    self.emit(Construct::IfStart);
                    self.body(then_body);
                    self.emit(Construct::IfEnd);
                }
                BStmt::IfElse {
                    cond,
                    then_body,
                    else_body,
                } => {
                    self.emit(Construct::Conditional);
                    self.expr(cond);
                    self.emit(Construct::IfStart);
                    self.body(then_body);
                    self.emit(Construct::IfEnd);
                    self.body(else_body);
                    self.emit(Construct::ElseEnd);
                }
                BStmt::While { cond, body } => {
                    self.emit(Construct::Conditional);
                    self.expr(cond);
                    self.emit(Construct::WhileStart);
                    self.body(body);
                    self.emit(Construct::WhileEnd);
                }
                BStmt::Return(e) => {
                    self.expr(e);
                    self.emit(Construct::Return);
                }
                BStmt::CallStmt(e) => self.expr(e),
            }
        }
    }

    fn place(&mut self, place: &Place) {
        let vp = self.vp(place.var);
        let construct = match place.proj {
            Proj::None => Construct::VarUsageStatic { vp, byte_offset: 0 },
            Proj::ConstIndex(i) => Construct::VarUsageStatic {
                vp,
                byte_offset: 4 * i as u64,
            },
            Proj::Field(i) => Construct::VarUsageStatic {
                vp,
                byte_offset: 4 * i as u64,
            },
            Proj::VarIndex(iv) => Construct::VarUsageDynamic {
                vp,
                index_vp: self.vp(iv),
            },
        };
        self.emit(construct);
    }

    fn expr(&mut self, expr: &BExpr) {
        match expr {
            BExpr::Int(v) => self.emit(Construct::IntConstant(*v)),
            BExpr::Float(v) => self.emit(Construct::FloatConstant(*v)),
            BExpr::Read(place) => self.place(place),
            BExpr::Unary { op, operand } => {
                self.expr(operand);
                self.emit(Construct::Operator(op.symbol()));
            }
            BExpr::Binary { op, lhs, rhs } => {
                self.expr(lhs);
                self.expr(rhs);
                self.emit(Construct::Operator(op.symbol()));
            }
            BExpr::Call { func, arg } => {
                self.expr(arg);
                self.emit(Construct::FuncArg);
                self.emit(Construct::FuncCall {
                    fp: self.primes.func_fp[*func],
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certnum::{cert_equal, cert_to_string};
    use crate::frontend::{bind, parse};

    fn cert_of(src: &str) -> Certificate {
        cert_high(&bind(&parse(src).unwrap()).unwrap())
    }

    fn towers(cert: &Certificate) -> Vec<String> {
        cert.factors.iter().map(|f| f.exponent.to_string()).collect()
    }

    #[test]
    fn return_zero_shape() {
        let cert = cert_of("int main() { return 0; }");
        // func start, constant 0, return, func end, HALT
        assert_eq!(
            towers(&cert),
            vec!["31^(3)", "11^(1)", "41", "37", "157"]
        );
    }

    #[test]
    fn while_fragment_prefix() {
        // while (x < 10) { x = x + 1; } with vp(x) = 2 certifies as
        // 43, 17^(2^2), 11^(11), 103, 61, ... 67.
        let cert = cert_of(
            "int main() { int x; x = 0; while (x < 10) { x = x + 1; } return x; }",
        );
        let t = towers(&cert);
        let cond_at = t.iter().position(|s| s == "43").unwrap();
        assert_eq!(
            &t[cond_at..cond_at + 5],
            &["43", "17^(2^(2))", "11^(11)", "103", "61"]
        );
        assert_eq!(t[t.len() - 4], "67");
    }

    #[test]
    fn definitions_hoist_to_the_front() {
        let cert = cert_of(
            "int f(int p) { int x; x = p; return x; }\n\
             int main() { int y; y = f(1); return y; }",
        );
        let t = towers(&cert);
        // param p, then vars x and y, then the first function start.
        assert_eq!(t[0], "19^(3)");
        assert_eq!(t[1], "13^(3)");
        assert_eq!(t[2], "13^(3)");
        assert!(t[3].starts_with("31^("));
    }

    #[test]
    fn dead_variable_changes_only_its_definition_factor() {
        let live = cert_of("int main() { int a; a = 1; return a; }");
        let dead = cert_of("int main() { int a; int unused_slot; a = 1; return a; }");
        assert_eq!(dead.len(), live.len() + 1);
        // The extra factor is an unknown-typed definition right after a's.
        assert_eq!(dead.factors[1].exponent.to_string(), "13^(7)");
        // Everything after the definition prefix is unchanged.
        let live_body: Vec<_> = towers(&live)[1..].to_vec();
        let dead_body: Vec<_> = towers(&dead)[2..].to_vec();
        assert_eq!(live_body, dead_body);
    }

    #[test]
    fn fig13_array_and_struct_programs_certify_identically() {
        let p1 = cert_of(
            "int main() {\n\
                 int buffer[3];\n\
                 buffer[0] = 2;\n\
                 buffer[2] = 7;\n\
                 return buffer[0] + buffer[2];\n\
             }",
        );
        let p2 = cert_of(
            "int main() {\n\
                 struct { int first; int second; int third; } record;\n\
                 record.first = 2;\n\
                 record.third = 7;\n\
                 return record.first + record.third;\n\
             }",
        );
        assert!(cert_equal(&p1, &p2));
        assert_eq!(cert_to_string(&p1), cert_to_string(&p2));
        // The definition factor records int / unknown / int.
        assert_eq!(cert_to_string(&p1).split(" * ").next().unwrap(), "2^(13^(3^(7^(3))))");
    }

    #[test]
    fn post_order_discipline() {
        let cert = cert_of("int main() { return 1 + 2; }");
        assert_eq!(
            towers(&cert),
            vec!["31^(3)", "11^(2)", "11^(3)", "79", "41", "37", "157"]
        );
    }

    #[test]
    fn call_emits_arg_then_call_factor() {
        let cert = cert_of(
            "int id_fn(int x) { return x; }\nint main() { return id_fn(5); }",
        );
        let t = towers(&cert);
        let arg_at = t.iter().position(|s| s == "23").unwrap();
        assert_eq!(t[arg_at - 1], "11^(6)");
        assert_eq!(t[arg_at + 1], "29^(2)");
    }
}
