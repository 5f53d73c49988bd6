//! Deterministic pretty-printer: 4-space indent, one statement per line.
//!
//! `parse(print(p)) == p` holds for every accepted program; the canonical
//! reconstruction relies on this printer for byte-stable output.

use std::fmt::Write;

use super::ast::*;

pub fn print_program(program: &Program) -> String {
    let mut out = String::new();
    for (ty, name) in &program.globals {
        writeln!(out, "{}", decl_text(ty, name)).unwrap();
    }
    for (i, f) in program.functions.iter().enumerate() {
        if i > 0 || !program.globals.is_empty() {
            out.push('\n');
        }
        print_func(&mut out, f);
    }
    out
}

fn print_func(out: &mut String, f: &FuncDef) {
    let param = match &f.param {
        Some((ty, name)) => format!("{} {}", builtin_text(ty), name),
        None => String::new(),
    };
    writeln!(out, "{} {}({}) {{", builtin_text(&f.ret_type), f.name, param).unwrap();
    print_block(out, &f.body, 1);
    out.push_str("}\n");
}

fn print_block(out: &mut String, stmts: &[Stmt], depth: usize) {
    let pad = "    ".repeat(depth);
    for stmt in stmts {
        match stmt {
            Stmt::VarDecl { ty, name } => {
                writeln!(out, "{pad}{}", decl_text(ty, name)).unwrap();
            }
            Stmt::Assign { target, value } => {
                writeln!(out, "{pad}{} = {};", expr_top(target), expr_top(value)).unwrap();
            }
            Stmt::If { cond, then_body } => {
                writeln!(out, "{pad}if ({}) {{", expr_top(cond)).unwrap();
                print_block(out, then_body, depth + 1);
                writeln!(out, "{pad}}}").unwrap();
            }
            Stmt::IfElse {
                cond,
                then_body,
                else_body,
            } => {
                writeln!(out, "{pad}if ({}) {{", expr_top(cond)).unwrap();
                print_block(out, then_body, depth + 1);
                writeln!(out, "{pad}}} else {{").unwrap();
                print_block(out, else_body, depth + 1);
                writeln!(out, "{pad}}}").unwrap();
            }
            Stmt::While { cond, body } => {
                writeln!(out, "{pad}while ({}) {{", expr_top(cond)).unwrap();
                print_block(out, body, depth + 1);
                writeln!(out, "{pad}}}").unwrap();
            }
            Stmt::Return(e) => {
                writeln!(out, "{pad}return {};", expr_top(e)).unwrap();
            }
            Stmt::CallStmt(e) => {
                writeln!(out, "{pad}{};", expr_top(e)).unwrap();
            }
        }
    }
}

fn decl_text(ty: &Type, name: &str) -> String {
    match ty {
        Type::Array { elem, len } => format!("{} {}[{}];", builtin_text(elem), name, len),
        Type::Struct { fields } => {
            let fields = fields
                .iter()
                .map(|(fname, fty)| format!("{} {};", builtin_text(fty), fname))
                .collect::<Vec<_>>()
                .join(" ");
            format!("struct {{ {fields} }} {name};")
        }
        builtin => format!("{} {};", builtin_text(builtin), name),
    }
}

fn builtin_text(ty: &Type) -> &'static str {
    match ty {
        Type::Short => "short",
        Type::Int => "int",
        Type::Float => "float",
        Type::Unknown => "__unknown_type__",
        _ => panic!("aggregate type in builtin position"),
    }
}

/// Expression at statement level: operands are parenthesized when compound,
/// the top operator is bare.
fn expr_top(e: &Expr) -> String {
    match e {
        Expr::Binary { op, lhs, rhs } => {
            format!("{} {} {}", expr_atom(lhs), op.text(), expr_atom(rhs))
        }
        Expr::Unary { operand, .. } => format!("!{}", expr_atom(operand)),
        other => expr_atom(other),
    }
}

fn expr_atom(e: &Expr) -> String {
    match e {
        Expr::IntLit(v) => v.to_string(),
        Expr::FloatLit(v) => format_f32(*v),
        Expr::Var(name) => name.clone(),
        Expr::ArrayIndex { base, index } => format!("{}[{}]", base, expr_top(index)),
        Expr::FieldAccess { base, field } => format!("{base}.{field}"),
        Expr::Call { callee, arg } => format!("{}({})", callee, expr_top(arg)),
        compound => format!("({})", expr_top(compound)),
    }
}

/// Format a finite nonnegative f32 so that re-parsing recovers the exact
/// bit pattern and the lexer accepts it (digits and a dot, no exponent).
pub fn format_f32(f: f32) -> String {
    assert!(f.is_finite() && f >= 0.0, "literals are finite and nonnegative");
    let short = format!("{f:?}");
    if !short.contains(['e', 'E']) {
        return short;
    }
    exact_decimal(f)
}

/// Exact decimal expansion of a binary fraction; finite by construction.
fn exact_decimal(f: f32) -> String {
    use num_bigint::BigUint;
    let bits = f.to_bits();
    let raw_exp = ((bits >> 23) & 0xff) as i32;
    let frac = bits & 0x7f_ffff;
    let (mantissa, exp) = if raw_exp == 0 {
        (frac as u64, -149i32) // subnormal
    } else {
        ((frac | 0x80_0000) as u64, raw_exp - 127 - 23)
    };
    let m = BigUint::from(mantissa);
    if exp >= 0 {
        return format!("{}.0", m << exp as usize);
    }
    let shift = (-exp) as usize;
    let int_part = &m >> shift;
    let mask = (BigUint::from(1u32) << shift) - BigUint::from(1u32);
    let mut rem = &m & &mask;
    let mut digits = String::new();
    while rem != BigUint::from(0u32) {
        rem *= 10u32;
        digits.push_str(&(&rem >> shift).to_string());
        rem &= mask.clone();
    }
    if digits.is_empty() {
        digits.push('0');
    }
    format!("{int_part}.{digits}")
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn roundtrip(src: &str) {
        let p1 = parse(src).unwrap();
        let text = print_program(&p1);
        let p2 = parse(&text).unwrap();
        assert_eq!(p1, p2, "printer round-trip failed for:\n{text}");
        // Printing is idempotent on its own output.
        assert_eq!(text, print_program(&p2));
    }

    #[test]
    fn roundtrips_basic_programs() {
        roundtrip("int main() { return 0; }");
        roundtrip("int main(int a) { return a + 1 * 2; }");
        roundtrip(
            "float f(float x) { return x * 2.5; }\nint main() { int y; y = 3; return y; }",
        );
        roundtrip(
            "int main(int n) { int a[3]; int i; i = 0; while (i < 3) { a[i] = i; i = i + 1; } return a[2]; }",
        );
        roundtrip(
            "int main() { struct { int a; short b; } s; s.a = 1; s.b = 2; if (s.a > s.b) { return 1; } else { return 0; } }",
        );
        roundtrip("int main() { return -(3 + 4); }");
        roundtrip("int main() { return !1; }");
    }

    #[test]
    fn float_formatting_round_trips_bit_exactly() {
        for f in [0.0f32, 1.0, 3.5, 0.1, 1e-7, 16777216.0, 3.4e38, 1.1754944e-38, 1e-45] {
            let text = format_f32(f);
            assert!(text.contains('.'), "needs a dot: {text}");
            assert!(!text.contains('e'));
            let back: f32 = text.parse().unwrap();
            assert_eq!(back.to_bits(), f.to_bits(), "{f} -> {text} -> {back}");
        }
    }
}
