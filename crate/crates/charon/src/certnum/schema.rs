//! The construct-to-exponent numbering schema.
//!
//! Every certified construct maps to a fixed exponent shape. Plain markers
//! use a bare prime; parameterized constructs nest their parameters into a
//! power tower. Both certifiers build towers through this module, so the two
//! sides produce byte-identical symbolic output whenever they agree.

use super::ExpTower;

// Type symbols.
pub const TS_SHORT: u64 = 2;
pub const TS_INT: u64 = 3;
pub const TS_FLOAT: u64 = 5;
pub const TS_UNKNOWN: u64 = 7;

// Exponent bases for parameterized constructs.
pub const BASE_CONSTANT: u64 = 11;
pub const BASE_VAR_DEF: u64 = 13;
pub const BASE_VAR_USAGE: u64 = 17;
pub const BASE_PARAM_DEF: u64 = 19;
pub const BASE_FUNC_CALL: u64 = 29;
pub const BASE_FUNC_START: u64 = 31;

// Bare markers.
pub const SYM_FUNC_ARG: u64 = 23;
pub const SYM_FUNC_END: u64 = 37;
pub const SYM_RETURN: u64 = 41;
pub const SYM_COND: u64 = 43;
pub const SYM_IF_START: u64 = 47;
pub const SYM_IF_END: u64 = 53;
pub const SYM_ELSE_END: u64 = 59;
pub const SYM_WHILE_START: u64 = 61;
pub const SYM_WHILE_END: u64 = 67;
pub const SYM_HALT: u64 = 157;

// Operator symbols.
pub const OP_ASSIGN: u64 = 71;
pub const OP_NOT: u64 = 73;
pub const OP_ADD: u64 = 79;
pub const OP_SUB: u64 = 83;
pub const OP_MULT: u64 = 89;
pub const OP_DIV: u64 = 97;
pub const OP_MOD: u64 = 101;
pub const OP_LT: u64 = 103;
pub const OP_GT: u64 = 107;
pub const OP_EQ: u64 = 109;
pub const OP_NEQ: u64 = 113;
pub const OP_AND: u64 = 127;
pub const OP_OR: u64 = 131;
pub const OP_LSHIFT: u64 = 137;
pub const OP_RSHIFT: u64 = 139;
pub const OP_BITAND: u64 = 149;
pub const OP_BITOR: u64 = 151;

pub const ALL_OPERATORS: [u64; 17] = [
    OP_ASSIGN, OP_NOT, OP_ADD, OP_SUB, OP_MULT, OP_DIV, OP_MOD, OP_LT, OP_GT, OP_EQ, OP_NEQ,
    OP_AND, OP_OR, OP_LSHIFT, OP_RSHIFT, OP_BITAND, OP_BITOR,
];

/// Numeric literal constants shift by one to dodge the identity exponent;
/// negative constants keep their value (and stay symbolic-only). Float
/// constants have no encoding in the integer scheme, so they ride on their
/// IEEE-754 bit pattern offset past the 32-bit integer range, keeping the two
/// literal kinds disjoint even after tower normalization.
pub const FLOAT_CONST_OFFSET: i64 = 1 << 32;

/// A construct descriptor: one row of the symbol table with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Construct {
    IntConstant(i32),
    FloatConstant(f32),
    /// Variable definition; one type symbol per 4-byte element slot.
    VarDef { element_symbols: Vec<u64> },
    /// Function parameter definition (base 19 instead of 13).
    ParamDef { element_symbols: Vec<u64> },
    /// Scalar, constant-indexed array, or struct-field access.
    VarUsageStatic { vp: u64, byte_offset: u64 },
    /// Array access indexed by a variable.
    VarUsageDynamic { vp: u64, index_vp: u64 },
    FuncArg,
    FuncCall { fp: u64 },
    FuncStart { return_symbol: u64, num_params: u64 },
    FuncEnd,
    Return,
    Conditional,
    IfStart,
    IfEnd,
    ElseEnd,
    WhileStart,
    WhileEnd,
    Operator(u64),
    Halt,
}

/// Exponent of `c'` for an integer constant: `c + 1` when nonnegative.
pub fn int_constant_exponent(c: i32) -> i64 {
    if c >= 0 {
        c as i64 + 1
    } else {
        c as i64
    }
}

/// Exponent for a float constant: bit pattern shifted past the int range.
pub fn float_constant_exponent(f: f32) -> i64 {
    f.to_bits() as i64 + FLOAT_CONST_OFFSET + 1
}

/// Fold element type symbols into a right-nested tower: `s1^(s2^(...^(sk)))`.
pub fn type_symbol_tower(symbols: &[u64]) -> ExpTower {
    assert!(!symbols.is_empty());
    let mut tower = ExpTower::leaf(symbols[symbols.len() - 1] as i64);
    for &s in symbols[..symbols.len() - 1].iter().rev() {
        tower = ExpTower::pow(s, tower);
    }
    tower
}

/// The exact exponent tower for a construct.
pub fn schema_exponent(construct: &Construct) -> ExpTower {
    use Construct::*;
    match construct {
        IntConstant(c) => ExpTower::pow(BASE_CONSTANT, ExpTower::leaf(int_constant_exponent(*c))),
        FloatConstant(f) => {
            ExpTower::pow(BASE_CONSTANT, ExpTower::leaf(float_constant_exponent(*f)))
        }
        VarDef { element_symbols } => {
            ExpTower::pow(BASE_VAR_DEF, type_symbol_tower(element_symbols))
        }
        ParamDef { element_symbols } => {
            ExpTower::pow(BASE_PARAM_DEF, type_symbol_tower(element_symbols))
        }
        VarUsageStatic { vp, byte_offset } => {
            // mem.offset = 2^(os + 1); scalars (os = 0) collapse to 2.
            let mem = if *byte_offset == 0 {
                ExpTower::leaf(2)
            } else {
                ExpTower::pow(2, ExpTower::leaf(*byte_offset as i64 + 1))
            };
            ExpTower::pow(BASE_VAR_USAGE, ExpTower::pow(*vp, mem))
        }
        VarUsageDynamic { vp, index_vp } => {
            let mem = ExpTower::pow(3, ExpTower::leaf(*index_vp as i64));
            ExpTower::pow(BASE_VAR_USAGE, ExpTower::pow(*vp, mem))
        }
        FuncArg => ExpTower::leaf(SYM_FUNC_ARG as i64),
        FuncCall { fp } => ExpTower::pow(BASE_FUNC_CALL, ExpTower::leaf(*fp as i64)),
        FuncStart {
            return_symbol,
            num_params,
        } => {
            // type_symbol ^ (num_params + 1); the +1 dodges the identity
            // exponent, and a parameterless function collapses to the bare
            // type symbol.
            let exp = if *num_params == 0 {
                ExpTower::leaf(*return_symbol as i64)
            } else {
                ExpTower::pow(*return_symbol, ExpTower::leaf(*num_params as i64 + 1))
            };
            ExpTower::pow(BASE_FUNC_START, exp)
        }
        FuncEnd => ExpTower::leaf(SYM_FUNC_END as i64),
        Return => ExpTower::leaf(SYM_RETURN as i64),
        Conditional => ExpTower::leaf(SYM_COND as i64),
        IfStart => ExpTower::leaf(SYM_IF_START as i64),
        IfEnd => ExpTower::leaf(SYM_IF_END as i64),
        ElseEnd => ExpTower::leaf(SYM_ELSE_END as i64),
        WhileStart => ExpTower::leaf(SYM_WHILE_START as i64),
        WhileEnd => ExpTower::leaf(SYM_WHILE_END as i64),
        Operator(sym) => ExpTower::leaf(*sym as i64),
        Halt => ExpTower::leaf(SYM_HALT as i64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_usage_matches_worked_example() {
        // vp = 11, byte offset 0: 17^(11^2), i.e. 17^121.
        let t = schema_exponent(&Construct::VarUsageStatic {
            vp: 11,
            byte_offset: 0,
        });
        assert_eq!(t, ExpTower::pow(17, ExpTower::pow(11, ExpTower::leaf(2))));
        assert_eq!(t.normalize(), ExpTower::pow(17, ExpTower::leaf(121)));
    }

    #[test]
    fn call_of_second_function() {
        let t = schema_exponent(&Construct::FuncCall { fp: 3 });
        assert_eq!(t.normalize(), ExpTower::leaf(29i64.pow(3)));
    }

    #[test]
    fn constant_zero_shifts_to_one() {
        let t = schema_exponent(&Construct::IntConstant(0));
        assert_eq!(t, ExpTower::pow(11, ExpTower::leaf(1)));
    }

    #[test]
    fn negative_constant_keeps_value() {
        let t = schema_exponent(&Construct::IntConstant(-7));
        assert_eq!(t, ExpTower::pow(11, ExpTower::leaf(-7)));
    }

    #[test]
    fn float_and_int_constants_never_collide() {
        // Smallest float exponent sits past the largest int exponent.
        let small_float = schema_exponent(&Construct::FloatConstant(f32::from_bits(0)));
        let big_int = schema_exponent(&Construct::IntConstant(i32::MAX));
        match (small_float, big_int) {
            (ExpTower::Pow(11, f), ExpTower::Pow(11, i)) => match (*f, *i) {
                (ExpTower::Leaf(fv), ExpTower::Leaf(iv)) => assert!(fv > iv),
                _ => panic!("expected leaves"),
            },
            _ => panic!("expected base-11 towers"),
        }
    }

    #[test]
    fn parameterless_int_function_start() {
        let t = schema_exponent(&Construct::FuncStart {
            return_symbol: TS_INT,
            num_params: 0,
        });
        assert_eq!(t, ExpTower::pow(31, ExpTower::leaf(3)));
    }

    #[test]
    fn one_param_function_start() {
        let t = schema_exponent(&Construct::FuncStart {
            return_symbol: TS_INT,
            num_params: 1,
        });
        assert_eq!(t, ExpTower::pow(31, ExpTower::pow(3, ExpTower::leaf(2))));
    }

    #[test]
    fn distinct_construct_classes_have_distinct_exponents() {
        // One small representative per class; normalized exponents must be
        // pairwise distinct for canonical inversion to be well-defined.
        let samples = vec![
            Construct::IntConstant(1),
            Construct::FloatConstant(1.5),
            Construct::VarDef {
                element_symbols: vec![TS_INT],
            },
            Construct::ParamDef {
                element_symbols: vec![TS_INT],
            },
            Construct::VarUsageStatic {
                vp: 2,
                byte_offset: 0,
            },
            Construct::VarUsageDynamic { vp: 2, index_vp: 3 },
            Construct::FuncArg,
            Construct::FuncCall { fp: 2 },
            Construct::FuncStart {
                return_symbol: TS_INT,
                num_params: 0,
            },
            Construct::FuncEnd,
            Construct::Return,
            Construct::Conditional,
            Construct::IfStart,
            Construct::IfEnd,
            Construct::ElseEnd,
            Construct::WhileStart,
            Construct::WhileEnd,
            Construct::Operator(OP_ASSIGN),
            Construct::Halt,
        ];
        let normalized: Vec<_> = samples
            .iter()
            .map(|c| schema_exponent(c).normalize())
            .collect();
        for i in 0..normalized.len() {
            for j in i + 1..normalized.len() {
                assert_ne!(normalized[i], normalized[j], "{i} vs {j}");
            }
        }
    }
}
