//! Symbolic certificates: ordered lists of `prime^tower` factors.
//!
//! A certificate for a program with n certified constructs is the formal
//! product `p_1^e_1 * p_2^e_2 * ... * p_n^e_n`, where `p_i` is the i-th prime
//! and `e_i` encodes the i-th construct. The exponents are power towers that
//! overflow any machine integer for real programs, so factors are kept
//! symbolic and only evaluated numerically for tiny oracles.

pub mod numeric;
pub mod primes;
pub mod schema;

use std::fmt;

use thiserror::Error;

pub use numeric::{cert_evaluate, cert_factorize};
pub use primes::{nth_prime, prime_index};

#[derive(Debug, Error)]
pub enum CertError {
    #[error("certificate parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("exponent tower contains a zero leaf")]
    ZeroLeaf,
    #[error("tower base {0} is not prime")]
    NonPrimeBase(u64),
    #[error("factor {position} has prime {prime}, expected {expected}")]
    PositionPrimeMismatch {
        position: usize,
        prime: u64,
        expected: u64,
    },
    #[error("certificate evaluation exceeds {0}-bit budget")]
    OverflowBudget(u64),
    #[error("negative exponent {0} has no integer value; certificate is symbolic-only")]
    NegativeExponent(i64),
    #[error("{0} is not a product of consecutive prime powers")]
    NonConsecutivePrimes(num_bigint::BigUint),
    #[error("cannot factorize {0}: value must be at least 2")]
    FactorizeDomain(num_bigint::BigUint),
}

/// A right-nested power tower, e.g. `13^(3^(7^(3)))`.
///
/// Leaves may be negative (negative source constants); zero is forbidden.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExpTower {
    Leaf(i64),
    Pow(u64, Box<ExpTower>),
}

impl ExpTower {
    pub fn leaf(v: i64) -> ExpTower {
        debug_assert!(v != 0, "zero leaf is not a valid schema exponent");
        ExpTower::Leaf(v)
    }

    pub fn pow(base: u64, exp: ExpTower) -> ExpTower {
        ExpTower::Pow(base, Box::new(exp))
    }

    /// Collapse `Pow` nodes to `Leaf` wherever the value fits in an `i64`.
    /// Towers too large to evaluate stay symbolic, which is what makes
    /// `17^(2^2)` and `17^4` compare equal while `13^(3^343)` stays intact.
    pub fn normalize(&self) -> ExpTower {
        match self {
            ExpTower::Leaf(v) => ExpTower::Leaf(*v),
            ExpTower::Pow(base, exp) => {
                let exp = exp.normalize();
                if let ExpTower::Leaf(e) = exp {
                    if e >= 1 && e <= u32::MAX as i64 {
                        if let Some(v) = base.checked_pow(e as u32) {
                            if v <= i64::MAX as u64 {
                                return ExpTower::Leaf(v as i64);
                            }
                        }
                    }
                }
                ExpTower::Pow(*base, Box::new(exp))
            }
        }
    }
}

impl fmt::Display for ExpTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpTower::Leaf(v) => write!(f, "{v}"),
            ExpTower::Pow(base, exp) => write!(f, "{base}^({exp})"),
        }
    }
}

/// One multiplicative factor: the position-th prime raised to a tower.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    /// 1-based construct index.
    pub position: usize,
    /// Always `nth_prime(position)`.
    pub prime: u64,
    pub exponent: ExpTower,
}

/// An ordered factor list with consecutive positions 1..=n.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Certificate {
    pub factors: Vec<Factor>,
}

impl Certificate {
    /// Build a certificate from exponents in construct order.
    pub fn from_exponents(exponents: Vec<ExpTower>) -> Certificate {
        let factors = exponents
            .into_iter()
            .enumerate()
            .map(|(i, exponent)| Factor {
                position: i + 1,
                prime: nth_prime(i + 1),
                exponent,
            })
            .collect();
        Certificate { factors }
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn normalize(&self) -> Certificate {
        Certificate {
            factors: self
                .factors
                .iter()
                .map(|f| Factor {
                    position: f.position,
                    prime: f.prime,
                    exponent: f.exponent.normalize(),
                })
                .collect(),
        }
    }

    /// First position whose normalized exponent differs, if any.
    /// Length differences report the first position past the shorter list.
    pub fn first_divergence(&self, other: &Certificate) -> Option<usize> {
        let n = self.len().min(other.len());
        for i in 0..n {
            let a = self.factors[i].exponent.normalize();
            let b = other.factors[i].exponent.normalize();
            if a != b {
                return Some(i + 1);
            }
        }
        if self.len() != other.len() {
            return Some(n + 1);
        }
        None
    }
}

/// Structural equality after tower normalization; never evaluates the
/// certificate numerically.
pub fn cert_equal(a: &Certificate, b: &Certificate) -> bool {
    a.len() == b.len() && a.first_divergence(b).is_none()
}

/// Canonical text form: `2^(43) * 3^(13^(3)) * ...`
pub fn cert_to_string(cert: &Certificate) -> String {
    cert.factors
        .iter()
        .map(|f| format!("{}^({})", f.prime, f.exponent))
        .collect::<Vec<_>>()
        .join(" * ")
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&cert_to_string(self))
    }
}

/// Parse the canonical text form back into a certificate.
///
/// Grammar: `cert := factor (" * " factor)*`, `factor := INT "^(" tower ")"`,
/// `tower := INT | INT "^(" tower ")"`. Factor primes must be the consecutive
/// primes 2, 3, 5, ...; tower bases must be prime; leaves must be nonzero
/// (negative values are legal inside towers only).
pub fn cert_parse(text: &str) -> Result<Certificate, CertError> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    let mut factors = Vec::new();
    loop {
        let start = p.pos;
        let prime = p.int()?;
        if prime <= 0 {
            return Err(CertError::Parse {
                offset: start,
                message: format!("factor prime must be positive, got {prime}"),
            });
        }
        p.expect(b"^(")?;
        let exponent = p.tower()?;
        p.expect(b")")?;
        let position = factors.len() + 1;
        let expected = nth_prime(position);
        if prime as u64 != expected {
            return Err(CertError::PositionPrimeMismatch {
                position,
                prime: prime as u64,
                expected,
            });
        }
        factors.push(Factor {
            position,
            prime: prime as u64,
            exponent,
        });
        if p.at_end() {
            break;
        }
        p.expect(b" * ")?;
    }
    Ok(Certificate { factors })
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn expect(&mut self, what: &[u8]) -> Result<(), CertError> {
        if self.bytes[self.pos..].starts_with(what) {
            self.pos += what.len();
            Ok(())
        } else {
            Err(CertError::Parse {
                offset: self.pos,
                message: format!("expected {:?}", String::from_utf8_lossy(what)),
            })
        }
    }

    fn int(&mut self) -> Result<i64, CertError> {
        let start = self.pos;
        let mut end = self.pos;
        if end < self.bytes.len() && self.bytes[end] == b'-' {
            end += 1;
        }
        while end < self.bytes.len() && self.bytes[end].is_ascii_digit() {
            end += 1;
        }
        let text = std::str::from_utf8(&self.bytes[start..end]).unwrap();
        let value: i64 = text.parse().map_err(|_| CertError::Parse {
            offset: start,
            message: "expected integer".into(),
        })?;
        self.pos = end;
        Ok(value)
    }

    fn tower(&mut self) -> Result<ExpTower, CertError> {
        let start = self.pos;
        let value = self.int()?;
        if self.bytes[self.pos..].starts_with(b"^(") {
            self.pos += 2;
            if value < 2 {
                return Err(CertError::Parse {
                    offset: start,
                    message: format!("tower base must be at least 2, got {value}"),
                });
            }
            if !primes::is_prime(value as u64) {
                return Err(CertError::NonPrimeBase(value as u64));
            }
            let exp = self.tower()?;
            self.expect(b")")?;
            Ok(ExpTower::Pow(value as u64, Box::new(exp)))
        } else {
            if value == 0 {
                return Err(CertError::ZeroLeaf);
            }
            Ok(ExpTower::Leaf(value))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(v: i64) -> ExpTower {
        ExpTower::leaf(v)
    }

    fn pow(b: u64, e: ExpTower) -> ExpTower {
        ExpTower::pow(b, e)
    }

    #[test]
    fn single_marker_factor_prints_canonically() {
        let cert = Certificate::from_exponents(vec![leaf(43)]);
        assert_eq!(cert_to_string(&cert), "2^(43)");
    }

    #[test]
    fn struct_definition_factor_prints_as_nested_tower() {
        // int / __unknown_type__ / int struct definition.
        let tower = pow(13, pow(3, pow(7, leaf(3))));
        let cert = Certificate::from_exponents(vec![tower]);
        assert_eq!(cert_to_string(&cert), "2^(13^(3^(7^(3))))");
    }

    #[test]
    fn parse_inverts_to_string() {
        let cert = Certificate::from_exponents(vec![
            pow(13, pow(3, pow(7, leaf(3)))),
            pow(31, leaf(3)),
            pow(17, pow(2, leaf(2))),
            leaf(-4),
            leaf(157),
        ]);
        let text = cert_to_string(&cert);
        let back = cert_parse(&text).unwrap();
        assert_eq!(back, cert);
        assert_eq!(cert_to_string(&back), text);
    }

    #[test]
    fn parse_rejects_wrong_positional_prime() {
        assert!(matches!(
            cert_parse("3^(43)"),
            Err(CertError::PositionPrimeMismatch { .. })
        ));
    }

    #[test]
    fn parse_rejects_zero_leaf_and_composite_base() {
        assert!(matches!(cert_parse("2^(0)"), Err(CertError::ZeroLeaf)));
        assert!(matches!(
            cert_parse("2^(4^(3))"),
            Err(CertError::NonPrimeBase(4))
        ));
    }

    #[test]
    fn equality_is_position_sensitive() {
        let a = Certificate::from_exponents(vec![leaf(43), leaf(47)]);
        let b = Certificate::from_exponents(vec![leaf(47), leaf(43)]);
        assert!(cert_equal(&a, &a.clone()));
        assert!(!cert_equal(&a, &b));
        assert_eq!(a.first_divergence(&b), Some(1));
    }

    #[test]
    fn normalization_collapses_small_towers() {
        let a = Certificate::from_exponents(vec![pow(17, pow(2, leaf(2)))]);
        let b = Certificate::from_exponents(vec![pow(17, leaf(4))]);
        assert!(cert_equal(&a, &b));
    }

    #[test]
    fn huge_towers_stay_symbolic() {
        // 3^343 overflows i64, so the outer Pow must survive normalization.
        let t = pow(13, pow(3, leaf(343)));
        assert_eq!(t.normalize(), pow(13, pow(3, leaf(343))));
    }
}
