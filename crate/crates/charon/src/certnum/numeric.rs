//! Exact numeric oracles: certificate evaluation and factorization.
//!
//! Real certificates overflow any budget almost immediately; these routines
//! exist so the symbolic machinery can be cross-checked on tiny inputs.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::{nth_prime, CertError, Certificate, ExpTower, Factor};

/// Evaluate a certificate to its exact integer, refusing to grow past
/// `bit_budget` bits. Negative exponents have no integer value and error.
pub fn cert_evaluate(cert: &Certificate, bit_budget: u64) -> Result<BigUint, CertError> {
    let mut product = BigUint::one();
    for factor in &cert.factors {
        let exp = eval_tower(&factor.exponent, bit_budget)?;
        let contribution = checked_pow(&BigUint::from(factor.prime), &exp, bit_budget)?;
        product *= contribution;
        if product.bits() > bit_budget {
            return Err(CertError::OverflowBudget(bit_budget));
        }
    }
    Ok(product)
}

fn eval_tower(tower: &ExpTower, bit_budget: u64) -> Result<BigUint, CertError> {
    match tower {
        ExpTower::Leaf(v) if *v < 0 => Err(CertError::NegativeExponent(*v)),
        ExpTower::Leaf(v) => Ok(BigUint::from(*v as u64)),
        ExpTower::Pow(base, exp) => {
            let e = eval_tower(exp, bit_budget)?;
            checked_pow(&BigUint::from(*base), &e, bit_budget)
        }
    }
}

fn checked_pow(base: &BigUint, exp: &BigUint, bit_budget: u64) -> Result<BigUint, CertError> {
    if base.is_zero() {
        return Ok(BigUint::zero());
    }
    let exp_u64 = exp
        .to_u64()
        .ok_or(CertError::OverflowBudget(bit_budget))?;
    // bits(base^e) ~= e * bits(base); refuse before allocating.
    let bits = base.bits().saturating_mul(exp_u64);
    if bits > bit_budget.saturating_add(64) {
        return Err(CertError::OverflowBudget(bit_budget));
    }
    let exp_u32 = u32::try_from(exp_u64).map_err(|_| CertError::OverflowBudget(bit_budget))?;
    let value = base.pow(exp_u32);
    if value.bits() > bit_budget {
        return Err(CertError::OverflowBudget(bit_budget));
    }
    Ok(value)
}

/// Recover a certificate from an integer that is a product of consecutive
/// prime powers. Exponents come back as plain leaves; the tower structure is
/// reconstructed by the canonicalizer's pattern knowledge, not here.
pub fn cert_factorize(n: &BigUint) -> Result<Certificate, CertError> {
    if *n < BigUint::from(2u32) {
        return Err(CertError::FactorizeDomain(n.clone()));
    }
    let mut rest = n.clone();
    let mut factors = Vec::new();
    let mut position = 0;
    while !rest.is_one() {
        position += 1;
        let prime = BigUint::from(nth_prime(position));
        let mut multiplicity: i64 = 0;
        while (&rest % &prime).is_zero() {
            rest /= &prime;
            multiplicity += 1;
        }
        if multiplicity == 0 {
            return Err(CertError::NonConsecutivePrimes(n.clone()));
        }
        factors.push(Factor {
            position,
            prime: nth_prime(position),
            exponent: ExpTower::Leaf(multiplicity),
        });
    }
    Ok(Certificate { factors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certnum::cert_equal;

    fn cert(exps: Vec<ExpTower>) -> Certificate {
        Certificate::from_exponents(exps)
    }

    #[test]
    fn single_square_evaluates() {
        let c = cert(vec![ExpTower::leaf(2)]);
        assert_eq!(cert_evaluate(&c, 64).unwrap(), BigUint::from(4u32));
    }

    #[test]
    fn godel_example_round_trips() {
        // 2^4 * 3^3 * 5^7 = 16 * 27 * 78,125 = 33,750,000
        let c = cert(vec![ExpTower::leaf(4), ExpTower::leaf(3), ExpTower::leaf(7)]);
        let n = cert_evaluate(&c, 1 << 10).unwrap();
        assert_eq!(n, BigUint::from(33_750_000u64));
        let back = cert_factorize(&n).unwrap();
        assert!(cert_equal(&back, &c));
    }

    #[test]
    fn larger_product_matches_direct_computation() {
        let c = cert(vec![ExpTower::leaf(3), ExpTower::leaf(3), ExpTower::leaf(103)]);
        let n = cert_evaluate(&c, 1 << 20).unwrap();
        let oracle = BigUint::from(2u32).pow(3) * BigUint::from(3u32).pow(3)
            * BigUint::from(5u32).pow(103);
        assert_eq!(n, oracle);
    }

    #[test]
    fn astronomically_large_tower_overflows() {
        let c = cert(vec![ExpTower::pow(13, ExpTower::pow(3, ExpTower::leaf(343)))]);
        assert!(matches!(
            cert_evaluate(&c, 1 << 20),
            Err(CertError::OverflowBudget(_))
        ));
    }

    #[test]
    fn negative_exponent_is_symbolic_only() {
        let c = cert(vec![ExpTower::pow(11, ExpTower::leaf(-5))]);
        assert!(matches!(
            cert_evaluate(&c, 1 << 10),
            Err(CertError::NegativeExponent(-5))
        ));
    }

    #[test]
    fn factorize_rejects_prime_gaps() {
        // 2^2 * 7 skips 3 and 5.
        assert!(matches!(
            cert_factorize(&BigUint::from(28u32)),
            Err(CertError::NonConsecutivePrimes(_))
        ));
        assert!(matches!(
            cert_factorize(&BigUint::one()),
            Err(CertError::FactorizeDomain(_))
        ));
    }

    #[test]
    fn four_factorizes_to_single_square() {
        let c = cert_factorize(&BigUint::from(4u32)).unwrap();
        assert_eq!(c.factors.len(), 1);
        assert_eq!(c.factors[0].exponent, ExpTower::Leaf(2));
    }
}
