//! Prime number supply backed by a growable Eratosthenes sieve.

use std::sync::{Mutex, OnceLock};

static CACHE: OnceLock<Mutex<Vec<u64>>> = OnceLock::new();

fn cache() -> &'static Mutex<Vec<u64>> {
    CACHE.get_or_init(|| Mutex::new(sieve_count(1 << 10)))
}

/// The n-th prime, 1-based: `nth_prime(1) == 2`.
pub fn nth_prime(n: usize) -> u64 {
    assert!(n >= 1, "prime index is 1-based");
    let mut primes = cache().lock().unwrap();
    if primes.len() < n {
        *primes = sieve_count(n.max(primes.len() * 2));
    }
    primes[n - 1]
}

/// 1-based index of `p` in the prime sequence, or `None` if `p` is not prime.
pub fn prime_index(p: u64) -> Option<usize> {
    let mut primes = cache().lock().unwrap();
    while *primes.last().unwrap() < p {
        let len = primes.len();
        *primes = sieve_count(len * 2);
    }
    primes.binary_search(&p).ok().map(|i| i + 1)
}

pub fn is_prime(p: u64) -> bool {
    prime_index(p).is_some()
}

/// Sieve at least `count` primes.
fn sieve_count(count: usize) -> Vec<u64> {
    // Rosser's bound: p_n < n(ln n + ln ln n) for n >= 6.
    let n = count.max(6) as f64;
    let bound = (n * (n.ln() + n.ln().ln())).ceil() as usize + 16;
    let mut composite = vec![false; bound + 1];
    let mut primes = Vec::with_capacity(count);
    for i in 2..=bound {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= bound {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: primality by trial division.
    fn slow_is_prime(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn small_primes() {
        assert_eq!(nth_prime(1), 2);
        assert_eq!(nth_prime(2), 3);
        assert_eq!(nth_prime(5), 11);
    }

    #[test]
    fn thousandth_prime_matches_trial_division() {
        let mut count = 0;
        let mut n = 1;
        while count < 1000 {
            n += 1;
            if slow_is_prime(n) {
                count += 1;
            }
        }
        assert_eq!(n, 7919);
        assert_eq!(nth_prime(1000), 7919);
    }

    #[test]
    fn grows_past_initial_sieve() {
        let p = nth_prime(100_000);
        assert_eq!(p, 1_299_709);
        assert_eq!(prime_index(p), Some(100_000));
        assert_eq!(prime_index(p + 1), None);
    }
}
