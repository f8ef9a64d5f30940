//! Exact integer arithmetic: factorization, Kronecker symbols, multiplicative
//! functions and square-free enumeration.

mod factor;
mod sieve;
mod symbol;

pub use factor::{factorize, is_prime, Factorization};
pub use sieve::{divisor_count_table, primes_up_to, SmallestPrimeFactor, SquarefreeStream};
pub use symbol::{jacobi, kronecker};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

/// Largest `e` with `p^e | n`; `n` must be nonzero.
pub fn valuation(mut n: u64, p: u64) -> u32 {
    debug_assert!(n != 0 && p > 1);
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

pub fn mobius(n: u64) -> Result<i8> {
    Ok(factorize(n)?.mobius())
}

pub fn euler_phi(n: u64) -> Result<u64> {
    Ok(factorize(n)?.euler_phi())
}

pub fn divisor_count(n: u64) -> Result<u64> {
    Ok(factorize(n)?.divisor_count())
}

/// `sigma_k(n) = sum_{d | n} d^k`, exact.
pub fn sigma_k(n: u64, k: u32) -> Result<BigUint> {
    let f = factorize(n)?;
    let mut acc = BigUint::one();
    for &(p, e) in f.factors() {
        let pk = BigUint::from(p).pow(k);
        let mut term = BigUint::one();
        let mut sum = BigUint::zero();
        for _ in 0..=e {
            sum += &term;
            term *= &pk;
        }
        acc *= sum;
    }
    Ok(acc)
}

/// Writes an odd `l` as `l1 * l2^2` with `l1` square-free.
pub fn split_squarefree(l: u64) -> Result<(u64, u64)> {
    if l == 0 || l % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "split_squarefree expects an odd positive integer, got {l}"
        )));
    }
    let f = factorize(l)?;
    let mut l1 = 1u64;
    let mut l2 = 1u64;
    for &(p, e) in f.factors() {
        if e % 2 == 1 {
            l1 *= p;
        }
        l2 *= p.pow(e / 2);
    }
    Ok((l1, l2))
}

pub fn is_squarefree(n: u64) -> Result<bool> {
    Ok(factorize(n)?.is_squarefree())
}

pub fn is_perfect_square(n: u64) -> bool {
    let r = isqrt(n);
    r * r == n
}

pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = ((n as f64).sqrt() as u64).min(u32::MAX as u64);
    while r * r > n {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}
