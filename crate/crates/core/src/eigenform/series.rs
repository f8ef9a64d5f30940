//! Exact q-expansions: Delta, Eisenstein series and their products, both as
//! big integers and as residues modulo NTT primes.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::ntt::Ntt;
use crate::error::{Error, Result};

/// Default cap on big-integer series length.
pub const DEFAULT_SERIES_CAP: usize = 200_000;

/// Exact integer q-expansion, coefficient `i` at `q^i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSeries {
    coeffs: Vec<BigInt>,
    /// Factor by which the classical normalization was scaled to clear
    /// denominators (always 1 for the series produced here).
    pub scale: BigInt,
}

impl ExactSeries {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        ExactSeries {
            coeffs,
            scale: BigInt::one(),
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, i: usize) -> &BigInt {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Product truncated to the shorter length.
    pub fn mul_truncated(&self, other: &ExactSeries) -> ExactSeries {
        let n = self.len().min(other.len());
        let mut out = vec![BigInt::zero(); n];
        for (i, a) in self.coeffs[..n].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..n - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ExactSeries {
            coeffs: out,
            scale: &self.scale * &other.scale,
        }
    }
}

/// Eisenstein weights needed for `Delta * E_{k-12}`, with the integer
/// constant `c_k` in `E_k = 1 + c_k sum sigma_{k-1}(n) q^n`.
pub const EISENSTEIN_CONSTANTS: [(u32, i64); 5] = [(4, 240), (6, -504), (8, 480), (10, -264), (14, -24)];

pub fn eisenstein_constant(k: u32) -> Result<i64> {
    EISENSTEIN_CONSTANTS
        .iter()
        .find(|&&(w, _)| w == k)
        .map(|&(_, c)| c)
        .ok_or_else(|| {
            Error::InvalidArgument(format!("Eisenstein weight {k} not in {{4, 6, 8, 10, 14}}"))
        })
}

/// Generalized pentagonal expansion of `prod (1 - q^n)` up to `q^{n-1}`, as
/// sparse `(exponent, sign)` pairs.
pub fn euler_product_terms(n: usize) -> Vec<(usize, i8)> {
    let mut out = vec![(0usize, 1i8)];
    let mut k = 1usize;
    loop {
        let e1 = k * (3 * k - 1) / 2;
        if e1 >= n {
            break;
        }
        let s = if k % 2 == 1 { -1 } else { 1 };
        out.push((e1, s));
        let e2 = k * (3 * k + 1) / 2;
        if e2 < n {
            out.push((e2, s));
        }
        k += 1;
    }
    out.sort_unstable();
    out
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::MemoryBudget {
            requested: n,
            cap,
        })
    } else {
        Ok(())
    }
}

/// `q prod (1 - q^n)^24` to `n` coefficients.
pub fn delta_series(n: usize) -> Result<ExactSeries> {
    delta_series_capped(n, DEFAULT_SERIES_CAP)
}

pub fn delta_series_capped(n: usize, cap: usize) -> Result<ExactSeries> {
    if n < 2 {
        return Err(Error::InvalidArgument("delta_series needs N >= 2".into()));
    }
    check_cap(n, cap)?;
    let p = euler_product_terms(n - 1);
    // Power recurrence for f = P^m with P_0 = 1:
    //   j f_j = sum_{k=1}^{j} ((m + 1) k - j) P_k f_{j-k}
    let m = 24i64;
    let len = n - 1;
    let mut f = vec![BigInt::zero(); len];
    f[0] = BigInt::one();
    for j in 1..len {
        let mut acc = BigInt::zero();
        for &(k, s) in p.iter().skip(1) {
            if k > j {
                break;
            }
            let w = ((m + 1) * k as i64 - j as i64) * s as i64;
            if w != 0 {
                acc += &f[j - k] * w;
            }
        }
        f[j] = acc / j as i64;
    }
    let mut coeffs = Vec::with_capacity(n);
    coeffs.push(BigInt::zero());
    coeffs.extend(f);
    Ok(ExactSeries::new(coeffs))
}

/// Divisor sums `sigma_{e}(i)` for `i < n` by a divisor sieve (entry 0 is 0).
fn sigma_table_big(n: usize, e: u32) -> Vec<BigInt> {
    let mut s = vec![BigInt::zero(); n];
    for d in 1..n {
        let de = BigInt::from(d).pow(e);
        let mut m = d;
        while m < n {
            s[m] += &de;
            m += d;
        }
    }
    s
}

/// `E_k` to `n` coefficients, `k` in `{4, 6, 8, 10, 14}`.
pub fn eisenstein_series(k: u32, n: usize) -> Result<ExactSeries> {
    eisenstein_series_capped(k, n, DEFAULT_SERIES_CAP)
}

pub fn eisenstein_series_capped(k: u32, n: usize, cap: usize) -> Result<ExactSeries> {
    let c = eisenstein_constant(k)?;
    if n < 1 {
        return Err(Error::InvalidArgument("eisenstein_series needs N >= 1".into()));
    }
    check_cap(n, cap)?;
    let mut coeffs = sigma_table_big(n, k - 1);
    coeffs[0] = BigInt::one();
    for a in coeffs.iter_mut().skip(1) {
        *a *= c;
    }
    Ok(ExactSeries::new(coeffs))
}

/// Integer coefficients `a(1..=n)` of the normalized weight-`weight`
/// eigenform, computed with big integers.
pub fn eigenform_coefficients_bigint(weight: u32, n: usize) -> Result<Vec<BigInt>> {
    let delta = delta_series_capped(n + 1, usize::MAX)?;
    let series = if weight == 12 {
        delta
    } else {
        let e = eisenstein_series_capped(weight - 12, n + 1, usize::MAX)?;
        delta.mul_truncated(&e)
    };
    Ok(series.coeffs()[1..=n].to_vec())
}

/// Residues of `a(1..=n)` modulo the prime of `ntt`, in plain (not
/// Montgomery) form.
pub fn eigenform_coefficients_mod(ntt: &Ntt, weight: u32, n: usize) -> Vec<u64> {
    let m = &ntt.m;
    // prod (1 - q^j)^3 = sum_k (-1)^k (2k + 1) q^{k(k+1)/2}
    let mut eta3 = vec![0u64; n];
    let mut k = 0usize;
    while k * (k + 1) / 2 < n {
        let v = (2 * k + 1) as i64 * if k % 2 == 0 { 1 } else { -1 };
        eta3[k * (k + 1) / 2] = m.from_i64(v);
        k += 1;
    }
    let eta6 = ntt.square(&eta3, n);
    drop(eta3);
    let eta12 = ntt.square(&eta6, n);
    drop(eta6);
    let mut eta24 = ntt.square(&eta12, n);
    drop(eta12);
    if weight != 12 {
        let e = eisenstein_mod(ntt, weight - 12, n);
        eta24 = ntt.multiply(&eta24, &e, n);
    }
    // a(i + 1) is coefficient i of eta^24 * E
    eta24.into_iter().map(|x| m.from_mont(x)).collect()
}

fn eisenstein_mod(ntt: &Ntt, k: u32, n: usize) -> Vec<u64> {
    let m = &ntt.m;
    let c = m.from_i64(eisenstein_constant(k).expect("supported Eisenstein weight"));
    let mut s = vec![0u64; n];
    for d in 1..n {
        let de = m.pow(m.to_mont(d as u64), (k - 1) as u64);
        let mut j = d;
        while j < n {
            s[j] = m.add(s[j], de);
            j += d;
        }
    }
    s[0] = m.one();
    for x in s.iter_mut().skip(1) {
        *x = m.mul(*x, c);
    }
    s
}
