//! Quadratic Gauss-type sums
//! `G_k(n) = ((1 - i)/2 + (-1/n)(1 + i)/2) sum_{a mod n} (a/n) e(ak/n)`
//! and the twisted Poisson summation identity they enter.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::analysis::WindowSpec;
use crate::arith::{factorize, jacobi};
use crate::error::{Error, Result};

/// Largest modulus accepted by the brute-force route.
pub const BRUTE_FORCE_LIMIT: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaussRoute {
    ClosedForm,
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussSumValue {
    pub k: i64,
    pub n: u64,
    pub value: Complex64,
    pub route: GaussRoute,
}

fn check_odd(n: u64) -> Result<()> {
    if n == 0 || n % 2 == 0 {
        return Err(Error::InvalidArgument(format!("Gauss sums need odd n >= 1, got {n}")));
    }
    Ok(())
}

/// `(1 - i)/2 + (-1/n)(1 + i)/2`: `1` if `n = 1 mod 4`, `-i` otherwise.
fn prefactor(n: u64) -> Complex64 {
    if n % 4 == 1 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, -1.0)
    }
}

/// Direct `O(n)` summation.
pub fn gauss_sum_brute(k: i64, n: u64) -> Result<Complex64> {
    check_odd(n)?;
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "brute-force Gauss sum limited to n <= {BRUTE_FORCE_LIMIT}, got {n}"
        )));
    }
    let chars: Vec<i8> = (0..n).map(|a| jacobi(a as i64, n)).collect();
    Ok(brute_with_chars(k, n, &chars))
}

fn brute_with_chars(k: i64, n: u64, chars: &[i8]) -> Complex64 {
    let step = k.rem_euclid(n as i64) as u64;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut r = 0u64;
    for &c in chars {
        if c != 0 {
            let t = 2.0 * PI * r as f64 / n as f64;
            acc += Complex64::new(t.cos(), t.sin()) * c as f64;
        }
        r += step;
        if r >= n {
            r -= n;
        }
    }
    prefactor(n) * acc
}

/// `G_k(n)` for all `k` in `ks`, sharing the character table.
pub fn gauss_sums_brute(ks: &[i64], n: u64) -> Result<Vec<Complex64>> {
    check_odd(n)?;
    let chars: Vec<i8> = (0..n).map(|a| jacobi(a as i64, n)).collect();
    Ok(ks.iter().map(|&k| brute_with_chars(k, n, &chars)).collect())
}

/// `G_k(p^beta)` for an odd prime `p`; always real.
pub fn gauss_sum_prime_power(k: i64, p: u64, beta: u32) -> f64 {
    if beta == 0 {
        return 1.0;
    }
    // alpha = v_p(k), infinite for k = 0
    let mut alpha = u32::MAX;
    let mut unit = k;
    if k != 0 {
        alpha = 0;
        while unit % p as i64 == 0 {
            unit /= p as i64;
            alpha += 1;
        }
    }
    let pf = p as f64;
    if beta <= alpha {
        if beta % 2 == 1 {
            0.0
        } else {
            pf.powi(beta as i32 - 1) * (pf - 1.0)
        }
    } else if beta == alpha + 1 {
        let pa = pf.powi(alpha as i32);
        if beta % 2 == 0 {
            -pa
        } else {
            jacobi(unit, p) as f64 * pa * pf.sqrt()
        }
    } else {
        0.0
    }
}

/// Closed form through multiplicativity and the prime-power table.
pub fn gauss_sum(k: i64, n: u64) -> Result<GaussSumValue> {
    check_odd(n)?;
    let f = factorize(n)?;
    let mut v = 1.0;
    for &(p, beta) in f.factors() {
        v *= gauss_sum_prime_power(k, p, beta);
        if v == 0.0 {
            break;
        }
    }
    Ok(GaussSumValue {
        k,
        n,
        value: Complex64::new(v, 0.0),
        route: GaussRoute::ClosedForm,
    })
}

/// Both sides of the Poisson identity
/// `sum_{d odd} (d/n) Phi(d/Z) = (Z/2n)(2/n) sum_k (-1)^k G_k(n) Phi_hat(kZ/2n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
    /// Largest `|k|` used on the right.
    pub k_max: u64,
    /// Size of the last block of `k`-terms added before stopping.
    pub tail_estimate: f64,
}

/// Stopping threshold for the `k`-sum: the last `Z`-unit of `y = kZ/2n`
/// must contribute less than this.
const POISSON_TAIL: f64 = 1e-10;

/// Evaluates both sides independently. `k_limit` caps `|k|`; without it the
/// sum runs until a full unit of `y` adds less than `1e-10`.
pub fn poisson_check(window: &WindowSpec, n: u64, z: f64, k_limit: Option<u64>) -> Result<PoissonCheck> {
    check_odd(n)?;
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::InvalidArgument(format!("Poisson scale Z must be positive, got {z}")));
    }
    // left: d runs over odd integers with lo < d/Z < hi
    let d_lo = (window.lo * z).floor().max(1.0) as u64;
    let d_hi = (window.hi * z).ceil() as u64;
    let mut lhs = 0.0;
    for d in d_lo..=d_hi {
        if d % 2 == 1 {
            let c = jacobi(d as i64, n);
            if c != 0 {
                lhs += c as f64 * window.eval(d as f64 / z).re;
            }
        }
    }
    // right
    let scale = z / (2.0 * n as f64) * jacobi(2, n) as f64;
    let term = |k: i64| -> Result<f64> {
        let g = gauss_sum(k, n)?.value.re;
        if g == 0.0 {
            return Ok(0.0);
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        Ok(sign * g * window.fourier_type(k as f64 * z / (2.0 * n as f64))?.re)
    };
    let mut rhs = term(0)?;
    // at least one unit of y and one full period of k -> G_k(n), so a block
    // cannot vanish for arithmetic reasons alone
    let block = ((2.0 * n as f64 / z).ceil() as u64).max(n);
    let cap = k_limit.unwrap_or(u64::MAX);
    let mut k = 0u64;
    let mut tail = f64::INFINITY;
    while k < cap {
        let end = (k + block).min(cap);
        let mut block_sum = 0.0;
        let mut block_abs = 0.0;
        for j in k + 1..=end {
            let t = term(j as i64)? + term(-(j as i64))?;
            block_sum += t;
            block_abs += t.abs();
        }
        rhs += block_sum;
        k = end;
        tail = block_abs * scale.abs();
        if k_limit.is_none() && tail < POISSON_TAIL && k as f64 * z / (2.0 * n as f64) > 4.0 {
            break;
        }
        if k as f64 * z / (2.0 * n as f64) > 2000.0 {
            return Err(Error::CutoffInsufficient {
                cutoff: k,
                tail_bound: tail,
                tolerance: POISSON_TAIL,
                suggested: 2 * k,
            });
        }
    }
    rhs *= scale;
    Ok(PoissonCheck {
        lhs,
        rhs,
        defect: (lhs - rhs).abs(),
        k_max: k,
        tail_estimate: tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::default_window;
    use crate::arith::{euler_phi, gcd, is_perfect_square};

    #[test]
    fn brute_force_examples() {
        assert!((gauss_sum_brute(0, 9).unwrap() - 6.0).norm() < 1e-12);
        assert!((gauss_sum_brute(1, 1).unwrap() - 1.0).norm() < 1e-12);
        assert!((gauss_sum_brute(1, 3).unwrap() - 3f64.sqrt()).norm() < 1e-12);
        assert!(gauss_sum_brute(1, 4).is_err());
        assert!(gauss_sum(1, 0).is_err());
    }

    #[test]
    fn closed_form_matches_brute_force() {
        for n in (1..=301u64).step_by(2) {
            let ks: Vec<i64> = (-30..=30).collect();
            let brute = gauss_sums_brute(&ks, n).unwrap();
            for (&k, b) in ks.iter().zip(&brute) {
                let c = gauss_sum(k, n).unwrap().value;
                assert!((c - b).norm() < 1e-9, "k={k} n={n}: {c} vs {b}");
            }
        }
        assert!((gauss_sum(3, 45).unwrap().value - gauss_sum_brute(3, 45).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn prime_power_cases() {
        // beta >= alpha + 2
        assert_eq!(gauss_sum_prime_power(3, 3, 3), 0.0);
        // beta <= alpha even
        assert_eq!(gauss_sum_prime_power(9, 3, 2), 6.0);
        // beta <= alpha odd
        assert_eq!(gauss_sum_prime_power(9, 3, 1), 0.0);
        // beta = alpha + 1 even
        assert_eq!(gauss_sum_prime_power(5, 5, 2), -5.0);
        // beta = alpha + 1 odd: (2/5) sqrt 5
        assert!((gauss_sum_prime_power(2, 5, 1) + 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(gauss_sum_prime_power(0, 7, 2), 42.0);
        assert_eq!(gauss_sum_prime_power(0, 7, 3), 0.0);
    }

    #[test]
    fn modulus_and_integrality() {
        for n in [15u64, 105, 231, 1001] {
            for k in [1i64, -2, 4, 7] {
                if gcd(k.unsigned_abs(), n) != 1 {
                    continue;
                }
                let v = gauss_sum(k, n).unwrap().value;
                assert!((v.norm() - (n as f64).sqrt()).abs() < 1e-9);
                let sq = v.norm_sqr();
                assert!((sq - sq.round()).abs() < 1e-9 && sq >= 0.0);
            }
        }
    }

    #[test]
    fn multiplicativity() {
        for m in (1..60u64).step_by(2) {
            for n in (1..60u64).step_by(2) {
                if gcd(m, n) != 1 {
                    continue;
                }
                for k in -5..=5 {
                    let lhs = gauss_sum_brute(k, m * n).unwrap();
                    let rhs = gauss_sum_brute(k, m).unwrap() * gauss_sum_brute(k, n).unwrap();
                    assert!((lhs - rhs).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn diagonal_squares() {
        for n in (1..=3001u64).step_by(2) {
            let want = if is_perfect_square(n) { euler_phi(n).unwrap() as f64 } else { 0.0 };
            assert_eq!(gauss_sum(0, n).unwrap().value.re, want, "n={n}");
        }
    }

    #[test]
    fn poisson_identity_small() {
        let w = default_window();
        for (n, z) in [(1u64, 50.0), (3, 50.0), (15, 200.0)] {
            let c = poisson_check(&w, n, z, None).unwrap();
            assert!(c.defect < 1e-6, "n={n} Z={z}: {c:?}");
        }
        // n = 1 reduces to odd d
        let c = poisson_check(&w, 1, 50.0, None).unwrap();
        let direct: f64 = (51..100).step_by(2).map(|d| w.base(d as f64 / 50.0)).sum();
        assert!((c.lhs - direct).abs() < 1e-15);
    }
}
