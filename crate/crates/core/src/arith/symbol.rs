/// Jacobi symbol `(a/n)` for odd positive `n`.
pub fn jacobi(a: i64, n: u64) -> i8 {
    assert!(n % 2 == 1, "jacobi symbol needs an odd modulus");
    let mut a = a.rem_euclid(n as i64) as u64;
    let mut n = n;
    let mut t = 1i8;
    while a != 0 {
        let z = a.trailing_zeros();
        a >>= z;
        if z % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            t = -t;
        }
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Kronecker symbol `(a/b)`, computed by binary reciprocity without
/// factoring either argument. Returns 0 when `a = b = 0`.
pub fn kronecker(a: i64, b: i64) -> i8 {
    if b == 0 {
        return i8::from(a == 1 || a == -1);
    }
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    let mut sign = 1i8;
    let mut b_abs = b.unsigned_abs();
    if b < 0 && a < 0 {
        sign = -1;
    }
    let z = b_abs.trailing_zeros();
    b_abs >>= z;
    if z % 2 == 1 {
        // (a/2) = 0 for even a (excluded above), else +-1 by a mod 8
        let r = a.rem_euclid(8);
        if r == 3 || r == 5 {
            sign = -sign;
        }
    }
    if b_abs == 1 {
        return sign;
    }
    sign * jacobi(a, b_abs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{factorize, primes_up_to};

    fn legendre_by_enumeration(a: i64, p: u64) -> i8 {
        let r = a.rem_euclid(p as i64) as u64;
        if r == 0 {
            return 0;
        }
        if (1..p).any(|x| (x * x) % p == r) {
            1
        } else {
            -1
        }
    }

    fn kronecker_by_factorization(a: i64, b: i64) -> i8 {
        if b == 0 {
            return i8::from(a.abs() == 1);
        }
        let mut s = if b < 0 && a < 0 { -1 } else { 1 };
        for &(p, e) in factorize(b.unsigned_abs()).unwrap().factors() {
            let v = if p == 2 {
                if a % 2 == 0 {
                    0
                } else if matches!(a.rem_euclid(8), 1 | 7) {
                    1
                } else {
                    -1
                }
            } else {
                legendre_by_enumeration(a, p)
            };
            s *= v.pow(e);
        }
        s
    }

    #[test]
    fn examples() {
        assert_eq!(kronecker(8, 3), -1);
        assert_eq!(legendre_by_enumeration(8, 3), -1);
        for d in -50..50 {
            assert_eq!(kronecker(d, 1), 1);
        }
        assert_eq!(kronecker(8 * 7, 21), 0);
        assert_eq!(kronecker(8 * 5, 6), 0);
    }

    #[test]
    fn agrees_with_factorization_oracle() {
        for a in -60i64..=60 {
            for b in -60i64..=60 {
                if a == 0 && b == 0 {
                    continue;
                }
                assert_eq!(kronecker(a, b), kronecker_by_factorization(a, b), "({a}/{b})");
            }
        }
    }

    #[test]
    fn quadratic_reciprocity() {
        let primes: Vec<u64> = primes_up_to(200).into_iter().skip(1).collect();
        for &p in &primes {
            for &q in &primes {
                if p == q {
                    continue;
                }
                let lhs = kronecker(p as i64, q as i64) * kronecker(q as i64, p as i64);
                let rhs = if ((p - 1) * (q - 1) / 4) % 2 == 0 { 1 } else { -1 };
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn multiplicative_in_top_for_odd_bottom() {
        for n in (1..400i64).step_by(2) {
            for a in -30..30 {
                for b in [-7i64, 2, 3, 8, 11] {
                    assert_eq!(kronecker(a * b, n), kronecker(a, n) * kronecker(b, n));
                }
            }
        }
    }
}
