//! Per-prime factors: `E_1, E_2, E_3`, the symmetric-square factor and
//! the `Z_p` case routing.

use num_complex::Complex64;

type C = Complex64;

/// `E_1(gamma; p)`, `E_2(gamma; p)`, `E_3(gamma; p)` at one prime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFactorTriple {
    pub p: u64,
    pub gamma: C,
    pub e1: C,
    pub e2: C,
    pub e3: C,
}

/// `p^{-z}`.
#[inline]
pub(crate) fn p_pow(p: u64, z: C) -> C {
    (-z * (p as f64).ln()).exp()
}

/// The three bracket factors with `x = lambda p^{-1/2-gamma}`,
/// `y = p^{-1-2 gamma}`, `A = 1 - x + y`, `B = 1 + x + y`.
pub fn local_factors(lambda_p: f64, p: u64, gamma: C) -> LocalFactorTriple {
    let half = p_pow(p, gamma + 0.5);
    let x = half * lambda_p;
    let y = half * half;
    let c = p as f64 / (p as f64 + 1.0);
    let ai = (C::new(1.0, 0.0) - x + y).inv();
    let bi = (C::new(1.0, 0.0) + x + y).inv();
    let e1 = half.inv() * c * (ai - bi) * 0.5;
    let e2 = c * (ai + bi) * 0.5;
    let e3 = C::new(1.0, 0.0) + c * ((ai + bi) * 0.5 - 1.0);
    LocalFactorTriple { p, gamma, e1, e2, e3 }
}

/// `L_p(s, sym^2 f)^{-1} = (1 - y)(1 - (lambda^2 - 2) y + y^2)`, `y = p^{-s}`.
pub fn sym_square_local_inverse(lambda_p: f64, p: u64, s: C) -> C {
    let y = p_pow(p, s);
    (C::new(1.0, 0.0) - y) * (C::new(1.0, 0.0) - y * (lambda_p * lambda_p - 2.0) + y * y)
}

/// Which of the three factors `Z_p(1/2 + gamma, l)` uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalCase {
    /// `p | l_1`
    E1,
    /// `p` does not divide `l_1` but divides `l_2`
    E2,
    /// `(p, 2l) = 1`
    E3,
}

impl LocalCase {
    pub fn route(p: u64, ell1: u64, ell2: u64) -> LocalCase {
        if ell1 % p == 0 {
            LocalCase::E1
        } else if ell2 % p == 0 {
            LocalCase::E2
        } else {
            LocalCase::E3
        }
    }

    pub fn pick(self, t: &LocalFactorTriple) -> C {
        match self {
            LocalCase::E1 => t.e1,
            LocalCase::E2 => t.e2,
            LocalCase::E3 => t.e3,
        }
    }
}

/// Term-by-term oracle for the brackets: `A^{-1} = sum_j lambda(p^j) t^j`
/// with `t = p^{-1/2-gamma}`, `B^{-1}` the same with `-t`. Summed to `terms`.
pub fn local_factors_series(lambda_p: f64, p: u64, gamma: C, terms: u32) -> LocalFactorTriple {
    let t = p_pow(p, gamma + 0.5);
    let mut even = C::new(0.0, 0.0);
    let mut odd = C::new(0.0, 0.0);
    let mut tj = C::new(1.0, 0.0);
    let (mut prev, mut cur) = (0.0f64, 1.0f64);
    for j in 0..terms {
        if j % 2 == 0 {
            even += tj * cur;
        } else {
            odd += tj * cur;
        }
        let next = lambda_p * cur - prev;
        prev = cur;
        cur = next;
        tj *= t;
    }
    // (A^{-1} + B^{-1})/2 = even part, (A^{-1} - B^{-1})/2 = odd part
    let c = p as f64 / (p as f64 + 1.0);
    LocalFactorTriple {
        p,
        gamma,
        e1: t.inv() * c * odd,
        e2: c * even,
        e3: C::new(1.0, 0.0) + c * (even - 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishing_lambda() {
        let g = C::new(0.3, 0.1);
        for p in [3u64, 5, 7, 101] {
            let t = local_factors(0.0, p, g);
            assert!(t.e1.norm() < 1e-16);
            let y = p_pow(p, g * 2.0 + 1.0);
            let c = p as f64 / (p as f64 + 1.0);
            let want = C::new(1.0, 0.0) - c * y / (y + 1.0);
            assert!((t.e3 - want).norm() < 1e-15);
            // Satake pair (i, -i): alpha^2 = beta^2 = -1
            let s = C::new(1.3, 0.0);
            let y = p_pow(p, s);
            let want = (C::new(1.0, 0.0) - y) * (C::new(1.0, 0.0) + y) * (C::new(1.0, 0.0) + y);
            assert!((sym_square_local_inverse(0.0, p, s) - want).norm() < 1e-15);
        }
    }

    #[test]
    fn closed_form_matches_series() {
        // lambda(3) for weight 12: tau(3)/3^{11/2}
        let l3 = 252.0 / 3f64.powf(5.5);
        let g = C::new(0.3, 0.0);
        let a = local_factors(l3, 3, g);
        let b = local_factors_series(l3, 3, g, 200);
        assert!((a.e1 - b.e1).norm() < 1e-14);
        assert!((a.e2 - b.e2).norm() < 1e-14);
        assert!((a.e3 - b.e3).norm() < 1e-14);
    }

    #[test]
    fn routing_is_exclusive() {
        // l = 45 = 5 * 3^2
        assert_eq!(LocalCase::route(5, 5, 3), LocalCase::E1);
        assert_eq!(LocalCase::route(3, 5, 3), LocalCase::E2);
        assert_eq!(LocalCase::route(7, 5, 3), LocalCase::E3);
        // p dividing both l_1 and l_2 goes to E_1
        assert_eq!(LocalCase::route(3, 3, 3), LocalCase::E1);
    }

    #[test]
    fn e3_tends_to_one() {
        let g = C::new(0.0, 0.0);
        let t = local_factors(1.5, 1_000_003, g);
        assert!((t.e3 - 1.0).norm() < 3e-6);
    }
}
