//! Finite checks of the Euler-product identities: the local inversion of
//! the twisted factor, `Z_1` series against its product, the `Z_2 = L Z_3`
//! factorization and the per-prime `H`-sum identity.

use num_complex::Complex64;

use super::local::{local_factors, p_pow, LocalCase};
use super::product::{tracked_product, EulerContext};
use crate::analysis::zeta_restricted;
use crate::arith::{factorize, gcd, kronecker, SmallestPrimeFactor};
use crate::eigenform::{hecke_power, EigenformTable};
use crate::error::{Error, Result};
use crate::gauss::gauss_sum_prime_power;
use crate::lfun::{is_fundamental, twisted_value_balanced, AfeKernels, DirichletData, QuadraticCharacter};
use crate::analysis::GVariant;

type C = Complex64;

/// Largest `c` accepted by [`local_inversion_check`].
pub const INVERSION_LIMIT: u64 = 10_000;

/// Both sides of the local inversion identity at `c`:
/// `prod_{p | c} (1 - lambda(p) chi(p) p^{-s} + chi(p)^2 p^{-2s})`
/// against `sum_{m | c} sum_{n | c} mu(m) mu(mn)^2 lambda(m) chi(m) chi(n)^2 m^{-s} n^{-2s}`.
pub fn local_inversion_sides(table: &EigenformTable, c: u64, d_fund: i64, s: C) -> Result<(C, C)> {
    if c == 0 || c > INVERSION_LIMIT {
        return Err(Error::InvalidArgument(format!("c must lie in [1, {INVERSION_LIMIT}], got {c}")));
    }
    if !is_fundamental(d_fund) {
        return Err(Error::InvalidArgument(format!("{d_fund} is not a fundamental discriminant")));
    }
    table.require(c as usize)?;
    let chi = |n: u64| kronecker(d_fund, n as i64) as f64;
    let f = factorize(c)?;
    let mut lhs = C::new(1.0, 0.0);
    for &(p, _) in f.factors() {
        let x = p_pow(p, s);
        lhs *= C::new(1.0, 0.0) - x * (table.lambda(p as usize) * chi(p)) + x * x * chi(p).powi(2);
    }
    // only squarefree m, n with (m, n) = 1 survive
    let primes: Vec<u64> = f.factors().iter().map(|f| f.0).collect();
    let squarefree: Vec<u64> = (0..1u32 << primes.len())
        .map(|mask| {
            primes
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| p)
                .product()
        })
        .collect();
    let mut rhs = C::new(0.0, 0.0);
    for &m in &squarefree {
        let mu_m = if factorize(m)?.factors().len() % 2 == 0 { 1.0 } else { -1.0 };
        for &n in &squarefree {
            if gcd(m, n) != 1 {
                continue;
            }
            let w = mu_m * table.lambda(m as usize) * chi(m) * chi(n).powi(2);
            rhs += p_pow(m, s) * p_pow(n, s * 2.0) * w;
        }
    }
    Ok((lhs, rhs))
}

/// `|lhs - rhs|` of [`local_inversion_sides`].
pub fn local_inversion_check(table: &EigenformTable, c: u64, d_fund: i64, s: C) -> Result<f64> {
    let (a, b) = local_inversion_sides(table, c, d_fund, s)?;
    Ok((a - b).norm())
}

/// Sides of the `Z_1` identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Z1Check {
    pub series: C,
    pub product: C,
    pub defect: f64,
    /// Rigorous divisor-function bound on the dropped series terms.
    pub tail_bound: f64,
    /// Size of the last half of the summed range, a practical tail estimate.
    pub tail_estimate: f64,
    /// Tail bound of the Euler product side.
    pub product_tail: f64,
    /// Smallest contributing `n`.
    pub first_n: u64,
}

fn check_coprime(a: u64, ell: u64) -> Result<()> {
    if a == 0 || gcd(a, 2 * ell) != 1 {
        return Err(Error::InvalidArgument(format!("need gcd(a, 2l) = 1, got a = {a}, l = {ell}")));
    }
    Ok(())
}

fn prime_divisors(n: u64) -> Result<Vec<u64>> {
    Ok(factorize(n)?.factors().iter().map(|f| f.0).collect())
}

/// `int_M^inf t^{-beta} (1 + log t)^3 dt`, exact.
fn log_cube_tail(m: f64, beta: f64) -> f64 {
    let b = beta - 1.0;
    let l = 1.0 + m.ln();
    let poly = l.powi(3) / b + 3.0 * l * l / (b * b) + 6.0 * l / b.powi(3) + 6.0 / b.powi(4);
    m.powf(-b) * poly
}

/// `Z_1(1/2 + gamma, a, l) = sum_{(n, 2a) = 1, ln square} lambda(n) n^{-1/2-gamma} phi(ln)/(ln)`
/// summed over `n <= n_trunc`, against `A(gamma, a, l) / (l_1^{1/2+gamma} zeta_{2a}(2))`.
///
/// Writing `n = l_1 m^2`, coefficients come from `lambda(p)` by multiplicativity,
/// so the table only needs the primes up to `sqrt(n_trunc / l_1)`.
pub fn z1_series_vs_product(ctx: &EulerContext, a: u64, gamma: C, n_trunc: u64) -> Result<Z1Check> {
    let ell = ctx.ell();
    check_coprime(a, ell)?;
    if gamma.re < 0.5 {
        return Err(Error::OutsideRegion(format!("Z_1 series needs Re gamma >= 1/2, got {gamma}")));
    }
    let (l1, _) = (ctx.ell1(), ctx.ell2());
    let table = ctx.table();
    let m_max = crate::arith::isqrt(n_trunc / l1) as usize;
    table.require(m_max.max(l1 as usize))?;
    let spf = SmallestPrimeFactor::new(m_max.max(2));
    let ell_primes = prime_divisors(ell)?;
    let l1_primes = prime_divisors(l1)?;
    let sigma = gamma + 0.5;
    let mut series = C::new(0.0, 0.0);
    let mut upper_half = C::new(0.0, 0.0);
    for m in (1..=m_max).step_by(2) {
        if gcd(m as u64, a) != 1 {
            continue;
        }
        // lambda(l_1 m^2) and phi(l n)/(l n) over the primes of l m
        let mut lam = 1.0;
        let mut ratio = 1.0;
        let mut seen_l1 = Vec::new();
        for (p, e) in spf.factorize(m as u64) {
            let extra = if l1 % p == 0 { 1 } else { 0 };
            if extra == 1 {
                seen_l1.push(p);
            }
            lam *= hecke_power(table.lambda(p as usize), 2 * e + extra);
            if ell % p != 0 {
                ratio *= 1.0 - 1.0 / p as f64;
            }
        }
        for &p in &l1_primes {
            if !seen_l1.contains(&p) {
                lam *= table.lambda(p as usize);
            }
        }
        for &p in &ell_primes {
            ratio *= 1.0 - 1.0 / p as f64;
        }
        let n = l1 as f64 * (m as f64) * (m as f64);
        let term = (-sigma * n.ln()).exp() * (lam * ratio);
        series += term;
        if 2 * m > m_max {
            upper_half += term;
        }
    }
    // |lambda(l_1 m^2)| <= tau(l_1) tau(m)^2, sum_{m <= x} tau(m)^2 <= x (1 + log x)^3
    let beta = 2.0 * sigma.re;
    let tau_l1 = (1u64 << l1_primes.len()) as f64;
    let tail_bound = tau_l1 * (l1 as f64).powf(-sigma.re) * beta * log_cube_tail(m_max as f64 + 1.0, beta);

    let (a_val, product_tail) = a_product(ctx, gamma, a)?;
    let mut excluded = prime_divisors(a)?;
    excluded.push(2);
    let zeta_2a = zeta_restricted(2.0, &excluded)?;
    let product = a_val / ((sigma * (l1 as f64).ln()).exp() * zeta_2a);
    Ok(Z1Check {
        series,
        product,
        defect: (series - product).norm(),
        tail_bound,
        tail_estimate: upper_half.norm(),
        product_tail,
        first_n: l1,
    })
}

/// `A(gamma, a, l) = prod_{p | l_1} E_1 prod_{p | l_2, p not | l_1} E_2
/// prod_{(p, 2al) = 1} (E_3 + 1/(p^2 - 1))` with its tail bound.
pub fn a_product(ctx: &EulerContext, gamma: C, a: u64) -> Result<(C, f64)> {
    check_coprime(a, ctx.ell())?;
    let odd: Vec<u64> = ctx.primes()[1..].to_vec();
    // E_3 - 1 ~ (lambda^2 - 1) p^{-1-2 gamma}
    let sigma = (1.0 + 2.0 * gamma.re).min(2.0);
    if sigma <= 1.05 {
        return Err(Error::OutsideRegion(format!("A(gamma) product needs Re gamma > 0.025, got {gamma}")));
    }
    let ell = ctx.ell();
    let (v, tail, _) = tracked_product(&odd, sigma, |p| {
        let t = local_factors(ctx.lambda_p(p), p, gamma);
        if ell % p == 0 {
            ctx.case(p).pick(&t)
        } else if a % p == 0 {
            C::new(1.0, 0.0)
        } else {
            t.e3 + 1.0 / ((p * p - 1) as f64)
        }
    });
    Ok((v, tail * v.norm()))
}

/// `4k = k_1 k_2^2` with `k_1` a fundamental discriminant and `k_2 > 0`.
pub fn split_discriminant(k: i64) -> Result<(i64, u64)> {
    if k == 0 {
        return Err(Error::InvalidArgument("k = 0 has no discriminant split".into()));
    }
    let f = factorize(k.unsigned_abs())?;
    let mut core: i64 = k.signum();
    let mut m: u64 = 1;
    for &(p, e) in f.factors() {
        if e % 2 == 1 {
            core *= p as i64;
        }
        m *= p.pow(e / 2);
    }
    if core.rem_euclid(4) == 1 {
        Ok((core, 2 * m))
    } else {
        Ok((4 * core, m))
    }
}

/// Both sides of `Z_2(gamma, a, k, l) = L(1/2 + gamma, f x chi_{k_1}) Z_3(gamma, a, k, l)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Z2Check {
    pub k1: i64,
    pub k2: u64,
    pub series: C,
    pub l_value: C,
    pub z3: C,
    pub defect: f64,
    /// Size of the last half of the summed range.
    pub tail_estimate: f64,
}

/// `sum_{r >= 0} lambda(p^r) p^{-r gamma} G_k(p^{r + b}) / p^r`, finite
/// unless `p` divides neither `k` nor `l`.
fn z2_local_sum(lp: f64, p: u64, k: i64, b: u32, gamma: C) -> C {
    let mut acc = C::new(0.0, 0.0);
    let alpha = if k == 0 { u32::MAX } else { crate::arith::valuation(k.unsigned_abs(), p) };
    let r_max = alpha.saturating_add(1).saturating_sub(b).min(64);
    let pg = p_pow(p, gamma + 1.0);
    let mut w = C::new(1.0, 0.0);
    for r in 0..=r_max {
        let g = gauss_sum_prime_power(k, p, r + b);
        if g != 0.0 {
            acc += w * (hecke_power(lp, r) * g);
        }
        w *= pg;
    }
    acc
}

/// `Z_{3,p}`: the bare quadratic factor for `p | 2a`, times the local
/// `Z_2` sum otherwise.
pub fn z3_local(lp: f64, p: u64, a: u64, k: i64, ell: u64, k1: i64, gamma: C) -> C {
    let chi = kronecker(k1, p as i64) as f64;
    let x = p_pow(p, gamma + 0.5);
    let quad = C::new(1.0, 0.0) - x * (lp * chi) + x * x * (chi * chi);
    if p == 2 || a % p == 0 {
        quad
    } else {
        quad * z2_local_sum(lp, p, k, crate::arith::valuation(ell, p), gamma)
    }
}

/// Checks the factorization at `gamma` with the series over `n <= n_trunc`
/// and the `Z_3` product over `p <= ctx.cutoff()`.
pub fn z2_factorization_check(ctx: &EulerContext, a: u64, k: i64, gamma: C, n_trunc: usize) -> Result<Z2Check> {
    let ell = ctx.ell();
    check_coprime(a, ell)?;
    if k == 0 {
        return Err(Error::InvalidArgument("k = 0 is the diagonal; Z_2 needs k != 0".into()));
    }
    if gamma.re <= 0.55 {
        return Err(Error::OutsideRegion(format!("Z_2 series needs Re gamma > 1/2, got {gamma}")));
    }
    let table = ctx.table();
    table.require(n_trunc)?;
    let (k1, k2) = split_discriminant(k)?;
    let spf = SmallestPrimeFactor::new(n_trunc);
    let mut series = C::new(0.0, 0.0);
    let mut upper = C::new(0.0, 0.0);
    for n in (1..=n_trunc).step_by(2) {
        if gcd(n as u64, a) != 1 {
            continue;
        }
        // G_k(l n) over the primes of l n
        let mut g = 1.0;
        let mut fac = spf.factorize(n as u64);
        for (p, e) in factorize(ell)?.factors() {
            match fac.iter_mut().find(|f| f.0 == *p) {
                Some(f) => f.1 += e,
                None => fac.push((*p, *e)),
            }
        }
        for (p, e) in fac {
            g *= gauss_sum_prime_power(k, p, e);
            if g == 0.0 {
                break;
            }
        }
        if g == 0.0 {
            continue;
        }
        let term = (-(gamma + 1.0) * (n as f64).ln()).exp() * (table.lambda(n) * g);
        series += term;
        if 2 * n > n_trunc {
            upper += term;
        }
    }
    // L(1/2 + gamma, f x chi_{k_1}) by the smoothed functional equation
    let kernels = AfeKernels::with_range(table.weight(), gamma, GVariant::Unit, 12.0, 1e-13)?;
    let data = DirichletData::new(table);
    let chi = QuadraticCharacter::new(k1)?;
    let l_value = twisted_value_balanced(&data, &kernels, &chi, 1.0, 1e-14)?.value;
    let primes = ctx.primes();
    let (z3, _, _) = tracked_product(primes, 1.0 + 2.0 * gamma.re, |p| {
        z3_local(ctx.lambda_p(p), p, a, k, ell, k1, gamma)
    });
    Ok(Z2Check {
        k1,
        k2,
        series,
        l_value,
        z3,
        defect: (series - l_value * z3).norm(),
        tail_estimate: upper.norm(),
    })
}

/// Per-prime `H`-sum identity. Returns `(direct, closed_form, defect)`:
/// `direct = E_3 (1 + H(p,1) + H(1,p))` from the four `(r_1, r_2)` terms,
/// `closed_form = (1 - p^{-2})(E_3 + 1/(p^2 - 1))` when `p` does not divide `a`
/// and `1` when it does.
pub fn complic_local_sides(table: &EigenformTable, p: u64, p_divides_a: bool, gamma: C) -> Result<(C, C, f64)> {
    if p == 2 || !crate::arith::is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
    }
    table.require(p as usize)?;
    Ok(complic_identity(table.lambda(p as usize), p, p_divides_a, gamma))
}

/// [`complic_local_sides`] for a given `lambda(p)`.
pub fn complic_identity(lp: f64, p: u64, p_divides_a: bool, gamma: C) -> (C, C, f64) {
    let t = local_factors(lp, p, gamma);
    let y = p_pow(p, gamma * 2.0 + 1.0);
    // ([r_1, r_2], a)^2 / [r_1, r_2]^2 for r = p
    let w = if p_divides_a { 1.0 } else { 1.0 / (p * p) as f64 };
    // (r_1, r_2) = (1,1), (p,1), (1,p); (p,p) killed by mu(p^2)
    let h10 = -y * lp * w * t.e1 / t.e3;
    let h01 = y * w * t.e2 / t.e3;
    let direct = t.e3 * (C::new(1.0, 0.0) + h10 + h01);
    let closed = if p_divides_a {
        C::new(1.0, 0.0)
    } else {
        (t.e3 + 1.0 / ((p * p - 1) as f64)) * (1.0 - 1.0 / (p * p) as f64)
    };
    (direct, closed, (direct - closed).norm())
}

/// Defect of [`complic_local_sides`]; `p` must not divide `2l`.
pub fn complic_local_check(ctx: &EulerContext, p: u64, p_divides_a: bool, gamma: C) -> Result<f64> {
    if ctx.ell() % p == 0 || p == 2 {
        return Err(Error::InvalidArgument(format!("p = {p} divides 2l")));
    }
    debug_assert_eq!(ctx.case(p), LocalCase::E3);
    Ok(complic_local_sides(ctx.table(), p, p_divides_a, gamma)?.2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::tests::table12;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inversion_small_cases() {
        let t = table12();
        let s = C::new(0.7, 0.2);
        let (a, b) = local_inversion_sides(t, 1, 8, s).unwrap();
        assert_eq!((a, b), (C::new(1.0, 0.0), C::new(1.0, 0.0)));
        let (a, b) = local_inversion_sides(t, 7, 8, s).unwrap();
        let chi = kronecker(8, 7) as f64;
        let x = p_pow(7, s);
        let want = C::new(1.0, 0.0) - x * (t.lambda(7) * chi) + x * x * chi * chi;
        assert!((a - want).norm() < 1e-15 && (b - want).norm() < 1e-15);
        assert!(local_inversion_check(t, 45, 8, s).unwrap() < 1e-10);
        assert!(local_inversion_check(t, 45, 6, s).is_err());
    }

    #[test]
    fn inversion_random() {
        let t = table12();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let discs = [1i64, 5, 8, -3, -4, 12, 13, -7, 40, 1001 * 8];
        for _ in 0..100 {
            let c = rng.gen_range(1..=INVERSION_LIMIT);
            let d = discs[rng.gen_range(0..discs.len())];
            let s = C::new(rng.gen_range(0.05..2.0), rng.gen_range(-20.0..20.0));
            assert!(local_inversion_check(t, c, d, s).unwrap() < 1e-10, "c={c} d={d} s={s}");
        }
    }

    #[test]
    fn tau_square_partial_sums() {
        let tau = crate::arith::divisor_count_table(100_000);
        let mut s = 0.0;
        for (m, &t) in tau.iter().enumerate().skip(1) {
            s += (t as f64).powi(2);
            let x = m as f64;
            assert!(s <= x * (1.0 + x.ln()).powi(3));
        }
    }

    #[test]
    fn z1_identity() {
        let t = table12();
        let g = C::new(0.6, 0.0);
        for ell in [1u64, 3, 45] {
            let ctx = EulerContext::new(t, ell, 50_000, 0).unwrap();
            for a in [1u64, 5] {
                if gcd(a, 2 * ell) != 1 {
                    assert!(z1_series_vs_product(&ctx, a, g, 1_000_000).is_err());
                    continue;
                }
                let c = z1_series_vs_product(&ctx, a, g, 1_000_000).unwrap();
                assert!(c.defect < 1e-5, "l={ell} a={a}: {c:?}");
                assert_eq!(c.first_n, if ell == 45 { 5 } else { ell });
            }
        }
    }

    #[test]
    fn z1_coprimality_removes_factor() {
        let t = table12();
        let ctx = EulerContext::new(t, 1, 50_000, 0).unwrap();
        let g = C::new(0.8, 0.0);
        let (a1, _) = a_product(&ctx, g, 1).unwrap();
        let (a5, _) = a_product(&ctx, g, 5).unwrap();
        let e3 = local_factors(t.lambda(5), 5, g).e3 + 1.0 / 24.0;
        assert!((a1 - a5 * e3).norm() < 1e-14 * a1.norm());
    }

    #[test]
    fn discriminant_split() {
        assert_eq!(split_discriminant(1).unwrap(), (1, 2));
        assert_eq!(split_discriminant(-1).unwrap(), (-4, 1));
        assert_eq!(split_discriminant(2).unwrap(), (8, 1));
        assert_eq!(split_discriminant(12).unwrap(), (12, 2));
        assert_eq!(split_discriminant(-3).unwrap(), (-3, 2));
        assert_eq!(split_discriminant(20).unwrap(), (5, 4));
        for k in [-30i64, -7, 3, 6, 18, 45] {
            let (k1, k2) = split_discriminant(k).unwrap();
            assert_eq!(4 * k, k1 * (k2 * k2) as i64);
            assert!(is_fundamental(k1));
        }
    }

    #[test]
    fn z3_cases() {
        let t = table12();
        let g = C::new(0.75, 0.0);
        // p | 2a: bare quadratic factor
        let l3 = t.lambda(3);
        let chi = kronecker(5, 3) as f64;
        let x = p_pow(3, g + 0.5);
        let want = C::new(1.0, 0.0) - x * (l3 * chi) + x * x * chi * chi;
        assert_eq!(z3_local(l3, 3, 3, 5, 1, 5, g), want);
        // generic p: the displayed four-term expansion
        let p = 11u64;
        let lp = t.lambda(11);
        let chi = kronecker(5, 11) as f64;
        let x = p_pow(p, g + 0.5);
        let want = C::new(1.0, 0.0) + x * x * (chi * chi) - x * x * (lp * lp * chi * chi) + x * x * x * (lp * chi.powi(3));
        assert!((z3_local(lp, p, 1, 5, 1, 5, g) - want).norm() < 1e-15);
    }

    #[test]
    fn z2_identity() {
        let t = table12();
        let g = C::new(0.75, 0.0);
        let ctx = EulerContext::new(t, 1, 50_000, 0).unwrap();
        let c = z2_factorization_check(&ctx, 1, 1, g, 50_000).unwrap();
        assert_eq!(c.k1, 1);
        assert!(c.defect < 1e-3, "{c:?}");
        assert!(z2_factorization_check(&ctx, 1, 0, g, 1000).is_err());
    }

    #[test]
    fn complic_identity_holds() {
        let t = table12();
        for p in crate::arith::primes_up_to(100).into_iter().skip(1) {
            for g in [0.3, 0.7] {
                for div in [false, true] {
                    let (_, _, d) = complic_local_sides(t, p, div, C::new(g, 0.0)).unwrap();
                    assert!(d < 1e-12, "p={p} g={g} div={div}: {d}");
                }
            }
        }
        let ctx = EulerContext::new(t, 15, 1000, 0).unwrap();
        assert!(complic_local_check(&ctx, 5, false, C::new(0.3, 0.0)).is_err());
        // lambda = 0: E_3 + p^{-3-2g} E_2
        let g = C::new(0.3, 0.0);
        let (d, c, _) = complic_identity(0.0, 3, false, g);
        let t = local_factors(0.0, 3, g);
        let want = t.e3 + p_pow(3, g * 2.0 + 3.0) * t.e2;
        assert!((d - want).norm() < 1e-15 && (c - want).norm() < 1e-15);
    }
}
