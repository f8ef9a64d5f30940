//! `Z(1/2 + gamma, l)` as the absolutely convergent product of
//! `Z_p / L_p(1 + 2 gamma, sym^2 f)`, its accelerated form `Z^N` and the
//! log-derivative at `gamma = 0`.

use num_complex::Complex64;

use super::local::{local_factors, p_pow, sym_square_local_inverse, LocalCase};
use crate::analysis::zeta_complex;
use crate::arith::{primes_up_to, split_squarefree};
use crate::eigenform::EigenformTable;
use crate::error::{Error, Result};

type C = Complex64;

/// Default prime cutoff.
pub const DEFAULT_PRIME_CUTOFF: u64 = 100_000;
/// Default acceleration depth for main-term constants.
pub const DEFAULT_DEPTH: u32 = 2;
/// Default tolerance on the reported tail bound.
pub const DEFAULT_PRODUCT_TOL: f64 = 1e-4;
/// Safety multiplier on the empirical tail constant.
const TAIL_SAFETY: f64 = 10.0;
/// Distance kept from the edge of the convergence region.
const REGION_MARGIN: f64 = 0.01;

/// Eigenvalues, the twist `l = l_1 l_2^2`, the prime cutoff and the
/// acceleration depth.
#[derive(Debug, Clone)]
pub struct EulerContext<'a> {
    table: &'a EigenformTable,
    ell: u64,
    ell1: u64,
    ell2: u64,
    cutoff: u64,
    depth: u32,
    tolerance: f64,
    primes: Vec<u64>,
}

impl<'a> EulerContext<'a> {
    pub fn new(table: &'a EigenformTable, ell: u64, cutoff: u64, depth: u32) -> Result<Self> {
        if ell == 0 || ell % 2 == 0 {
            return Err(Error::InvalidArgument(format!("l must be odd and positive, got {ell}")));
        }
        let (ell1, ell2) = split_squarefree(ell)?;
        if cutoff < 3 {
            return Err(Error::InvalidArgument(format!("prime cutoff {cutoff} too small")));
        }
        table.require(cutoff as usize)?;
        if ell > 1 {
            let largest = crate::arith::factorize(ell)?.factors().iter().map(|f| f.0).max().unwrap_or(1);
            if largest > cutoff {
                return Err(Error::InvalidArgument(format!(
                    "prime cutoff {cutoff} below the prime {largest} dividing l"
                )));
            }
        }
        Ok(EulerContext {
            table,
            ell,
            ell1,
            ell2,
            cutoff,
            depth,
            tolerance: DEFAULT_PRODUCT_TOL,
            primes: primes_up_to(cutoff),
        })
    }

    /// Largest usable cutoff for this table, capped at `cap`.
    pub fn with_table_cutoff(table: &'a EigenformTable, ell: u64, cap: u64, depth: u32) -> Result<Self> {
        Self::new(table, ell, cap.min(table.n_max() as u64), depth)
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn table(&self) -> &'a EigenformTable {
        self.table
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn ell1(&self) -> u64 {
        self.ell1
    }

    pub fn ell2(&self) -> u64 {
        self.ell2
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// All primes up to the cutoff, starting with 2.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn lambda_p(&self, p: u64) -> f64 {
        self.table.lambda(p as usize)
    }

    pub fn case(&self, p: u64) -> LocalCase {
        LocalCase::route(p, self.ell1, self.ell2)
    }

    /// `Z_p(1/2 + gamma, l)` for odd `p`.
    pub fn local_z_factor(&self, p: u64, gamma: C) -> Result<C> {
        if p == 2 {
            return Err(Error::InvalidArgument("Z_p is defined for odd p only".into()));
        }
        if p > self.cutoff {
            return Err(Error::TableTooShort {
                required: p as usize,
                available: self.cutoff as usize,
            });
        }
        let t = local_factors(self.lambda_p(p), p, gamma);
        Ok(self.case(p).pick(&t))
    }

    /// Factor of `Z^N` at `p` (odd or 2).
    fn accelerated_factor(&self, p: u64, gamma: C, depth: u32) -> C {
        let lp = self.lambda_p(p);
        let inv = sym_square_local_inverse(lp, p, gamma * 2.0 + 1.0);
        let mut f = if p == 2 {
            inv
        } else {
            self.case(p).pick(&local_factors(lp, p, gamma)) * inv
        };
        if depth > 0 {
            let one = C::new(1.0, 0.0);
            f *= (one - p_pow(p, zeta_top(gamma, depth))) / (one - p_pow(p, gamma * 4.0 + 2.0));
        }
        f
    }
}

/// `2^{N+1} + 2^{N+2} gamma`.
fn zeta_top(gamma: C, depth: u32) -> C {
    let m = (1u64 << (depth + 1)) as f64;
    gamma * (2.0 * m) + m
}

/// Decay exponent `sigma` of `|Z^N_p - 1| ~ p^{-sigma}`.
fn decay_exponent(gamma: C, depth: u32) -> f64 {
    let g = gamma.re;
    let sym = 2.0 + 2.0 * g;
    if depth == 0 {
        sym.min(2.0 + 4.0 * g)
    } else {
        sym.min(zeta_top(gamma, depth).re)
    }
}

/// Smallest `Re gamma` accepted at depth `N`.
pub fn region_floor(depth: u32) -> f64 {
    if depth == 0 {
        -0.25 + REGION_MARGIN
    } else {
        (-0.5 + 1.0 / (1u64 << (depth + 2)) as f64).max(-0.5) + REGION_MARGIN
    }
}

/// Value of a truncated Euler product with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductValue {
    pub value: C,
    /// Largest prime used.
    pub cutoff: u64,
    /// `10 C sum_{p > P} p^{-sigma}` with `C` from the last decade of factors.
    pub tail_bound: f64,
    /// `|value(P) - value(P/2)|`.
    pub stability: f64,
    /// `zeta(2^{N+1} + 2^{N+2} gamma) / zeta(2 + 4 gamma)`, `1` at depth 0.
    pub zeta_ratio: C,
    pub depth: u32,
}

/// `sum_{p > P} p^{-sigma} <= P^{1-sigma} / ((sigma - 1) log P)`.
pub fn prime_tail(cutoff: u64, sigma: f64) -> f64 {
    let p = cutoff as f64;
    p.powf(1.0 - sigma) / ((sigma - 1.0) * p.ln())
}

/// Running product over `primes` with the empirical tail constant taken
/// from primes in `(P/10, P]`.
pub(crate) fn tracked_product<F: FnMut(u64) -> C>(primes: &[u64], sigma: f64, mut factor: F) -> (C, f64, f64) {
    let cutoff = *primes.last().unwrap_or(&2);
    let mut value = C::new(1.0, 0.0);
    let mut half_value = value;
    let mut c_emp = 0.0f64;
    for &p in primes {
        let f = factor(p);
        value *= f;
        if 2 * p <= cutoff {
            half_value = value;
        }
        if 10 * p > cutoff {
            let dev = f.ln().norm() * (p as f64).powf(sigma);
            c_emp = c_emp.max(dev);
        }
    }
    let tail = TAIL_SAFETY * c_emp * prime_tail(cutoff, sigma);
    (value, tail, (value - half_value).norm())
}

fn check_region(gamma: C, depth: u32) -> Result<f64> {
    let floor = region_floor(depth);
    if !(gamma.re >= floor) {
        return Err(Error::OutsideRegion(format!(
            "Re gamma = {} below {floor} for depth {depth}",
            gamma.re
        )));
    }
    let sigma = decay_exponent(gamma, depth);
    if sigma <= 1.0 + REGION_MARGIN {
        return Err(Error::OutsideRegion(format!("product not absolutely convergent at gamma = {gamma}")));
    }
    Ok(sigma)
}

fn suggested_cutoff(cutoff: u64, tail: f64, tol: f64, sigma: f64) -> u64 {
    // tail scales like P^{1-sigma} / log P
    let mut p = cutoff as f64;
    while tail * prime_tail(p as u64, sigma) / prime_tail(cutoff, sigma) > tol && p < 1e15 {
        p *= 2.0;
    }
    p as u64
}

/// `Z^N(1/2 + gamma, l)` times the zeta ratio, i.e. `Z(1/2 + gamma, l)`
/// reconstructed from the accelerated product.
pub fn zn_accelerated(ctx: &EulerContext, gamma: C, depth: u32) -> Result<ProductValue> {
    zn_with_cutoff(ctx, gamma, depth, ctx.cutoff)
}

/// As [`zn_accelerated`] with primes up to `cutoff <= ctx.cutoff()`, and
/// without the tolerance gate.
pub fn zn_with_cutoff(ctx: &EulerContext, gamma: C, depth: u32, cutoff: u64) -> Result<ProductValue> {
    let sigma = check_region(gamma, depth)?;
    if cutoff > ctx.cutoff {
        return Err(Error::TableTooShort {
            required: cutoff as usize,
            available: ctx.cutoff as usize,
        });
    }
    let end = ctx.primes.partition_point(|&p| p <= cutoff);
    let primes = &ctx.primes[..end];
    let (prod, tail, stability) = tracked_product(primes, sigma, |p| ctx.accelerated_factor(p, gamma, depth));
    let zeta_ratio = if depth == 0 {
        C::new(1.0, 0.0)
    } else {
        zeta_complex(zeta_top(gamma, depth))? / zeta_complex(gamma * 4.0 + 2.0)?
    };
    Ok(ProductValue {
        value: prod * zeta_ratio,
        cutoff,
        tail_bound: tail * zeta_ratio.norm() * prod.norm(),
        stability: stability * zeta_ratio.norm(),
        zeta_ratio,
        depth,
    })
}

/// Partial accelerated products `Z^N` (zeta ratio included) at each cutoff
/// in the increasing `grid`, in one pass over the primes.
pub fn convergence_profile(ctx: &EulerContext, gamma: C, depth: u32, grid: &[u64]) -> Result<Vec<(u64, C)>> {
    check_region(gamma, depth)?;
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("cutoff grid must increase".into()));
    }
    if let Some(&last) = grid.last() {
        if last > ctx.cutoff {
            return Err(Error::TableTooShort {
                required: last as usize,
                available: ctx.cutoff as usize,
            });
        }
    }
    let zeta_ratio = if depth == 0 {
        C::new(1.0, 0.0)
    } else {
        zeta_complex(zeta_top(gamma, depth))? / zeta_complex(gamma * 4.0 + 2.0)?
    };
    let mut out = Vec::with_capacity(grid.len());
    let mut prod = C::new(1.0, 0.0);
    let mut i = 0;
    for &p in grid {
        while i < ctx.primes.len() && ctx.primes[i] <= p {
            prod *= ctx.accelerated_factor(ctx.primes[i], gamma, depth);
            i += 1;
        }
        out.push((p, prod * zeta_ratio));
    }
    Ok(out)
}

/// Smallest cutoff in the profile from which every later value stays within
/// `tol` (relative) of `reference`.
pub fn needed_cutoff(profile: &[(u64, C)], reference: C, tol: f64) -> Option<u64> {
    let mut needed = None;
    for &(p, v) in profile.iter().rev() {
        if (v - reference).norm() <= tol * reference.norm() {
            needed = Some(p);
        } else {
            break;
        }
    }
    needed
}

/// Gate on the context tolerance.
pub fn require_tolerance(ctx: &EulerContext, v: &ProductValue, gamma: C) -> Result<()> {
    if v.tail_bound > ctx.tolerance {
        let sigma = decay_exponent(gamma, v.depth);
        return Err(Error::CutoffInsufficient {
            cutoff: v.cutoff,
            tail_bound: v.tail_bound,
            tolerance: ctx.tolerance,
            suggested: suggested_cutoff(v.cutoff, v.tail_bound, ctx.tolerance, sigma),
        });
    }
    Ok(())
}

/// `Z(1/2 + gamma, l)` by the plain product (`N = 0`).
pub fn z_product(ctx: &EulerContext, gamma: C) -> Result<ProductValue> {
    let v = zn_accelerated(ctx, gamma, 0)?;
    require_tolerance(ctx, &v, gamma)?;
    Ok(v)
}

/// Log-derivative of `Z(1/2 + gamma, 1)` at `gamma = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDerivative {
    /// Richardson value `(4 D_{h/2} - D_h) / 3`.
    pub value: f64,
    pub difference_h: f64,
    pub difference_half: f64,
    /// `|D_h - D_{h/2}| / |D_{h/2} - D_{h/4}|`, about 4 for an order-2 scheme.
    pub error_ratio: f64,
    /// Largest imaginary part seen in the sampled values.
    pub imaginary: f64,
}

/// Step of the central differences.
pub const LOG_DERIVATIVE_STEP: f64 = 1e-3;

/// `Z*'(0) / Z*(0)` by Richardson-extrapolated central differences of the
/// accelerated product at the context depth.
pub fn z_star_derivative(ctx: &EulerContext) -> Result<LogDerivative> {
    if ctx.ell != 1 {
        return Err(Error::InvalidArgument("Z* is defined at l = 1".into()));
    }
    let depth = ctx.depth.max(1);
    let mut imaginary = 0.0f64;
    let mut ln_z = |g: f64| -> Result<f64> {
        let v = zn_accelerated(ctx, C::new(g, 0.0), depth)?.value;
        imaginary = imaginary.max(v.im.abs());
        Ok(v.re.ln())
    };
    let h = LOG_DERIVATIVE_STEP;
    let d = |ln_z: &mut dyn FnMut(f64) -> Result<f64>, step: f64| -> Result<f64> {
        Ok((ln_z(step)? - ln_z(-step)?) / (2.0 * step))
    };
    let dh = d(&mut ln_z, h)?;
    let dh2 = d(&mut ln_z, h / 2.0)?;
    let dh4 = d(&mut ln_z, h / 4.0)?;
    let ratio = (dh - dh2).abs() / (dh2 - dh4).abs();
    let value = (4.0 * dh2 - dh) / 3.0;
    // order-2 consistency: successive differences must shrink
    if !((dh - dh2).abs() >= (dh2 - dh4).abs() || (dh - dh2).abs() < 1e-9) {
        return Err(Error::CrossCheck(format!(
            "step halving not convergent: D_h = {dh}, D_h/2 = {dh2}, D_h/4 = {dh4}"
        )));
    }
    Ok(LogDerivative {
        value,
        difference_h: dh,
        difference_half: dh2,
        error_ratio: ratio,
        imaginary,
    })
}

/// Complex-step derivative step: exact to rounding for real-analytic factors.
const COMPLEX_STEP: f64 = 1e-30;

/// The same log-derivative as the sum over `p <= cutoff` of
/// `d/dgamma log Z^N_p`, plus the analytic derivative of the zeta ratio.
pub fn z_star_derivative_per_prime(ctx: &EulerContext, cutoff: u64, depth: u32) -> Result<f64> {
    if ctx.ell != 1 {
        return Err(Error::InvalidArgument("Z* is defined at l = 1".into()));
    }
    if cutoff > ctx.cutoff {
        return Err(Error::TableTooShort {
            required: cutoff as usize,
            available: ctx.cutoff as usize,
        });
    }
    let ih = C::new(0.0, COMPLEX_STEP);
    let mut sum = 0.0;
    for &p in ctx.primes.iter().take_while(|&&p| p <= cutoff) {
        sum += ctx.accelerated_factor(p, ih, depth).ln().im / COMPLEX_STEP;
    }
    if depth > 0 {
        let m = (1u64 << (depth + 1)) as f64;
        sum += 2.0 * m * zeta_log_derivative(m)? - 4.0 * zeta_log_derivative(2.0)?;
    }
    Ok(sum)
}

/// `zeta'(s) / zeta(s)` for real `s > 1`, from the prime-power series.
pub fn zeta_log_derivative(s: f64) -> Result<f64> {
    if s <= 1.5 {
        return Err(Error::OutsideRegion(format!("zeta'/zeta series needs s > 3/2, got {s}")));
    }
    // -sum_p log p p^{-s} / (1 - p^{-s}); tail below P^{1-s} (P up to 1e6)
    let limit: u64 = if s >= 4.0 { 10_000 } else { 2_000_000 };
    let mut acc = 0.0;
    for p in primes_up_to(limit) {
        let x = (p as f64).powf(-s);
        acc -= (p as f64).ln() * x / (1.0 - x);
    }
    // integral estimate of the remaining primes: sum_{p > P} log p p^{-s} ~ P^{1-s}/(s-1)
    let l = limit as f64;
    acc -= l.powf(1.0 - s) / (s - 1.0);
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::tests::table12;
    use std::f64::consts::PI;

    #[test]
    fn depth_zero_is_plain_product() {
        let t = table12();
        let ctx = EulerContext::new(t, 1, 20_000, 0).unwrap();
        let g = C::new(0.1, 0.0);
        let a = zn_accelerated(&ctx, g, 0).unwrap();
        let b = zn_with_cutoff(&ctx, g, 0, 20_000).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.zeta_ratio, C::new(1.0, 0.0));
    }

    #[test]
    fn zeta_ratio_value() {
        let t = table12();
        let ctx = EulerContext::new(t, 1, 1000, 1).unwrap();
        let v = zn_accelerated(&ctx, C::new(0.0, 0.0), 1).unwrap();
        assert!((v.zeta_ratio.re - PI * PI / 15.0).abs() < 1e-13);
    }

    #[test]
    fn depths_agree() {
        let t = table12();
        for ell in [1u64, 45] {
            let ctx = EulerContext::new(t, ell, 50_000, 2).unwrap();
            let g = C::new(0.0, 0.0);
            let v: Vec<f64> = (0..3).map(|n| zn_accelerated(&ctx, g, n).unwrap().value.re).collect();
            assert!((v[0] - v[2]).abs() < 1e-4 * v[2].abs(), "{v:?}");
            assert!((v[1] - v[2]).abs() < 1e-6 * v[2].abs(), "{v:?}");
        }
    }

    #[test]
    fn case_routing_for_45() {
        let t = table12();
        let ctx = EulerContext::new(t, 45, 1000, 0).unwrap();
        assert_eq!((ctx.ell1(), ctx.ell2()), (5, 3));
        let g = C::new(0.2, 0.0);
        let l5 = ctx.lambda_p(5);
        let l3 = ctx.lambda_p(3);
        assert_eq!(ctx.local_z_factor(5, g).unwrap(), local_factors(l5, 5, g).e1);
        assert_eq!(ctx.local_z_factor(3, g).unwrap(), local_factors(l3, 3, g).e2);
        assert!(ctx.local_z_factor(2, g).is_err());
    }

    #[test]
    fn conjugate_symmetry_and_region() {
        let t = table12();
        let ctx = EulerContext::new(t, 15, 5000, 2).unwrap();
        let g = C::new(0.1, 2.0);
        let a = zn_accelerated(&ctx, g, 2).unwrap().value;
        let b = zn_accelerated(&ctx, g.conj(), 2).unwrap().value;
        assert!((a - b.conj()).norm() < 1e-13 * a.norm());
        assert!(zn_accelerated(&ctx, C::new(-0.3, 0.0), 0).is_err());
        assert!(zn_accelerated(&ctx, C::new(-0.3, 0.0), 2).is_ok());
    }

    #[test]
    fn stabilizes_with_cutoff() {
        let t = table12();
        let ctx = EulerContext::new(t, 1, 50_000, 2).unwrap();
        let g = C::new(0.0, 0.0);
        let mut prev = f64::INFINITY;
        for p in [1_000u64, 5_000, 25_000] {
            let s = zn_with_cutoff(&ctx, g, 2, p).unwrap().stability;
            assert!(s < prev);
            prev = s;
        }
        assert!(z_product(&ctx.clone().with_tolerance(1e-12), g).is_err());
    }

    #[test]
    fn log_derivative_routes() {
        let t = table12();
        let ctx = EulerContext::new(t, 1, 50_000, 2).unwrap();
        let d = z_star_derivative(&ctx).unwrap();
        assert!(d.imaginary < 1e-12);
        assert!((d.error_ratio - 4.0).abs() < 0.5, "{d:?}");
        let q = z_star_derivative_per_prime(&ctx, 50_000, 2).unwrap();
        assert!((d.value - q).abs() < 1e-8, "{} vs {q}", d.value);
    }

    #[test]
    fn zeta_log_derivative_at_two() {
        let want = -0.569_960_993_094_532_8;
        assert!((zeta_log_derivative(2.0).unwrap() - want).abs() < 1e-6);
        let want4 = -0.063_669_764_955_371_13;
        assert!((zeta_log_derivative(4.0).unwrap() - want4).abs() < 1e-9);
    }
}
