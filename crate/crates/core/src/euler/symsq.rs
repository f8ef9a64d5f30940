//! `L(s, sym^2 f)` two ways: the Euler product of the Satake factors, and a
//! smoothed approximate functional equation for the completed function
//! `Lambda(s) = pi^{-(s+1)/2} Gamma((s+1)/2) 2 (2 pi)^{-(s+k-1)} Gamma(s+k-1) L(s)`,
//! which satisfies `Lambda(s) = Lambda(1 - s)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::local::sym_square_local_inverse;
use super::product::tracked_product;
use crate::analysis::{integrate_panels, ln_gamma};
use crate::arith::{primes_up_to, SmallestPrimeFactor};
use crate::eigenform::{hecke_power, EigenformTable};
use crate::error::{Error, Result};

type C = Complex64;

/// Largest prime used by the Euler-product route.
pub const SYM_EULER_CUTOFF: u64 = 2_000_000;
/// Difference step for `L'(s, sym^2 f)`.
pub const SYM_DERIVATIVE_STEP: f64 = 1e-3;
const QUAD_TOL: f64 = 1e-15;
const V_FLOOR: f64 = 1e-18;
const MAX_TERMS: usize = 5_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymMethod {
    EulerProduct,
    SmoothedSeries,
}

impl fmt::Display for SymMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymMethod::EulerProduct => "euler_product",
            SymMethod::SmoothedSeries => "smoothed_series",
        })
    }
}

impl FromStr for SymMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler_product" | "euler" => Ok(SymMethod::EulerProduct),
            "smoothed_series" | "smoothed" => Ok(SymMethod::SmoothedSeries),
            _ => Err(Error::InvalidArgument(format!("unknown sym^2 method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymSquareValue {
    pub s: C,
    pub value: C,
    /// Truncation plus quadrature bound (series) or tail bound (product).
    pub bound: f64,
    /// Terms of the longer smoothed sum, or the prime cutoff.
    pub terms: usize,
    pub method: SymMethod,
}

/// `log gamma_sym(z)` for the completed symmetric square.
fn ln_gamma_factor(kappa: u32, z: C) -> Result<C> {
    let k = kappa as f64;
    Ok(-(z + 1.0) * 0.5 * PI.ln() + ln_gamma((z + 1.0) * 0.5)? + 2f64.ln() - (z + k - 1.0) * (2.0 * PI).ln()
        + ln_gamma(z + k - 1.0)?)
}

/// `V_z(x) = (1/2 pi i) int gamma(z + w)/gamma(z) x^{-w} dw/w` on the line
/// `Re w = c` with `Re(z + c) >= 3/2`, right of every pole.
struct Weight {
    kappa: u32,
    z: C,
    c: f64,
    ln_gz: C,
    t_lo: f64,
    t_hi: f64,
}

impl Weight {
    fn new(kappa: u32, z: C) -> Result<Self> {
        let c = (2.0 - z.re).max(0.5);
        let ln_gz = ln_gamma_factor(kappa, z)?;
        let peak = (ln_gamma_factor(kappa, z + c)? - ln_gz).re.max(0.0);
        let edge = |sign: f64| -> Result<f64> {
            let mut t = 4.0;
            loop {
                let v = (ln_gamma_factor(kappa, z + C::new(c, sign * t))? - ln_gz).re;
                if v < peak - 46.0 {
                    return Ok(t);
                }
                t += 4.0;
                if t > 4000.0 {
                    return Err(Error::Quadrature("sym^2 weight does not decay".into()));
                }
            }
        };
        Ok(Weight {
            kappa,
            z,
            c,
            ln_gz,
            t_lo: -edge(-1.0)?,
            t_hi: edge(1.0)?,
        })
    }

    /// `(V_z(x), quadrature error)`.
    fn eval(&self, x: f64) -> Result<(C, f64)> {
        let lx = x.ln();
        let f = |t: f64| -> C {
            let w = C::new(self.c, t);
            match ln_gamma_factor(self.kappa, self.z + w) {
                Ok(g) => (g - self.ln_gz - w * lx).exp() / w,
                Err(_) => C::new(f64::NAN, f64::NAN),
            }
        };
        let width = self.t_hi - self.t_lo;
        let panels = (width * (1.0 + lx.abs()) / 4.0).ceil() as usize;
        // absolute accuracy relative to the size of the integrand
        let peak = (0..=64)
            .map(|j| f(self.t_lo + width * j as f64 / 64.0).norm())
            .fold(f64::MIN_POSITIVE, f64::max);
        let tol = QUAD_TOL * peak * width;
        let (v, e) = integrate_panels(&f, self.t_lo, self.t_hi, panels.max(8), tol)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Quadrature(format!("sym^2 weight at z = {}", self.z)));
        }
        let scale = 0.5 / PI;
        Ok((v * scale, e * scale))
    }
}

/// `lambda(n^2)` for `n <= limit`, from `lambda(p)` by multiplicativity.
fn lambda_of_squares(table: &EigenformTable, limit: usize) -> Result<Vec<f64>> {
    table.require(limit.max(2))?;
    let spf = SmallestPrimeFactor::new(limit.max(2));
    let mut out = vec![0.0; limit + 1];
    for n in 1..=limit {
        let mut v = 1.0;
        for (p, e) in spf.factorize(n as u64) {
            v *= hecke_power(table.lambda(p as usize), 2 * e);
        }
        out[n] = v;
    }
    Ok(out)
}

/// Dirichlet coefficients of `zeta(2s) sum lambda(n^2) n^{-s}`.
fn sym_coefficients(table: &EigenformTable, limit: usize) -> Result<Vec<f64>> {
    let sq = lambda_of_squares(table, limit)?;
    let mut b = vec![0.0; limit + 1];
    let mut m = 1usize;
    while m * m <= limit {
        let step = m * m;
        for k in 1..=limit / step {
            b[k * step] += sq[k];
        }
        m += 1;
    }
    Ok(b)
}

/// Smoothed sum `sum b_n n^{-z} V_z(n)` run until the weight is negligible.
fn smoothed(b: &[f64], w: &Weight) -> Result<(C, f64, usize)> {
    let mut acc = C::new(0.0, 0.0);
    let mut err = 0.0;
    let mut n = 1usize;
    loop {
        if n >= b.len() {
            return Err(Error::TableTooShort {
                required: n,
                available: b.len() - 1,
            });
        }
        let (v, e) = w.eval(n as f64)?;
        let scale = (-w.z * (n as f64).ln()).exp();
        acc += scale * v * b[n];
        err += scale.norm() * e * b[n].abs();
        if n > 2 && (v.norm() < V_FLOOR || (n > 20 && v.norm() < 10.0 * e)) {
            // remaining terms: |b_n| <= d_3(n) <= n, V decreasing faster than n^{-3}
            err += v.norm() * n as f64 * n as f64 * scale.norm();
            return Ok((acc, err, n));
        }
        n += 1;
    }
}

/// `L(s, sym^2 f)` by the smoothed functional equation, any complex `s`
/// away from the trivial-zero poles of the gamma factor.
pub fn sym_square_afe(table: &EigenformTable, s: C) -> Result<SymSquareValue> {
    let kappa = table.weight();
    let wp = Weight::new(kappa, s)?;
    let wm = Weight::new(kappa, C::new(1.0, 0.0) - s)?;
    let limit = MAX_TERMS.min(table.n_max());
    let b = sym_coefficients(table, limit)?;
    let (sp, ep, np) = smoothed(&b, &wp)?;
    let (sm, em, nm) = smoothed(&b, &wm)?;
    let ratio = (wm.ln_gz - wp.ln_gz).exp();
    Ok(SymSquareValue {
        s,
        value: sp + ratio * sm,
        bound: ep + ratio.norm() * em,
        terms: np.max(nm),
        method: SymMethod::SmoothedSeries,
    })
}

/// `prod_{p <= P} L_p(s, sym^2 f)` for real `s > 1`, with `P` the smaller of
/// the table length and [`SYM_EULER_CUTOFF`].
pub fn sym_square_euler(table: &EigenformTable, s: f64) -> Result<SymSquareValue> {
    if s <= 1.05 {
        return Err(Error::OutsideRegion(format!(
            "sym^2 Euler product has no usable tail bound at s = {s} (needs s > 1.05)"
        )));
    }
    let cutoff = (table.n_max() as u64).min(SYM_EULER_CUTOFF);
    let primes = primes_up_to(cutoff);
    let sc = C::new(s, 0.0);
    let (inv, tail, _) = tracked_product(&primes, s, |p| sym_square_local_inverse(table.lambda(p as usize), p, sc));
    let value = inv.inv();
    Ok(SymSquareValue {
        s: sc,
        value,
        bound: tail * value.norm(),
        terms: cutoff as usize,
        method: SymMethod::EulerProduct,
    })
}

/// `L(s, sym^2 f)` for real `s` by the requested method.
#[allow(non_snake_case)]
pub fn sym_square_L(table: &EigenformTable, s: f64, method: SymMethod) -> Result<SymSquareValue> {
    match method {
        SymMethod::EulerProduct => sym_square_euler(table, s),
        SymMethod::SmoothedSeries => sym_square_afe(table, C::new(s, 0.0)),
    }
}

/// Both methods at `s`, failing when they disagree beyond their combined
/// bounds.
pub fn sym_square_checked(table: &EigenformTable, s: f64) -> Result<(SymSquareValue, SymSquareValue)> {
    let a = sym_square_euler(table, s)?;
    let b = sym_square_afe(table, C::new(s, 0.0))?;
    let gap = (a.value - b.value).norm();
    if gap > a.bound + b.bound {
        return Err(Error::CrossCheck(format!(
            "sym^2 at s = {s}: product {} vs series {} (gap {gap:e}, bounds {:e} + {:e})",
            a.value.re, b.value.re, a.bound, b.bound
        )));
    }
    Ok((a, b))
}

/// Richardson derivative with its step-halving diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeEstimate {
    pub value: f64,
    pub difference_h: f64,
    pub difference_half: f64,
    /// `|D_h - D_{h/2}| / |D_{h/2} - D_{h/4}|`, about 4 for order 2.
    pub error_ratio: f64,
}

/// `L'(s, sym^2 f)` for real `s` from the smoothed series.
pub fn sym_square_derivative(table: &EigenformTable, s: f64) -> Result<DerivativeEstimate> {
    let val = |x: f64| -> Result<f64> { Ok(sym_square_afe(table, C::new(x, 0.0))?.value.re) };
    let h = SYM_DERIVATIVE_STEP;
    let d = |step: f64| -> Result<f64> { Ok((val(s + step)? - val(s - step)?) / (2.0 * step)) };
    let dh = d(h)?;
    let dh2 = d(h / 2.0)?;
    let dh4 = d(h / 4.0)?;
    Ok(DerivativeEstimate {
        value: (4.0 * dh2 - dh) / 3.0,
        difference_h: dh,
        difference_half: dh2,
        error_ratio: (dh - dh2).abs() / (dh2 - dh4).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::tests::table12;

    #[test]
    fn methods_agree_right_of_one() {
        let t = table12();
        for s in [1.5, 2.5] {
            let (a, b) = sym_square_checked(t, s).unwrap();
            let rel = (a.value - b.value).norm() / b.value.norm();
            assert!(rel < 1e-5, "s={s}: {} vs {}", a.value, b.value);
            assert!(b.bound < 1e-12, "{b:?}");
        }
    }

    #[test]
    fn functional_equation_symmetry() {
        // the series evaluated at s and 1 - s must agree after the gamma ratio
        let t = table12();
        let s = C::new(0.7, 3.0);
        let a = sym_square_afe(t, s).unwrap().value;
        let b = sym_square_afe(t, C::new(1.0, 0.0) - s).unwrap().value;
        let k = t.weight();
        let r = (ln_gamma_factor(k, C::new(1.0, 0.0) - s).unwrap() - ln_gamma_factor(k, s).unwrap()).exp();
        assert!((a - r * b).norm() < 1e-11 * a.norm(), "{a} vs {}", r * b);
    }

    #[test]
    fn value_at_one_and_derivative_order() {
        let t = table12();
        let v = sym_square_afe(t, C::new(1.0, 0.0)).unwrap();
        assert!(v.value.im.abs() < 1e-14);
        assert!(v.value.re > 0.0);
        let d = sym_square_derivative(t, 1.0).unwrap();
        assert!((d.error_ratio - 4.0).abs() < 0.5, "{d:?}");
        // the Euler product is far too slow at s = 1, but close at s = 1.1
        let e = sym_square_euler(t, 1.1).unwrap();
        let a = sym_square_afe(t, C::new(1.1, 0.0)).unwrap();
        assert!((e.value - a.value).norm() < e.bound + a.bound);
        assert!(sym_square_euler(t, 1.0).is_err());
    }

    #[test]
    fn coefficients() {
        let t = table12();
        let b = sym_coefficients(t, 50).unwrap();
        assert_eq!(b[1], 1.0);
        // b_4 = lambda(16) + lambda(4)... m = 1 term lambda(4^2), m = 2 term lambda(1)
        assert!((b[4] - (t.lambda(16) + 1.0)).abs() < 1e-12);
        assert!((b[3] - t.lambda(9)).abs() < 1e-12);
    }
}
