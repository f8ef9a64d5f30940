//! Shifted central values `L(1/2 + alpha, f x chi_D)` through the smoothed
//! approximate functional equation, and their first derivative at the
//! centre.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::analysis::{digamma_real, ln_gamma, GVariant, KernelCache, KernelKind};
use crate::arith::{is_squarefree, kronecker};
use crate::eigenform::{check_weight, EigenformTable};
use crate::error::{Error, Result};

type C = Complex64;

/// Default absolute truncation tolerance for each smoothed sum.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;
/// Difference step of the derivative route.
pub const DERIVATIVE_STEP: f64 = 1e-3;
/// Allowed disagreement between the two derivative routes.
pub const DERIVATIVE_AGREEMENT: f64 = 1e-6;

/// `lambda(n) / sqrt(n)` and `log n`, indexed by `n`.
#[derive(Debug, Clone)]
pub struct DirichletData {
    weight: u32,
    checksum: u64,
    coeff: Vec<f64>,
    log_n: Vec<f64>,
}

impl DirichletData {
    pub fn new(table: &EigenformTable) -> Self {
        let lam = table.values();
        let mut coeff = vec![0.0; lam.len()];
        let mut log_n = vec![0.0; lam.len()];
        for n in 1..lam.len() {
            let x = n as f64;
            coeff[n] = lam[n] / x.sqrt();
            log_n[n] = x.ln();
        }
        DirichletData {
            weight: table.weight(),
            checksum: table.checksum(),
            coeff,
            log_n,
        }
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn checksum(&self) -> u64 {
        self.checksum
    }

    pub fn n_max(&self) -> usize {
        self.coeff.len() - 1
    }

    fn require(&self, n: usize) -> Result<()> {
        if n > self.n_max() {
            return Err(Error::TableTooShort {
                required: n,
                available: self.n_max(),
            });
        }
        Ok(())
    }
}

/// The primitive quadratic character `chi_D(n) = (D/n)` of a fundamental
/// discriminant, tabulated over one period `|D|`.
#[derive(Debug, Clone)]
pub struct QuadraticCharacter {
    disc: i64,
    values: Vec<i8>,
}

impl QuadraticCharacter {
    pub fn new(disc: i64) -> Result<Self> {
        if !is_fundamental(disc) {
            return Err(Error::InvalidArgument(format!("{disc} is not a fundamental discriminant")));
        }
        let q = disc.unsigned_abs();
        let values = (0..q).map(|r| kronecker(disc, r as i64)).collect();
        Ok(QuadraticCharacter { disc, values })
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    pub fn conductor(&self) -> u64 {
        self.disc.unsigned_abs()
    }

    #[inline]
    pub fn eval(&self, n: u64) -> i8 {
        self.values[(n % self.values.len() as u64) as usize]
    }
}

/// Fundamental discriminants, including `1`.
pub fn is_fundamental(d: i64) -> bool {
    if d == 1 {
        return true;
    }
    if d == 0 {
        return false;
    }
    let m = d.rem_euclid(4);
    let a = d.unsigned_abs();
    if m == 1 {
        return is_squarefree(a).unwrap_or(false);
    }
    if m == 0 {
        let e = d / 4;
        let r = e.rem_euclid(4);
        return (r == 2 || r == 3) && is_squarefree(e.unsigned_abs()).unwrap_or(false);
    }
    false
}

/// A point `(d, alpha, kappa)` of the `8d` family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwistPoint {
    pub d: u64,
    pub alpha: C,
    pub kappa: u32,
}

impl TwistPoint {
    pub fn new(d: u64, alpha: C, kappa: u32) -> Result<Self> {
        check_weight(kappa)?;
        if d == 0 || d % 2 == 0 || !is_squarefree(d)? {
            return Err(Error::InvalidArgument(format!("d = {d} must be odd and squarefree")));
        }
        if alpha.re.abs() > 0.25 {
            return Err(Error::OutsideRegion(format!("alpha = {alpha} needs |Re alpha| <= 1/4")));
        }
        Ok(TwistPoint { d, alpha, kappa })
    }

    pub fn disc(&self) -> i64 {
        8 * self.d as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedLValue {
    pub disc: i64,
    pub alpha: C,
    pub value: C,
    /// Largest `n` used in either sum.
    pub terms_used: usize,
    /// Bound on the truncated tails of both sums.
    pub tail_bound: f64,
    /// Bound on the kernel interpolation error carried by both sums.
    pub kernel_bound: f64,
}

/// `X_{alpha,q} = (q / 2 pi)^{-2 alpha} Gamma(k/2 - alpha) / Gamma(k/2 + alpha)`.
pub fn x_factor(kappa: u32, alpha: C, q: f64) -> Result<C> {
    let h = kappa as f64 / 2.0;
    Ok((-2.0 * alpha * (q / (2.0 * PI)).ln() + ln_gamma(C::new(h, 0.0) - alpha)? - ln_gamma(alpha + h)?).exp())
}

/// `i^k eps(D) X_{alpha,|D|}` with `eps(D)` the sign of `D`.
pub fn root_factor(kappa: u32, alpha: C, disc: i64) -> Result<C> {
    if disc == 0 {
        return Err(Error::InvalidArgument("root factor needs D != 0".into()));
    }
    let ik = match kappa % 4 {
        0 => 1.0,
        2 => -1.0,
        _ => return Err(Error::InvalidArgument(format!("odd weight {kappa}"))),
    };
    let eps = if disc > 0 { 1.0 } else { -1.0 };
    Ok(x_factor(kappa, alpha, disc.unsigned_abs() as f64)? * (ik * eps))
}

/// Kernel caches for `omega_alpha` and `omega_{-alpha}`.
#[derive(Clone)]
pub struct AfeKernels {
    kappa: u32,
    alpha: C,
    variant: GVariant,
    plus: Arc<KernelCache>,
    minus: Arc<KernelCache>,
}

impl AfeKernels {
    pub fn new(kappa: u32, alpha: C, variant: GVariant) -> Result<Self> {
        Self::with_range(kappa, alpha, variant, variant.default_xi_max(), 1e-13)
    }

    pub fn with_range(kappa: u32, alpha: C, variant: GVariant, xi_max: f64, target_err: f64) -> Result<Self> {
        check_weight(kappa)?;
        let plus = Arc::new(KernelCache::build(kappa, alpha, variant, 1e-5, xi_max, target_err)?);
        let minus = if alpha == C::new(0.0, 0.0) {
            plus.clone()
        } else {
            Arc::new(KernelCache::build(kappa, -alpha, variant, 1e-5, xi_max, target_err)?)
        };
        Ok(AfeKernels {
            kappa,
            alpha,
            variant,
            plus,
            minus,
        })
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn alpha(&self) -> C {
        self.alpha
    }

    pub fn variant(&self) -> GVariant {
        self.variant
    }

    pub fn plus(&self) -> &KernelCache {
        &self.plus
    }

    pub fn minus(&self) -> &KernelCache {
        &self.minus
    }

    /// Table length needed for conductor `q` at tolerance `tol`.
    pub fn required_terms(&self, q: f64, tol: f64) -> usize {
        let s = 0.5 + self.alpha.re;
        let (a, _) = self.plus.truncation(q, s, tol);
        let (b, _) = self.minus.truncation(q, 1.0 - s, tol);
        a.max(b)
    }
}

/// `sum_{n <= n_stop} lambda(n) chi(n) n^{-1/2 - shift} w(n / q)`, together
/// with `sum |lambda(n) chi(n) n^{-1/2 - shift}|`.
fn smoothed_sum(
    data: &DirichletData,
    chi: &QuadraticCharacter,
    kernel: &KernelCache,
    ln_q: f64,
    shift: C,
    n_stop: usize,
) -> (C, f64) {
    let period = chi.values.len();
    let mut r = 0usize;
    let mut acc = C::new(0.0, 0.0);
    let mut abs = 0.0;
    let zero_shift = shift == C::new(0.0, 0.0);
    for n in 1..=n_stop {
        r += 1;
        if r == period {
            r = 0;
        }
        let c = chi.values[r];
        if c == 0 {
            continue;
        }
        let ln_n = data.log_n[n];
        let mut a = C::new(data.coeff[n] * c as f64, 0.0);
        if !zero_shift {
            a *= (-shift * ln_n).exp();
        }
        abs += a.norm();
        acc += a * kernel.eval_ln(ln_n - ln_q);
    }
    (acc, abs)
}

/// `L(1/2 + alpha, f x chi_D)` with balance parameter `y`: the first sum is
/// weighted by `omega(n / (|D| y))`, the dual one by `omega(n y / |D|)`.
pub fn twisted_value_balanced(
    data: &DirichletData,
    kernels: &AfeKernels,
    chi: &QuadraticCharacter,
    y: f64,
    tol: f64,
) -> Result<ShiftedLValue> {
    if data.weight() != kernels.kappa {
        return Err(Error::InvalidArgument(format!(
            "table weight {} does not match kernel weight {}",
            data.weight(),
            kernels.kappa
        )));
    }
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::InvalidArgument(format!("balance parameter must be positive, got {y}")));
    }
    let alpha = kernels.alpha;
    let q = chi.conductor() as f64;
    let s = 0.5 + alpha.re;
    let (n_plus, tail_plus) = kernels.plus.truncation(q * y, s, tol);
    let (n_minus, tail_minus) = kernels.minus.truncation(q / y, 1.0 - s, tol);
    data.require(n_plus.max(n_minus))?;
    let root = root_factor(kernels.kappa, alpha, chi.disc())?;
    let (sp, ap) = smoothed_sum(data, chi, &kernels.plus, (q * y).ln(), alpha, n_plus);
    let (sm, am) = smoothed_sum(data, chi, &kernels.minus, (q / y).ln(), -alpha, n_minus);
    let rn = root.norm();
    Ok(ShiftedLValue {
        disc: chi.disc(),
        alpha,
        value: sp + root * sm,
        terms_used: n_plus.max(n_minus),
        tail_bound: tail_plus + rn * tail_minus,
        kernel_bound: kernels.plus.error_bound() * ap + rn * kernels.minus.error_bound() * am,
    })
}

/// `L(1/2 + alpha, f x chi_D)` for a fundamental discriminant `D`.
pub fn twisted_value(data: &DirichletData, kernels: &AfeKernels, disc: i64, tol: f64) -> Result<ShiftedLValue> {
    let chi = QuadraticCharacter::new(disc)?;
    twisted_value_balanced(data, kernels, &chi, 1.0, tol)
}

/// `L(1/2 + alpha, f x chi_{8d})`.
pub fn central_value(data: &DirichletData, kernels: &AfeKernels, point: &TwistPoint) -> Result<ShiftedLValue> {
    if point.alpha != kernels.alpha || point.kappa != kernels.kappa {
        return Err(Error::InvalidArgument("kernel caches do not match the twist point".into()));
    }
    twisted_value(data, kernels, point.disc(), DEFAULT_TAIL_TOL)
}

/// Kernel caches for the derivative at `alpha = 0`: shifted kernels at
/// `+-h` and `+-h/2` for differences, plus `omega_0` and its
/// `alpha`-derivative for the analytic route.
pub struct DerivativeKernels {
    kappa: u32,
    step: f64,
    coarse: AfeKernels,
    fine: AfeKernels,
    omega0: KernelCache,
    domega0: KernelCache,
}

impl DerivativeKernels {
    pub fn new(kappa: u32, variant: GVariant) -> Result<Self> {
        let h = DERIVATIVE_STEP;
        let xi_max = variant.default_xi_max();
        Ok(DerivativeKernels {
            kappa,
            step: h,
            coarse: AfeKernels::new(kappa, C::new(h, 0.0), variant)?,
            fine: AfeKernels::new(kappa, C::new(h / 2.0, 0.0), variant)?,
            omega0: KernelCache::build_kind(kappa, C::new(0.0, 0.0), variant, KernelKind::Omega, 1e-5, xi_max, 1e-13)?,
            domega0: KernelCache::build_kind(
                kappa,
                C::new(0.0, 0.0),
                variant,
                KernelKind::AlphaDerivative,
                1e-5,
                xi_max,
                1e-13,
            )?,
        })
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Table length needed by [`twisted_derivative`] for conductor `q`.
    pub fn required_terms(&self, q: f64, tol: f64) -> usize {
        let a = self.coarse.required_terms(q, tol).max(self.fine.required_terms(q, tol));
        let (b, _) = self.omega0.truncation(q, 0.5, tol);
        let (c, _) = self.domega0.truncation(q, 0.5, tol);
        a.max(b).max(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeValue {
    pub disc: i64,
    /// Richardson-extrapolated central difference.
    pub value: f64,
    /// Analytically differentiated AFE.
    pub analytic: f64,
    /// Plain central differences with steps `h` and `h/2`.
    pub difference_h: f64,
    pub difference_half: f64,
    pub terms_used: usize,
}

impl DerivativeValue {
    /// `(D_h - D) / (D_{h/2} - D)`, about 4 for a second-order scheme.
    pub fn step_ratio(&self) -> f64 {
        (self.difference_h - self.value) / (self.difference_half - self.value)
    }
}

/// `d/d alpha L(1/2 + alpha, f x chi_D)` at `alpha = 0`. Fails when the
/// two routes disagree by more than `1e-6`.
pub fn twisted_derivative(data: &DirichletData, kernels: &DerivativeKernels, disc: i64) -> Result<DerivativeValue> {
    let chi = QuadraticCharacter::new(disc)?;
    let tol = DEFAULT_TAIL_TOL;
    let h = kernels.step;
    let diff = |k: &AfeKernels, step: f64| -> Result<(f64, usize)> {
        let p = twisted_value_balanced(data, k, &chi, 1.0, tol)?;
        let neg = AfeKernels {
            kappa: k.kappa,
            alpha: -k.alpha,
            variant: k.variant,
            plus: k.minus.clone(),
            minus: k.plus.clone(),
        };
        let m = twisted_value_balanced(data, &neg, &chi, 1.0, tol)?;
        Ok((((p.value - m.value) / (2.0 * step)).re, p.terms_used.max(m.terms_used)))
    };
    let (d_h, n1) = diff(&kernels.coarse, h)?;
    let (d_half, n2) = diff(&kernels.fine, h / 2.0)?;
    let richardson = (4.0 * d_half - d_h) / 3.0;
    let analytic = analytic_derivative(data, kernels, &chi, tol)?;
    if (richardson - analytic).abs() > DERIVATIVE_AGREEMENT * richardson.abs().max(1.0) {
        return Err(Error::CrossCheck(format!(
            "derivative routes disagree for D = {disc}: differences {richardson}, analytic {analytic}"
        )));
    }
    Ok(DerivativeValue {
        disc,
        value: richardson,
        analytic,
        difference_h: d_h,
        difference_half: d_half,
        terms_used: n1.max(n2),
    })
}

/// `L'(1/2) = S'(1 - r) + r X'(0) S` with `r = i^k eps(D)`,
/// `S = sum a_n omega_0`, `S' = sum a_n (d omega_0 - log n omega_0)` and
/// `X'(0) = -2 log(|D| / 2 pi) - 2 psi(k/2)`.
fn analytic_derivative(
    data: &DirichletData,
    kernels: &DerivativeKernels,
    chi: &QuadraticCharacter,
    tol: f64,
) -> Result<f64> {
    let q = chi.conductor() as f64;
    let (n0, _) = kernels.omega0.truncation(q, 0.5, tol);
    let (n1, _) = kernels.domega0.truncation(q, 0.5, tol);
    let n_stop = n0.max(n1);
    data.require(n_stop)?;
    let ln_q = q.ln();
    let period = chi.values.len();
    let (mut s, mut sd) = (0.0, 0.0);
    let mut r = 0usize;
    for n in 1..=n_stop {
        r += 1;
        if r == period {
            r = 0;
        }
        let c = chi.values[r];
        if c == 0 {
            continue;
        }
        let a = data.coeff[n] * c as f64;
        let u = data.log_n[n] - ln_q;
        let w = kernels.omega0.eval_ln(u).re;
        s += a * w;
        sd += a * (kernels.domega0.eval_ln(u).re - data.log_n[n] * w);
    }
    let root = root_factor(kernels.kappa, C::new(0.0, 0.0), chi.disc())?.re;
    let xp = -2.0 * (q / (2.0 * PI)).ln() - 2.0 * digamma_real(kernels.kappa as f64 / 2.0)?;
    Ok(sd * (1.0 - root) + root * xp * s)
}

/// `L'(1/2, f x chi_{8d})`.
pub fn central_derivative(data: &DirichletData, kernels: &DerivativeKernels, d: u64) -> Result<DerivativeValue> {
    let p = TwistPoint::new(d, C::new(0.0, 0.0), kernels.kappa)?;
    twisted_derivative(data, kernels, p.disc())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn data(weight: u32) -> &'static DirichletData {
        static D12: OnceLock<DirichletData> = OnceLock::new();
        static D18: OnceLock<DirichletData> = OnceLock::new();
        let cell = if weight == 12 { &D12 } else { &D18 };
        cell.get_or_init(|| DirichletData::new(&EigenformTable::build(weight, 60_000).unwrap()))
    }

    fn real(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn root_factor_examples() {
        assert!((root_factor(12, real(0.0), 8).unwrap() - 1.0).norm() < 1e-15);
        assert!((root_factor(18, real(0.0), 8).unwrap() + 1.0).norm() < 1e-15);
        assert!((root_factor(12, real(0.0), -4).unwrap() + 1.0).norm() < 1e-15);
        let a = C::new(0.1, 0.3);
        let prod = x_factor(12, a, 40.0).unwrap() * x_factor(12, -a, 40.0).unwrap();
        assert!((prod - 1.0).norm() < 1e-14);
        assert!(root_factor(12, real(0.0), 0).is_err());
    }

    #[test]
    fn fundamental_discriminants() {
        let fund: Vec<i64> = (-30..=30).filter(|&d| is_fundamental(d)).collect();
        assert_eq!(
            fund,
            vec![-24, -23, -20, -19, -15, -11, -8, -7, -4, -3, 1, 5, 8, 12, 13, 17, 21, 24, 28, 29]
        );
        for d in (1..200u64).step_by(2) {
            assert_eq!(is_fundamental(8 * d as i64), is_squarefree(d).unwrap());
        }
    }

    #[test]
    fn character_table_matches_kronecker() {
        let chi = QuadraticCharacter::new(8 * 15).unwrap();
        for n in 0..1000u64 {
            assert_eq!(chi.eval(n), kronecker(120, n as i64));
        }
        assert!(QuadraticCharacter::new(16).is_err());
    }

    #[test]
    fn twist_point_validation() {
        assert!(TwistPoint::new(9, real(0.0), 12).is_err());
        assert!(TwistPoint::new(4, real(0.0), 12).is_err());
        assert!(TwistPoint::new(15, real(0.3), 12).is_err());
        assert!(TwistPoint::new(15, real(0.0), 13).is_err());
        assert_eq!(TwistPoint::new(15, real(0.1), 12).unwrap().disc(), 120);
    }

    #[test]
    fn odd_sign_vanishes() {
        let k = AfeKernels::new(18, real(0.0), GVariant::Unit).unwrap();
        for d in [1u64, 3, 5, 7, 11, 13] {
            let chi = QuadraticCharacter::new(8 * d as i64).unwrap();
            // an unbalanced split keeps the two sums distinct
            let v = twisted_value_balanced(data(18), &k, &chi, 1.7, DEFAULT_TAIL_TOL).unwrap();
            assert!(v.value.norm() < 1e-9, "d = {d}: {}", v.value);
        }
    }

    #[test]
    fn balance_and_kernel_independence() {
        let alpha = real(0.02);
        let unit = AfeKernels::new(12, alpha, GVariant::Unit).unwrap();
        let simple = AfeKernels::with_range(12, alpha, GVariant::Simple, 300.0, 1e-12).unwrap();
        for d in [1u64, 3, 5] {
            let chi = QuadraticCharacter::new(8 * d as i64).unwrap();
            let a = twisted_value_balanced(data(12), &unit, &chi, 1.0, DEFAULT_TAIL_TOL).unwrap();
            let b = twisted_value_balanced(data(12), &unit, &chi, 0.6, DEFAULT_TAIL_TOL).unwrap();
            assert!((a.value - b.value).norm() < 1e-11, "{a:?} {b:?}");
            let c = twisted_value_balanced(data(12), &simple, &chi, 1.0, 1e-10).unwrap();
            assert!((a.value - c.value).norm() < 1e-8 + c.tail_bound, "{a:?} {c:?}");
        }
    }

    #[test]
    fn functional_equation_residual() {
        let alpha = real(0.02);
        let unit = AfeKernels::new(12, alpha, GVariant::Unit).unwrap();
        let unit_neg = AfeKernels::new(12, -alpha, GVariant::Unit).unwrap();
        for d in [7u64, 15, 23] {
            let disc = 8 * d as i64;
            let chi = QuadraticCharacter::new(disc).unwrap();
            let lp = twisted_value_balanced(data(12), &unit, &chi, 0.8, DEFAULT_TAIL_TOL).unwrap().value;
            let lm = twisted_value_balanced(data(12), &unit_neg, &chi, 1.3, DEFAULT_TAIL_TOL).unwrap().value;
            let r = lp - root_factor(12, alpha, disc).unwrap() * lm;
            assert!(r.norm() < 1e-9 * lp.norm().max(1.0));
        }
    }

    #[test]
    fn table_too_short_is_reported() {
        let small = DirichletData::new(&EigenformTable::build(12, 500).unwrap());
        let k = AfeKernels::new(12, real(0.0), GVariant::Unit).unwrap();
        match twisted_value(&small, &k, 8 * 101, DEFAULT_TAIL_TOL) {
            Err(Error::TableTooShort { required, available }) => {
                assert_eq!(available, 500);
                assert!(required > 500);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn derivative_routes_agree() {
        let k = DerivativeKernels::new(18, GVariant::Unit).unwrap();
        for d in [1u64, 3, 5] {
            let v = central_derivative(data(18), &k, d).unwrap();
            assert!((v.value - v.analytic).abs() < 1e-8, "{v:?}");
            let ratio = v.step_ratio();
            assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
        }
        // even sign: L'(1/2) = -(d/d alpha) L(1/2 - alpha) at 0, so the
        // derivative of the symmetric combination vanishes
        let k12 = DerivativeKernels::new(12, GVariant::Unit).unwrap();
        let v = central_derivative(data(12), &k12, 3).unwrap();
        let a = AfeKernels::new(12, real(1e-3), GVariant::Unit).unwrap();
        let p = twisted_value(data(12), &a, 24, DEFAULT_TAIL_TOL).unwrap().value.re;
        let am = AfeKernels::new(12, real(-1e-3), GVariant::Unit).unwrap();
        let m = twisted_value(data(12), &am, 24, DEFAULT_TAIL_TOL).unwrap().value.re;
        // plain central difference, accurate to O(h^2)
        assert!(((p - m) / 2e-3 - v.value).abs() < 1e-4 * v.value.abs(), "{v:?}");
        assert!(((p - m) / 2e-3 - v.difference_h).abs() < 1e-9);
    }
}
