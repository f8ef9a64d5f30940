//! The smoothed approximate-functional-equation weight
//! `omega_alpha(xi) = (1 / 2 pi i) int_(c) G(s) g_alpha(s) xi^{-s} ds / s`
//! and a log-grid cache of it.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gamma::{digamma, digamma_real, ln_gamma, ln_gamma_unchecked, trigamma_real};
use super::zeta::zeta_complex;
use crate::error::{Error, Result};

type C = Complex64;

/// Admissible even entire `G` with `G(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GVariant {
    /// `G = 1`; then `omega` is a regularized incomplete gamma function.
    Unit,
    /// `G(s) = exp(s^2)`.
    Simple,
    /// `exp(s^2)` times normalized zeta factors vanishing at `4 alpha + 4 s = 1`.
    ZetaDamped,
}

impl GVariant {
    pub fn name(&self) -> &'static str {
        match self {
            GVariant::Unit => "unit",
            GVariant::Simple => "simple",
            GVariant::ZetaDamped => "zeta_damped",
        }
    }

    /// Whether `G` is independent of `alpha`.
    pub fn alpha_free(&self) -> bool {
        !matches!(self, GVariant::ZetaDamped)
    }

    /// Abscissae `A` used for the decay constants `C_A`.
    pub fn decay_exponents(&self) -> &'static [f64] {
        match self {
            GVariant::Unit => &[2.0, 5.0, 10.0, 20.0, 30.0, 40.0],
            _ => &[1.0, 2.0, 3.0, 5.0, 8.0, 10.0],
        }
    }

    /// `xi` beyond which the kernel is negligible in double precision.
    pub fn default_xi_max(&self) -> f64 {
        match self {
            GVariant::Unit => 12.0,
            _ => 1e5,
        }
    }
}

impl fmt::Display for GVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(GVariant::Unit),
            "simple" => Ok(GVariant::Simple),
            "zeta_damped" | "zeta-damped" => Ok(GVariant::ZetaDamped),
            _ => Err(Error::InvalidArgument(format!(
                "unknown G variant '{s}'; use unit, simple or zeta_damped"
            ))),
        }
    }
}

/// `g_alpha(s) = (2 pi)^{-s} Gamma(k/2 + alpha + s) / Gamma(k/2 + alpha)`.
pub fn g_factor(kappa: u32, alpha: C, s: C) -> Result<C> {
    let a = alpha + kappa as f64 / 2.0;
    Ok((ln_gamma(a + s)? - ln_gamma(a)? - s * (2.0 * PI).ln()).exp())
}

/// `Z(alpha, s) = zeta(w)(w - 1)(3 - w)` with `w = 2 + 4 alpha + 4 s`.
fn zeta_block(alpha: C, s: C) -> Result<C> {
    let w = alpha * 4.0 + s * 4.0 + 2.0;
    if (w - 1.0).norm() < 1e-6 {
        // removable: zeta(w)(w - 1) -> 1
        return Ok(C::new(3.0, 0.0) - w);
    }
    Ok(zeta_complex(w)? * (w - 1.0) * (C::new(3.0, 0.0) - w))
}

fn zeta_damped_ratio(alpha: C, s: C, norm: C) -> Result<C> {
    let num = zeta_block(alpha, s)? * zeta_block(alpha, -s)? * zeta_block(-alpha, s)? * zeta_block(-alpha, -s)?;
    Ok(num / norm)
}

fn zeta_damped_norm(alpha: C) -> Result<C> {
    let z0 = zeta_block(alpha, C::new(0.0, 0.0))?;
    let z1 = zeta_block(-alpha, C::new(0.0, 0.0))?;
    let n = z0 * z0 * z1 * z1;
    if n.norm() < 1e-300 {
        return Err(Error::InvalidArgument(format!(
            "zeta_damped normalization vanishes at alpha = {alpha}"
        )));
    }
    Ok(n)
}

/// `G(s)` for the given variant and shift.
pub fn g_variant(tag: GVariant, alpha: C, s: C) -> Result<C> {
    match tag {
        GVariant::Unit => Ok(C::new(1.0, 0.0)),
        GVariant::Simple => Ok((s * s).exp()),
        GVariant::ZetaDamped => Ok((s * s).exp() * zeta_damped_ratio(alpha, s, zeta_damped_norm(alpha)?)?),
    }
}

/// Which function of `xi` a kernel computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Omega,
    /// `d/d alpha omega_alpha(xi)`, for `alpha`-independent `G` only.
    AlphaDerivative,
}

/// Integrand data for one `(kappa, alpha, G, kind)`.
#[derive(Debug)]
struct Integrand {
    a: C,
    ln_gamma_a: C,
    psi_a: C,
    alpha: C,
    variant: GVariant,
    kind: KernelKind,
    zd_norm: C,
}

impl Integrand {
    fn new(kappa: u32, alpha: C, variant: GVariant, kind: KernelKind) -> Result<Self> {
        if kind == KernelKind::AlphaDerivative && !variant.alpha_free() {
            return Err(Error::InvalidArgument(
                "the analytic alpha-derivative needs an alpha-independent G".into(),
            ));
        }
        let a = alpha + kappa as f64 / 2.0;
        if a.re <= 0.6 {
            return Err(Error::InvalidArgument(format!("k/2 + alpha = {a} too small")));
        }
        let zd_norm = if variant == GVariant::ZetaDamped {
            zeta_damped_norm(alpha)?
        } else {
            C::new(1.0, 0.0)
        };
        Ok(Integrand {
            a,
            ln_gamma_a: ln_gamma(a)?,
            psi_a: digamma(a)?,
            alpha,
            variant,
            kind,
            zd_norm,
        })
    }

    /// `G(s) g(s) / s` (times `psi(a + s) - psi(a)` for the derivative),
    /// divided by `exp(log_scale)`.
    fn eval(&self, s: C, log_scale: f64) -> Result<C> {
        let lg = ln_gamma_unchecked(self.a + s) - self.ln_gamma_a - s * (2.0 * PI).ln();
        let g_log = match self.variant {
            GVariant::Unit => lg,
            _ => lg + s * s,
        };
        let mut v = (g_log - log_scale).exp() / s;
        if self.variant == GVariant::ZetaDamped {
            v *= zeta_damped_ratio(self.alpha, s, self.zd_norm)?;
        }
        if self.kind == KernelKind::AlphaDerivative {
            v *= digamma(self.a + s)? - self.psi_a;
        }
        Ok(v)
    }

    /// Points `s = c + i t` where the zeta-damped factors have removable
    /// singularities.
    fn avoid(&self) -> Vec<f64> {
        if self.variant != GVariant::ZetaDamped {
            return Vec::new();
        }
        let r = self.alpha.re;
        vec![-0.25 - r, -0.25 + r, 0.25 - r, 0.25 + r]
    }

    /// Abscissa near the saddle point of `|integrand * xi^{-s}|`.
    fn saddle(&self, ln_xi: f64) -> f64 {
        let a = self.a.re;
        let target = ln_xi + (2.0 * PI).ln();
        let quad = if self.variant == GVariant::Unit { 0.0 } else { 2.0 };
        // solve quad * c + psi(a + c) = target
        let lo = -a + 0.6;
        let mut c = if quad == 0.0 {
            (target.exp() + 0.5 - a).max(lo)
        } else {
            ((target - a.ln()) / 2.0).max(lo)
        };
        for _ in 0..60 {
            let x = (a + c).max(1e-3);
            let f = quad * c + digamma_real(x).unwrap_or(0.0) - target;
            let df = quad + trigamma_real(x);
            let step = f / df;
            c = (c - step).max(lo);
            if step.abs() < 1e-10 {
                break;
            }
        }
        c.clamp(lo, 400.0)
    }

    fn distance_to_singularity(&self, c: f64) -> f64 {
        let pole0 = if self.kind == KernelKind::AlphaDerivative { f64::INFINITY } else { c.abs() };
        pole0.min(c + self.a.re)
    }
}

/// Trapezoid nodes `F(c + i k h)` on one vertical line.
#[derive(Debug)]
struct NodeSet {
    c: f64,
    h: f64,
    log_scale: f64,
    /// `F(c + i k h)` for `k >= 0`.
    pos: Vec<C>,
    /// `F(c - i k h)` for `k >= 1` (empty when conjugate-symmetric).
    neg: Vec<C>,
    symmetric: bool,
}

const NODE_REL_CUTOFF: f64 = 1e-20;

impl NodeSet {
    fn build(f: &Integrand, c: f64) -> Result<Self> {
        let dist = f.distance_to_singularity(c);
        let h = match f.variant {
            GVariant::Unit => {
                let d = (0.9 * dist).min(2.0 * (f.a.re + c).max(1.0).sqrt());
                2.0 * PI * d / 44.0
            }
            _ => {
                let d = (0.9 * dist).min(1.0);
                2.0 * PI * d / (44.0 + 2.0 * c.abs() * d + d * d)
            }
        };
        let symmetric = f.alpha.im == 0.0;
        let s0 = C::new(c, 0.0);
        let mut log_scale = (ln_gamma_unchecked(f.a + s0) - f.ln_gamma_a).re - c * (2.0 * PI).ln();
        if f.variant != GVariant::Unit {
            log_scale += c * c;
        }
        let march = |sign: f64, start: usize| -> Result<Vec<C>> {
            let mut out = Vec::new();
            let mut peak = 0.0f64;
            let mut quiet = 0;
            let mut k = start;
            loop {
                let s = C::new(c, sign * k as f64 * h);
                let v = f.eval(s, log_scale)?;
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(Error::Quadrature(format!("non-finite integrand at {s}")));
                }
                let m = v.norm();
                peak = peak.max(m);
                out.push(v);
                if m < NODE_REL_CUTOFF * peak && k as f64 * h > 1.0 {
                    quiet += 1;
                    if quiet >= 4 {
                        break;
                    }
                } else {
                    quiet = 0;
                }
                k += 1;
                if k > 400_000 {
                    return Err(Error::Quadrature(format!("integrand on Re s = {c} does not decay")));
                }
            }
            Ok(out)
        };
        let pos = march(1.0, 0)?;
        let neg = if symmetric { Vec::new() } else { march(-1.0, 1)? };
        Ok(NodeSet {
            c,
            h,
            log_scale,
            pos,
            neg,
            symmetric,
        })
    }

    /// `(1 / 2 pi) int F(c + it) xi^{-c - it} dt` by the trapezoid rule.
    fn apply(&self, ln_xi: f64) -> C {
        let step = C::new(0.0, -self.h * ln_xi).exp();
        let sum_side = |vals: &[C], sign: f64, skip_first: bool| -> C {
            let mut acc = C::new(0.0, 0.0);
            let mut rot = C::new(1.0, 0.0);
            let step = if sign > 0.0 { step } else { step.conj() };
            let offset = if skip_first { 1 } else { 0 };
            if skip_first {
                rot = step;
            }
            for (j, v) in vals.iter().enumerate() {
                let k = j + offset;
                if k % 64 == 0 && k > 0 {
                    rot = C::new(0.0, -sign * k as f64 * self.h * ln_xi).exp();
                }
                acc += v * rot;
                rot *= step;
            }
            acc
        };
        let pos = sum_side(&self.pos, 1.0, false);
        let total = if self.symmetric {
            // F(c - it) xi^{-c+it} = conj(F(c + it) xi^{-c-it})
            let first = self.pos[0];
            C::new(2.0 * pos.re - first.re, 0.0)
        } else {
            pos + sum_side(&self.neg, -1.0, true)
        };
        total * (self.h / (2.0 * PI)) * (self.log_scale - self.c * ln_xi).exp()
    }

    /// `(1 / 2 pi) int |F(c + it)| dt`.
    fn abs_integral(&self) -> f64 {
        let s: f64 = self.pos.iter().map(|v| v.norm()).sum::<f64>() - self.pos[0].norm() / 2.0;
        let total = if self.symmetric {
            2.0 * s
        } else {
            s + self.pos[0].norm() / 2.0 + self.neg.iter().map(|v| v.norm()).sum::<f64>() - self.pos[0].norm() / 2.0
        };
        total * self.h / (2.0 * PI) * self.log_scale.exp()
    }
}

/// Direct evaluator of `omega` (or its `alpha`-derivative) by trapezoid
/// quadrature on vertical lines, with node sets shared between nearby `xi`.
pub struct KernelEvaluator {
    kappa: u32,
    alpha: C,
    variant: GVariant,
    kind: KernelKind,
    f: Integrand,
    nodes: RwLock<HashMap<i64, Arc<NodeSet>>>,
    lines: OnceLock<Vec<(f64, f64)>>,
}

const C_QUANTUM: f64 = 0.125;

impl KernelEvaluator {
    pub fn new(kappa: u32, alpha: C, variant: GVariant, kind: KernelKind) -> Result<Self> {
        Ok(KernelEvaluator {
            kappa,
            alpha,
            variant,
            kind,
            f: Integrand::new(kappa, alpha, variant, kind)?,
            nodes: RwLock::new(HashMap::new()),
            lines: OnceLock::new(),
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

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    fn node_set(&self, c: f64) -> Result<Arc<NodeSet>> {
        let key = (c / C_QUANTUM).round() as i64;
        if let Some(n) = self.nodes.read().expect("node cache lock").get(&key) {
            return Ok(n.clone());
        }
        let ns = Arc::new(NodeSet::build(&self.f, key as f64 * C_QUANTUM)?);
        self.nodes.write().expect("node cache lock").insert(key, ns.clone());
        Ok(ns)
    }

    /// Candidate lines with `log (1 / 2 pi) int |F|` for variants whose
    /// saddle estimate is unreliable.
    fn candidate_lines(&self) -> Result<&[(f64, f64)]> {
        if let Some(v) = self.lines.get() {
            return Ok(v);
        }
        let lo = (-self.f.a.re + 0.75).max(-3.5);
        let avoid = self.f.avoid();
        let mut out = Vec::new();
        let mut c = (lo / 0.25).ceil() * 0.25;
        while c <= 6.0 {
            let ok = c.abs() >= 0.5 && avoid.iter().all(|&p| (c - p).abs() >= 0.1);
            if ok {
                out.push((c, self.node_set(c)?.abs_integral().ln()));
            }
            c += 0.25;
        }
        Ok(self.lines.get_or_init(|| out))
    }

    fn choose_line(&self, ln_xi: f64) -> f64 {
        if self.variant == GVariant::ZetaDamped {
            if let Ok(lines) = self.candidate_lines() {
                // minimize the cancellation scale int |F| xi^{-c}
                return lines
                    .iter()
                    .map(|&(c, la)| (c, la - c * ln_xi))
                    .fold((0.5, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b })
                    .0;
            }
        }
        let mut c = self.f.saddle(ln_xi);
        let lo = -self.f.a.re + 0.75;
        c = c.max(lo);
        if c.abs() < 0.5 {
            c = if c >= 0.0 || lo > -0.5 { 0.5 } else { -0.5 };
        }
        let mut c = (c / C_QUANTUM).round() * C_QUANTUM;
        for _ in 0..8 {
            if self.f.avoid().iter().any(|&p| (c - p).abs() < 0.1) {
                c += C_QUANTUM;
            }
        }
        c
    }

    /// Value at `xi = exp(ln_xi)`.
    pub fn eval_ln(&self, ln_xi: f64) -> Result<C> {
        let c = self.choose_line(ln_xi);
        self.eval_on_line(ln_xi, c)
    }

    pub fn eval(&self, xi: f64) -> Result<C> {
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::InvalidArgument(format!("omega needs xi > 0, got {xi}")));
        }
        self.eval_ln(xi.ln())
    }

    /// Value using the line `Re s = c`; adds the residue at `s = 0` when
    /// `c < 0`.
    pub fn eval_on_line(&self, ln_xi: f64, c: f64) -> Result<C> {
        let ns = self.node_set(c)?;
        let mut v = ns.apply(ln_xi);
        if ns.c < 0.0 && self.kind == KernelKind::Omega {
            v += 1.0;
        }
        Ok(v)
    }

    /// `C_A = (1 / 2 pi) int |G g / s| on Re s = A`, so that
    /// `|omega(xi)| <= C_A xi^{-A}` for every `xi > 0`.
    pub fn decay_constant(&self, a: f64) -> Result<f64> {
        Ok(self.node_set(a)?.abs_integral())
    }
}

/// Direct quadrature of `omega_alpha(xi)`.
pub fn omega_kernel(kappa: u32, alpha: C, tag: GVariant, xi: f64) -> Result<C> {
    check_alpha(alpha)?;
    KernelEvaluator::new(kappa, alpha, tag, KernelKind::Omega)?.eval(xi)
}

/// Direct quadrature of `d/d alpha omega_alpha(xi)`.
pub fn omega_alpha_derivative(kappa: u32, alpha: C, tag: GVariant, xi: f64) -> Result<C> {
    check_alpha(alpha)?;
    KernelEvaluator::new(kappa, alpha, tag, KernelKind::AlphaDerivative)?.eval(xi)
}

/// Shifts allowed for the kernel: `|Re alpha| <= 1`.
pub fn check_alpha(alpha: C) -> Result<()> {
    if alpha.re.abs() > 1.0 || !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::OutsideRegion(format!("kernel shift alpha = {alpha} needs |Re alpha| <= 1")));
    }
    Ok(())
}

/// Regularized upper incomplete gamma `Q(a, x)` for real `a > 0`, `x >= 0`.
pub fn upper_incomplete_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let ln_pref = a * x.ln() - x - ln_gamma_unchecked(C::new(a, 0.0)).re;
    if x < a + 1.0 {
        let mut sum = 1.0 / a;
        let mut term = 1.0 / a;
        let mut n = 1.0;
        while term.abs() > sum.abs() * 1e-17 {
            term *= x / (a + n);
            sum += term;
            n += 1.0;
        }
        1.0 - sum * ln_pref.exp()
    } else {
        // modified Lentz continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        ln_pref.exp() * h
    }
}

/// `omega` for `G = 1` from its residue series
/// `1 - x^a e^{-x} sum_n x^n / Gamma(a + n + 1)` with `x = 2 pi xi`.
fn unit_small_xi(a: C, xi: f64) -> C {
    let x = 2.0 * PI * xi;
    let mut term = (a * x.ln() - x - ln_gamma_unchecked(a + 1.0)).exp();
    let mut sum = term;
    let mut n = 1.0;
    while term.norm() > 1e-18 * sum.norm().max(1e-300) && n < 500.0 {
        term *= x / (a + n);
        sum += term;
        n += 1.0;
    }
    C::new(1.0, 0.0) - sum
}

/// `omega` (or its derivative) on a uniform grid in `log xi`, with
/// six-point Lagrange interpolation and a validated error bound.
pub struct KernelCache {
    evaluator: KernelEvaluator,
    u0: f64,
    h: f64,
    values: Vec<C>,
    xi_min: f64,
    xi_max: f64,
    ln_xi_min: f64,
    ln_xi_max: f64,
    error_bound: f64,
    decay: Vec<(f64, f64)>,
}

/// A cache lookup with the flag set when `xi` lies beyond `xi_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: C,
    pub tail: bool,
}

const VALIDATION_POINTS: usize = 1000;
const VALIDATION_SEED: u64 = 0x6b65726e656c;

impl KernelCache {
    pub fn build(kappa: u32, alpha: C, variant: GVariant, xi_min: f64, xi_max: f64, target_err: f64) -> Result<Self> {
        Self::build_kind(kappa, alpha, variant, KernelKind::Omega, xi_min, xi_max, target_err)
    }

    /// Cache over the default `xi` range of the variant at error `1e-13`.
    pub fn standard(kappa: u32, alpha: C, variant: GVariant, kind: KernelKind) -> Result<Self> {
        Self::build_kind(kappa, alpha, variant, kind, 1e-5, variant.default_xi_max(), 1e-13)
    }

    pub fn build_kind(
        kappa: u32,
        alpha: C,
        variant: GVariant,
        kind: KernelKind,
        xi_min: f64,
        xi_max: f64,
        target_err: f64,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        if !(xi_min > 0.0 && xi_max > xi_min && xi_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "kernel cache needs 0 < xi_min < xi_max, got ({xi_min}, {xi_max})"
            )));
        }
        if target_err < 1e-14 {
            return Err(Error::InvalidArgument(format!(
                "target error {target_err:e} below 1e-14 is unattainable in double precision"
            )));
        }
        let evaluator = KernelEvaluator::new(kappa, alpha, variant, kind)?;
        let (l0, l1) = (xi_min.ln(), xi_max.ln());
        let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
        let probes: Vec<f64> = (0..VALIDATION_POINTS).map(|_| rng.gen_range(l0..l1)).collect();
        let direct: Vec<C> = probes
            .iter()
            .map(|&u| evaluator.eval_ln(u))
            .collect::<Result<_>>()?;
        let decay = variant
            .decay_exponents()
            .iter()
            .map(|&a| Ok((a, evaluator.decay_constant(a)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::refine(evaluator, probes, direct, decay, 0.04, target_err, xi_min, xi_max)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        evaluator: KernelEvaluator,
        probes: Vec<f64>,
        direct: Vec<C>,
        decay: Vec<(f64, f64)>,
        mut h: f64,
        target_err: f64,
        xi_min: f64,
        xi_max: f64,
    ) -> Result<Self> {
        let (l0, l1) = (xi_min.ln(), xi_max.ln());
        let mut last_err = f64::INFINITY;
        let mut evaluator = Some(evaluator);
        for _ in 0..6 {
            let ev = evaluator.take().expect("evaluator present");
            let u0 = l0 - 3.0 * h;
            let n = ((l1 - u0) / h).ceil() as usize + 4;
            let values: Vec<C> = (0..n).map(|j| ev.eval_ln(u0 + j as f64 * h)).collect::<Result<_>>()?;
            let mut cache = KernelCache {
                evaluator: ev,
                u0,
                h,
                values,
                xi_min,
                xi_max,
                ln_xi_min: l0,
                ln_xi_max: l1,
                error_bound: 0.0,
                decay: decay.clone(),
            };
            let err = probes
                .iter()
                .zip(&direct)
                .map(|(&u, &d)| (cache.interpolate(u) - d).norm())
                .fold(0.0f64, f64::max);
            if err <= target_err {
                cache.error_bound = err.max(1e-16);
                return Ok(cache);
            }
            last_err = err;
            evaluator = Some(cache.evaluator);
            h /= 2.0;
        }
        Err(Error::Quadrature(format!(
            "kernel cache could not reach {target_err:e}; best validated error {last_err:e}"
        )))
    }

    #[inline]
    fn interpolate(&self, u: f64) -> C {
        let x = (u - self.u0) / self.h;
        let j = (x.floor() as isize).clamp(2, self.values.len() as isize - 4) as usize;
        let t = x - j as f64;
        // nodes at t = -2, -1, 0, 1, 2, 3
        let d = [t + 2.0, t + 1.0, t, t - 1.0, t - 2.0, t - 3.0];
        const DEN: [f64; 6] = [-120.0, 24.0, -12.0, 12.0, -24.0, 120.0];
        let mut prefix = [1.0f64; 6];
        for m in 1..6 {
            prefix[m] = prefix[m - 1] * d[m - 1];
        }
        let mut suffix = 1.0;
        let mut acc = C::new(0.0, 0.0);
        for m in (0..6).rev() {
            let w = prefix[m] * suffix / DEN[m];
            acc += self.values[j - 2 + m] * w;
            suffix *= d[m];
        }
        acc
    }

    /// Value at `xi = exp(ln_xi)`: interpolated inside the grid, computed
    /// directly below `xi_min`, zero above `xi_max`.
    #[inline]
    pub fn eval_ln(&self, ln_xi: f64) -> C {
        if ln_xi > self.ln_xi_max {
            return C::new(0.0, 0.0);
        }
        if ln_xi < self.ln_xi_min {
            return self.below_range(ln_xi);
        }
        self.interpolate(ln_xi)
    }

    pub fn eval(&self, xi: f64) -> C {
        self.eval_ln(xi.ln())
    }

    pub fn lookup(&self, xi: f64) -> KernelValue {
        KernelValue {
            value: self.eval(xi),
            tail: xi > self.xi_max,
        }
    }

    #[cold]
    fn below_range(&self, ln_xi: f64) -> C {
        if self.evaluator.variant == GVariant::Unit && self.evaluator.kind == KernelKind::Omega {
            return unit_small_xi(self.evaluator.f.a, ln_xi.exp());
        }
        self.evaluator.eval_ln(ln_xi).unwrap_or(C::new(f64::NAN, f64::NAN))
    }

    pub fn kappa(&self) -> u32 {
        self.evaluator.kappa
    }

    pub fn alpha(&self) -> C {
        self.evaluator.alpha
    }

    pub fn variant(&self) -> GVariant {
        self.evaluator.variant
    }

    pub fn kind(&self) -> KernelKind {
        self.evaluator.kind
    }

    pub fn xi_range(&self) -> (f64, f64) {
        (self.xi_min, self.xi_max)
    }

    pub fn grid_step(&self) -> f64 {
        self.h
    }

    /// `(xi, value)` at every grid node.
    pub fn grid(&self) -> impl Iterator<Item = (f64, C)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(j, &v)| ((self.u0 + j as f64 * self.h).exp(), v))
    }

    /// Largest interpolation error seen on the validation sample.
    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    /// `(A, C_A)` with `|omega(xi)| <= C_A xi^{-A}`.
    pub fn decay_constants(&self) -> &[(f64, f64)] {
        &self.decay
    }

    /// Upper bound for `sum_{n > n0} tau(n) n^{-sigma} |omega(n / q)|`.
    pub fn tail_bound(&self, q: f64, sigma: f64, n0: f64) -> f64 {
        self.decay
            .iter()
            .filter(|&&(a, _)| sigma + a > 1.0)
            .map(|&(a, c)| c * q.powf(a) * divisor_tail(n0.max(2.0), sigma + a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest `n0` (capped at `q * xi_max`) with `tail_bound <= tol`,
    /// together with the bound at that `n0`.
    pub fn truncation(&self, q: f64, sigma: f64, tol: f64) -> (usize, f64) {
        let cap = (q * self.xi_max).floor().max(1.0);
        let bound_cap = self.tail_bound(q, sigma, cap);
        if bound_cap > tol {
            return (cap as usize, bound_cap);
        }
        let (mut lo, mut hi) = (1.0f64, cap);
        while hi - lo > 1.0 {
            let mid = ((lo + hi) / 2.0).floor();
            if self.tail_bound(q, sigma, mid) <= tol {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (hi as usize, self.tail_bound(q, sigma, hi))
    }
}

/// Bound for `sum_{n > N} tau(n) n^{-beta}` with `beta > 1`, from
/// `sum_{n <= x} tau(n) <= x (log x + 1)` and partial summation.
pub fn divisor_tail(n: f64, beta: f64) -> f64 {
    let b1 = beta - 1.0;
    beta * n.powf(-b1) * (n.ln() / b1 + 1.0 / (b1 * b1) + 1.0 / b1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn g_factor_values() {
        assert!((g_factor(12, real(0.0), real(0.0)).unwrap() - 1.0).norm() < 1e-15);
        let v = g_factor(12, real(0.0), real(1.0)).unwrap();
        assert!((v - real(6.0 / (2.0 * PI))).norm() < 1e-14);
        let a = C::new(0.1, 0.3);
        let s = C::new(0.7, -1.2);
        let lhs = g_factor(18, a, s).unwrap().conj();
        let rhs = g_factor(18, a.conj(), s.conj()).unwrap();
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn g_variants_even_and_normalized() {
        let alpha = real(0.01);
        let s = C::new(0.3, 0.7);
        for tag in [GVariant::Unit, GVariant::Simple, GVariant::ZetaDamped] {
            let g0 = g_variant(tag, alpha, real(0.0)).unwrap();
            assert!((g0 - 1.0).norm() < 1e-14, "{tag}");
            let d = g_variant(tag, alpha, s).unwrap() - g_variant(tag, alpha, -s).unwrap();
            assert!(d.norm() < 1e-13, "{tag}");
        }
        // vanishes where 4 alpha + 4 s = 1
        let s0 = real(0.25) - alpha;
        assert!(g_variant(GVariant::ZetaDamped, alpha, s0).unwrap().norm() < 1e-12);
    }

    #[test]
    fn unit_kernel_is_incomplete_gamma() {
        for &k in &[12u32, 18, 26] {
            let ev = KernelEvaluator::new(k, real(0.0), GVariant::Unit, KernelKind::Omega).unwrap();
            for &xi in &[1e-4, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
                let q = upper_incomplete_gamma_q(k as f64 / 2.0, 2.0 * PI * xi);
                let w = ev.eval(xi).unwrap();
                assert!((w.re - q).abs() < 1e-13 * q.max(1e-3), "k={k} xi={xi}: {} vs {q}", w.re);
                assert!(w.im.abs() < 1e-15);
            }
        }
        let a = 6.02;
        let ev = KernelEvaluator::new(12, real(0.02), GVariant::Unit, KernelKind::Omega).unwrap();
        for &xi in &[0.3, 3.0] {
            let q = upper_incomplete_gamma_q(a, 2.0 * PI * xi);
            assert!((ev.eval(xi).unwrap().re - q).abs() < 1e-13);
            assert!((unit_small_xi(real(a), xi).re - q).abs() < 1e-13);
        }
    }

    #[test]
    fn simple_kernel_reference_values() {
        // high-precision reference, kappa = 12, alpha = 0
        let refs = [
            (1.0, 0.465_107_9),
            (10.0, 0.049_350_168),
            (100.0, 6.383_813_5e-4),
            (1e3, 8.081_990_4e-7),
            (1e4, 9.107_089_1e-11),
            (1e5, 8.691_853_8e-16),
        ];
        for (xi, want) in refs {
            let w = omega_kernel(12, real(0.0), GVariant::Simple, xi).unwrap();
            assert!((w.re - want).abs() < 1e-7 * want, "xi = {xi}: {}", w.re);
        }
        let small = omega_kernel(12, real(0.0), GVariant::Simple, 1e-6).unwrap();
        assert!((small.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn omega_tends_to_one() {
        for (tag, xi) in [(GVariant::Unit, 1e-5), (GVariant::Simple, 1e-5), (GVariant::ZetaDamped, 1e-10)] {
            let w = omega_kernel(12, real(0.01), tag, xi).unwrap();
            assert!((w - 1.0).norm() < 1e-10, "{tag}: {w}");
        }
        // the zeta factors make G large on vertical lines, so the approach is slow
        let w = omega_kernel(12, real(0.01), GVariant::ZetaDamped, 1e-6).unwrap();
        assert!((w.re - 1.000_399_388_651).abs() < 1e-10);
    }

    #[test]
    fn line_independence() {
        // moving the contour across s = 0 picks up the residue 1
        let ev = KernelEvaluator::new(12, C::new(0.02, 0.1), GVariant::Simple, KernelKind::Omega).unwrap();
        let u = 0.3f64.ln();
        let a = ev.eval_on_line(u, 1.0).unwrap();
        let b = ev.eval_on_line(u, -1.0).unwrap();
        let c = ev.eval_on_line(u, 1.5).unwrap();
        assert!((a - b).norm() < 1e-13);
        assert!((a - c).norm() < 1e-13);
    }

    #[test]
    fn alpha_derivative_matches_difference() {
        let xi = 0.7;
        let h = 1e-4;
        for tag in [GVariant::Unit, GVariant::Simple] {
            let d = omega_alpha_derivative(18, real(0.0), tag, xi).unwrap();
            let p = omega_kernel(18, real(h), tag, xi).unwrap();
            let m = omega_kernel(18, real(-h), tag, xi).unwrap();
            assert!(((p - m) / (2.0 * h) - d).norm() < 1e-8, "{tag}");
        }
        assert!(omega_alpha_derivative(18, real(0.0), GVariant::ZetaDamped, xi).is_err());
    }

    #[test]
    fn decay_constants_bound_kernel() {
        for tag in [GVariant::Simple, GVariant::Unit] {
            let ev = KernelEvaluator::new(12, real(0.0), tag, KernelKind::Omega).unwrap();
            for a in [2.0, 5.0, 10.0] {
                let ca = ev.decay_constant(a).unwrap();
                let mut xi = 1.0f64;
                while xi <= 1e3 {
                    let w = ev.eval(xi).unwrap().norm();
                    assert!(w * xi.powf(a) <= ca * (1.0 + 1e-12), "{tag} A={a} xi={xi}");
                    xi *= 1.3;
                }
            }
        }
    }

    #[test]
    fn cache_meets_target() {
        let cache = KernelCache::build(12, real(0.0), GVariant::Unit, 1e-4, 12.0, 1e-12).unwrap();
        assert!(cache.error_bound() <= 1e-12);
        let ev = KernelEvaluator::new(12, real(0.0), GVariant::Unit, KernelKind::Omega).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let u: f64 = rng.gen_range((1e-4f64).ln()..12f64.ln());
            let d = ev.eval_ln(u).unwrap();
            assert!((cache.eval_ln(u) - d).norm() <= 1e-12);
        }
        let grid: Vec<f64> = cache.grid().map(|(x, _)| x).collect();
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        let v = cache.lookup(24.0);
        assert!(v.tail && v.value == C::new(0.0, 0.0));
        let below = cache.eval(1e-6);
        assert!((below.re - upper_incomplete_gamma_q(6.0, 2.0 * PI * 1e-6)).abs() < 1e-14);
    }

    #[test]
    fn cache_rejects_bad_requests() {
        assert!(KernelCache::build(12, real(0.0), GVariant::Unit, 1e-4, 12.0, 1e-15).is_err());
        assert!(KernelCache::build(12, real(0.0), GVariant::Unit, 1.0, 0.5, 1e-12).is_err());
        assert!(omega_kernel(12, real(2.0), GVariant::Unit, 1.0).is_err());
    }

    #[test]
    fn divisor_tail_dominates_sum() {
        let tau = crate::arith::divisor_count_table(200_000);
        for (n0, beta) in [(100usize, 3.0), (1000, 1.5), (50, 11.5)] {
            let s: f64 = (n0 + 1..=200_000).map(|n| tau[n] as f64 * (n as f64).powf(-beta)).sum();
            assert!(s <= divisor_tail(n0 as f64, beta));
        }
    }
}
