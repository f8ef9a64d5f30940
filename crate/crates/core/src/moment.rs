//! Smoothed first moments over the `8d` family: the brute-force sums, their
//! predicted main terms and the residual diagnostics.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{digamma_real, ln_gamma, GVariant, WindowSpec};
use crate::arith::{kronecker, split_squarefree, SquarefreeStream};
use crate::eigenform::{check_weight, EigenformTable};
use crate::error::{Error, Result};
use crate::euler::{
    sym_square_afe, sym_square_derivative, z_star_derivative, zn_accelerated, EulerContext, DEFAULT_DEPTH,
    DEFAULT_PRIME_CUTOFF,
};
use crate::lfun::{
    central_derivative, twisted_value, AfeKernels, DerivativeKernels, DirichletData, TwistPoint, DEFAULT_TAIL_TOL,
};

type C = Complex64;

/// Format version written in the CSV header comment.
pub const FORMAT_VERSION: u32 = 1;
/// d-values per work block. Fixed, so the reduction order never depends
/// on the worker count.
pub const BLOCK: usize = 16;
/// Constant in the shift-range condition `|Re alpha| <= c / log X`.
pub const SHIFT_RE_CONSTANT: f64 = 2.0;
/// Residuals below this fraction of the main term are treated as noise.
pub const NOISE_FLOOR: f64 = 1e-9;
/// Default spread factor for the normalized residuals.
pub const DEFAULT_SPREAD: f64 = 4.0;
pub const BOOTSTRAP_SAMPLES: usize = 2000;

/// One moment sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentRequest {
    pub kappa: u32,
    pub ell: u64,
    pub alpha: C,
    pub x_grid: Vec<f64>,
    pub window: WindowSpec,
    pub derivative: bool,
    pub variant: GVariant,
    /// 0 means the rayon default.
    pub workers: usize,
    /// Per-L tail tolerance.
    pub tail_tol: f64,
    pub prime_cutoff: u64,
    pub depth: u32,
}

impl MomentRequest {
    /// `alpha = 0`, `l = 1`, default window and kernels.
    pub fn new(kappa: u32, x_grid: Vec<f64>) -> Self {
        MomentRequest {
            kappa,
            ell: 1,
            alpha: C::new(0.0, 0.0),
            x_grid,
            window: crate::analysis::default_window(),
            derivative: false,
            variant: GVariant::Unit,
            workers: 0,
            tail_tol: DEFAULT_TAIL_TOL,
            prime_cutoff: DEFAULT_PRIME_CUTOFF,
            depth: DEFAULT_DEPTH,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_weight(self.kappa)?;
        if self.ell == 0 || self.ell % 2 == 0 {
            return Err(Error::InvalidArgument(format!("l must be odd and positive, got {}", self.ell)));
        }
        if self.x_grid.is_empty() {
            return Err(Error::InvalidArgument("empty X grid".into()));
        }
        if self.x_grid.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidArgument(format!("X grid must be positive: {:?}", self.x_grid)));
        }
        if self.x_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(format!("X grid must increase: {:?}", self.x_grid)));
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(Error::InvalidArgument(format!("tail tolerance {} out of range", self.tail_tol)));
        }
        if self.window.shift != C::new(0.0, 0.0) {
            return Err(Error::InvalidArgument("moment windows must be unshifted".into()));
        }
        if self.derivative {
            if self.kappa % 4 != 2 {
                return Err(Error::InvalidArgument(format!(
                    "derivative moments need weight 2 mod 4, got {}",
                    self.kappa
                )));
            }
            if self.alpha != C::new(0.0, 0.0) {
                return Err(Error::InvalidArgument("derivative moments are taken at alpha = 0".into()));
            }
        }
        if self.alpha.re.abs() > 0.25 {
            return Err(Error::OutsideRegion(format!("alpha = {} needs |Re alpha| <= 1/4", self.alpha)));
        }
        if self.alpha != C::new(0.0, 0.0) {
            for &x in &self.x_grid {
                let lx = x.ln();
                if lx <= 1.0 {
                    return Err(Error::OutsideRegion(format!("shifted moments need X > e, got {x}")));
                }
                if self.alpha.re.abs() > SHIFT_RE_CONSTANT / lx || self.alpha.im.abs() > lx * lx {
                    return Err(Error::OutsideRegion(format!(
                        "alpha = {} outside |Re| <= {SHIFT_RE_CONSTANT}/log X, |Im| <= (log X)^2 at X = {x}",
                        self.alpha
                    )));
                }
            }
        }
        Ok(())
    }

    /// `[ceil(X lo), floor(X hi)]`.
    pub fn d_range(&self, x: f64) -> (u64, u64) {
        let lo = (x * self.window.lo).ceil().max(1.0) as u64;
        let hi = (x * self.window.hi).floor().max(0.0) as u64;
        (lo, hi)
    }

    fn largest_d(&self) -> u64 {
        self.x_grid.iter().map(|&x| self.d_range(x).1).max().unwrap_or(0)
    }

    /// Eigenvalue table length needed by the measured side.
    pub fn required_table(&self) -> Result<usize> {
        let q = 8.0 * self.largest_d() as f64;
        if q == 0.0 {
            return Ok(1);
        }
        if self.derivative {
            Ok(DerivativeKernels::new(self.kappa, self.variant)?.required_terms(q, self.tail_tol))
        } else {
            Ok(AfeKernels::new(self.kappa, self.alpha, self.variant)?.required_terms(q, self.tail_tol))
        }
    }
}

/// Measured side at one `X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredPoint {
    pub x: f64,
    pub value: C,
    /// Number of `d` with a nonzero summand.
    pub count: usize,
    pub max_terms: usize,
    /// `sum |Phi(d/X)|` times the per-L tail and kernel bounds.
    pub error_bound: f64,
}

/// Neumaier summation, componentwise.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: C,
    carry: C,
}

impl Compensated {
    fn add(&mut self, v: C) {
        self.sum.re = add_part(self.sum.re, v.re, &mut self.carry.re);
        self.sum.im = add_part(self.sum.im, v.im, &mut self.carry.im);
    }

    fn value(&self) -> C {
        self.sum + self.carry
    }
}

fn add_part(s: f64, v: f64, c: &mut f64) -> f64 {
    let t = s + v;
    if s.abs() >= v.abs() {
        *c += (s - t) + v;
    } else {
        *c += (v - t) + s;
    }
    t
}

#[derive(Debug, Clone, Copy, Default)]
struct Block {
    sum: Compensated,
    count: usize,
    max_terms: usize,
    error: f64,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))
}

fn check_table(req: &MomentRequest, data: &DirichletData) -> Result<()> {
    req.validate()?;
    if data.weight() != req.kappa {
        return Err(Error::InvalidArgument(format!(
            "table weight {} does not match requested weight {}",
            data.weight(),
            req.kappa
        )));
    }
    let need = req.required_table()?;
    if data.n_max() < need {
        return Err(Error::TableTooShort {
            required: need,
            available: data.n_max(),
        });
    }
    Ok(())
}

/// Kernels for the measured side of one request.
enum Kernels {
    Value(AfeKernels),
    Derivative(DerivativeKernels),
}

/// Measured side of a request, one `X` at a time.
pub struct Measurer<'a> {
    req: &'a MomentRequest,
    data: &'a DirichletData,
    kernels: Kernels,
    pool: rayon::ThreadPool,
}

impl<'a> Measurer<'a> {
    pub fn new(req: &'a MomentRequest, data: &'a DirichletData) -> Result<Self> {
        check_table(req, data)?;
        let kernels = if req.derivative {
            Kernels::Derivative(DerivativeKernels::new(req.kappa, req.variant)?)
        } else {
            Kernels::Value(AfeKernels::new(req.kappa, req.alpha, req.variant)?)
        };
        Ok(Measurer {
            req,
            data,
            kernels,
            pool: pool(req.workers)?,
        })
    }

    /// `chi_{8d}(l)` times the value (or derivative), its term count and
    /// error bound; `None` when the character vanishes.
    fn term(&self, d: u64) -> Result<Option<(C, usize, f64)>> {
        let chi = kronecker(8 * d as i64, self.req.ell as i64);
        if chi == 0 {
            return Ok(None);
        }
        match &self.kernels {
            Kernels::Value(k) => {
                let p = TwistPoint::new(d, self.req.alpha, self.req.kappa)?;
                let v = twisted_value(self.data, k, p.disc(), self.req.tail_tol)?;
                Ok(Some((v.value * chi as f64, v.terms_used, v.tail_bound + v.kernel_bound)))
            }
            Kernels::Derivative(k) => {
                let v = central_derivative(self.data, k, d)?;
                // the two routes bound the differencing error
                let err = (v.value - v.analytic).abs();
                Ok(Some((C::new(v.value * chi as f64, 0.0), v.terms_used, err)))
            }
        }
    }

    /// Odd squarefree `d` in the window support, summed in contiguous
    /// blocks and reduced in `d` order.
    pub fn measure(&self, x: f64) -> Result<MeasuredPoint> {
        let (lo, hi) = self.req.d_range(x);
        let ds: Vec<u64> = if lo <= hi {
            SquarefreeStream::new(lo, hi, true).collect()
        } else {
            Vec::new()
        };
        let window = self.req.window;
        let blocks: Vec<Block> = self.pool.install(|| {
            ds.par_chunks(BLOCK)
                .map(|chunk| {
                    let mut b = Block::default();
                    for &d in chunk {
                        let phi = window.eval(d as f64 / x);
                        if phi == C::new(0.0, 0.0) {
                            continue;
                        }
                        if let Some((v, n, e)) = self.term(d)? {
                            b.sum.add(v * phi);
                            b.count += 1;
                            b.max_terms = b.max_terms.max(n);
                            b.error += e * phi.norm();
                        }
                    }
                    Ok(b)
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let mut total = Compensated::default();
        let (mut count, mut max_terms, mut error) = (0, 0, 0.0);
        for b in &blocks {
            total.add(b.sum.value());
            count += b.count;
            max_terms = max_terms.max(b.max_terms);
            error += b.error;
        }
        Ok(MeasuredPoint {
            x,
            value: total.value(),
            count,
            max_terms,
            error_bound: error,
        })
    }
}

/// `M(alpha, l) = sum* chi_{8d}(l) L(1/2 + alpha, f x chi_{8d}) Phi(d/X)`
/// over odd squarefree `d` in the window support.
pub fn brute_moment(req: &MomentRequest, data: &DirichletData) -> Result<Vec<MeasuredPoint>> {
    if req.derivative {
        return Err(Error::InvalidArgument("use derivative_brute_moment for derivative requests".into()));
    }
    let m = Measurer::new(req, data)?;
    req.x_grid.iter().map(|&x| m.measure(x)).collect()
}

/// `sum* chi_{8d}(l) L'(1/2, f x chi_{8d}) Phi(d/X)`.
pub fn derivative_brute_moment(req: &MomentRequest, data: &DirichletData) -> Result<Vec<MeasuredPoint>> {
    if !req.derivative {
        return Err(Error::InvalidArgument("derivative flag not set".into()));
    }
    let m = Measurer::new(req, data)?;
    req.x_grid.iter().map(|&x| m.measure(x)).collect()
}

/// `gamma_alpha = (8 / 2 pi)^{-2 alpha} Gamma(k/2 - alpha) / Gamma(k/2 + alpha)`.
pub fn gamma_alpha(kappa: u32, alpha: C) -> Result<C> {
    let h = C::new(kappa as f64 / 2.0, 0.0);
    Ok((-2.0 * alpha * (8.0 / (2.0 * PI)).ln() + ln_gamma(h - alpha)? - ln_gamma(h + alpha)?).exp())
}

fn i_pow(kappa: u32) -> f64 {
    if kappa % 4 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The X-free pieces of both displayed main terms at one `(alpha, l, window)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MainTermConstants {
    pub kappa: u32,
    pub ell1: u64,
    pub alpha: C,
    pub window: WindowSpec,
    /// `Phi~(1)` and `Phi~(1 - 2 alpha)`.
    pub phi_plus: C,
    pub phi_minus: C,
    /// `L(1 + 2 alpha, sym^2 f)` and `L(1 - 2 alpha, sym^2 f)`.
    pub l_plus: C,
    pub l_minus: C,
    /// `Z(1/2 + alpha, l)` and `Z(1/2 - alpha, l)`.
    pub z_plus: C,
    pub z_minus: C,
    pub gamma_alpha: C,
    /// Largest of the sym^2 series bounds and the product tail bounds.
    pub l_bound: f64,
    pub z_bound: f64,
}

impl MainTermConstants {
    pub fn new(
        table: &EigenformTable,
        ell: u64,
        alpha: C,
        window: WindowSpec,
        cutoff: u64,
        depth: u32,
    ) -> Result<Self> {
        let kappa = table.weight();
        check_weight(kappa)?;
        let ctx = EulerContext::new(table, ell, cutoff, depth)?;
        let (ell1, _) = split_squarefree(ell)?;
        let one = C::new(1.0, 0.0);
        let lp = sym_square_afe(table, one + 2.0 * alpha)?;
        let lm = sym_square_afe(table, one - 2.0 * alpha)?;
        let zp = zn_accelerated(&ctx, alpha, depth)?;
        let zm = zn_accelerated(&ctx, -alpha, depth)?;
        Ok(MainTermConstants {
            kappa,
            ell1,
            alpha,
            window,
            phi_plus: window.mellin(one)?,
            phi_minus: window.mellin(one - 2.0 * alpha)?,
            l_plus: lp.value,
            l_minus: lm.value,
            z_plus: zp.value,
            z_minus: zm.value,
            gamma_alpha: gamma_alpha(kappa, alpha)?,
            l_bound: lp.bound.max(lm.bound),
            z_bound: zp.tail_bound.max(zm.tail_bound),
        })
    }

    /// `4 X Phi~(1) / (pi^2 l_1^{1/2+alpha}) L(1+2 alpha) Z(1/2+alpha, l)`.
    pub fn first_term(&self, x: f64) -> C {
        let l1 = (-(self.alpha + 0.5) * (self.ell1 as f64).ln()).exp();
        self.phi_plus * self.l_plus * self.z_plus * l1 * (4.0 * x / (PI * PI))
    }

    /// `i^k 4 gamma_alpha X^{1-2 alpha} Phi~(1-2 alpha) / (pi^2 l_1^{1/2-alpha})
    /// L(1-2 alpha) Z(1/2-alpha, l)`.
    pub fn second_term(&self, x: f64) -> C {
        let l1 = (-(0.5 - self.alpha) * (self.ell1 as f64).ln()).exp();
        let xp = ((1.0 - 2.0 * self.alpha) * x.ln()).exp();
        self.gamma_alpha * xp * self.phi_minus * self.l_minus * self.z_minus * l1 * (4.0 * i_pow(self.kappa) / (PI * PI))
    }

    pub fn total(&self, x: f64) -> C {
        self.first_term(x) + self.second_term(x)
    }

    fn components(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        for (k, v) in [
            ("phi_plus", self.phi_plus),
            ("phi_minus", self.phi_minus),
            ("l_sym2_plus", self.l_plus),
            ("l_sym2_minus", self.l_minus),
            ("z_plus", self.z_plus),
            ("z_minus", self.z_minus),
            ("gamma_alpha", self.gamma_alpha),
        ] {
            m.insert(format!("{k}_re"), v.re);
            m.insert(format!("{k}_im"), v.im);
        }
        m.insert("l_sym2_bound".into(), self.l_bound);
        m.insert("z_tail_bound".into(), self.z_bound);
        m
    }
}

/// Predicted main term at every grid point.
pub fn main_term(req: &MomentRequest, table: &EigenformTable) -> Result<Vec<C>> {
    let c = MainTermConstants::new(table, req.ell, req.alpha, req.window, req.prime_cutoff, req.depth)?;
    Ok(req.x_grid.iter().map(|&x| c.total(x)).collect())
}

/// The second displayed term against `i^k gamma_alpha X^{-2 alpha}` times the
/// first term at `-alpha` with the window `x^{-2 alpha} Phi(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowShiftCheck {
    pub direct: C,
    pub via_shift: C,
    pub relative: f64,
}

pub fn window_shift_check(
    table: &EigenformTable,
    ell: u64,
    alpha: C,
    window: WindowSpec,
    x: f64,
    cutoff: u64,
    depth: u32,
) -> Result<WindowShiftCheck> {
    let c = MainTermConstants::new(table, ell, alpha, window, cutoff, depth)?;
    let s = MainTermConstants::new(table, ell, -alpha, window.shifted(-2.0 * alpha), cutoff, depth)?;
    let direct = c.second_term(x);
    let via_shift = s.first_term(x) * c.gamma_alpha * (-2.0 * alpha * x.ln()).exp() * i_pow(c.kappa);
    Ok(WindowShiftCheck {
        direct,
        via_shift,
        relative: (direct - via_shift).norm() / direct.norm(),
    })
}

/// Richardson limit of the main term along real `alpha -> 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaLimit {
    pub samples: Vec<(f64, C)>,
    pub limit: C,
    pub direct: C,
    pub relative: f64,
}

/// Polynomial extrapolation to `alpha = 0` through the given sample points.
pub fn alpha_zero_limit(
    table: &EigenformTable,
    ell: u64,
    window: WindowSpec,
    x: f64,
    alphas: &[f64],
    cutoff: u64,
    depth: u32,
) -> Result<AlphaLimit> {
    if alphas.len() < 2 || alphas.iter().any(|a| *a == 0.0) {
        return Err(Error::InvalidArgument("need at least two nonzero sample shifts".into()));
    }
    let mut samples = Vec::with_capacity(alphas.len());
    for &a in alphas {
        let c = MainTermConstants::new(table, ell, C::new(a, 0.0), window, cutoff, depth)?;
        samples.push((a, c.total(x)));
    }
    // Neville at 0
    let mut p: Vec<C> = samples.iter().map(|s| s.1).collect();
    let n = p.len();
    for k in 1..n {
        for i in 0..n - k {
            let (xi, xk) = (alphas[i], alphas[i + k]);
            p[i] = (p[i + 1] * xi - p[i] * xk) / (xi - xk);
        }
    }
    let limit = p[0];
    let direct = MainTermConstants::new(table, ell, C::new(0.0, 0.0), window, cutoff, depth)?.total(x);
    Ok(AlphaLimit {
        samples,
        limit,
        direct,
        relative: (limit - direct).norm() / direct.norm(),
    })
}

/// Pieces of the derivative-moment main term.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeConstants {
    pub kappa: u32,
    pub phi: f64,
    pub phi_log_derivative: f64,
    pub l_sym2: f64,
    pub l_sym2_log_derivative: f64,
    pub z_star: f64,
    pub z_star_log_derivative: f64,
    pub digamma: f64,
    /// Step-halving ratios of the two numerical derivatives, about 4.
    pub l_ratio: f64,
    pub z_ratio: f64,
}

impl DerivativeConstants {
    pub fn new(table: &EigenformTable, window: WindowSpec, cutoff: u64, depth: u32) -> Result<Self> {
        let kappa = table.weight();
        check_weight(kappa)?;
        let ctx = EulerContext::new(table, 1, cutoff, depth.max(1))?;
        let one = C::new(1.0, 0.0);
        let phi = window.mellin(one)?.re;
        let dphi = window.mellin_derivative(one)?.re;
        let l = sym_square_afe(table, one)?.value.re;
        let dl = sym_square_derivative(table, 1.0)?;
        let z = zn_accelerated(&ctx, C::new(0.0, 0.0), ctx.depth())?.value.re;
        let dz = z_star_derivative(&ctx)?;
        Ok(DerivativeConstants {
            kappa,
            phi,
            phi_log_derivative: dphi / phi,
            l_sym2: l,
            l_sym2_log_derivative: dl.value / l,
            z_star: z,
            z_star_log_derivative: dz.value,
            digamma: digamma_real(kappa as f64 / 2.0)?,
            l_ratio: dl.error_ratio,
            z_ratio: dz.error_ratio,
        })
    }

    /// Everything in the bracket except `log X`.
    pub fn bracket_constant(&self) -> f64 {
        2.0 * self.l_sym2_log_derivative
            + self.z_star_log_derivative
            + (8.0 / (2.0 * PI)).ln()
            + self.digamma
            + self.phi_log_derivative
    }

    pub fn bracket(&self, x: f64) -> f64 {
        x.ln() + self.bracket_constant()
    }

    /// `8 Phi~(1) / pi^2 L(1, sym^2 f) Z*(0) X`.
    pub fn leading(&self, x: f64) -> f64 {
        8.0 * self.phi / (PI * PI) * self.l_sym2 * self.z_star * x
    }

    pub fn total(&self, x: f64) -> f64 {
        self.leading(x) * self.bracket(x)
    }

    fn components(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        m.insert("phi_1".into(), self.phi);
        m.insert("phi_log_derivative".into(), self.phi_log_derivative);
        m.insert("l_sym2_1".into(), self.l_sym2);
        m.insert("l_sym2_log_derivative".into(), self.l_sym2_log_derivative);
        m.insert("l_sym2_step_ratio".into(), self.l_ratio);
        m.insert("z_star_0".into(), self.z_star);
        m.insert("z_star_log_derivative".into(), self.z_star_log_derivative);
        m.insert("z_star_step_ratio".into(), self.z_ratio);
        m.insert("digamma_half_weight".into(), self.digamma);
        m.insert("bracket_constant".into(), self.bracket_constant());
        m
    }
}

/// Derivative main term at every grid point.
pub fn derivative_main_term(kappa: u32, window: WindowSpec, x: f64, table: &EigenformTable) -> Result<f64> {
    if kappa % 4 != 2 {
        return Err(Error::InvalidArgument(format!("derivative main term needs weight 2 mod 4, got {kappa}")));
    }
    if table.weight() != kappa {
        return Err(Error::InvalidArgument("table weight mismatch".into()));
    }
    Ok(DerivativeConstants::new(table, window, DEFAULT_PRIME_CUTOFF.min(table.n_max() as u64), DEFAULT_DEPTH)?
        .total(x))
}

/// One CSV row. Complex columns keep their imaginary parts for the JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRow {
    pub x: f64,
    pub measured: f64,
    pub measured_im: f64,
    pub predicted: f64,
    pub predicted_im: f64,
    pub residual: f64,
    pub residual_norm: f64,
    pub count: usize,
    pub max_terms: usize,
    pub error_bound: f64,
}

impl MomentRow {
    pub fn new(m: &MeasuredPoint, predicted: C) -> Self {
        let r = m.value - predicted;
        MomentRow {
            x: m.x,
            measured: m.value.re,
            measured_im: m.value.im,
            predicted: predicted.re,
            predicted_im: predicted.im,
            residual: r.re,
            residual_norm: r.re / m.x.sqrt(),
            count: m.count,
            max_terms: m.max_terms,
            error_bound: m.error_bound,
        }
    }

    pub fn relative_deviation(&self) -> f64 {
        (self.residual / self.predicted).abs()
    }
}

/// Decay summary of the residual column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualSummary {
    /// Least-squares slope of `log |R|` against `log X`.
    pub slope: Option<f64>,
    /// 95% bootstrap band of the slope.
    pub band: Option<(f64, f64)>,
    /// `max |R|/sqrt X` over `min |R|/sqrt X`.
    pub spread: f64,
    pub spread_flagged: bool,
    pub noise_floor: bool,
    pub note: String,
}

fn ls_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx < 1e-300 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Slope and spread of the residuals. Residuals within the noise floor
/// (relative to the main term, or below the row error bound) make the
/// slope undefined.
pub fn residual_analysis(rows: &[MomentRow], spread_factor: f64, seed: u64) -> Result<ResidualSummary> {
    if rows.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "residual analysis needs at least 3 grid points, got {}",
            rows.len()
        )));
    }
    let noisy = rows
        .iter()
        .any(|r| r.residual.abs() <= NOISE_FLOOR * r.predicted.abs() + r.error_bound || r.residual == 0.0);
    let norms: Vec<f64> = rows.iter().map(|r| r.residual_norm.abs()).collect();
    let max = norms.iter().cloned().fold(0.0, f64::max);
    let min = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = if min > 0.0 { max / min } else { f64::INFINITY };
    if noisy {
        return Ok(ResidualSummary {
            slope: None,
            band: None,
            spread,
            spread_flagged: false,
            noise_floor: true,
            note: "indistinguishable from quadrature error".into(),
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.x.ln(), r.residual.abs().ln())).collect();
    let slope = ls_slope(&pts);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut boot = Vec::with_capacity(BOOTSTRAP_SAMPLES);
    let mut sample = Vec::with_capacity(pts.len());
    while boot.len() < BOOTSTRAP_SAMPLES {
        sample.clear();
        for _ in 0..pts.len() {
            sample.push(pts[rng.gen_range(0..pts.len())]);
        }
        if let Some(s) = ls_slope(&sample) {
            boot.push(s);
        }
    }
    boot.sort_by(|a, b| a.total_cmp(b));
    let q = |f: f64| boot[((boot.len() - 1) as f64 * f).round() as usize];
    let flagged = spread > spread_factor;
    Ok(ResidualSummary {
        slope,
        band: Some((q(0.025), q(0.975))),
        spread,
        spread_flagged: flagged,
        noise_floor: false,
        note: if flagged {
            format!("normalized residuals vary by {spread:.3} > {spread_factor}")
        } else {
            String::new()
        },
    })
}

/// Report metadata echoed into the JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMeta {
    pub format_version: u32,
    pub kappa: u32,
    pub ell: u64,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub window: String,
    pub g_variant: String,
    pub derivative: bool,
    pub tail_tol: f64,
    pub prime_cutoff: u64,
    pub accel_depth: u32,
    pub table_n_max: usize,
    pub table_checksum: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub meta: ReportMeta,
    pub rows: Vec<MomentRow>,
    pub residual: Option<ResidualSummary>,
    pub components: BTreeMap<String, f64>,
}

impl MomentReport {
    pub fn to_csv(&self) -> String {
        let mut s = format!("# qtml v{FORMAT_VERSION}\nX,M,MT,R,R_norm\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:.15e},{:.15e},{:.15e},{:.15e}",
                r.x, r.measured, r.predicted, r.residual, r.residual_norm
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Predicted side of a request.
pub enum Predictor {
    Conjecture(MainTermConstants),
    Derivative(DerivativeConstants),
}

impl Predictor {
    pub fn new(req: &MomentRequest, table: &EigenformTable) -> Result<Self> {
        req.validate()?;
        let cutoff = req.prime_cutoff.min(table.n_max() as u64);
        Ok(if req.derivative {
            Predictor::Derivative(DerivativeConstants::new(table, req.window, cutoff, req.depth)?)
        } else {
            Predictor::Conjecture(MainTermConstants::new(table, req.ell, req.alpha, req.window, cutoff, req.depth)?)
        })
    }

    pub fn at(&self, x: f64) -> C {
        match self {
            Predictor::Conjecture(c) => c.total(x),
            Predictor::Derivative(c) => C::new(c.total(x), 0.0),
        }
    }

    pub fn components(&self) -> BTreeMap<String, f64> {
        match self {
            Predictor::Conjecture(c) => c.components(),
            Predictor::Derivative(c) => c.components(),
        }
    }
}

/// Assembles the report from finished rows.
pub fn build_report(
    req: &MomentRequest,
    table: &EigenformTable,
    rows: Vec<MomentRow>,
    components: BTreeMap<String, f64>,
    seed: u64,
) -> Result<MomentReport> {
    let residual = if rows.len() >= 3 {
        Some(residual_analysis(&rows, DEFAULT_SPREAD, seed)?)
    } else {
        None
    };
    Ok(MomentReport {
        meta: ReportMeta {
            format_version: FORMAT_VERSION,
            kappa: req.kappa,
            ell: req.ell,
            alpha_re: req.alpha.re,
            alpha_im: req.alpha.im,
            window: req.window.tag(),
            g_variant: req.variant.name().to_string(),
            derivative: req.derivative,
            tail_tol: req.tail_tol,
            prime_cutoff: req.prime_cutoff.min(table.n_max() as u64),
            accel_depth: req.depth,
            table_n_max: table.n_max(),
            table_checksum: table.checksum(),
        },
        rows,
        residual,
        components,
    })
}

/// Measured side, main term and residuals for one request.
pub fn run_moment(req: &MomentRequest, table: &EigenformTable, seed: u64) -> Result<MomentReport> {
    let data = DirichletData::new(table);
    let measurer = Measurer::new(req, &data)?;
    let predictor = Predictor::new(req, table)?;
    let mut rows = Vec::with_capacity(req.x_grid.len());
    for &x in &req.x_grid {
        rows.push(MomentRow::new(&measurer.measure(x)?, predictor.at(x)));
    }
    build_report(req, table, rows, predictor.components(), seed)
}
