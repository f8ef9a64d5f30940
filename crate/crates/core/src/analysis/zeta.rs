use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma::ln_gamma;
use crate::error::{Error, Result};

/// `B_{2k} / (2k)!` for k = 1..=12.
const EM_COEFFS: [f64; 12] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
    77683.0 / 14101100039391805440000.0,
    -236364091.0 / 1693824136731743669452800000.0,
];

/// Euler-Maclaurin evaluation, valid for `Re w > -10` and `w != 1`.
fn zeta_em(w: Complex64) -> Complex64 {
    let n = (20.0 + w.im.abs()).ceil() as usize;
    let nf = n as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..n {
        sum += (-w * (k as f64).ln()).exp();
    }
    let n_pow = (-w * nf.ln()).exp();
    sum += n_pow * nf / (w - 1.0) + n_pow * 0.5;
    // sum_k B_{2k}/(2k)! * w (w+1) ... (w+2k-2) * N^{-w-2k+1}
    let mut rising = w;
    let mut term = n_pow / nf;
    for (j, c) in EM_COEFFS.iter().enumerate() {
        sum += rising * term * *c;
        let k = 2.0 * j as f64 + 1.0;
        rising *= (w + k) * (w + k + 1.0);
        term /= nf * nf;
    }
    sum
}

/// Riemann zeta for real `s > 1`.
pub fn zeta_real(s: f64) -> Result<f64> {
    if s.is_nan() || s <= 1.0 {
        return Err(Error::InvalidArgument(format!("zeta_real needs s > 1, got {s}")));
    }
    if s > 60.0 {
        return Ok(1.0 + 2f64.powf(-s) + 3f64.powf(-s));
    }
    Ok(zeta_em(Complex64::new(s, 0.0)).re)
}

/// `zeta(s) prod_{p in excluded} (1 - p^{-s})` for real `s > 1`.
pub fn zeta_restricted(s: f64, excluded: &[u64]) -> Result<f64> {
    let mut z = zeta_real(s)?;
    let mut seen: Vec<u64> = excluded.to_vec();
    seen.sort_unstable();
    seen.dedup();
    for p in seen {
        z *= 1.0 - (p as f64).powf(-s);
    }
    Ok(z)
}

/// Riemann zeta for complex `w`, using the functional equation when
/// `Re w < -1/2`. Fails within `1e-6` of the pole.
pub fn zeta_complex(w: Complex64) -> Result<Complex64> {
    if (w - 1.0).norm() < 1e-6 {
        return Err(Error::NearPole(format!("zeta at {w}")));
    }
    if w.im.abs() > 400.0 {
        return Err(Error::OutsideRegion(format!("zeta at {w}: |Im| above 400")));
    }
    if w.re > 60.0 {
        return Ok(Complex64::new(1.0, 0.0) + (-w * 2f64.ln()).exp() + (-w * 3f64.ln()).exp());
    }
    if w.re >= -0.5 {
        return Ok(zeta_em(w));
    }
    zeta_reflected(w)
}

/// `zeta(w) = 2^w pi^{w-1} sin(pi w / 2) Gamma(1 - w) zeta(1 - w)`.
fn zeta_reflected(w: Complex64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let log_part = w * 2f64.ln() + (w - 1.0) * PI.ln() + ln_gamma(one - w)?;
    let sin = (w * (PI / 2.0)).sin();
    Ok(log_part.exp() * sin * zeta_complex(one - w)?)
}
