use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `B_{2k} / (2k (2k - 1))` for k = 1..=10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

/// `B_{2k} / (2k)` for k = 1..=10.
const DIGAMMA_ASYM: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
    43867.0 / 14364.0,
    -174611.0 / 6600.0,
];

const SHIFT_TARGET: f64 = 12.0;

fn pole_distance(z: Complex64) -> f64 {
    if z.re > 0.5 {
        return f64::INFINITY;
    }
    let k = z.re.round().min(0.0);
    ((z.re - k).powi(2) + z.im * z.im).sqrt()
}

fn check_pole(z: Complex64) -> Result<()> {
    if pole_distance(z) < 1e-8 {
        Err(Error::NearPole(format!("{z}")))
    } else {
        Ok(())
    }
}

/// `log sin(pi z)` without overflow for large `|Im z|` (any branch).
pub fn ln_sin_pi(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    if z.im.abs() < 20.0 {
        return (z * PI).sin().ln();
    }
    // sin(pi z) = (e^{i pi z} - e^{-i pi z}) / (2i)
    let one = Complex64::new(1.0, 0.0);
    if z.im > 0.0 {
        -i * PI * z + (one - (2.0 * i * PI * z).exp()).ln() - (-2.0 * i).ln()
    } else {
        i * PI * z + (one - (-2.0 * i * PI * z).exp()).ln() - (2.0 * i).ln()
    }
}

/// `log Gamma(z)` on some branch; only `exp` of it is meaningful for
/// `Re z < 1/2`, where reflection is used.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    check_pole(z)?;
    Ok(ln_gamma_unchecked(z))
}

pub(crate) fn ln_gamma_unchecked(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let one = Complex64::new(1.0, 0.0);
        return Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma_unchecked(one - z);
    }
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    if w.norm() < SHIFT_TARGET {
        let mut prod = Complex64::new(1.0, 0.0);
        while w.norm() < SHIFT_TARGET {
            prod *= w;
            w += 1.0;
        }
        shift = prod.ln();
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for c in STIRLING {
        series += pow * c;
        pow *= inv2;
    }
    (w - 0.5) * w.ln() - w + LN_SQRT_2PI + series - shift
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    Ok(ln_gamma(z)?.exp())
}

pub fn gamma_real(x: f64) -> Result<f64> {
    Ok(gamma(Complex64::new(x, 0.0))?.re)
}

/// `Gamma(a) / Gamma(b)`.
pub fn gamma_ratio(a: Complex64, b: Complex64) -> Result<Complex64> {
    Ok((ln_gamma(a)? - ln_gamma(b)?).exp())
}

pub fn digamma(z: Complex64) -> Result<Complex64> {
    check_pole(z)?;
    Ok(digamma_unchecked(z))
}

pub(crate) fn digamma_unchecked(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // psi(z) = psi(1 - z) - pi cot(pi z)
        let one = Complex64::new(1.0, 0.0);
        let cot = if z.im.abs() > 20.0 {
            Complex64::new(0.0, -z.im.signum())
        } else {
            (z * PI).cos() / (z * PI).sin()
        };
        return digamma_unchecked(one - z) - cot * PI;
    }
    let mut w = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while w.norm() < SHIFT_TARGET {
        acc -= w.inv();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv2;
    for c in DIGAMMA_ASYM {
        series += pow * c;
        pow *= inv2;
    }
    acc + w.ln() - inv * 0.5 - series
}

pub fn digamma_real(x: f64) -> Result<f64> {
    Ok(digamma(Complex64::new(x, 0.0))?.re)
}

/// Trigamma for real `x > 0`, used for Newton steps on saddle points.
pub(crate) fn trigamma_real(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 12.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + inv + inv2 / 2.0 + inv * inv2 / 6.0 - inv * inv2 * inv2 / 30.0
        + inv * inv2 * inv2 * inv2 / 42.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
        (a - b).norm() <= rel * b.norm().max(1e-300)
    }

    #[test]
    fn known_values() {
        assert!((gamma_real(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((gamma_real(0.5).unwrap() - PI.sqrt()).abs() < 1e-14);
        assert!((gamma_real(11.0).unwrap() - 3628800.0).abs() < 1e-14 * 3628800.0);
        // Gamma(1 + i)
        let g = gamma(c(1.0, 1.0)).unwrap();
        assert!(close(g, c(0.498_015_668_118_356, -0.154_949_828_301_811), 1e-13));
        // Gamma(-2.5) = 8 sqrt(pi) / (-15)
        let g = gamma_real(-2.5).unwrap();
        assert!((g - (-8.0 * PI.sqrt() / 15.0)).abs() < 1e-13);
    }

    #[test]
    fn recurrence_and_reflection() {
        let mut state = 12345u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..500 {
            let z = c(rnd() * 60.0 - 30.0, rnd() * 60.0 - 30.0);
            let lhs = gamma(z + 1.0).unwrap();
            let rhs = z * gamma(z).unwrap();
            assert!(close(lhs, rhs, 1e-12), "recurrence at {z}");
            let refl = gamma(z).unwrap() * gamma(c(1.0, 0.0) - z).unwrap();
            let want = PI / (z * PI).sin();
            assert!(close(refl, want, 1e-11), "reflection at {z}");
        }
        let s = c(2.37, 1.1);
        assert!(close(gamma(s + 1.0).unwrap() / (s * gamma(s).unwrap()), c(1.0, 0.0), 1e-14));
    }

    #[test]
    fn poles_rejected() {
        assert!(matches!(gamma(c(0.0, 0.0)), Err(Error::NearPole(_))));
        assert!(gamma(c(-3.0 + 1e-10, 0.0)).is_err());
        assert!(digamma(c(-7.0, 0.0)).is_err());
        assert!(gamma(c(-3.0 + 1e-6, 0.0)).is_ok());
    }

    #[test]
    fn digamma_values() {
        let euler = 0.577_215_664_901_532_9;
        assert!((digamma_real(1.0).unwrap() + euler).abs() < 1e-14);
        // finite-difference oracle from Gamma
        let h = 1e-5;
        let fd = (gamma_real(1.0 + h).unwrap().ln() - gamma_real(1.0 - h).unwrap().ln()) / (2.0 * h);
        assert!((fd + euler).abs() < 1e-9);
        assert!((digamma_real(9.0).unwrap() - digamma_real(8.0).unwrap() - 0.125).abs() < 1e-14);
        for z in [c(0.3, 4.0), c(-2.7, 0.5), c(15.0, -40.0), c(0.01, 0.0)] {
            let lhs = digamma(z + 1.0).unwrap() - digamma(z).unwrap();
            assert!(close(lhs, z.inv(), 1e-12), "{z}");
        }
    }

    #[test]
    fn large_imaginary_parts() {
        // |Gamma(1/2 + it)|^2 = pi / cosh(pi t)
        for t in [10.0, 50.0, 150.0] {
            let g = gamma(c(0.5, t)).unwrap();
            let want = PI / (PI * t).cosh();
            assert!((g.norm_sqr() / want - 1.0).abs() < 1e-11, "t = {t}");
        }
        let z = c(-0.3, 60.0);
        let refl = (ln_gamma(z).unwrap() + ln_gamma(c(1.0, 0.0) - z).unwrap()).exp();
        let want = PI / (z * PI).sin();
        assert!(close(refl, want, 1e-10));
    }

    #[test]
    fn trigamma_matches_difference() {
        for x in [0.7, 3.0, 9.5, 30.0] {
            let h = 1e-5;
            let fd = (digamma_real(x + h).unwrap() - digamma_real(x - h).unwrap()) / (2.0 * h);
            assert!((trigamma_real(x) - fd).abs() < 1e-8);
        }
    }
}
