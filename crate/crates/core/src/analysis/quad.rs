use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod 7-15 panel: `(kronrod, |kronrod - gauss|)`.
fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Adaptive Gauss-Kronrod integral of `f` over `[a, b]` to absolute
/// accuracy `tol`. Returns the value and the summed error estimate.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, tol: f64) -> Result<(Complex64, f64)> {
    integrate_panels(&f, a, b, 1, tol)
}

/// As [`integrate`] but starting from `panels` equal subintervals, which
/// helps for oscillatory integrands.
pub fn integrate_panels<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    panels: usize,
    tol: f64,
) -> Result<(Complex64, f64)> {
    let panels = panels.max(1);
    let w = (b - a) / panels as f64;
    let mut stack: Vec<(f64, f64, usize)> = (0..panels)
        .rev()
        .map(|i| (a + i as f64 * w, if i + 1 == panels { b } else { a + (i + 1) as f64 * w }, 0))
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let width = (b - a).abs().max(f64::MIN_POSITIVE);
    let mut evaluations = 0usize;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, e) = gk15(f, lo, hi);
        evaluations += 1;
        let local_tol = tol * (hi - lo).abs() / width;
        if e <= local_tol.max(1e-17 * v.norm()) || depth >= 50 {
            if depth >= 50 && e > local_tol {
                return Err(Error::Quadrature(format!(
                    "subdivision limit on [{lo}, {hi}], error {e:e}"
                )));
            }
            total += v;
            err += e;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
        if evaluations > 2_000_000 {
            return Err(Error::Quadrature("evaluation budget exhausted".into()));
        }
    }
    Ok((total, err))
}

/// Real-valued convenience wrapper.
pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    let (v, e) = integrate(|x| Complex64::new(f(x), 0.0), a, b, tol)?;
    Ok((v.re, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_and_exponentials() {
        let (v, _) = integrate_real(|x| x.powi(6), 0.0, 1.0, 1e-14).unwrap();
        assert!((v - 1.0 / 7.0).abs() < 1e-15);
        let (v, _) = integrate_real(f64::exp, -1.0, 2.0, 1e-13).unwrap();
        assert!((v - (2f64.exp() - (-1f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn oscillatory() {
        let (v, _) = integrate(|x| Complex64::new(0.0, 40.0 * PI * x).exp(), 0.0, 0.25, 1e-13).unwrap();
        let want = (Complex64::new(0.0, 10.0 * PI).exp() - 1.0) / Complex64::new(0.0, 40.0 * PI);
        assert!((v - want).norm() < 1e-13);
    }

    #[test]
    fn endpoint_flat_bump() {
        let (v, _) = integrate_real(|x: f64| (-1.0 / (1.0 - x * x)).exp(), -1.0, 1.0, 1e-14).unwrap();
        assert!((v - 0.443_993_816_168_079_4).abs() < 1e-13);
    }
}
