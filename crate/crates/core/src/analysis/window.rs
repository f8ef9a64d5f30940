use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::quad::integrate_panels;
use crate::error::{Error, Result};

const MELLIN_TOL: f64 = 1e-15;

/// Smooth bump `exp(-1 / ((x - lo)(hi - x)))` on `(lo, hi)`, optionally
/// multiplied by `x^shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    pub lo: f64,
    pub hi: f64,
    pub shift: Complex64,
}

pub fn default_window() -> WindowSpec {
    WindowSpec {
        lo: 1.0,
        hi: 2.0,
        shift: Complex64::new(0.0, 0.0),
    }
}

impl WindowSpec {
    pub fn bump(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "window support must satisfy 0 < lo < hi, got ({lo}, {hi})"
            )));
        }
        Ok(WindowSpec {
            lo,
            hi,
            shift: Complex64::new(0.0, 0.0),
        })
    }

    /// `x^z Phi(x)` in place of `Phi`.
    pub fn shifted(&self, z: Complex64) -> Self {
        WindowSpec {
            shift: self.shift + z,
            ..*self
        }
    }

    /// The unshifted bump `Phi(x)`.
    #[inline]
    pub fn base(&self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi {
            return 0.0;
        }
        (-1.0 / ((x - self.lo) * (self.hi - x))).exp()
    }

    /// `x^shift Phi(x)`.
    pub fn eval(&self, x: f64) -> Complex64 {
        let b = self.base(x);
        if b == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if self.shift == Complex64::new(0.0, 0.0) {
            return Complex64::new(b, 0.0);
        }
        (self.shift * x.ln()).exp() * b
    }

    /// `int Phi_shift(x) x^{s-1} dx`.
    pub fn mellin(&self, s: Complex64) -> Result<Complex64> {
        let z = s + self.shift - 1.0;
        let panels = (1.0 + z.im.abs() * (self.hi / self.lo).ln()).ceil() as usize;
        let f = |x: f64| (z * x.ln()).exp() * self.base(x);
        Ok(integrate_panels(&f, self.lo, self.hi, panels.max(4), MELLIN_TOL)?.0)
    }

    /// `d/ds` of the Mellin transform: `int Phi_shift(x) x^{s-1} log x dx`.
    pub fn mellin_derivative(&self, s: Complex64) -> Result<Complex64> {
        let z = s + self.shift - 1.0;
        let panels = (1.0 + z.im.abs() * (self.hi / self.lo).ln()).ceil() as usize;
        let f = |x: f64| (z * x.ln()).exp() * (self.base(x) * x.ln());
        Ok(integrate_panels(&f, self.lo, self.hi, panels.max(4), MELLIN_TOL)?.0)
    }

    /// `int (cos 2 pi x y + sin 2 pi x y) Phi_shift(x) dx`.
    pub fn fourier_type(&self, y: f64) -> Result<Complex64> {
        let panels = (4.0 * (y.abs() * (self.hi - self.lo)).ceil()).max(4.0) as usize;
        let f = |x: f64| {
            let t = 2.0 * PI * x * y;
            self.eval(x) * (t.cos() + t.sin())
        };
        Ok(integrate_panels(&f, self.lo, self.hi, panels, 1e-15)?.0)
    }

    pub fn tag(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for WindowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == 1.0 && self.hi == 2.0 {
            write!(f, "bump")?;
        } else {
            write!(f, "bump:{}:{}", self.lo, self.hi)?;
        }
        if self.shift != Complex64::new(0.0, 0.0) {
            write!(f, "@{}:{}", self.shift.re, self.shift.im)?;
        }
        Ok(())
    }
}

impl FromStr for WindowSpec {
    type Err = Error;

    /// `bump` or `bump:lo:hi`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown window '{s}'; use bump or bump:lo:hi"));
        let mut parts = s.split(':');
        if parts.next() != Some("bump") {
            return Err(bad());
        }
        match (parts.next(), parts.next(), parts.next()) {
            (None, None, None) => Ok(default_window()),
            (Some(lo), Some(hi), None) => {
                WindowSpec::bump(lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?)
            }
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PHI_TILDE_1: f64 = 0.007_029_858_406_609_656;
    const PHI_TILDE_PRIME_1: f64 = 0.002_820_172_569_602_958_6;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn bump_values() {
        let w = default_window();
        assert!((w.base(1.5) - (-4f64).exp()).abs() < 1e-17);
        assert_eq!(w.base(0.99), 0.0);
        assert_eq!(w.base(2.0), 0.0);
    }

    #[test]
    fn mellin_at_one() {
        let w = default_window();
        let m = w.mellin(one()).unwrap();
        assert!((m.re - PHI_TILDE_1).abs() < 1e-16);
        assert!(m.im.abs() < 1e-18);
        // two resolutions
        let f = |x: f64| Complex64::new(w.base(x), 0.0);
        let coarse = integrate_panels(&f, 1.0, 2.0, 1, 1e-10).unwrap().0;
        assert!((coarse.re - m.re).abs() < 1e-10);
    }

    #[test]
    fn shift_identity() {
        let w = default_window();
        let z = Complex64::new(-0.3, 0.7);
        let s = Complex64::new(1.2, -2.0);
        let lhs = w.shifted(z).mellin(s).unwrap();
        let rhs = w.mellin(s + z).unwrap();
        assert!((lhs - rhs).norm() < 1e-16);
    }

    #[test]
    fn mellin_derivative_consistency() {
        let w = default_window();
        let d = w.mellin_derivative(one()).unwrap();
        assert!((d.re - PHI_TILDE_PRIME_1).abs() < 1e-16);
        let h = 1e-4;
        let fd = (w.mellin(one() * (1.0 + h)).unwrap() - w.mellin(one() * (1.0 - h)).unwrap()) / (2.0 * h);
        assert!((fd - d).norm() < 1e-8);
    }

    #[test]
    fn fourier_values() {
        let w = default_window();
        assert!((w.fourier_type(0.0).unwrap().re - PHI_TILDE_1).abs() < 1e-16);
        let f1 = w.fourier_type(1.0).unwrap().re;
        assert!((f1 + 0.004_748_089_760_051_995).abs() < 1e-15);
        let f100 = w.fourier_type(100.0).unwrap().re;
        assert!(f100.abs() < f1.abs() * 1e-6);
        assert!((w.fourier_type(10.0).unwrap().re - 7.103_396_085_545_491e-7).abs() < 1e-16);
    }

    #[test]
    fn parse_roundtrip() {
        let w: WindowSpec = "bump".parse().unwrap();
        assert_eq!(w, default_window());
        let v: WindowSpec = "bump:0.5:3".parse().unwrap();
        assert_eq!(v.to_string().parse::<WindowSpec>().unwrap(), v);
        assert!("gauss".parse::<WindowSpec>().is_err());
        assert!("bump:2:1".parse::<WindowSpec>().is_err());
    }
}
