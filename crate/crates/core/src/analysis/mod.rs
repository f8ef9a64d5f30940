//! Special functions, quadrature, test windows and the AFE kernel.

pub mod gamma;
pub mod kernel;
pub mod quad;
pub mod window;
pub mod zeta;

pub use gamma::{digamma, digamma_real, gamma, gamma_ratio, gamma_real, ln_gamma};
pub use kernel::{
    check_alpha, divisor_tail, g_factor, g_variant, omega_alpha_derivative, omega_kernel,
    upper_incomplete_gamma_q, GVariant, KernelCache, KernelEvaluator, KernelKind, KernelValue,
};
pub use quad::{integrate, integrate_panels, integrate_real};
pub use window::{default_window, WindowSpec};
pub use zeta::{zeta_complex, zeta_real, zeta_restricted};
