//! Euler products behind the main-term constants and the identity checks
//! that tie them together.

pub mod checks;
pub mod local;
pub mod product;
pub mod symsq;

pub use checks::{
    a_product, complic_identity, complic_local_check, complic_local_sides, local_inversion_check,
    local_inversion_sides, split_discriminant, z1_series_vs_product, z2_factorization_check, z3_local, Z1Check,
    Z2Check, INVERSION_LIMIT,
};
pub use local::{local_factors, local_factors_series, sym_square_local_inverse, LocalCase, LocalFactorTriple};
pub use product::{
    convergence_profile, needed_cutoff, prime_tail, region_floor, require_tolerance, z_product, z_star_derivative, z_star_derivative_per_prime,
    zeta_log_derivative, zn_accelerated, zn_with_cutoff, EulerContext, LogDerivative, ProductValue,
    DEFAULT_DEPTH, DEFAULT_PRIME_CUTOFF, DEFAULT_PRODUCT_TOL, LOG_DERIVATIVE_STEP,
};
pub use symsq::{
    sym_square_L, sym_square_afe, sym_square_checked, sym_square_derivative, sym_square_euler, DerivativeEstimate,
    SymMethod, SymSquareValue, SYM_DERIVATIVE_STEP,
};
