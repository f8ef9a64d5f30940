//! Normalized Hecke eigenvalues of the level-one eigenforms of weight 12,
//! 16, 18, 20, 22 and 26, computed exactly and cached on disk.

pub mod ntt;
mod series;
mod table;

pub use series::{
    delta_series, delta_series_capped, eigenform_coefficients_bigint, eigenform_coefficients_mod,
    eisenstein_constant, eisenstein_series, euler_product_terms, ExactSeries, DEFAULT_SERIES_CAP,
};
pub use table::{
    cache_file_name, cache_path, hecke_power, load_or_build, EigenformTable, Route, CACHE_MAGIC,
    CACHE_VERSION, HEADER_LEN,
};

use crate::error::{Error, Result};

/// Weights whose cusp space at level one is one-dimensional.
pub const SUPPORTED_WEIGHTS: &[u32] = &[12, 16, 18, 20, 22, 26];

/// Modulus of the coefficient checksum `sum a(n) B^{n-1} mod q`.
pub const CHECKSUM_MODULUS: u64 = 4611686018427387847;
pub const CHECKSUM_BASE: u64 = 1_000_003;

pub fn check_weight(weight: u32) -> Result<()> {
    if SUPPORTED_WEIGHTS.contains(&weight) {
        Ok(())
    } else {
        Err(Error::UnsupportedWeight {
            weight,
            supported: SUPPORTED_WEIGHTS,
        })
    }
}

/// Table length used for moment sweeps up to `x_max`.
pub fn default_n_max(x_max: f64) -> usize {
    let log = (8.0 * x_max).ln().ceil().max(1.0);
    (50.0 * x_max * log).ceil() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{divisor_count_table, gcd};

    #[test]
    fn weight_twelve_examples() {
        let t = EigenformTable::build(12, 100).unwrap();
        assert_eq!(t.lambda(1), 1.0);
        assert!((t.lambda(2) - (-24.0 / 2f64.powf(5.5))).abs() < 1e-15);
        assert!((t.lambda(2).powi(2) - t.lambda(4) - 1.0).abs() < 1e-13);
        assert_eq!(t.hecke_extend(2, 0), 1.0);
        assert_eq!(t.hecke_extend(2, 1), t.lambda(2));
        assert!((t.hecke_extend(2, 4) - t.lambda(16)).abs() < 1e-13);
    }

    #[test]
    fn ramanujan_tau_known_values() {
        let t = EigenformTable::build(12, 30).unwrap();
        let tau = [1i64, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920];
        for (i, &v) in tau.iter().enumerate() {
            let n = (i + 1) as f64;
            assert!((t.lambda(i + 1) * n.powf(5.5) - v as f64).abs() < 1e-6 * v.abs() as f64);
        }
    }

    #[test]
    fn rejects_unsupported_weight() {
        assert!(matches!(
            EigenformTable::build(13, 10),
            Err(Error::UnsupportedWeight { weight: 13, .. })
        ));
        assert!(EigenformTable::build(24, 10).is_err());
    }

    #[test]
    fn routes_agree() {
        for &w in SUPPORTED_WEIGHTS {
            let a = EigenformTable::build_with(w, 300, Route::Crt).unwrap();
            let b = EigenformTable::build_with(w, 300, Route::BigInt).unwrap();
            assert_eq!(a.checksum(), b.checksum(), "weight {w}");
            for n in 1..=300 {
                let (x, y) = (a.lambda(n), b.lambda(n));
                assert!((x - y).abs() <= 1e-15 * x.abs().max(1.0), "weight {w}, n {n}");
            }
        }
    }

    #[test]
    fn invariants_all_weights() {
        for &w in SUPPORTED_WEIGHTS {
            let t = EigenformTable::build(w, 5000).unwrap();
            t.check_invariants().unwrap();
            let tau = divisor_count_table(5000);
            for n in 1..=5000 {
                assert!(t.lambda(n).abs() <= tau[n] as f64);
            }
            for m in 2..70usize {
                for n in 2..70usize {
                    if gcd(m as u64, n as u64) == 1 {
                        let d = t.lambda(m * n) - t.lambda(m) * t.lambda(n);
                        assert!(d.abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn cache_roundtrip_and_length() {
        let dir = tempfile::tempdir().unwrap();
        let (t, hit) = load_or_build(dir.path(), 12, 10_000).unwrap();
        assert!(!hit);
        let path = cache_path(dir.path(), 12, 10_000);
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 28 + 8 * 10_000);
        let (u, hit) = load_or_build(dir.path(), 12, 10_000).unwrap();
        assert!(hit);
        assert_eq!(t, u);
        let (v, hit) = load_or_build(dir.path(), 12, 5000).unwrap();
        assert!(hit);
        assert_eq!(v.n_max(), 10_000);
    }

    #[test]
    fn corrupted_cache_is_detected() {
        let t = EigenformTable::build(12, 2000).unwrap();
        let mut bytes = t.to_bytes();
        let i = HEADER_LEN + 8 * 1200 + 6;
        bytes[i] ^= 0x10;
        let bad = EigenformTable::from_bytes(&bytes).unwrap();
        assert!(bad.check_invariants().is_err() || bad.verify_full().is_err());
        assert!(bad.verify_full().is_err());
        let mut bytes = t.to_bytes();
        bytes[20] ^= 1;
        assert!(EigenformTable::from_bytes(&bytes).unwrap().verify_full().is_err());
        assert!(EigenformTable::from_bytes(&bytes[..100]).is_err());
        assert!(EigenformTable::from_bytes(b"XXXXyyyyyyyyyyyyyyyyyyyyyyyyyyyyy").is_err());
    }

    #[test]
    fn default_n_max_formula() {
        assert_eq!(default_n_max(2000.0), 50 * 2000 * 10);
    }
}
