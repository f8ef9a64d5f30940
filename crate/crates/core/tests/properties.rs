use std::sync::OnceLock;

use num_complex::Complex64 as C;
use proptest::prelude::*;

use qtml::analysis::{GVariant, WindowSpec};
use qtml::arith::{factorize, gcd, is_squarefree, jacobi, kronecker, SquarefreeStream};
use qtml::config::RunConfig;
use qtml::eigenform::EigenformTable;
use qtml::euler::{local_factors, sym_square_local_inverse};
use qtml::gauss::{gauss_sum, gauss_sum_brute};

fn table() -> &'static EigenformTable {
    static T: OnceLock<EigenformTable> = OnceLock::new();
    T.get_or_init(|| EigenformTable::build(20, 20_000).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn factorization_multiplies_back(n in 1u64..10_000_000_000) {
        let f = factorize(n).unwrap();
        let prod: u64 = f.factors().iter().map(|&(p, e)| p.pow(e)).product();
        prop_assert_eq!(prod, n);
        prop_assert!(f.factors().windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn jacobi_is_multiplicative(a in -5000i64..5000, m in 0u64..500, n in 0u64..500) {
        let (m, n) = (2 * m + 1, 2 * n + 1);
        prop_assert_eq!(jacobi(a, m * n), jacobi(a, m) * jacobi(a, n));
        prop_assert_eq!(kronecker(a, (m * n) as i64), kronecker(a, m as i64) * kronecker(a, n as i64));
    }

    #[test]
    fn squarefree_stream_is_sound(lo in 1u64..5000, len in 0u64..400) {
        let got: Vec<u64> = SquarefreeStream::new(lo, lo + len, true).collect();
        let want: Vec<u64> = (lo..=lo + len).filter(|&d| d % 2 == 1 && is_squarefree(d).unwrap()).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn gauss_closed_form_matches_definition(n in 0u64..400, k in -80i64..80) {
        let n = 2 * n + 1;
        let closed = gauss_sum(k, n).unwrap().value;
        let brute = gauss_sum_brute(k, n).unwrap();
        prop_assert!((closed - brute).norm() < 1e-9, "n={} k={}: {} vs {}", n, k, closed, brute);
        if gcd(k.unsigned_abs(), n) == 1 && is_squarefree(n).unwrap() {
            prop_assert!((closed.norm() - (n as f64).sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn eigenvalues_multiplicative(m in 2usize..140, n in 2usize..140) {
        let t = table();
        prop_assume!(gcd(m as u64, n as u64) == 1);
        prop_assert!((t.lambda(m * n) - t.lambda(m) * t.lambda(n)).abs() < 1e-12);
    }

    #[test]
    fn sym_square_factor_at_vanishing_eigenvalue(p in 3u64..10_000, re in 0.6f64..3.0, im in -30.0f64..30.0) {
        let s = C::new(re, im);
        let y = (-s * (p as f64).ln()).exp();
        let want = (1.0 - y) * (1.0 + y) * (1.0 + y);
        prop_assert!((sym_square_local_inverse(0.0, p, s) - want).norm() < 1e-14);
    }

    #[test]
    fn local_factor_vanishes_with_eigenvalue(p in 3u64..2000, g in -0.2f64..1.0) {
        // E_1 is odd in lambda(p)
        let a = local_factors(0.0, p, C::new(g, 0.0));
        prop_assert!(a.e1.norm() < 1e-15);
    }

    #[test]
    fn window_vanishes_off_support(lo in 0.1f64..3.0, w in 0.1f64..3.0, x in 0.0f64..10.0) {
        let win = WindowSpec::bump(lo, lo + w).unwrap();
        let v = win.eval(x);
        if x <= lo || x >= lo + w {
            prop_assert_eq!(v, C::new(0.0, 0.0));
        } else {
            prop_assert!(v.re > 0.0);
        }
    }

    #[test]
    fn config_round_trips(
        weight in prop::sample::select(vec![12u32, 16, 18, 20, 22, 26]),
        ell in 1u64..1000,
        are in -0.25f64..0.25,
        aim in -5.0f64..5.0,
        grid in prop::collection::vec(1.0f64..1e5, 1..6),
        variant in prop::sample::select(vec![GVariant::Unit, GVariant::Simple, GVariant::ZetaDamped]),
        seed in any::<u64>(),
    ) {
        let mut c = RunConfig::default();
        c.weight = weight;
        c.ell = ell;
        c.alpha_re = are;
        c.alpha_im = aim;
        c.x_grid = grid;
        c.g_variant = variant;
        c.seed = seed;
        let text = c.to_string();
        prop_assert_eq!(RunConfig::parse(&text).unwrap(), c);
    }
}
