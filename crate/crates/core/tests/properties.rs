use hmu::carleson::{carleson_sup, zhao_k, GridSpec, Verdict};
use hmu::hardy::{default_samples, hp_norm, integral_means, CoefficientVector};
use hmu::operator::{relative_residual, HankelTruncation};
use hmu::{Measure, QuadratureSpec};
use num_complex::Complex64;
use proptest::prelude::*;

fn q() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn measure() -> impl Strategy<Value = Measure> {
    prop_oneof![
        (-0.9f64..3.0, 0.1f64..5.0).prop_map(|(g, c)| Measure::power(g, c).unwrap()),
        prop::collection::vec((0.0f64..0.999, 0.01f64..3.0), 1..6).prop_map(|atoms| {
            let (t, w) = atoms.into_iter().unzip();
            Measure::atomic(t, w).unwrap()
        }),
    ]
}

fn poly(max_degree: usize) -> impl Strategy<Value = CoefficientVector> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..=max_degree + 1).prop_map(|c| {
        CoefficientVector::new(
            c.into_iter()
                .map(|(re, im)| Complex64::new(re, im))
                .collect(),
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn functionals_are_scale_equivariant(mu in measure(), c in 0.01f64..100.0, s in 0.25f64..3.0) {
        let g = GridSpec::new(8).unwrap();
        let scaled = mu.scaled(c).unwrap();
        let a = carleson_sup(&mu, s, &g, &q()).unwrap();
        let b = carleson_sup(&scaled, s, &g, &q()).unwrap();
        prop_assert!((b.sup_value - c * a.sup_value).abs() <= 1e-12 * b.sup_value.max(f64::MIN_POSITIVE));
        prop_assert_eq!(a.verdict, b.verdict);
        let a = zhao_k(&mu, 0.0, s, &g, &q()).unwrap();
        let b = zhao_k(&scaled, 0.0, s, &g, &q()).unwrap();
        prop_assert!((b.sup_value - c * a.sup_value).abs() <= 1e-12 * b.sup_value);
    }

    #[test]
    fn finite_verdicts_persist_for_smaller_s(mu in measure(), s1 in 0.5f64..3.0, frac in 0.1f64..1.0) {
        let g = GridSpec::default();
        if carleson_sup(&mu, s1, &g, &q()).unwrap().verdict == Verdict::Finite {
            let s2 = s1 * frac;
            prop_assert_eq!(carleson_sup(&mu, s2, &g, &q()).unwrap().verdict, Verdict::Finite);
        }
    }

    #[test]
    fn parseval(f in poly(300)) {
        let sq: f64 = f.coeffs().iter().map(|a| a.norm_sqr()).sum();
        let n = hp_norm(&f, 2.0).unwrap();
        prop_assert!((n * n - sq).abs() <= 1e-12 * sq.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn integral_means_are_nondecreasing(f in poly(20), p in 0.25f64..6.0, r1 in 0.0f64..1.0, r2 in 0.0f64..1.0) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let k = default_samples(f.degree());
        let a = integral_means(&f, lo, p, k).unwrap();
        let b = integral_means(&f, hi, p, k).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn fast_product_matches_naive(
        mu in measure(),
        a in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..700),
    ) {
        let a: Vec<Complex64> = a.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        let t = HankelTruncation::from_measure(&mu, a.len(), &q()).unwrap();
        let r = relative_residual(&t.apply_fast(&a).unwrap(), &t.apply_naive(&a).unwrap());
        prop_assert!(r <= 1e-12, "residual {}", r);
    }
}
