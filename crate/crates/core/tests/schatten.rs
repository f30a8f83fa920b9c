use hmu::hardy::dyadic_block_besov;
use hmu::operator::HankelTruncation;
use hmu::schatten::{
    criterion_sum, frobenius_sq, membership_verdict, schatten_pnorm, singular_values, Membership,
    SpectralLadder, DEFAULT_LADDER,
};
use hmu::{Measure, QuadratureSpec};

fn q() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn families() -> Vec<(&'static str, Measure)> {
    vec![
        ("lebesgue", Measure::lebesgue()),
        ("power 0.5", Measure::power(0.5, 1.0).unwrap()),
        ("power 1", Measure::power(1.0, 1.0).unwrap()),
        ("power 2", Measure::power(2.0, 3.0).unwrap()),
        (
            "atoms",
            Measure::atomic(vec![0.0, 0.5, 0.9], vec![1.0, 0.5, 0.25]).unwrap(),
        ),
    ]
}

#[test]
fn frobenius_identity_across_families() {
    for (name, mu) in families() {
        for n in [8, 100, 512] {
            let t = HankelTruncation::from_measure(&mu, n, &q()).unwrap();
            let s2 = schatten_pnorm(&t, 2.0).unwrap().powi(2);
            let f = frobenius_sq(&t);
            assert!((s2 - f).abs() <= 1e-10 * f, "{name} N={n}: {s2} vs {f}");
        }
    }
}

#[test]
fn spectra_are_sorted_nonnegative_and_interlace() {
    for (name, mu) in families() {
        let moments = mu.moments_up_to(2 * 256 - 2, &q()).unwrap();
        let small =
            singular_values(&HankelTruncation::from_sequence(&moments, 128).unwrap()).unwrap();
        let big =
            singular_values(&HankelTruncation::from_sequence(&moments, 256).unwrap()).unwrap();
        assert!(small.windows(2).all(|w| w[0] >= w[1]) && small.iter().all(|v| *v >= 0.0));
        let slack = 1e-12 * big[0];
        for (k, (a, b)) in small.iter().zip(&big).enumerate() {
            assert!(*a <= b + slack, "{name} k={k}: {a} > {b}");
        }
    }
}

#[test]
fn schatten_norm_of_hilbert_segment() {
    let t = HankelTruncation::from_measure(&Measure::lebesgue(), 64, &q()).unwrap();
    let mut direct = 0.0;
    for n in 0..64 {
        for k in 0..64 {
            direct += 1.0 / ((n + k + 1) as f64).powi(2);
        }
    }
    let s = schatten_pnorm(&t, 2.0).unwrap();
    assert!((s - f64::sqrt(direct)).abs() < 1e-12 * s);
}

#[test]
fn criterion_converges_for_smooth_weight() {
    let m = Measure::power(1.0, 1.0)
        .unwrap()
        .moments_up_to(4096, &q())
        .unwrap();
    let a = criterion_sum(&m, 2.0, 1024).unwrap();
    let b = criterion_sum(&m, 2.0, 4096).unwrap();
    // terms ~ (n+1)^{-3}, so the tail past N is below N^{-2}/2
    assert!(b > a && b - a < 0.5 / 1024f64.powi(2));
}

#[test]
fn membership_matches_known_status() {
    let cases = [
        (Measure::lebesgue(), Membership::NotInSp),
        (Measure::power(1.0, 1.0).unwrap(), Membership::InSp),
        (Measure::point_mass(0.5, 1.0).unwrap(), Membership::InSp),
    ];
    for (mu, want) in cases {
        let ladder = SpectralLadder::new(&mu, &DEFAULT_LADDER, &q()).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let r = ladder.verdict(p).unwrap();
            assert_eq!(r.verdict, want, "{:?} p={p}: {r:?}", mu.kind());
        }
    }
}

#[test]
fn lebesgue_partial_sums_grow_like_log() {
    let r = membership_verdict(&Measure::lebesgue(), 2.0, &[128, 256, 512, 1024], &q()).unwrap();
    let ln: Vec<f64> = r.ladder.iter().map(|n| (*n as f64).ln()).collect();
    for partials in [&r.spectral.partials, &r.criterion.partials] {
        let s = slope(&ln, partials);
        assert!((s - 1.0).abs() <= 0.2, "slope {s}");
    }
}

#[test]
fn besov_bridge_ratio_is_bounded() {
    let measures = [
        Measure::lebesgue(),
        Measure::power(0.5, 1.0).unwrap(),
        Measure::power(1.0, 1.0).unwrap(),
        Measure::point_mass(0.5, 1.0).unwrap(),
    ];
    for mu in &measures {
        let m = mu.moments_up_to((1 << 12) + 1, &q()).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let ratios: Vec<f64> = (2..=10)
                .map(|nmax| {
                    let b = dyadic_block_besov(&m, p, nmax).unwrap();
                    let c = criterion_sum(&m, p, 1 << (nmax + 1)).unwrap();
                    b / c
                })
                .collect();
            let hi = ratios.iter().copied().fold(f64::MIN, f64::max);
            let lo = ratios.iter().copied().fold(f64::MAX, f64::min);
            assert!(hi / lo <= 16.0, "{:?} p={p}: {ratios:?}", mu.kind());
        }
    }
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
