use hmu::measure::MomentMethod;
use hmu::{conj_exponent, Measure, MeasureKind, QuadratureSpec};

fn q() -> QuadratureSpec {
    QuadratureSpec::default()
}

/// `B(n+1, g+1)` as a product, independent of the library recurrence.
fn beta_oracle(n: usize, gamma: f64) -> f64 {
    let mut v = 1.0 / (gamma + 1.0);
    for k in 1..=n {
        v *= k as f64 / (k as f64 + gamma + 1.0);
    }
    v
}

#[test]
fn spec_examples() {
    assert_eq!(Measure::lebesgue().moment(3, &q()).unwrap(), 0.25);
    let origin = Measure::point_mass(0.0, 1.0).unwrap();
    assert_eq!(origin.moment(0, &q()).unwrap(), 1.0);
    assert_eq!(origin.moment(5, &q()).unwrap(), 0.0);
    let linear = Measure::power(1.0, 1.0).unwrap();
    assert!((linear.moment(2, &q()).unwrap() - 1.0 / 12.0).abs() < 1e-16);
    assert!((linear.moment_by_quadrature(2, &q()).unwrap() - 1.0 / 12.0).abs() < 1e-12);
    let half = Measure::point_mass(0.5, 1.0)
        .unwrap()
        .moments_up_to(3, &q())
        .unwrap();
    assert_eq!(half.values(), &[1.0, 0.5, 0.25, 0.125]);

    assert!((Measure::lebesgue().tail_mass(0.75, &q()).unwrap() - 0.25).abs() < 1e-16);
    assert!((linear.tail_mass(0.5, &q()).unwrap() - 0.125).abs() < 1e-16);
    let two = Measure::atomic(vec![0.3, 0.9], vec![2.0, 1.0]).unwrap();
    assert_eq!(two.tail_mass(0.5, &q()).unwrap(), 1.0);
    assert!(two.tail_mass(1.0, &q()).is_err());

    assert_eq!(conj_exponent(2.0).unwrap(), 2.0);
    assert!((conj_exponent(4.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
    assert!((conj_exponent(conj_exponent(3.0).unwrap()).unwrap() - 3.0).abs() < 1e-14);
    assert!(conj_exponent(1.0).is_err());
}

#[test]
fn quadrature_matches_beta_through_512() {
    for gamma in [-0.5, 0.0, 1.0, 2.0, 3.7] {
        let mu = Measure::power(gamma, 1.0).unwrap();
        for n in (0..=512).step_by(7).chain([512]) {
            let exact = beta_oracle(n, gamma);
            let closed = mu.moment(n, &q()).unwrap();
            let quad = mu.moment_by_quadrature(n, &q()).unwrap();
            assert!(
                ((closed - exact) / exact).abs() < 1e-13,
                "gamma {gamma}, n {n}"
            );
            assert!(
                ((quad - exact) / exact).abs() < 1e-8,
                "gamma {gamma}, n {n}: {quad} vs {exact}"
            );
        }
    }
}

#[test]
fn atomic_moments_and_tails_are_direct_sums() {
    let points = vec![0.0, 0.1, 0.45, 0.8, 0.99];
    let weights = vec![0.3, 1.0, 2.0, 0.5, 0.25];
    let mu = Measure::atomic(points.clone(), weights.clone()).unwrap();
    for n in [0usize, 1, 2, 10, 100] {
        let direct: f64 = points
            .iter()
            .zip(&weights)
            .map(|(t, w)| w * t.powi(n as i32))
            .sum();
        assert!(
            (mu.moment(n, &q()).unwrap() - direct).abs() <= 4.0 * f64::EPSILON * direct.max(1e-300)
        );
    }
    for a in [0.0, 0.1, 0.3, 0.8, 0.995] {
        let direct: f64 = points
            .iter()
            .zip(&weights)
            .filter(|(t, _)| **t >= a)
            .map(|(_, w)| w)
            .sum();
        assert_eq!(mu.tail_mass(a, &q()).unwrap(), direct);
    }
}

#[test]
fn sequences_satisfy_invariants() {
    let measures = [
        Measure::lebesgue(),
        Measure::power(-0.5, 2.0).unwrap(),
        Measure::power(2.0, 1.0).unwrap(),
        Measure::log_power(1.0, 2.0, 1.0).unwrap(),
        Measure::log_power(0.5, 1.0, 3.0).unwrap(),
        Measure::tabulated(vec![0.0, 0.5, 0.9], vec![1.0, 2.0, 0.5]).unwrap(),
        Measure::atomic(vec![0.2, 0.7], vec![1.0, 1.0]).unwrap(),
    ];
    for mu in &measures {
        let seq = mu.moments_up_to(256, &q()).unwrap();
        assert_eq!(seq.len(), 257);
        assert!(seq.values().iter().all(|v| *v >= 0.0));
        assert!(seq.max_increase() <= seq.error_bound, "{:?}", mu.kind());
        let mass = mu.total_mass(&q()).unwrap();
        assert!((seq.values()[0] - mass).abs() <= seq.error_bound + 1e-15 * mass);
        if mu.has_closed_form_moments() {
            assert!(seq.methods.iter().all(|m| *m == MomentMethod::ClosedForm));
            assert!(
                seq.complete_monotonicity_defect(8) >= -1e-12,
                "{:?}",
                mu.kind()
            );
        }
    }
}

#[test]
fn tail_mass_is_nonincreasing() {
    let measures = [
        Measure::power(0.5, 1.0).unwrap(),
        Measure::log_power(1.0, 1.0, 1.0).unwrap(),
        Measure::tabulated(vec![0.1, 0.4, 0.6, 0.95], vec![3.0, 0.0, 1.0, 2.0]).unwrap(),
    ];
    for mu in &measures {
        let mut last = f64::INFINITY;
        for j in 0..30 {
            let a = 1.0 - 0.5f64.powi(j);
            let t = mu.tail_mass(a, &q()).unwrap();
            assert!(t <= last * (1.0 + 1e-10), "{:?} at a={a}", mu.kind());
            last = t;
        }
        let m0 = mu.moment(0, &q()).unwrap();
        assert!((mu.tail_mass(0.0, &q()).unwrap() - m0).abs() < 1e-10 * m0);
    }
}

#[test]
fn log_power_tail_matches_closed_form() {
    // with 1-t = e^{-u} the tail is ∫_U^∞ e^{-u}/(1+u) du = e·E1(1+U)
    let mu = Measure::log_power(1.0, 1.0, 1.0).unwrap();
    for a in [0.0f64, 0.5, 0.9, 0.999] {
        let x = 1.0 + (1.0 / (1.0 - a)).ln();
        let oracle = std::f64::consts::E * exp_integral_e1(x);
        let got = mu.tail_mass(a, &q()).unwrap();
        assert!(
            ((got - oracle) / oracle).abs() < 1e-9,
            "a={a}: {got} vs {oracle}"
        );
    }
}

/// `E1(x)` for `x >= 1` by its continued fraction.
fn exp_integral_e1(x: f64) -> f64 {
    let mut b = x + 1.0;
    let mut c = 1.0 / f64::MIN_POSITIVE;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..300 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}

#[test]
fn json_specs() {
    let cases = [
        (r#"{"type":"atomic","points":[0.5],"weights":[1]}"#, true),
        (r#"{"type":"power","gamma":-0.5,"scale":2}"#, true),
        (r#"{"type":"logpower","s":1,"alpha":2,"scale":1}"#, true),
        (
            r#"{"type":"tabulated","grid":[0,0.5],"density":[1,1]}"#,
            true,
        ),
        (r#"{"type":"power","gamma":-1,"scale":1}"#, false),
        (r#"{"type":"atomic","points":[1.0],"weights":[1]}"#, false),
        (
            r#"{"type":"tabulated","grid":[0.5,0.2],"density":[1,1]}"#,
            false,
        ),
        (r#"{"type":"cauchy"}"#, false),
    ];
    for (text, ok) in cases {
        assert_eq!(Measure::from_json(text).is_ok(), ok, "{text}");
    }
    let m = Measure::from_json(r#"{"type":"power","gamma":1,"scale":1}"#).unwrap();
    assert!(matches!(m.kind(), MeasureKind::PowerWeight { gamma, .. } if *gamma == 1.0));
}
