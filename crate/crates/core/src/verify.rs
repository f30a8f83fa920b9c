//! End-to-end checks tying the modules together.
//!
//! Every check records the measured quantities it judged, so a report can
//! be re-read without rerunning. Random inputs come from ChaCha8 seeded by
//! [`VerifyConfig::seed`]; wall-clock timings decide one pass/fail bit but
//! are never written into the report, which keeps reports byte-identical
//! for a fixed configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::carleson::{carleson_sup, fb_integral, moment_carleson_sup, zhao_k, GridSpec, Verdict};
use crate::error::{invalid, Result};
use crate::fit::slope;
use crate::hardy::{block, fb_degree, hp_norm, majorant, test_fb, test_ga, CoefficientVector};
use crate::measure::Measure;
use crate::operator::{
    agreement_check_with, default_z_grid, operator_norm_estimate, relative_residual,
    HankelTruncation,
};
use crate::quad::QuadratureSpec;
use crate::schatten::{frobenius_sq, Membership, SpectralLadder, DEFAULT_LADDER};

pub const DEFAULT_SEED: u64 = 1729;
/// Factor applied to the corrupted moment.
pub const CORRUPTION_FACTOR: f64 = 1.01;
/// Truncation used by the agreement check.
pub const AGREEMENT_N: usize = 512;

/// Names of the checks, indexed from 1.
pub const CHECKS: [&str; 11] = [
    "moment engine",
    "complete monotonicity",
    "fast matvec",
    "series and integral agreement",
    "Carleson evaluator concordance",
    "Hilbert envelope",
    "Schatten membership",
    "dyadic block norms",
    "zero-free majorant",
    "test families",
    "decay of f_b integrals",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Index of a moment scaled by [`CORRUPTION_FACTOR`] in the agreement check.
    pub corrupt_moment: Option<usize>,
    pub quadrature: QuadratureSpec,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            corrupt_moment: None,
            quadrature: QuadratureSpec::default(),
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        self.quadrature.validate()?;
        if let Some(k) = self.corrupt_moment {
            if k > 2 * AGREEMENT_N - 2 {
                return invalid(format!(
                    "corrupted moment index {k} is outside the agreement truncation (max {})",
                    2 * AGREEMENT_N - 2
                ));
            }
        }
        Ok(())
    }
}

/// Moment index in `0..8` drawn from `seed`.
pub fn seeded_moment_index(seed: u64) -> usize {
    ChaCha8Rng::seed_from_u64(seed ^ 0x6d6f_6d65_6e74).random_range(0..8)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub measured: BTreeMap<String, f64>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub corrupt_moment: Option<usize>,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

#[derive(Default)]
struct Recorder {
    measured: BTreeMap<String, f64>,
    failures: Vec<String>,
}

impl Recorder {
    fn record(&mut self, key: impl Into<String>, value: f64) {
        self.measured.insert(key.into(), value);
    }

    fn expect(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(msg());
        }
    }
}

/// Runs every check, in parallel, and assembles the report in check order.
pub fn run(cfg: &VerifyConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let checks: Vec<CheckReport> = (1..=CHECKS.len())
        .into_par_iter()
        .map(|id| run_check(id, cfg))
        .collect();
    Ok(VerifyReport {
        seed: cfg.seed,
        corrupt_moment: cfg.corrupt_moment,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

/// Runs check `id` (1-based); library errors become failures.
pub fn run_check(id: usize, cfg: &VerifyConfig) -> CheckReport {
    let mut rec = Recorder::default();
    let outcome = match id {
        1 => moment_engine(cfg, &mut rec),
        2 => complete_monotonicity(cfg, &mut rec),
        3 => fast_matvec(cfg, &mut rec),
        4 => agreement(cfg, &mut rec),
        5 => carleson_concordance(cfg, &mut rec),
        6 => hilbert_envelope(cfg, &mut rec),
        7 => schatten_membership(cfg, &mut rec),
        8 => dyadic_blocks(&mut rec),
        9 => zero_free_majorant(cfg, &mut rec),
        10 => test_families(&mut rec),
        11 => fb_decay(cfg, &mut rec),
        _ => invalid(format!("no check with id {id}")),
    };
    if let Err(e) = outcome {
        rec.failures.push(e.to_string());
    }
    CheckReport {
        id,
        name: CHECKS
            .get(id.wrapping_sub(1))
            .copied()
            .unwrap_or("unknown")
            .to_string(),
        passed: rec.failures.is_empty(),
        measured: rec.measured,
        failures: rec.failures,
    }
}

fn moment_engine(cfg: &VerifyConfig, rec: &mut Recorder) -> Result<()> {
    const MAX_N: usize = 512;
    for gamma in [-0.5, 0.0, 1.0, 2.0] {
        let mu = Measure::power(gamma, 1.0)?;
        let exact = mu.moments_up_to(MAX_N, &cfg.quadrature)?;
        let worst = (0..=MAX_N)
            .into_par_iter()
            .map(|n| {
                let v = mu.moment_by_quadrature(n, &cfg.quadrature)?;
                Ok(((v - exact.values()[n]) / exact.values()[n]).abs())
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        rec.record(format!("max_relative_error_gamma_{gamma}"), worst);
        rec.expect(worst <= 1e-8, || {
            format!("gamma {gamma}: quadrature off by {worst:e}")
        });
    }
    let leb = Measure::lebesgue().moments_up_to(MAX_N, &cfg.quadrature)?;
    let worst = leb
        .values()
        .iter()
        .enumerate()
        .map(|(n, v)| (v * (n as f64 + 1.0) - 1.0).abs())
        .fold(0.0, f64::max);
    rec.record("lebesgue_max_relative_error", worst);
    rec.expect(worst <= f64::EPSILON, || {
        format!("Lebesgue moments off by {worst:e}")
    });
    Ok(())
}

fn closed_form_families() -> Result<Vec<(String, Measure)>> {
    let mut out = vec![("lebesgue".to_string(), Measure::lebesgue())];
    for gamma in [-0.5, 0.5, 1.0, 2.0] {
        out.push((format!("power_{gamma}"), Measure::power(gamma, 1.0)?));
    }
    out.push(("half".to_string(), Measure::point_mass(0.5, 1.0)?));
    out.push((
        "atoms".to_string(),
        Measure::atomic(vec![0.0, 0.3, 0.75, 0.95], vec![0.5, 1.0, 0.25, 2.0])?,
    ));
    Ok(out)
}

fn complete_monotonicity(cfg: &VerifyConfig, rec: &mut Recorder) -> Result<()> {
    for (name, mu) in closed_form_families()? {
        let defect = mu
            .moments_up_to(256, &cfg.quadrature)?
            .complete_monotonicity_defect(8);
        rec.record(format!("min_scaled_difference_{name}"), defect);
        rec.expect(defect >= -1e-12, || {
            format!("{name}: difference {defect:e} below -1e-12 mu_0")
        });
    }
    Ok(())
}

fn random_coefficients(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn best_of<F: FnMut()>(runs: usize, mut f: F) -> Duration {
    (0..runs)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed()
        })
        .min()
        .unwrap_or_default()
}

fn fast_matvec(cfg: &VerifyConfig, rec: &mut Recorder) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(3));
    let moments = Measure::lebesgue().moments_up_to(2 * 4096 - 2, &cfg.quadrature)?;
    for n in [17, 64, 1000, 4096] {
        let t = HankelTruncation::from_sequence(&moments, n)?;
        let a = random_coefficients(&mut rng, n);
        let fast = t.apply_fast(&a)?;
        let naive = t.apply_naive(&a)?;
        let r = relative_residual(&fast, &naive);
        rec.record(format!("residual_n_{n}"), r);
        rec.expect(r <= 1e-12, || format!("N={n}: residual {r:e}"));
        if n == 4096 {
            let fast_time = best_of(5, || {
                std::hint::black_box(t.apply_fast(&a).ok());
            });
            let naive_time = best_of(3, || {
                std::hint::black_box(t.apply_naive(&a).ok());
            });
            let ok = naive_time >= fast_time * 10;
            rec.record("fast_at_least_10x_at_n_4096", if ok { 1.0 } else { 0.0 });
            rec.expect(ok, || {
                "fast path is less than 10x faster than naive at N=4096".to_string()
            });
        }
    }
    Ok(())
}

fn agreement(cfg: &VerifyConfig, rec: &mut Recorder) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(4));
    let grid = default_z_grid();
    let n = AGREEMENT_N;
    let measures = [
        (
            "atoms",
            Measure::atomic(vec![0.0, 0.3, 0.75, 0.95], vec![0.5, 1.0, 0.25, 2.0])?,
            1e-12,
        ),
        ("power_-0.5", Measure::power(-0.5, 1.0)?, 1e-8),
        ("power_0", Measure::lebesgue(), 1e-8),
        ("power_1", Measure::power(1.0, 1.0)?, 1e-8),
        ("power_2", Measure::power(2.0, 1.0)?, 1e-8),
    ];
    let polys: Vec<CoefficientVector> = (0..20)
        .map(|_| CoefficientVector::new(random_coefficients(&mut rng, 65)))
        .collect::<Result<_>>()?;
    for (name, mu, tol) in &measures {
        let mut moments = mu
            .moments_up_to(2 * n - 2, &cfg.quadrature)?
            .values()
            .to_vec();
        if let Some(k) = cfg.corrupt_moment {
            moments[k] *= CORRUPTION_FACTOR;
        }
        let t = HankelTruncation::new(&moments, n)?;
        let worst = polys
            .iter()
            .map(|f| agreement_check_with(&t, mu, f, &grid, &cfg.quadrature).map(|r| r.max_error))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        rec.record(format!("max_error_{name}"), worst);
        rec.expect(worst <= *tol, || {
            format!("{name}: agreement error {worst:e} exceeds {tol:e}")
        });
    }
    Ok(())
}

fn carleson_concordance(cfg: &VerifyConfig, rec: &mut Recorder) -> Result<()> {
    let grid = GridSpec::default();
    let mut mismatches = 0.0;
    for gamma in [0.0, 0.5, 1.0] {
        let mu = Measure::power(gamma, 1.0)?;
        let moments = mu.moments_up_to(1 << 14, &cfg.quadrature)?;
        for s in [0.5, 1.0, 1.5, 2.0] {
            let want = if gamma + 1.0 >= s {
                Verdict::Finite
            } else {
                Verdict::Divergent
            };
            let verdicts = [
                (
                    "tail",
                    carleson_sup(&mu, s, &grid, &cfg.quadrature)?.verdict,
                ),
                ("moment", moment_carleson_sup(&moments, s)?.verdict),
                ("zhao", zhao_k(&mu, 0.0, s, &grid, &cfg.quadrature)?.verdict),
            ];
            for (which, got) in verdicts {
                if got != want {
                    mismatches += 1.0;
                    rec.failures.push(format!(
                        "gamma {gamma}, s {s}: {which} says {got:?}, expected {want:?}"
                    ));
                }
            }
        }
    }
    rec.record("mismatches", mismatches);
    Ok(())
}

fn hilbert_envelope(cfg: &VerifyConfig, rec: &mut Recorder) -> Result<()> {
    let moments = Measure::lebesgue().moments_up_to(2 * 2048 - 2, &cfg.quadrature)?;
    let mut last = 0.0;
    for n in [64, 256, 1024, 2048] {
        let est = operator_norm_estimate(&HankelTruncation::from_sequence(&moments, n)?, 10_000)?;
        rec.record(format!("norm_n_{n}"), est.value);
        rec.expect(est.value > last, || {
            format!("N={n}: norm {} does not exceed {last}", est.value)
        });
        rec.expect(est.value < PI, || {
            format!("N={n}: norm {} is not below pi", est.value)
        });
        last = est.value;
        if n == 64 {
            let oracle = DMatrix::from_fn(n, n, |i, j| 1.0 / (i + j + 1) as f64)
                .singular_values()
                .max();
            let err = (est.value - oracle).abs() / oracle;
            rec.record("dense_oracle_n_64", oracle);
            rec.expect(err <= 1e-8, || {
                format!("N=64 differs from the dense oracle by {err:e}")
            });
        }
    }
    Ok(())
}

fn schatten_membership(cfg: &VerifyConfig, rec: &mut Recorder) -> Result<()> {
    let cases = [
        ("power_0", Measure::lebesgue(), Membership::NotInSp),
        ("power_1", Measure::power(1.0, 1.0)?, Membership::InSp),
        ("half", Measure::point_mass(0.5, 1.0)?, Membership::InSp),
    ];
    for (name, mu, want) in cases {
        let ladder = SpectralLadder::new(&mu, &DEFAULT_LADDER, &cfg.quadrature)?;
        for p in [1.5, 2.0, 3.0] {
            let r = ladder.verdict(p)?;
            rec.expect(r.verdict == want, || {
                format!("{name}, p {p}: verdict {:?}, expected {want:?}", r.verdict)
            });
            if p == 2.0 {
                let top = ladder.ladder().len() - 1;
                let sum_sq = r.spectral.partials[top];
                let moments = mu.moments_up_to(2 * DEFAULT_LADDER[top] - 2, &cfg.quadrature)?;
                let frob = frobenius_sq(&HankelTruncation::from_sequence(
                    &moments,
                    DEFAULT_LADDER[top],
                )?);
                let err = (sum_sq - frob).abs() / frob;
                rec.record(format!("frobenius_relative_error_{name}"), err);
                rec.expect(err <= 1e-10, || {
                    format!("{name}: Frobenius identity off by {err:e}")
                });
                if name == "power_0" {
                    let x: Vec<f64> = ladder.ladder().iter().map(|n| (*n as f64).ln()).collect();
                    for (track, partials) in [
                        ("spectral", &r.spectral.partials),
                        ("criterion", &r.criterion.partials),
                    ] {
                        let k = slope(&x, partials);
                        rec.record(format!("lebesgue_{track}_log_slope"), k);
                        rec.expect((k - 1.0).abs() <= 0.2, || {
                            format!("Lebesgue {track} slope {k}")
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

fn dyadic_blocks(rec: &mut Recorder) -> Result<()> {
    for p in [1.5, 2.0, 3.0] {
        let ratios = (2..=9)
            .map(|n| Ok(hp_norm(&block(n), p)?.powf(p) / 2f64.powf(n as f64 * (p - 1.0))))
            .collect::<Result<Vec<f64>>>()?;
        let hi = ratios.iter().copied().fold(f64::MIN, f64::max);
        let lo = ratios.iter().copied().fold(f64::MAX, f64::min);
        rec.record(format!("ratio_max_p_{p}"), hi);
        rec.record(format!("ratio_min_p_{p}"), lo);
        if p == 2.0 {
            let err = (hi - 1.0).abs().max((lo - 1.0).abs());
            rec.expect(err <= 1e-10, || {
                format!("p=2 ratios deviate from 1 by {err:e}")
            });
        } else {
            rec.expect(hi / lo <= 8.0, || {
                format!("p={p}: band max/min {}", hi / lo)
            });
        }
    }
    Ok(())
}

fn zero_free_majorant(cfg: &VerifyConfig, rec: &mut Recorder) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(9));
    let polys: Vec<CoefficientVector> = (0..100)
        .map(|_| {
            let degree = rng.random_range(1..=16);
            CoefficientVector::new(
                (0..=degree)
                    .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                    .collect(),
            )
        })
        .collect::<Result<_>>()?;
    let results = polys
        .par_iter()
        .map(|f| {
            let big_f = majorant(f, 2.0)?;
            let mut min_modulus = f64::INFINITY;
            for i in 0..64 {
                let r = i as f64 / 64.0;
                for j in 0..64 {
                    let z = Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / 64.0);
                    min_modulus = min_modulus.min(big_f.eval(z).norm());
                }
            }
            let mut dominance = 0.0f64;
            for j in 0..256 {
                let r = j as f64 / 256.0;
                let fr = big_f.eval(Complex64::new(r, 0.0));
                let ratio = if fr.re > 0.0 {
                    f.eval(Complex64::new(r, 0.0)).norm() / fr.re
                } else {
                    f64::INFINITY
                };
                dominance = dominance.max(ratio);
            }
            let l2 = f.l2_norm();
            let norm_err = (big_f.diagnostics.majorant_norm - l2).abs() / l2;
            Ok((min_modulus / l2, dominance, norm_err))
        })
        .collect::<Result<Vec<(f64, f64, f64)>>>()?;
    let min_modulus = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let dominance = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let norm_err = results.iter().map(|r| r.2).fold(0.0, f64::max);
    rec.record("min_relative_modulus_on_disc_grid", min_modulus);
    rec.record("max_radial_ratio", dominance);
    rec.record("max_norm_relative_error", norm_err);
    rec.expect(min_modulus > 0.0 && min_modulus.is_finite(), || {
        format!("majorant vanishes on the disc grid (min |F|/||f|| = {min_modulus:e})")
    });
    rec.expect(dominance <= 1.0 + 1e-9, || {
        format!("|f(r)|/F(r) reaches {dominance}")
    });
    rec.expect(norm_err <= 1e-8, || {
        format!("H2 norms differ by {norm_err:e}")
    });
    Ok(())
}

fn test_families(rec: &mut Recorder) -> Result<()> {
    for p in [0.5, 1.0, 2.0] {
        for b in [0.0, 0.5, 0.9, 0.99] {
            let f = test_fb(b, p, fb_degree(b, p, 1e-12)?)?;
            let err = (hp_norm(&f, p)? - 1.0).abs();
            rec.record(format!("norm_error_p_{p}_b_{b}"), err);
            rec.expect(err <= 1e-6, || {
                format!("f_b at b={b}, p={p}: |norm - 1| = {err:e}")
            });
        }
    }
    let mut worst = 0.0f64;
    for a in [0.0, 0.5, 0.9, 0.99] {
        let g = test_ga(a, 64)?;
        let c = g.coeffs();
        worst = worst.max((c[0].re - 2f64.ln()).abs());
        for (k, ck) in c.iter().enumerate().skip(1) {
            let want = (k as f64 * a.ln()).exp() / k as f64;
            let err = if want == 0.0 {
                ck.norm()
            } else {
                (ck - want).norm() / want
            };
            worst = worst.max(err);
        }
    }
    rec.record("g_a_max_relative_error", worst);
    rec.expect(worst <= 1e-13, || {
        format!("g_a coefficients off by {worst:e}")
    });
    Ok(())
}

fn fb_decay(cfg: &VerifyConfig, rec: &mut Recorder) -> Result<()> {
    let mut bs = vec![0.9];
    bs.extend((4..=12).map(|j| 1.0 - 0.5f64.powi(j)));
    let ladder = |mu: &Measure| {
        bs.par_iter()
            .map(|b| fb_integral(mu, *b, 1.0, 1.0, &cfg.quadrature))
            .collect::<Result<Vec<f64>>>()
    };
    let vanishing = ladder(&Measure::log_power(1.0, 2.0, 1.0)?)?;
    let decreasing = vanishing.windows(2).all(|w| w[1] < w[0]);
    let ratio = vanishing[vanishing.len() - 1] / vanishing[0];
    rec.record("log_power_value_b_0.9", vanishing[0]);
    rec.record("log_power_final_ratio", ratio);
    rec.expect(decreasing, || {
        format!("log-power ladder not decreasing: {vanishing:?}")
    });
    rec.expect(ratio < 0.25, || {
        format!("log-power ladder only fell to {ratio} of its b=0.9 value")
    });
    let flat = ladder(&Measure::lebesgue())?;
    let floor = flat.iter().copied().fold(f64::INFINITY, f64::min) / flat[0];
    rec.record("lebesgue_min_ratio", floor);
    rec.expect(floor >= 0.5, || {
        format!("Lebesgue ladder dropped to {floor} of its b=0.9 value")
    });
    Ok(())
}
