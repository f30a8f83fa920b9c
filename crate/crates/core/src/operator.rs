//! The two actions of `H_μ`: the Hankel matrix `(μ_{n+k})` on Taylor
//! coefficients and the integral `∫ f(t) / (1 - tz) dμ(t)`.
//!
//! The fast matvec embeds the Hankel product in a circular convolution of
//! length `next_pow2(2N - 1)`; the transform of the moment window is
//! computed once per truncation.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hardy::{hp_norm, CoefficientVector};
use crate::measure::{Measure, MomentSequence};
use crate::quad::QuadratureSpec;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default truncation size for matvecs.
pub const DEFAULT_N: usize = 4096;
/// Truncation tail allowed by [`agreement_check`].
pub const TAIL_TOL: f64 = 1e-12;

/// The `N × N` Hankel matrix `A[n][k] = μ_{n+k}`.
#[derive(Clone)]
pub struct HankelTruncation {
    n: usize,
    moments: Vec<f64>,
    spectrum: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for HankelTruncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HankelTruncation")
            .field("n", &self.n)
            .field("moments", &self.moments.len())
            .finish()
    }
}

impl HankelTruncation {
    /// Uses `moments[0..2n-1]`.
    pub fn new(moments: &[f64], n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("truncation size must be positive");
        }
        if moments.len() < 2 * n - 1 {
            return invalid(format!(
                "an {n}x{n} truncation needs {} moments, got {}",
                2 * n - 1,
                moments.len()
            ));
        }
        let moments = moments[..2 * n - 1].to_vec();
        let len = (2 * n - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut spectrum = vec![ZERO; len];
        for (s, m) in spectrum.iter_mut().zip(&moments) {
            *s = Complex64::new(*m, 0.0);
        }
        forward.process(&mut spectrum);
        Ok(Self {
            n,
            moments,
            spectrum,
            forward,
            inverse,
        })
    }

    pub fn from_sequence(momseq: &MomentSequence, n: usize) -> Result<Self> {
        Self::new(momseq.values(), n)
    }

    pub fn from_measure(mu: &Measure, n: usize, q: &QuadratureSpec) -> Result<Self> {
        if n == 0 {
            return invalid("truncation size must be positive");
        }
        Self::from_sequence(&mu.moments_up_to(2 * n - 2, q)?, n)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.moments[row + col]
    }

    fn check(&self, a: &[Complex64]) -> Result<()> {
        if a.len() > self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: a.len(),
            });
        }
        Ok(())
    }

    /// `b_n = Σ_k μ_{n+k} a_k` by direct summation.
    pub fn apply_naive(&self, a: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(a)?;
        Ok((0..self.n)
            .map(|row| {
                a.iter()
                    .enumerate()
                    .fold(ZERO, |acc, (k, ak)| acc + ak * self.moments[row + k])
            })
            .collect())
    }

    /// Same product through the circular embedding.
    pub fn apply_fast(&self, a: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(a)?;
        let n = self.n;
        let len = self.spectrum.len();
        let mut buf = vec![ZERO; len];
        for (k, ak) in a.iter().enumerate() {
            buf[n - 1 - k] = *ak;
        }
        self.forward.process(&mut buf);
        for (x, s) in buf.iter_mut().zip(&self.spectrum) {
            *x *= s;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / len as f64;
        Ok(buf[n - 1..2 * n - 1].iter().map(|v| v * scale).collect())
    }

    /// Real symmetric product used by the power iteration.
    fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        let a: Vec<Complex64> = x.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.apply_fast(&a)
            .expect("length checked by caller")
            .iter()
            .map(|v| v.re)
            .collect()
    }
}

pub fn hankel_apply_naive(
    t: &HankelTruncation,
    a: &CoefficientVector,
) -> Result<CoefficientVector> {
    CoefficientVector::new(t.apply_naive(a.coeffs())?)
}

pub fn hankel_apply_fast(t: &HankelTruncation, a: &CoefficientVector) -> Result<CoefficientVector> {
    CoefficientVector::new(t.apply_fast(a.coeffs())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Naive,
    Fast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplyReport {
    pub output: CoefficientVector,
    pub method: Method,
    /// `||fast - naive||_2 / ||naive||_2` when both ran.
    pub residual: Option<f64>,
}

/// `||x - y||_2 / ||y||_2`, or `||x||_2` when `y = 0`.
pub fn relative_residual(x: &[Complex64], y: &[Complex64]) -> f64 {
    let diff: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let base: f64 = y.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
    if base == 0.0 {
        diff
    } else {
        diff / base
    }
}

/// Applies the truncation with the fast kernel. With `cross_check` the
/// naive product also runs, is returned as the output, and the residual
/// between the two is reported.
pub fn apply(
    t: &HankelTruncation,
    a: &CoefficientVector,
    cross_check: bool,
) -> Result<ApplyReport> {
    let fast = t.apply_fast(a.coeffs())?;
    if !cross_check {
        return Ok(ApplyReport {
            output: CoefficientVector::new(fast)?,
            method: Method::Fast,
            residual: None,
        });
    }
    let naive = t.apply_naive(a.coeffs())?;
    let residual = relative_residual(&fast, &naive);
    Ok(ApplyReport {
        output: CoefficientVector::new(naive)?,
        method: Method::Naive,
        residual: Some(residual),
    })
}

/// `I_μ(f)(z) = ∫ f(t) / (1 - tz) dμ(t)` for `|z| < 1`.
pub fn integral_apply(
    mu: &Measure,
    f: &CoefficientVector,
    z: Complex64,
    q: &QuadratureSpec,
) -> Result<Complex64> {
    if z.norm().is_nan() || z.norm() >= 1.0 {
        return invalid(format!(
            "integral form needs |z| < 1, got |z| = {}",
            z.norm()
        ));
    }
    let one_minus_z = Complex64::new(1.0, 0.0) - z;
    let integrand = |p: crate::measure::RadialPoint| {
        let ft = f.eval(Complex64::new(p.t, 0.0));
        ft / (one_minus_z + z * p.omt)
    };
    Ok(mu.integrate(0.0, 0.0, integrand, 0.0, q)?.value)
}

/// 16 points: radii 0.5 and 0.9, eight equispaced angles each.
pub fn default_z_grid() -> Vec<Complex64> {
    let mut out = Vec::with_capacity(16);
    for r in [0.5, 0.9] {
        for k in 0..8 {
            out.push(Complex64::from_polar(
                r,
                std::f64::consts::TAU * k as f64 / 8.0,
            ));
        }
    }
    out
}

/// Bound on `|Σ_{n≥N} b_n z^n|` from `|b_n| ≤ μ_0 ||a||_1` and `|z| ≤ r`.
pub fn truncation_tail_bound(mu0: f64, a: &CoefficientVector, r: f64, n: usize) -> f64 {
    let l1: f64 = a.coeffs().iter().map(|c| c.norm()).sum();
    mu0 * l1 * r.powi(n as i32) / (1.0 - r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementPoint {
    pub z: Complex64,
    /// `Σ_{n<N} b_n z^n`.
    pub series: Complex64,
    pub integral: Complex64,
    /// `|series - integral| / (1 + |integral|)`.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub n: usize,
    pub tail_bound: f64,
    pub points: Vec<AgreementPoint>,
    pub max_error: f64,
}

/// Compares the Hankel series with the integral form on `z_grid`, using
/// the given truncation for the coefficient side.
pub fn agreement_check_with(
    t: &HankelTruncation,
    mu: &Measure,
    f: &CoefficientVector,
    z_grid: &[Complex64],
    q: &QuadratureSpec,
) -> Result<AgreementReport> {
    let rmax = z_grid.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if rmax > 0.9 + 1e-12 {
        return invalid(format!("agreement grid must lie in |z| <= 0.9, got {rmax}"));
    }
    let a = &f.coeffs()[..=f.degree()];
    let tail_bound = truncation_tail_bound(t.moments()[0], f, rmax, t.size());
    if tail_bound >= TAIL_TOL {
        return invalid(format!(
            "truncation N={} leaves a tail bound of {tail_bound:e} at |z|={rmax}",
            t.size()
        ));
    }
    let b = CoefficientVector::new(t.apply_fast(a)?)?;
    let points = z_grid
        .par_iter()
        .map(|z| {
            let integral = integral_apply(mu, f, *z, q)?;
            let series = b.eval(*z);
            Ok(AgreementPoint {
                z: *z,
                series,
                integral,
                error: (series - integral).norm() / (1.0 + integral.norm()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_error = points.iter().map(|p| p.error).fold(0.0, f64::max);
    Ok(AgreementReport {
        n: t.size(),
        tail_bound,
        points,
        max_error,
    })
}

/// [`agreement_check_with`] on a fresh `N × N` truncation of `mu`.
pub fn agreement_check(
    mu: &Measure,
    f: &CoefficientVector,
    z_grid: &[Complex64],
    n: usize,
    q: &QuadratureSpec,
) -> Result<AgreementReport> {
    let t = HankelTruncation::from_measure(mu, n.max(f.degree() + 1), q)?;
    agreement_check_with(&t, mu, f, z_grid, q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    /// Rayleigh quotient reached from each seed.
    pub seeds: Vec<f64>,
}

const RAYLEIGH_TOL: f64 = 1e-10;

fn power_iteration(
    t: &HankelTruncation,
    mut x: Vec<f64>,
    max_iterations: usize,
) -> Result<(f64, usize)> {
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let n0 = norm(&x);
    x.iter_mut().for_each(|v| *v /= n0);
    let mut last = f64::NAN;
    for it in 1..=max_iterations {
        let y = t.apply_real(&x);
        let rq: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let ny = norm(&y);
        if ny == 0.0 {
            return Ok((0.0, it));
        }
        if (rq - last).abs() < RAYLEIGH_TOL * rq.abs() {
            return Ok((rq, it));
        }
        last = rq;
        x = y.into_iter().map(|v| v / ny).collect();
    }
    Err(Error::NoConvergence {
        last,
        iterations: max_iterations,
    })
}

/// Largest singular value of the truncation by power iteration from the
/// normalized all-ones vector and a fixed alternate seed.
pub fn operator_norm_estimate(t: &HankelTruncation, max_iterations: usize) -> Result<NormEstimate> {
    let n = t.size();
    if n < 2 {
        return invalid("operator norm estimate needs N >= 2");
    }
    let ones = vec![1.0; n];
    let alternate: Vec<f64> = (0..n).map(|k| 1.0 + 0.5 * ((k + 1) as f64).sin()).collect();
    let (a, ia) = power_iteration(t, ones, max_iterations)?;
    let (b, ib) = power_iteration(t, alternate, max_iterations)?;
    Ok(NormEstimate {
        value: a.max(b),
        iterations: ia.max(ib),
        seeds: vec![a, b],
    })
}

/// `||Σ_{n<N} b_n z^n||_{H^q}` for `b = A a`.
pub fn image_hq_norm(t: &HankelTruncation, f: &CoefficientVector, q_exp: f64) -> Result<f64> {
    let a = &f.coeffs()[..=f.degree()];
    let b = CoefficientVector::new(t.apply_fast(a)?)?;
    hp_norm(&b, q_exp)
}
