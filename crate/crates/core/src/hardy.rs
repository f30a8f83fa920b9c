//! Analytic polynomials on the unit disc: integral means, Hardy, `B_q` and
//! Besov norms, the test families `f_b` and `g_a`, and zero-free majorants.
//!
//! Circle samples `f(r e^{2πik/K})` come from one inverse FFT of the scaled
//! coefficients `a_n r^n`.

mod majorant;

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::measure::MomentSequence;
use crate::quad::{integrate, QuadratureSpec};

pub use majorant::{majorant, BlaschkeFactorization, Majorant, MajorantDiagnostics};

/// Taylor coefficients `a_0, ..., a_{N-1}` of a polynomial.
///
/// Serializes as a JSON array of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct CoefficientVector(Vec<Complex64>);

impl TryFrom<Vec<Complex64>> for CoefficientVector {
    type Error = crate::Error;

    fn try_from(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::new(coeffs)
    }
}

impl From<CoefficientVector> for Vec<Complex64> {
    fn from(f: CoefficientVector) -> Self {
        f.0
    }
}

impl CoefficientVector {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return invalid("coefficient vector must be non-empty");
        }
        if coeffs
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return invalid("coefficients must be finite");
        }
        Ok(Self(coeffs))
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|c| Complex64::new(*c, 0.0)).collect())
    }

    /// The zero polynomial with `n` coefficients.
    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n.max(1)])
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest index with a nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.0
            .iter()
            .rposition(|c| *c != Complex64::new(0.0, 0.0))
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        eval(self, z)
    }

    pub fn derivative(&self) -> Self {
        if self.0.len() == 1 {
            return Self::zeros(1);
        }
        Self(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    /// `(Σ |a_k|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Horner evaluation.
pub fn eval(f: &CoefficientVector, z: Complex64) -> Complex64 {
    f.0.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// Smallest admissible sample count for a polynomial of this degree.
pub fn min_samples(degree: usize) -> usize {
    (8 * (degree + 1)).next_power_of_two()
}

/// Default sample count: `max(64, min_samples(degree))`.
pub fn default_samples(degree: usize) -> usize {
    min_samples(degree).max(64)
}

/// `f(r e^{2πik/K})`, `k = 0..K`.
pub(crate) fn circle_samples(f: &CoefficientVector, r: f64, k: usize) -> Vec<Complex64> {
    let deg = f.degree();
    let mut buf = vec![Complex64::new(0.0, 0.0); k];
    let mut rn = 1.0;
    for (slot, c) in buf.iter_mut().zip(&f.0[..=deg]) {
        *slot = c * rn;
        rn *= r;
    }
    FftPlanner::new().plan_fft_inverse(k).process(&mut buf);
    buf
}

fn power_mean(samples: impl Iterator<Item = f64>, k: usize, p: f64) -> f64 {
    let mean = samples.map(|m| m.powf(p)).sum::<f64>() / k as f64;
    mean.powf(1.0 / p)
}

fn check_samples(f: &CoefficientVector, k: usize) -> Result<()> {
    if !k.is_power_of_two() || k < 8 * (f.degree() + 1) {
        return invalid(format!(
            "sample count {k} must be a power of two at least 8*(degree+1) = {}",
            8 * (f.degree() + 1)
        ));
    }
    Ok(())
}

/// `M_p(r, f) = (1/K Σ |f(r e^{2πik/K})|^p)^{1/p}`.
pub fn integral_means(f: &CoefficientVector, r: f64, p: f64, k: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return invalid(format!("radius {r} outside [0, 1]"));
    }
    if !(p.is_finite() && p > 0.0) {
        return invalid(format!("exponent p must be positive, got {p}"));
    }
    check_samples(f, k)?;
    let samples = circle_samples(f, r, k);
    Ok(power_mean(samples.iter().map(|v| v.norm()), k, p))
}

/// `||f||_{H^p} = M_p(1, f)`.
pub fn hp_norm(f: &CoefficientVector, p: f64) -> Result<f64> {
    integral_means(f, 1.0, p, default_samples(f.degree()))
}

/// Depth `v = ln(1/(1-r))` beyond which radial integrals are closed
/// analytically with `M(r) ≈ M(1)`.
const RADIAL_DEPTH: f64 = 30.0;

/// Integrates `w(x) · m(1 - x)` over `x = 1 - r ∈ (0, 1]` in `v = -ln x`,
/// where `w(x) ≈ c x^{κ-1}` near 0, adding `c m(1) X^κ / κ` for the
/// neglected `(0, X]`.
fn radial_integral<F>(weight_times_x: F, near_zero: (f64, f64), m1: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let (c, kappa) = near_zero;
    let spec = QuadratureSpec::default();
    let body = integrate(
        |v: f64| {
            let x = (-v).exp();
            let r = -(-v).exp_m1();
            weight_times_x(x, r)
        },
        0.0,
        RADIAL_DEPTH,
        16,
        0.0,
        &spec,
    )?;
    let x0 = (-RADIAL_DEPTH).exp();
    Ok(body.value + c * m1 * x0.powf(kappa) / kappa)
}

/// `∫_0^1 (1-r)^{1/q-2} M_1(r, f) dr` for `0 < q < 1`.
pub fn bq_norm(f: &CoefficientVector, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return invalid(format!("B_q needs 0 < q < 1, got {q}"));
    }
    let k = default_samples(f.degree());
    let kappa = 1.0 / q - 1.0;
    let m1 = |r: f64| integral_means(f, r, 1.0, k).unwrap_or(f64::NAN);
    radial_integral(|x, r| x.powf(kappa) * m1(r), (1.0, kappa), m1(1.0))
}

/// `|g(0)|^p + ∫_D |g'(z)|^p (1-|z|²)^{p-2} dA(z)` with `dA` the
/// unnormalized area measure.
pub fn besov_norm(g: &CoefficientVector, p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return invalid(format!("Besov exponent must exceed 1, got {p}"));
    }
    let head = g.coeffs()[0].norm().powf(p);
    let dg = g.derivative();
    if dg.is_zero() {
        return Ok(head);
    }
    let k = default_samples(dg.degree());
    let mpp = |r: f64| integral_means(&dg, r, p, k).map_or(f64::NAN, |m| m.powf(p));
    let area = radial_integral(
        |x, r| 2.0 * PI * r * mpp(r) * (x * (2.0 - x)).powf(p - 2.0) * x,
        (2.0 * PI * 2f64.powf(p - 2.0), p - 1.0),
        mpp(1.0),
    )?;
    Ok(head + area)
}

/// `Σ_{k=2^n}^{2^{n+1}-1} z^{k-1}`.
pub fn block(n: u32) -> CoefficientVector {
    let lo = 1usize << n;
    let mut c = vec![Complex64::new(0.0, 0.0); 2 * lo - 1];
    for slot in &mut c[lo - 1..] {
        *slot = Complex64::new(1.0, 0.0);
    }
    CoefficientVector(c)
}

/// `h_μ(z) = Σ_{n≥1} μ_{n+1} z^n` through `z^degree`.
pub fn h_mu(momseq: &MomentSequence, degree: usize) -> Result<CoefficientVector> {
    if momseq.len() < degree + 2 {
        return invalid(format!(
            "h_mu of degree {degree} needs {} moments, got {}",
            degree + 2,
            momseq.len()
        ));
    }
    let v = momseq.values();
    let mut c = vec![Complex64::new(0.0, 0.0); degree + 1];
    for (n, slot) in c.iter_mut().enumerate().skip(1) {
        *slot = Complex64::new(v[n + 1], 0.0);
    }
    CoefficientVector::new(c)
}

/// `Σ_{n=0}^{nmax} 2^{-n(p-1)} ||Σ_{k=2^n}^{2^{n+1}-1} k μ_{k+1} z^{k-1}||^p_{H^p}`.
pub fn dyadic_block_besov(momseq: &MomentSequence, p: f64, nmax: u32) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return invalid(format!("Besov exponent must exceed 1, got {p}"));
    }
    if nmax > 24 {
        return invalid(format!("nmax {nmax} exceeds 24"));
    }
    let need = (1usize << (nmax + 1)) + 1;
    if momseq.len() < need {
        return invalid(format!(
            "dyadic blocks through n={nmax} need {need} moments, got {}",
            momseq.len()
        ));
    }
    let v = momseq.values();
    let mut total = 0.0;
    for n in 0..=nmax {
        let lo = 1usize << n;
        // The common factor z^{2^n - 1} has modulus one on the circle.
        let c: Vec<Complex64> = (lo..2 * lo)
            .map(|k| Complex64::new(k as f64 * v[k + 1], 0.0))
            .collect();
        let norm = hp_norm(&CoefficientVector(c), p)?;
        total += 2f64.powf(-(n as f64) * (p - 1.0)) * norm.powf(p);
    }
    Ok(total)
}

/// Degree at which the Taylor tail of `f_b` is below `tol` in sup norm on
/// the closed disc.
pub fn fb_degree(b: f64, p: f64, tol: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&b) {
        return invalid(format!("b must lie in [0, 1), got {b}"));
    }
    if !(p.is_finite() && p > 0.0 && tol > 0.0) {
        return invalid("p and tol must be positive");
    }
    if b == 0.0 {
        return Ok(0);
    }
    let m = 2.0 / p;
    let mut c = (1.0 - b * b).powf(1.0 / p);
    let mut d = 0usize;
    loop {
        let kf = d as f64;
        let ratio = b * (kf + m) / (kf + 1.0);
        let next = c * ratio;
        // Ratios decrease towards b when m >= 1 and increase towards b otherwise.
        let rho = if m >= 1.0 {
            b * (kf + 1.0 + m) / (kf + 2.0)
        } else {
            b
        };
        if rho < 1.0 && next / (1.0 - rho) <= tol {
            return Ok(d);
        }
        c = next;
        d += 1;
    }
}

/// Taylor coefficients through `z^degree` of `((1-b²)/(1-bz)²)^{1/p}`.
pub fn test_fb(b: f64, p: f64, degree: usize) -> Result<CoefficientVector> {
    if !(0.0..1.0).contains(&b) {
        return invalid(format!("b must lie in [0, 1), got {b}"));
    }
    if !(p.is_finite() && p > 0.0) {
        return invalid(format!("exponent p must be positive, got {p}"));
    }
    let m = 2.0 / p;
    let mut c = (1.0 - b * b).powf(1.0 / p);
    let mut out = Vec::with_capacity(degree + 1);
    for k in 0..=degree {
        out.push(Complex64::new(c, 0.0));
        let kf = k as f64;
        c *= b * (kf + m) / (kf + 1.0);
    }
    CoefficientVector::new(out)
}

/// Taylor coefficients through `z^degree` of `log(2/(1-az))`.
pub fn test_ga(a: f64, degree: usize) -> Result<CoefficientVector> {
    if !(0.0..1.0).contains(&a) {
        return invalid(format!("a must lie in [0, 1), got {a}"));
    }
    let mut out = Vec::with_capacity(degree + 1);
    out.push(Complex64::new(std::f64::consts::LN_2, 0.0));
    for k in 1..=degree {
        out.push(Complex64::new(a.powi(k as i32) / k as f64, 0.0));
    }
    CoefficientVector::new(out)
}

/// `M_p(r_j, f)` on `r_j = 1 - 2^{-j}`, `j = 0..=levels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub p: f64,
    pub radii: Vec<f64>,
    pub means: Vec<f64>,
}

pub fn radial_profile(f: &CoefficientVector, p: f64, levels: usize) -> Result<RadialProfile> {
    let k = default_samples(f.degree());
    let radii: Vec<f64> = (0..=levels).map(|j| 1.0 - 0.5f64.powi(j as i32)).collect();
    let means = radii
        .iter()
        .map(|r| integral_means(f, *r, p, k))
        .collect::<Result<_>>()?;
    Ok(RadialProfile { p, radii, means })
}
