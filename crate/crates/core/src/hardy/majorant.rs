//! Zero-free majorants of polynomials.
//!
//! For `f = Σ a_k z^k` let `G = Σ |a_k| z^k`. Dividing `G` by the Blaschke
//! product over its zeros in the open disc leaves a function `F` with no
//! zeros in the disc, `F(r) ≥ G(r) ≥ |f(r)|` on `(0, 1)` and `|F| = |G|` on
//! the circle. `F` is kept in factored form and evaluated pointwise.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{default_samples, CoefficientVector};
use crate::error::{invalid, Error, Result};

/// Largest polynomial degree accepted by the root finder.
pub const DEGREE_CAP: usize = 64;
/// Zeros with modulus at least `1 - BOUNDARY_TOL` stay in the outer part.
pub const BOUNDARY_TOL: f64 = 1e-9;
const ROOT_RESIDUAL_TOL: f64 = 1e-8;
const RECONSTRUCTION_TOL: f64 = 1e-9;
/// Relative distance below which computed zeros are treated as one
/// multiple zero.
const CLUSTER_RADIUS: f64 = 1e-5;
/// Truncation degree of the series of `g^{p/2}` when `p ≠ 2`.
const SERIES_DEGREE: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `g(z) = z^m Π (z - z_i) · outer(z)` with `|z_i| < 1 - BOUNDARY_TOL`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeFactorization {
    pub origin_order: usize,
    pub disc_zeros: Vec<Complex64>,
    /// Zeros within `BOUNDARY_TOL` of the unit circle.
    pub boundary_zeros: Vec<Complex64>,
    /// Zeros of modulus greater than `1 + BOUNDARY_TOL`.
    pub exterior_zeros: Vec<Complex64>,
    /// `g / (z^m Π (z - z_i))`, whose zeros are the boundary and exterior ones.
    pub outer_part: CoefficientVector,
    /// Largest relative residual `|g(ζ)| / Σ |g_k| |ζ|^k` over all zeros.
    pub root_residual: f64,
    /// Max coefficient error of the reconstruction relative to the largest
    /// coefficient of `g`.
    pub reconstruction_error: f64,
}

fn horner_with_derivative(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

fn relative_residual(c: &[Complex64], z: Complex64) -> f64 {
    let scale: f64 = c.iter().rev().fold(0.0, |acc, a| acc * z.norm() + a.norm());
    let (p, _) = horner_with_derivative(c, z);
    if scale == 0.0 {
        0.0
    } else {
        p.norm() / scale
    }
}

fn polish(c: &[Complex64], mut z: Complex64) -> Complex64 {
    let mut best = relative_residual(c, z);
    for _ in 0..32 {
        let (p, dp) = horner_with_derivative(c, z);
        if dp == ZERO {
            break;
        }
        let next = z - p / dp;
        let r = relative_residual(c, next);
        if r.is_nan() || r >= best {
            break;
        }
        z = next;
        best = r;
        if best <= f64::EPSILON {
            break;
        }
    }
    z
}

/// All roots of the polynomial with coefficients `c` (`c[last] ≠ 0`,
/// `c[0] ≠ 0`), from the eigenvalues of its companion matrix.
fn roots(c: &[Complex64]) -> Result<Vec<Complex64>> {
    let d = c.len() - 1;
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = c[d];
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for j in 0..d {
        m[(0, j)] = -c[d - 1 - j] / lead;
    }
    for i in 1..d {
        m[(i, i - 1)] = ONE;
    }
    let schur = Schur::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("companion matrix Schur form did not converge".into()))?;
    let eig = schur
        .eigenvalues()
        .ok_or_else(|| Error::Eigen("complex Schur form is not triangular".into()))?;
    Ok(refine_clusters(c, eig.iter().copied().collect()))
}

fn derivative(c: &[Complex64]) -> Vec<Complex64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, a)| a * k as f64)
        .collect()
}

/// Polishes eigenvalue estimates with Newton's method. A `k`-fold zero
/// comes out of the eigensolver as a cluster of radius about `ε^{1/k}`
/// whose mean is accurate; it is sharpened as a simple zero of the
/// `(k-1)`-th derivative.
fn refine_clusters(c: &[Complex64], mut zs: Vec<Complex64>) -> Vec<Complex64> {
    let n = zs.len();
    let mut group: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in 0..i {
            if (zs[i] - zs[j]).norm() <= CLUSTER_RADIUS * zs[i].norm().max(1.0) {
                let (gi, gj) = (group[i], group[j]);
                for g in group.iter_mut() {
                    if *g == gi {
                        *g = gj;
                    }
                }
            }
        }
    }
    for leader in 0..n {
        let members: Vec<usize> = (0..n).filter(|i| group[*i] == leader).collect();
        if members.is_empty() {
            continue;
        }
        let k = members.len();
        let mean = members.iter().map(|i| zs[*i]).sum::<Complex64>() / k as f64;
        let mut d = c.to_vec();
        for _ in 1..k {
            d = derivative(&d);
        }
        let z = polish(&d, mean);
        for i in members {
            zs[i] = z;
        }
    }
    zs
}

fn multiply_linear(c: &[Complex64], root: Complex64) -> Vec<Complex64> {
    let mut out = vec![ZERO; c.len() + 1];
    for (k, a) in c.iter().enumerate() {
        out[k + 1] += a;
        out[k] -= a * root;
    }
    out
}

/// Quotient of `c` by `(z - root)`, dropping the remainder.
fn deflate(c: &[Complex64], root: Complex64) -> Vec<Complex64> {
    let d = c.len() - 1;
    let mut q = vec![ZERO; d];
    q[d - 1] = c[d];
    for k in (1..d).rev() {
        q[k - 1] = c[k] + root * q[k];
    }
    q
}

impl BlaschkeFactorization {
    pub fn of(g: &CoefficientVector) -> Result<Self> {
        if g.is_zero() {
            return invalid("cannot factor the zero polynomial");
        }
        let deg = g.degree();
        let c = &g.coeffs()[..=deg];
        let m = c.iter().position(|a| *a != ZERO).unwrap_or(0);
        let reduced = &c[m..];
        if reduced.len() - 1 > DEGREE_CAP {
            return invalid(format!(
                "root finding is capped at degree {DEGREE_CAP}, got {}",
                reduced.len() - 1
            ));
        }
        let zeros = roots(reduced)?;
        let root_residual = zeros
            .iter()
            .map(|z| relative_residual(reduced, *z))
            .fold(0.0, f64::max);
        if root_residual > ROOT_RESIDUAL_TOL {
            return Err(Error::RootFinding {
                residual: root_residual,
                tolerance: ROOT_RESIDUAL_TOL,
            });
        }

        let mut disc_zeros = Vec::new();
        let mut boundary_zeros = Vec::new();
        let mut exterior_zeros = Vec::new();
        for z in zeros {
            let r = z.norm();
            if r < 1.0 - BOUNDARY_TOL {
                disc_zeros.push(z);
            } else if r <= 1.0 + BOUNDARY_TOL {
                boundary_zeros.push(z);
            } else {
                exterior_zeros.push(z);
            }
        }
        // Forward deflation is stable for zeros of modulus below one and
        // never expands the (possibly clustered) outer zeros.
        let mut outer = reduced.to_vec();
        for z in &disc_zeros {
            outer = deflate(&outer, *z);
        }

        let mut rebuilt = outer.clone();
        for z in &disc_zeros {
            rebuilt = multiply_linear(&rebuilt, *z);
        }
        let scale = c.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let reconstruction_error = reduced
            .iter()
            .zip(&rebuilt)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / scale;
        if reconstruction_error > RECONSTRUCTION_TOL {
            return Err(Error::RootFinding {
                residual: reconstruction_error,
                tolerance: RECONSTRUCTION_TOL,
            });
        }
        Ok(Self {
            origin_order: m,
            disc_zeros,
            boundary_zeros,
            exterior_zeros,
            outer_part: CoefficientVector::new(outer)?,
            root_residual,
            reconstruction_error,
        })
    }

    /// `B(z) = z^m Π (z - z_i)/(1 - conj(z_i) z)` over the disc zeros.
    pub fn blaschke(&self, z: Complex64) -> Complex64 {
        let mut b = z.powu(self.origin_order as u32);
        for zi in &self.disc_zeros {
            b *= (z - zi) / (ONE - zi.conj() * z);
        }
        b
    }

    /// `g / B = outer(z) · Π (1 - conj(z_i) z)`.
    pub fn zero_free(&self, z: Complex64) -> Complex64 {
        let mut v = self.outer_part.eval(z);
        for zi in &self.disc_zeros {
            v *= ONE - zi.conj() * z;
        }
        v
    }

    /// `ln(g/B)` along the principal branch that is real at the origin.
    fn log_zero_free(&self, z: Complex64) -> Complex64 {
        let mut v = self.outer_part.coeffs()[0].ln();
        for rho in self.boundary_zeros.iter().chain(&self.exterior_zeros) {
            v += (ONE - z / rho).ln();
        }
        for zi in &self.disc_zeros {
            v += (ONE - zi.conj() * z).ln();
        }
        v
    }

    /// Coefficients of `g / B`.
    fn zero_free_coefficients(&self) -> Result<CoefficientVector> {
        let mut c = self.outer_part.coeffs().to_vec();
        for zi in &self.disc_zeros {
            let mut next = vec![ZERO; c.len() + 1];
            for (k, a) in c.iter().enumerate() {
                next[k] += a;
                next[k + 1] -= a * zi.conj();
            }
            c = next;
        }
        CoefficientVector::new(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorantDiagnostics {
    pub p: f64,
    pub input_norm: f64,
    pub majorant_norm: f64,
    pub root_residual: f64,
    pub reconstruction_error: f64,
    /// Truncation degree of the `g^{p/2}` series (only for `p ≠ 2`).
    pub series_degree: Option<usize>,
    /// Sum of the moduli of the last eight series coefficients.
    pub series_tail: Option<f64>,
}

/// `F = (G / B_G)^{2/p}`, evaluable anywhere in the closed disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Majorant {
    /// Factorization of `G`, the coefficient-modulus polynomial.
    pub factorization: BlaschkeFactorization,
    pub exponent: f64,
    pub diagnostics: MajorantDiagnostics,
}

impl Majorant {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        if self.exponent == 1.0 {
            self.factorization.zero_free(z)
        } else {
            (self.factorization.log_zero_free(z) * self.exponent).exp()
        }
    }

    /// `M_p(1, F)` from `k` pointwise samples on the circle.
    pub fn hp_norm(&self, p: f64, k: usize) -> f64 {
        let step = std::f64::consts::TAU / k as f64;
        let mean = (0..k)
            .map(|j| {
                self.eval(Complex64::from_polar(1.0, step * j as f64))
                    .norm()
                    .powf(p)
            })
            .sum::<f64>()
            / k as f64;
        mean.powf(1.0 / p)
    }

    fn sample_count(&self) -> usize {
        let f = &self.factorization;
        let deg = f.origin_order + f.disc_zeros.len() + f.outer_part.degree();
        default_samples(deg).max(256)
    }
}

/// Coefficients of `g^beta` through `z^degree` (`g_0 ≠ 0`, principal branch).
fn series_power(g: &[Complex64], beta: f64, degree: usize) -> Vec<Complex64> {
    let mut h = vec![ZERO; degree + 1];
    h[0] = g[0].powf(beta);
    for n in 1..=degree {
        let mut acc = ZERO;
        for k in 1..=n.min(g.len() - 1) {
            acc += g[k] * h[n - k] * ((beta + 1.0) * k as f64 - n as f64);
        }
        h[n] = acc / (g[0] * n as f64);
    }
    h
}

fn modulus_polynomial(c: &[Complex64]) -> Result<CoefficientVector> {
    CoefficientVector::new(c.iter().map(|a| Complex64::new(a.norm(), 0.0)).collect())
}

/// A zero-free majorant of `f` with the same `H^p` norm.
///
/// For `p = 2` the construction is exact. Otherwise `f` is first divided by
/// its own Blaschke product, the zero-free quotient `g` is raised to `p/2`
/// as a truncated power series, and the `p = 2` majorant of that series is
/// raised to `2/p`; the diagnostics report the truncation.
pub fn majorant(f: &CoefficientVector, p: f64) -> Result<Majorant> {
    if f.is_zero() {
        return invalid("the majorant of the zero polynomial is undefined");
    }
    if !(p.is_finite() && p > 0.0) {
        return invalid(format!("exponent p must be positive, got {p}"));
    }
    let input_norm = super::hp_norm(f, p)?;
    let (g, series_degree, series_tail) = if p == 2.0 {
        (modulus_polynomial(f.coeffs())?, None, None)
    } else {
        let zero_free = BlaschkeFactorization::of(f)?.zero_free_coefficients()?;
        let h = series_power(
            &zero_free.coeffs()[..=zero_free.degree()],
            p / 2.0,
            SERIES_DEGREE,
        );
        let tail = h[h.len() - 8..].iter().map(|c| c.norm()).sum();
        // Coefficients at rounding level would only add spurious huge zeros.
        let top = h.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let keep = h.iter().rposition(|c| c.norm() > 1e-14 * top).unwrap_or(0);
        (
            modulus_polynomial(&h[..=keep])?,
            Some(SERIES_DEGREE),
            Some(tail),
        )
    };
    let factorization = BlaschkeFactorization::of(&g)?;
    let mut out = Majorant {
        diagnostics: MajorantDiagnostics {
            p,
            input_norm,
            majorant_norm: 0.0,
            root_residual: factorization.root_residual,
            reconstruction_error: factorization.reconstruction_error,
            series_degree,
            series_tail,
        },
        factorization,
        exponent: 2.0 / p,
    };
    out.diagnostics.majorant_norm = out.hp_norm(p, out.sample_count());
    Ok(out)
}
