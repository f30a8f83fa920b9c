//! Singular values of Hankel truncations and Schatten-class membership.
//!
//! The truncations are symmetric positive semidefinite, so the dense
//! symmetric eigensolver gives the singular values directly.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fit::slope;
use crate::measure::{Measure, MomentSequence};
use crate::operator::HankelTruncation;
use crate::quad::QuadratureSpec;

/// Largest truncation handed to the dense eigensolver.
pub const DENSE_CAP: usize = 2048;
/// Default ladder for membership fits.
pub const DEFAULT_LADDER: [usize; 4] = [128, 256, 512, 1024];
/// Relative increment per doubling separating "flat" from "growing".
pub const FLAT_INCREMENT: f64 = 0.01;

/// Nonincreasing singular values of the truncation.
pub fn singular_values(t: &HankelTruncation) -> Result<Vec<f64>> {
    let n = t.size();
    if n > DENSE_CAP {
        return invalid(format!(
            "dense spectra are capped at N = {DENSE_CAP}, got {n}"
        ));
    }
    // Squares of far-tail entries underflow inside the Householder norms
    // and poison the reduction with NaN; zeroing entries below 1e-60 of
    // the corner entry moves no singular value by more than N·1e-60·μ_0.
    let floor = 1e-60 * t.entry(0, 0);
    let m = DMatrix::from_fn(n, n, |i, j| {
        let v = t.entry(i, j);
        if v < floor {
            0.0
        } else {
            v
        }
    });
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen(format!("symmetric eigensolver failed at N = {n}")))?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().map(|v| v.abs()).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// `(Σ λ^p)^{1/p}` over a precomputed spectrum.
pub fn pnorm_of(values: &[f64], p: f64) -> Result<f64> {
    Ok(power_sum(values, p)?.powf(1.0 / p))
}

fn power_sum(values: &[f64], p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return invalid(format!("Schatten exponent must be positive, got {p}"));
    }
    Ok(values.iter().map(|v| v.powf(p)).sum())
}

pub fn schatten_pnorm(t: &HankelTruncation, p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return invalid(format!("Schatten exponent must be positive, got {p}"));
    }
    pnorm_of(&singular_values(t)?, p)
}

/// `Σ_{n,k<N} μ_{n+k}²`, grouped by anti-diagonal.
pub fn frobenius_sq(t: &HankelTruncation) -> f64 {
    let n = t.size();
    t.moments()
        .iter()
        .enumerate()
        .map(|(m, v)| {
            let count = if m < n { m + 1 } else { 2 * n - 1 - m };
            count as f64 * v * v
        })
        .sum()
}

/// `Σ_{n<N} (n+1)^{p-1} μ_n^p`.
pub fn criterion_sum(momseq: &MomentSequence, p: f64, n: usize) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return invalid(format!("criterion exponent must exceed 1, got {p}"));
    }
    if momseq.len() < n {
        return invalid(format!(
            "criterion sum through N = {n} needs {n} moments, got {}",
            momseq.len()
        ));
    }
    Ok(momseq.values()[..n]
        .iter()
        .enumerate()
        .map(|(k, m)| ((k + 1) as f64).powf(p - 1.0) * m.powf(p))
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchattenReport {
    pub p: f64,
    pub n: usize,
    pub singular_values: Vec<f64>,
    /// `Σ λ^p`.
    pub schatten_partial: f64,
    /// `Σ_{n<N} (n+1)^{p-1} μ_n^p`.
    pub criterion_partial: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Track {
    Flat,
    Growing,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    #[serde(rename = "in_Sp")]
    InSp,
    #[serde(rename = "not_in_Sp")]
    NotInSp,
    #[serde(rename = "boundary")]
    Boundary,
}

/// One partial-sum sequence along the ladder with its growth diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub partials: Vec<f64>,
    /// Relative increment per doubling between consecutive ladder points.
    pub increments: Vec<f64>,
    /// Slope of the partial sum against `ln N` over the last three points.
    pub slope: f64,
    pub track: Track,
}

impl GrowthFit {
    fn new(ladder: &[usize], partials: Vec<f64>) -> Self {
        let increments: Vec<f64> = ladder
            .windows(2)
            .zip(partials.windows(2))
            .map(|(n, s)| {
                let doublings = (n[1] as f64 / n[0] as f64).log2();
                if s[0] == 0.0 {
                    if s[1] == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    (s[1] / s[0] - 1.0) / doublings
                }
            })
            .collect();
        let from = ladder.len().saturating_sub(3);
        let x: Vec<f64> = ladder[from..].iter().map(|n| (*n as f64).ln()).collect();
        let slope = slope(&x, &partials[from..]);
        let last = &increments[increments.len().saturating_sub(2)..];
        let track = if increments.last().is_some_and(|d| *d < FLAT_INCREMENT) {
            Track::Flat
        } else if last.len() == 2 && last.iter().all(|d| *d >= FLAT_INCREMENT) && slope > 0.0 {
            Track::Growing
        } else {
            Track::Mixed
        };
        Self {
            partials,
            increments,
            slope,
            track,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub p: f64,
    pub ladder: Vec<usize>,
    pub spectral: GrowthFit,
    pub criterion: GrowthFit,
    pub verdict: Membership,
}

/// Spectra and moments for a nested ladder, computed once and reused
/// across exponents.
#[derive(Debug, Clone)]
pub struct SpectralLadder {
    ladder: Vec<usize>,
    moments: MomentSequence,
    spectra: Vec<Vec<f64>>,
}

impl SpectralLadder {
    pub fn new(mu: &Measure, ladder: &[usize], q: &QuadratureSpec) -> Result<Self> {
        if ladder.len() < 3 {
            return invalid("membership ladder needs at least three sizes");
        }
        if ladder.windows(2).any(|w| w[0] >= w[1]) || ladder[0] == 0 {
            return invalid("membership ladder must be strictly increasing and positive");
        }
        let top = *ladder.last().expect("nonempty");
        if top > DENSE_CAP {
            return invalid(format!(
                "ladder top {top} exceeds the dense cap {DENSE_CAP}"
            ));
        }
        let moments = mu.moments_up_to(2 * top - 2, q)?;
        let spectra = ladder
            .iter()
            .map(|n| singular_values(&HankelTruncation::from_sequence(&moments, *n)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            ladder: ladder.to_vec(),
            moments,
            spectra,
        })
    }

    pub fn ladder(&self) -> &[usize] {
        &self.ladder
    }

    pub fn spectra(&self) -> &[Vec<f64>] {
        &self.spectra
    }

    pub fn reports(&self, p: f64) -> Result<Vec<SchattenReport>> {
        self.ladder
            .iter()
            .zip(&self.spectra)
            .map(|(n, values)| {
                Ok(SchattenReport {
                    p,
                    n: *n,
                    singular_values: values.clone(),
                    schatten_partial: power_sum(values, p)?,
                    criterion_partial: criterion_sum(&self.moments, p, *n)?,
                })
            })
            .collect()
    }

    pub fn verdict(&self, p: f64) -> Result<MembershipReport> {
        if !(p > 1.0 && p.is_finite()) {
            return invalid(format!("membership needs p > 1, got {p}"));
        }
        let spectral = self
            .spectra
            .iter()
            .map(|v| power_sum(v, p))
            .collect::<Result<Vec<_>>>()?;
        let criterion = self
            .ladder
            .iter()
            .map(|n| criterion_sum(&self.moments, p, *n))
            .collect::<Result<Vec<_>>>()?;
        let spectral = GrowthFit::new(&self.ladder, spectral);
        let criterion = GrowthFit::new(&self.ladder, criterion);
        let verdict = match (spectral.track, criterion.track) {
            (Track::Flat, Track::Flat) => Membership::InSp,
            (Track::Growing, Track::Growing) => Membership::NotInSp,
            _ => Membership::Boundary,
        };
        Ok(MembershipReport {
            p,
            ladder: self.ladder.clone(),
            spectral,
            criterion,
            verdict,
        })
    }
}

pub fn membership_verdict(
    mu: &Measure,
    p: f64,
    ladder: &[usize],
    q: &QuadratureSpec,
) -> Result<MembershipReport> {
    SpectralLadder::new(mu, ladder, q)?.verdict(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn trunc(mu: &Measure, n: usize) -> HankelTruncation {
        HankelTruncation::from_measure(mu, n, &q()).unwrap()
    }

    #[test]
    fn rank_one_and_scalar() {
        let t = trunc(&Measure::point_mass(0.0, 2.0).unwrap(), 6);
        let s = singular_values(&t).unwrap();
        assert!((s[0] - 2.0).abs() < 1e-15 && s[1..].iter().all(|v| v.abs() < 1e-15));
        for p in [0.5, 1.0, 3.0] {
            assert!((schatten_pnorm(&t, p).unwrap() - 2.0).abs() < 1e-14);
        }
        let one = trunc(&Measure::power(1.0, 1.0).unwrap(), 1);
        assert_eq!(singular_values(&one).unwrap(), vec![0.5]);
    }

    #[test]
    fn hilbert_three_by_three() {
        // Characteristic polynomial of the 3x3 Hilbert segment:
        // λ³ - (23/15)λ² + (127/720)λ - 1/2160.
        let s = singular_values(&trunc(&Measure::lebesgue(), 3)).unwrap();
        for l in &s {
            let c = l * l * l - 23.0 / 15.0 * l * l + 127.0 / 720.0 * l - 1.0 / 2160.0;
            assert!(c.abs() < 1e-14, "{l}: {c}");
        }
        assert!((s.iter().sum::<f64>() - 23.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn frobenius_identity() {
        let t = trunc(&Measure::lebesgue(), 64);
        let mut direct = 0.0;
        for n in 0..64 {
            for k in 0..64 {
                direct += 1.0 / ((n + k + 1) as f64).powi(2);
            }
        }
        assert!((frobenius_sq(&t) - direct).abs() < 1e-13 * direct);
        let s2 = schatten_pnorm(&t, 2.0).unwrap().powi(2);
        assert!((s2 - direct).abs() < 1e-10 * direct);
    }

    #[test]
    fn criterion_examples() {
        let leb = Measure::lebesgue().moments_up_to(99, &q()).unwrap();
        let h: f64 = (1..=100).map(|k| 1.0 / k as f64).sum();
        assert!((criterion_sum(&leb, 2.0, 100).unwrap() - h).abs() < 1e-13);
        let half = Measure::point_mass(0.5, 1.0)
            .unwrap()
            .moments_up_to(199, &q())
            .unwrap();
        assert!((criterion_sum(&half, 2.0, 200).unwrap() - 16.0 / 9.0).abs() < 1e-14);
        assert!(criterion_sum(&half, 1.0, 10).is_err());
        assert!(criterion_sum(&half, 2.0, 201).is_err());
    }

    #[test]
    fn verdicts() {
        let ladder = [64, 128, 256];
        let half = membership_verdict(&Measure::point_mass(0.5, 1.0).unwrap(), 2.0, &ladder, &q())
            .unwrap();
        assert_eq!(half.verdict, Membership::InSp, "{half:?}");
        let leb = membership_verdict(&Measure::lebesgue(), 2.0, &ladder, &q()).unwrap();
        assert_eq!(leb.verdict, Membership::NotInSp);
        let smooth =
            membership_verdict(&Measure::power(1.0, 1.0).unwrap(), 2.0, &ladder, &q()).unwrap();
        assert_eq!(smooth.verdict, Membership::InSp);
        assert!(membership_verdict(&Measure::lebesgue(), 2.0, &[64, 64, 128], &q()).is_err());
    }
}
