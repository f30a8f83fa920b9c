//! Carleson-type functionals of radial measures evaluated along the dyadic
//! approach `a_j = 1 - 2^{-j}`, their trend classification, the radial
//! balayage, and the analytic boundedness table for parametric families.
//!
//! Trends are read off the last half of the grid: the least-squares slope
//! of `ln(value_j)` per dyadic level is compared with `0.05 ln 2`.

use std::cell::RefCell;
use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fit;
use crate::measure::{
    conj_exponent, log_two_over, Measure, MeasureKind, MomentSequence, RadialPoint,
};
use crate::quad::{integrate, QuadratureSpec};

/// Slope threshold per dyadic level, in natural-log units.
pub const SLOPE_TOL: f64 = 0.05 * LN_2;

/// Largest max/min ratio over the trend window still called flat.
const FLAT_RATIO: f64 = 2.0;

/// Relative slack when testing that a window is nonincreasing.
const MONOTONE_SLACK: f64 = 1e-12;

/// Dyadic boundary-approach grid `a_j = 1 - 2^{-j}`, `j = 0..=levels`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    levels: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { levels: 14 }
    }
}

impl GridSpec {
    pub fn new(levels: usize) -> Result<Self> {
        if !(4..=52).contains(&levels) {
            return invalid(format!("grid levels must lie in [4, 52], got {levels}"));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// `1 - a_j = 2^{-j}`.
    pub fn gap(&self, j: usize) -> f64 {
        0.5f64.powi(j as i32)
    }

    pub fn points(&self) -> Vec<f64> {
        (0..=self.levels).map(|j| 1.0 - self.gap(j)).collect()
    }

    /// First index of the trend window.
    pub fn window_start(&self) -> usize {
        self.levels / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Finite,
    Boundary,
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    /// `μ([a,1)) / (1-a)^s`.
    Tail,
    /// `μ([a,1)) log(2/(1-a²))^α / (1-a²)^s`.
    LogTail,
    /// `log(2/(1-a²))^α ∫ ((1-a²)/(1-at)²)^s dμ(t)`.
    Zhao,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlesonReport {
    pub functional: Functional,
    pub s: f64,
    pub alpha: f64,
    pub points: Vec<f64>,
    pub values: Vec<f64>,
    pub sup_value: f64,
    pub argmax: usize,
    /// Slope of `ln(value_j)` against `j` over the trend window.
    pub slope: Option<f64>,
    pub verdict: Verdict,
    pub vanishing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Trend {
    slope: Option<f64>,
    verdict: Verdict,
    vanishing: bool,
}

/// Classifies the tail of a positive sequence sampled at abscissae `x`.
fn classify_trend(x: &[f64], y: &[f64], tol: f64) -> Trend {
    if y.last().is_none_or(|v| *v <= 0.0) {
        return Trend {
            slope: None,
            verdict: Verdict::Finite,
            vanishing: true,
        };
    }
    let (px, py): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(_, v)| **v > 0.0)
        .map(|(a, v)| (*a, v.ln()))
        .unzip();
    if px.len() < 2 {
        return Trend {
            slope: None,
            verdict: Verdict::Finite,
            vanishing: false,
        };
    }
    let slope = fit::slope(&px, &py);
    let monotone = y.windows(2).all(|w| w[1] <= w[0] * (1.0 + MONOTONE_SLACK));
    let verdict = if slope >= tol {
        Verdict::Divergent
    } else if slope <= -tol {
        Verdict::Finite
    } else {
        let hi = y.iter().copied().fold(f64::MIN, f64::max);
        let lo = y.iter().copied().fold(f64::MAX, f64::min);
        if lo > 0.0 && hi / lo <= FLAT_RATIO {
            Verdict::Finite
        } else {
            Verdict::Boundary
        }
    };
    Trend {
        slope: Some(slope),
        verdict,
        vanishing: slope <= -tol && monotone,
    }
}

fn check_exponents(s: f64, alpha: f64) -> Result<()> {
    if !(s.is_finite() && s > 0.0) {
        return invalid(format!("Carleson exponent s must be positive, got {s}"));
    }
    if !(alpha.is_finite() && alpha >= 0.0) {
        return invalid(format!(
            "logarithmic order alpha must be nonnegative, got {alpha}"
        ));
    }
    Ok(())
}

fn argmax(values: &[f64]) -> (usize, f64) {
    values.iter().enumerate().fold(
        (0, f64::MIN),
        |(i, m), (j, v)| if *v > m { (j, *v) } else { (i, m) },
    )
}

fn build_report(
    functional: Functional,
    s: f64,
    alpha: f64,
    grid: &GridSpec,
    values: Vec<f64>,
) -> CarlesonReport {
    let start = grid.window_start();
    let x: Vec<f64> = (start..=grid.levels()).map(|j| j as f64).collect();
    let trend = classify_trend(&x, &values[start..], SLOPE_TOL);
    let (argmax, sup_value) = argmax(&values);
    CarlesonReport {
        functional,
        s,
        alpha,
        points: grid.points(),
        values,
        sup_value,
        argmax,
        slope: trend.slope,
        verdict: trend.verdict,
        vanishing: trend.vanishing,
    }
}

fn grid_values<F>(grid: &GridSpec, f: F) -> Result<Vec<f64>>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    (0..=grid.levels())
        .into_par_iter()
        .map(|j| {
            let gap = grid.gap(j);
            f(1.0 - gap, gap)
        })
        .collect()
}

/// `μ([a_j, 1)) / (1 - a_j)^s` along the grid.
pub fn carleson_sup(
    mu: &Measure,
    s: f64,
    grid: &GridSpec,
    q: &QuadratureSpec,
) -> Result<CarlesonReport> {
    check_exponents(s, 0.0)?;
    let values = grid_values(grid, |a, gap| Ok(mu.tail_mass(a, q)? / gap.powf(s)))?;
    Ok(build_report(Functional::Tail, s, 0.0, grid, values))
}

/// `μ([a_j, 1)) log(2/(1-a_j²))^α / (1-a_j²)^s` along the grid.
pub fn log_carleson_sup(
    mu: &Measure,
    alpha: f64,
    s: f64,
    grid: &GridSpec,
    q: &QuadratureSpec,
) -> Result<CarlesonReport> {
    check_exponents(s, alpha)?;
    let values = grid_values(grid, |a, gap| {
        let w = gap * (2.0 - gap);
        Ok(mu.tail_mass(a, q)? * log_two_over(w).powf(alpha) / w.powf(s))
    })?;
    Ok(build_report(Functional::LogTail, s, alpha, grid, values))
}

/// The functional `log(2/(1-a²))^α ∫ ((1-a²)/(1-at)²)^s dμ(t)` for real
/// `a = a_j`; for measures on `[0,1)` the supremum over the disc is attained
/// on the positive radius.
pub fn zhao_k(
    mu: &Measure,
    alpha: f64,
    s: f64,
    grid: &GridSpec,
    q: &QuadratureSpec,
) -> Result<CarlesonReport> {
    check_exponents(s, alpha)?;
    let values = grid_values(grid, |a, gap| {
        let w = gap * (2.0 - gap);
        let kernel = |p: RadialPoint| {
            let d = gap + a * p.omt;
            (w / (d * d)).powf(s)
        };
        let integral = mu.integrate(0.0, 0.0, kernel, 0.0, q)?.value;
        Ok(log_two_over(w).powf(alpha) * integral)
    })?;
    Ok(build_report(Functional::Zhao, s, alpha, grid, values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCarlesonReport {
    pub s: f64,
    pub sup_value: f64,
    pub argmax: usize,
    /// `(n, (1+n)^s μ_n)` at `n = 2^k`.
    pub samples: Vec<(usize, f64)>,
    /// Slope of `ln((1+n)^s μ_n)` against `ln(1+n)` over the upper half of
    /// the dyadic samples.
    pub slope: Option<f64>,
    pub verdict: Verdict,
    pub vanishing: bool,
}

/// `sup_n (1+n)^s μ_n` with a growth trend in `n`.
pub fn moment_carleson_sup(momseq: &MomentSequence, s: f64) -> Result<MomentCarlesonReport> {
    check_exponents(s, 0.0)?;
    if momseq.len() < 64 {
        return invalid(format!("need at least 64 moments, got {}", momseq.len()));
    }
    let terms: Vec<f64> = momseq
        .values()
        .iter()
        .enumerate()
        .map(|(n, m)| (n as f64 + 1.0).powf(s) * m)
        .collect();
    let (argmax, sup_value) = argmax(&terms);
    let top = (momseq.len() - 1).ilog2() as usize;
    let samples: Vec<(usize, f64)> = (0..=top).map(|k| (1usize << k, terms[1 << k])).collect();
    let window = &samples[top / 2..];
    let x: Vec<f64> = window.iter().map(|(n, _)| (*n as f64 + 1.0).ln()).collect();
    let y: Vec<f64> = window.iter().map(|(_, v)| *v).collect();
    // One dyadic level is ln 2 in ln(1+n), so the per-level tolerance
    // becomes 0.05 here.
    let trend = classify_trend(&x, &y, SLOPE_TOL / LN_2);
    Ok(MomentCarlesonReport {
        s,
        sup_value,
        argmax,
        samples,
        slope: trend.slope,
        verdict: trend.verdict,
        vanishing: trend.vanishing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalayageReport {
    pub exponent: f64,
    pub log_weighted: bool,
    /// `(∫_0^1 Φ(s)^e ds)^{1/e}`; absent when the integral diverges.
    pub norm: Option<f64>,
    pub divergent: bool,
    /// Slope of `ln(Φ(s)^e s)` per dyadic level as `s → 0`.
    pub tail_slope: Option<f64>,
    /// Depth `ln(1/s)` down to which `Φ` was integrated; `None` when exact.
    pub depth: Option<f64>,
}

/// `Φ(s) = ∫_0^{1-s} dμ(t)/(1-t)` in `L^e(0,1)`.
pub fn balayage_lp_norm(mu: &Measure, e: f64, q: &QuadratureSpec) -> Result<BalayageReport> {
    balayage(mu, e, false, q)
}

/// The same with `dμ(t)` replaced by `log(1/(1-t)) dμ(t)`.
pub fn log_balayage_lp_norm(mu: &Measure, e: f64, q: &QuadratureSpec) -> Result<BalayageReport> {
    balayage(mu, e, true, q)
}

const MAX_DEPTH: f64 = 700.0;
const TREND_SAMPLES: usize = 17;

fn balayage(
    mu: &Measure,
    e: f64,
    log_weighted: bool,
    q: &QuadratureSpec,
) -> Result<BalayageReport> {
    if !(e.is_finite() && e >= 1.0) {
        return invalid(format!("balayage exponent must be at least 1, got {e}"));
    }
    q.validate()?;
    let weight = |p: RadialPoint| {
        if log_weighted {
            p.log_inv_omt / p.omt
        } else {
            1.0 / p.omt
        }
    };

    if let MeasureKind::Atomic { points, weights } = mu.kind() {
        let mut atoms: Vec<(f64, f64)> = points
            .iter()
            .zip(weights)
            .map(|(t, w)| {
                let p = RadialPoint::from_t(*t);
                (p.omt, w * weight(p))
            })
            .collect();
        atoms.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut cumulative = 0.0;
        let mut total = 0.0;
        for (k, (omt, c)) in atoms.iter().enumerate() {
            cumulative += c;
            let next = atoms.get(k + 1).map_or(0.0, |a| a.0);
            total += cumulative.powf(e) * (omt - next);
        }
        return Ok(BalayageReport {
            exponent: e,
            log_weighted,
            norm: Some(total.powf(1.0 / e)),
            divergent: false,
            tail_slope: None,
            depth: None,
        });
    }

    let inner = q.with_tolerance((q.tolerance * 1e-2).max(1e-14));
    let phi = |x: f64| -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        Ok(mu.integrate(0.0, (-x).exp(), weight, 0.0, &inner)?.value)
    };
    // ln of the integrand Φ(e^{-x})^e e^{-x} in the variable x = ln(1/s).
    let log_h = |x: f64| -> Result<f64> {
        let v = phi(x)?;
        Ok(if v > 0.0 {
            e * v.ln() - x
        } else {
            f64::NEG_INFINITY
        })
    };

    let depth = (48.0 + if log_weighted { 24.0 } else { 12.0 } * e).min(MAX_DEPTH);
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..TREND_SAMPLES)
        .map(|i| depth * (0.5 + 0.5 * i as f64 / (TREND_SAMPLES - 1) as f64))
        .map(|x| log_h(x).map(|y| (x, y)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|(_, y)| y.is_finite())
        .unzip();
    let tail_slope = (xs.len() >= 2).then(|| fit::slope(&xs, &ys) * LN_2);
    if tail_slope.is_some_and(|s| s >= -SLOPE_TOL) {
        return Ok(BalayageReport {
            exponent: e,
            log_weighted,
            norm: None,
            divergent: true,
            tail_slope,
            depth: Some(depth),
        });
    }
    // Decay rate of the integrand in x; a vanishing Φ near s = 0 decays
    // at least like e^{-x}.
    let decay = tail_slope.map_or(1.0, |s| -s / LN_2);

    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let h = |x: f64| match log_h(x) {
        Ok(v) => v.exp(),
        Err(err) => {
            failure.borrow_mut().get_or_insert(err);
            0.0
        }
    };
    let segment = |lo: f64, hi: f64| -> Result<f64> {
        let pieces = (((hi - lo) / 2.0).ceil() as usize).clamp(4, 64);
        let r = integrate(h, lo, hi, pieces, 0.0, q)?;
        match failure.borrow_mut().take() {
            Some(err) => Err(err),
            None => Ok(r.value),
        }
    };

    let mut reach = depth;
    let mut total = segment(0.0, reach)?;
    let mut tail = log_h(reach)?.exp() / decay;
    while tail > q.tolerance * total && reach < MAX_DEPTH {
        let next = (reach + (tail / (q.tolerance * total)).ln() / decay + 2.0).min(MAX_DEPTH);
        total += segment(reach, next)?;
        reach = next;
        tail = log_h(reach)?.exp() / decay;
    }
    total += tail;
    Ok(BalayageReport {
        exponent: e,
        log_weighted,
        norm: Some(total.powf(1.0 / e)),
        divergent: false,
        tail_slope,
        depth: Some(reach),
    })
}

/// `∫ f_b(t)^power dμ(t)` with `f_b(t) = ((1-b²)/(1-bt)²)^{1/p}`.
pub fn fb_integral(mu: &Measure, b: f64, p: f64, power: f64, q: &QuadratureSpec) -> Result<f64> {
    if !(0.0..1.0).contains(&b) {
        return invalid(format!("b must lie in [0, 1), got {b}"));
    }
    if !(p.is_finite() && p > 0.0 && power.is_finite() && power > 0.0) {
        return invalid("exponents p and power must be positive");
    }
    let gap = 1.0 - b;
    let w = gap * (2.0 - gap);
    let exponent = power / p;
    let f = |pt: RadialPoint| {
        let d = gap + b * pt.omt;
        (w / (d * d)).powf(exponent)
    };
    Ok(mu.integrate(0.0, 0.0, f, 0.0, q)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicted {
    /// Bounded and compact.
    Compact,
    /// Bounded but not compact.
    Boundary,
    /// Bounded; compactness is not characterized for these exponents.
    Bounded,
    Unbounded,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub verdict: Predicted,
    pub criterion: String,
}

/// Tail asymptotics `μ([a,1)) ≍ (1-a)^σ log(e/(1-a))^{-β}`.
#[derive(Debug, Clone, Copy)]
enum Profile {
    /// No mass near `t = 1`.
    Detached,
    Power {
        sigma: f64,
        beta: f64,
    },
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

impl Profile {
    /// (ℓ-logarithmic c-Carleson, vanishing).
    fn carleson(&self, c: f64, ell: f64) -> (bool, bool) {
        match *self {
            Profile::Detached => (true, true),
            Profile::Power { sigma, beta } => {
                if same(sigma, c) {
                    (
                        beta >= ell || same(beta, ell),
                        beta > ell && !same(beta, ell),
                    )
                } else {
                    (sigma > c, sigma > c)
                }
            }
        }
    }

    /// Whether the (optionally log-weighted) balayage lies in `L^e`.
    fn balayage_in(&self, e: f64, log_weighted: bool) -> bool {
        match *self {
            Profile::Detached => true,
            Profile::Power { sigma, beta } => {
                if sigma > 1.0 || same(sigma, 1.0) {
                    return true;
                }
                let k = (1.0 - sigma) * e;
                let beta = if log_weighted { beta - 1.0 } else { beta };
                if same(k, 1.0) {
                    e * beta > 1.0 && !same(e * beta, 1.0)
                } else {
                    k < 1.0
                }
            }
        }
    }
}

fn carleson_verdict(bounded: bool, vanishing: bool) -> Predicted {
    match (bounded, vanishing) {
        (false, _) => Predicted::Unbounded,
        (true, true) => Predicted::Compact,
        (true, false) => Predicted::Boundary,
    }
}

fn prediction(verdict: Predicted, criterion: impl Into<String>) -> Result<Prediction> {
    Ok(Prediction {
        verdict,
        criterion: criterion.into(),
    })
}

/// Boundedness and compactness of `H_μ: H^p → H^q` from the analytic tail
/// profile of a parametric family.
pub fn predict(p: f64, q_exp: f64, family: &Measure) -> Result<Prediction> {
    if !(p.is_finite() && p > 0.0 && q_exp.is_finite() && q_exp > 0.0) {
        return invalid(format!("exponents must be positive, got p={p}, q={q_exp}"));
    }
    let profile = match family.kind() {
        MeasureKind::Atomic { .. } => Profile::Detached,
        MeasureKind::PowerWeight { gamma, .. } => Profile::Power {
            sigma: gamma + 1.0,
            beta: 0.0,
        },
        MeasureKind::LogPowerWeight { s, alpha, .. } => Profile::Power {
            sigma: *s,
            beta: *alpha,
        },
        MeasureKind::Tabulated { .. } => {
            return prediction(
                Predicted::Undecided,
                "tabulated densities have no analytic tail profile",
            )
        }
    };

    if p <= 1.0 {
        if !profile.carleson(1.0 / p, 0.0).0 {
            return prediction(
                Predicted::Unbounded,
                "0<p<=1: H_mu is defined on H^p iff mu is 1/p-Carleson; it is not",
            );
        }
        if q_exp < 1.0 {
            return prediction(
                Predicted::Undecided,
                "q<1: only boundedness into the containing Banach space B_q is known",
            );
        }
        if q_exp == 1.0 {
            let (b, v) = profile.carleson(1.0 / p, 1.0);
            return prediction(
                carleson_verdict(b, v),
                "0<p<=1, q=1: bounded iff 1-logarithmic 1/p-Carleson, compact iff vanishing",
            );
        }
        let s = 1.0 / p + 1.0 / conj_exponent(q_exp)?;
        let (b, v) = profile.carleson(s, 0.0);
        return prediction(
            carleson_verdict(b, v),
            format!("0<p<=1<q: bounded iff (1/p+1/q')-Carleson with 1/p+1/q'={s}, compact iff vanishing"),
        );
    }

    let p_conj = conj_exponent(p)?;
    if !profile.balayage_in(p_conj, false) {
        return prediction(
            Predicted::Unbounded,
            "p>1: H_mu is defined on H^p iff the radial balayage lies in L^{p'}; it does not",
        );
    }
    if q_exp >= p {
        let s = 1.0 / p + 1.0 / conj_exponent(q_exp)?;
        let (b, v) = profile.carleson(s, 0.0);
        if q_exp == p {
            let verdict = if b {
                Predicted::Bounded
            } else {
                Predicted::Unbounded
            };
            return prediction(
                verdict,
                format!("1<p=q: bounded iff (1/p+1/q')-Carleson with 1/p+1/q'={s}"),
            );
        }
        return prediction(
            carleson_verdict(b, v),
            format!(
                "1<p<q: bounded iff (1/p+1/q')-Carleson with 1/p+1/q'={s}, compact iff vanishing"
            ),
        );
    }
    if q_exp > 1.0 {
        let qc = conj_exponent(q_exp)?;
        let e = conj_exponent(p * qc / (p + qc))?;
        let verdict = if profile.balayage_in(e, false) {
            Predicted::Compact
        } else {
            Predicted::Unbounded
        };
        return prediction(
            verdict,
            format!("1<q<p: bounded iff the radial balayage lies in L^{e}; compact iff bounded"),
        );
    }
    if q_exp == 1.0 {
        let verdict = if profile.balayage_in(p_conj, true) {
            Predicted::Compact
        } else {
            Predicted::Unbounded
        };
        return prediction(
            verdict,
            "1<p, q=1: bounded iff the log-weighted radial balayage lies in L^{p'}; compact iff bounded",
        );
    }
    prediction(
        Predicted::Undecided,
        "q<1: only boundedness into the containing Banach space B_q is known",
    )
}
