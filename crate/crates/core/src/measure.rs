//! Positive finite measures on `[0, 1)`, their tail masses and moments.
//!
//! Closed forms are used for atomic and power-weight measures. Everything
//! else goes through [`quad`](crate::quad) in the variable `u = -ln(1 - t)`,
//! which maps the endpoint `t = 1` to `u = ∞` and turns power weights into
//! exponentials.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::{integrate, integrate_breaks, Integral, QuadValue, QuadratureSpec};

/// Extra decay (in e-folds beyond `ln(1/tol)`) kept when truncating `u`.
const TAIL_EFOLDS: f64 = 36.0;

/// A point of `[0, 1)` carried together with `1 - t` and `ln(1/(1-t))`, both
/// of which are computed without cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPoint {
    pub t: f64,
    pub omt: f64,
    pub log_inv_omt: f64,
}

impl RadialPoint {
    pub fn from_t(t: f64) -> Self {
        Self {
            t,
            omt: 1.0 - t,
            log_inv_omt: -(-t).ln_1p(),
        }
    }

    pub fn from_u(u: f64) -> Self {
        Self {
            t: -(-u).exp_m1(),
            omt: (-u).exp(),
            log_inv_omt: u,
        }
    }

    /// `t^n`; large orders go through `ln(1 - omt)` to stay accurate near 1.
    pub fn pow(&self, n: usize) -> f64 {
        if n <= 64 {
            self.t.powi(n as i32)
        } else if self.t == 0.0 {
            0.0
        } else {
            (n as f64 * (-self.omt).ln_1p()).exp()
        }
    }
}

/// The concrete shape of a [`Measure`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MeasureKind {
    /// `Σ w_i δ_{t_i}`.
    Atomic { points: Vec<f64>, weights: Vec<f64> },
    /// `scale · (1-t)^gamma dt`.
    #[serde(rename = "power")]
    PowerWeight {
        gamma: f64,
        #[serde(default = "unit")]
        scale: f64,
    },
    /// `scale · (1-t)^(s-1) · log(e/(1-t))^(-alpha) dt`.
    #[serde(rename = "logpower")]
    LogPowerWeight {
        s: f64,
        alpha: f64,
        #[serde(default = "unit")]
        scale: f64,
    },
    /// Piecewise-linear density on `grid`, zero outside `[grid[0], grid[last]]`.
    Tabulated { grid: Vec<f64>, density: Vec<f64> },
}

fn unit() -> f64 {
    1.0
}

/// A validated positive Borel measure on `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureKind", into = "MeasureKind")]
pub struct Measure(MeasureKind);

impl TryFrom<MeasureKind> for Measure {
    type Error = Error;

    fn try_from(kind: MeasureKind) -> Result<Self> {
        validate(&kind)?;
        Ok(Measure(kind))
    }
}

impl From<Measure> for MeasureKind {
    fn from(m: Measure) -> Self {
        m.0
    }
}

fn positive_finite(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

fn validate(kind: &MeasureKind) -> Result<()> {
    match kind {
        MeasureKind::Atomic { points, weights } => {
            if points.is_empty() || points.len() != weights.len() {
                return invalid(format!(
                    "atomic measure needs matching non-empty points/weights (got {} and {})",
                    points.len(),
                    weights.len()
                ));
            }
            if let Some(t) = points.iter().find(|t| !(**t >= 0.0 && **t < 1.0)) {
                return invalid(format!("atom at {t} lies outside [0, 1)"));
            }
            if let Some(w) = weights.iter().find(|w| !positive_finite(**w)) {
                return invalid(format!("atom weight {w} must be positive and finite"));
            }
        }
        MeasureKind::PowerWeight { gamma, scale } => {
            if !(gamma.is_finite() && *gamma > -1.0) {
                return invalid(format!("power weight needs gamma > -1, got {gamma}"));
            }
            if !positive_finite(*scale) {
                return invalid(format!("scale must be positive, got {scale}"));
            }
        }
        MeasureKind::LogPowerWeight { s, alpha, scale } => {
            if !positive_finite(*s) {
                return invalid(format!("log-power weight needs s > 0, got {s}"));
            }
            if !(alpha.is_finite() && *alpha >= 0.0) {
                return invalid(format!("log-power weight needs alpha >= 0, got {alpha}"));
            }
            if !positive_finite(*scale) {
                return invalid(format!("scale must be positive, got {scale}"));
            }
        }
        MeasureKind::Tabulated { grid, density } => {
            if grid.len() < 2 || grid.len() != density.len() {
                return invalid(format!(
                    "tabulated density needs at least two grid points and matching values (got {} and {})",
                    grid.len(),
                    density.len()
                ));
            }
            if !(0.0..1.0).contains(&grid[0]) || !(0.0..1.0).contains(&grid[grid.len() - 1]) {
                return invalid("tabulated grid must lie in [0, 1) with last point < 1");
            }
            if grid
                .windows(2)
                .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
            {
                return invalid("tabulated grid must be strictly increasing");
            }
            if density.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
                return invalid("tabulated density values must be finite and >= 0");
            }
            let mass: f64 = grid
                .windows(2)
                .zip(density.windows(2))
                .map(|(g, d)| 0.5 * (g[1] - g[0]) * (d[0] + d[1]))
                .sum();
            if mass.is_nan() || mass <= 0.0 {
                return invalid("tabulated density has zero total mass");
            }
        }
    }
    Ok(())
}

/// How a moment was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMethod {
    ClosedForm,
    Quadrature,
}

impl Measure {
    pub fn new(kind: MeasureKind) -> Result<Self> {
        Self::try_from(kind)
    }

    pub fn atomic(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Self::new(MeasureKind::Atomic { points, weights })
    }

    pub fn point_mass(t: f64, weight: f64) -> Result<Self> {
        Self::atomic(vec![t], vec![weight])
    }

    pub fn power(gamma: f64, scale: f64) -> Result<Self> {
        Self::new(MeasureKind::PowerWeight { gamma, scale })
    }

    /// Lebesgue measure on `[0, 1)`; its Hankel matrix is the Hilbert matrix.
    pub fn lebesgue() -> Self {
        Measure(MeasureKind::PowerWeight {
            gamma: 0.0,
            scale: 1.0,
        })
    }

    pub fn log_power(s: f64, alpha: f64, scale: f64) -> Result<Self> {
        Self::new(MeasureKind::LogPowerWeight { s, alpha, scale })
    }

    pub fn tabulated(grid: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        Self::new(MeasureKind::Tabulated { grid, density })
    }

    /// Parses the JSON measure document (`{"type": "atomic" | "power" | "logpower" | "tabulated", ...}`).
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("measure JSON: {e}")))
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.0
    }

    /// The same measure multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !positive_finite(c) {
            return invalid(format!("scale factor must be positive, got {c}"));
        }
        let kind = match &self.0 {
            MeasureKind::Atomic { points, weights } => MeasureKind::Atomic {
                points: points.clone(),
                weights: weights.iter().map(|w| w * c).collect(),
            },
            MeasureKind::PowerWeight { gamma, scale } => MeasureKind::PowerWeight {
                gamma: *gamma,
                scale: scale * c,
            },
            MeasureKind::LogPowerWeight { s, alpha, scale } => MeasureKind::LogPowerWeight {
                s: *s,
                alpha: *alpha,
                scale: scale * c,
            },
            MeasureKind::Tabulated { grid, density } => MeasureKind::Tabulated {
                grid: grid.clone(),
                density: density.iter().map(|d| d * c).collect(),
            },
        };
        Self::new(kind)
    }

    pub fn has_closed_form_moments(&self) -> bool {
        matches!(
            self.0,
            MeasureKind::Atomic { .. } | MeasureKind::PowerWeight { .. }
        )
    }

    /// Largest atom location, or `None` for absolutely continuous measures.
    pub fn max_atom(&self) -> Option<f64> {
        match &self.0 {
            MeasureKind::Atomic { points, .. } => points.iter().copied().reduce(f64::max),
            _ => None,
        }
    }

    /// Exponential decay rate of the density in `u = -ln(1-t)`.
    fn decay_rate(&self) -> f64 {
        match &self.0 {
            MeasureKind::PowerWeight { gamma, .. } => gamma + 1.0,
            MeasureKind::LogPowerWeight { s, .. } => *s,
            _ => f64::INFINITY,
        }
    }

    /// Density with respect to `du`, i.e. `density(t) · (1-t)`.
    fn u_density(&self, u: f64) -> f64 {
        match &self.0 {
            MeasureKind::PowerWeight { gamma, scale } => scale * (-(gamma + 1.0) * u).exp(),
            MeasureKind::LogPowerWeight { s, alpha, scale } => {
                scale * (-s * u).exp() * (1.0 + u).powf(-alpha)
            }
            _ => unreachable!("u-density only exists for weighted families"),
        }
    }

    fn t_density(&self, t: f64) -> f64 {
        match &self.0 {
            MeasureKind::PowerWeight { gamma, scale } => scale * (1.0 - t).powf(*gamma),
            MeasureKind::LogPowerWeight { s, alpha, scale } => {
                let omt = 1.0 - t;
                scale * omt.powf(s - 1.0) * log_e_over(omt).powf(-alpha)
            }
            MeasureKind::Tabulated { grid, density } => {
                if t < grid[0] || t > grid[grid.len() - 1] {
                    return 0.0;
                }
                let i = grid.partition_point(|g| *g <= t).clamp(1, grid.len() - 1);
                let (g0, g1) = (grid[i - 1], grid[i]);
                let w = (t - g0) / (g1 - g0);
                density[i - 1] * (1.0 - w) + density[i] * w
            }
            MeasureKind::Atomic { .. } => unreachable!("atomic measures have no density"),
        }
    }

    /// `∫_{[a, 1-gap)} g dμ`.
    ///
    /// `gap = 0` integrates up to the endpoint, truncating `u` once the density
    /// has decayed below the tolerance; `g` must then stay bounded. With
    /// `gap > 0` the full range is integrated. `abs_floor` is forwarded to the
    /// integrator as an absolute error target.
    pub fn integrate<T, G>(
        &self,
        a: f64,
        gap: f64,
        g: G,
        abs_floor: f64,
        q: &QuadratureSpec,
    ) -> Result<Integral<T>>
    where
        T: QuadValue,
        G: Fn(RadialPoint) -> T,
    {
        if !(0.0..1.0).contains(&a) {
            return invalid(format!("lower limit {a} outside [0, 1)"));
        }
        if !(0.0..=1.0).contains(&gap) {
            return invalid(format!("endpoint gap {gap} outside [0, 1]"));
        }
        q.validate()?;
        let upper = 1.0 - gap;
        match &self.0 {
            MeasureKind::Atomic { points, weights } => {
                let mut value = T::zero();
                for (t, w) in points.iter().zip(weights) {
                    if *t >= a && 1.0 - t > gap {
                        value = value + g(RadialPoint::from_t(*t)) * *w;
                    }
                }
                Ok(Integral {
                    value,
                    error: 0.0,
                    evaluations: points.len(),
                })
            }
            MeasureKind::Tabulated { grid, .. } => {
                let hi = upper.min(grid[grid.len() - 1]);
                let lo = a.max(grid[0]);
                if hi <= lo {
                    return Ok(Integral {
                        value: T::zero(),
                        error: 0.0,
                        evaluations: 0,
                    });
                }
                let mut breaks = vec![lo];
                breaks.extend(grid.iter().copied().filter(|x| *x > lo && *x < hi));
                breaks.push(hi);
                integrate_breaks(
                    |t| g(RadialPoint::from_t(t)) * self.t_density(t),
                    &breaks,
                    abs_floor,
                    q,
                )
            }
            _ if q.endpoint_substitution => {
                let u_lo = -(-a).ln_1p();
                let cutoff = u_lo + ((1.0 / q.tolerance).ln() + TAIL_EFOLDS) / self.decay_rate();
                let u_hi = if gap > 0.0 { -gap.ln() } else { cutoff };
                let pieces = (((u_hi - u_lo) / 1.5).ceil() as usize).clamp(4, 64);
                integrate(
                    |u| g(RadialPoint::from_u(u)) * self.u_density(u),
                    u_lo,
                    u_hi,
                    pieces,
                    abs_floor,
                    q,
                )
            }
            _ => integrate(
                |t| g(RadialPoint::from_t(t)) * self.t_density(t),
                a,
                upper,
                16,
                abs_floor,
                q,
            ),
        }
    }

    /// `μ([0, 1))`.
    pub fn total_mass(&self, q: &QuadratureSpec) -> Result<f64> {
        self.moment(0, q)
    }

    /// The moment `μ_n = ∫ t^n dμ(t)`.
    pub fn moment(&self, n: usize, q: &QuadratureSpec) -> Result<f64> {
        self.moment_with_error(n, q).map(|(v, _, _)| v)
    }

    /// `μ_n` by quadrature even when a closed form exists.
    pub fn moment_by_quadrature(&self, n: usize, q: &QuadratureSpec) -> Result<f64> {
        Ok(self.integrate(0.0, 0.0, |p| p.pow(n), 0.0, q)?.value)
    }

    fn moment_with_error(&self, n: usize, q: &QuadratureSpec) -> Result<(f64, f64, MomentMethod)> {
        match &self.0 {
            MeasureKind::Atomic { points, weights } => {
                let v = points
                    .iter()
                    .zip(weights)
                    .map(|(t, w)| w * RadialPoint::from_t(*t).pow(n))
                    .sum();
                Ok((v, 0.0, MomentMethod::ClosedForm))
            }
            MeasureKind::PowerWeight { gamma, scale } => {
                let values = beta_moments(*gamma, *scale, n);
                let v = values[n];
                Ok((v, rounding_bound(v, n), MomentMethod::ClosedForm))
            }
            _ => {
                let r = self.integrate(0.0, 0.0, |p| p.pow(n), 0.0, q)?;
                Ok((r.value, r.error, MomentMethod::Quadrature))
            }
        }
    }

    /// `μ_0, ..., μ_M`.
    pub fn moments_up_to(&self, max_order: usize, q: &QuadratureSpec) -> Result<MomentSequence> {
        let (values, methods, error_bound) = match &self.0 {
            MeasureKind::PowerWeight { gamma, scale } => {
                let values = beta_moments(*gamma, *scale, max_order);
                let err = values
                    .iter()
                    .enumerate()
                    .map(|(n, v)| rounding_bound(*v, n))
                    .fold(0.0, f64::max);
                (values, vec![MomentMethod::ClosedForm; max_order + 1], err)
            }
            _ => {
                let results: Vec<(f64, f64, MomentMethod)> = (0..=max_order)
                    .into_par_iter()
                    .map(|n| self.moment_with_error(n, q))
                    .collect::<Result<_>>()?;
                let err = results.iter().map(|r| r.1).fold(0.0, f64::max);
                (
                    results.iter().map(|r| r.0).collect(),
                    results.iter().map(|r| r.2).collect(),
                    err,
                )
            }
        };
        Ok(MomentSequence {
            source: Some(self.clone()),
            values,
            methods,
            error_bound,
        })
    }

    /// `μ([a, 1))`.
    pub fn tail_mass(&self, a: f64, q: &QuadratureSpec) -> Result<f64> {
        if !(0.0..1.0).contains(&a) {
            return invalid(format!("tail point {a} outside [0, 1)"));
        }
        match &self.0 {
            MeasureKind::Atomic { points, weights } => Ok(points
                .iter()
                .zip(weights)
                .filter(|(t, _)| **t >= a)
                .map(|(_, w)| w)
                .sum()),
            MeasureKind::PowerWeight { gamma, scale } => {
                Ok(scale * (1.0 - a).powf(gamma + 1.0) / (gamma + 1.0))
            }
            MeasureKind::Tabulated { grid, density } => {
                // Trapezoid pieces are exact for a piecewise-linear density.
                let mut mass = 0.0;
                for i in 1..grid.len() {
                    let (g0, g1) = (grid[i - 1].max(a), grid[i]);
                    if g1 <= g0 {
                        continue;
                    }
                    mass += 0.5 * (g1 - g0) * (self.t_density(g0) + density[i]);
                }
                Ok(mass)
            }
            MeasureKind::LogPowerWeight { .. } => {
                Ok(self.integrate(a, 0.0, |_| 1.0, 0.0, q)?.value)
            }
        }
    }
}

/// Power-weight moments `scale · B(n+1, gamma+1)`, n = 0..=max_order, by the
/// ratio recurrence `μ_{n+1} = μ_n (n+1)/(n+gamma+2)`.
fn beta_moments(gamma: f64, scale: f64, max_order: usize) -> Vec<f64> {
    if gamma == 0.0 {
        return (0..=max_order).map(|n| scale / (n as f64 + 1.0)).collect();
    }
    let mut values = Vec::with_capacity(max_order + 1);
    let mut m = scale / (gamma + 1.0);
    values.push(m);
    for n in 0..max_order {
        let nf = n as f64;
        m *= (nf + 1.0) / (nf + gamma + 2.0);
        values.push(m);
    }
    values
}

fn rounding_bound(value: f64, n: usize) -> f64 {
    2.0 * f64::EPSILON * (n as f64 + 1.0) * value
}

/// Cached moments `μ_0..μ_M` of a measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSequence {
    pub source: Option<Measure>,
    pub values: Vec<f64>,
    pub methods: Vec<MomentMethod>,
    pub error_bound: f64,
}

impl MomentSequence {
    /// Wraps raw values (e.g. for experiments that perturb a sequence).
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("moment sequence must be non-empty");
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return invalid("moments must be finite and nonnegative");
        }
        let methods = vec![MomentMethod::ClosedForm; values.len()];
        Ok(Self {
            source: None,
            values,
            methods,
            error_bound: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Smallest `(-1)^k Δ^k μ_n / μ_0` over `k <= max_k`, `n + k <= M`.
    ///
    /// Hausdorff moment sequences are completely monotone, so this is `>= 0`
    /// in exact arithmetic.
    pub fn complete_monotonicity_defect(&self, max_k: usize) -> f64 {
        let mu0 = self.values[0];
        let mut diff = self.values.clone();
        let mut worst = f64::INFINITY;
        for _ in 0..=max_k {
            if diff.is_empty() {
                break;
            }
            worst = diff.iter().copied().fold(worst, f64::min);
            diff = diff.windows(2).map(|w| w[0] - w[1]).collect();
        }
        worst / mu0
    }

    /// Largest increase `μ_{n+1} - μ_n`; nonpositive for a valid sequence.
    pub fn max_increase(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Conjugate exponent `α' = α / (α - 1)` for `α > 1`.
pub fn conj_exponent(alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return invalid(format!("conjugate exponent needs alpha > 1, got {alpha}"));
    }
    Ok(alpha / (alpha - 1.0))
}

/// `log(e / x)`, the base used inside log-power densities.
pub fn log_e_over(x: f64) -> f64 {
    1.0 - x.ln()
}

/// `log(2 / x)`, the base used by the logarithmic Carleson functionals.
pub fn log_two_over(x: f64) -> f64 {
    std::f64::consts::LN_2 - x.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn lebesgue_moments_are_reciprocals() {
        let m = Measure::lebesgue();
        assert_eq!(m.moment(3, &q()).unwrap(), 0.25);
        let seq = m.moments_up_to(3, &q()).unwrap();
        assert_eq!(seq.values, vec![1.0, 0.5, 1.0 / 3.0, 0.25]);
    }

    #[test]
    fn point_mass_at_origin() {
        let m = Measure::point_mass(0.0, 1.0).unwrap();
        assert_eq!(m.moment(0, &q()).unwrap(), 1.0);
        for n in 1..10 {
            assert_eq!(m.moment(n, &q()).unwrap(), 0.0);
        }
    }

    #[test]
    fn geometric_atomic_moments() {
        let m = Measure::point_mass(0.5, 1.0).unwrap();
        let seq = m.moments_up_to(3, &q()).unwrap();
        assert_eq!(seq.values, vec![1.0, 0.5, 0.25, 0.125]);
    }

    #[test]
    fn power_weight_beta_values() {
        // B(n+1, 2) = 1/((n+1)(n+2)).
        let m = Measure::power(1.0, 1.0).unwrap();
        let seq = m.moments_up_to(2, &q()).unwrap();
        for (n, v) in seq.values.iter().enumerate() {
            let exact = 1.0 / ((n as f64 + 1.0) * (n as f64 + 2.0));
            assert_relative_eq!(*v, exact, max_relative = 1e-15);
        }
        assert_relative_eq!(m.moment(2, &q()).unwrap(), 1.0 / 12.0, max_relative = 1e-15);
    }

    #[test]
    fn tail_masses() {
        assert_relative_eq!(Measure::lebesgue().tail_mass(0.75, &q()).unwrap(), 0.25);
        let p1 = Measure::power(1.0, 1.0).unwrap();
        assert_relative_eq!(p1.tail_mass(0.5, &q()).unwrap(), 0.125);
        let at = Measure::atomic(vec![0.3, 0.9], vec![2.0, 1.0]).unwrap();
        assert_eq!(at.tail_mass(0.5, &q()).unwrap(), 1.0);
        assert_eq!(
            at.tail_mass(0.0, &q()).unwrap(),
            at.moment(0, &q()).unwrap()
        );
        assert!(at.tail_mass(1.0, &q()).is_err());
        assert!(at.tail_mass(-0.1, &q()).is_err());
    }

    #[test]
    fn tabulated_is_piecewise_linear() {
        // Density 2t on [0, 0.5]: mass 0.25, first moment ∫ 2t² = 1/12.
        let m = Measure::tabulated(vec![0.0, 0.5], vec![0.0, 1.0]).unwrap();
        assert_relative_eq!(m.moment(0, &q()).unwrap(), 0.25, max_relative = 1e-12);
        assert_relative_eq!(m.moment(1, &q()).unwrap(), 1.0 / 12.0, max_relative = 1e-12);
        assert_relative_eq!(
            m.tail_mass(0.25, &q()).unwrap(),
            0.25 - 0.0625,
            max_relative = 1e-14
        );
        assert_eq!(m.tail_mass(0.75, &q()).unwrap(), 0.0);
    }

    #[test]
    fn substitution_can_be_disabled() {
        let m = Measure::power(1.0, 1.0).unwrap();
        let plain = QuadratureSpec::new(4096, false, 1e-12).unwrap();
        let r = m.integrate(0.0, 0.0, |p| p.pow(2), 0.0, &plain).unwrap();
        assert_relative_eq!(r.value, 1.0 / 12.0, max_relative = 1e-11);
    }

    #[test]
    fn validation_errors() {
        assert!(Measure::power(-1.0, 1.0).is_err());
        assert!(Measure::power(0.0, 0.0).is_err());
        assert!(Measure::atomic(vec![1.0], vec![1.0]).is_err());
        assert!(Measure::atomic(vec![0.5], vec![0.0]).is_err());
        assert!(Measure::atomic(vec![0.5, 0.6], vec![1.0]).is_err());
        assert!(Measure::log_power(0.0, 1.0, 1.0).is_err());
        assert!(Measure::log_power(1.0, -1.0, 1.0).is_err());
        assert!(Measure::tabulated(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(Measure::tabulated(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(Measure::tabulated(vec![0.0, 0.5], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn json_round_trip_and_field_names() {
        let m = Measure::from_json(r#"{"type":"power","gamma":1.0,"scale":2.0}"#).unwrap();
        assert_eq!(m, Measure::power(1.0, 2.0).unwrap());
        let m = Measure::from_json(r#"{"type":"logpower","s":1,"alpha":2}"#).unwrap();
        assert_eq!(m, Measure::log_power(1.0, 2.0, 1.0).unwrap());
        let m = Measure::from_json(r#"{"type":"atomic","points":[0.5],"weights":[1]}"#).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(Measure::from_json(&text).unwrap(), m);
        let m = Measure::from_json(r#"{"type":"tabulated","grid":[0,0.5],"density":[1,1]}"#);
        assert!(m.is_ok());

        let err = Measure::from_json(r#"{"type":"power","gamma":-2}"#).unwrap_err();
        assert!(err.to_string().contains("gamma"), "{err}");
        assert!(Measure::from_json("{not json").is_err());
        assert!(Measure::from_json(r#"{"type":"cantor"}"#).is_err());
    }

    #[test]
    fn conjugate_exponents() {
        assert_eq!(conj_exponent(2.0).unwrap(), 2.0);
        assert_relative_eq!(conj_exponent(4.0).unwrap(), 4.0 / 3.0);
        assert_relative_eq!(
            conj_exponent(conj_exponent(3.0).unwrap()).unwrap(),
            3.0,
            max_relative = 1e-15
        );
        assert!(conj_exponent(1.0).is_err());
        assert!(conj_exponent(0.5).is_err());
    }

    #[test]
    fn log_helpers() {
        assert_relative_eq!(log_e_over(1.0), 1.0);
        assert_relative_eq!(log_two_over(1.0), std::f64::consts::LN_2);
        assert_relative_eq!(log_two_over(0.5), 2.0f64.ln() * 2.0);
    }

    #[test]
    fn scaling_multiplies_moments() {
        let m = Measure::log_power(1.0, 1.0, 1.0).unwrap();
        let c = m.scaled(3.0).unwrap();
        let (a, b) = (m.moment(5, &q()).unwrap(), c.moment(5, &q()).unwrap());
        assert_relative_eq!(b, 3.0 * a, max_relative = 1e-12);
    }
}
