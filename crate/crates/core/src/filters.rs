//! Moment-vanishing filters and their Laplace transforms.
//!
//! A filter is a combination of shifted exponentials
//! `f(t) = Σ_j w_j [t ≥ a_j] e^{−t/a_j}` with every scale `a_j ≥ 1`. The
//! weights are chosen so the moments `∫ t^{−s_i} f(t) dt` vanish for every
//! pole above the target and equal one at the target. Summing the Laplace
//! transform `F(λε)` over a spectrum then isolates a single heat coefficient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::quadrature::integrate_with;
use crate::special_functions::upper_gamma;

/// Minimum spacing between consecutive poles.
pub const MIN_POLE_GAP: f64 = 1e-6;
/// Largest accepted condition estimate of the moment matrix.
pub const MAX_CONDITION: f64 = 1e12;
/// Moment conditions are re-checked to this tolerance when weights are
/// supplied from outside (e.g. a filter file).
pub const MOMENT_TOLERANCE: f64 = 1e-8;

/// Strictly decreasing pole locations `s_0 > s_1 > …` with a target index.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    poles: Vec<f64>,
    k: usize,
}

impl PoleSet {
    pub fn new(poles: Vec<f64>, k: usize) -> Result<Self> {
        if poles.is_empty() {
            return Err(Error::InvalidPoles("at least one pole is required".into()));
        }
        if let Some(bad) = poles.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidPoles(format!("pole {bad} is not finite")));
        }
        for pair in poles.windows(2) {
            if pair[0] - pair[1] < MIN_POLE_GAP {
                return Err(Error::InvalidPoles(format!(
                    "poles must decrease by at least {MIN_POLE_GAP}: {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        if k >= poles.len() {
            return Err(Error::InvalidPoles(format!(
                "target index {k} out of range for {} poles",
                poles.len()
            )));
        }
        Ok(Self { poles, k })
    }

    /// Pole set whose target is the last listed pole.
    pub fn targeting_last(poles: Vec<f64>) -> Result<Self> {
        let k = poles.len().saturating_sub(1);
        Self::new(poles, k)
    }

    pub fn poles(&self) -> &[f64] {
        &self.poles
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The poles a filter must know about: `s_0 … s_k`.
    pub fn prefix(&self) -> &[f64] {
        &self.poles[..=self.k]
    }

    /// `s_0`
    pub fn leading(&self) -> f64 {
        self.poles[0]
    }

    /// `s_k`
    pub fn target(&self) -> f64 {
        self.poles[self.k]
    }

    /// `s_0 − s_k`, the lower bound on the schedule parameter.
    pub fn gap(&self) -> f64 {
        self.leading() - self.target()
    }

    /// Same poles, different target.
    pub fn with_target(&self, k: usize) -> Result<Self> {
        Self::new(self.poles.clone(), k)
    }
}

/// `∫_0^∞ t^{−s} [t ≥ a] e^{−t/a} dt = a^{1−s} Γ(1−s, 1)`.
pub fn basis_moment(a: f64, s: f64) -> Result<f64> {
    if !(a >= 1.0) || !a.is_finite() {
        return Err(Error::InvalidScales(format!("scale {a} must be finite and >= 1")));
    }
    Ok(a.powf(1.0 - s) * upper_gamma(1.0 - s, 1.0)?)
}

/// Laplace transform of one basis function, `a e^{−1−ax} / (1 + ax)`.
#[inline]
pub fn basis_laplace(a: f64, x: f64) -> f64 {
    let ax = a * x;
    a * (-1.0 - ax).exp() / (1.0 + ax)
}

/// A normalized moment-vanishing filter. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    poles: PoleSet,
    scales: Vec<f64>,
    weights: Vec<f64>,
    normalization: f64,
}

/// Wire form of a filter: `{"poles", "k", "scales", "weights"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterRecord {
    #[serde(serialize_with = "crate::format::serialize_f64_slice")]
    pub poles: Vec<f64>,
    pub k: usize,
    #[serde(serialize_with = "crate::format::serialize_f64_slice")]
    pub scales: Vec<f64>,
    #[serde(serialize_with = "crate::format::serialize_f64_slice")]
    pub weights: Vec<f64>,
}

fn default_scales(count: usize) -> Vec<f64> {
    (0..count).map(|j| 2f64.powi(j as i32)).collect()
}

fn check_scales(scales: &[f64], expected: usize) -> Result<Vec<f64>> {
    if scales.len() != expected {
        return Err(Error::InvalidScales(format!(
            "need {expected} scales for {expected} poles, got {}",
            scales.len()
        )));
    }
    if let Some(bad) = scales.iter().find(|a| !(a.is_finite() && **a >= 1.0)) {
        return Err(Error::InvalidScales(format!("scale {bad} must be finite and >= 1")));
    }
    let mut sorted = scales.to_vec();
    sorted.sort_by(f64::total_cmp);
    if let Some(pair) = sorted.windows(2).find(|p| p[0] == p[1]) {
        return Err(Error::InvalidScales(format!("duplicate scale {}", pair[0])));
    }
    Ok(sorted)
}

/// Builds the filter isolating the target pole of `poles`.
///
/// Scales default to `1, 2, 4, …, 2^k`; user scales are sorted and must be
/// distinct and at least 1.
pub fn build_filter(poles: &PoleSet, scales: Option<&[f64]>) -> Result<Filter> {
    let size = poles.k() + 1;
    let scales = match scales {
        Some(s) => check_scales(s, size)?,
        None => default_scales(size),
    };
    let targets = poles.prefix();
    let matrix = targets
        .iter()
        .map(|&s| scales.iter().map(|&a| basis_moment(a, s)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let condition = linalg::condition_number(&matrix);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned(condition));
    }
    let mut rhs = vec![0.0; size];
    rhs[poles.k()] = 1.0;
    let weights = linalg::solve(matrix, rhs).ok_or(Error::IllConditioned(f64::INFINITY))?;
    Ok(Filter {
        poles: poles.clone(),
        normalization: 1.0 / weights[0],
        scales,
        weights,
    })
}

impl Filter {
    /// Reassembles a filter from stored weights, re-checking the moment
    /// conditions to [`MOMENT_TOLERANCE`].
    pub fn from_parts(poles: PoleSet, scales: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let size = poles.k() + 1;
        if weights.len() != size || scales.len() != size {
            return Err(Error::InvalidScales(format!(
                "need {size} scales and weights, got {} and {}",
                scales.len(),
                weights.len()
            )));
        }
        let sorted = check_scales(&scales, size)?;
        if sorted != scales {
            return Err(Error::InvalidScales("scales must be increasing".into()));
        }
        if let Some(bad) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidScales(format!("weight {bad} is not finite")));
        }
        let filter = Self {
            normalization: 1.0 / weights[0],
            poles,
            scales,
            weights,
        };
        let residual = filter.moment_residual()?;
        if residual > MOMENT_TOLERANCE {
            return Err(Error::InvalidScales(format!(
                "weights violate the moment conditions (residual {residual:.3e})"
            )));
        }
        Ok(filter)
    }

    pub fn from_record(record: FilterRecord) -> Result<Self> {
        let poles = PoleSet::new(record.poles, record.k)?;
        Self::from_parts(poles, record.scales, record.weights)
    }

    pub fn to_record(&self) -> FilterRecord {
        FilterRecord {
            poles: self.poles.poles().to_vec(),
            k: self.poles.k(),
            scales: self.scales.clone(),
            weights: self.weights.clone(),
        }
    }

    pub fn poles(&self) -> &PoleSet {
        &self.poles
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Target moment of the filter before normalization (first weight fixed to 1).
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `f(t)`
    pub fn time(&self, t: f64) -> f64 {
        self.scales
            .iter()
            .zip(&self.weights)
            .filter(|(a, _)| t >= **a)
            .map(|(a, w)| w * (-t / a).exp())
            .sum()
    }

    /// `F(x) = Σ_j w_j a_j e^{−1−a_j x} / (1 + a_j x)`; underflows to exactly 0.
    pub fn laplace(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0, "Laplace argument must be nonnegative");
        self.scales
            .iter()
            .zip(&self.weights)
            .map(|(&a, &w)| w * basis_laplace(a, x))
            .sum()
    }

    /// `Σ_j |w_j| a_j`, the constant in the tail bound on `|F|`.
    pub fn tail_constant(&self) -> f64 {
        self.scales.iter().zip(&self.weights).map(|(a, w)| w.abs() * a).sum()
    }

    /// Closed-form moment `∫ t^{−s} f(t) dt`.
    pub fn moment(&self, s: f64) -> Result<f64> {
        let mut total = 0.0;
        for (&a, &w) in self.scales.iter().zip(&self.weights) {
            total += w * basis_moment(a, s)?;
        }
        Ok(total)
    }

    /// `max_i |moment(s_i) − δ_ik|` over the constrained poles.
    pub fn moment_residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, &s) in self.poles.prefix().iter().enumerate() {
            let target = if i == self.poles.k() { 1.0 } else { 0.0 };
            worst = worst.max((self.moment(s)? - target).abs());
        }
        Ok(worst)
    }

    /// Integrates `g(t) f(t)` over the support of `f` to absolute tolerance
    /// `tol`, splitting at every scale and walking the exponential tail in
    /// fixed-width chunks.
    fn integrate_against<G: Fn(f64) -> f64>(&self, g: G, tol: f64) -> Result<f64> {
        let integrand = |t: f64| g(t) * self.time(t);
        let pieces = self.scales.len() + 1;
        let piece_tol = tol / (4.0 * pieces as f64);
        let mut total = crate::summation::CompensatedSum::new();
        for pair in self.scales.windows(2) {
            total.add(integrate_with(integrand, pair[0], pair[1], piece_tol, 0.0)?);
        }
        let last = *self.scales.last().expect("filters have at least one scale");
        let width = 8.0 * last;
        let mut lo = last;
        for chunk in 0..400 {
            let v = integrate_with(integrand, lo, lo + width, piece_tol / 16.0, 0.0)?;
            total.add(v);
            lo += width;
            if chunk > 0 && v.abs() < 1e-3 * piece_tol {
                return Ok(total.value());
            }
        }
        Err(Error::QuadratureFailure {
            tolerance: tol,
            estimate: f64::NAN,
        })
    }

    /// Moment `∫ t^{−s} f(t) dt` by adaptive quadrature (absolute
    /// tolerance 1e−11), independent of the incomplete gamma function.
    pub fn moment_quadrature(&self, s: f64) -> Result<f64> {
        self.integrate_against(|t| t.powf(-s), 1e-11)
    }

    /// `∫ e^{−xt} f(t) dt` by adaptive quadrature.
    pub fn laplace_quadrature(&self, x: f64) -> Result<f64> {
        self.integrate_against(|t| (-x * t).exp(), 1e-11)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn pole_set_validation() {
        assert!(PoleSet::new(vec![], 0).is_err());
        assert!(PoleSet::new(vec![1.0, 1.0], 1).is_err());
        assert!(PoleSet::new(vec![0.0, 1.0], 0).is_err());
        assert!(PoleSet::new(vec![1.0, 1.0 - 5e-7], 0).is_err());
        assert!(PoleSet::new(vec![1.0, 0.0], 2).is_err());
        assert!(PoleSet::new(vec![f64::NAN], 0).is_err());
        let p = PoleSet::new(vec![1.5, 1.0, 0.5], 1).unwrap();
        assert_eq!(p.prefix(), &[1.5, 1.0]);
        assert_eq!(p.gap(), 0.5);
        assert_eq!(p.target(), 1.0);
    }

    #[test]
    fn basis_moment_examples() {
        assert!(close(basis_moment(1.0, 0.0).unwrap(), (-1.0f64).exp(), 1e-14));
        assert!(close(basis_moment(2.0, 0.0).unwrap(), 2.0 * (-1.0f64).exp(), 1e-14));
        // √2 · Γ(1/2, 1), frozen from quadrature.
        assert!(close(basis_moment(2.0, 0.5).unwrap(), 0.394_290_639_969_280_7, 1e-12));
        assert!(basis_moment(0.5, 0.0).is_err());
    }

    #[test]
    fn first_pole_filter() {
        let f = build_filter(&PoleSet::new(vec![0.5], 0).unwrap(), None).unwrap();
        assert_eq!(f.scales(), &[1.0]);
        assert!(close(f.weights()[0], 3.586_728_719_919_085_0, 1e-12));
        assert!(close(f.normalization(), 0.278_805_585_280_662_0, 1e-12));
        assert_eq!(f.time(0.5), 0.0);
        assert!(close(f.time(1.0), 1.319_483_757_117_395_6, 1e-12));
    }

    #[test]
    fn second_pole_filter_matches_closed_form() {
        let poles = PoleSet::new(vec![1.0, 0.0], 1).unwrap();
        let f = build_filter(&poles, Some(&[1.0, 2.0])).unwrap();
        assert!(close(f.weights()[0], -E, 1e-12));
        assert!(close(f.weights()[1], E, 1e-12));
        assert!(close(f.normalization(), -1.0 / E, 1e-12));
        assert!(close(f.time(1.5), -E * (-1.5f64).exp(), 1e-14));
        let expected = -E * (-2.0f64).exp() / 2.0 + E * 2.0 * (-3.0f64).exp() / 3.0;
        assert!(close(f.laplace(1.0), expected, 1e-14));
        assert!(close(f.laplace(1.0), -0.093_716_198_427_979_37, 1e-12));
    }

    #[test]
    fn unnormalized_basis_laplace() {
        assert!(close(basis_laplace(1.0, 0.0), (-1.0f64).exp(), 1e-15));
        assert!(close(basis_laplace(1.0, 1.0), (-2.0f64).exp() / 2.0, 1e-15));
    }

    #[test]
    fn laplace_underflows_to_zero() {
        let f = build_filter(&PoleSet::new(vec![0.5], 0).unwrap(), None).unwrap();
        assert_eq!(f.laplace(1e4), 0.0);
    }

    #[test]
    fn scale_errors() {
        let poles = PoleSet::new(vec![1.0, 0.0], 1).unwrap();
        assert!(matches!(build_filter(&poles, Some(&[1.0, 1.0])), Err(Error::InvalidScales(_))));
        assert!(matches!(build_filter(&poles, Some(&[0.5, 2.0])), Err(Error::InvalidScales(_))));
        assert!(matches!(build_filter(&poles, Some(&[1.0])), Err(Error::InvalidScales(_))));
        // Unsorted scales are accepted and sorted.
        let f = build_filter(&poles, Some(&[2.0, 1.0])).unwrap();
        assert_eq!(f.scales(), &[1.0, 2.0]);
    }

    #[test]
    fn nearly_coincident_poles_are_ill_conditioned() {
        let poles = PoleSet::new(vec![1.0, 1.0 - 2e-6, 1.0 - 4e-6], 2).unwrap();
        assert!(matches!(build_filter(&poles, None), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn moments_by_quadrature() {
        let f = build_filter(&PoleSet::new(vec![0.5], 0).unwrap(), None).unwrap();
        assert!((f.moment_quadrature(0.5).unwrap() - 1.0).abs() < 1e-10);
        let g = build_filter(&PoleSet::new(vec![1.0, 0.0], 1).unwrap(), None).unwrap();
        assert!(g.moment_quadrature(1.0).unwrap().abs() < 1e-8);
        assert!((g.moment_quadrature(0.0).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn record_round_trip_and_tamper_detection() {
        let f = build_filter(&PoleSet::new(vec![1.5, 1.0, 0.5], 2).unwrap(), None).unwrap();
        let json = serde_json::to_string(&f.to_record()).unwrap();
        let back: FilterRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(Filter::from_record(back.clone()).unwrap(), f);
        let mut bad = back;
        bad.weights[0] *= 1.01;
        assert!(Filter::from_record(bad).is_err());
    }
}
