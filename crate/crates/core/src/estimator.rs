//! Regularized partial traces `ε^{s_k} Σ_{0<λ≤Λ} F(λε)` and friends.
//!
//! With the schedule `ε = m ln Λ / Λ` and `m > s_0 − s_k`, the truncated
//! sum converges to the heat coefficient `c_k = res_{s=s_k} Γ(s) ζ(Δ, s)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filters::Filter;
use crate::models::Spectrum;
use crate::special_functions::gamma;
use crate::summation::CompensatedSum;

/// Oracle poles must match the filter's poles to this tolerance before the
/// oracle coefficient is attached to a result.
const POLE_MATCH_TOLERANCE: f64 = 1e-12;

/// One evaluation of the regularized sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateResult {
    #[serde(rename = "lambda", serialize_with = "crate::format::serialize_f64")]
    pub cutoff: f64,
    #[serde(serialize_with = "crate::format::serialize_f64")]
    pub m: f64,
    #[serde(serialize_with = "crate::format::serialize_f64")]
    pub epsilon: f64,
    pub n_terms: u64,
    #[serde(serialize_with = "crate::format::serialize_f64")]
    pub estimate: f64,
    #[serde(serialize_with = "crate::format::serialize_opt_f64")]
    pub oracle: Option<f64>,
    #[serde(serialize_with = "crate::format::serialize_opt_f64")]
    pub abs_error: Option<f64>,
    #[serde(serialize_with = "crate::format::serialize_opt_f64")]
    pub rel_error: Option<f64>,
}

impl EstimateResult {
    pub(crate) fn new(cutoff: f64, m: f64, epsilon: f64, n_terms: u64, estimate: f64, oracle: Option<f64>) -> Self {
        let abs_error = oracle.map(|c| (estimate - c).abs());
        let rel_error = oracle.and_then(|c| (c != 0.0).then(|| (estimate - c).abs() / c.abs()));
        Self {
            cutoff,
            m,
            epsilon,
            n_terms,
            estimate,
            oracle,
            abs_error,
            rel_error,
        }
    }
}

/// `ε(Λ) = m ln Λ / Λ`.
pub fn epsilon_schedule(cutoff: f64, m: f64) -> Result<f64> {
    if !(cutoff > 1.0) || !cutoff.is_finite() {
        return Err(Error::InvalidCutoff(cutoff));
    }
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::ScheduleViolation { m, gap: 0.0 });
    }
    Ok(m * cutoff.ln() / cutoff)
}

/// Resolves the schedule parameter: the default is `s_0 − s_k + 1`, and a
/// supplied value must exceed `s_0 − s_k`.
pub fn schedule_parameter(filter: &Filter, m: Option<f64>) -> Result<f64> {
    let gap = filter.poles().gap();
    match m {
        None => Ok(gap + 1.0),
        Some(m) if m > gap && m.is_finite() => Ok(m),
        Some(m) => Err(Error::ScheduleViolation { m, gap }),
    }
}

/// `ε^{s_k} Σ weight · F(λε)` over `(eigenvalue, weight)` pairs in the
/// order given (callers pass ascending eigenvalues).
pub(crate) fn regularized_sum<I>(terms: I, filter: &Filter, epsilon: f64) -> f64
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let mut acc = CompensatedSum::new();
    for (eigenvalue, weight) in terms {
        acc.add(weight * filter.laplace(eigenvalue * epsilon));
    }
    epsilon.powf(filter.poles().target()) * acc.value()
}

/// `ε^{s_k} Σ_{0<λ≤Λ} mult · F(λε)` for a fixed `ε`.
pub fn estimate_with_epsilon(spectrum: &Spectrum, filter: &Filter, cutoff: f64, epsilon: f64) -> f64 {
    let terms = spectrum
        .up_to(cutoff)
        .iter()
        .map(|e| (e.eigenvalue, e.multiplicity as f64));
    regularized_sum(terms, filter, epsilon)
}

/// Oracle coefficient for the filter's target, when the spectrum carries
/// oracle data for the same poles.
pub(crate) fn matching_oracle(oracle: Option<&crate::models::OracleData>, filter: &Filter) -> Option<f64> {
    let oracle = oracle?;
    let prefix = filter.poles().prefix();
    let known = oracle.poles().get(..prefix.len())?;
    let matches = known
        .iter()
        .zip(prefix)
        .all(|(a, b)| (a - b).abs() <= POLE_MATCH_TOLERANCE);
    if matches {
        oracle.coefficient(filter.poles().k())
    } else {
        None
    }
}

/// Estimates the heat coefficient `c_k` at cutoff `Λ` with `ε = m ln Λ / Λ`.
pub fn estimate_coefficient(
    spectrum: &Spectrum,
    filter: &Filter,
    cutoff: f64,
    m: Option<f64>,
) -> Result<EstimateResult> {
    let m = schedule_parameter(filter, m)?;
    let epsilon = epsilon_schedule(cutoff, m)?;
    let estimate = estimate_with_epsilon(spectrum, filter, cutoff, epsilon);
    Ok(EstimateResult::new(
        cutoff,
        m,
        epsilon,
        spectrum.count_up_to(cutoff),
        estimate,
        matching_oracle(spectrum.oracle(), filter),
    ))
}

/// Converts a heat coefficient into the zeta residue `c_k / Γ(s_k)`.
///
/// Fails with [`Error::PoleOfGamma`] at nonpositive integers, where the zeta
/// function is regular and `c_k` is the meaningful quantity.
pub fn to_zeta_residue(coefficient: f64, pole: f64) -> Result<f64> {
    Ok(coefficient / gamma(pole)?)
}

/// Logarithmic (Dixmier-type) estimate of the leading zeta residue,
/// `Σ_{0<λ≤Λ} mult · λ^{−s_0} / ln Λ`. Multiply by `Γ(s_0)` to compare
/// with the heat coefficient `c_0`.
pub fn dixmier_baseline(spectrum: &Spectrum, leading_pole: f64, cutoff: f64) -> Result<f64> {
    if !(cutoff > 1.0) || !cutoff.is_finite() {
        return Err(Error::InvalidCutoff(cutoff));
    }
    if !(leading_pole > 0.0) {
        return Err(Error::Domain(format!(
            "the logarithmic trace needs s_0 > 0, got {leading_pole}"
        )));
    }
    let sum = spectrum
        .up_to(cutoff)
        .iter()
        .map(|e| e.multiplicity as f64 * e.eigenvalue.powf(-leading_pole))
        .collect::<CompensatedSum>()
        .value();
    Ok(sum / cutoff.ln())
}

/// Checks that cutoffs are finite, above 1, and strictly increasing.
pub(crate) fn check_cutoffs(cutoffs: &[f64]) -> Result<()> {
    if let Some(&bad) = cutoffs.iter().find(|c| !(**c > 1.0) || !c.is_finite()) {
        return Err(Error::InvalidCutoff(bad));
    }
    if let Some(pair) = cutoffs.windows(2).find(|p| p[1] <= p[0]) {
        return Err(Error::Domain(format!(
            "cutoffs must be strictly increasing: {} then {}",
            pair[0], pair[1]
        )));
    }
    Ok(())
}

/// One [`estimate_coefficient`] per cutoff.
pub fn sweep(spectrum: &Spectrum, filter: &Filter, cutoffs: &[f64], m: Option<f64>) -> Result<Vec<EstimateResult>> {
    check_cutoffs(cutoffs)?;
    cutoffs
        .iter()
        .map(|&cutoff| estimate_coefficient(spectrum, filter, cutoff, m))
        .collect()
}

/// Least-squares slope of `ln |abs_error|` against `ln ε`.
pub fn convergence_slope(results: &[EstimateResult]) -> Result<f64> {
    let points: Vec<(f64, f64)> = results
        .iter()
        .filter_map(|r| match r.abs_error {
            Some(e) if e > 0.0 && r.epsilon > 0.0 => Some((r.epsilon.ln(), e.ln())),
            _ => None,
        })
        .collect();
    if points.len() < 3 || points.len() != results.len() {
        return Err(Error::InsufficientData {
            needed: 3.max(results.len()),
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: 1,
        });
    }
    Ok(sxy / sxx)
}
