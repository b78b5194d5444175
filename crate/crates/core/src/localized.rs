//! Localized heat coefficients `res Γ(s) tr hΔ^{−s}` from eigenvalues paired
//! with diagonal matrix elements `⟨hφ_λ, φ_λ⟩` of a bounded operator `h`.
//!
//! Entries are per eigenvector, not per eigenvalue: `h` need not commute
//! with the spectral projections, so each basis vector carries its own
//! weight. The noncommutative curvature functional `R_Λ(a)` is this
//! estimator with a caller-chosen cutoff; it has no separate entry point.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimator::{epsilon_schedule, matching_oracle, schedule_parameter, EstimateResult};
use crate::filters::Filter;
use crate::models::{circle_spectrum, data_lines, read_text, OracleData, Spectrum};
use crate::summation::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedEntry {
    pub eigenvalue: f64,
    pub weight: f64,
}

/// Eigenvalues (one per basis vector) with real weights bounded by `bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSpectrum {
    entries: Vec<WeightedEntry>,
    bound: f64,
    description: String,
    oracle: Option<OracleData>,
}

impl WeightedSpectrum {
    /// Sorts entries by eigenvalue (stable, so equal eigenvalues keep their
    /// order). `bound` defaults to the largest `|weight|`.
    pub fn new(mut entries: Vec<WeightedEntry>, bound: Option<f64>, description: impl Into<String>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        for e in &entries {
            if !(e.eigenvalue > 0.0) || !e.eigenvalue.is_finite() {
                return Err(Error::NonpositiveEigenvalue(e.eigenvalue));
            }
            if !e.weight.is_finite() {
                return Err(Error::NonFinite(e.weight));
            }
        }
        entries.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
        let largest = entries.iter().map(|e| e.weight.abs()).fold(0.0, f64::max);
        let bound = match bound {
            None => largest,
            Some(b) if b >= largest && b.is_finite() => b,
            Some(b) => {
                return Err(Error::Domain(format!(
                    "bound {b} is below the largest |weight| {largest}"
                )))
            }
        };
        Ok(Self {
            entries,
            bound,
            description: description.into(),
            oracle: None,
        })
    }

    /// Unrolls multiplicities with every weight equal to 1 (`h` = identity).
    pub fn identity(spectrum: &Spectrum) -> Self {
        let entries = spectrum
            .entries()
            .iter()
            .flat_map(|e| {
                std::iter::repeat_n(
                    WeightedEntry {
                        eigenvalue: e.eigenvalue,
                        weight: 1.0,
                    },
                    e.multiplicity as usize,
                )
            })
            .collect();
        Self {
            entries,
            bound: 1.0,
            description: format!("{} (identity weights)", spectrum.description()),
            oracle: spectrum.oracle().cloned(),
        }
    }

    /// Same eigenvalues, weights replaced entry by entry.
    pub fn reweighted(&self, weight: impl Fn(usize, &WeightedEntry) -> f64) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| WeightedEntry {
                eigenvalue: e.eigenvalue,
                weight: weight(i, e),
            })
            .collect();
        Self::new(entries, None, self.description.clone())
    }

    pub fn with_oracle(mut self, oracle: OracleData) -> Self {
        self.oracle = Some(oracle);
        self
    }

    pub fn entries(&self) -> &[WeightedEntry] {
        &self.entries
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn oracle(&self) -> Option<&OracleData> {
        self.oracle.as_ref()
    }

    /// Entries with eigenvalue in `(0, cutoff]`.
    pub fn up_to(&self, cutoff: f64) -> &[WeightedEntry] {
        let end = self.entries.partition_point(|e| e.eigenvalue <= cutoff);
        &self.entries[..end]
    }

    /// Runs of equal eigenvalues collapsed to `(eigenvalue, total weight)`.
    fn grouped(&self, cutoff: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.up_to(cutoff)
            .chunk_by(|a, b| a.eigenvalue == b.eigenvalue)
            .map(|run| {
                let total = run.iter().map(|e| e.weight).collect::<CompensatedSum>().value();
                (run[0].eigenvalue, total)
            })
    }
}

/// Localized estimate `ε^{s_k} Σ_{0<λ≤Λ} weight · F(λε)`.
///
/// Weights sharing an eigenvalue are summed before multiplying by
/// `F(λε)`, so identity weights reproduce [`crate::estimator::estimate_coefficient`]
/// exactly.
pub fn estimate_localized(
    spectrum: &WeightedSpectrum,
    filter: &Filter,
    cutoff: f64,
    m: Option<f64>,
) -> Result<EstimateResult> {
    let m = schedule_parameter(filter, m)?;
    let epsilon = epsilon_schedule(cutoff, m)?;
    let estimate = crate::estimator::regularized_sum(spectrum.grouped(cutoff), filter, epsilon);
    Ok(EstimateResult::new(
        cutoff,
        m,
        epsilon,
        spectrum.up_to(cutoff).len() as u64,
        estimate,
        matching_oracle(spectrum.oracle(), filter),
    ))
}

/// `bound · ε^{s_k} Σ_{0<λ≤Λ} |F(λε)|`, an upper bound on the magnitude of
/// [`estimate_localized`].
pub fn localized_bound(spectrum: &WeightedSpectrum, filter: &Filter, cutoff: f64, m: Option<f64>) -> Result<f64> {
    let m = schedule_parameter(filter, m)?;
    let epsilon = epsilon_schedule(cutoff, m)?;
    let sum = spectrum
        .up_to(cutoff)
        .iter()
        .map(|e| filter.laplace(e.eigenvalue * epsilon).abs())
        .collect::<CompensatedSum>()
        .value();
    Ok(spectrum.bound() * epsilon.powf(filter.poles().target()) * sum)
}

/// Which circle modes `e^{±inx}` the projection keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn keeps(self, n: u64) -> bool {
        match self {
            Parity::Even => n.is_multiple_of(2),
            Parity::Odd => !n.is_multiple_of(2),
        }
    }
}

/// Circle eigenvalues `n²`, two entries each, weighted by the projection
/// onto even or odd frequencies.
///
/// Localized coefficients: even keeps `Σ_{m≥1} 2e^{−4tm²} ∼ (√π/2) t^{−1/2} − 1`,
/// odd keeps `∼ (√π/2) t^{−1/2} + 0`.
pub fn circle_projection_weights(cutoff: f64, keep: Parity) -> Result<WeightedSpectrum> {
    if !(cutoff >= 4.0) || !cutoff.is_finite() {
        return Err(Error::Domain(format!("projection cutoff must be >= 4, got {cutoff}")));
    }
    let circle = circle_spectrum(cutoff)?;
    let entries = circle
        .entries()
        .iter()
        .flat_map(|e| {
            let n = e.eigenvalue.sqrt().round() as u64;
            let weight = if keep.keeps(n) { 1.0 } else { 0.0 };
            [WeightedEntry {
                eigenvalue: e.eigenvalue,
                weight,
            }; 2]
        })
        .collect();
    let constant = match keep {
        Parity::Even => -1.0,
        Parity::Odd => 0.0,
    };
    let oracle = OracleData::new(vec![0.5, 0.0], vec![0.5 * PI.sqrt(), constant])?;
    let label = match keep {
        Parity::Even => "even",
        Parity::Odd => "odd",
    };
    Ok(WeightedSpectrum {
        entries,
        bound: 1.0,
        description: format!("circle {label} projection, cutoff {cutoff}"),
        oracle: Some(oracle),
    })
}

/// Parses `eigenvalue,weight` lines with an optional `#bound=<float>` header.
pub fn parse_weighted_spectrum(text: &str, path: &Path) -> Result<WeightedSpectrum> {
    let mut bound = None;
    for (i, line) in text.lines().enumerate() {
        if let Some(value) = line.trim().strip_prefix("#bound=") {
            let b = value.trim().parse::<f64>().ok().filter(|b| b.is_finite() && *b >= 0.0);
            bound = Some(b.ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                reason: format!("bad bound {:?}", value.trim()),
            })?);
        }
    }
    let mut entries = Vec::new();
    for item in data_lines(text, path) {
        let (line, eigenvalue, rest) = item?;
        let weight = rest.parse::<f64>().ok().filter(|w| w.is_finite()).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason: format!("bad weight {rest:?}"),
        })?;
        if eigenvalue <= 0.0 {
            return Err(Error::NonpositiveEigenvalue(eigenvalue));
        }
        entries.push(WeightedEntry { eigenvalue, weight });
    }
    WeightedSpectrum::new(entries, bound, path.display().to_string())
}

/// Loads a weighted spectrum file.
pub fn load_weighted_spectrum(path: impl AsRef<Path>) -> Result<WeightedSpectrum> {
    let path = path.as_ref();
    parse_weighted_spectrum(&read_text(path)?, path)
}
