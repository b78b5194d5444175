//! Spectra with known heat coefficients, and loading spectra from files.
//!
//! Each model drops its zero mode, so the constant heat coefficient is the
//! closed-manifold value minus one.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::filters::PoleSet;
use crate::linalg;
use crate::summation::CompensatedSum;

/// One distinct eigenvalue and how often it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEntry {
    pub eigenvalue: f64,
    pub multiplicity: u64,
}

/// Known heat coefficients `c_i` at poles `s_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleData {
    poles: PoleSet,
    coefficients: Vec<f64>,
}

impl OracleData {
    pub fn new(poles: Vec<f64>, coefficients: Vec<f64>) -> Result<Self> {
        if poles.len() != coefficients.len() {
            return Err(Error::InvalidPoles(format!(
                "{} poles but {} coefficients",
                poles.len(),
                coefficients.len()
            )));
        }
        Ok(Self {
            poles: PoleSet::targeting_last(poles)?,
            coefficients,
        })
    }

    pub fn poles(&self) -> &[f64] {
        self.poles.poles()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficient(&self, k: usize) -> Option<f64> {
        self.coefficients.get(k).copied()
    }

    /// The oracle's poles with target index `k`.
    pub fn pole_set(&self, k: usize) -> Result<PoleSet> {
        self.poles.with_target(k)
    }
}

/// Positive eigenvalues with multiplicities, sorted ascending with no
/// repeated eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    entries: Vec<SpectralEntry>,
    description: String,
    oracle: Option<OracleData>,
}

impl Spectrum {
    /// Sorts `entries` and merges repeated eigenvalues.
    pub fn new(entries: Vec<SpectralEntry>, description: impl Into<String>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        for e in &entries {
            if !(e.eigenvalue > 0.0) || !e.eigenvalue.is_finite() {
                return Err(Error::NonpositiveEigenvalue(e.eigenvalue));
            }
            if e.multiplicity == 0 {
                return Err(Error::Domain(format!(
                    "eigenvalue {} has zero multiplicity",
                    e.eigenvalue
                )));
            }
        }
        Ok(Self::from_sorted_unchecked(merge_sorted(entries), description.into()))
    }

    /// Caller guarantees ascending, distinct, positive eigenvalues.
    fn from_sorted_unchecked(entries: Vec<SpectralEntry>, description: String) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].eigenvalue < w[1].eigenvalue));
        Self {
            entries,
            description,
            oracle: None,
        }
    }

    pub fn with_oracle(mut self, oracle: OracleData) -> Self {
        self.oracle = Some(oracle);
        self
    }

    pub fn entries(&self) -> &[SpectralEntry] {
        &self.entries
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn oracle(&self) -> Option<&OracleData> {
        self.oracle.as_ref()
    }

    /// Entries with eigenvalue in `(0, cutoff]`.
    pub fn up_to(&self, cutoff: f64) -> &[SpectralEntry] {
        let end = self.entries.partition_point(|e| e.eigenvalue <= cutoff);
        &self.entries[..end]
    }

    /// Number of eigenvalues in `(0, cutoff]`, counted with multiplicity.
    pub fn count_up_to(&self, cutoff: f64) -> u64 {
        self.up_to(cutoff).iter().map(|e| e.multiplicity).sum()
    }

    pub fn largest(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.eigenvalue)
    }

    /// Multiplies every eigenvalue by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|e| SpectralEntry {
                eigenvalue: e.eigenvalue * factor,
                multiplicity: e.multiplicity,
            })
            .collect();
        Self::new(entries, format!("{} scaled by {factor}", self.description))
    }

    /// `tr e^{−tΔ}` over the stored (finite) spectrum.
    pub fn heat_trace(&self, t: f64) -> f64 {
        self.entries
            .iter()
            .map(|e| e.multiplicity as f64 * (-t * e.eigenvalue).exp())
            .collect::<CompensatedSum>()
            .value()
    }
}

fn merge_sorted(mut entries: Vec<SpectralEntry>) -> Vec<SpectralEntry> {
    entries.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
    let mut merged: Vec<SpectralEntry> = Vec::with_capacity(entries.len());
    for e in entries {
        match merged.last_mut() {
            Some(last) if last.eigenvalue == e.eigenvalue => last.multiplicity += e.multiplicity,
            _ => merged.push(e),
        }
    }
    merged
}

/// Fits `Σ_i c_i t^{−s_i}` to the spectrum's heat trace at exactly as many
/// times as there are poles. The spectrum must extend far enough that
/// `e^{−t λ_max}` is negligible at the smallest time.
pub fn fit_heat_coefficients(spectrum: &Spectrum, poles: &[f64], times: &[f64]) -> Result<Vec<f64>> {
    if poles.len() != times.len() || poles.is_empty() {
        return Err(Error::Domain(format!(
            "need one time per pole, got {} poles and {} times",
            poles.len(),
            times.len()
        )));
    }
    let matrix = times
        .iter()
        .map(|t| poles.iter().map(|s| t.powf(-s)).collect())
        .collect();
    let rhs = times.iter().map(|&t| spectrum.heat_trace(t)).collect();
    linalg::solve(matrix, rhs).ok_or_else(|| Error::Domain("degenerate fit times".into()))
}

/// The built-in model operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Laplacian on the circle of length 2π.
    Circle,
    /// Laplacian on the square flat torus (2π-periodic in both directions).
    Torus2,
    /// Laplacian on the unit round 2-sphere.
    Sphere,
}

impl Model {
    pub fn spectrum(self, cutoff: f64) -> Result<Spectrum> {
        match self {
            Model::Circle => circle_spectrum(cutoff),
            Model::Torus2 => torus2_spectrum(cutoff),
            Model::Sphere => sphere_spectrum(cutoff),
        }
    }

    pub fn oracle(self) -> OracleData {
        let (poles, coefficients) = match self {
            Model::Circle => (vec![0.5, 0.0], vec![PI.sqrt(), -1.0]),
            Model::Torus2 => (vec![1.0, 0.0], vec![PI, -1.0]),
            Model::Sphere => (vec![1.0, 0.0], vec![1.0, -2.0 / 3.0]),
        };
        OracleData::new(poles, coefficients).expect("model oracles are well formed")
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Circle => "circle",
            Model::Torus2 => "torus2",
            Model::Sphere => "sphere",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn require_cutoff(cutoff: f64, min: f64) -> Result<()> {
    if cutoff >= min && cutoff.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("model cutoff must be finite and >= {min}, got {cutoff}")))
    }
}

/// Largest integer `n ≥ 0` with `n² ≤ x`.
fn isqrt_floor(x: f64) -> u64 {
    let mut n = x.sqrt().floor() as u64;
    while (n + 1) as f64 * (n + 1) as f64 <= x {
        n += 1;
    }
    while n > 0 && (n * n) as f64 > x {
        n -= 1;
    }
    n
}

/// Eigenvalues `n²`, multiplicity 2, for `1 ≤ n²≤ cutoff`.
pub fn circle_spectrum(cutoff: f64) -> Result<Spectrum> {
    require_cutoff(cutoff, 1.0)?;
    let entries = (1..=isqrt_floor(cutoff))
        .map(|n| SpectralEntry {
            eigenvalue: (n * n) as f64,
            multiplicity: 2,
        })
        .collect();
    Ok(Spectrum::from_sorted_unchecked(entries, format!("circle, cutoff {cutoff}"))
        .with_oracle(Model::Circle.oracle()))
}

// Above this cutoff the torus counts go into a sorted map instead of a
// dense table indexed by eigenvalue.
const DENSE_TORUS_LIMIT: f64 = 5e7;

/// Eigenvalues `p² + q²` over nonzero integer pairs, multiplicities
/// aggregated.
pub fn torus2_spectrum(cutoff: f64) -> Result<Spectrum> {
    require_cutoff(cutoff, 1.0)?;
    let r = isqrt_floor(cutoff) as i64;
    let top = cutoff.floor() as u64;
    let visit = |add: &mut dyn FnMut(u64)| {
        for p in -r..=r {
            let p2 = (p * p) as u64;
            let q_max = isqrt_floor((top - p2) as f64) as i64;
            for q in -q_max..=q_max {
                let v = p2 + (q * q) as u64;
                if v != 0 {
                    add(v);
                }
            }
        }
    };
    let entries: Vec<SpectralEntry> = if cutoff <= DENSE_TORUS_LIMIT {
        let mut counts = vec![0u64; top as usize + 1];
        visit(&mut |v| counts[v as usize] += 1);
        counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(v, &c)| SpectralEntry {
                eigenvalue: v as f64,
                multiplicity: c,
            })
            .collect()
    } else {
        let mut counts = BTreeMap::new();
        visit(&mut |v| *counts.entry(v).or_insert(0u64) += 1);
        counts
            .into_iter()
            .map(|(v, c)| SpectralEntry {
                eigenvalue: v as f64,
                multiplicity: c,
            })
            .collect()
    };
    Ok(Spectrum::from_sorted_unchecked(entries, format!("torus2, cutoff {cutoff}"))
        .with_oracle(Model::Torus2.oracle()))
}

/// Eigenvalues `l(l+1)`, multiplicity `2l+1`, for `l ≥ 1`, `l(l+1) ≤ cutoff`.
pub fn sphere_spectrum(cutoff: f64) -> Result<Spectrum> {
    require_cutoff(cutoff, 2.0)?;
    let entries = (1u64..)
        .map(|l| (l, (l * (l + 1)) as f64))
        .take_while(|&(_, v)| v <= cutoff)
        .map(|(l, v)| SpectralEntry {
            eigenvalue: v,
            multiplicity: 2 * l + 1,
        })
        .collect();
    Ok(Spectrum::from_sorted_unchecked(entries, format!("sphere, cutoff {cutoff}"))
        .with_oracle(Model::Sphere.oracle()))
}

/// Data lines of a spectrum-style file: `(line number, first, second)`.
/// Blank lines and `#` comments are skipped.
pub(crate) fn data_lines<'a>(
    text: &'a str,
    path: &'a Path,
) -> impl Iterator<Item = Result<(usize, f64, &'a str)>> + 'a {
    text.lines().enumerate().filter_map(move |(i, raw)| {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        let parse_error = |reason: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            reason,
        };
        let Some((first, second)) = line.split_once(',') else {
            return Some(Err(parse_error(format!("expected two comma-separated fields, got {line:?}"))));
        };
        let eigenvalue = match first.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => v,
            _ => return Some(Err(parse_error(format!("bad eigenvalue {:?}", first.trim())))),
        };
        Some(Ok((i + 1, eigenvalue, second.trim())))
    })
}

/// Parses `eigenvalue,multiplicity` lines. `path` is only used in messages.
pub fn parse_spectrum(text: &str, path: &Path) -> Result<Spectrum> {
    let mut entries = Vec::new();
    for item in data_lines(text, path) {
        let (line, eigenvalue, rest) = item?;
        let multiplicity = match rest.parse::<u64>() {
            Ok(m) if m > 0 => m,
            _ => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    reason: format!("multiplicity must be a positive integer, got {rest:?}"),
                })
            }
        };
        if eigenvalue <= 0.0 {
            return Err(Error::NonpositiveEigenvalue(eigenvalue));
        }
        entries.push(SpectralEntry {
            eigenvalue,
            multiplicity,
        });
    }
    Spectrum::new(entries, path.display().to_string())
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Loads a spectrum file (`eigenvalue,multiplicity` per line).
pub fn load_spectrum(path: impl AsRef<Path>) -> Result<Spectrum> {
    let path = path.as_ref();
    parse_spectrum(&read_text(path)?, path)
}
