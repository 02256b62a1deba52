//! Frequency-selective sparse approximation of scattered 2D samples.
//!
//! A scalar signal known at scattered positions is approximated by a sparse
//! superposition of separable cosine basis functions. Estimation is greedy:
//! every iteration computes, for each candidate frequency pair, the weighted
//! least-squares coefficient of the current residual and the residual energy
//! decrease it would achieve, then selects the candidate maximizing the
//! decrease multiplied by a spectral prior that favors low frequencies. The
//! selected coefficient accumulates into the model and the residual is
//! updated. Because the basis functions are not orthogonal over scattered
//! samples, a frequency pair may be selected repeatedly; its coefficient
//! contributions add up.
//!
//! Two weighting functions shape the fit:
//!
//! * a spatial weight `rho^(d / unit_radius)` that emphasizes samples near
//!   the block center, and
//! * a spectral weight `sigma^sqrt(k^2 + l^2)` that encodes the smoothness
//!   prior on the selection.

use std::collections::BTreeMap;

use crate::error::{FsuError, Result};

/// Scattered samples of a scalar signal: positions `(m, n)` and one value
/// per position.
#[derive(Debug, Clone)]
pub struct ScatteredSamples {
    pub positions: Vec<[f64; 2]>,
    pub values: Vec<f64>,
}

impl ScatteredSamples {
    pub fn new(positions: Vec<[f64; 2]>, values: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(FsuError::EmptyInput);
        }
        if positions.len() != values.len() {
            return Err(FsuError::LengthMismatch {
                left: positions.len(),
                right: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FsuError::NonFiniteCoordinate(i));
        }
        Ok(Self { positions, values })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// The rectangular extent the basis is parameterized on, and the number of
/// frequencies per axis. Candidate frequency pairs are `{0..max_freq-1}^2`.
#[derive(Debug, Clone, Copy)]
pub struct BasisSpec {
    pub m_min: f64,
    pub m_max: f64,
    pub n_min: f64,
    pub n_max: f64,
    pub max_freq: usize,
}

impl BasisSpec {
    pub fn new(m_min: f64, m_max: f64, n_min: f64, n_max: f64, max_freq: usize) -> Result<Self> {
        if !(m_max > m_min && n_max > n_min) {
            return Err(FsuError::InvalidConfig(format!(
                "degenerate basis extent [{m_min}, {m_max}] x [{n_min}, {n_max}]"
            )));
        }
        if max_freq == 0 {
            return Err(FsuError::InvalidConfig("max_freq must be >= 1".into()));
        }
        Ok(Self {
            m_min,
            m_max,
            n_min,
            n_max,
            max_freq,
        })
    }

    /// Slack for the extent membership test in [`evaluate`].
    const EXTENT_SLACK: f64 = 1e-9;

    fn contains(&self, m: f64, n: f64) -> bool {
        m >= self.m_min - Self::EXTENT_SLACK
            && m <= self.m_max + Self::EXTENT_SLACK
            && n >= self.n_min - Self::EXTENT_SLACK
            && n <= self.n_max + Self::EXTENT_SLACK
    }
}

/// Spatial and spectral weighting parameters.
#[derive(Debug, Clone, Copy)]
pub struct WeightingSpec {
    /// Spatial decay in (0, 1]: weight of a sample at `unit_radius` from the
    /// center.
    pub spatial_decay: f64,
    /// Spectral decay in (0, 1]: selection prior base.
    pub spectral_decay: f64,
    /// Center of the spatial window.
    pub center: [f64; 2],
    /// Distance at which the spatial weight equals `spatial_decay`.
    pub unit_radius: f64,
}

impl WeightingSpec {
    /// Center at the extent midpoint, unit radius at half the extent
    /// diagonal.
    pub fn centered_on(basis: &BasisSpec, spatial_decay: f64, spectral_decay: f64) -> Self {
        let dm = basis.m_max - basis.m_min;
        let dn = basis.n_max - basis.n_min;
        Self {
            spatial_decay,
            spectral_decay,
            center: [basis.m_min + 0.5 * dm, basis.n_min + 0.5 * dn],
            unit_radius: 0.5 * (dm * dm + dn * dn).sqrt(),
        }
    }
}

/// Separable cosine basis value `cos(pi k u) * cos(pi l v)` with `(u, v)`
/// the position normalized to the extent. Bounded in [-1, 1].
pub fn basis_value(spec: &BasisSpec, k: usize, l: usize, m: f64, n: f64) -> f64 {
    let u = (m - spec.m_min) / (spec.m_max - spec.m_min);
    let v = (n - spec.n_min) / (spec.n_max - spec.n_min);
    (std::f64::consts::PI * k as f64 * u).cos() * (std::f64::consts::PI * l as f64 * v).cos()
}

/// Isotropic spatial weight `rho^(d / unit_radius)`, strictly positive and
/// nonincreasing in the distance `d` from the center.
pub fn spatial_weight(spec: &WeightingSpec, m: f64, n: f64) -> f64 {
    let d = ((m - spec.center[0]).powi(2) + (n - spec.center[1]).powi(2)).sqrt();
    spec.spatial_decay.powf(d / spec.unit_radius)
}

/// Spectral selection prior `sigma^sqrt(k^2 + l^2)`.
pub fn spectral_weight(spec: &WeightingSpec, k: usize, l: usize) -> f64 {
    let radius = ((k * k + l * l) as f64).sqrt();
    spec.spectral_decay.powf(radius)
}

/// A sparse frequency model: accumulated coefficient per selected frequency
/// pair, plus estimation diagnostics.
#[derive(Debug, Clone)]
pub struct SparseModel {
    /// Accumulated coefficient per frequency pair, all within
    /// `{0..max_freq-1}^2`.
    pub terms: BTreeMap<(usize, usize), f64>,
    pub iterations_used: usize,
    /// Weighted residual energy when estimation stopped.
    pub final_residual_energy: f64,
}

impl SparseModel {
    pub fn empty() -> Self {
        Self {
            terms: BTreeMap::new(),
            iterations_used: 0,
            final_residual_energy: 0.0,
        }
    }
}

/// One iteration of the greedy estimation, for oracle checks and debugging.
#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    /// Selected frequency pair.
    pub selected: (usize, usize),
    /// Coefficient added to the model in this iteration.
    pub coefficient: f64,
    /// Residual energy decrease achieved by the selected candidate.
    pub energy_decrease: f64,
    /// Weighted residual energy after the update.
    pub residual_energy: f64,
}

/// Candidates whose weighted basis energy falls below this bound are
/// excluded from selection: the basis nearly vanishes on the sample set and
/// its coefficient would be numerically meaningless.
pub const BASIS_ENERGY_GUARD: f64 = 1e-12;

fn candidate_key(k: usize, l: usize) -> (usize, usize, usize) {
    (k * k + l * l, k, l)
}

/// Greedy estimation, also returning the per-iteration trace.
pub fn estimate_traced(
    samples: &ScatteredSamples,
    basis: &BasisSpec,
    weights: &WeightingSpec,
    max_iterations: usize,
    residual_threshold: f64,
) -> (SparseModel, Vec<IterationRecord>) {
    let n = samples.len();
    let freq = basis.max_freq;

    // Per-sample tables reused across iterations.
    let w: Vec<f64> = samples
        .positions
        .iter()
        .map(|p| spatial_weight(weights, p[0], p[1]))
        .collect();
    let mut cos_u = vec![0.0f64; freq * n];
    let mut cos_v = vec![0.0f64; freq * n];
    for (i, p) in samples.positions.iter().enumerate() {
        let u = (p[0] - basis.m_min) / (basis.m_max - basis.m_min);
        let v = (p[1] - basis.n_min) / (basis.n_max - basis.n_min);
        for k in 0..freq {
            cos_u[k * n + i] = (std::f64::consts::PI * k as f64 * u).cos();
            cos_v[k * n + i] = (std::f64::consts::PI * k as f64 * v).cos();
        }
    }

    // The weighted basis energies do not depend on the residual.
    let mut basis_energy = vec![0.0f64; freq * freq];
    let mut spectral = vec![0.0f64; freq * freq];
    for k in 0..freq {
        for l in 0..freq {
            let mut e = 0.0;
            for i in 0..n {
                let phi = cos_u[k * n + i] * cos_v[l * n + i];
                e += w[i] * phi * phi;
            }
            basis_energy[k * freq + l] = e;
            spectral[k * freq + l] = spectral_weight(weights, k, l);
        }
    }

    let residual_energy =
        |r: &[f64]| -> f64 { r.iter().zip(&w).map(|(ri, wi)| wi * ri * ri).sum() };

    let mut residual = samples.values.clone();
    let mut energy = residual_energy(&residual);
    let mut model = SparseModel::empty();
    let mut trace = Vec::new();

    if energy <= residual_threshold {
        model.final_residual_energy = energy;
        return (model, trace);
    }

    let mut weighted_residual = vec![0.0f64; n];
    for _ in 0..max_iterations {
        for i in 0..n {
            weighted_residual[i] = w[i] * residual[i];
        }

        // Scan all candidates for the largest weighted energy decrease.
        let mut best: Option<(f64, f64, f64, usize, usize)> = None; // score, coeff, decrease, k, l
        for k in 0..freq {
            for l in 0..freq {
                let denom = basis_energy[k * freq + l];
                if denom < BASIS_ENERGY_GUARD {
                    continue;
                }
                let mut num = 0.0;
                for i in 0..n {
                    num += weighted_residual[i] * cos_u[k * n + i] * cos_v[l * n + i];
                }
                let coeff = num / denom;
                let decrease = coeff * coeff * denom;
                let score = decrease * spectral[k * freq + l];
                let replace = match &best {
                    None => true,
                    Some((best_score, _, _, bk, bl)) => {
                        score > *best_score
                            || (score == *best_score
                                && candidate_key(k, l) < candidate_key(*bk, *bl))
                    }
                };
                if replace {
                    best = Some((score, coeff, decrease, k, l));
                }
            }
        }

        let Some((_, coeff, decrease, k, l)) = best else {
            break;
        };
        // Stop once no candidate makes meaningful progress; the epsilon
        // guard keeps late iterations from churning on rounding noise.
        if decrease <= f64::EPSILON * energy {
            break;
        }

        *model.terms.entry((k, l)).or_insert(0.0) += coeff;
        for i in 0..n {
            residual[i] -= coeff * cos_u[k * n + i] * cos_v[l * n + i];
        }
        energy = residual_energy(&residual);
        model.iterations_used += 1;
        trace.push(IterationRecord {
            selected: (k, l),
            coefficient: coeff,
            energy_decrease: decrease,
            residual_energy: energy,
        });

        if energy <= residual_threshold {
            break;
        }
    }

    model.final_residual_energy = energy;
    (model, trace)
}

/// Greedy estimation of a sparse frequency model for the given samples.
pub fn estimate(
    samples: &ScatteredSamples,
    basis: &BasisSpec,
    weights: &WeightingSpec,
    max_iterations: usize,
    residual_threshold: f64,
) -> SparseModel {
    estimate_traced(samples, basis, weights, max_iterations, residual_threshold).0
}

/// Evaluates the model at new positions, which must lie inside the basis
/// extent.
pub fn evaluate(
    model: &SparseModel,
    basis: &BasisSpec,
    positions: &[[f64; 2]],
) -> Result<Vec<f64>> {
    for p in positions {
        if !basis.contains(p[0], p[1]) {
            return Err(FsuError::PositionOutsideExtent { m: p[0], n: p[1] });
        }
    }
    let mut out = vec![0.0f64; positions.len()];
    for (&(k, l), &coeff) in &model.terms {
        for (o, p) in out.iter_mut().zip(positions) {
            *o += coeff * basis_value(basis, k, l, p[0], p[1]);
        }
    }
    Ok(out)
}
