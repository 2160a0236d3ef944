//! Step-wise divisibility of the dynamical maps.
//!
//! Each step map `Φ_{n←n−1}` is tested for complete positivity (Choi
//! spectrum) and for positivity on Bloch differences, i.e. whether it can
//! expand the trace distance of any pair. The expansion test takes the
//! maximum over a hemisphere grid together with the exact operator norm of
//! the Bloch linear part, so a trace-distance increase along any fixed pair
//! is always flagged.

use serde::Serialize;

use super::pairs::HemisphereGrid;
use crate::engine::{intermediate_map, superoperators, Backend, EngineError, IntermediateMap};
use crate::environment::SpectralModel;
use crate::protocol::Protocol;
use crate::qmath::eigen::real_svd;
use crate::qmath::{Superoperator, Tolerances};

/// Relative singular-value threshold below which `Φ_{n−1}` is not inverted.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;
/// Largest tolerated `‖G Φ_{n−1} − Φ_n‖` for a pseudo-inverse step map.
pub const FACTORIZATION_TOL: f64 = 1e-8;
/// Expansion beyond `1 +` this marks a step as not P-divisible.
pub const EXPANSION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepLabel {
    CpDivisible,
    PDivisibleOnly,
    NonPDivisible,
    /// No step map reproduces `Φ_n` from `Φ_{n−1}`.
    Singular,
}

impl StepLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepLabel::CpDivisible => "cp_divisible",
            StepLabel::PDivisibleOnly => "p_divisible_only",
            StepLabel::NonPDivisible => "non_p_divisible",
            StepLabel::Singular => "singular",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepDivisibility {
    pub step: usize,
    pub label: StepLabel,
    /// Smallest Choi eigenvalue of the step map.
    pub min_choi_eigenvalue: Option<f64>,
    /// Largest factor by which the step map stretches a Bloch difference.
    pub max_expansion: Option<f64>,
    /// Condition number of `Φ_{n−1}`.
    pub condition: f64,
    /// The step map was built from a pseudo-inverse and is only defined on
    /// the range of `Φ_{n−1}`.
    pub restricted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisibilityReport {
    pub resolution: usize,
    pub steps: Vec<StepDivisibility>,
}

impl DivisibilityReport {
    pub fn labels(&self) -> Vec<StepLabel> {
        self.steps.iter().map(|s| s.label).collect()
    }

    pub fn first_violation(&self) -> Option<usize> {
        self.steps
            .iter()
            .find(|s| s.label != StepLabel::CpDivisible)
            .map(|s| s.step)
    }
}

fn spectral_norm3(t: &[[f64; 3]; 3]) -> f64 {
    let flat: Vec<f64> = t.iter().flatten().copied().collect();
    real_svd(&flat, 3).0[0]
}

fn grid_expansion(t: &[[f64; 3]; 3], grid: &HemisphereGrid) -> f64 {
    grid.directions()
        .iter()
        .map(|b| {
            t.iter()
                .map(|row| row.iter().zip(b.0).map(|(r, x)| r * x).sum::<f64>().powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

fn classify_step(step: usize, map: &Superoperator, condition: f64, restricted: bool, grid: &HemisphereGrid) -> StepDivisibility {
    let cp_tol = Tolerances::default().complete_positivity;
    let min_choi = map.min_choi_eigenvalue();
    let t = map.bloch_linear_part();
    let expansion = spectral_norm3(&t).max(grid_expansion(&t, grid));
    let label = if expansion > 1.0 + EXPANSION_TOL {
        StepLabel::NonPDivisible
    } else if min_choi >= -cp_tol {
        StepLabel::CpDivisible
    } else {
        StepLabel::PDivisibleOnly
    };
    StepDivisibility {
        step,
        label,
        min_choi_eigenvalue: Some(min_choi),
        max_expansion: Some(expansion),
        condition,
        restricted,
    }
}

/// Labels each step `n = 1..=N` of a precomputed map sequence `Φ_0..Φ_N`.
///
/// When `Φ_{n−1}` is numerically singular the step map is taken as
/// `Φ_n Φ_{n−1}⁺`, provided it actually reproduces `Φ_n`; otherwise the step
/// is labelled [`StepLabel::Singular`].
pub fn classify_maps(maps: &[Superoperator], grid: HemisphereGrid) -> DivisibilityReport {
    let steps = maps
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let (prev, next) = (&w[0], &w[1]);
            match intermediate_map(next, prev, SINGULAR_THRESHOLD) {
                IntermediateMap::Regular { map, condition } => classify_step(k + 1, &map, condition, false, &grid),
                IntermediateMap::Singular { smallest, largest } => {
                    let condition = if smallest > 0.0 { largest / smallest } else { f64::INFINITY };
                    let (pinv, _) = prev.pseudo_inverse(SINGULAR_THRESHOLD);
                    let g = *next * pinv;
                    if (g * *prev).max_abs_diff(next) <= FACTORIZATION_TOL {
                        classify_step(k + 1, &g, condition, true, &grid)
                    } else {
                        StepDivisibility {
                            step: k + 1,
                            label: StepLabel::Singular,
                            min_choi_eigenvalue: None,
                            max_expansion: None,
                            condition,
                            restricted: false,
                        }
                    }
                }
            }
        })
        .collect();
    DivisibilityReport {
        resolution: grid.resolution(),
        steps,
    }
}

/// Divisibility labels for every step of a protocol.
pub fn classify_divisibility(
    protocol: &Protocol,
    model: &SpectralModel,
    backend: &Backend,
    resolution: usize,
) -> Result<DivisibilityReport, EngineError> {
    let grid = HemisphereGrid::new(resolution).ok_or_else(|| {
        EngineError::ContractViolation(format!("divisibility grid resolution {resolution} is too small"))
    })?;
    let maps = superoperators(protocol, model, backend)?;
    Ok(classify_maps(&maps, grid))
}
