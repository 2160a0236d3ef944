//! Search over antipodal pure-state pairs.
//!
//! For `ρ_± = ½(I ± b·σ)` and a trace-preserving `Φ_n` with Bloch linear
//! part `T_n`, `D(n) = |T_n b|`. Optimal pairs for the BLP measure are
//! antipodal pure states, and `b` and `−b` label the same pair, so a closed
//! hemisphere of directions suffices.

use std::f64::consts::{FRAC_PI_2, TAU};

use rayon::prelude::*;

use super::{blp_lower_bound, DistanceSeries, NmReport};
use crate::engine::{superoperators, Backend, EngineError};
use crate::environment::SpectralModel;
use crate::protocol::Protocol;
use crate::qmath::{BlochVector, Superoperator};

/// Smallest accepted hemisphere resolution.
pub const MIN_RESOLUTION: usize = 8;

/// Directions `(θ_i, φ_j)` with `θ_i = (π/2) i / r` for `i = 0..=r` and
/// `φ_j = 2π j / r` for `j = 0..r`; the pole appears once.
///
/// Every node at resolution `r` is reproduced bit-for-bit at `2r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HemisphereGrid {
    resolution: usize,
}

impl HemisphereGrid {
    pub fn new(resolution: usize) -> Option<Self> {
        (resolution >= MIN_RESOLUTION).then_some(HemisphereGrid { resolution })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// `(polar, azimuth)` angles in a fixed order.
    pub fn angles(&self) -> Vec<(f64, f64)> {
        let r = self.resolution;
        let mut out = vec![(0.0, 0.0)];
        for i in 1..=r {
            let polar = (i as f64 / r as f64) * FRAC_PI_2;
            for j in 0..r {
                out.push((polar, (j as f64 / r as f64) * TAU));
            }
        }
        out
    }

    pub fn directions(&self) -> Vec<BlochVector> {
        self.angles()
            .into_iter()
            .map(|(p, a)| BlochVector::from_angles(p, a))
            .collect()
    }
}

fn apply(t: &[[f64; 3]; 3], b: &BlochVector) -> f64 {
    t.iter()
        .map(|row| {
            let y: f64 = row.iter().zip(b.0).map(|(r, x)| r * x).sum();
            y * y
        })
        .sum::<f64>()
        .sqrt()
}

/// Grid search over antipodal pairs given the maps `Φ_0..Φ_N`.
pub fn optimize_pair_from_maps(maps: &[Superoperator], grid: HemisphereGrid) -> NmReport {
    let parts: Vec<[[f64; 3]; 3]> = maps.iter().map(Superoperator::bloch_linear_part).collect();
    let directions = grid.directions();
    let reports: Vec<NmReport> = directions
        .par_iter()
        .map(|b| {
            let values = parts.iter().map(|t| apply(t, b).min(1.0)).collect();
            let series = DistanceSeries::from_values(values).expect("contraction of a unit vector");
            blp_lower_bound(&series)
        })
        .collect();
    // first maximum in grid order, so the result does not depend on scheduling
    let (best, mut report) = reports
        .into_iter()
        .enumerate()
        .fold(None::<(usize, NmReport)>, |acc, (k, r)| match acc {
            Some((_, ref a)) if a.total() >= r.total() => acc,
            _ => Some((k, r)),
        })
        .expect("grid is never empty");
    let b = directions[best];
    report.pair = Some([b, b.neg()]);
    report.resolution = Some(grid.resolution());
    report
}

/// Best antipodal pure pair for a protocol and its cumulative `N(n)`.
pub fn optimize_pair(
    protocol: &Protocol,
    model: &SpectralModel,
    backend: &Backend,
    resolution: usize,
) -> Result<NmReport, EngineError> {
    let grid = HemisphereGrid::new(resolution).ok_or_else(|| {
        EngineError::ContractViolation(format!(
            "pair-search resolution {resolution} is below the minimum of {MIN_RESOLUTION}"
        ))
    })?;
    let maps = superoperators(protocol, model, backend)?;
    Ok(optimize_pair_from_maps(&maps, grid))
}
