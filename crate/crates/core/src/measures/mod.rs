//! Distinguishability dynamics and non-Markovianity.
//!
//! The trace distance between two evolving states never grows under a
//! P-divisible family of maps, so any increase witnesses memory effects.
//! `N(n)` accumulates the positive increments up to step `n`.

mod divisibility;
mod pairs;

pub use divisibility::{classify_divisibility, classify_maps, DivisibilityReport, StepDivisibility, StepLabel};
pub use pairs::{optimize_pair, optimize_pair_from_maps, HemisphereGrid, MIN_RESOLUTION};

use crate::engine::Trajectory;
use crate::protocol::ControlSpec;
use crate::qmath::{BlochVector, DensityMatrix};

/// Increments at or below this magnitude count as zero when accumulating `N`.
pub const INCREMENT_FLOOR: f64 = 1e-12;

/// `D(n)` for `n = 0..=N` and the increments `Δ(n) = D(n) − D(n−1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSeries {
    values: Vec<f64>,
    increments: Vec<f64>,
}

impl DistanceSeries {
    /// Builds a series from raw distances, which must lie in `[0, 1]`.
    pub fn from_values(values: Vec<f64>) -> Option<Self> {
        if values.is_empty() || values.iter().any(|d| !(0.0..=1.0).contains(d)) {
            return None;
        }
        let increments = values.windows(2).map(|w| w[1] - w[0]).collect();
        Some(DistanceSeries { values, increments })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `increments()[k]` is `Δ(k + 1)`.
    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// `Δ(n)` for `n ≥ 1`.
    pub fn increment(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|k| self.increments.get(k).copied())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Steps `n` with `Δ(n) > INCREMENT_FLOOR`.
    pub fn rising_steps(&self) -> Vec<usize> {
        self.increments
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > INCREMENT_FLOOR)
            .map(|(k, _)| k + 1)
            .collect()
    }

    /// Interior strict local maxima `(n, D(n))`.
    pub fn local_maxima(&self) -> Vec<(usize, f64)> {
        self.local_extrema(|mid, side| mid > side)
    }

    /// Interior strict local minima `(n, D(n))`.
    pub fn local_minima(&self) -> Vec<(usize, f64)> {
        self.local_extrema(|mid, side| mid < side)
    }

    fn local_extrema(&self, better: impl Fn(f64, f64) -> bool) -> Vec<(usize, f64)> {
        self.values
            .windows(3)
            .enumerate()
            .filter(|(_, w)| better(w[1], w[0]) && better(w[1], w[2]))
            .map(|(k, w)| (k + 1, w[1]))
            .collect()
    }
}

/// `D(ρ_1(n), ρ_2(n))` along a trajectory.
pub fn distance_series(t: &Trajectory) -> DistanceSeries {
    DistanceSeries::from_values(t.distances()).expect("trace distances lie in [0, 1]")
}

/// Off-diagonal magnitude of `ρ` in the eigenbasis of a control.
///
/// `C_η = n·σ` with `n = (√(1−η), 0, √η)`, so the coherence between its
/// eigenvectors is half the Bloch-vector component orthogonal to `n`.
pub fn control_basis_coherence(rho: &DensityMatrix, control: &ControlSpec) -> f64 {
    let eta = control.eta();
    let n = [(1.0 - eta).sqrt(), 0.0, eta.sqrt()];
    let r = rho.bloch().0;
    let along: f64 = r.iter().zip(n).map(|(a, b)| a * b).sum();
    let perp: f64 = (0..3).map(|k| (r[k] - along * n[k]).powi(2)).sum();
    0.5 * perp.sqrt()
}

/// Cumulative non-Markovianity `N(n)` with the steps that contributed.
#[derive(Debug, Clone, PartialEq)]
pub struct NmReport {
    /// `N(n)` for `n = 0..=N`.
    pub cumulative: Vec<f64>,
    /// Steps whose increment was counted.
    pub contributing_steps: Vec<usize>,
    /// Optimizing antipodal pair as Bloch vectors, when a search ran.
    pub pair: Option<[BlochVector; 2]>,
    /// Hemisphere grid resolution of the search, when one ran.
    pub resolution: Option<usize>,
}

impl NmReport {
    /// `N` at the last step.
    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Fixed-pair lower bound: `N(n) = Σ_{k ≤ n, Δ(k) > 0} Δ(k)`.
pub fn blp_lower_bound(s: &DistanceSeries) -> NmReport {
    let mut cumulative = Vec::with_capacity(s.len());
    let mut contributing_steps = Vec::new();
    let mut total = 0.0;
    cumulative.push(total);
    for (k, &d) in s.increments().iter().enumerate() {
        if d > INCREMENT_FLOOR {
            total += d;
            contributing_steps.push(k + 1);
        }
        cumulative.push(total);
    }
    NmReport {
        cumulative,
        contributing_steps,
        pair: None,
        resolution: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coherence_matches_explicit_basis_change() {
        use crate::qmath::Mat2;
        use num_complex::Complex64 as C64;
        let control = ControlSpec::new(0.3).unwrap();
        let rho = DensityMatrix::from_bloch(BlochVector([0.3, -0.4, 0.5])).unwrap();
        // columns of v are the eigenvectors of the control
        let half = 0.5 * 0.3f64.sqrt().acos();
        let v = Mat2::real(half.cos(), -half.sin(), half.sin(), half.cos());
        let c = control.matrix();
        assert!((v.dagger() * c * v).max_abs_diff(&Mat2::diag(C64::new(1.0, 0.0), C64::new(-1.0, 0.0))) < 1e-12);
        let in_basis = v.dagger() * *rho.matrix() * v;
        assert!((in_basis.get(0, 1).norm() - control_basis_coherence(&rho, &control)).abs() < 1e-12);
    }

    #[test]
    fn blp_sums_positive_increments() {
        let s = DistanceSeries::from_values(vec![1.0, 0.2, 0.5, 0.3, 0.4]).unwrap();
        let r = blp_lower_bound(&s);
        let expected = [0.0, 0.0, 0.3, 0.3, 0.4];
        for (a, e) in r.cumulative.iter().zip(expected) {
            assert!((a - e).abs() < 1e-15, "{:?}", r.cumulative);
        }
        assert_eq!(r.contributing_steps, vec![2, 4]);
    }

    #[test]
    fn monotone_series_has_zero_measure() {
        let s = DistanceSeries::from_values(vec![1.0, 0.9, 0.9, 0.4, 0.1]).unwrap();
        let r = blp_lower_bound(&s);
        assert!(r.cumulative.iter().all(|&n| n == 0.0));
        assert!(r.contributing_steps.is_empty());
    }

    #[test]
    fn flicker_below_floor_is_ignored() {
        let s = DistanceSeries::from_values(vec![0.5, 0.5 + 1e-13, 0.5]).unwrap();
        assert_eq!(blp_lower_bound(&s).total(), 0.0);
    }

    #[test]
    fn rejects_out_of_range_distances() {
        assert!(DistanceSeries::from_values(vec![1.0, 1.2]).is_none());
        assert!(DistanceSeries::from_values(vec![]).is_none());
    }

    #[test]
    fn increments_are_consistent_with_values() {
        let s = DistanceSeries::from_values(vec![1.0, 0.25, 0.75, 0.5]).unwrap();
        for n in 1..s.len() {
            let d = s.increment(n).unwrap();
            assert!((d - (s.values()[n] - s.values()[n - 1])).abs() <= 1e-14);
        }
        assert_eq!(s.increment(0), None);
        assert_eq!(s.local_maxima(), vec![(2, 0.75)]);
        assert_eq!(s.local_minima(), vec![(1, 0.25)]);
    }
}
