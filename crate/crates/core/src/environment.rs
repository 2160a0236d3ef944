//! Frequency environment of the photon: the spectral density `|χ(ω)|²`, its
//! characteristic function, and quadrature grids for frequency averages.
//!
//! Spectra are specified in wavelength and mapped to Gaussians in angular
//! frequency by first-order linearization around each component center.
//! Internally frequencies are dimensionless, `x = ω/ω0` with
//! `ω0 = 2πc/λ0`, and delays are phases `θ = ω0 τ`. A plate with effective
//! path difference `ΔL` (in units of `λ0`) contributes `θ = 2π ΔL`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// `FWHM / σ` for a Gaussian, `2√(2 ln 2)`.
pub fn fwhm_to_sigma_factor() -> f64 {
    2.0 * (2.0 * std::f64::consts::LN_2).sqrt()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvironmentError {
    #[error("spectral model has no components")]
    Empty,
    #[error("component {index}: weight {weight} must be positive")]
    NonPositiveWeight { index: usize, weight: f64 },
    #[error("component weights sum to {0}, expected 1")]
    WeightsNotNormalized(f64),
    #[error("component {index}: center and width must be positive and finite (center {center_nm} nm, sigma {sigma_nm} nm)")]
    BadComponent {
        index: usize,
        center_nm: f64,
        sigma_nm: f64,
    },
    #[error("reference wavelength must be positive, got {0} nm")]
    BadReference(f64),
    #[error("grid needs an odd node count of at least 3, got {0}")]
    BadNodeCount(usize),
    #[error("grid span must be positive, got {0} sigmas")]
    BadSpan(f64),
    #[error(
        "frequency grid too coarse for accumulated phase {max_phase:.6e}: \
         spacing x phase = {product:.4} must stay below pi/4; use at least {required_nodes} nodes"
    )]
    Nyquist {
        max_phase: f64,
        product: f64,
        required_nodes: usize,
    },
}

/// One Gaussian line of the spectrum, in wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralComponent {
    pub weight: f64,
    pub center_nm: f64,
    pub sigma_nm: f64,
}

/// A Gaussian component in angular frequency (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyComponent {
    pub weight: f64,
    pub center: f64,
    pub sigma: f64,
}

/// A Gaussian component in units of the reference frequency `ω0`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ScaledComponent {
    weight: f64,
    center: f64,
    sigma: f64,
}

/// Spectral density `|χ(ω)|²` as a normalized mixture of Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    components: Vec<SpectralComponent>,
    lambda0_nm: f64,
    scaled: Vec<ScaledComponent>,
}

impl SpectralModel {
    pub fn new(components: Vec<SpectralComponent>, lambda0_nm: f64) -> Result<Self, EnvironmentError> {
        if components.is_empty() {
            return Err(EnvironmentError::Empty);
        }
        if !(lambda0_nm > 0.0 && lambda0_nm.is_finite()) {
            return Err(EnvironmentError::BadReference(lambda0_nm));
        }
        for (index, c) in components.iter().enumerate() {
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                return Err(EnvironmentError::NonPositiveWeight {
                    index,
                    weight: c.weight,
                });
            }
            let ok = c.center_nm > 0.0 && c.sigma_nm > 0.0 && c.center_nm.is_finite() && c.sigma_nm.is_finite();
            if !ok {
                return Err(EnvironmentError::BadComponent {
                    index,
                    center_nm: c.center_nm,
                    sigma_nm: c.sigma_nm,
                });
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(EnvironmentError::WeightsNotNormalized(total));
        }
        let scaled = components
            .iter()
            .map(|c| ScaledComponent {
                weight: c.weight,
                center: lambda0_nm / c.center_nm,
                sigma: c.sigma_nm * lambda0_nm / (c.center_nm * c.center_nm),
            })
            .collect();
        Ok(SpectralModel {
            components,
            lambda0_nm,
            scaled,
        })
    }

    /// Single Gaussian centered on the reference wavelength.
    pub fn gaussian(lambda0_nm: f64, sigma_nm: f64) -> Result<Self, EnvironmentError> {
        Self::new(
            vec![SpectralComponent {
                weight: 1.0,
                center_nm: lambda0_nm,
                sigma_nm,
            }],
            lambda0_nm,
        )
    }

    /// Single Gaussian specified by its full width at half maximum.
    pub fn gaussian_fwhm(lambda0_nm: f64, fwhm_nm: f64) -> Result<Self, EnvironmentError> {
        Self::gaussian(lambda0_nm, fwhm_nm / fwhm_to_sigma_factor())
    }

    /// The laboratory spectrum: 800 nm center, σ = 2.55 nm.
    pub fn lab_default() -> Self {
        Self::gaussian(crate::protocol::lab::LAMBDA0_NM, crate::protocol::lab::SIGMA_NM)
            .expect("lab spectrum is valid")
    }

    pub fn components(&self) -> &[SpectralComponent] {
        &self.components
    }

    pub fn lambda0_nm(&self) -> f64 {
        self.lambda0_nm
    }

    /// Reference angular frequency `ω0 = 2πc/λ0`, rad/s.
    pub fn omega0(&self) -> f64 {
        TAU * SPEED_OF_LIGHT / (self.lambda0_nm * 1e-9)
    }

    /// Components as Gaussians in angular frequency:
    /// `ω_c = 2πc/λ_c`, `σ_ω = 2πc σ_λ/λ_c²`.
    pub fn to_frequency(&self) -> Vec<FrequencyComponent> {
        self.components
            .iter()
            .map(|c| {
                let lc = c.center_nm * 1e-9;
                FrequencyComponent {
                    weight: c.weight,
                    center: TAU * SPEED_OF_LIGHT / lc,
                    sigma: TAU * SPEED_OF_LIGHT * (c.sigma_nm * 1e-9) / (lc * lc),
                }
            })
            .collect()
    }

    /// `f(θ) = ∫ |χ(x)|² e^{ixθ} dx` for a dimensionless delay phase
    /// `θ = ω0 τ`.
    pub fn characteristic(&self, phase: f64) -> C64 {
        self.scaled
            .iter()
            .map(|c| {
                let envelope = (-0.5 * (c.sigma * phase).powi(2)).exp();
                C64::from_polar(c.weight * envelope, c.center * phase)
            })
            .sum()
    }

    /// Characteristic function at a physical delay `τ` in seconds.
    pub fn characteristic_time(&self, tau_s: f64) -> C64 {
        self.characteristic(self.omega0() * tau_s)
    }

    /// Characteristic function at the delay of a path difference `ΔL`
    /// (units of `λ0`).
    pub fn characteristic_path(&self, delta_l: f64) -> C64 {
        self.characteristic(TAU * delta_l)
    }

    /// `Σ_j w_j exp(−σ_j² θ²/2)`: a bound on `|f(θ)|`, non-increasing in `|θ|`.
    pub fn envelope(&self, phase: f64) -> f64 {
        self.scaled
            .iter()
            .map(|c| c.weight * (-0.5 * (c.sigma * phase).powi(2)).exp())
            .sum()
    }

    /// Density `|χ(x)|²` in the scaled frequency `x = ω/ω0`.
    pub fn density(&self, x: f64) -> f64 {
        self.scaled
            .iter()
            .map(|c| {
                let z = (x - c.center) / c.sigma;
                c.weight * (-0.5 * z * z).exp() / (c.sigma * (TAU).sqrt())
            })
            .sum()
    }

    /// Scaled-frequency interval `[min(c − span σ), max(c + span σ)]`.
    pub fn support(&self, span_sigmas: f64) -> (f64, f64) {
        let lo = self
            .scaled
            .iter()
            .map(|c| c.center - span_sigmas * c.sigma)
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .scaled
            .iter()
            .map(|c| c.center + span_sigmas * c.sigma)
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// Normalized quadrature of `|χ(x)|²` on a uniform grid in `x = ω/ω0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    spacing: f64,
    span_sigmas: f64,
}

/// Default number of grid nodes.
pub const DEFAULT_NODES: usize = 4097;
/// Default half-width of the grid in component standard deviations.
pub const DEFAULT_SPAN_SIGMAS: f64 = 8.0;

impl FrequencyGrid {
    /// Uniform trapezoid grid over the model support, weights proportional
    /// to `|χ|²` and renormalized to sum to one.
    pub fn build(model: &SpectralModel, n_nodes: usize, span_sigmas: f64) -> Result<Self, EnvironmentError> {
        if n_nodes < 3 || n_nodes % 2 == 0 {
            return Err(EnvironmentError::BadNodeCount(n_nodes));
        }
        if !(span_sigmas > 0.0 && span_sigmas.is_finite()) {
            return Err(EnvironmentError::BadSpan(span_sigmas));
        }
        let (lo, hi) = model.support(span_sigmas);
        let intervals = (n_nodes - 1) as f64;
        let spacing = (hi - lo) / intervals;
        let mid = (n_nodes - 1) / 2;
        let center = 0.5 * (lo + hi);
        // offsets from the midpoint keep the grid exactly symmetric
        let nodes: Vec<f64> = (0..n_nodes)
            .map(|k| center + (k as f64 - mid as f64) * spacing)
            .collect();
        let mut weights: Vec<f64> = nodes
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let trap = if k == 0 || k == n_nodes - 1 { 0.5 } else { 1.0 };
                trap * spacing * model.density(x)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Ok(FrequencyGrid {
            nodes,
            weights,
            spacing,
            span_sigmas,
        })
    }

    pub fn with_defaults(model: &SpectralModel) -> Result<Self, EnvironmentError> {
        Self::build(model, DEFAULT_NODES, DEFAULT_SPAN_SIGMAS)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn span_sigmas(&self) -> f64 {
        self.span_sigmas
    }

    /// Quadrature estimate of the characteristic function.
    pub fn characteristic(&self, phase: f64) -> C64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| C64::from_polar(w, x * phase))
            .sum()
    }

    /// Requires `spacing × max_phase < π/4` so the per-node phases resolve
    /// the oscillation across the distribution.
    pub fn check_nyquist(&self, max_phase: f64) -> Result<(), EnvironmentError> {
        let product = self.spacing * max_phase.abs();
        if product < PI / 4.0 {
            return Ok(());
        }
        let width = self.spacing * (self.nodes.len() - 1) as f64;
        let mut required = (width * max_phase.abs() / (PI / 4.0)).ceil() as usize + 2;
        if required % 2 == 0 {
            required += 1;
        }
        Err(EnvironmentError::Nyquist {
            max_phase,
            product,
            required_nodes: required,
        })
    }
}
