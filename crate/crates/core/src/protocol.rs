//! Experiment protocols: the initial state pair and an ordered list of
//! operating units, each a local control followed by a dephasing plate.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::qmath::{DensityMatrix, Mat2};

/// Laboratory parameters of the wave-plate/quartz-plate experiment.
pub mod lab {
    /// Central wavelength, nm.
    pub const LAMBDA0_NM: f64 = 800.0;
    /// Spectral standard deviation, nm.
    pub const SIGMA_NM: f64 = 2.55;
    /// Spectral full width at half maximum, nm.
    pub const FWHM_NM: f64 = 6.0;
    /// Birefringence of quartz, `n_H − n_V`.
    pub const DELTA_N: f64 = 0.008995;
    /// Available quartz plate thicknesses, mm.
    pub const THICKNESSES_MM: [f64; 2] = [7.111, 10.667];
    /// Nominal path differences of the two plates, in units of `λ0`.
    pub const DELTA_LS: [f64; 2] = [80.0, 120.0];
    /// Half-wave plate angles, degrees.
    pub const ANGLES_DEG: [f64; 5] = [9.0, 18.0, 22.5, 28.0, 33.0];
    /// Control parameters matching [`ANGLES_DEG`], as tabulated.
    pub const ETAS: [f64; 5] = [0.9045, 0.6545, 0.5000, 0.3127, 0.1654];
    /// Operating units per run.
    pub const STEPS: usize = 20;
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("control parameter eta = {0} outside [0, 1]")]
    EtaOutOfRange(f64),
    #[error("wave-plate angle {0} deg outside [0, 45]")]
    AngleOutOfRange(f64),
    #[error("path difference {0} must be finite and non-negative")]
    NegativePathDifference(f64),
    #[error("plate parameters must be positive and finite (thickness {thickness_mm} mm, delta_n {delta_n}, lambda0 {lambda0_nm} nm)")]
    BadPlate {
        thickness_mm: f64,
        delta_n: f64,
        lambda0_nm: f64,
    },
    #[error("protocol needs at least one step")]
    NoSteps,
}

/// Local control `C_η = √η σ_z + √(1−η) σ_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSpec {
    eta: f64,
}

impl ControlSpec {
    pub fn new(eta: f64) -> Result<Self, ProtocolError> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(ProtocolError::EtaOutOfRange(eta));
        }
        Ok(ControlSpec { eta })
    }

    /// Control realized by a half-wave plate at `angle_deg`.
    pub fn from_angle(angle_deg: f64) -> Result<Self, ProtocolError> {
        Self::new(eta_from_angle(angle_deg)?)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Wave-plate angle `φ_η = ½ arccos(√η)` in degrees.
    pub fn angle_deg(&self) -> f64 {
        (0.5 * self.eta.sqrt().acos()).to_degrees()
    }

    pub fn matrix(&self) -> Mat2 {
        control_matrix(self)
    }
}

/// `√η σ_z + √(1−η) σ_x`; unitary and Hermitian for every `η ∈ [0, 1]`.
pub fn control_matrix(c: &ControlSpec) -> Mat2 {
    let a = c.eta.sqrt();
    let b = (1.0 - c.eta).sqrt();
    Mat2::real(a, b, b, -a)
}

/// `η = cos²(2φ)` for a wave-plate angle in degrees, `0 ≤ φ ≤ 45`.
pub fn eta_from_angle(angle_deg: f64) -> Result<f64, ProtocolError> {
    if !(0.0..=45.0).contains(&angle_deg) {
        return Err(ProtocolError::AngleOutOfRange(angle_deg));
    }
    let c = (2.0 * angle_deg.to_radians()).cos();
    Ok((c * c).clamp(0.0, 1.0))
}

/// `ΔL = Δn · L / λ0` in units of `λ0`.
pub fn delta_l_from_thickness(thickness_mm: f64, delta_n: f64, lambda0_nm: f64) -> f64 {
    delta_n * (thickness_mm * 1e6) / lambda0_nm
}

/// Dephasing plate with effective path difference `ΔL` in units of `λ0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateSpec {
    delta_l: f64,
}

impl PlateSpec {
    pub fn new(delta_l: f64) -> Result<Self, ProtocolError> {
        if !(delta_l >= 0.0 && delta_l.is_finite()) {
            return Err(ProtocolError::NegativePathDifference(delta_l));
        }
        Ok(PlateSpec { delta_l })
    }

    /// Plate of physical thickness `L` with birefringence `Δn`.
    pub fn from_thickness(thickness_mm: f64, delta_n: f64, lambda0_nm: f64) -> Result<Self, ProtocolError> {
        let ok = thickness_mm >= 0.0
            && delta_n > 0.0
            && lambda0_nm > 0.0
            && [thickness_mm, delta_n, lambda0_nm].iter().all(|x| x.is_finite());
        if !ok {
            return Err(ProtocolError::BadPlate {
                thickness_mm,
                delta_n,
                lambda0_nm,
            });
        }
        Self::new(delta_l_from_thickness(thickness_mm, delta_n, lambda0_nm))
    }

    pub fn delta_l(&self) -> f64 {
        self.delta_l
    }

    /// Relative phase per unit scaled frequency, `2π ΔL`.
    pub fn phase(&self) -> f64 {
        std::f64::consts::TAU * self.delta_l
    }
}

/// One operating unit: control first, then the plate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub control: ControlSpec,
    pub plate: PlateSpec,
}

impl Step {
    pub fn new(eta: f64, delta_l: f64) -> Result<Self, ProtocolError> {
        Ok(Step {
            control: ControlSpec::new(eta)?,
            plate: PlateSpec::new(delta_l)?,
        })
    }
}

/// An initial pair of states whose distinguishability is tracked.
pub type StatePair = [DensityMatrix; 2];

/// `{|H⟩⟨H|, |V⟩⟨V|}`.
pub fn default_pair() -> StatePair {
    [DensityMatrix::horizontal(), DensityMatrix::vertical()]
}

/// Named polarization states: `H`, `V`, `D`, `A`, `R`, `L`.
pub fn named_state(name: &str) -> Option<DensityMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (a0, a1) = match name {
        "H" => (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
        "V" => (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
        "D" => (C64::new(s, 0.0), C64::new(s, 0.0)),
        "A" => (C64::new(s, 0.0), C64::new(-s, 0.0)),
        "R" => (C64::new(s, 0.0), C64::new(0.0, -s)),
        "L" => (C64::new(s, 0.0), C64::new(0.0, s)),
        _ => return None,
    };
    DensityMatrix::pure(a0, a1).ok()
}

/// Ordered operating units applied to an initial state pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    steps: Vec<Step>,
    initial_pair: StatePair,
}

impl Protocol {
    pub fn new(steps: Vec<Step>, initial_pair: StatePair) -> Result<Self, ProtocolError> {
        if steps.is_empty() {
            return Err(ProtocolError::NoSteps);
        }
        Ok(Protocol { steps, initial_pair })
    }

    /// `n` identical operating units.
    pub fn uniform(eta: f64, delta_l: f64, n: usize, pair: StatePair) -> Result<Self, ProtocolError> {
        let step = Step::new(eta, delta_l)?;
        Self::new(vec![step; n], pair)
    }

    /// The laboratory configuration for a given control and plate: 20 steps
    /// from `{|H⟩, |V⟩}`.
    pub fn lab(eta: f64, delta_l: f64) -> Result<Self, ProtocolError> {
        Self::uniform(eta, delta_l, lab::STEPS, default_pair())
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn initial_pair(&self) -> &StatePair {
        &self.initial_pair
    }

    pub fn with_pair(&self, pair: StatePair) -> Self {
        Protocol {
            steps: self.steps.clone(),
            initial_pair: pair,
        }
    }

    /// First `n` steps.
    pub fn truncated(&self, n: usize) -> Result<Self, ProtocolError> {
        Self::new(self.steps[..n.min(self.steps.len())].to_vec(), self.initial_pair)
    }

    /// `Σ ΔL_i`.
    pub fn total_delta_l(&self) -> f64 {
        self.steps.iter().map(|s| s.plate.delta_l()).sum()
    }

    /// Largest relative phase any frequency component can accumulate.
    pub fn max_accumulated_phase(&self) -> f64 {
        std::f64::consts::TAU * self.total_delta_l()
    }

    /// Product of the controls alone, `C_n ⋯ C_1`.
    pub fn control_product(&self) -> Mat2 {
        self.steps
            .iter()
            .fold(Mat2::identity(), |acc, s| s.control.matrix() * acc)
    }

    /// True when every step shares the same control and plate.
    pub fn is_uniform(&self) -> bool {
        self.steps.windows(2).all(|w| w[0] == w[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eta(e: f64) -> Mat2 {
        ControlSpec::new(e).unwrap().matrix()
    }

    #[test]
    fn control_endpoints() {
        assert_eq!(eta(1.0), Mat2::sigma_z());
        assert_eq!(eta(0.0), Mat2::sigma_x());
    }

    #[test]
    fn half_control_is_hadamard() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(eta(0.5).max_abs_diff(&Mat2::real(s, s, s, -s)) < 1e-15);
    }

    #[test]
    fn control_rejects_out_of_range() {
        assert_eq!(ControlSpec::new(1.1), Err(ProtocolError::EtaOutOfRange(1.1)));
        assert_eq!(ControlSpec::new(-0.01), Err(ProtocolError::EtaOutOfRange(-0.01)));
        assert!(ControlSpec::new(f64::NAN).is_err());
    }

    #[test]
    fn lab_angles_reproduce_tabulated_etas() {
        for (angle, expected) in lab::ANGLES_DEG.iter().zip(lab::ETAS) {
            let e = eta_from_angle(*angle).unwrap();
            assert!((e - expected).abs() < 5e-5, "{angle}° -> {e}, table {expected}");
        }
    }

    #[test]
    fn angle_rejects_out_of_range() {
        assert_eq!(eta_from_angle(46.0), Err(ProtocolError::AngleOutOfRange(46.0)));
        assert!(eta_from_angle(-1.0).is_err());
    }

    #[test]
    fn lab_thicknesses_give_nominal_path_differences() {
        let dl80 = delta_l_from_thickness(7.111, lab::DELTA_N, lab::LAMBDA0_NM);
        let dl120 = delta_l_from_thickness(10.667, lab::DELTA_N, lab::LAMBDA0_NM);
        assert!((dl80 - 79.955).abs() < 0.01, "{dl80}");
        assert!((dl120 - 119.937).abs() < 0.01, "{dl120}");
        assert!((dl80 - 80.0).abs() < 0.05 && (dl120 - 120.0).abs() < 0.1);
        assert_eq!(delta_l_from_thickness(0.0, lab::DELTA_N, lab::LAMBDA0_NM), 0.0);
        let plate = PlateSpec::from_thickness(7.111, lab::DELTA_N, lab::LAMBDA0_NM).unwrap();
        assert!((plate.delta_l() - lab::DELTA_N * 7.111e6 / 800.0).abs() / plate.delta_l() < 1e-12);
    }

    #[test]
    fn plate_rejects_negative_path() {
        assert!(PlateSpec::new(-1.0).is_err());
        assert!(PlateSpec::new(f64::INFINITY).is_err());
        assert!(PlateSpec::from_thickness(1.0, -0.1, 800.0).is_err());
    }

    #[test]
    fn uniform_protocols() {
        let p = Protocol::uniform(0.5, 120.0, 20, default_pair()).unwrap();
        assert_eq!(p.len(), 20);
        assert!(p.is_uniform());
        assert!((p.total_delta_l() - 2400.0).abs() < 1e-9);
        assert_eq!(Protocol::uniform(0.5, 120.0, 0, default_pair()), Err(ProtocolError::NoSteps));
        // η = 0 pairs of steps: control product is σx² = I
        let echo = Protocol::uniform(0.0, 120.0, 2, default_pair()).unwrap();
        assert!(echo.control_product().max_abs_diff(&Mat2::identity()) < 1e-15);
    }

    #[test]
    fn named_states_are_pure() {
        for name in ["H", "V", "D", "A", "R", "L"] {
            let rho = named_state(name).unwrap();
            let b = rho.bloch();
            assert!((b.norm() - 1.0).abs() < 1e-12, "{name}");
        }
        assert!(named_state("X").is_none());
        assert_eq!(named_state("H").unwrap().bloch().0, [0.0, 0.0, 1.0]);
    }
}
