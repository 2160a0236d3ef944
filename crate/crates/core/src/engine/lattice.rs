//! Exact lattice backend.
//!
//! When every plate is an integer multiple `l_i` of a common path difference
//! `ΔL_b`, the conditional unitary is a polynomial in `z = e^{i x 2π ΔL_b}`:
//! `U_x(n) = Σ_m K_m z^m`. The frequency average then collapses to
//! `ρ(n) = Σ_{m,m'} f((m − m') θ_b) K_m ρ(0) K_{m'}†` with the closed-form
//! characteristic function `f`, leaving no discretization error.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;

use super::EngineError;
use crate::environment::SpectralModel;
use crate::protocol::Protocol;
use crate::qmath::{Mat2, Superoperator};

/// Default cap on the lattice size `M = Σ l_i`.
pub const DEFAULT_CAP: usize = 10_000;
/// Relative tolerance for `ΔL_i = l_i ΔL_b`.
pub const COMMENSURATE_TOL: f64 = 1e-9;
/// Lag terms whose characteristic-function envelope falls below this are
/// dropped; each term is bounded by the envelope, so the neglected mass is
/// below rounding.
const LAG_CUTOFF: f64 = 1e-20;
/// Rounding drift in the coefficients is removed at this step interval.
const REORTHONORMALIZE_EVERY: usize = 64;

/// Integer decomposition `ΔL_i = l_i ΔL_b` of a protocol's plates.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub base_delta_l: f64,
    pub multiples: Vec<usize>,
}

impl Lattice {
    pub fn size(&self) -> usize {
        self.multiples.iter().sum()
    }

    pub fn base_phase(&self) -> f64 {
        TAU * self.base_delta_l
    }
}

/// Finds the coarsest common base for the protocol's plates whose total
/// lattice size stays within `cap`.
pub fn commensurate_lattice(protocol: &Protocol, cap: usize) -> Result<Lattice, EngineError> {
    let dls: Vec<f64> = protocol.steps().iter().map(|s| s.plate.delta_l()).collect();
    let smallest = dls.iter().copied().filter(|&d| d > 0.0).fold(f64::INFINITY, f64::min);
    if !smallest.is_finite() {
        return Ok(Lattice {
            base_delta_l: 0.0,
            multiples: vec![0; dls.len()],
        });
    }
    for divisor in 1..=cap.max(1) {
        let base = smallest / divisor as f64;
        let mut multiples = Vec::with_capacity(dls.len());
        let mut fits = true;
        for &d in &dls {
            let l = (d / base).round();
            if (d - l * base).abs() > COMMENSURATE_TOL * d {
                fits = false;
                break;
            }
            multiples.push(l as usize);
        }
        if !fits {
            continue;
        }
        let size: usize = multiples.iter().sum();
        if size > cap {
            break;
        }
        // least-squares base over all plates
        let base = dls.iter().sum::<f64>() / size as f64;
        return Ok(Lattice {
            base_delta_l: base,
            multiples,
        });
    }
    Err(EngineError::Incommensurate {
        cap,
        delta_ls: dls,
    })
}

/// Coefficients `K_m` of `U_x(n) = Σ_m K_m z^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePolynomial {
    coeffs: Vec<Mat2>,
    base_phase: f64,
}

impl PhasePolynomial {
    pub fn identity(base_phase: f64) -> Self {
        PhasePolynomial {
            coeffs: vec![Mat2::identity()],
            base_phase,
        }
    }

    pub fn coefficients(&self) -> &[Mat2] {
        &self.coeffs
    }

    pub fn base_phase(&self) -> f64 {
        self.base_phase
    }

    /// `K_m ← C K_m`.
    pub fn apply_control(&mut self, c: &Mat2) {
        for k in &mut self.coeffs {
            *k = *c * *k;
        }
    }

    /// `diag(1, z^l)`: the bottom row of `K_m` moves to `K_{m+l}`.
    pub fn apply_plate(&mut self, multiple: usize) {
        if multiple == 0 {
            return;
        }
        let old = self.coeffs.len();
        self.coeffs.resize(old + multiple, Mat2::zero());
        for m in (0..old + multiple).rev() {
            let bottom = if m >= multiple {
                [self.coeffs[m - multiple].0[1][0], self.coeffs[m - multiple].0[1][1]]
            } else {
                [C64::new(0.0, 0.0); 2]
            };
            self.coeffs[m].0[1] = bottom;
        }
    }

    /// Right-multiplies every coefficient by `I − ½(G − I)` with
    /// `G = Σ K_m† K_m`, removing first-order drift from completeness.
    pub fn reorthonormalize(&mut self) {
        let gram = self
            .coeffs
            .iter()
            .fold(Mat2::zero(), |acc, k| acc + k.dagger() * *k);
        let fix = Mat2::identity() - (gram - Mat2::identity()).scale_re(0.5);
        for k in &mut self.coeffs {
            *k = *k * fix;
        }
    }

    /// Largest entry of `Σ_m K_m† K_m − I`.
    pub fn completeness_error(&self) -> f64 {
        self.coeffs
            .iter()
            .fold(Mat2::zero(), |acc, k| acc + k.dagger() * *k)
            .max_abs_diff(&Mat2::identity())
    }

    /// Evaluate at scaled frequency `x`.
    pub fn evaluate(&self, x: f64) -> Mat2 {
        let z = C64::from_polar(1.0, x * self.base_phase);
        // Horner from the highest power
        self.coeffs
            .iter()
            .rev()
            .fold(Mat2::zero(), |acc, k| acc.scale(z) + *k)
    }

    fn max_lag(&self, model: &SpectralModel) -> usize {
        let top = self.coeffs.len().saturating_sub(1);
        if self.base_phase == 0.0 {
            return top;
        }
        (1..=top)
            .find(|&d| model.envelope(d as f64 * self.base_phase) < LAG_CUTOFF)
            .map_or(top, |d| d - 1)
    }

    /// `Σ_{m,m'} f((m − m') θ_b) K_m ρ K_{m'}†`.
    pub fn average_state(&self, model: &SpectralModel, rho: &Mat2) -> Mat2 {
        let len = self.coeffs.len();
        let mut out = Mat2::zero();
        for k in &self.coeffs {
            out = out + k.conjugate(rho);
        }
        for lag in 1..=self.max_lag(model) {
            let f = model.characteristic(lag as f64 * self.base_phase);
            let mut cross = Mat2::zero();
            for m in 0..len - lag {
                cross = cross + self.coeffs[m + lag] * *rho * self.coeffs[m].dagger();
            }
            // lag -lag is the adjoint term
            let term = cross.scale(f);
            out = out + term + term.dagger();
        }
        out
    }

    /// `Σ_{m,m'} f((m − m') θ_b) conj(K_{m'}) ⊗ K_m`.
    pub fn average_superoperator(&self, model: &SpectralModel) -> Superoperator {
        let len = self.coeffs.len();
        let mut out = Superoperator::zero();
        for k in &self.coeffs {
            out = out + Superoperator::from_unitary(k);
        }
        for lag in 1..=self.max_lag(model) {
            let f = model.characteristic(lag as f64 * self.base_phase);
            let mut forward = Superoperator::zero();
            let mut backward = Superoperator::zero();
            for m in 0..len - lag {
                forward = forward + Superoperator::sandwich(&self.coeffs[m + lag], &self.coeffs[m]);
                backward = backward + Superoperator::sandwich(&self.coeffs[m], &self.coeffs[m + lag]);
            }
            out = out + forward.scale_complex(f) + backward.scale_complex(f.conj());
        }
        out
    }
}

/// Steps the phase polynomial through a protocol, yielding it after each step.
pub(crate) struct LatticeRun<'a> {
    protocol: &'a Protocol,
    lattice: Lattice,
    poly: PhasePolynomial,
    step: usize,
}

impl<'a> LatticeRun<'a> {
    pub(crate) fn new(protocol: &'a Protocol, cap: usize) -> Result<Self, EngineError> {
        let lattice = commensurate_lattice(protocol, cap)?;
        let poly = PhasePolynomial::identity(lattice.base_phase());
        Ok(LatticeRun {
            protocol,
            lattice,
            poly,
            step: 0,
        })
    }

    pub(crate) fn poly(&self) -> &PhasePolynomial {
        &self.poly
    }

    pub(crate) fn step(&self) -> usize {
        self.step
    }

    /// Advance one operating unit; `false` once the protocol is exhausted.
    pub(crate) fn advance(&mut self) -> bool {
        let Some(step) = self.protocol.steps().get(self.step) else {
            return false;
        };
        self.poly.apply_control(&step.control.matrix());
        self.poly.apply_plate(self.lattice.multiples[self.step]);
        self.step += 1;
        if self.step % REORTHONORMALIZE_EVERY == 0 {
            self.poly.reorthonormalize();
        }
        true
    }

    pub(crate) fn check_completeness(&self, tol: f64) -> Result<(), EngineError> {
        let err = self.poly.completeness_error();
        if err > tol {
            return Err(EngineError::ContractViolation(format!(
                "phase polynomial completeness violated by {err:.3e} after step {}",
                self.step
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{default_pair, Step};

    #[test]
    fn uniform_protocol_has_unit_multiples() {
        let p = Protocol::uniform(0.5, 120.0, 20, default_pair()).unwrap();
        let l = commensurate_lattice(&p, DEFAULT_CAP).unwrap();
        assert_eq!(l.base_delta_l, 120.0);
        assert_eq!(l.multiples, vec![1; 20]);
    }

    #[test]
    fn mixed_plates_share_a_common_base() {
        let steps = vec![Step::new(0.5, 80.0).unwrap(), Step::new(0.5, 120.0).unwrap(), Step::new(0.2, 0.0).unwrap()];
        let p = Protocol::new(steps, default_pair()).unwrap();
        let l = commensurate_lattice(&p, DEFAULT_CAP).unwrap();
        assert!((l.base_delta_l - 40.0).abs() < 1e-12);
        assert_eq!(l.multiples, vec![2, 3, 0]);
    }

    #[test]
    fn incommensurate_plates_are_rejected() {
        let steps = vec![Step::new(0.5, 1.0).unwrap(), Step::new(0.5, std::f64::consts::SQRT_2).unwrap()];
        let p = Protocol::new(steps, default_pair()).unwrap();
        assert!(matches!(
            commensurate_lattice(&p, 100),
            Err(EngineError::Incommensurate { cap: 100, .. })
        ));
    }

    #[test]
    fn polynomial_matches_direct_product_pointwise() {
        let p = Protocol::uniform(0.6545, 120.0, 6, default_pair()).unwrap();
        let mut run = LatticeRun::new(&p, DEFAULT_CAP).unwrap();
        while run.advance() {}
        for x in [0.99, 1.0, 1.0031] {
            let mut u = Mat2::identity();
            for s in p.steps() {
                let d = Mat2::diag(C64::new(1.0, 0.0), C64::from_polar(1.0, x * s.plate.phase()));
                u = d * s.control.matrix() * u;
            }
            let err = run.poly().evaluate(x).max_abs_diff(&u);
            assert!(err < 1e-10, "x = {x}: {err:e}");
        }
        assert!(run.poly().completeness_error() < 1e-12);
    }
}
