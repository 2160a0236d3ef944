//! Frequency-quadrature backend.
//!
//! The coupling is diagonal in frequency, so the reduced dynamics is the
//! weighted average over grid nodes of the conditional unitary conjugation
//! `U_x(n) ρ U_x(n)†`, with `U_x(n) = Π_i D_x(ΔL_i) C_{η_i}` and
//! `D_x(ΔL) = diag(1, e^{i x 2π ΔL})`.

use std::ops::Range;

use num_complex::Complex64 as C64;

use super::reduce::tree_reduce;
use super::EngineError;
use crate::environment::FrequencyGrid;
use crate::protocol::Protocol;
use crate::qmath::{Mat2, Superoperator};

/// Pointwise unitarity tolerance on the conditional products.
const UNITARITY_TOL: f64 = 1e-12;

fn check_unitary(u: &Mat2, node: usize) -> Result<(), EngineError> {
    let err = (u.dagger() * *u).max_abs_diff(&Mat2::identity());
    if err > UNITARITY_TOL {
        return Err(EngineError::ContractViolation(format!(
            "conditional product at grid node {node} deviates from unitarity by {err:.3e}"
        )));
    }
    Ok(())
}

/// Calls `visit(step, U_x(step))` for `step = 1..=n` at scaled frequency `x`.
fn propagate(protocol: &Protocol, x: f64, mut visit: impl FnMut(usize, &Mat2)) -> Mat2 {
    let one = C64::new(1.0, 0.0);
    let mut u = Mat2::identity();
    for (k, step) in protocol.steps().iter().enumerate() {
        let plate = Mat2::diag(one, C64::from_polar(1.0, x * step.plate.phase()));
        u = plate * (step.control.matrix() * u);
        visit(k + 1, &u);
    }
    u
}

/// Weighted state sums `Σ_x w_x U_x(n) ρ_i U_x(n)†` for both initial states
/// and every `n`, index 0 holding the initial pair.
pub(crate) fn state_sums(protocol: &Protocol, grid: &FrequencyGrid) -> Result<Vec<[Mat2; 2]>, EngineError> {
    grid.check_nyquist(protocol.max_accumulated_phase())?;
    let n = protocol.len();
    let [r1, r2] = protocol.initial_pair().map(|r| *r.matrix());
    let nodes = grid.nodes();
    let weights = grid.weights();

    let leaf = |range: Range<usize>| -> Result<Vec<[Mat2; 2]>, EngineError> {
        let mut acc = vec![[Mat2::zero(); 2]; n + 1];
        for node in range {
            let w = weights[node];
            let u = propagate(protocol, nodes[node], |step, u| {
                acc[step][0] = acc[step][0] + u.conjugate(&r1).scale_re(w);
                acc[step][1] = acc[step][1] + u.conjugate(&r2).scale_re(w);
            });
            check_unitary(&u, node)?;
        }
        Ok(acc)
    };
    let combine = |a: Result<Vec<[Mat2; 2]>, EngineError>, b: Result<Vec<[Mat2; 2]>, EngineError>| {
        let (mut a, b) = (a?, b?);
        for (x, y) in a.iter_mut().zip(b) {
            x[0] = x[0] + y[0];
            x[1] = x[1] + y[1];
        }
        Ok(a)
    };
    let mut sums = tree_reduce(0..grid.len(), &leaf, &combine)?;
    sums[0] = [r1, r2];
    Ok(sums)
}

/// `Φ_n = Σ_x w_x conj(U_x(n)) ⊗ U_x(n)` for every `n`.
pub(crate) fn superoperators(protocol: &Protocol, grid: &FrequencyGrid) -> Result<Vec<Superoperator>, EngineError> {
    grid.check_nyquist(protocol.max_accumulated_phase())?;
    let n = protocol.len();
    let nodes = grid.nodes();
    let weights = grid.weights();

    let leaf = |range: Range<usize>| -> Result<Vec<Superoperator>, EngineError> {
        let mut acc = vec![Superoperator::zero(); n + 1];
        for node in range {
            let w = weights[node];
            let u = propagate(protocol, nodes[node], |step, u| {
                acc[step] = acc[step] + Superoperator::from_unitary(u).scale(w);
            });
            check_unitary(&u, node)?;
        }
        Ok(acc)
    };
    let combine = |a: Result<Vec<Superoperator>, EngineError>, b: Result<Vec<Superoperator>, EngineError>| {
        let (mut a, b) = (a?, b?);
        for (x, y) in a.iter_mut().zip(b) {
            *x = *x + y;
        }
        Ok(a)
    };
    let mut maps = tree_reduce(0..grid.len(), &leaf, &combine)?;
    maps[0] = Superoperator::identity();
    Ok(maps)
}
