//! Reduced qubit trajectories and dynamical maps under a [`Protocol`].
//!
//! Two independent backends compute the same quantities:
//!
//! - [`Backend::Quadrature`] averages conditional unitaries over a frequency
//!   grid and works for any spectrum and any plate sequence;
//! - [`Backend::Lattice`] expands the conditional unitary as a polynomial in
//!   the plate phase and sums it exactly against the closed-form
//!   characteristic function; it needs commensurate plates.
//!
//! Their agreement is the main correctness check of the crate.

pub mod lattice;
mod quadrature;
pub mod reduce;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::{EnvironmentError, FrequencyGrid, SpectralModel, DEFAULT_NODES, DEFAULT_SPAN_SIGMAS};
use crate::protocol::{Protocol, StatePair};
use crate::qmath::{trace_distance, DensityMatrix, Mat2, QmathError, Superoperator, Tolerances};

pub use lattice::{commensurate_lattice, Lattice, PhasePolynomial};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Environment(#[from] EnvironmentError),
    #[error(
        "plate path differences {delta_ls:?} are not integer multiples of a common base \
         within a lattice of size {cap}; use the quadrature backend or raise the lattice cap"
    )]
    Incommensurate { cap: usize, delta_ls: Vec<f64> },
    #[error("step {step}, state {which}: {source}")]
    InvalidState {
        step: usize,
        which: usize,
        source: QmathError,
    },
    #[error("numerical contract violated: {0}")]
    ContractViolation(String),
    #[error("step {requested} out of range for a {steps}-step protocol")]
    StepOutOfRange { requested: usize, steps: usize },
}

/// Which backend computes the reduced dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Backend {
    Quadrature { nodes: usize, span_sigmas: f64 },
    Lattice { cap: usize },
}

impl Backend {
    pub fn quadrature() -> Self {
        Backend::Quadrature {
            nodes: DEFAULT_NODES,
            span_sigmas: DEFAULT_SPAN_SIGMAS,
        }
    }

    pub fn lattice() -> Self {
        Backend::Lattice {
            cap: lattice::DEFAULT_CAP,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Backend::Quadrature { .. } => "quadrature",
            Backend::Lattice { .. } => "lattice",
        }
    }
}

impl Default for Backend {
    fn default() -> Self {
        Backend::lattice()
    }
}

/// Reduced states of both members of the initial pair at every step;
/// index 0 is the initial pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    states: Vec<StatePair>,
    protocol: Protocol,
    backend: Backend,
}

impl Trajectory {
    pub fn states(&self) -> &[StatePair] {
        &self.states
    }

    pub fn protocol(&self) -> &Protocol {
        &self.protocol
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `D(ρ_1(n), ρ_2(n))` for every step.
    pub fn distances(&self) -> Vec<f64> {
        self.states.iter().map(|[a, b]| trace_distance(a, b)).collect()
    }
}

fn validate_pairs(sums: Vec<[Mat2; 2]>) -> Result<Vec<StatePair>, EngineError> {
    let tol = Tolerances::default();
    sums.into_iter()
        .enumerate()
        .map(|(step, [a, b])| {
            let check = |m: Mat2, which: usize| {
                DensityMatrix::with_tolerances(m, &tol).map_err(|source| EngineError::InvalidState { step, which, source })
            };
            Ok([check(a, 0)?, check(b, 1)?])
        })
        .collect()
}

/// Quadrature backend on an explicit grid.
pub fn evolve_quadrature(protocol: &Protocol, grid: &FrequencyGrid) -> Result<Trajectory, EngineError> {
    let sums = quadrature::state_sums(protocol, grid)?;
    Ok(Trajectory {
        states: validate_pairs(sums)?,
        protocol: protocol.clone(),
        backend: Backend::Quadrature {
            nodes: grid.len(),
            span_sigmas: grid.span_sigmas(),
        },
    })
}

/// Lattice backend with a cap on the lattice size.
pub fn evolve_lattice(protocol: &Protocol, model: &SpectralModel, cap: usize) -> Result<Trajectory, EngineError> {
    let [r1, r2] = protocol.initial_pair().map(|r| *r.matrix());
    let mut run = lattice::LatticeRun::new(protocol, cap)?;
    let mut sums = Vec::with_capacity(protocol.len() + 1);
    sums.push([r1, r2]);
    while run.advance() {
        let poly = run.poly();
        sums.push([poly.average_state(model, &r1), poly.average_state(model, &r2)]);
    }
    run.check_completeness(Tolerances::default().invariant)?;
    Ok(Trajectory {
        states: validate_pairs(sums)?,
        protocol: protocol.clone(),
        backend: Backend::Lattice { cap },
    })
}

/// Lattice-backend states at selected steps only (sorted, deduplicated),
/// for long protocols where the full trajectory is not needed.
pub fn lattice_states_at(
    protocol: &Protocol,
    model: &SpectralModel,
    cap: usize,
    steps: &[usize],
) -> Result<Vec<(usize, StatePair)>, EngineError> {
    let mut wanted: Vec<usize> = steps.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    if let Some(&last) = wanted.last() {
        if last > protocol.len() {
            return Err(EngineError::StepOutOfRange {
                requested: last,
                steps: protocol.len(),
            });
        }
    }
    let [r1, r2] = protocol.initial_pair().map(|r| *r.matrix());
    let mut run = lattice::LatticeRun::new(protocol, cap)?;
    let mut out = Vec::with_capacity(wanted.len());
    let mut sums = Vec::new();
    for &target in &wanted {
        while run.step() < target {
            run.advance();
        }
        let poly = run.poly();
        sums.push([poly.average_state(model, &r1), poly.average_state(model, &r2)]);
    }
    run.check_completeness(Tolerances::default().invariant)?;
    for (step, pair) in wanted.into_iter().zip(validate_pairs(sums)?) {
        out.push((step, pair));
    }
    Ok(out)
}

/// Trajectory with the chosen backend.
pub fn evolve(protocol: &Protocol, model: &SpectralModel, backend: &Backend) -> Result<Trajectory, EngineError> {
    match *backend {
        Backend::Quadrature { nodes, span_sigmas } => {
            let grid = FrequencyGrid::build(model, nodes, span_sigmas)?;
            evolve_quadrature(protocol, &grid)
        }
        Backend::Lattice { cap } => evolve_lattice(protocol, model, cap),
    }
}

/// `Φ_0, …, Φ_N` with the chosen backend.
pub fn superoperators(protocol: &Protocol, model: &SpectralModel, backend: &Backend) -> Result<Vec<Superoperator>, EngineError> {
    match *backend {
        Backend::Quadrature { nodes, span_sigmas } => {
            let grid = FrequencyGrid::build(model, nodes, span_sigmas)?;
            quadrature::superoperators(protocol, &grid)
        }
        Backend::Lattice { cap } => {
            let mut run = lattice::LatticeRun::new(protocol, cap)?;
            let mut maps = Vec::with_capacity(protocol.len() + 1);
            maps.push(Superoperator::identity());
            while run.advance() {
                maps.push(run.poly().average_superoperator(model));
            }
            run.check_completeness(Tolerances::default().invariant)?;
            Ok(maps)
        }
    }
}

/// `Φ_n` with the chosen backend.
pub fn superoperator_at(protocol: &Protocol, model: &SpectralModel, n: usize, backend: &Backend) -> Result<Superoperator, EngineError> {
    if n > protocol.len() {
        return Err(EngineError::StepOutOfRange {
            requested: n,
            steps: protocol.len(),
        });
    }
    if n == 0 {
        return Ok(Superoperator::identity());
    }
    let head = protocol.truncated(n).expect("n >= 1");
    let maps = superoperators(&head, model, backend)?;
    Ok(maps[n])
}

/// Result of dividing `Φ_n` by `Φ_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntermediateMap {
    /// `Φ_{n←m} = Φ_n Φ_m⁻¹`, with the condition number of `Φ_m`.
    Regular { map: Superoperator, condition: f64 },
    /// `Φ_m` is numerically singular; no map is fabricated.
    Singular { smallest: f64, largest: f64 },
}

impl IntermediateMap {
    pub fn map(&self) -> Option<&Superoperator> {
        match self {
            IntermediateMap::Regular { map, .. } => Some(map),
            IntermediateMap::Singular { .. } => None,
        }
    }
}

/// `Φ_{n←m} = Φ_n Φ_m⁻¹`, flagged singular when the smallest singular
/// value of `Φ_m` is below `rel_threshold` times the largest.
pub fn intermediate_map(phi_n: &Superoperator, phi_m: &Superoperator, rel_threshold: f64) -> IntermediateMap {
    let sv = phi_m.singular_values();
    let (largest, smallest) = (sv[0], sv[3]);
    if !(smallest >= rel_threshold * largest) || largest == 0.0 {
        return IntermediateMap::Singular { smallest, largest };
    }
    match phi_m.inverse() {
        Some(inv) => IntermediateMap::Regular {
            map: *phi_n * inv,
            condition: largest / smallest,
        },
        None => IntermediateMap::Singular { smallest, largest },
    }
}

/// Largest per-step, per-component Bloch-vector difference between two
/// trajectories of the same protocol.
pub fn max_bloch_discrepancy(a: &Trajectory, b: &Trajectory) -> f64 {
    a.states()
        .iter()
        .zip(b.states())
        .flat_map(|(pa, pb)| {
            (0..2).flat_map(move |i| {
                let (ba, bb) = (pa[i].bloch(), pb[i].bloch());
                (0..3).map(move |k| (ba.0[k] - bb.0[k]).abs())
            })
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::default_pair;

    fn lab() -> SpectralModel {
        SpectralModel::lab_default()
    }

    #[test]
    fn single_hadamard_step_contracts_by_characteristic_magnitude() {
        let p = Protocol::uniform(0.5, 120.0, 1, default_pair()).unwrap();
        let t = evolve_lattice(&p, &lab(), lattice::DEFAULT_CAP).unwrap();
        let d = t.distances();
        let f = lab().characteristic_path(120.0).norm();
        assert!((d[1] - f).abs() < 1e-12, "{} vs {f}", d[1]);
        assert!((f - 0.0557).abs() < 5e-5);
    }

    #[test]
    fn no_coupling_is_a_pure_rotation() {
        let p = Protocol::uniform(0.3, 0.0, 5, default_pair()).unwrap();
        let grid = FrequencyGrid::build(&lab(), 101, 8.0).unwrap();
        let q = evolve_quadrature(&p, &grid).unwrap();
        let l = evolve_lattice(&p, &lab(), 10).unwrap();
        let c = p.truncated(5).unwrap().control_product();
        let expected = c.conjugate(DensityMatrix::horizontal().matrix());
        assert!(q.states()[5][0].matrix().max_abs_diff(&expected) < 1e-12);
        assert!(l.states()[5][0].matrix().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn pure_dephasing_matches_closed_form() {
        // η = 1: coherences decay as f(nθ), populations untouched
        let d = DensityMatrix::pure(1.0.into(), 1.0.into()).unwrap();
        let p = Protocol::uniform(1.0, 80.0, 4, [d, DensityMatrix::vertical()]).unwrap();
        let t = evolve_lattice(&p, &lab(), 100).unwrap();
        for (n, pair) in t.states().iter().enumerate() {
            let m = pair[0].matrix();
            // σ_z^n flips the coherence sign each step
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let f = lab().characteristic_path(80.0 * n as f64);
            assert!((m.get(0, 0).re - 0.5).abs() < 1e-14);
            assert!((m.get(0, 1) - f.conj() * 0.5 * sign).norm() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn superoperator_reproduces_trajectory() {
        let p = Protocol::uniform(0.6545, 120.0, 6, default_pair()).unwrap();
        for backend in [Backend::lattice(), Backend::quadrature()] {
            let t = evolve(&p, &lab(), &backend).unwrap();
            let maps = superoperators(&p, &lab(), &backend).unwrap();
            assert_eq!(maps[0], Superoperator::identity());
            for (n, phi) in maps.iter().enumerate() {
                for i in 0..2 {
                    let via = phi.apply(p.initial_pair()[i].matrix());
                    assert!(via.max_abs_diff(t.states()[n][i].matrix()) < 1e-10);
                }
                assert!(phi.trace_preservation_error() < 1e-10);
                assert!(phi.min_choi_eigenvalue() >= -1e-8);
            }
        }
    }

    #[test]
    fn superoperator_at_bounds() {
        let p = Protocol::uniform(0.5, 120.0, 3, default_pair()).unwrap();
        assert_eq!(superoperator_at(&p, &lab(), 0, &Backend::lattice()).unwrap(), Superoperator::identity());
        assert!(matches!(
            superoperator_at(&p, &lab(), 4, &Backend::lattice()),
            Err(EngineError::StepOutOfRange { requested: 4, steps: 3 })
        ));
        let all = superoperators(&p, &lab(), &Backend::lattice()).unwrap();
        let two = superoperator_at(&p, &lab(), 2, &Backend::lattice()).unwrap();
        assert!(two.max_abs_diff(&all[2]) < 1e-15);
    }

    #[test]
    fn intermediate_map_from_zero_is_phi_n() {
        let p = Protocol::uniform(0.5, 80.0, 3, default_pair()).unwrap();
        let maps = superoperators(&p, &lab(), &Backend::lattice()).unwrap();
        match intermediate_map(&maps[3], &maps[0], 1e-12) {
            IntermediateMap::Regular { map, condition } => {
                assert!(map.max_abs_diff(&maps[3]) < 1e-15);
                assert!((condition - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn intermediate_map_flags_singular_maps() {
        let mut dephase = Superoperator::identity();
        dephase.0[1][1] = 0.0.into();
        dephase.0[2][2] = 0.0.into();
        assert!(matches!(
            intermediate_map(&Superoperator::identity(), &dephase, 1e-12),
            IntermediateMap::Singular { .. }
        ));
    }

    #[test]
    fn quadrature_reports_nyquist_violation() {
        let p = Protocol::uniform(0.5, 120.0, 20, default_pair()).unwrap();
        let err = evolve(&p, &lab(), &Backend::Quadrature { nodes: 257, span_sigmas: 8.0 }).unwrap_err();
        assert!(matches!(err, EngineError::Environment(EnvironmentError::Nyquist { .. })));
        assert!(err.to_string().contains("nodes"));
    }

    #[test]
    fn lattice_rejects_incommensurate_protocols() {
        use crate::protocol::Step;
        let steps = vec![Step::new(0.5, 80.0).unwrap(), Step::new(0.5, 80.0 * std::f64::consts::E).unwrap()];
        let p = Protocol::new(steps, default_pair()).unwrap();
        let err = evolve(&p, &lab(), &Backend::lattice()).unwrap_err();
        assert!(err.to_string().contains("quadrature"));
    }

    #[test]
    fn sampled_lattice_states_match_full_trajectory() {
        let p = Protocol::uniform(0.5, 120.0, 12, default_pair()).unwrap();
        let full = evolve_lattice(&p, &lab(), 100).unwrap();
        let sampled = lattice_states_at(&p, &lab(), 100, &[7, 3, 12, 3]).unwrap();
        assert_eq!(sampled.iter().map(|s| s.0).collect::<Vec<_>>(), vec![3, 7, 12]);
        for (n, pair) in sampled {
            assert_eq!(pair, full.states()[n]);
        }
    }
}
