//! Discrete-time open qubit dynamics with local control.
//!
//! A qubit (photon polarization) passes through a sequence of operating
//! units. Each unit applies a local control unitary
//! `C_η = √η σ_z + √(1−η) σ_x` followed by a birefringent plate that couples
//! the polarization to the frequency environment through a relative phase
//! `exp(i · 2π ΔL · ω/ω0)`. Tracing out the frequency gives a family of
//! dynamical maps `Φ_n`, whose trace-distance evolution decides whether the
//! dynamics is Markovian.
//!
//! The crate is organized as:
//!
//! - [`qmath`]: 2×2 operators, density matrices, superoperators and Choi tests.
//! - [`environment`]: the Gaussian (mixture) spectral model, its
//!   characteristic function and frequency quadrature grids.
//! - [`protocol`]: controls, plates, step sequences and lab-unit conversions.
//! - [`config`]: the TOML experiment file.
//! - [`engine`]: the quadrature and lattice backends producing trajectories
//!   and dynamical maps.
//! - [`measures`]: trace-distance series, the BLP measure, pair
//!   optimization and divisibility classification.
//! - [`optimize`]: derivative-free search over control schedules.
//! - [`harness`]: CSV/manifest producing runs behind the `nmdyn` binary.

pub mod config;
pub mod engine;
pub mod environment;
pub mod error;
pub mod harness;
pub mod measures;
pub mod optimize;
pub mod protocol;
pub mod qmath;

pub use error::{Error, Result};
