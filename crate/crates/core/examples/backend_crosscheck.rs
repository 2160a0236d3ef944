//! The quadrature and lattice backends on every laboratory configuration.

use std::time::Instant;

use nmdyn::engine::{evolve, max_bloch_discrepancy, Backend};
use nmdyn::environment::SpectralModel;
use nmdyn::protocol::{lab, Protocol};

fn main() -> nmdyn::Result<()> {
    let model = SpectralModel::lab_default();
    for eta in lab::ETAS {
        for dl in lab::DELTA_LS {
            let p = Protocol::lab(eta, dl)?;
            let t0 = Instant::now();
            let q = evolve(&p, &model, &Backend::quadrature())?;
            let t1 = Instant::now();
            let l = evolve(&p, &model, &Backend::lattice())?;
            let t2 = Instant::now();
            println!(
                "eta {eta:<6} dL {dl:>5}: max Bloch difference {:.2e}  (quadrature {:>6.1} ms, lattice {:>5.2} ms)",
                max_bloch_discrepancy(&q, &l),
                (t1 - t0).as_secs_f64() * 1e3,
                (t2 - t1).as_secs_f64() * 1e3
            );
        }
    }
    Ok(())
}
