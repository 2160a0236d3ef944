//! Long uniform runs dephase in the eigenbasis of the control.

use nmdyn::engine::lattice_states_at;
use nmdyn::environment::SpectralModel;
use nmdyn::measures::control_basis_coherence;
use nmdyn::protocol::{default_pair, ControlSpec, Protocol};

fn main() -> nmdyn::Result<()> {
    let eta = 0.5;
    let steps = [10, 100, 500, 1000, 2000, 5000];
    let p = Protocol::uniform(eta, 120.0, 5000, default_pair())?;
    let control = ControlSpec::new(eta)?;
    for (n, pair) in lattice_states_at(&p, &SpectralModel::lab_default(), 5000, &steps)? {
        let b = pair[0].bloch().0;
        println!(
            "n = {n:>5}: coherence {:.3e}  Bloch ({:+.4}, {:+.4}, {:+.4})",
            control_basis_coherence(&pair[0], &control),
            b[0],
            b[1],
            b[2]
        );
    }
    Ok(())
}
