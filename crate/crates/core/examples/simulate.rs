//! Trace distance and non-Markovianity for the laboratory protocol.

use nmdyn::engine::{evolve, Backend};
use nmdyn::environment::SpectralModel;
use nmdyn::measures::{blp_lower_bound, distance_series};
use nmdyn::protocol::Protocol;

fn main() -> nmdyn::Result<()> {
    let model = SpectralModel::lab_default();
    let protocol = Protocol::lab(0.5, 120.0)?;
    let traj = evolve(&protocol, &model, &Backend::lattice())?;
    let d = distance_series(&traj);
    let nm = blp_lower_bound(&d);

    println!("{:>4} {:>10} {:>10}", "n", "D(n)", "N(n)");
    for (n, (dn, cn)) in d.values().iter().zip(&nm.cumulative).enumerate() {
        println!("{n:>4} {dn:>10.6} {cn:>10.6}");
    }
    println!("revivals at steps {:?}", nm.contributing_steps);
    Ok(())
}
