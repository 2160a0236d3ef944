//! With η = 0 every control is σ_x, which refocuses the plate phase every
//! second step: the diagonal pair comes back untouched.

use nmdyn::engine::{evolve, Backend};
use nmdyn::environment::SpectralModel;
use nmdyn::measures::distance_series;
use nmdyn::protocol::{named_state, Protocol};

fn main() -> nmdyn::Result<()> {
    let pair = [named_state("D").unwrap(), named_state("A").unwrap()];
    let model = SpectralModel::lab_default();
    for dl in [80.0, 120.0] {
        let p = Protocol::uniform(0.0, dl, 8, pair)?;
        let d = distance_series(&evolve(&p, &model, &Backend::lattice())?);
        let shown: Vec<String> = d.values().iter().map(|v| format!("{v:.4}")).collect();
        println!("dL = {dl:>5}: {}", shown.join(" "));
    }
    Ok(())
}
