//! Compares N for the H/V pair with the best antipodal pure pair.

use nmdyn::engine::{evolve, Backend};
use nmdyn::environment::SpectralModel;
use nmdyn::measures::{blp_lower_bound, distance_series, optimize_pair};
use nmdyn::protocol::{lab, Protocol};

fn main() -> nmdyn::Result<()> {
    let model = SpectralModel::lab_default();
    let backend = Backend::lattice();
    println!("{:>7} {:>10} {:>10}  best pair", "eta", "N(H,V)", "N(best)");
    for eta in lab::ETAS {
        let p = Protocol::lab(eta, 120.0)?;
        let fixed = blp_lower_bound(&distance_series(&evolve(&p, &model, &backend)?)).total();
        let best = optimize_pair(&p, &model, &backend, 32)?;
        let b = best.pair.expect("search sets the pair")[0].0;
        println!(
            "{eta:>7} {fixed:>10.5} {:>10.5}  ({:+.3}, {:+.3}, {:+.3})",
            best.total(),
            b[0],
            b[1],
            b[2]
        );
    }
    Ok(())
}
