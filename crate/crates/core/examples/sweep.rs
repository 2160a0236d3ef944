//! N over a grid of controls for both plate thicknesses, in parallel.

use rayon::prelude::*;

use nmdyn::engine::{evolve, Backend};
use nmdyn::environment::SpectralModel;
use nmdyn::measures::{blp_lower_bound, distance_series};
use nmdyn::protocol::Protocol;

fn main() -> nmdyn::Result<()> {
    let model = SpectralModel::lab_default();
    let etas: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
    let rows = etas
        .par_iter()
        .map(|&eta| {
            let n = |dl| -> nmdyn::Result<f64> {
                let t = evolve(&Protocol::lab(eta, dl)?, &model, &Backend::lattice())?;
                Ok(blp_lower_bound(&distance_series(&t)).total())
            };
            Ok((eta, n(80.0)?, n(120.0)?))
        })
        .collect::<nmdyn::Result<Vec<_>>>()?;
    println!("{:>6} {:>10} {:>10}", "eta", "N(80)", "N(120)");
    for (eta, a, b) in rows {
        println!("{eta:>6.2} {a:>10.5} {b:>10.5}");
    }
    Ok(())
}
