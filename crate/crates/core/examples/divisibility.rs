//! Step-wise divisibility labels for a non-Markovian and a Markovian
//! protocol.

use nmdyn::engine::Backend;
use nmdyn::environment::SpectralModel;
use nmdyn::measures::classify_divisibility;
use nmdyn::protocol::Protocol;

fn main() -> nmdyn::Result<()> {
    let model = SpectralModel::lab_default();
    for eta in [0.5, 1.0] {
        let p = Protocol::lab(eta, 120.0)?;
        let report = classify_divisibility(&p, &model, &Backend::lattice(), 16)?;
        println!("eta = {eta}");
        for s in &report.steps {
            println!(
                "  step {:>2}: {:<17} min Choi {:>10.3e}  expansion {:>8.4}{}",
                s.step,
                s.label.as_str(),
                s.min_choi_eigenvalue.unwrap_or(f64::NAN),
                s.max_expansion.unwrap_or(f64::NAN),
                if s.restricted { "  (pseudo-inverse)" } else { "" }
            );
        }
    }
    Ok(())
}
