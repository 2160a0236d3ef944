//! Searches five-step control schedules for the largest N.

use nmdyn::engine::Backend;
use nmdyn::environment::SpectralModel;
use nmdyn::optimize::{optimize_schedule, ScheduleSearch};
use nmdyn::protocol::{default_pair, Protocol};

fn main() -> nmdyn::Result<()> {
    let model = SpectralModel::lab_default();
    let template = Protocol::uniform(0.5, 120.0, 5, default_pair())?;
    let search = ScheduleSearch {
        budget: 600,
        seed: 7,
        ..Default::default()
    };
    let result = optimize_schedule(&template, &model, &Backend::lattice(), &search)?;
    let etas: Vec<String> = result
        .protocol
        .steps()
        .iter()
        .map(|s| format!("{:.4}", s.control.eta()))
        .collect();
    println!("best N = {:.6} after {} evaluations", result.value(), result.evaluations.len());
    println!("etas = [{}]", etas.join(", "));
    Ok(())
}
