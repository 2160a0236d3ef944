//! Writes the figure data (CSV and SVG) into a directory, default
//! `out/figures`.

use std::path::PathBuf;

use nmdyn::config::ExperimentConfig;
use nmdyn::harness::{run, Command, FIGURES};

fn main() -> nmdyn::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| PathBuf::from("out/figures"), PathBuf::from);
    let command = Command::Figures {
        ids: FIGURES.to_vec(),
        plot: true,
    };
    let manifest = run(&command, &ExperimentConfig::default(), &out)?;
    for o in &manifest.outputs {
        println!("{}  {}", &o.sha256[..16], out.join(&o.file).display());
    }
    Ok(())
}
