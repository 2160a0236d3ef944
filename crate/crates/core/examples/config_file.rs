//! Runs `simulate` from a TOML file (default: the bundled `lab.toml`) and
//! verifies the manifest by replaying it.

use std::path::PathBuf;

use nmdyn::config::ExperimentConfig;
use nmdyn::harness::{run, verify, Command, MANIFEST_FILE};

fn main() -> nmdyn::Result<()> {
    let config = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path.as_ref())?,
        None => ExperimentConfig::parse(include_str!("lab.toml"))?,
    };
    let out = PathBuf::from("out/config_file");
    let manifest = run(&Command::Simulate, &config, &out)?;
    println!("backends {:?}", manifest.backends.iter().map(|b| b.name()).collect::<Vec<_>>());
    if let Some(d) = manifest.backend_discrepancy {
        println!("backend discrepancy {d:.2e}");
    }
    let changed = verify(&out.join(MANIFEST_FILE), &out.join("replay"))?;
    println!("replay {}", if changed.is_empty() { "reproduced every digest".to_string() } else { format!("differs in {changed:?}") });
    Ok(())
}
