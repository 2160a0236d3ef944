//! Experiment runs that write CSV data plus a provenance manifest.
//!
//! Every command takes an [`ExperimentConfig`] (with any command-line
//! overrides already applied) and an output directory. Outputs are
//! byte-deterministic for a given configuration: parallel work is collected
//! in index order and floats are written with 17 significant digits.

mod manifest;
pub mod plot;
pub mod table;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use manifest::{OutputDigest, RunManifest, MANIFEST_FILE};
use plot::{line_chart, Series};
use table::{Cell, Table};

use crate::config::{ConfigError, ExperimentConfig};
use crate::engine::{evolve, max_bloch_discrepancy, superoperators, Backend, Trajectory};
use crate::environment::SpectralModel;
use crate::measures::{
    blp_lower_bound, classify_maps, control_basis_coherence, distance_series, optimize_pair_from_maps,
    HemisphereGrid, NmReport,
};
use crate::optimize::{optimize_schedule, ScheduleSearch};
use crate::protocol::{lab, Protocol};
use crate::{Error, Result};

/// Largest tolerated disagreement between backends run side by side.
pub const BACKEND_TOLERANCE: f64 = 1e-8;

/// Figure identifiers with data in this harness.
pub const FIGURES: [u8; 4] = [2, 3, 4, 5];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Figures { ids: Vec<u8>, plot: bool },
    Sweep,
    Maps,
    Optimize,
}

/// Collects output files and their digests.
struct Outputs<'a> {
    dir: &'a Path,
    manifest: RunManifest,
}

impl Outputs<'_> {
    fn table(&mut self, name: &str, t: &Table) -> Result<()> {
        let bytes = t.write(&self.dir.join(name))?;
        self.manifest.outputs.push(OutputDigest::of(name, &bytes));
        Ok(())
    }

    fn text(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        self.manifest.outputs.push(OutputDigest::of(name, contents.as_bytes()));
        Ok(())
    }

    fn discrepancy(&mut self, d: f64) {
        let prev = self.manifest.backend_discrepancy.unwrap_or(0.0);
        self.manifest.backend_discrepancy = Some(prev.max(d));
    }
}

/// Runs a command and writes its outputs and `manifest.json` into `out_dir`.
pub fn run(command: &Command, config: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
    let backends = config.backend.backends();
    let mut out = Outputs {
        dir: out_dir,
        manifest: RunManifest::new(command.clone(), config.to_toml_string(), backends.clone()),
    };
    match command {
        Command::Simulate => simulate(config, &backends, &mut out)?,
        Command::Figures { ids, plot } => figures(ids, *plot, &backends, &mut out)?,
        Command::Sweep => sweep(config, &backends, &mut out)?,
        Command::Maps => maps(config, &backends, &mut out)?,
        Command::Optimize => optimize(config, &backends, &mut out)?,
    }
    out.manifest.write(out_dir)?;
    Ok(out.manifest)
}

/// Re-runs a manifest's command from its configuration snapshot into
/// `out_dir`.
pub fn replay(manifest: &RunManifest, out_dir: &Path) -> Result<RunManifest> {
    let config = ExperimentConfig::parse(&manifest.config)?;
    run(&manifest.command, &config, out_dir)
}

/// Replays the manifest at `path` into `scratch` and lists output files
/// whose digests changed.
pub fn verify(path: &Path, scratch: &Path) -> Result<Vec<String>> {
    let original = RunManifest::load(path)?;
    let again = replay(&original, scratch)?;
    Ok(original.mismatches(&again))
}

/// Runs every backend and fails when any pair disagrees beyond
/// [`BACKEND_TOLERANCE`]. Returns the first trajectory and the discrepancy.
fn evolve_checked(protocol: &Protocol, model: &SpectralModel, backends: &[Backend]) -> Result<(Trajectory, Option<f64>)> {
    let runs = backends
        .iter()
        .map(|b| evolve(protocol, model, b))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let discrepancy = runs[1..]
        .iter()
        .map(|t| max_bloch_discrepancy(&runs[0], t))
        .reduce(f64::max);
    if let Some(d) = discrepancy {
        if !(d <= BACKEND_TOLERANCE) {
            return Err(Error::BackendMismatch {
                discrepancy: d,
                tolerance: BACKEND_TOLERANCE,
            });
        }
    }
    Ok((runs.into_iter().next().expect("at least one backend"), discrepancy))
}

/// End-of-run diagnostics shared by `simulate` and `sweep`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub steps: usize,
    /// `N(n_final)` for the configured pair.
    pub n_final: f64,
    /// `N(n_final)` for the best antipodal pure pair.
    pub n_opt_final: f64,
    /// First step whose distance increment is counted by `N`.
    pub first_revival: Option<usize>,
    pub d_final: f64,
    /// Off-diagonal of `ρ_1(n_final)` in the last control's eigenbasis.
    pub coherence_final: f64,
}

impl Summary {
    /// Runs all backends (checking agreement) and the pair search on the
    /// first one.
    pub fn compute(
        protocol: &Protocol,
        model: &SpectralModel,
        backends: &[Backend],
        pair_resolution: usize,
    ) -> Result<(Self, Option<f64>)> {
        let (t, discrepancy) = evolve_checked(protocol, model, backends)?;
        let grid = HemisphereGrid::new(pair_resolution)
            .ok_or_else(|| Error::Invalid(format!("pair resolution {pair_resolution} too small")))?;
        let best = optimize_pair_from_maps(&superoperators(protocol, model, &backends[0])?, grid);
        let series = distance_series(&t);
        let nm = blp_lower_bound(&series);
        let last = protocol.steps().last().expect("protocols are non-empty");
        let final_pair = t.states().last().expect("trajectories include step 0");
        let summary = Summary {
            steps: protocol.len(),
            n_final: nm.total(),
            n_opt_final: best.total(),
            first_revival: nm.contributing_steps.first().copied(),
            d_final: *series.values().last().expect("non-empty"),
            coherence_final: control_basis_coherence(&final_pair[0], &last.control),
        };
        Ok((summary, discrepancy))
    }

    const HEADER: [&'static str; 6] = ["steps", "N_final", "N_opt_final", "first_revival", "D_final", "coherence_final"];

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.steps.into(),
            self.n_final.into(),
            self.n_opt_final.into(),
            self.first_revival.into(),
            self.d_final.into(),
            self.coherence_final.into(),
        ]
    }
}

/// `step, D, Delta, N` and both Bloch vectors for every step.
pub fn trajectory_table(t: &Trajectory) -> Table {
    let series = distance_series(t);
    let nm = blp_lower_bound(&series);
    let mut table = Table::new(["step", "D", "Delta", "N", "r1_x", "r1_y", "r1_z", "r2_x", "r2_y", "r2_z"]);
    for (n, pair) in t.states().iter().enumerate() {
        let [a, b] = [pair[0].bloch().0, pair[1].bloch().0];
        table.push(vec![
            n.into(),
            series.values()[n].into(),
            series.increment(n).unwrap_or(0.0).into(),
            nm.cumulative[n].into(),
            a[0].into(),
            a[1].into(),
            a[2].into(),
            b[0].into(),
            b[1].into(),
            b[2].into(),
        ]);
    }
    table
}

fn simulate(config: &ExperimentConfig, backends: &[Backend], out: &mut Outputs) -> Result<()> {
    let model = config.spectral_model()?;
    let protocol = config.protocol()?;
    let (traj, discrepancy) = evolve_checked(&protocol, &model, backends)?;
    if let Some(d) = discrepancy {
        out.discrepancy(d);
    }
    out.table("trajectory.csv", &trajectory_table(&traj))?;
    let (s, _) = Summary::compute(&protocol, &model, backends, config.measures.pair_resolution)?;
    let mut summary = Table::new(Summary::HEADER);
    summary.push(s.cells());
    out.table("summary.csv", &summary)
}

/// `(η, ΔL)` series behind a figure and whether it shows `D` or `N`.
pub fn figure_series(id: u8) -> Option<(Vec<(f64, f64)>, &'static str)> {
    let by_thickness = || lab::DELTA_LS.iter().map(|&dl| (0.5, dl)).collect();
    let by_eta = || lab::ETAS.iter().map(|&e| (e, lab::DELTA_LS[1])).collect();
    match id {
        2 => Some((by_thickness(), "D")),
        3 => Some((by_thickness(), "N")),
        4 => Some((by_eta(), "D")),
        5 => Some((by_eta(), "N")),
        _ => None,
    }
}

fn figures(ids: &[u8], plot: bool, backends: &[Backend], out: &mut Outputs) -> Result<()> {
    let model = SpectralModel::lab_default();
    for &id in ids {
        let (series, quantity) = figure_series(id).ok_or_else(|| Error::Invalid(format!("unknown figure {id}; expected one of {FIGURES:?}")))?;
        let mut table = Table::new(["eta", "delta_l", "step", quantity]);
        let mut curves = Vec::new();
        for &(eta, dl) in &series {
            let protocol = Protocol::lab(eta, dl)?;
            let (traj, discrepancy) = evolve_checked(&protocol, &model, backends)?;
            if let Some(d) = discrepancy {
                out.discrepancy(d);
            }
            let d = distance_series(&traj);
            let values = if quantity == "D" {
                d.values().to_vec()
            } else {
                blp_lower_bound(&d).cumulative
            };
            for (n, &v) in values.iter().enumerate() {
                table.push(vec![eta.into(), dl.into(), n.into(), v.into()]);
            }
            curves.push(Series {
                label: format!("eta={eta} dL={dl}"),
                points: values.iter().enumerate().map(|(n, &v)| (n as f64, v)).collect(),
            });
        }
        out.table(&format!("figure{id}.csv"), &table)?;
        if plot {
            let y = if quantity == "D" { "trace distance D(n)" } else { "non-Markovianity N(n)" };
            out.text(&format!("figure{id}.svg"), &line_chart(&format!("Figure {id}"), "step n", y, &curves))?;
        }
    }
    Ok(())
}

fn sweep(config: &ExperimentConfig, backends: &[Backend], out: &mut Outputs) -> Result<()> {
    let spec = config.sweep.as_ref().ok_or_else(|| ConfigError::Invalid {
        key: "sweep".into(),
        line: None,
        message: "the sweep command needs a [sweep] table".into(),
    })?;
    let model = config.spectral_model()?;
    let template = config.protocol()?;
    let steps = spec.steps.unwrap_or(template.len());
    let (etas, dls) = (spec.etas.values(), spec.delta_ls.values());
    let size = etas.len() * dls.len();
    if size > spec.max_points {
        return Err(ConfigError::Invalid {
            key: "sweep.max_points".into(),
            line: None,
            message: format!("grid has {size} points, above the cap of {}", spec.max_points),
        }
        .into());
    }
    let points: Vec<(f64, f64)> = etas.iter().flat_map(|&e| dls.iter().map(move |&d| (e, d))).collect();
    let results = points
        .par_iter()
        .map(|&(eta, dl)| {
            let p = Protocol::uniform(eta, dl, steps, *template.initial_pair())?;
            Summary::compute(&p, &model, backends, config.measures.pair_resolution)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut header = vec!["index", "eta", "delta_l"];
    header.extend(Summary::HEADER);
    let mut table = Table::new(header);
    for (k, (&(eta, dl), (summary, disc))) in points.iter().zip(&results).enumerate() {
        if let Some(d) = disc {
            out.discrepancy(*d);
        }
        let mut row: Vec<Cell> = vec![k.into(), eta.into(), dl.into()];
        row.extend(summary.cells());
        table.push(row);
    }
    out.table("sweep.csv", &table)
}

fn maps(config: &ExperimentConfig, backends: &[Backend], out: &mut Outputs) -> Result<()> {
    let model = config.spectral_model()?;
    let protocol = config.protocol()?;
    let all = backends
        .iter()
        .map(|b| superoperators(&protocol, &model, b))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    for other in &all[1..] {
        let d = all[0]
            .iter()
            .zip(other)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max);
        if !(d <= BACKEND_TOLERANCE) {
            return Err(Error::BackendMismatch {
                discrepancy: d,
                tolerance: BACKEND_TOLERANCE,
            });
        }
        out.discrepancy(d);
    }
    let phis = &all[0];
    let grid = HemisphereGrid::new(config.measures.divisibility_resolution)
        .ok_or_else(|| Error::Invalid("divisibility resolution too small".into()))?;
    let report = classify_maps(phis, grid);
    let mut table = Table::new([
        "step",
        "label",
        "step_min_choi",
        "step_max_expansion",
        "condition",
        "restricted",
        "map_trace_error",
        "map_min_choi",
    ]);
    for s in &report.steps {
        let phi = &phis[s.step];
        table.push(vec![
            s.step.into(),
            s.label.as_str().into(),
            s.min_choi_eigenvalue.into(),
            s.max_expansion.into(),
            s.condition.into(),
            s.restricted.into(),
            phi.trace_preservation_error().into(),
            phi.min_choi_eigenvalue().into(),
        ]);
    }
    out.table("divisibility.csv", &table)?;

    let pair_grid = HemisphereGrid::new(config.measures.pair_resolution)
        .ok_or_else(|| Error::Invalid("pair resolution too small".into()))?;
    let best = optimize_pair_from_maps(phis, pair_grid);
    out.table("optimal_pair.csv", &nm_table(&best))
}

fn nm_table(r: &NmReport) -> Table {
    let b = r.pair.map(|p| p[0].0);
    let mut table = Table::new(["step", "N", "b_x", "b_y", "b_z"]);
    for (n, &v) in r.cumulative.iter().enumerate() {
        table.push(vec![
            n.into(),
            v.into(),
            b.map(|b| b[0]).into(),
            b.map(|b| b[1]).into(),
            b.map(|b| b[2]).into(),
        ]);
    }
    table
}

fn optimize(config: &ExperimentConfig, backends: &[Backend], out: &mut Outputs) -> Result<()> {
    let model = config.spectral_model()?;
    let template = config.protocol()?;
    let search = ScheduleSearch::from_config(&config.optimize.clone().unwrap_or_default(), config.measures.pair_resolution);
    let result = optimize_schedule(&template, &model, &backends[0], &search)?;
    if backends.len() > 1 {
        let (_, d) = evolve_checked(&result.protocol, &model, backends)?;
        if let Some(d) = d {
            out.discrepancy(d);
        }
    }
    let mut schedule = Table::new(["step", "eta", "delta_l"]);
    for (k, s) in result.protocol.steps().iter().enumerate() {
        schedule.push(vec![(k + 1).into(), s.control.eta().into(), s.plate.delta_l().into()]);
    }
    out.table("schedule.csv", &schedule)?;
    out.table("nm.csv", &nm_table(&result.report))?;

    let n = template.len();
    let mut header = vec!["index".to_string(), "restart".into(), "N".into()];
    header.extend((1..=n).map(|k| format!("eta_{k}")));
    header.extend((1..=n).map(|k| format!("delta_l_{k}")));
    let mut log = Table::new(header);
    for e in &result.evaluations {
        let mut row: Vec<Cell> = vec![e.index.into(), e.restart.into(), e.value.into()];
        row.extend(e.schedule.etas.iter().map(|&x| Cell::from(x)));
        row.extend(e.schedule.delta_ls.iter().map(|&x| Cell::from(x)));
        log.push(row);
    }
    out.table("evaluations.csv", &log)
}

/// Default output directory for a command.
pub fn default_out_dir(command: &Command) -> PathBuf {
    let name = match command {
        Command::Simulate => "simulate",
        Command::Figures { .. } => "figures",
        Command::Sweep => "sweep",
        Command::Maps => "maps",
        Command::Optimize => "optimize",
    };
    PathBuf::from("out").join(name)
}
