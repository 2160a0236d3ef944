//! Derivative-free search over control schedules.
//!
//! `N(n_final)` is piecewise smooth with kinks wherever an increment changes
//! sign, so the search is a bounded compass (pattern) search: every poll
//! evaluates `η_i ± h` for all steps (and optionally `l_i ± 1` for the plate
//! multiples), moves to the best improving point, and halves `h` when none
//! improves. Polls are evaluated in parallel but chosen in a fixed order, and
//! restarts draw from a seeded generator, so results depend only on the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Objective, OptimizeConfig};
use crate::engine::{evolve, Backend, EngineError};
use crate::environment::SpectralModel;
use crate::measures::{blp_lower_bound, distance_series, optimize_pair, NmReport};
use crate::protocol::{Protocol, Step};

/// Search settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSearch {
    pub budget: usize,
    pub seed: u64,
    pub restarts: usize,
    pub initial_step: f64,
    pub min_step: f64,
    pub objective: Objective,
    pub optimize_delta_l: bool,
    pub max_multiple: usize,
    /// Hemisphere resolution when the objective optimizes the pair.
    pub pair_resolution: usize,
}

impl Default for ScheduleSearch {
    fn default() -> Self {
        Self::from_config(&OptimizeConfig::default(), 16)
    }
}

impl ScheduleSearch {
    pub fn from_config(c: &OptimizeConfig, pair_resolution: usize) -> Self {
        ScheduleSearch {
            budget: c.budget,
            seed: c.seed,
            restarts: c.restarts,
            initial_step: c.initial_step.0,
            min_step: c.min_step.0,
            objective: c.objective,
            optimize_delta_l: c.optimize_delta_l,
            max_multiple: c.max_multiple,
            pair_resolution,
        }
    }
}

/// A point in schedule space: controls and plate multiples of the base plate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub etas: Vec<f64>,
    pub delta_ls: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub index: usize,
    pub restart: usize,
    pub schedule: Schedule,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub protocol: Protocol,
    pub report: NmReport,
    pub evaluations: Vec<Evaluation>,
}

impl OptimizeResult {
    pub fn value(&self) -> f64 {
        self.report.total()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Point {
    etas: Vec<f64>,
    multiples: Vec<usize>,
}

struct Problem<'a> {
    template: &'a Protocol,
    model: &'a SpectralModel,
    backend: &'a Backend,
    search: &'a ScheduleSearch,
    base_delta_l: f64,
}

impl Problem<'_> {
    fn protocol(&self, p: &Point) -> Result<Protocol, EngineError> {
        let steps = self
            .template
            .steps()
            .iter()
            .zip(&p.etas)
            .zip(&p.multiples)
            .map(|((s, &eta), &l)| {
                let dl = if self.search.optimize_delta_l {
                    self.base_delta_l * l as f64
                } else {
                    s.plate.delta_l()
                };
                Step::new(eta, dl)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| EngineError::ContractViolation(e.to_string()))?;
        Protocol::new(steps, *self.template.initial_pair()).map_err(|e| EngineError::ContractViolation(e.to_string()))
    }

    fn report(&self, p: &Point) -> Result<NmReport, EngineError> {
        let protocol = self.protocol(p)?;
        match self.search.objective {
            Objective::FixedPair => Ok(blp_lower_bound(&distance_series(&evolve(&protocol, self.model, self.backend)?))),
            Objective::OptimalPair => optimize_pair(&protocol, self.model, self.backend, self.search.pair_resolution),
        }
    }

    fn schedule(&self, p: &Point) -> Schedule {
        let protocol = self.protocol(p).expect("points stay feasible");
        Schedule {
            etas: p.etas.clone(),
            delta_ls: protocol.steps().iter().map(|s| s.plate.delta_l()).collect(),
        }
    }

    /// Poll points around `p` in a fixed order.
    fn poll(&self, p: &Point, h: f64) -> Vec<Point> {
        let mut out = Vec::new();
        for i in 0..p.etas.len() {
            for sign in [1.0, -1.0] {
                let eta = (p.etas[i] + sign * h).clamp(0.0, 1.0);
                if eta != p.etas[i] {
                    let mut q = p.clone();
                    q.etas[i] = eta;
                    out.push(q);
                }
            }
            if self.search.optimize_delta_l {
                for l in [p.multiples[i] + 1, p.multiples[i].wrapping_sub(1)] {
                    if l <= self.search.max_multiple {
                        let mut q = p.clone();
                        q.multiples[i] = l;
                        out.push(q);
                    }
                }
            }
        }
        out
    }
}

/// Maximizes `N(n_final)` over the controls (and optionally the plates) of
/// `template`, keeping its length and initial pair.
///
/// With `optimize_delta_l`, plates become multiples `l_i ∈ 0..=max_multiple`
/// of the template's first plate.
pub fn optimize_schedule(
    template: &Protocol,
    model: &SpectralModel,
    backend: &Backend,
    search: &ScheduleSearch,
) -> Result<OptimizeResult, EngineError> {
    if search.budget == 0 {
        return Err(EngineError::ContractViolation("optimizer budget must be at least 1".into()));
    }
    let base_delta_l = template.steps()[0].plate.delta_l();
    if search.optimize_delta_l && base_delta_l <= 0.0 {
        return Err(EngineError::ContractViolation(
            "plate search needs a positive base plate in the first step".into(),
        ));
    }
    let problem = Problem {
        template,
        model,
        backend,
        search,
        base_delta_l,
    };
    let n = template.len();
    let start = Point {
        etas: template.steps().iter().map(|s| s.control.eta()).collect(),
        multiples: template
            .steps()
            .iter()
            .map(|s| {
                if search.optimize_delta_l {
                    ((s.plate.delta_l() / base_delta_l).round() as usize).min(search.max_multiple)
                } else {
                    0
                }
            })
            .collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    let mut log = Vec::new();
    let mut best: Option<(Point, NmReport)> = None;

    for restart in 0..=search.restarts {
        if log.len() >= search.budget {
            break;
        }
        let mut current = if restart == 0 {
            start.clone()
        } else {
            Point {
                etas: (0..n).map(|_| rng.random::<f64>()).collect(),
                multiples: (0..n)
                    .map(|k| {
                        if search.optimize_delta_l {
                            rng.random_range(0..=search.max_multiple)
                        } else {
                            start.multiples[k]
                        }
                    })
                    .collect(),
            }
        };
        let mut current_report = problem.report(&current)?;
        log.push(Evaluation {
            index: log.len(),
            restart,
            schedule: problem.schedule(&current),
            value: current_report.total(),
        });
        let mut h = search.initial_step;
        while h >= search.min_step && log.len() < search.budget {
            let mut candidates = problem.poll(&current, h);
            candidates.truncate(search.budget - log.len());
            let reports = candidates
                .par_iter()
                .map(|q| problem.report(q))
                .collect::<Result<Vec<_>, _>>()?;
            let mut winner: Option<usize> = None;
            for (k, (q, r)) in candidates.iter().zip(&reports).enumerate() {
                log.push(Evaluation {
                    index: log.len(),
                    restart,
                    schedule: problem.schedule(q),
                    value: r.total(),
                });
                let bar = winner.map_or(current_report.total(), |w| reports[w].total());
                if r.total() > bar {
                    winner = Some(k);
                }
            }
            match winner {
                Some(w) => {
                    current = candidates.swap_remove(w);
                    current_report = reports.into_iter().nth(w).expect("winner indexes reports");
                }
                None => h *= 0.5,
            }
        }
        if best.as_ref().is_none_or(|(_, r)| current_report.total() > r.total()) {
            best = Some((current, current_report));
        }
    }

    let (point, report) = best.expect("at least one evaluation ran");
    Ok(OptimizeResult {
        protocol: problem.protocol(&point)?,
        report,
        evaluations: log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::default_pair;

    fn two_step(eta: f64) -> Protocol {
        Protocol::uniform(eta, 120.0, 2, default_pair()).unwrap()
    }

    #[test]
    fn single_evaluation_returns_initial_guess() {
        let model = SpectralModel::lab_default();
        let search = ScheduleSearch {
            budget: 1,
            ..Default::default()
        };
        let p = two_step(0.3);
        let r = optimize_schedule(&p, &model, &Backend::lattice(), &search).unwrap();
        assert_eq!(r.evaluations.len(), 1);
        assert_eq!(r.protocol, p);
        assert_eq!(r.evaluations[0].value, r.value());
    }

    #[test]
    fn never_worse_than_start_and_respects_budget() {
        let model = SpectralModel::lab_default();
        let p = two_step(0.5);
        let backend = Backend::lattice();
        let start = blp_lower_bound(&distance_series(&evolve(&p, &model, &backend).unwrap())).total();
        let search = ScheduleSearch {
            budget: 60,
            restarts: 1,
            ..Default::default()
        };
        let r = optimize_schedule(&p, &model, &backend, &search).unwrap();
        assert!(r.value() >= start);
        assert!(r.evaluations.len() <= 60);
        assert!(r.protocol.steps().iter().all(|s| (0.0..=1.0).contains(&s.control.eta())));
    }

    #[test]
    fn same_seed_same_result() {
        let model = SpectralModel::lab_default();
        let p = two_step(0.8);
        let search = ScheduleSearch {
            budget: 80,
            restarts: 3,
            seed: 11,
            ..Default::default()
        };
        let a = optimize_schedule(&p, &model, &Backend::lattice(), &search).unwrap();
        let b = optimize_schedule(&p, &model, &Backend::lattice(), &search).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn plate_search_stays_on_lattice() {
        let model = SpectralModel::lab_default();
        let p = Protocol::uniform(0.5, 40.0, 3, default_pair()).unwrap();
        let search = ScheduleSearch {
            budget: 40,
            restarts: 0,
            optimize_delta_l: true,
            max_multiple: 3,
            ..Default::default()
        };
        let r = optimize_schedule(&p, &model, &Backend::lattice(), &search).unwrap();
        for s in r.protocol.steps() {
            let l = s.plate.delta_l() / 40.0;
            assert!((l - l.round()).abs() < 1e-12 && l <= 3.0);
        }
    }
}
