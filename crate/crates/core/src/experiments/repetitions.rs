use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::evaluator::Problem;
use super::problem::{FitnessKind, ProblemSpec};
use super::stats::Quartiles;
use crate::dynamics::{area_fitness, minimal_gap, CROSSING_THRESHOLD};
use crate::error::Result;
use crate::ga::{run_moga, run_soga, GaHyperparams};
use crate::par;

/// Metrics of the best chromosome of one GA run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub best_genes: Vec<f64>,
    /// The optimized scalar: fidelity, or `<-H_z>` for mean-energy runs.
    pub best_fitness: f64,
    pub fidelity: f64,
    pub area: f64,
    pub min_gap: f64,
    pub min_gap_s: f64,
    pub crossing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approximation_ratio: Option<f64>,
    /// `[area, pgs]` of every member of the final front, for NSGA-II runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub front: Option<Vec<[f64; 2]>>,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunOutcome {
    Success(RunMetrics),
    Failure { error: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub repetition: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub outcome: RunOutcome,
    pub wall_ms: f64,
}

impl RunRecord {
    pub fn metrics(&self) -> Option<&RunMetrics> {
        match &self.outcome {
            RunOutcome::Success(m) => Some(m),
            RunOutcome::Failure { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepetitionSummary {
    pub runs: usize,
    pub successes: usize,
    pub failures: usize,
    /// Over successful runs' `best_fitness`.
    pub fitness: Option<Quartiles>,
    pub fidelity: Option<Quartiles>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approximation_ratio: Option<Quartiles>,
    pub crossing_count: usize,
    pub total_wall_ms: f64,
    pub records: Vec<RunRecord>,
}

impl RepetitionSummary {
    /// Aggregates records in repetition order, whatever order they came in.
    pub fn from_records(mut records: Vec<RunRecord>) -> Self {
        records.sort_by_key(|r| r.repetition);
        let ok: Vec<&RunMetrics> = records.iter().filter_map(RunRecord::metrics).collect();
        let collect = |f: &dyn Fn(&RunMetrics) -> f64| -> Option<Quartiles> {
            Quartiles::from_values(&ok.iter().map(|m| f(m)).collect::<Vec<_>>()).ok()
        };
        let ratios: Vec<f64> = ok.iter().filter_map(|m| m.approximation_ratio).collect();
        Self {
            runs: records.len(),
            successes: ok.len(),
            failures: records.len() - ok.len(),
            fitness: collect(&|m| m.best_fitness),
            fidelity: collect(&|m| m.fidelity),
            approximation_ratio: Quartiles::from_values(&ratios).ok(),
            crossing_count: ok.iter().filter(|m| m.crossing).count(),
            total_wall_ms: records.iter().map(|r| r.wall_ms).sum(),
            records,
        }
    }

    pub fn median(&self) -> Option<f64> {
        self.fitness.map(|q| q.median)
    }

    pub fn q1(&self) -> Option<f64> {
        self.fitness.map(|q| q.q1)
    }

    pub fn q3(&self) -> Option<f64> {
        self.fitness.map(|q| q.q3)
    }

    pub fn best_fitnesses(&self) -> Vec<f64> {
        self.records
            .iter()
            .filter_map(|r| r.metrics().map(|m| m.best_fitness))
            .collect()
    }
}

/// Runs `job(repetition, seed)` for `seed = base_seed + repetition`,
/// possibly in parallel, and aggregates the outcomes. Failed jobs are
/// recorded, not propagated.
pub fn run_repetitions_with<J>(n_rep: usize, base_seed: u64, job: J) -> RepetitionSummary
where
    J: Fn(usize, u64) -> Result<RunMetrics> + Sync,
{
    let reps: Vec<usize> = (0..n_rep).collect();
    let records = par::map(&reps, |&rep| {
        let seed = base_seed.wrapping_add(rep as u64);
        let start = Instant::now();
        let outcome = match job(rep, seed) {
            Ok(m) => RunOutcome::Success(m),
            Err(e) => RunOutcome::Failure {
                error: e.to_string(),
            },
        };
        RunRecord {
            repetition: rep,
            seed,
            outcome,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        }
    });
    RepetitionSummary::from_records(records)
}

/// One GA run on `problem` with the given hyperparameters.
pub fn run_once(problem: &Problem, params: &GaHyperparams) -> Result<RunMetrics> {
    let len = problem.chromosome_len();
    let (genes, best_fitness, front, evaluations) = match problem.spec().fitness_kind() {
        FitnessKind::MultiObjective => {
            let front = run_moga(len, params, |g| problem.objectives(g))?;
            let pick = front.pick()?;
            let pgs = pick.fitness.map(|f| f[1]).unwrap_or(0.0);
            (pick.genes.clone(), pgs, Some(front.objectives()), front.evaluations)
        }
        _ => {
            let result = run_soga(len, params, |g| problem.fitness(g))?;
            (result.best.genes.clone(), result.best_fitness(), None, result.evaluations)
        }
    };
    let trace = problem.trace(&genes)?;
    let (min_gap, min_gap_s) = minimal_gap(&trace);
    let approximation_ratio = match problem.ising_instance() {
        Some(_) => Some(problem.approximation_ratio_of(trace.psi.last().expect("non-empty"))?),
        None => None,
    };
    Ok(RunMetrics {
        best_genes: genes,
        best_fitness,
        fidelity: trace.final_pgs(),
        area: area_fitness(&trace),
        min_gap,
        min_gap_s,
        crossing: min_gap < CROSSING_THRESHOLD,
        approximation_ratio,
        front,
        evaluations,
    })
}

/// `n_rep` independent GA runs of `spec` with seeds `base_seed + k`.
/// Operator construction errors abort; per-run failures are recorded.
pub fn run_repetitions(spec: &ProblemSpec, n_rep: usize, base_seed: u64) -> Result<RepetitionSummary> {
    let problem = Problem::new(spec)?;
    Ok(run_problem_repetitions(&problem, n_rep, base_seed))
}

pub fn run_problem_repetitions(problem: &Problem, n_rep: usize, base_seed: u64) -> RepetitionSummary {
    let params = problem.spec().hyperparams();
    run_repetitions_with(n_rep, base_seed, |_, seed| {
        run_once(problem, &params.clone().with_seed(seed))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::experiments::problem::{Mode, Model};

    fn metrics(f: f64) -> RunMetrics {
        RunMetrics {
            best_genes: vec![],
            best_fitness: f,
            fidelity: f,
            area: f,
            min_gap: 1.0,
            min_gap_s: 0.5,
            crossing: false,
            approximation_ratio: None,
            front: None,
            evaluations: 0,
        }
    }

    #[test]
    fn synthetic_constant_fitness() {
        let s = run_repetitions_with(7, 100, |_, _| Ok(metrics(0.5)));
        assert_eq!((s.q1(), s.median(), s.q3()), (Some(0.5), Some(0.5), Some(0.5)));
        let seeds: Vec<u64> = s.records.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, (100..107).collect::<Vec<_>>());
    }

    #[test]
    fn failures_are_counted_not_fatal() {
        let s = run_repetitions_with(5, 0, |rep, _| {
            if rep % 2 == 0 {
                Ok(metrics(rep as f64))
            } else {
                Err(Error::Fitness("diverged".into()))
            }
        });
        assert_eq!((s.successes, s.failures), (3, 2));
        assert_eq!(s.median(), Some(2.0));
    }

    #[test]
    fn aggregation_ignores_record_order() {
        let s = run_repetitions_with(4, 0, |rep, _| Ok(metrics(rep as f64)));
        let mut shuffled = s.records.clone();
        shuffled.reverse();
        let mut t = RepetitionSummary::from_records(shuffled);
        t.total_wall_ms = s.total_wall_ms;
        assert_eq!(s, t);
    }

    #[test]
    fn single_repetition_median_is_its_best() {
        let spec = ProblemSpec::new(Model::PSpin { n: 4, p: 3, coupling: 1.0 }, Mode::OdOnly { d: 3 })
            .with_annealing_time(1.0)
            .with_generations(3);
        let s = run_repetitions(&spec, 1, 9).unwrap();
        let m = s.records[0].metrics().unwrap();
        assert_eq!(s.median(), Some(m.best_fitness));
        assert!((m.fidelity - m.best_fitness).abs() < 1e-12);
    }

    #[test]
    fn record_json_round_trip() {
        let r = RunRecord { repetition: 2, seed: 5, outcome: RunOutcome::Failure { error: "x".into() }, wall_ms: 1.0 };
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"status\":\"failure\""));
        assert_eq!(serde_json::from_str::<RunRecord>(&json).unwrap(), r);
        let r = RunRecord { outcome: RunOutcome::Success(metrics(0.25)), ..r };
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<RunRecord>(&json).unwrap(), r);
    }
}
