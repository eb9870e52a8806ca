use std::time::Instant;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::operators::{gaussian_mutate, initialize_population, tournament_select, two_point_crossover};
use super::{median, Chromosome, GaHyperparams, GaRng};
use crate::error::{Error, Result};
use crate::par;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Best fitness in the evaluated population of this generation.
    pub best: f64,
    pub best_ever: f64,
    pub median: f64,
    pub evaluations: usize,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SogaResult {
    pub best: Chromosome<f64>,
    /// Generation 0 is the initial population.
    pub history: Vec<GenerationRecord>,
    pub population: Vec<Chromosome<f64>>,
    pub evaluations: usize,
}

impl SogaResult {
    pub fn best_fitness(&self) -> f64 {
        self.best.fitness.unwrap_or(f64::NAN)
    }
}

/// Evaluates every chromosome without a cached fitness. Returns the number
/// of evaluations.
pub(crate) fn evaluate_missing<F, E>(population: &mut [Chromosome<F>], fitness: &E) -> Result<usize>
where
    F: Send,
    E: Fn(&[f64]) -> Result<F> + Sync,
{
    let pending: Vec<usize> = (0..population.len())
        .filter(|&i| population[i].fitness.is_none())
        .collect();
    let genes: Vec<&[f64]> = pending.iter().map(|&i| population[i].genes.as_slice()).collect();
    let results = par::map(&genes, |g| fitness(g));
    for (&i, r) in pending.iter().zip(results) {
        let f = r.map_err(|e| Error::Fitness(format!("chromosome {i} {:?}: {e}", population[i].genes)))?;
        population[i].fitness = Some(f);
    }
    Ok(pending.len())
}

pub fn run_soga<E>(len: usize, params: &GaHyperparams, fitness: E) -> Result<SogaResult>
where
    E: Fn(&[f64]) -> Result<f64> + Sync,
{
    run_soga_with_observer(len, params, fitness, |_| {})
}

/// Single-objective GA maximizing `fitness`. Each generation mutates,
/// recombines consecutive pairs, evaluates changed chromosomes, updates the
/// best-ever archive and selects the next population by tournament.
pub fn run_soga_with_observer<E, O>(
    len: usize,
    params: &GaHyperparams,
    fitness: E,
    mut observer: O,
) -> Result<SogaResult>
where
    E: Fn(&[f64]) -> Result<f64> + Sync,
    O: FnMut(&GenerationRecord),
{
    params.validate()?;
    if len == 0 {
        return Err(Error::InvalidArgument("chromosome length must be positive".into()));
    }
    let checked = |g: &[f64]| -> Result<f64> {
        let f = fitness(g)?;
        if f.is_finite() {
            Ok(f)
        } else {
            Err(Error::Fitness(format!("non-finite fitness {f}")))
        }
    };
    let mut rng = GaRng::seed_from_u64(params.seed);
    let mut population: Vec<Chromosome<f64>> = initialize_population(len, params, &mut rng)?;
    let mut history = Vec::with_capacity(params.generations + 1);
    let mut evaluations = 0;
    let mut best: Option<Chromosome<f64>> = None;

    for generation in 0..=params.generations {
        let start = Instant::now();
        if generation > 0 {
            for c in population.iter_mut() {
                gaussian_mutate(c, params, &mut rng);
            }
            if len >= 2 {
                for pair in population.chunks_exact_mut(2) {
                    let (a, b) = pair.split_at_mut(1);
                    two_point_crossover(&mut a[0], &mut b[0], params, &mut rng)?;
                }
            }
        }
        let evaluated = evaluate_missing(&mut population, &checked)?;
        evaluations += evaluated;

        let values: Vec<f64> = population.iter().map(|c| c.fitness.unwrap_or(f64::NAN)).collect();
        let (gen_best_idx, gen_best) = values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        if best.as_ref().is_none_or(|b| gen_best > b.fitness.unwrap_or(f64::NEG_INFINITY)) {
            best = Some(population[gen_best_idx].clone());
        }
        let best_ever = best.as_ref().and_then(|b| b.fitness).unwrap_or(f64::NAN);

        population = tournament_select(&population, params, &mut rng)?;

        let record = GenerationRecord {
            generation,
            best: gen_best,
            best_ever,
            median: median(&values),
            evaluations: evaluated,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        observer(&record);
        history.push(record);
    }

    Ok(SogaResult {
        best: best.expect("at least one generation"),
        history,
        population,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(g: &[f64]) -> Result<f64> {
        Ok(-g.iter().map(|x| (x - 0.5) * (x - 0.5)).sum::<f64>())
    }

    #[test]
    fn best_ever_is_monotone_and_improves() {
        let params = GaHyperparams::schedule_defaults().with_seed(11).with_generations(150);
        let result = run_soga(3, &params, sphere).unwrap();
        assert_eq!(result.history.len(), 151);
        for w in result.history.windows(2) {
            assert!(w[1].best_ever >= w[0].best_ever);
        }
        assert!(result.best_fitness() > -1e-2, "{}", result.best_fitness());
        assert_eq!(result.best_fitness(), result.history.last().unwrap().best_ever);
        assert_eq!(result.best_fitness(), sphere(&result.best.genes).unwrap());
    }

    #[test]
    fn same_seed_same_run() {
        let params = GaHyperparams::driving_defaults().with_seed(5).with_generations(20);
        let a = run_soga(4, &params, sphere).unwrap();
        let b = run_soga(4, &params, sphere).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.population, b.population);
        let c = run_soga(4, &params.clone().with_seed(6), sphere).unwrap();
        assert_ne!(a.best.genes, c.best.genes);
    }

    #[test]
    fn only_changed_chromosomes_are_reevaluated() {
        let params = GaHyperparams {
            mutation_prob: 0.0,
            crossover_prob: 0.0,
            generations: 10,
            ..GaHyperparams::default()
        };
        let result = run_soga(2, &params, sphere).unwrap();
        assert_eq!(result.evaluations, params.population);
    }

    #[test]
    fn single_gene_chromosomes_work() {
        let params = GaHyperparams::default().with_generations(30);
        let result = run_soga(1, &params, sphere).unwrap();
        assert!(result.best_fitness() > -0.05);
    }

    #[test]
    fn fitness_errors_carry_context() {
        let params = GaHyperparams::default().with_generations(2);
        let err = run_soga(2, &params, |_| Err(Error::InvalidArgument("boom".into()))).unwrap_err();
        match err {
            Error::Fitness(msg) => assert!(msg.contains("boom") && msg.contains("chromosome")),
            other => panic!("unexpected {other:?}"),
        }
        let err = run_soga(2, &params, |_| Ok(f64::NAN)).unwrap_err();
        assert!(matches!(err, Error::Fitness(_)));
    }

    #[test]
    fn observer_sees_every_generation() {
        let params = GaHyperparams::default().with_generations(7);
        let mut seen = Vec::new();
        run_soga_with_observer(2, &params, sphere, |r| seen.push(r.generation)).unwrap();
        assert_eq!(seen, (0..=7).collect::<Vec<_>>());
    }
}
