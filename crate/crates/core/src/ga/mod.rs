//! Real-valued genetic optimization: a single-objective GA with Gaussian
//! mutation, two-point crossover and tournament selection, and NSGA-II for
//! two maximized objectives.

mod nsga2;
mod operators;
mod soga;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use nsga2::{
    crowding_distance, dominates, fast_nondominated_sort, pick_from_front, run_moga,
    run_moga_with_observer, MogaRecord, ParetoFront, PARETO_AREA_WEIGHT, PARETO_PGS_WEIGHT,
};
pub use operators::{gaussian_mutate, initialize_population, tournament_select, two_point_crossover};
pub use soga::{run_soga, run_soga_with_observer, GenerationRecord, SogaResult};

pub type GaRng = rand_chacha::ChaCha8Rng;

/// Gene vector with a cached fitness that is cleared whenever a gene changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chromosome<F> {
    pub genes: Vec<f64>,
    pub fitness: Option<F>,
}

impl<F> Chromosome<F> {
    pub fn new(genes: Vec<f64>) -> Self {
        Self {
            genes,
            fitness: None,
        }
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn is_evaluated(&self) -> bool {
        self.fitness.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaHyperparams {
    pub population: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_prob: f64,
    /// Probability that an individual is selected for mutation.
    pub mutation_prob: f64,
    /// Per-gene mutation probability once an individual is selected.
    pub gene_mutation_prob: f64,
    pub mutation_mean: f64,
    pub mutation_variance: f64,
    pub gene_min: f64,
    pub gene_max: f64,
    pub seed: u64,
}

impl Default for GaHyperparams {
    fn default() -> Self {
        Self::schedule_defaults()
    }
}

impl GaHyperparams {
    /// Tuned values for annealing-schedule chromosomes.
    pub fn schedule_defaults() -> Self {
        Self {
            population: 20,
            generations: 1000,
            tournament_size: 6,
            crossover_prob: 0.75,
            mutation_prob: 0.35,
            gene_mutation_prob: 0.1,
            mutation_mean: 0.0,
            mutation_variance: 0.6,
            gene_min: -1.0,
            gene_max: 1.0,
            seed: 0,
        }
    }

    /// Tuned values for optimal-driving chromosomes.
    pub fn driving_defaults() -> Self {
        Self {
            tournament_size: 3,
            crossover_prob: 0.3,
            mutation_prob: 0.9,
            gene_mutation_prob: 0.1,
            mutation_variance: 1.0,
            ..Self::schedule_defaults()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_generations(mut self, generations: usize) -> Self {
        self.generations = generations;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} = {p} outside [0, 1]")))
            }
        };
        prob("crossover_prob", self.crossover_prob)?;
        prob("mutation_prob", self.mutation_prob)?;
        prob("gene_mutation_prob", self.gene_mutation_prob)?;
        if self.population == 0 {
            return Err(Error::InvalidArgument("population must be positive".into()));
        }
        if self.tournament_size == 0 {
            return Err(Error::InvalidArgument("tournament_size must be >= 1".into()));
        }
        if !(self.mutation_variance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mutation_variance must be positive, got {}",
                self.mutation_variance
            )));
        }
        if !(self.gene_min < self.gene_max) {
            return Err(Error::InvalidArgument(format!(
                "gene interval [{}, {}] is empty",
                self.gene_min, self.gene_max
            )));
        }
        Ok(())
    }
}

/// Median by linear interpolation between order statistics.
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        GaHyperparams::schedule_defaults().validate().unwrap();
        GaHyperparams::driving_defaults().validate().unwrap();
        let p = GaHyperparams::driving_defaults();
        assert_eq!(
            (p.tournament_size, p.crossover_prob, p.mutation_prob, p.mutation_variance),
            (3, 0.3, 0.9, 1.0)
        );
    }

    #[test]
    fn invalid_params_are_rejected() {
        let base = GaHyperparams::default();
        let cases = [
            GaHyperparams { gene_min: 0.0, gene_max: 0.0, ..base.clone() },
            GaHyperparams { crossover_prob: 1.5, ..base.clone() },
            GaHyperparams { tournament_size: 0, ..base.clone() },
            GaHyperparams { mutation_variance: 0.0, ..base.clone() },
            GaHyperparams { population: 0, ..base },
        ];
        for c in cases {
            assert!(c.validate().is_err());
        }
    }
}
