use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::GaHyperparams;
use crate::ising::{default_graph, generate_ising_instance, IsingInstance};
use crate::schedule::{linear_schedules, PolynomialSchedule};

/// Default bound on `|A|`, `|B|` and `|w_i C_i|` over the sample grid.
pub const DEFAULT_AMPLITUDE_BOUND: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Model {
    /// Collective-spin p-spin model.
    #[serde(rename = "pspin")]
    PSpin {
        n: usize,
        p: u32,
        #[serde(default = "unit")]
        coupling: f64,
    },
    /// Ising instance on the full `2^n` space. Couplings are drawn from
    /// `instance_seed` unless given explicitly; edges default to the
    /// five-qubit graph.
    Ising {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        edges: Option<Vec<(usize, usize)>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        couplings: Option<Vec<f64>>,
        #[serde(default)]
        instance_seed: u64,
    },
}

fn unit() -> f64 {
    1.0
}

impl Model {
    pub fn qubits(&self) -> usize {
        match self {
            Model::PSpin { n, .. } | Model::Ising { n, .. } => *n,
        }
    }

    pub fn ising_instance(&self) -> Result<Option<IsingInstance>> {
        let Model::Ising {
            n,
            edges,
            couplings,
            instance_seed,
        } = self
        else {
            return Ok(None);
        };
        let edges = match edges {
            Some(e) => e.clone(),
            None => {
                let (dn, de) = default_graph();
                if *n != dn {
                    return Err(Error::InvalidArgument(format!(
                        "no default edge list for {n} qubits"
                    )));
                }
                de
            }
        };
        let instance = match couplings {
            Some(c) => IsingInstance::new(*n, edges, c.clone())?,
            None => generate_ising_instance(*n, edges, *instance_seed)?,
        };
        Ok(Some(instance))
    }

    pub fn from_instance(instance: &IsingInstance) -> Self {
        Model::Ising {
            n: instance.qubits(),
            edges: Some(instance.edges().to_vec()),
            couplings: Some(instance.couplings().to_vec()),
            instance_seed: 0,
        }
    }
}

/// What the chromosome encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Mode {
    /// `[alpha_1..alpha_ka, beta_1..beta_kb]`, no driving term.
    ScheduleOnly { k_a: usize, k_b: usize },
    /// `[gamma_1..gamma_d]` with linear schedules and `C(s) = s(1 - s)`.
    OdOnly { d: usize },
    /// Schedules followed by `d` blocks of `k_c` driving coefficients, one
    /// block per operator.
    Joint {
        k_a: usize,
        k_b: usize,
        k_c: usize,
        d: usize,
    },
}

impl Mode {
    pub fn chromosome_len(&self) -> usize {
        match *self {
            Mode::ScheduleOnly { k_a, k_b } => k_a + k_b,
            Mode::OdOnly { d } => d,
            Mode::Joint { k_a, k_b, k_c, d } => k_a + k_b + d * k_c,
        }
    }

    pub fn operator_count(&self) -> usize {
        match *self {
            Mode::ScheduleOnly { .. } => 0,
            Mode::OdOnly { d } | Mode::Joint { d, .. } => d,
        }
    }

    pub fn decode(&self, genes: &[f64]) -> Result<Decoded> {
        match *self {
            Mode::ScheduleOnly { k_a, k_b } => {
                let (a, b) = decode_d1(genes, k_a, k_b)?;
                Ok(Decoded {
                    driver: a,
                    problem: b,
                    driving: Vec::new(),
                })
            }
            Mode::OdOnly { d } => {
                let weights = decode_d2(genes, d)?;
                let (a, b) = linear_schedules();
                let pace = PolynomialSchedule::fixed_pace();
                Ok(Decoded {
                    driver: a,
                    problem: b,
                    driving: weights.into_iter().map(|w| (pace.clone(), w)).collect(),
                })
            }
            Mode::Joint { k_a, k_b, k_c, d } => {
                let (a, b, c) = decode_d3(genes, k_a, k_b, k_c, d)?;
                Ok(Decoded {
                    driver: a,
                    problem: b,
                    driving: c.into_iter().map(|s| (s, 1.0)).collect(),
                })
            }
        }
    }

    /// Default GA hyperparameters: schedule-tuned for schedule-only runs,
    /// driving-tuned whenever a driving term is optimized.
    pub fn default_hyperparams(&self) -> GaHyperparams {
        match self {
            Mode::ScheduleOnly { .. } => GaHyperparams::schedule_defaults(),
            _ => GaHyperparams::driving_defaults(),
        }
    }
}

/// Schedules and weighted driving terms decoded from a chromosome.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    pub driver: PolynomialSchedule,
    pub problem: PolynomialSchedule,
    /// `(C_i, w_i)` per driving operator.
    pub driving: Vec<(PolynomialSchedule, f64)>,
}

impl Decoded {
    /// Re-reads the free coefficients in chromosome order for `mode`.
    pub fn genes(&self, mode: &Mode) -> Vec<f64> {
        match mode {
            Mode::ScheduleOnly { .. } => {
                [self.driver.coeffs(), self.problem.coeffs()].concat()
            }
            Mode::OdOnly { .. } => self.driving.iter().map(|(_, w)| *w).collect(),
            Mode::Joint { .. } => {
                let mut g = [self.driver.coeffs(), self.problem.coeffs()].concat();
                for (c, _) in &self.driving {
                    g.extend_from_slice(c.coeffs());
                }
                g
            }
        }
    }
}

fn check_len(genes: &[f64], expected: usize) -> Result<()> {
    if genes.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: genes.len(),
        });
    }
    Ok(())
}

fn check_d(d: usize) -> Result<()> {
    match d {
        3 | 9 | 21 => Ok(()),
        _ => Err(Error::UnsupportedOperatorCount(d)),
    }
}

/// First `k_a` genes are the driver coefficients, the rest the problem ones.
pub fn decode_d1(
    genes: &[f64],
    k_a: usize,
    k_b: usize,
) -> Result<(PolynomialSchedule, PolynomialSchedule)> {
    check_len(genes, k_a + k_b)?;
    Ok((
        PolynomialSchedule::driver(genes[..k_a].to_vec())?,
        PolynomialSchedule::problem(genes[k_a..].to_vec())?,
    ))
}

/// Driving weights, one per operator.
pub fn decode_d2(genes: &[f64], d: usize) -> Result<Vec<f64>> {
    check_d(d)?;
    check_len(genes, d)?;
    if genes.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidArgument("non-finite driving weight".into()));
    }
    Ok(genes.to_vec())
}

/// Schedules from the first `k_a + k_b` genes, then one driving schedule
/// per operator from consecutive blocks of `k_c` genes.
pub fn decode_d3(
    genes: &[f64],
    k_a: usize,
    k_b: usize,
    k_c: usize,
    d: usize,
) -> Result<(PolynomialSchedule, PolynomialSchedule, Vec<PolynomialSchedule>)> {
    check_d(d)?;
    check_len(genes, k_a + k_b + d * k_c)?;
    let (a, b) = decode_d1(&genes[..k_a + k_b], k_a, k_b)?;
    let rest = &genes[k_a + k_b..];
    let c = (0..d)
        .map(|i| PolynomialSchedule::driving(rest[i * k_c..(i + 1) * k_c].to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok((a, b, c))
}

/// Single-objective target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitnessKind {
    /// Final ground-state probability.
    Fidelity,
    /// `<psi(T)| -H_z |psi(T)>`; for Ising this is the cut value `<H_I>`.
    MeanEnergy,
    /// NSGA-II over `[area, final pgs]`.
    MultiObjective,
}

/// GA settings with every field optional; unset fields fall back to the
/// mode's preset.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaOverrides {
    pub population: Option<usize>,
    pub generations: Option<usize>,
    pub tournament_size: Option<usize>,
    pub crossover_prob: Option<f64>,
    pub mutation_prob: Option<f64>,
    pub gene_mutation_prob: Option<f64>,
    pub mutation_mean: Option<f64>,
    pub mutation_variance: Option<f64>,
    pub gene_min: Option<f64>,
    pub gene_max: Option<f64>,
    pub seed: Option<u64>,
}

impl GaOverrides {
    pub fn resolve(&self, preset: GaHyperparams) -> GaHyperparams {
        GaHyperparams {
            population: self.population.unwrap_or(preset.population),
            generations: self.generations.unwrap_or(preset.generations),
            tournament_size: self.tournament_size.unwrap_or(preset.tournament_size),
            crossover_prob: self.crossover_prob.unwrap_or(preset.crossover_prob),
            mutation_prob: self.mutation_prob.unwrap_or(preset.mutation_prob),
            gene_mutation_prob: self.gene_mutation_prob.unwrap_or(preset.gene_mutation_prob),
            mutation_mean: self.mutation_mean.unwrap_or(preset.mutation_mean),
            mutation_variance: self.mutation_variance.unwrap_or(preset.mutation_variance),
            gene_min: self.gene_min.unwrap_or(preset.gene_min),
            gene_max: self.gene_max.unwrap_or(preset.gene_max),
            seed: self.seed.unwrap_or(preset.seed),
        }
    }
}

/// One optimization problem: physics model, chromosome layout, annealing
/// time, fitness and GA settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub model: Model,
    pub mode: Mode,
    /// Annealing time; when absent, `T_AD / 10` rounded to one decimal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annealing_time: Option<f64>,
    #[serde(default = "unit")]
    pub gamma: f64,
    /// Defaults to fidelity for p-spin and mean energy for Ising.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitness: Option<FitnessKind>,
    #[serde(default)]
    pub ga: GaOverrides,
    /// Chromosomes whose coefficients exceed this on the sample grid score
    /// zero. Non-positive disables the bound.
    #[serde(default = "default_bound")]
    pub amplitude_bound: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_bound() -> f64 {
    DEFAULT_AMPLITUDE_BOUND
}

fn default_samples() -> usize {
    crate::dynamics::DEFAULT_SAMPLES
}

impl ProblemSpec {
    pub fn new(model: Model, mode: Mode) -> Self {
        Self {
            model,
            mode,
            annealing_time: None,
            gamma: 1.0,
            fitness: None,
            ga: GaOverrides::default(),
            amplitude_bound: DEFAULT_AMPLITUDE_BOUND,
            samples: default_samples(),
        }
    }

    pub fn with_annealing_time(mut self, t: f64) -> Self {
        self.annealing_time = Some(t);
        self
    }

    pub fn with_fitness(mut self, fitness: FitnessKind) -> Self {
        self.fitness = Some(fitness);
        self
    }

    pub fn with_generations(mut self, generations: usize) -> Self {
        self.ga.generations = Some(generations);
        self
    }

    pub fn fitness_kind(&self) -> FitnessKind {
        self.fitness.unwrap_or(match self.model {
            Model::PSpin { .. } => FitnessKind::Fidelity,
            Model::Ising { .. } => FitnessKind::MeanEnergy,
        })
    }

    pub fn hyperparams(&self) -> GaHyperparams {
        self.ga.resolve(self.mode.default_hyperparams())
    }

    pub fn chromosome_len(&self) -> usize {
        self.mode.chromosome_len()
    }

    /// Checks everything that can be checked without building operators.
    pub fn validate(&self) -> Result<()> {
        if self.mode.chromosome_len() == 0 {
            return Err(Error::InvalidArgument("mode yields an empty chromosome".into()));
        }
        if let Mode::OdOnly { d } | Mode::Joint { d, .. } = self.mode {
            check_d(d)?;
        }
        if let Some(t) = self.annealing_time {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "annealing_time must be positive, got {t}"
                )));
            }
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if self.samples < 2 {
            return Err(Error::InvalidArgument(format!(
                "samples must be at least 2, got {}",
                self.samples
            )));
        }
        if self.amplitude_bound.is_nan() {
            return Err(Error::InvalidArgument("amplitude_bound is NaN".into()));
        }
        self.hyperparams().validate()?;
        if let Model::PSpin { n, p, .. } = self.model {
            crate::spin::PSpinModel::new(n, p)?;
        }
        self.model.ising_instance()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d1_zero_and_closure() {
        let (a, b) = decode_d1(&[0.0; 4], 2, 2).unwrap();
        assert_eq!(a.power_coeffs(), &[1.0, 0.0, 0.0, -1.0]);
        assert_eq!(b.power_coeffs(), &[0.0, 0.0, 0.0, 1.0]);
        let (a, _) = decode_d1(&[-1.0, 0.0, 1.0, 0.0], 2, 2).unwrap();
        assert_eq!(a.power_coeffs(), &[1.0, -1.0, 0.0, 0.0]);
        assert!(matches!(decode_d1(&[0.0; 3], 2, 2), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn d2_guards() {
        assert_eq!(decode_d2(&[0.0, 1.0, 0.0], 3).unwrap(), vec![0.0, 1.0, 0.0]);
        assert!(matches!(decode_d2(&[0.0; 4], 3), Err(Error::LengthMismatch { .. })));
        assert_eq!(decode_d2(&[0.0; 4], 4), Err(Error::UnsupportedOperatorCount(4)));
    }

    #[test]
    fn d3_layout_is_operator_major() {
        let mode = Mode::Joint { k_a: 2, k_b: 2, k_c: 3, d: 3 };
        assert_eq!(mode.chromosome_len(), 13);
        let genes: Vec<f64> = (0..13).map(|i| i as f64 * 0.1).collect();
        let (_, _, c) = decode_d3(&genes, 2, 2, 3, 3).unwrap();
        assert_eq!(c[0].coeffs(), &genes[4..7]);
        assert_eq!(c[2].coeffs(), &genes[10..13]);
        let zero = mode.decode(&[0.0; 13]).unwrap();
        for (ci, w) in &zero.driving {
            assert_eq!((ci.value(0.3), *w), (0.0, 1.0));
        }
    }

    #[test]
    fn decode_round_trip() {
        let modes = [
            Mode::ScheduleOnly { k_a: 3, k_b: 2 },
            Mode::OdOnly { d: 9 },
            Mode::Joint { k_a: 1, k_b: 2, k_c: 2, d: 3 },
            Mode::Joint { k_a: 2, k_b: 2, k_c: 0, d: 3 },
        ];
        for mode in modes {
            let genes: Vec<f64> = (0..mode.chromosome_len()).map(|i| (i as f64).sin()).collect();
            assert_eq!(mode.decode(&genes).unwrap().genes(&mode), genes);
        }
    }

    #[test]
    fn spec_defaults_and_validation() {
        let spec = ProblemSpec::new(Model::PSpin { n: 15, p: 3, coupling: 1.0 }, Mode::OdOnly { d: 3 });
        spec.validate().unwrap();
        assert_eq!(spec.fitness_kind(), FitnessKind::Fidelity);
        assert_eq!(spec.hyperparams().tournament_size, 3);
        let ising = ProblemSpec::new(
            Model::Ising { n: 5, edges: None, couplings: None, instance_seed: 3 },
            Mode::ScheduleOnly { k_a: 3, k_b: 3 },
        );
        ising.validate().unwrap();
        assert_eq!(ising.fitness_kind(), FitnessKind::MeanEnergy);
        assert_eq!(ising.hyperparams().tournament_size, 6);
        let bad = ProblemSpec::new(Model::Ising { n: 4, edges: None, couplings: None, instance_seed: 0 }, Mode::OdOnly { d: 3 });
        assert!(bad.validate().is_err());
        let bad_d = ProblemSpec::new(Model::PSpin { n: 3, p: 3, coupling: 1.0 }, Mode::OdOnly { d: 5 });
        assert!(bad_d.validate().is_err());
    }

    #[test]
    fn overrides_fall_back_to_preset() {
        let o = GaOverrides { generations: Some(7), seed: Some(9), ..Default::default() };
        let p = o.resolve(GaHyperparams::driving_defaults());
        assert_eq!((p.generations, p.seed, p.tournament_size), (7, 9, 3));
    }
}
