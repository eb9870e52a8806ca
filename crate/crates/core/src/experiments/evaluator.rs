use std::sync::Arc;

use crate::dynamics::{
    adiabatic_timescale, area_fitness, propagate, propagate_final, AnnealingSetup, DrivingTerm,
    EvolutionTrace, ISING_DEGENERACY_TOL, PSPIN_DEGENERACY_TOL,
};
use crate::error::{Error, Result};
use crate::ising::{ising_hamiltonian, IsingInstance};
use crate::operator::{GroundManifold, HermitianOperator, StateVector};
use crate::schedule::linear_schedules;
use crate::spin::{
    full_transverse_hamiltonian, od_basis_operators, pspin_hamiltonian, transverse_hamiltonian,
    PSpinModel,
};

use super::problem::{FitnessKind, Model, ProblemSpec};

/// Grid used to locate the maximum of the adiabatic ratio.
pub const TIMESCALE_GRID: usize = 1001;

/// Slack allowed when checking that probabilities stay in `[0, 1]`.
const PROBABILITY_SLACK: f64 = 1e-6;

/// A [`ProblemSpec`] with its operators built and the quantities shared by
/// every chromosome cached: the initial state, the final ground manifold and
/// the annealing time.
#[derive(Clone, Debug)]
pub struct Problem {
    spec: ProblemSpec,
    driver: Arc<HermitianOperator>,
    problem: Arc<HermitianOperator>,
    operators: Vec<Arc<HermitianOperator>>,
    /// Maximized by the mean-energy fitness: `-H_z`.
    objective: HermitianOperator,
    ising: Option<IsingInstance>,
    degeneracy_tol: f64,
    annealing_time: f64,
    adiabatic_timescale: Option<f64>,
    psi0: StateVector,
    final_manifold: GroundManifold,
}

/// `x` rounded to one decimal, never below 0.1.
pub fn round_to_decimal(x: f64) -> f64 {
    ((x * 10.0).round() / 10.0).max(0.1)
}

impl Problem {
    pub fn new(spec: &ProblemSpec) -> Result<Self> {
        spec.validate()?;
        let (driver, problem, sector, ising, tol) = match &spec.model {
            Model::PSpin { n, p, coupling } => {
                let model = PSpinModel::with_coupling(*n, *p, *coupling)?;
                let sector = model.sector();
                (
                    transverse_hamiltonian(sector, spec.gamma)?,
                    pspin_hamiltonian(&model, sector)?,
                    Some(sector),
                    None,
                    PSPIN_DEGENERACY_TOL,
                )
            }
            Model::Ising { .. } => {
                let instance = spec.model.ising_instance()?.expect("ising model");
                (
                    full_transverse_hamiltonian(instance.qubits(), spec.gamma)?,
                    ising_hamiltonian(&instance)?.scaled(-1.0),
                    None,
                    Some(instance),
                    ISING_DEGENERACY_TOL,
                )
            }
        };
        let d = spec.mode.operator_count();
        let operators = match (d, sector) {
            (0, _) => Vec::new(),
            (d, Some(sector)) => od_basis_operators(sector, d)?.into_iter().map(Arc::new).collect(),
            (_, None) => {
                return Err(Error::InvalidArgument(
                    "driving operators are only defined for the p-spin model".into(),
                ))
            }
        };
        let objective = problem.scaled(-1.0);
        let driver = Arc::new(driver);
        let problem = Arc::new(problem);
        let psi0 = driver.ground_manifold(tol).vectors[0].clone();
        let final_manifold = problem.ground_manifold(tol);

        let mut out = Self {
            spec: spec.clone(),
            driver,
            problem,
            operators,
            objective,
            ising,
            degeneracy_tol: tol,
            annealing_time: spec.annealing_time.unwrap_or(1.0),
            adiabatic_timescale: None,
            psi0,
            final_manifold,
        };
        if spec.annealing_time.is_none() {
            let t_ad = adiabatic_timescale(&out.baseline_setup()?, TIMESCALE_GRID)?;
            out.adiabatic_timescale = Some(t_ad);
            out.annealing_time = round_to_decimal(t_ad / 10.0);
        }
        Ok(out)
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn annealing_time(&self) -> f64 {
        self.annealing_time
    }

    /// Present when the annealing time was derived automatically.
    pub fn adiabatic_timescale(&self) -> Option<f64> {
        self.adiabatic_timescale
    }

    pub fn chromosome_len(&self) -> usize {
        self.spec.chromosome_len()
    }

    pub fn ising_instance(&self) -> Option<&IsingInstance> {
        self.ising.as_ref()
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.psi0
    }

    pub fn final_manifold(&self) -> &GroundManifold {
        &self.final_manifold
    }

    pub fn driving_operators(&self) -> &[Arc<HermitianOperator>] {
        &self.operators
    }

    fn finish(&self, setup: AnnealingSetup) -> Result<AnnealingSetup> {
        Ok(setup
            .with_samples(self.spec.samples)?
            .with_degeneracy_tol(self.degeneracy_tol))
    }

    /// Linear schedules and no driving term, at this problem's annealing time.
    pub fn baseline_setup(&self) -> Result<AnnealingSetup> {
        let (a, b) = linear_schedules();
        let setup = AnnealingSetup::new(
            self.driver.clone(),
            self.problem.clone(),
            a,
            b,
            Vec::new(),
            self.annealing_time,
        )?;
        self.finish(setup)
    }

    pub fn setup(&self, genes: &[f64]) -> Result<AnnealingSetup> {
        let decoded = self.spec.mode.decode(genes)?;
        let driving = decoded
            .driving
            .into_iter()
            .zip(&self.operators)
            .map(|((schedule, weight), op)| DrivingTerm {
                operator: op.clone(),
                schedule,
                weight,
            })
            .collect();
        let setup = AnnealingSetup::new(
            self.driver.clone(),
            self.problem.clone(),
            decoded.driver,
            decoded.problem,
            driving,
            self.annealing_time,
        )?;
        self.finish(setup)
    }

    /// False when some coefficient leaves the configured bound on the
    /// sample grid.
    pub fn within_bound(&self, setup: &AnnealingSetup) -> bool {
        self.spec.amplitude_bound <= 0.0
            || setup.max_coefficient_amplitude() <= self.spec.amplitude_bound
    }

    pub fn final_state(&self, setup: &AnnealingSetup) -> Result<StateVector> {
        propagate_final(setup, &self.psi0)
    }

    pub fn fidelity_of(&self, psi: &StateVector) -> Result<f64> {
        checked_probability(self.final_manifold.probability(psi))
    }

    pub fn objective_of(&self, psi: &StateVector) -> f64 {
        self.objective.expectation(psi)
    }

    /// Single-objective fitness; zero for out-of-bound chromosomes.
    pub fn fitness(&self, genes: &[f64]) -> Result<f64> {
        let setup = self.setup(genes)?;
        if !self.within_bound(&setup) {
            return Ok(0.0);
        }
        let psi = self.final_state(&setup)?;
        match self.spec.fitness_kind() {
            FitnessKind::MeanEnergy => Ok(self.objective_of(&psi)),
            FitnessKind::Fidelity | FitnessKind::MultiObjective => self.fidelity_of(&psi),
        }
    }

    /// `[area, final pgs]`; `[0, 0]` for out-of-bound chromosomes.
    pub fn objectives(&self, genes: &[f64]) -> Result<[f64; 2]> {
        let setup = self.setup(genes)?;
        if !self.within_bound(&setup) {
            return Ok([0.0, 0.0]);
        }
        let trace = propagate(&setup, &self.psi0)?;
        let area = checked_probability(area_fitness(&trace))?;
        Ok([area, checked_probability(trace.final_pgs())?])
    }

    pub fn trace(&self, genes: &[f64]) -> Result<EvolutionTrace> {
        propagate(&self.setup(genes)?, &self.psi0)
    }

    pub fn baseline_trace(&self) -> Result<EvolutionTrace> {
        propagate(&self.baseline_setup()?, &self.psi0)
    }

    /// `<H_I>` of `psi` divided by the largest eigenvalue of `H_I`.
    pub fn approximation_ratio_of(&self, psi: &StateVector) -> Result<f64> {
        let instance = self.ising.as_ref().ok_or_else(|| {
            Error::InvalidArgument("approximation ratio needs an Ising model".into())
        })?;
        approximation_ratio(instance, self.objective_of(psi))
    }

    pub fn approximation_ratio(&self, genes: &[f64]) -> Result<f64> {
        let psi = self.final_state(&self.setup(genes)?)?;
        self.approximation_ratio_of(&psi)
    }

    pub fn baseline_approximation_ratio(&self) -> Result<f64> {
        let psi = self.final_state(&self.baseline_setup()?)?;
        self.approximation_ratio_of(&psi)
    }
}

/// `value / max(H_I)`, with the maximum over all basis states.
pub fn approximation_ratio(instance: &IsingInstance, value: f64) -> Result<f64> {
    let max = (0..1usize << instance.qubits())
        .map(|b| instance.energy(b))
        .fold(f64::NEG_INFINITY, f64::max);
    if max.abs() < 1e-12 {
        return Err(Error::UndefinedRatio(max));
    }
    Ok(value / max)
}

fn checked_probability(p: f64) -> Result<f64> {
    if (-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
        Ok(p.clamp(0.0, 1.0))
    } else {
        Err(Error::Fitness(format!("probability {p} outside [0, 1]")))
    }
}
