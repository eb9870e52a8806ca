//! Time evolution under `H(s) = A(s) Hx + B(s) Hz + sum_i w_i C_i(s) O_i`
//! with `s = t / T`, plus the fitness metrics computed along the path.

mod exponential;
mod integrator;

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::operator::{GroundManifold, HermitianOperator, StateVector, C64};
use crate::schedule::PolynomialSchedule;

pub use exponential::propagate_piecewise_exponential;
pub use integrator::{DEFAULT_ATOL, DEFAULT_RTOL};

use integrator::{Coefficients, Stepper, TermKernel};

pub const DEFAULT_SAMPLES: usize = 100;
/// Degeneracy tolerance for the p-spin target (non-degenerate for odd p).
pub const PSPIN_DEGENERACY_TOL: f64 = 1e-9;
/// Degeneracy tolerance for Ising targets with exact Z2 degeneracy.
pub const ISING_DEGENERACY_TOL: f64 = 1e-6;
/// Sampled minimal gaps below this mark a level crossing.
pub const CROSSING_THRESHOLD: f64 = 1e-6;
/// Gaps below this make the adiabatic timescale undefined.
pub const DEGENERATE_GAP: f64 = 1e-12;

/// One optimal-driving term `weight * schedule(s) * operator`.
#[derive(Clone, Debug)]
pub struct DrivingTerm {
    pub operator: Arc<HermitianOperator>,
    pub schedule: PolynomialSchedule,
    pub weight: f64,
}

impl DrivingTerm {
    pub fn coefficient(&self, s: f64) -> f64 {
        self.weight * self.schedule.value(s)
    }

    pub fn coefficient_derivative(&self, s: f64) -> f64 {
        self.weight * self.schedule.derivative(s)
    }
}

/// Full description of one annealing run.
#[derive(Clone, Debug)]
pub struct AnnealingSetup {
    pub driver: Arc<HermitianOperator>,
    pub problem: Arc<HermitianOperator>,
    pub driver_schedule: PolynomialSchedule,
    pub problem_schedule: PolynomialSchedule,
    pub driving: Vec<DrivingTerm>,
    pub annealing_time: f64,
    pub samples: usize,
    pub degeneracy_tol: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl AnnealingSetup {
    pub fn new(
        driver: Arc<HermitianOperator>,
        problem: Arc<HermitianOperator>,
        driver_schedule: PolynomialSchedule,
        problem_schedule: PolynomialSchedule,
        driving: Vec<DrivingTerm>,
        annealing_time: f64,
    ) -> Result<Self> {
        let setup = Self {
            driver,
            problem,
            driver_schedule,
            problem_schedule,
            driving,
            annealing_time,
            samples: DEFAULT_SAMPLES,
            degeneracy_tol: PSPIN_DEGENERACY_TOL,
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
        };
        setup.validate()?;
        Ok(setup)
    }

    pub fn with_samples(mut self, samples: usize) -> Result<Self> {
        self.samples = samples;
        self.validate()?;
        Ok(self)
    }

    pub fn with_degeneracy_tol(mut self, tol: f64) -> Self {
        self.degeneracy_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.driver.dim();
        for op in std::iter::once(&*self.problem).chain(self.driving.iter().map(|t| &*t.operator)) {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: op.dim(),
                });
            }
        }
        if !(self.annealing_time > 0.0) || !self.annealing_time.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "annealing time must be positive, got {}",
                self.annealing_time
            )));
        }
        if self.samples < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 samples, got {}",
                self.samples
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.driver.dim()
    }

    fn terms(&self) -> Vec<&HermitianOperator> {
        let mut terms = vec![&*self.driver, &*self.problem];
        terms.extend(self.driving.iter().map(|t| &*t.operator));
        terms
    }

    /// `[A(s), B(s), w_1 C_1(s), ...]`
    pub fn coefficients(&self, s: f64) -> Vec<f64> {
        let mut out = vec![0.0; 2 + self.driving.len()];
        self.coefficients_at(s, &mut out);
        out
    }

    /// `d/ds` of [`Self::coefficients`].
    pub fn coefficient_derivatives(&self, s: f64) -> Vec<f64> {
        let mut out = vec![
            self.driver_schedule.derivative(s),
            self.problem_schedule.derivative(s),
        ];
        out.extend(self.driving.iter().map(|t| t.coefficient_derivative(s)));
        out
    }

    /// Largest `|coefficient|` over the sample grid, across all terms.
    pub fn max_coefficient_amplitude(&self) -> f64 {
        sample_grid(self.samples)
            .into_iter()
            .flat_map(|s| self.coefficients(s))
            .fold(0.0, |a, c| a.max(c.abs()))
    }

    /// The initial state: ground state of `H(0)`.
    pub fn initial_state(&self) -> StateVector {
        let gm = self.assemble_at(0.0).ground_manifold(self.degeneracy_tol);
        gm.vectors[0].clone()
    }

    fn assemble_at(&self, s: f64) -> HermitianOperator {
        let coeffs = self.coefficients(s);
        weighted_sum(&self.terms(), &coeffs)
    }

    fn derivative_at(&self, s: f64) -> HermitianOperator {
        let coeffs = self.coefficient_derivatives(s);
        weighted_sum(&self.terms(), &coeffs)
    }
}

impl Coefficients for AnnealingSetup {
    fn coefficients_at(&self, s: f64, out: &mut [f64]) {
        out[0] = self.driver_schedule.value(s);
        out[1] = self.problem_schedule.value(s);
        for (o, t) in out[2..].iter_mut().zip(&self.driving) {
            *o = t.coefficient(s);
        }
    }
}

fn weighted_sum(terms: &[&HermitianOperator], coeffs: &[f64]) -> HermitianOperator {
    let pairs: Vec<(f64, &HermitianOperator)> =
        coeffs.iter().copied().zip(terms.iter().copied()).collect();
    HermitianOperator::linear_combination(&pairs).expect("validated dimensions")
}

/// `n` evenly spaced points of `[0, 1]`, endpoints included.
pub fn sample_grid(n: usize) -> Vec<f64> {
    let last = (n.max(2) - 1) as f64;
    (0..n.max(2))
        .map(|k| if k as f64 == last { 1.0 } else { k as f64 / last })
        .collect()
}

/// `H(s)` for `0 <= s <= 1`.
pub fn assemble_hamiltonian(setup: &AnnealingSetup, s: f64) -> Result<HermitianOperator> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::TimeOutOfRange(s));
    }
    Ok(setup.assemble_at(s))
}

fn check_state(setup: &AnnealingSetup, psi0: &StateVector) -> Result<()> {
    if psi0.len() != setup.dim() {
        return Err(Error::DimensionMismatch {
            expected: setup.dim(),
            got: psi0.len(),
        });
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "initial state must be normalized, |psi0| = {norm}"
        )));
    }
    Ok(())
}

/// Integrates the Schrodinger equation and returns the state at each of the
/// `setup.samples` grid points (the first is `psi0`).
pub fn propagate_states(setup: &AnnealingSetup, psi0: &StateVector) -> Result<Vec<StateVector>> {
    check_state(setup, psi0)?;
    let terms = setup.terms();
    let mut kernel = TermKernel::new(&terms);
    let mut stepper = Stepper::new(
        &mut kernel,
        setup,
        terms.len(),
        setup.annealing_time,
        setup.rtol,
        setup.atol,
    );
    let grid = sample_grid(setup.samples);
    let mut psi: Vec<C64> = psi0.iter().copied().collect();
    let mut states = Vec::with_capacity(grid.len());
    states.push(psi0.clone());
    for w in grid.windows(2) {
        let t0 = w[0] * setup.annealing_time;
        let t1 = w[1] * setup.annealing_time;
        stepper.advance(&mut psi, t0, t1)?;
        states.push(StateVector::from_column_slice(&psi));
    }
    Ok(states)
}

/// Final state `psi(T)` only.
pub fn propagate_final(setup: &AnnealingSetup, psi0: &StateVector) -> Result<StateVector> {
    check_state(setup, psi0)?;
    let terms = setup.terms();
    let mut kernel = TermKernel::new(&terms);
    let mut stepper = Stepper::new(
        &mut kernel,
        setup,
        terms.len(),
        setup.annealing_time,
        setup.rtol,
        setup.atol,
    );
    let mut psi: Vec<C64> = psi0.iter().copied().collect();
    // Stop at every sample point so the step sequence matches
    // `propagate_states` exactly.
    let grid = sample_grid(setup.samples);
    for w in grid.windows(2) {
        stepper.advance(
            &mut psi,
            w[0] * setup.annealing_time,
            w[1] * setup.annealing_time,
        )?;
    }
    Ok(StateVector::from_column_slice(&psi))
}

/// Time-sampled record of one propagation.
#[derive(Clone, Debug)]
pub struct EvolutionTrace {
    pub s_grid: Vec<f64>,
    pub psi: Vec<StateVector>,
    /// `(E0, E1)` per sample.
    pub energies: Vec<(f64, f64)>,
    pub gap: Vec<f64>,
    pub pgs: Vec<f64>,
    /// `[A, B, w_1 C_1, ..., w_d C_d]` per sample.
    pub schedule_values: Vec<Vec<f64>>,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.s_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_grid.is_empty()
    }

    pub fn final_pgs(&self) -> f64 {
        *self.pgs.last().expect("non-empty trace")
    }

    /// Columnar text: `s E0 E1 gap pgs A B C_1 .. C_d`, one row per sample.
    pub fn to_table(&self) -> String {
        let d = self
            .schedule_values
            .first()
            .map(|v| v.len().saturating_sub(2))
            .unwrap_or(0);
        let mut out = String::from("s\tE0\tE1\tgap\tpgs\tA\tB");
        for i in 1..=d {
            let _ = write!(out, "\tC_{i}");
        }
        out.push('\n');
        for k in 0..self.len() {
            let (e0, e1) = self.energies[k];
            let _ = write!(
                out,
                "{:.10e}\t{:.10e}\t{:.10e}\t{:.10e}\t{:.10e}",
                self.s_grid[k], e0, e1, self.gap[k], self.pgs[k]
            );
            for v in &self.schedule_values[k] {
                let _ = write!(out, "\t{v:.10e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Propagates and records spectra, gaps and ground-state probabilities.
pub fn propagate(setup: &AnnealingSetup, psi0: &StateVector) -> Result<EvolutionTrace> {
    let states = propagate_states(setup, psi0)?;
    let s_grid = sample_grid(setup.samples);
    let mut energies = Vec::with_capacity(states.len());
    let mut gap = Vec::with_capacity(states.len());
    let mut pgs = Vec::with_capacity(states.len());
    let mut schedule_values = Vec::with_capacity(states.len());
    for (s, psi) in s_grid.iter().zip(&states) {
        let gm = setup.assemble_at(*s).ground_manifold(setup.degeneracy_tol);
        energies.push((gm.e0, gm.e1));
        gap.push(gm.gap());
        pgs.push(gm.probability(psi));
        schedule_values.push(setup.coefficients(*s));
    }
    Ok(EvolutionTrace {
        s_grid,
        psi: states,
        energies,
        gap,
        pgs,
        schedule_values,
    })
}

/// Ground manifold of the final Hamiltonian `H(1)`.
pub fn final_ground_manifold(setup: &AnnealingSetup) -> GroundManifold {
    setup.assemble_at(1.0).ground_manifold(setup.degeneracy_tol)
}

pub use crate::operator::ground_state_probability;

/// Fidelity `P_gs(T)` with respect to the ground manifold of `H(1)`.
pub fn fidelity_fitness(setup: &AnnealingSetup, psi0: &StateVector) -> Result<f64> {
    let psi = propagate_final(setup, psi0)?;
    Ok(final_ground_manifold(setup).probability(&psi))
}

/// `<psi(T)| observable |psi(T)>`.
pub fn mean_energy_fitness(
    setup: &AnnealingSetup,
    psi0: &StateVector,
    observable: &HermitianOperator,
) -> Result<f64> {
    if observable.dim() != setup.dim() {
        return Err(Error::DimensionMismatch {
            expected: setup.dim(),
            got: observable.dim(),
        });
    }
    let psi = propagate_final(setup, psi0)?;
    Ok(observable.expectation(&psi))
}

/// Time-averaged ground-state probability by the trapezoidal rule over the
/// trace's `s` grid.
pub fn area_fitness(trace: &EvolutionTrace) -> f64 {
    trapezoid(&trace.s_grid, &trace.pgs)
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Ratio `|<e0|dH/ds|e1>| / (e1 - e0)^2` at one point of the path.
pub fn adiabatic_ratio(setup: &AnnealingSetup, s: f64) -> Result<f64> {
    let spectrum = setup.assemble_at(s).spectrum();
    let gap = spectrum.gap();
    if gap < DEGENERATE_GAP {
        return Err(Error::DegenerateGap { s, gap });
    }
    let dh = setup.derivative_at(s);
    let v0 = spectrum.vectors.column(0);
    let v1 = spectrum.vectors.column(1);
    let element = v0.dotc(&(dh.matrix() * v1));
    Ok(element.norm() / (gap * gap))
}

/// Adiabatic timescale: the maximum of [`adiabatic_ratio`] over `fine_grid`
/// evenly spaced points, with `dH/ds` from the analytic schedule derivatives.
pub fn adiabatic_timescale(setup: &AnnealingSetup, fine_grid: usize) -> Result<f64> {
    adiabatic_timescale_location(setup, fine_grid).map(|(v, _)| v)
}

/// Like [`adiabatic_timescale`] but also returns where the maximum sits.
pub fn adiabatic_timescale_location(setup: &AnnealingSetup, fine_grid: usize) -> Result<(f64, f64)> {
    let mut best = (0.0, 0.0);
    for s in sample_grid(fine_grid) {
        let r = adiabatic_ratio(setup, s)?;
        if r > best.0 {
            best = (r, s);
        }
    }
    Ok(best)
}

/// Smallest sampled gap and the `s` where it occurs (first on ties).
pub fn minimal_gap(trace: &EvolutionTrace) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0);
    for (g, s) in trace.gap.iter().zip(&trace.s_grid) {
        if *g < best.0 {
            best = (*g, *s);
        }
    }
    best
}

/// True when the sampled gap closes below [`CROSSING_THRESHOLD`].
pub fn has_level_crossing(trace: &EvolutionTrace) -> bool {
    minimal_gap(trace).0 < CROSSING_THRESHOLD
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::HERMITIAN_TOL;
    use crate::schedule::linear_schedules;
    use crate::spin::{
        collective_spin_operators, pspin_hamiltonian, transverse_hamiltonian, PSpinModel, SpinSector,
    };

    fn pspin_setup(n: usize, t: f64, gammas: &[f64]) -> AnnealingSetup {
        let model = PSpinModel::new(n, 3).unwrap();
        let sector = model.sector();
        let hx = Arc::new(transverse_hamiltonian(sector, 1.0).unwrap());
        let hz = Arc::new(pspin_hamiltonian(&model, sector).unwrap());
        let spins = collective_spin_operators(sector);
        let driving = spins
            .as_array()
            .iter()
            .zip(gammas)
            .map(|(op, &g)| DrivingTerm {
                operator: Arc::new((*op).clone()),
                schedule: PolynomialSchedule::fixed_pace(),
                weight: g,
            })
            .collect();
        let (a, b) = linear_schedules();
        AnnealingSetup::new(hx, hz, a, b, driving, t).unwrap()
    }

    #[test]
    fn boundary_hamiltonians() {
        let setup = pspin_setup(4, 1.0, &[0.3, -0.7, 1.1]);
        assert_eq!(assemble_hamiltonian(&setup, 0.0).unwrap(), *setup.driver);
        assert_eq!(assemble_hamiltonian(&setup, 1.0).unwrap(), *setup.problem);
        assert!(assemble_hamiltonian(&setup, 1.2).is_err());
    }

    #[test]
    fn midpoint_with_sy_drive() {
        let setup = pspin_setup(3, 1.0, &[0.0, 1.0, 0.0]);
        let h = assemble_hamiltonian(&setup, 0.5).unwrap();
        let spins = collective_spin_operators(SpinSector::new(3).unwrap());
        let expected = HermitianOperator::linear_combination(&[
            (0.5, &*setup.driver),
            (0.5, &*setup.problem),
            (0.25, &spins.sy),
        ])
        .unwrap();
        assert!((h.matrix() - expected.matrix()).camax() < 1e-15);
        assert!(h.hermiticity_error() < HERMITIAN_TOL);
    }

    #[test]
    fn sudden_limit_keeps_state() {
        let setup = pspin_setup(6, 1e-6, &[]);
        let psi0 = setup.initial_state();
        let psi = propagate_final(&setup, &psi0).unwrap();
        assert!(1.0 - psi0.dotc(&psi).norm_sqr() < 1e-9);
    }

    #[test]
    fn stationary_state_keeps_unit_pgs() {
        let model = PSpinModel::new(5, 3).unwrap();
        let hx = Arc::new(transverse_hamiltonian(model.sector(), 1.0).unwrap());
        // A = 1 everywhere and B = 0 cannot satisfy the closures, so use a
        // problem operator equal to the driver: H(s) = (A + B) Hx = Hx.
        let (a, b) = linear_schedules();
        let setup = AnnealingSetup::new(hx.clone(), hx.clone(), a, b, vec![], 4.0).unwrap();
        let psi0 = setup.initial_state();
        let trace = propagate(&setup, &psi0).unwrap();
        for p in &trace.pgs {
            assert!((p - 1.0).abs() < 1e-7, "{p}");
        }
    }

    #[test]
    fn rejects_bad_initial_state() {
        let setup = pspin_setup(3, 1.0, &[]);
        let wrong_dim = StateVector::from_element(3, C64::new(1.0, 0.0));
        assert!(propagate(&setup, &wrong_dim).is_err());
        let unnormalized = StateVector::from_element(4, C64::new(1.0, 0.0));
        assert!(propagate(&setup, &unnormalized).is_err());
    }

    #[test]
    fn area_of_simple_profiles() {
        let grid = sample_grid(100);
        let make = |pgs: Vec<f64>| EvolutionTrace {
            s_grid: grid.clone(),
            psi: vec![],
            energies: vec![],
            gap: vec![1.0; 100],
            pgs,
            schedule_values: vec![],
        };
        assert!((area_fitness(&make(vec![1.0; 100])) - 1.0).abs() < 1e-12);
        assert!((area_fitness(&make(vec![0.5; 100])) - 0.5).abs() < 1e-12);
        let ramp = grid.iter().map(|s| 1.0 - s).collect();
        assert!((area_fitness(&make(ramp)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn minimal_gap_of_monotone_array() {
        let grid = sample_grid(10);
        let trace = EvolutionTrace {
            s_grid: grid.clone(),
            psi: vec![],
            energies: vec![],
            gap: grid.iter().map(|s| 1.0 + s).collect(),
            pgs: vec![1.0; 10],
            schedule_values: vec![],
        };
        assert_eq!(minimal_gap(&trace), (1.0, 0.0));
        assert!(!has_level_crossing(&trace));
    }

    #[test]
    fn landau_zener_timescale_matches_closed_form() {
        // n = 1: H(s) = -(1 - s) sigma_x - s sigma_z (p-spin with n = 1 is
        // -sigma_z for odd p). dH/ds = sigma_x - sigma_z, and the 2x2
        // ratio is |<0|dH|1>| / gap^2 with gap = 2 sqrt((1-s)^2 + s^2).
        let setup = pspin_setup(1, 1.0, &[]);
        let grid = 2001;
        let numeric = adiabatic_timescale(&setup, grid).unwrap();
        // For a real 2x2 H = -(a sx + b sz) with (a, b) = (1 - s, s), the
        // matrix element of dH/ds = (-a' sx - b' sz) between the eigenvectors
        // is |a b' - b a'| / sqrt(a^2 + b^2) = 1 / r.
        let closed = sample_grid(grid)
            .into_iter()
            .map(|s| {
                let r = ((1.0 - s).powi(2) + s * s).sqrt();
                (1.0 / r) / (2.0 * r).powi(2)
            })
            .fold(0.0, f64::max);
        assert!((numeric - closed).abs() < 1e-10, "{numeric} vs {closed}");
    }
}
