//! Binding chromosomes to annealing problems, repeated GA runs and their
//! summary statistics.

mod evaluator;
mod problem;
mod repetitions;
pub mod stats;

pub use evaluator::{approximation_ratio, round_to_decimal, Problem, TIMESCALE_GRID};
pub use problem::{
    decode_d1, decode_d2, decode_d3, Decoded, FitnessKind, GaOverrides, Mode, Model, ProblemSpec,
    DEFAULT_AMPLITUDE_BOUND,
};
pub use repetitions::{
    run_once, run_problem_repetitions, run_repetitions, run_repetitions_with, RepetitionSummary,
    RunMetrics, RunOutcome, RunRecord,
};
