use std::path::PathBuf;

use annealga::dynamics::{adiabatic_timescale_location, minimal_gap};
use annealga::experiments::{round_to_decimal, run_problem_repetitions, Problem, TIMESCALE_GRID};
use annealga::par;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::output::{
    trace_file, BaselineDocument, Provenance, ResultWriter, SummaryDocument, BASELINE_FILE,
    BASELINE_TRACE_FILE, SUMMARY_FILE,
};

/// Command-line overrides applied on top of a loaded config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

impl Overrides {
    fn seed(&self, config: &ExperimentConfig) -> u64 {
        self.seed.unwrap_or(config.seed)
    }

    fn output_dir(&self, config: &ExperimentConfig) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| config.output_dir.clone())
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub successes: usize,
    pub failures: usize,
    pub median_fitness: Option<f64>,
    pub median_fidelity: Option<f64>,
}

/// Runs `n_rep` GA repetitions and writes the summary, the per-run records,
/// the best chromosomes and optionally their re-simulated traces.
pub fn cmd_run(config: &ExperimentConfig, overrides: &Overrides) -> CliResult<RunReport> {
    let seed = overrides.seed(config);
    let provenance = Provenance {
        config_hash: config.hash(),
        seed,
    };
    let writer = ResultWriter::create(&overrides.output_dir(config), provenance.clone())?;
    let problem = Problem::new(&config.problem)?;

    let (summary, traces) = par::with_workers(overrides.workers, || {
        let summary = run_problem_repetitions(&problem, config.n_rep, seed);
        let traces = if config.emit_traces {
            let done: Vec<_> = summary
                .records
                .iter()
                .filter_map(|r| r.metrics().map(|m| (r.repetition, m.best_genes.clone())))
                .collect();
            par::map(&done, |(rep, genes)| (*rep, problem.trace(genes)))
        } else {
            Vec::new()
        };
        (summary, traces)
    });

    writer.runs(&summary.records)?;
    writer.best_chromosomes(&problem, &summary.records)?;
    for (rep, trace) in traces {
        writer.table(&trace_file(rep), &trace?.to_table())?;
    }
    let report = RunReport {
        output_dir: writer.dir().to_path_buf(),
        successes: summary.successes,
        failures: summary.failures,
        median_fitness: summary.median(),
        median_fidelity: summary.fidelity.map(|q| q.median),
    };
    writer.json(
        SUMMARY_FILE,
        &SummaryDocument {
            provenance,
            qubits: config.problem.model.qubits(),
            annealing_time: problem.annealing_time(),
            adiabatic_timescale: problem.adiabatic_timescale(),
            problem: config.problem.clone(),
            n_rep: config.n_rep,
            emit_traces: config.emit_traces,
            summary,
        },
    )?;
    Ok(report)
}

/// Linear schedules without driving at the configured annealing time.
pub fn cmd_baseline(config: &ExperimentConfig, overrides: &Overrides) -> CliResult<BaselineDocument> {
    let provenance = Provenance {
        config_hash: config.hash(),
        seed: overrides.seed(config),
    };
    let writer = ResultWriter::create(&overrides.output_dir(config), provenance.clone())?;
    let problem = Problem::new(&config.problem)?;
    let trace = problem.baseline_trace()?;
    let (min_gap, min_gap_s) = minimal_gap(&trace);
    let approximation_ratio = match problem.ising_instance() {
        Some(_) => Some(problem.approximation_ratio_of(trace.psi.last().expect("non-empty"))?),
        None => None,
    };
    let doc = BaselineDocument {
        provenance,
        annealing_time: problem.annealing_time(),
        adiabatic_timescale: problem.adiabatic_timescale(),
        fidelity: trace.final_pgs(),
        min_gap,
        min_gap_s,
        approximation_ratio,
    };
    writer.table(BASELINE_TRACE_FILE, &trace.to_table())?;
    writer.json(BASELINE_FILE, &doc)?;
    Ok(doc)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Timescale {
    pub t_ad: f64,
    /// Where the adiabatic ratio peaks.
    pub s_peak: f64,
    pub recommended: f64,
}

impl Timescale {
    pub fn to_table(&self) -> String {
        format!(
            "t_ad\t{}\ns_peak\t{}\nt_ad_over_10\t{}\nrecommended_t\t{}\n",
            self.t_ad,
            self.s_peak,
            self.t_ad / 10.0,
            self.recommended
        )
    }
}

/// Adiabatic timescale of the linear anneal; independent of the configured
/// annealing time.
pub fn cmd_timescale(config: &ExperimentConfig) -> CliResult<Timescale> {
    let mut spec = config.problem.clone();
    spec.annealing_time = Some(1.0);
    let problem = Problem::new(&spec)?;
    let (t_ad, s_peak) = adiabatic_timescale_location(&problem.baseline_setup()?, TIMESCALE_GRID)?;
    if !t_ad.is_finite() {
        return Err(CliError::Numeric(format!("adiabatic timescale is {t_ad}")));
    }
    Ok(Timescale {
        t_ad,
        s_peak,
        recommended: round_to_decimal(t_ad / 10.0),
    })
}
