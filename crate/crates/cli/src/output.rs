use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use annealga::experiments::{Problem, ProblemSpec, RepetitionSummary, RunRecord};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SUMMARY_FILE: &str = "summary.json";
pub const RUNS_FILE: &str = "runs.jsonl";
pub const BEST_FILE: &str = "best_chromosomes.txt";
pub const BASELINE_FILE: &str = "baseline.json";
pub const BASELINE_TRACE_FILE: &str = "baseline_trace.tsv";

pub fn trace_file(repetition: usize) -> String {
    format!("trace_{repetition:04}.tsv")
}

/// Config hash and seed stamped into every output file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn comment(&self) -> String {
        format!("# config_hash={} seed={}\n", self.config_hash, self.seed)
    }

    /// Reads the leading comment written by [`Provenance::comment`].
    pub fn parse_comment(line: &str) -> Option<Self> {
        let rest = line.strip_prefix("# ")?;
        let mut hash = None;
        let mut seed = None;
        for field in rest.split_whitespace() {
            match field.split_once('=') {
                Some(("config_hash", v)) => hash = Some(v.to_string()),
                Some(("seed", v)) => seed = v.parse().ok(),
                _ => {}
            }
        }
        Some(Self {
            config_hash: hash?,
            seed: seed?,
        })
    }
}

/// Aggregate document of one `run` invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryDocument {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub qubits: usize,
    pub annealing_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adiabatic_timescale: Option<f64>,
    pub problem: ProblemSpec,
    pub n_rep: usize,
    pub emit_traces: bool,
    pub summary: RepetitionSummary,
}

#[derive(Serialize)]
struct RunLine<'a> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    #[serde(flatten)]
    record: &'a RunRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineDocument {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub annealing_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adiabatic_timescale: Option<f64>,
    pub fidelity: f64,
    pub min_gap: f64,
    pub min_gap_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approximation_ratio: Option<f64>,
}

/// The only component that touches the output directory.
pub struct ResultWriter {
    dir: PathBuf,
    provenance: Provenance,
}

impl ResultWriter {
    pub fn create(dir: &Path, provenance: Provenance) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            provenance,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn write(&self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write(name, &text)
    }

    pub fn runs(&self, records: &[RunRecord]) -> CliResult<PathBuf> {
        let mut text = String::new();
        for record in records {
            let line = RunLine {
                provenance: &self.provenance,
                record,
            };
            text.push_str(&serde_json::to_string(&line).expect("serializable"));
            text.push('\n');
        }
        self.write(RUNS_FILE, &text)
    }

    /// Text table preceded by the provenance comment.
    pub fn table(&self, name: &str, body: &str) -> CliResult<PathBuf> {
        let mut text = self.provenance.comment();
        text.push_str(body);
        self.write(name, &text)
    }

    /// Best chromosome of every successful run, with its decoded schedules
    /// as `kind k c1 .. ck` records.
    pub fn best_chromosomes(&self, problem: &Problem, records: &[RunRecord]) -> CliResult<PathBuf> {
        let mode = problem.spec().mode;
        let mut text = String::new();
        for record in records {
            let Some(m) = record.metrics() else { continue };
            let _ = writeln!(
                text,
                "run {} seed {} best_fitness {}",
                record.repetition, record.seed, m.best_fitness
            );
            let genes: Vec<String> = m.best_genes.iter().map(f64::to_string).collect();
            let _ = writeln!(text, "genes {}", genes.join(" "));
            let decoded = mode.decode(&m.best_genes)?;
            let _ = writeln!(text, "{}", decoded.driver);
            let _ = writeln!(text, "{}", decoded.problem);
            for (i, (schedule, weight)) in decoded.driving.iter().enumerate() {
                let _ = writeln!(text, "driving {} weight {weight} {schedule}", i + 1);
            }
        }
        self.table(BEST_FILE, &text)
    }
}
