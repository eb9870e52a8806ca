//! Plot-ready tables derived from result directories. Every kind has a
//! fixed header so downstream scripts can rely on column names.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use annealga::experiments::stats::{histogram, Quartiles};

use crate::error::{CliError, CliResult};
use crate::output::{trace_file, SummaryDocument, SUMMARY_FILE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    Gap,
    Pgs,
    Schedules,
    Histogram,
    Boxplot,
    #[value(name = "approx_ratio", alias = "approx-ratio")]
    ApproxRatio,
}

#[derive(Clone, Debug)]
pub struct PlotOptions {
    pub bins: usize,
    pub range: Option<(f64, f64)>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            bins: 20,
            range: None,
        }
    }
}

pub fn load_summary(dir: &Path) -> CliResult<SummaryDocument> {
    let path = dir.join(SUMMARY_FILE);
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::MissingData(format!("{}: {e}", path.display())))
}

/// A trace file split into its header and numeric rows.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TraceTable {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        let columns: Vec<String> = lines
            .next()
            .ok_or_else(|| CliError::MissingData("empty trace table".into()))?
            .split('\t')
            .map(str::to_string)
            .collect();
        let rows = lines
            .map(|line| {
                line.split('\t')
                    .map(|v| {
                        v.parse::<f64>()
                            .map_err(|_| CliError::MissingData(format!("bad trace value {v:?}")))
                    })
                    .collect::<CliResult<Vec<f64>>>()
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(Self { columns, rows })
    }

    fn column(&self, name: &str) -> CliResult<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::MissingData(format!("trace has no column {name:?}")))
    }
}

fn load_traces(dir: &Path, doc: &SummaryDocument) -> CliResult<Vec<(usize, TraceTable)>> {
    let mut out = Vec::new();
    for record in &doc.summary.records {
        if record.metrics().is_none() {
            continue;
        }
        let path: PathBuf = dir.join(trace_file(record.repetition));
        let text = fs::read_to_string(&path).map_err(|_| {
            CliError::MissingData(format!(
                "{} not found; rerun with emit_traces = true",
                path.display()
            ))
        })?;
        out.push((record.repetition, TraceTable::parse(&text)?));
    }
    if out.is_empty() {
        return Err(CliError::MissingData(format!(
            "no successful runs with traces in {}",
            dir.display()
        )));
    }
    Ok(out)
}

fn traces_table(traces: &[(usize, TraceTable)], kind: PlotKind) -> CliResult<String> {
    let mut out = String::new();
    match kind {
        PlotKind::Gap => {
            out.push_str("run\ts\tE0\tE1\tgap\n");
            for (run, t) in traces {
                let idx = ["s", "E0", "E1", "gap"].map(|c| t.column(c));
                let idx: Vec<usize> = idx.into_iter().collect::<CliResult<_>>()?;
                for row in &t.rows {
                    let _ = write!(out, "{run}");
                    for &i in &idx {
                        let _ = write!(out, "\t{:.10e}", row[i]);
                    }
                    out.push('\n');
                }
            }
        }
        PlotKind::Pgs => {
            out.push_str("run\ts\tpgs\n");
            for (run, t) in traces {
                let (s, p) = (t.column("s")?, t.column("pgs")?);
                for row in &t.rows {
                    let _ = writeln!(out, "{run}\t{:.10e}\t{:.10e}", row[s], row[p]);
                }
            }
        }
        PlotKind::Schedules => {
            out.push_str("run\ts\tseries\tvalue\n");
            for (run, t) in traces {
                let s = t.column("s")?;
                let first = t.column("A")?;
                for row in &t.rows {
                    for (i, name) in t.columns.iter().enumerate().skip(first) {
                        let _ = writeln!(out, "{run}\t{:.10e}\t{name}\t{:.10e}", row[s], row[i]);
                    }
                }
            }
        }
        _ => unreachable!("not a trace kind"),
    }
    Ok(out)
}

/// One boxplot row per system size, pooling all values given for it.
pub fn boxplot_table(groups: &BTreeMap<usize, Vec<f64>>) -> CliResult<String> {
    let mut out = String::from("n\tcount\tmin\tq1\tmedian\tq3\tmax\n");
    for (n, values) in groups {
        let q = Quartiles::from_values(values)?;
        let _ = writeln!(
            out,
            "{n}\t{}\t{}\t{}\t{}\t{}\t{}",
            q.count, q.min, q.q1, q.median, q.q3, q.max
        );
    }
    Ok(out)
}

pub fn histogram_table(values: &[f64], options: &PlotOptions) -> CliResult<String> {
    Ok(histogram(values, options.bins, options.range)?.to_table())
}

/// Builds the table of `kind` over one or more result directories.
pub fn cmd_plotdata(dirs: &[PathBuf], kind: PlotKind, options: &PlotOptions) -> CliResult<String> {
    if dirs.is_empty() {
        return Err(CliError::MissingData("no result directory given".into()));
    }
    let docs = dirs
        .iter()
        .map(|d| load_summary(d))
        .collect::<CliResult<Vec<_>>>()?;
    let mut out = String::new();
    for (dir, doc) in dirs.iter().zip(&docs) {
        let _ = writeln!(
            out,
            "# source={} config_hash={} seed={}",
            dir.display(),
            doc.provenance.config_hash,
            doc.provenance.seed
        );
    }
    let successes = |doc: &SummaryDocument| -> Vec<f64> {
        doc.summary
            .records
            .iter()
            .filter_map(|r| r.metrics().map(|m| m.fidelity))
            .collect()
    };
    let body = match kind {
        PlotKind::Gap | PlotKind::Pgs | PlotKind::Schedules => {
            let mut traces = Vec::new();
            for (dir, doc) in dirs.iter().zip(&docs) {
                traces.extend(load_traces(dir, doc)?);
            }
            traces_table(&traces, kind)?
        }
        PlotKind::Histogram => {
            let values: Vec<f64> = docs.iter().flat_map(successes).collect();
            histogram_table(&values, options)?
        }
        PlotKind::Boxplot => {
            let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for doc in &docs {
                groups.entry(doc.qubits).or_default().extend(successes(doc));
            }
            boxplot_table(&groups)?
        }
        PlotKind::ApproxRatio => {
            let values: Vec<f64> = docs
                .iter()
                .flat_map(|doc| {
                    doc.summary
                        .records
                        .iter()
                        .filter_map(|r| r.metrics().and_then(|m| m.approximation_ratio))
                })
                .collect();
            if values.is_empty() {
                return Err(CliError::MissingData(
                    "no approximation ratios; approx_ratio needs Ising results".into(),
                ));
            }
            histogram_table(&values, options)?
        }
    };
    out.push_str(&body);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_values_fill_one_bin() {
        let table = histogram_table(&[0.97; 8], &PlotOptions::default()).unwrap();
        let occupied = table
            .lines()
            .skip(1)
            .filter(|l| !l.ends_with("\t0"))
            .count();
        assert_eq!(occupied, 1);
        assert!(table.starts_with("lo\thi\tcount\n"));
    }

    #[test]
    fn boxplot_of_one_to_five() {
        let groups = BTreeMap::from([(15, vec![5.0, 1.0, 3.0, 2.0, 4.0])]);
        let table = boxplot_table(&groups).unwrap();
        assert_eq!(table.lines().nth(1).unwrap(), "15\t5\t1\t2\t3\t4\t5");
    }

    #[test]
    fn trace_table_round_trip() {
        let text = "# config_hash=ab seed=1\ns\tE0\tE1\tgap\tpgs\tA\tB\n0\t-1\t1\t2\t1\t1\t0\n1\t-2\t0\t2\t0.5\t0\t1\n";
        let t = TraceTable::parse(text).unwrap();
        assert_eq!(t.rows.len(), 2);
        let pgs = traces_table(&[(3, t.clone())], PlotKind::Pgs).unwrap();
        assert_eq!(pgs.lines().count(), 3);
        let sched = traces_table(&[(3, t)], PlotKind::Schedules).unwrap();
        assert_eq!(sched.lines().count(), 1 + 2 * 2);
        assert!(sched.lines().nth(2).unwrap().contains("\tB\t"));
    }

    #[test]
    fn missing_column_is_reported() {
        let t = TraceTable::parse("s\tpgs\n0\t1\n").unwrap();
        assert!(matches!(
            traces_table(&[(0, t)], PlotKind::Gap),
            Err(CliError::MissingData(_))
        ));
    }
}
