use std::path::{Path, PathBuf};

use annealga::experiments::ProblemSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// One experiment: the problem, where results go and how many GA runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub emit_traces: bool,
    #[serde(default = "default_n_rep")]
    pub n_rep: usize,
    /// Base seed; repetition `k` uses `seed + k`.
    #[serde(default)]
    pub seed: u64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_n_rep() -> usize {
    1
}

/// Keys that must be present, checked before typed parsing so the error
/// names the full path.
const REQUIRED: [&str; 3] = ["problem", "problem.model", "problem.mode"];

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        for key in REQUIRED {
            if lookup(&table, key).is_none() {
                return Err(CliError::Config(format!("missing required key `{key}`")));
            }
        }
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(describe(&e)))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.n_rep == 0 {
            return Err(CliError::Config("`n_rep` must be at least 1".into()));
        }
        self.problem
            .validate()
            .map_err(|e| CliError::Config(format!("`problem`: {e}")))
    }

    /// SHA-256 over the canonical JSON of everything that affects results
    /// except the seed, which is recorded separately.
    pub fn hash(&self) -> String {
        let canonical = serde_json::json!({
            "problem": self.problem,
            "emit_traces": self.emit_traces,
            "n_rep": self.n_rep,
        });
        let digest = Sha256::digest(canonical.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn lookup<'a>(table: &'a toml::Table, dotted: &str) -> Option<&'a toml::Value> {
    let mut parts = dotted.split('.');
    let mut value = table.get(parts.next()?)?;
    for part in parts {
        value = value.as_table()?.get(part)?;
    }
    Some(value)
}

fn describe(e: &toml::de::Error) -> String {
    match e.span() {
        Some(span) => format!("{} (at byte {})", e.message(), span.start),
        None => e.message().to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [problem.model]
        kind = "pspin"
        n = 4
        p = 3
        [problem.mode]
        kind = "od_only"
        d = 3
    "#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!((c.n_rep, c.seed, c.emit_traces), (1, 0, false));
        assert_eq!(c.output_dir, PathBuf::from("results"));
    }

    #[test]
    fn missing_model_names_the_key() {
        let text = "[problem.mode]\nkind = \"od_only\"\nd = 3\n";
        let err = ExperimentConfig::from_toml(text).unwrap_err();
        assert!(err.to_string().contains("`problem.model`"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = format!("{MINIMAL}\n[problem.ga]\npopulaton = 3\n");
        let err = ExperimentConfig::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("populaton"), "{err}");
    }

    #[test]
    fn hash_ignores_seed_and_output_dir() {
        let a = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let mut b = a.clone();
        b.seed = 9;
        b.output_dir = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.n_rep = 2;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
