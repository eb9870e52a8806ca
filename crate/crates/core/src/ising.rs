//! Random Ising instances on an arbitrary graph.
//!
//! The cost operator is `H_I = 1/2 sum_<ij> (1 - J_ij z_i z_j)`, diagonal in
//! the computational basis with `z = +1` for `|0>` and `z = -1` for `|1>`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::HermitianOperator;
use crate::spin::{check_full_space, site_bit};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingInstance {
    n: usize,
    edges: Vec<(usize, usize)>,
    couplings: Vec<f64>,
}

impl IsingInstance {
    /// Validates the graph: indices in range, `i < j`, no duplicate edges,
    /// couplings in `[-1, 1]`.
    pub fn new(n: usize, edges: Vec<(usize, usize)>, couplings: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("qubit count must be positive".into()));
        }
        if edges.len() != couplings.len() {
            return Err(Error::InvalidArgument(format!(
                "{} edges but {} couplings",
                edges.len(),
                couplings.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &(i, j) in &edges {
            if i >= j {
                return Err(Error::InvalidArgument(format!(
                    "edge ({i}, {j}) must satisfy i < j"
                )));
            }
            if j >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({i}, {j}) out of range for {n} qubits"
                )));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidArgument(format!("duplicate edge ({i}, {j})")));
            }
        }
        if let Some(j) = couplings.iter().find(|j| !(-1.0..=1.0).contains(*j)) {
            return Err(Error::InvalidArgument(format!("coupling {j} outside [-1, 1]")));
        }
        Ok(Self { n, edges, couplings })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Classical cost of one computational basis state.
    pub fn energy(&self, basis_index: usize) -> f64 {
        self.edges
            .iter()
            .zip(&self.couplings)
            .map(|(&(i, j), &jij)| {
                let zi = spin_sign(basis_index, self.n, i);
                let zj = spin_sign(basis_index, self.n, j);
                0.5 * (1.0 - jij * zi * zj)
            })
            .sum()
    }

    /// Same graph with every coupling replaced by `value`.
    pub fn with_uniform_couplings(&self, value: f64) -> Result<Self> {
        Self::new(self.n, self.edges.clone(), vec![value; self.edges.len()])
    }
}

fn spin_sign(basis_index: usize, n: usize, site: usize) -> f64 {
    if basis_index & site_bit(n, site) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Diagonal cost operator on the full `2^n` space (`n <= 12`).
pub fn ising_hamiltonian(instance: &IsingInstance) -> Result<HermitianOperator> {
    let dim = check_full_space(instance.n)?;
    let diagonal: Vec<f64> = (0..dim).map(|b| instance.energy(b)).collect();
    Ok(HermitianOperator::from_real_diagonal(&diagonal))
}

/// Draws i.i.d. uniform couplings in `[-1, 1]` for the given edges.
pub fn generate_ising_instance(
    n: usize,
    edges: Vec<(usize, usize)>,
    seed: u64,
) -> Result<IsingInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let couplings = edges.iter().map(|_| rng.random_range(-1.0..=1.0)).collect();
    IsingInstance::new(n, edges, couplings)
}

/// Connected five-qubit graph with six bonds used as the default topology.
pub fn default_graph() -> (usize, Vec<(usize, usize)>) {
    (5, vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 4), (3, 4)])
}

impl fmt::Display for IsingInstance {
    /// First line `n`, then `i j J_ij` per edge.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n)?;
        for (&(i, j), jij) in self.edges.iter().zip(&self.couplings) {
            writeln!(f, "{i} {j} {jij}")?;
        }
        Ok(())
    }
}

impl FromStr for IsingInstance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (_, first) = lines
            .next()
            .ok_or_else(|| Error::Parse("empty Ising instance".into()))?;
        let n: usize = first
            .parse()
            .map_err(|_| Error::Parse(format!("line 1: bad qubit count {first:?}")))?;
        let mut edges = Vec::new();
        let mut couplings = Vec::new();
        for (lineno, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("line {}: expected `i j J`, got {line:?}", lineno + 1));
            if fields.len() != 3 {
                return Err(bad());
            }
            let i: usize = fields[0].parse().map_err(|_| bad())?;
            let j: usize = fields[1].parse().map_err(|_| bad())?;
            let jij: f64 = fields[2].parse().map_err(|_| bad())?;
            edges.push((i, j));
            couplings.push(jij);
        }
        IsingInstance::new(n, edges, couplings)
    }
}
