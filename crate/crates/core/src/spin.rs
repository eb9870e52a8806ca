//! Collective-spin operators and Hamiltonians of the maximum-spin sector.
//!
//! The sector of `n` qubits with total spin `S = n/2` has dimension
//! `n + 1`. Basis vectors are ordered by descending magnetization
//! `m = S, S - 1, ..., -S`, so index `k` carries `m = S - k`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{symmetrize_in_place, HermitianOperator, C64};

/// Largest qubit count accepted for full `2^n` Hilbert-space operators.
pub const MAX_FULL_QUBITS: usize = 12;

/// Maximum-spin sector of `n` qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpinSector {
    n: usize,
}

impl SpinSector {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("qubit count must be positive".into()));
        }
        Ok(Self { n })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    /// Total spin `S = n / 2`.
    pub fn total_spin(&self) -> f64 {
        self.n as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    /// Magnetization of basis index `k`.
    pub fn magnetization(&self, k: usize) -> f64 {
        self.total_spin() - k as f64
    }
}

/// The three collective spin components `(Sx, Sy, Sz)`.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub sx: HermitianOperator,
    pub sy: HermitianOperator,
    pub sz: HermitianOperator,
}

impl SpinOperators {
    pub fn as_array(&self) -> [&HermitianOperator; 3] {
        [&self.sx, &self.sy, &self.sz]
    }
}

/// Builds `Sx`, `Sy`, `Sz` from the ladder matrix elements
/// `<m+1|S+|m> = sqrt(S(S+1) - m(m+1))`.
pub fn collective_spin_operators(sector: SpinSector) -> SpinOperators {
    let dim = sector.dim();
    let s = sector.total_spin();
    let mut sx = DMatrix::<C64>::zeros(dim, dim);
    let mut sy = DMatrix::<C64>::zeros(dim, dim);
    let mut sz = DMatrix::<C64>::zeros(dim, dim);
    for k in 0..dim {
        sz[(k, k)] = C64::new(sector.magnetization(k), 0.0);
    }
    for k in 1..dim {
        let m = sector.magnetization(k);
        let raise = (s * (s + 1.0) - m * (m + 1.0)).max(0.0).sqrt();
        // S+ maps index k to index k - 1.
        sx[(k - 1, k)] = C64::new(raise / 2.0, 0.0);
        sx[(k, k - 1)] = C64::new(raise / 2.0, 0.0);
        sy[(k - 1, k)] = C64::new(0.0, -raise / 2.0);
        sy[(k, k - 1)] = C64::new(0.0, raise / 2.0);
    }
    SpinOperators {
        sx: HermitianOperator::from_matrix_unchecked(sx),
        sy: HermitianOperator::from_matrix_unchecked(sy),
        sz: HermitianOperator::from_matrix_unchecked(sz),
    }
}

/// Fully connected ferromagnetic p-spin model `-J n (sum_i sigma^z_i / n)^p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PSpinModel {
    pub n: usize,
    pub p: u32,
    pub coupling: f64,
}

impl PSpinModel {
    pub fn new(n: usize, p: u32) -> Result<Self> {
        Self::with_coupling(n, p, 1.0)
    }

    pub fn with_coupling(n: usize, p: u32, coupling: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("qubit count must be positive".into()));
        }
        if p < 2 {
            return Err(Error::InvalidArgument(format!("p must be >= 2, got {p}")));
        }
        if !(coupling > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "coupling must be positive, got {coupling}"
            )));
        }
        Ok(Self { n, p, coupling })
    }

    pub fn sector(&self) -> SpinSector {
        SpinSector { n: self.n }
    }
}

/// Diagonal p-spin Hamiltonian with entry `-J n (2m/n)^p` at magnetization `m`.
pub fn pspin_hamiltonian(model: &PSpinModel, sector: SpinSector) -> Result<HermitianOperator> {
    if sector.qubits() != model.n {
        return Err(Error::DimensionMismatch {
            expected: model.n + 1,
            got: sector.dim(),
        });
    }
    let n = model.n as f64;
    let diagonal: Vec<f64> = (0..sector.dim())
        .map(|k| {
            let m = sector.magnetization(k);
            -model.coupling * n * (2.0 * m / n).powi(model.p as i32)
        })
        .collect();
    Ok(HermitianOperator::from_real_diagonal(&diagonal))
}

/// Transverse-field driver `-gamma sum_i sigma^x_i = -2 gamma Sx`.
pub fn transverse_hamiltonian(sector: SpinSector, gamma: f64) -> Result<HermitianOperator> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "field strength must be positive, got {gamma}"
        )));
    }
    Ok(collective_spin_operators(sector).sx.scaled(-2.0 * gamma))
}

/// Local optimal-driving operator basis.
///
/// * `d = 3`: `Sx, Sy, Sz`.
/// * `d = 9`: adds the six symmetrized quadratics `(SiSj + SjSi)/2`, `i <= j`.
/// * `d = 21`: adds twelve cubic terms: the pure cubes `Si^3` and the
///   Hermitian parts `(SiSjSk + SkSjSi)/2` of every ordered triple with `i < k`.
pub fn od_basis_operators(sector: SpinSector, d: usize) -> Result<Vec<HermitianOperator>> {
    if !matches!(d, 3 | 9 | 21) {
        return Err(Error::UnsupportedOperatorCount(d));
    }
    let spins = collective_spin_operators(sector);
    let s = spins.as_array();
    let mut ops: Vec<HermitianOperator> = s.iter().map(|&op| op.clone()).collect();
    if d >= 9 {
        for i in 0..3 {
            for j in i..3 {
                ops.push(s[i].anticommutator_half(s[j]));
            }
        }
    }
    if d >= 21 {
        let cube = |a: &HermitianOperator, b: &HermitianOperator, c: &HermitianOperator| {
            let forward = a.matrix() * b.matrix() * c.matrix();
            let backward = c.matrix() * b.matrix() * a.matrix();
            let mut m = (forward + backward) * C64::new(0.5, 0.0);
            symmetrize_in_place(&mut m);
            HermitianOperator::from_matrix_unchecked(m)
        };
        for i in 0..3 {
            ops.push(cube(s[i], s[i], s[i]));
        }
        for i in 0..3 {
            for k in (i + 1)..3 {
                for j in 0..3 {
                    ops.push(cube(s[i], s[j], s[k]));
                }
            }
        }
    }
    debug_assert_eq!(ops.len(), d);
    Ok(ops)
}

pub(crate) fn check_full_space(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidArgument("qubit count must be positive".into()));
    }
    if n > MAX_FULL_QUBITS {
        return Err(Error::TooManyQubits {
            n,
            max: MAX_FULL_QUBITS,
        });
    }
    Ok(1usize << n)
}

/// Mask of the basis-index bit that encodes qubit `site`; qubit 0 is the most
/// significant bit so that `|q0 q1 ... q_{n-1}>` reads left to right.
pub(crate) fn site_bit(n: usize, site: usize) -> usize {
    1usize << (n - 1 - site)
}

/// `-gamma sum_i sigma^x_i` on the full `2^n` computational basis.
pub fn full_transverse_hamiltonian(n: usize, gamma: f64) -> Result<HermitianOperator> {
    let dim = check_full_space(n)?;
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "field strength must be positive, got {gamma}"
        )));
    }
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for b in 0..dim {
        for site in 0..n {
            let flipped = b ^ site_bit(n, site);
            m[(flipped, b)] -= C64::new(gamma, 0.0);
        }
    }
    Ok(HermitianOperator::from_matrix_unchecked(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::HERMITIAN_TOL;

    fn max_abs(m: &DMatrix<C64>) -> f64 {
        m.iter().fold(0.0f64, |a, z| a.max(z.norm()))
    }

    #[test]
    fn spin_half_is_half_pauli() {
        let ops = collective_spin_operators(SpinSector::new(1).unwrap());
        let half = C64::new(0.5, 0.0);
        let sx = DMatrix::from_row_slice(2, 2, &[C64::default(), half, half, C64::default()]);
        let sy = DMatrix::from_row_slice(
            2,
            2,
            &[C64::default(), C64::new(0.0, -0.5), C64::new(0.0, 0.5), C64::default()],
        );
        let sz = DMatrix::from_row_slice(2, 2, &[half, C64::default(), C64::default(), -half]);
        assert!(max_abs(&(ops.sx.matrix() - sx)) < 1e-15);
        assert!(max_abs(&(ops.sy.matrix() - sy)) < 1e-15);
        assert!(max_abs(&(ops.sz.matrix() - sz)) < 1e-15);
    }

    #[test]
    fn ladder_algebra_holds_up_to_45() {
        for n in 1..=45 {
            let ops = collective_spin_operators(SpinSector::new(n).unwrap());
            let (x, y, z) = (ops.sx.matrix(), ops.sy.matrix(), ops.sz.matrix());
            let i = C64::new(0.0, 1.0);
            assert!(max_abs(&(x * y - y * x - z * i)) < 1e-10, "n={n}");
            assert!(max_abs(&(y * z - z * y - x * i)) < 1e-10, "n={n}");
            assert!(max_abs(&(z * x - x * z - y * i)) < 1e-10, "n={n}");
            for op in ops.as_array() {
                assert!(op.hermiticity_error() < HERMITIAN_TOL);
            }
        }
    }

    #[test]
    fn pspin_small_cases() {
        let model = PSpinModel::new(2, 2).unwrap();
        let h = pspin_hamiltonian(&model, model.sector()).unwrap();
        let diag: Vec<f64> = (0..3).map(|k| h.matrix()[(k, k)].re).collect();
        assert_eq!(diag, vec![-2.0, 0.0, -2.0]);

        let model = PSpinModel::new(3, 3).unwrap();
        let h = pspin_hamiltonian(&model, model.sector()).unwrap();
        assert!((h.matrix()[(0, 0)].re + 3.0).abs() < 1e-14);
        assert!((h.matrix()[(1, 1)].re + 1.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn odd_p_ground_state_is_first_basis_vector() {
        for n in [3, 8, 15] {
            for p in [3, 5] {
                let model = PSpinModel::new(n, p).unwrap();
                let h = pspin_hamiltonian(&model, model.sector()).unwrap();
                let argmin = (0..=n)
                    .min_by(|&a, &b| h.matrix()[(a, a)].re.total_cmp(&h.matrix()[(b, b)].re))
                    .unwrap();
                assert_eq!(argmin, 0);
            }
        }
    }

    #[test]
    fn pspin_rejects_bad_model_or_sector() {
        assert!(PSpinModel::new(4, 1).is_err());
        let model = PSpinModel::new(4, 3).unwrap();
        assert!(pspin_hamiltonian(&model, SpinSector::new(5).unwrap()).is_err());
    }

    #[test]
    fn transverse_ground_energy_is_minus_gamma_n() {
        for n in [1, 2, 7, 20] {
            for gamma in [0.5, 1.0, 2.0] {
                let h = transverse_hamiltonian(SpinSector::new(n).unwrap(), gamma).unwrap();
                let e0 = h.spectrum().ground_energy();
                assert!((e0 + gamma * n as f64).abs() < 1e-10);
            }
        }
        assert!(transverse_hamiltonian(SpinSector::new(2).unwrap(), 0.0).is_err());
    }

    #[test]
    fn od_basis_counts_and_hermiticity() {
        let sector = SpinSector::new(2).unwrap();
        let spins = collective_spin_operators(sector);
        let d3 = od_basis_operators(sector, 3).unwrap();
        assert_eq!(d3[0], spins.sx);
        assert_eq!(d3[1], spins.sy);
        assert_eq!(d3[2], spins.sz);
        for d in [9, 21] {
            let ops = od_basis_operators(sector, d).unwrap();
            assert_eq!(ops.len(), d);
            assert!(ops.iter().all(|o| o.hermiticity_error() < HERMITIAN_TOL));
        }
        assert!(matches!(
            od_basis_operators(sector, 4),
            Err(Error::UnsupportedOperatorCount(4))
        ));
    }

    #[test]
    fn full_transverse_small() {
        let h = full_transverse_hamiltonian(1, 1.5).unwrap();
        assert_eq!(h.matrix()[(0, 1)], C64::new(-1.5, 0.0));
        assert_eq!(h.matrix()[(0, 0)], C64::new(0.0, 0.0));
        let h = full_transverse_hamiltonian(2, 1.0).unwrap();
        assert!((h.spectrum().ground_energy() + 2.0).abs() < 1e-12);
        assert!(matches!(
            full_transverse_hamiltonian(13, 1.0),
            Err(Error::TooManyQubits { .. })
        ));
    }
}
