//! Dense Hermitian operators and their spectra.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type StateVector = DVector<C64>;

/// Element-wise tolerance for the Hermiticity invariant.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense complex matrix that equals its own conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: DMatrix<C64>,
}

impl HermitianOperator {
    /// Wraps `matrix`, rejecting non-square or non-Hermitian input.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidArgument(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let op = Self { matrix };
        let err = op.hermiticity_error();
        if err > HERMITIAN_TOL {
            return Err(Error::InvalidArgument(format!(
                "matrix is not Hermitian (max deviation {err:e})"
            )));
        }
        Ok(op)
    }

    /// Caller guarantees Hermiticity by construction.
    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<C64>) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix }
    }

    pub fn from_real_diagonal(diagonal: &[f64]) -> Self {
        let n = diagonal.len();
        let mut matrix = DMatrix::zeros(n, n);
        for (i, &d) in diagonal.iter().enumerate() {
            matrix[(i, i)] = C64::new(d, 0.0);
        }
        Self { matrix }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    /// Largest element-wise deviation `|H_ij - conj(H_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: &self.matrix * C64::new(factor, 0.0),
        }
    }

    /// `sum_k w_k O_k` over operators of a common dimension.
    pub fn linear_combination(terms: &[(f64, &HermitianOperator)]) -> Result<Self> {
        let dim = terms
            .first()
            .map(|(_, op)| op.dim())
            .ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))?;
        let mut matrix = DMatrix::zeros(dim, dim);
        for (w, op) in terms {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: op.dim(),
                });
            }
            if *w != 0.0 {
                matrix += &op.matrix * C64::new(*w, 0.0);
            }
        }
        Ok(Self { matrix })
    }

    /// Symmetrized product `(AB + BA) / 2`, Hermitian for Hermitian `A`, `B`.
    pub fn anticommutator_half(&self, other: &HermitianOperator) -> Self {
        let ab = &self.matrix * &other.matrix;
        let ba = &other.matrix * &self.matrix;
        let mut m = (ab + ba) * C64::new(0.5, 0.0);
        symmetrize_in_place(&mut m);
        Self { matrix: m }
    }

    pub fn apply(&self, psi: &StateVector) -> StateVector {
        &self.matrix * psi
    }

    /// `<psi|H|psi>`; the imaginary part vanishes for Hermitian `H`.
    pub fn expectation(&self, psi: &StateVector) -> f64 {
        psi.dotc(&(&self.matrix * psi)).re
    }

    /// Largest `|i - j|` over non-zero entries.
    pub fn bandwidth(&self) -> usize {
        let n = self.dim();
        let mut band = 0;
        for j in 0..n {
            for i in 0..n {
                if self.matrix[(i, j)] != C64::new(0.0, 0.0) {
                    band = band.max(i.abs_diff(j));
                }
            }
        }
        band
    }

    pub fn is_diagonal(&self) -> bool {
        self.bandwidth() == 0
    }

    /// Full eigendecomposition with eigenvalues in ascending order.
    pub fn spectrum(&self) -> Spectrum {
        let n = self.dim();
        if n == 0 {
            return Spectrum {
                values: Vec::new(),
                vectors: DMatrix::zeros(0, 0),
            };
        }
        let eig = nalgebra::SymmetricEigen::new(self.matrix.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vectors = DMatrix::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            vectors.set_column(col, &eig.eigenvectors.column(k));
        }
        Spectrum { values, vectors }
    }

    /// Lowest eigenvalues and the eigenvectors of the ground manifold,
    /// i.e. all levels with `E_k - E_0 < degeneracy_tol`.
    ///
    /// Tridiagonal operators take a fast path (gauge to a real symmetric
    /// tridiagonal matrix, implicit QL for the eigenvalues, inverse iteration
    /// for the ground vector) as long as the ground level is isolated.
    pub fn ground_manifold(&self, degeneracy_tol: f64) -> GroundManifold {
        if self.dim() >= 3 && self.bandwidth() <= 1 {
            if let Some(gm) = tridiagonal_ground_manifold(&self.matrix, degeneracy_tol) {
                return gm;
            }
        }
        self.spectrum().ground_manifold(degeneracy_tol)
    }
}

/// Removes rounding asymmetry so the matrix is exactly Hermitian.
pub(crate) fn symmetrize_in_place(m: &mut DMatrix<C64>) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Eigenvalues (ascending) and matching eigenvector columns.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl Spectrum {
    pub fn ground_energy(&self) -> f64 {
        self.values[0]
    }

    /// `E_1 - E_0`, zero for a one-dimensional space.
    pub fn gap(&self) -> f64 {
        if self.values.len() < 2 {
            0.0
        } else {
            self.values[1] - self.values[0]
        }
    }

    pub fn ground_manifold(&self, degeneracy_tol: f64) -> GroundManifold {
        let e0 = self.values[0];
        let count = self
            .values
            .iter()
            .take_while(|&&e| e - e0 < degeneracy_tol)
            .count()
            .max(1);
        GroundManifold {
            e0,
            e1: self.values.get(1).copied().unwrap_or(e0),
            vectors: (0..count)
                .map(|k| self.vectors.column(k).into_owned())
                .collect(),
        }
    }
}

/// The lowest two levels plus an orthonormal basis of the ground manifold.
#[derive(Clone, Debug)]
pub struct GroundManifold {
    pub e0: f64,
    pub e1: f64,
    pub vectors: Vec<StateVector>,
}

impl GroundManifold {
    pub fn gap(&self) -> f64 {
        (self.e1 - self.e0).max(0.0)
    }

    pub fn degeneracy(&self) -> usize {
        self.vectors.len()
    }

    /// Total weight of `psi` on the ground manifold.
    pub fn probability(&self, psi: &StateVector) -> f64 {
        self.vectors.iter().map(|v| v.dotc(psi).norm_sqr()).sum()
    }
}

/// Sum of `|<E_k|psi>|^2` over the levels within `degeneracy_tol` of the
/// ground energy of `h`.
pub fn ground_state_probability(
    h: &HermitianOperator,
    psi: &StateVector,
    degeneracy_tol: f64,
) -> Result<f64> {
    if psi.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: psi.len(),
        });
    }
    Ok(h.ground_manifold(degeneracy_tol).probability(psi))
}

fn tridiagonal_ground_manifold(m: &DMatrix<C64>, degeneracy_tol: f64) -> Option<GroundManifold> {
    let n = m.nrows();
    // Diagonal unitary gauge making every off-diagonal real and non-negative.
    let mut phases = vec![C64::new(1.0, 0.0); n];
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    for k in 0..n {
        diag[k] = m[(k, k)].re;
    }
    for k in 0..n - 1 {
        let h = m[(k, k + 1)];
        let r = h.norm();
        off[k] = r;
        phases[k + 1] = if r > 0.0 {
            phases[k] * (h / r).conj()
        } else {
            phases[k]
        };
    }

    let mut values = diag.clone();
    let mut e = off.clone();
    if !tql_eigenvalues(&mut values, &mut e) {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let e0 = values[0];
    let e1 = values[1];
    if e1 - e0 < degeneracy_tol {
        return None;
    }

    let w = inverse_iteration(&diag, &off, e0, e1 - e0)?;
    // D^† H D is the real matrix, so eigenvectors map back as v = D w.
    let v = StateVector::from_iterator(n, (0..n).map(|k| phases[k] * w[k]));
    Some(GroundManifold {
        e0,
        e1,
        vectors: vec![v],
    })
}

/// Implicit QL on a real symmetric tridiagonal matrix. `d` holds the
/// diagonal and is overwritten with the eigenvalues (unsorted); `e[k]`
/// couples `k` and `k + 1`.
fn tql_eigenvalues(d: &mut [f64], e: &mut [f64]) -> bool {
    let n = d.len();
    if n == 0 {
        return true;
    }
    // Shift so that e[i-1] couples i-1 and i, matching the classic layout.
    let mut sub = vec![0.0; n];
    sub[..n - 1].copy_from_slice(&e[..n - 1]);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if sub[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return false;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * sub[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + sub[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * sub[i];
                let b = c * sub[i];
                r = f.hypot(g);
                sub[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    sub[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            sub[l] = g;
            sub[m] = 0.0;
        }
    }
    e.copy_from_slice(&sub);
    true
}

/// Eigenvector of a real symmetric tridiagonal matrix for the isolated
/// eigenvalue `lambda`, by shifted inverse iteration.
fn inverse_iteration(diag: &[f64], off: &[f64], lambda: f64, gap: f64) -> Option<Vec<f64>> {
    let n = diag.len();
    let scale = diag
        .iter()
        .chain(off.iter())
        .fold(0.0f64, |a, &x| a.max(x.abs()))
        .max(1.0);
    // Offset the shift slightly below the eigenvalue so the system stays
    // solvable; the offset is tiny compared to the gap.
    let shift = lambda - (1e-3 * gap).min(1e-10 * scale).max(f64::EPSILON * scale);
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..3 {
        x = solve_tridiagonal_pivoted(diag, off, shift, &x)?;
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        x.iter_mut().for_each(|v| *v /= norm);
    }
    Some(x)
}

/// Solves `(T - shift I) x = b` with partial pivoting (the factor has up to
/// two super-diagonals after row swaps).
fn solve_tridiagonal_pivoted(diag: &[f64], off: &[f64], shift: f64, b: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    // Row k of U: u0[k] on the diagonal, u1[k], u2[k] on the next two columns.
    let mut u0 = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    let mut rhs = b.to_vec();

    // Current working row k: entries at columns k, k+1 (k+2 zero).
    let mut cur0 = diag[0] - shift;
    let mut cur1 = if n > 1 { off[0] } else { 0.0 };
    let mut cur2 = 0.0;
    for k in 0..n {
        if k == n - 1 {
            u0[k] = cur0;
            break;
        }
        // Next row k+1 has entries at columns k, k+1, k+2.
        let nxt0 = off[k];
        let nxt1 = diag[k + 1] - shift;
        let nxt2 = if k + 2 < n { off[k + 1] } else { 0.0 };
        let (p0, p1, p2, q0, q1, q2, rp, rq) = if nxt0.abs() > cur0.abs() {
            (nxt0, nxt1, nxt2, cur0, cur1, cur2, rhs[k + 1], rhs[k])
        } else {
            (cur0, cur1, cur2, nxt0, nxt1, nxt2, rhs[k], rhs[k + 1])
        };
        let pivot = if p0 == 0.0 { f64::EPSILON } else { p0 };
        let factor = q0 / pivot;
        u0[k] = pivot;
        u1[k] = p1;
        u2[k] = p2;
        rhs[k] = rp;
        rhs[k + 1] = rq - factor * rp;
        cur0 = q1 - factor * p1;
        cur1 = q2 - factor * p2;
        cur2 = 0.0;
    }
    if u0[n - 1] == 0.0 {
        u0[n - 1] = f64::EPSILON;
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut acc = rhs[k];
        if k + 1 < n {
            acc -= u1[k] * x[k + 1];
        }
        if k + 2 < n {
            acc -= u2[k] * x[k + 2];
        }
        x[k] = acc / u0[k];
        if !x[k].is_finite() {
            return None;
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_tridiagonal(n: usize, seed: u64) -> HermitianOperator {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = DMatrix::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = c(rng.random_range(-5.0..5.0), 0.0);
            if k + 1 < n {
                let h = c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                m[(k, k + 1)] = h;
                m[(k + 1, k)] = h.conj();
            }
        }
        HermitianOperator::new(m).unwrap()
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert!(HermitianOperator::new(m).is_err());
    }

    #[test]
    fn spectrum_is_ascending_and_orthonormal() {
        let op = random_tridiagonal(7, 3);
        let spec = op.spectrum();
        assert!(spec.values.windows(2).all(|w| w[0] <= w[1]));
        let gram = spec.vectors.adjoint() * &spec.vectors;
        assert!((gram - DMatrix::<C64>::identity(7, 7)).camax() < 1e-10);
    }

    #[test]
    fn tridiagonal_fast_path_matches_dense() {
        for seed in 0..20 {
            let op = random_tridiagonal(12 + seed as usize, seed);
            let dense = op.spectrum().ground_manifold(1e-9);
            let fast = tridiagonal_ground_manifold(op.matrix(), 1e-9).expect("isolated ground");
            assert!((dense.e0 - fast.e0).abs() < 1e-10);
            assert!((dense.e1 - fast.e1).abs() < 1e-10);
            let overlap = dense.vectors[0].dotc(&fast.vectors[0]).norm();
            assert!((overlap - 1.0).abs() < 1e-9, "overlap {overlap}");
            let residual = op.apply(&fast.vectors[0]) - &fast.vectors[0] * c(fast.e0, 0.0);
            assert!(residual.norm() < 1e-8);
        }
    }

    #[test]
    fn degenerate_ground_sums_probability() {
        let op = HermitianOperator::from_real_diagonal(&[0.0, 1.0, 1.0, 0.0]);
        let psi = StateVector::from_vec(vec![
            c(1.0 / 2f64.sqrt(), 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 1.0 / 2f64.sqrt()),
        ]);
        let p = ground_state_probability(&op, &psi, 1e-6).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn anticommutator_is_hermitian() {
        let a = random_tridiagonal(5, 1);
        let b = random_tridiagonal(5, 2);
        assert!(a.anticommutator_half(&b).hermiticity_error() < HERMITIAN_TOL);
    }
}
