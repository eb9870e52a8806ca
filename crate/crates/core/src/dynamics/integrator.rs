//! Adaptive Dormand-Prince 8(5,3) integration of `i d psi/dt = H(t) psi`.

use crate::error::{Error, Result};
use crate::operator::{HermitianOperator, C64};

pub const DEFAULT_RTOL: f64 = 1e-9;
pub const DEFAULT_ATOL: f64 = 1e-11;

const MAX_STEPS: usize = 20_000_000;

/// Linear combination `sum_t c_t(s) O_t` stored on the union of the
/// operators' non-zero patterns, row-major.
#[derive(Clone, Debug)]
pub(crate) struct TermKernel {
    dim: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    /// `values[t][nz]`
    values: Vec<Vec<C64>>,
    combined: Vec<C64>,
    /// Row-sum norm of each term, for step-size seeding.
    norms: Vec<f64>,
}

impl TermKernel {
    pub(crate) fn new(terms: &[&HermitianOperator]) -> Self {
        let dim = terms.first().map(|op| op.dim()).unwrap_or(0);
        let zero = C64::new(0.0, 0.0);
        let mut row_start = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        row_start.push(0);
        for i in 0..dim {
            for j in 0..dim {
                if terms.iter().any(|op| op.matrix()[(i, j)] != zero) {
                    cols.push(j);
                }
            }
            row_start.push(cols.len());
        }
        let values = terms
            .iter()
            .map(|op| {
                let m = op.matrix();
                let mut v = Vec::with_capacity(cols.len());
                for i in 0..dim {
                    for &j in &cols[row_start[i]..row_start[i + 1]] {
                        v.push(m[(i, j)]);
                    }
                }
                v
            })
            .collect();
        let norms = terms
            .iter()
            .map(|op| {
                let m = op.matrix();
                (0..dim)
                    .map(|i| (0..dim).map(|j| m[(i, j)].norm()).sum::<f64>())
                    .fold(0.0, f64::max)
            })
            .collect();
        Self {
            dim,
            combined: vec![zero; cols.len()],
            row_start,
            cols,
            values,
            norms,
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn norm_bound(&self, coeffs: &[f64]) -> f64 {
        coeffs.iter().zip(&self.norms).map(|(c, n)| c.abs() * n).sum()
    }

    fn combine(&mut self, coeffs: &[f64]) {
        let zero = C64::new(0.0, 0.0);
        self.combined.iter_mut().for_each(|z| *z = zero);
        for (c, vals) in coeffs.iter().zip(&self.values) {
            if *c == 0.0 {
                continue;
            }
            for (z, v) in self.combined.iter_mut().zip(vals) {
                *z += v * *c;
            }
        }
    }

    /// `out = -i H psi` for the current combination.
    fn rhs(&self, psi: &[C64], out: &mut [C64]) {
        for i in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for nz in self.row_start[i]..self.row_start[i + 1] {
                acc += self.combined[nz] * psi[self.cols[nz]];
            }
            out[i] = C64::new(acc.im, -acc.re);
        }
    }
}

/// Supplies the term coefficients at dimensionless time `s`.
pub(crate) trait Coefficients {
    fn coefficients_at(&self, s: f64, out: &mut [f64]);
}

// Dormand-Prince 8(5,3) tableau (Hairer, Norsett and Wanner).
const STAGES: usize = 12;

const C: [f64; STAGES] = [0.0, 0.05260015195876773, 0.0789002279381516, 0.1183503419072274, 0.2816496580927726, 0.3333333333333333, 0.25, 0.3076923076923077, 0.6512820512820513, 0.6, 0.8571428571428571, 1.0];

const A: [[f64; STAGES]; STAGES] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328, -0.015319437748624402, 0.008273789163814023, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671, 20.154067550477894, -43.48988418106996, 0.0, 0.0, 0.0, 0.0],
    [0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843, 21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627, 0.0, 0.0, 0.0],
    [-0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927, -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196, 0.0, 0.0],
    [2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188, 27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303, 0.6433927460157636, 0.0],
];

const B: [f64; STAGES] = [0.054293734116568765, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, 0.3111643669578199, -0.1521609496625161, 0.20136540080403034, 0.04471061572777259];

const E3: [f64; STAGES + 1] = [-0.18980075407240762, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, -0.4226823213237919, -0.1521609496625161, 0.20136540080403034, 0.02265179219836082, 0.0];

const E5: [f64; STAGES + 1] = [0.01312004499419488, 0.0, 0.0, 0.0, 0.0, -1.2251564463762044, -0.4957589496572502, 1.6643771824549864, -0.35032884874997366, 0.3341791187130175, 0.08192320648511571, -0.022355307863886294, 0.0];

#[inline]
fn axpy(a: f64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi * a;
    }
}

/// Reusable adaptive stepper for one kernel.
pub(crate) struct Stepper<'a, C: Coefficients> {
    kernel: &'a mut TermKernel,
    coeffs: &'a C,
    total_time: f64,
    rtol: f64,
    atol: f64,
    buf: Vec<f64>,
    /// Stage derivatives; `k[STAGES]` holds `f(t + h, y_new)`.
    k: Vec<Vec<C64>>,
    stage: Vec<C64>,
    next: Vec<C64>,
    err5: Vec<C64>,
    err3: Vec<C64>,
    /// Proposed next step size, carried across calls.
    h: f64,
    fsal_valid: bool,
    pub(crate) steps: usize,
}

impl<'a, C: Coefficients> Stepper<'a, C> {
    pub(crate) fn new(
        kernel: &'a mut TermKernel,
        coeffs: &'a C,
        n_terms: usize,
        total_time: f64,
        rtol: f64,
        atol: f64,
    ) -> Self {
        let dim = kernel.dim();
        let zero = C64::new(0.0, 0.0);
        let mut buf = vec![0.0; n_terms];
        coeffs.coefficients_at(0.0, &mut buf);
        let norm = kernel.norm_bound(&buf).max(1e-3);
        let h = (0.2 / norm).min(total_time);
        Self {
            kernel,
            coeffs,
            total_time,
            rtol,
            atol,
            buf,
            k: vec![vec![zero; dim]; STAGES + 1],
            stage: vec![zero; dim],
            next: vec![zero; dim],
            err5: vec![zero; dim],
            err3: vec![zero; dim],
            h,
            fsal_valid: false,
            steps: 0,
        }
    }

    /// `k[slot] = f(t, stage)` or `f(t, next)`.
    fn eval(&mut self, t: f64, from_next: bool, slot: usize) {
        let s = (t / self.total_time).clamp(0.0, 1.0);
        self.coeffs.coefficients_at(s, &mut self.buf);
        self.kernel.combine(&self.buf);
        let src = if from_next { &self.next } else { &self.stage };
        self.kernel.rhs(src, &mut self.k[slot]);
    }

    /// Advances `psi` from `t0` to `t1` exactly.
    pub(crate) fn advance(&mut self, psi: &mut [C64], t0: f64, t1: f64) -> Result<()> {
        let mut t = t0;
        if t1 <= t0 {
            return Ok(());
        }
        let n = psi.len();
        let min_step = 1e-14 * self.total_time.max(1.0);
        if !self.fsal_valid {
            self.stage.copy_from_slice(psi);
            self.eval(t, false, 0);
            self.fsal_valid = true;
        }
        while t < t1 {
            let remaining = t1 - t;
            let last = self.h >= remaining * (1.0 - 1e-12);
            let h = if last { remaining } else { self.h };
            if h < min_step {
                return Err(Error::Integrator {
                    t,
                    reason: format!("step size {h:e} underflow"),
                });
            }
            self.steps += 1;
            if self.steps > MAX_STEPS {
                return Err(Error::Integrator {
                    t,
                    reason: "step budget exhausted".into(),
                });
            }
            for s in 1..STAGES {
                self.stage.copy_from_slice(psi);
                for (j, &a) in A[s][..s].iter().enumerate() {
                    if a != 0.0 {
                        axpy(a * h, &self.k[j], &mut self.stage);
                    }
                }
                self.eval(t + C[s] * h, false, s);
            }
            self.next.copy_from_slice(psi);
            for (j, &b) in B.iter().enumerate() {
                if b != 0.0 {
                    axpy(b * h, &self.k[j], &mut self.next);
                }
            }
            let t_new = if last { t1 } else { t + h };
            self.eval(t_new, true, STAGES);

            let zero = C64::new(0.0, 0.0);
            self.err5.iter_mut().for_each(|z| *z = zero);
            self.err3.iter_mut().for_each(|z| *z = zero);
            for j in 0..=STAGES {
                if E5[j] != 0.0 {
                    axpy(E5[j], &self.k[j], &mut self.err5);
                }
                if E3[j] != 0.0 {
                    axpy(E3[j], &self.k[j], &mut self.err3);
                }
            }
            let (mut e5, mut e3) = (0.0f64, 0.0f64);
            for i in 0..n {
                let scale = self.atol + self.rtol * psi[i].norm().max(self.next[i].norm());
                e5 = e5.max(self.err5[i].norm() / scale);
                e3 = e3.max(self.err3[i].norm() / scale);
            }
            // Max-norm version of the combined 5th/3rd order estimate.
            let err = if e5 == 0.0 && e3 == 0.0 {
                0.0
            } else {
                h * e5 * e5 / (e5 * e5 + 0.01 * e3 * e3).sqrt()
            };
            if !err.is_finite() {
                return Err(Error::Integrator {
                    t,
                    reason: "non-finite error estimate".into(),
                });
            }
            let factor = if err == 0.0 {
                10.0
            } else {
                (0.9 * err.powf(-1.0 / 8.0)).clamp(0.2, 10.0)
            };
            if err <= 1.0 {
                psi.copy_from_slice(&self.next);
                self.k.swap(0, STAGES);
                t = t_new;
                // A truncated final step says nothing about the natural size.
                if !last || h >= self.h {
                    self.h = h * factor;
                }
            } else {
                self.h = h * factor.min(1.0);
            }
        }
        Ok(())
    }
}
