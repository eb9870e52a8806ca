//! Piecewise-constant exponential propagator, kept as a cross-check for the
//! adaptive integrator.

use nalgebra::DMatrix;

use super::{check_state, AnnealingSetup};
use crate::error::{Error, Result};
use crate::operator::{StateVector, C64};

/// Applies `exp(-i H(s_mid) dt)` on `slices` equal slices of `[0, T]`, with
/// each exponential taken exactly through the eigendecomposition of the
/// midpoint Hamiltonian.
pub fn propagate_piecewise_exponential(
    setup: &AnnealingSetup,
    psi0: &StateVector,
    slices: usize,
) -> Result<StateVector> {
    check_state(setup, psi0)?;
    if slices == 0 {
        return Err(Error::InvalidArgument("need at least one slice".into()));
    }
    let ds = 1.0 / slices as f64;
    let dt = setup.annealing_time * ds;
    let mut psi = psi0.clone();
    for k in 0..slices {
        let s = (k as f64 + 0.5) * ds;
        let spectrum = setup.assemble_at(s).spectrum();
        let v: &DMatrix<C64> = &spectrum.vectors;
        let mut coeffs = v.adjoint() * &psi;
        for (c, e) in coeffs.iter_mut().zip(&spectrum.values) {
            *c *= C64::from_polar(1.0, -e * dt);
        }
        psi = v * coeffs;
    }
    Ok(psi)
}
