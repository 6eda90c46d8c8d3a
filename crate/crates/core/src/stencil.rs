//! Discrete differential operators on the node-centered fields.
//!
//! Second-order central differences throughout. The residual stencils are the
//! pointwise left-hand sides of the steady streamfunction and vorticity
//! equations; the solver drives their interior maxima to zero and the
//! convergence monitor reports them as RES1.

use std::fmt;

use crate::boundary::BoundarySpec;
use crate::fields::FlowState;

/// A residual stencil was requested on a wall node, where it is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryIndex {
    pub i: usize,
    pub j: usize,
}

impl fmt::Display for BoundaryIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "residual stencil undefined on wall node ({}, {})",
            self.i, self.j
        )
    }
}

impl std::error::Error for BoundaryIndex {}

/// Pointwise streamfunction residual at interior slot `k = i*n + j`:
/// `(psi_E + psi_W + psi_N + psi_S - 4 psi) / h^2 + omega`.
#[inline(always)]
pub(crate) fn psi_residual_raw(psi: &[f64], omega: &[f64], n: usize, h2: f64, k: usize) -> f64 {
    (psi[k + n] + psi[k - n] + psi[k + 1] + psi[k - 1] - 4.0 * psi[k]) / h2 + omega[k]
}

/// Pointwise vorticity residual at interior slot `k`: diffusion at `1/Re`
/// minus the central-difference convective terms.
#[inline(always)]
pub(crate) fn omega_residual_raw(
    psi: &[f64],
    omega: &[f64],
    n: usize,
    h2: f64,
    th: f64,
    re: f64,
    k: usize,
) -> f64 {
    (omega[k + n] + omega[k - n] + omega[k + 1] + omega[k - 1] - 4.0 * omega[k]) / h2 / re
        - (psi[k + 1] - psi[k - 1]) / th * ((omega[k + n] - omega[k - n]) / th)
        + (psi[k + n] - psi[k - n]) / th * ((omega[k + 1] - omega[k - 1]) / th)
}

#[inline]
fn interior_slot(state: &FlowState, i: usize, j: usize) -> Result<usize, BoundaryIndex> {
    let n = state.grid().n();
    if i == 0 || j == 0 || i >= n - 1 || j >= n - 1 {
        return Err(BoundaryIndex { i, j });
    }
    Ok(i * n + j)
}

/// Residual of the discrete streamfunction equation at interior node (i, j).
pub fn psi_residual_at(state: &FlowState, i: usize, j: usize) -> Result<f64, BoundaryIndex> {
    let k = interior_slot(state, i, j)?;
    let h = state.grid().h();
    Ok(psi_residual_raw(
        state.psi.values(),
        state.omega.values(),
        state.grid().n(),
        h * h,
        k,
    ))
}

/// Residual of the discrete vorticity transport equation at interior node (i, j).
pub fn omega_residual_at(state: &FlowState, i: usize, j: usize) -> Result<f64, BoundaryIndex> {
    let k = interior_slot(state, i, j)?;
    let h = state.grid().h();
    Ok(omega_residual_raw(
        state.psi.values(),
        state.omega.values(),
        state.grid().n(),
        h * h,
        2.0 * h,
        state.re,
        k,
    ))
}

/// x-velocity `u = d(psi)/dy` at node (i, j): central difference in the
/// interior, the wall's tangential u-component on the walls. Horizontal walls
/// own the corners for `u`.
pub fn velocity_u(state: &FlowState, bc: &BoundarySpec, i: usize, j: usize) -> f64 {
    let n = state.grid().n();
    if j == n - 1 {
        return bc.top;
    }
    if j == 0 {
        return bc.bottom;
    }
    if i == 0 || i == n - 1 {
        return 0.0; // vertical walls move tangentially in y only
    }
    let th = 2.0 * state.grid().h();
    (state.psi.at(i, j + 1) - state.psi.at(i, j - 1)) / th
}

/// y-velocity `v = -d(psi)/dx` at node (i, j); vertical walls own the corners.
pub fn velocity_v(state: &FlowState, bc: &BoundarySpec, i: usize, j: usize) -> f64 {
    let n = state.grid().n();
    if i == 0 {
        return bc.left;
    }
    if i == n - 1 {
        return bc.right;
    }
    if j == 0 || j == n - 1 {
        return 0.0;
    }
    let th = 2.0 * state.grid().h();
    -(state.psi.at(i + 1, j) - state.psi.at(i - 1, j)) / th
}
