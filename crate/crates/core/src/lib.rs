//! Steady solutions of the 2-D incompressible lid-driven cavity in
//! streamfunction-vorticity form.
//!
//! The discrete system is second-order central differences on a uniform node
//! grid over the unit square, with wall vorticity closed by Jensen's formula
//! and relaxed to steady state by Gauss-Seidel/SOR sweeps. Convergence is
//! monitored by three residuals (equation residual, absolute change, relative
//! change) and a solve stops when the equation residuals reach a tolerance,
//! 1e-10 by default.
//!
//! Converged states are verified rather than trusted: [`diagnostics`] checks
//! mass conservation by Simpson integration of the centerline velocity
//! profiles, runs a vortex census over the streamfunction extrema, compares
//! the primary-vortex core vorticity against the infinite-Reynolds asymptote,
//! and reports the worst cell Peclet number.
//!
//! ```
//! use cavity_core::{diagnostics, solver, Grid, SolverConfig};
//!
//! let grid = Grid::new(33).unwrap();
//! let outcome = solver::solve(&SolverConfig::default(), 100.0, grid).unwrap();
//! assert!(outcome.converged);
//! let report = diagnostics::continuity_check(&outcome.state, &Default::default());
//! assert!(report.q1 < 1e-2 && report.q2 < 1e-2);
//! ```

pub mod boundary;
pub mod diagnostics;
pub mod fields;
pub mod io;
pub mod solver;
pub mod stencil;

pub use boundary::{apply_boundary, jensen_wall_vorticity, BoundarySpec, CornerPolicy, Wall};
pub use diagnostics::{
    centerline_profiles, continuity_check, core_vorticity_gap, detect_vortices, peclet_report,
    simpson, FlowRateReport, PecletReport, VortexRecord, VortexRegion,
};
pub use fields::{FlowState, Grid, RejectedGridSize, ScalarField};
pub use solver::{
    compute_residuals, continuation_sweep, iterate, solve, sweep_omega, sweep_psi, Initial,
    ResidualTriad, SolveOutcome, SolverConfig, SolverError, SweepOrder,
};
pub use stencil::{omega_residual_at, psi_residual_at, velocity_u, velocity_v, BoundaryIndex};
