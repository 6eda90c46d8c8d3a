//! Successive over-relaxation solver for the coupled streamfunction/vorticity
//! system, with the three-residual convergence monitor.
//!
//! One outer iteration is: SOR sweep of the streamfunction equation, wall
//! vorticity refresh from the new streamfunction, SOR sweep of the vorticity
//! transport equation, then residual bookkeeping. Sweeps are Gauss-Seidel in
//! lexicographic order (`i` outer, `j` inner) so a run is fully deterministic;
//! an optional red-black ordering is available and changes the iteration path
//! but not the convergence criterion.
//!
//! The monitor tracks, per iteration:
//!   RES1 - maximum absolute residual of the discrete equations,
//!   RES2 - maximum absolute change between iterates,
//!   RES3 - maximum relative change between iterates (previous iterate in the
//!          denominator, nodes below [`RES3_DENOM_GUARD`] excluded).
//! A solve stops when both RES1 values drop to the configured tolerance.

use std::fmt;

use crate::boundary::{apply_boundary, BoundarySpec};
use crate::fields::{FlowState, Grid};
use crate::stencil::{omega_residual_raw, psi_residual_raw};

/// Nodes whose previous-iterate magnitude is below this are left out of the
/// RES3 maximum; the relative change is meaningless against a zero value.
pub const RES3_DENOM_GUARD: f64 = 1e-12;

/// Node visitation order within a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepOrder {
    /// `i` outer, `j` inner. The normative order.
    #[default]
    Lexicographic,
    /// Even-colored nodes (`i + j` even) first, then odd. Same fixed point,
    /// different iteration path; within one color the updates are independent.
    RedBlack,
}

/// Initial condition for a solve.
#[derive(Debug, Clone)]
pub enum Initial {
    /// Both fields zero.
    Zero,
    /// Start from an existing state (continuation / restart).
    Warm(FlowState),
}

/// Solver parameters. The defaults over-relax the streamfunction equation and
/// under-relax the vorticity equation; omega factors much above 0.5 put the
/// coupled iteration into a residual limit cycle already at moderate Reynolds
/// numbers, and high-Re runs on coarse grids may need smaller values still.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub relax_psi: f64,
    pub relax_omega: f64,
    /// Stopping threshold on both RES1 maxima.
    pub tol: f64,
    pub max_iters: u64,
    /// History sampling stride; the final iteration is always recorded.
    pub log_every: u64,
    pub bc: BoundarySpec,
    pub initial: Initial,
    pub sweep: SweepOrder,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            relax_psi: 1.5,
            relax_omega: 0.5,
            tol: 1e-10,
            max_iters: 500_000,
            log_every: 100,
            bc: BoundarySpec::default(),
            initial: Initial::Zero,
            sweep: SweepOrder::Lexicographic,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::InvalidConfig(msg));
        if !(self.relax_psi > 0.0 && self.relax_psi < 2.0) {
            return bad(format!("relax_psi = {} outside (0, 2)", self.relax_psi));
        }
        if !(self.relax_omega > 0.0 && self.relax_omega < 2.0) {
            return bad(format!("relax_omega = {} outside (0, 2)", self.relax_omega));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("tol = {} must be positive and finite", self.tol));
        }
        if self.log_every == 0 {
            return bad("log_every must be >= 1".to_string());
        }
        for (name, v) in [
            ("top", self.bc.top),
            ("bottom", self.bc.bottom),
            ("left", self.bc.left),
            ("right", self.bc.right),
        ] {
            if !v.is_finite() {
                return bad(format!("wall speed {name} = {v} is not finite"));
            }
        }
        Ok(())
    }
}

/// The six residual monitors of one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualTriad {
    pub iter: u64,
    pub res1_psi: f64,
    pub res1_omega: f64,
    pub res2_psi: f64,
    pub res2_omega: f64,
    pub res3_psi: f64,
    pub res3_omega: f64,
}

/// Result of a solve: the final state, the sampled residual history, and
/// whether the RES1 criterion was met within the iteration budget.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub state: FlowState,
    pub history: Vec<ResidualTriad>,
    pub converged: bool,
    pub iterations: u64,
}

/// Marker error from a single sweep: an updated value came out non-finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Diverged;

impl fmt::Display for Diverged {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sweep produced a non-finite value")
    }
}

impl std::error::Error for Diverged {}

#[derive(Debug, Clone)]
pub enum SolverError {
    /// A sweep produced a non-finite value; the iteration index is the outer
    /// iteration that was in progress.
    Diverged {
        iteration: u64,
    },
    /// The iteration budget ran out before RES1 reached the tolerance. The
    /// partial outcome (state and history) is carried along.
    NotConverged(Box<SolveOutcome>),
    InvalidConfig(String),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::Diverged { iteration } => {
                write!(
                    f,
                    "solution diverged (non-finite value) at iteration {iteration}"
                )
            }
            SolverError::NotConverged(outcome) => match outcome.history.last() {
                Some(t) => write!(
                    f,
                    "not converged within {} iterations (res1_psi={:.3e}, res1_omega={:.3e})",
                    outcome.iterations, t.res1_psi, t.res1_omega
                ),
                None => write!(f, "not converged within {} iterations", outcome.iterations),
            },
            SolverError::InvalidConfig(msg) => write!(f, "invalid solver config: {msg}"),
        }
    }
}

impl std::error::Error for SolverError {}

#[inline(always)]
fn relax_node_psi(
    psi: &mut [f64],
    omega: &[f64],
    n: usize,
    h2: f64,
    factor: f64,
    k: usize,
    max_change: &mut f64,
) -> Result<(), Diverged> {
    let r = psi_residual_raw(psi, omega, n, h2, k);
    let next = psi[k] + factor * r;
    if !next.is_finite() {
        return Err(Diverged);
    }
    let change = (next - psi[k]).abs();
    if change > *max_change {
        *max_change = change;
    }
    psi[k] = next;
    Ok(())
}

/// One Gauss-Seidel/SOR sweep of the streamfunction equation over the
/// interior, in place. Returns the maximum absolute change (feeds RES2).
pub fn sweep_psi(state: &mut FlowState, relax_psi: f64) -> Result<f64, Diverged> {
    sweep_psi_ordered(state, relax_psi, SweepOrder::Lexicographic)
}

pub fn sweep_psi_ordered(
    state: &mut FlowState,
    relax_psi: f64,
    order: SweepOrder,
) -> Result<f64, Diverged> {
    let grid = state.grid();
    let n = grid.n();
    let h2 = grid.h() * grid.h();
    let factor = relax_psi * (h2 / 4.0);
    let psi = state.psi.values_mut();
    let omega = state.omega.values();
    let mut max_change = 0.0_f64;
    match order {
        SweepOrder::Lexicographic => {
            for i in 1..n - 1 {
                let row = i * n;
                for j in 1..n - 1 {
                    relax_node_psi(psi, omega, n, h2, factor, row + j, &mut max_change)?;
                }
            }
        }
        SweepOrder::RedBlack => {
            for color in 0..2 {
                for i in 1..n - 1 {
                    let row = i * n;
                    let j0 = 1 + (i + 1 + color) % 2;
                    for j in (j0..n - 1).step_by(2) {
                        relax_node_psi(psi, omega, n, h2, factor, row + j, &mut max_change)?;
                    }
                }
            }
        }
    }
    Ok(max_change)
}

#[inline(always)]
#[allow(clippy::too_many_arguments)]
fn relax_node_omega(
    psi: &[f64],
    omega: &mut [f64],
    n: usize,
    h2: f64,
    th: f64,
    re: f64,
    factor: f64,
    k: usize,
    max_change: &mut f64,
) -> Result<(), Diverged> {
    let r = omega_residual_raw(psi, omega, n, h2, th, re, k);
    let next = omega[k] + factor * r;
    if !next.is_finite() {
        return Err(Diverged);
    }
    let change = (next - omega[k]).abs();
    if change > *max_change {
        *max_change = change;
    }
    omega[k] = next;
    Ok(())
}

/// One SOR sweep of the vorticity transport equation over the interior, in
/// place. Returns the maximum absolute change.
pub fn sweep_omega(state: &mut FlowState, relax_omega: f64, re: f64) -> Result<f64, Diverged> {
    sweep_omega_ordered(state, relax_omega, re, SweepOrder::Lexicographic)
}

pub fn sweep_omega_ordered(
    state: &mut FlowState,
    relax_omega: f64,
    re: f64,
    order: SweepOrder,
) -> Result<f64, Diverged> {
    let grid = state.grid();
    let n = grid.n();
    let h = grid.h();
    let h2 = h * h;
    let th = 2.0 * h;
    let factor = relax_omega * (h2 * re / 4.0);
    let psi = state.psi.values();
    let omega = state.omega.values_mut();
    let mut max_change = 0.0_f64;
    match order {
        SweepOrder::Lexicographic => {
            for i in 1..n - 1 {
                let row = i * n;
                for j in 1..n - 1 {
                    relax_node_omega(psi, omega, n, h2, th, re, factor, row + j, &mut max_change)?;
                }
            }
        }
        SweepOrder::RedBlack => {
            for color in 0..2 {
                for i in 1..n - 1 {
                    let row = i * n;
                    let j0 = 1 + (i + 1 + color) % 2;
                    for j in (j0..n - 1).step_by(2) {
                        relax_node_omega(
                            psi,
                            omega,
                            n,
                            h2,
                            th,
                            re,
                            factor,
                            row + j,
                            &mut max_change,
                        )?;
                    }
                }
            }
        }
    }
    Ok(max_change)
}

/// Max absolute and guarded max relative change between two value slices.
fn diff_maxes(prev: &[f64], next: &[f64]) -> (f64, f64) {
    let mut r2 = 0.0_f64;
    let mut r3 = 0.0_f64;
    for (p, q) in prev.iter().zip(next) {
        let d = (q - p).abs();
        if d > r2 {
            r2 = d;
        }
        let pa = p.abs();
        if pa >= RES3_DENOM_GUARD {
            let rel = d / pa;
            if rel > r3 {
                r3 = rel;
            }
        }
    }
    (r2, r3)
}

fn compute_residuals_raw(
    prev_psi: &[f64],
    prev_omega: &[f64],
    next: &FlowState,
    iter: u64,
) -> ResidualTriad {
    let grid = next.grid();
    let n = grid.n();
    let h = grid.h();
    let h2 = h * h;
    let th = 2.0 * h;
    let re = next.re;
    let psi = next.psi.values();
    let omega = next.omega.values();

    let mut res1_psi = 0.0_f64;
    let mut res1_omega = 0.0_f64;
    for i in 1..n - 1 {
        let row = i * n;
        for j in 1..n - 1 {
            let k = row + j;
            let rp = psi_residual_raw(psi, omega, n, h2, k).abs();
            if rp > res1_psi {
                res1_psi = rp;
            }
            let ro = omega_residual_raw(psi, omega, n, h2, th, re, k).abs();
            if ro > res1_omega {
                res1_omega = ro;
            }
        }
    }
    let (res2_psi, res3_psi) = diff_maxes(prev_psi, psi);
    let (res2_omega, res3_omega) = diff_maxes(prev_omega, omega);
    ResidualTriad {
        iter,
        res1_psi,
        res1_omega,
        res2_psi,
        res2_omega,
        res3_psi,
        res3_omega,
    }
}

/// The full residual triad between two iterates: RES1 on `next`, RES2/RES3
/// between `prev` and `next`.
pub fn compute_residuals(prev: &FlowState, next: &FlowState, iter: u64) -> ResidualTriad {
    compute_residuals_raw(prev.psi.values(), prev.omega.values(), next, iter)
}

fn iterate_from(
    state: &mut FlowState,
    prev_psi: &mut Vec<f64>,
    prev_omega: &mut Vec<f64>,
    config: &SolverConfig,
    iter: u64,
) -> Result<ResidualTriad, SolverError> {
    prev_psi.clear();
    prev_psi.extend_from_slice(state.psi.values());
    prev_omega.clear();
    prev_omega.extend_from_slice(state.omega.values());

    let diverged = |_: Diverged| SolverError::Diverged { iteration: iter };
    sweep_psi_ordered(state, config.relax_psi, config.sweep).map_err(diverged)?;
    apply_boundary(state, &config.bc);
    sweep_omega_ordered(state, config.relax_omega, state.re, config.sweep).map_err(diverged)?;
    Ok(compute_residuals_raw(prev_psi, prev_omega, state, iter))
}

/// One outer iteration: streamfunction sweep, wall vorticity refresh,
/// vorticity sweep, residual bookkeeping. Returns the advanced state and the
/// triad comparing it to the input state.
pub fn iterate(
    state: &FlowState,
    config: &SolverConfig,
    iter: u64,
) -> Result<(FlowState, ResidualTriad), SolverError> {
    let mut next = state.clone();
    let mut prev_psi = Vec::new();
    let mut prev_omega = Vec::new();
    let triad = iterate_from(&mut next, &mut prev_psi, &mut prev_omega, config, iter)?;
    Ok((next, triad))
}

/// Iterates until both RES1 maxima are at or below `config.tol`.
///
/// On success the outcome's history holds every `log_every`-th triad plus the
/// final one. Running out of budget is reported as
/// [`SolverError::NotConverged`] with the partial outcome attached, so the
/// caller can still inspect or dump the fields.
pub fn solve(config: &SolverConfig, re: f64, grid: Grid) -> Result<SolveOutcome, SolverError> {
    config.validate()?;
    if !(re > 0.0 && re.is_finite()) {
        return Err(SolverError::InvalidConfig(format!(
            "Reynolds number {re} must be positive and finite"
        )));
    }
    let mut state = match &config.initial {
        Initial::Zero => FlowState::zeros(grid, re),
        Initial::Warm(warm) => {
            if warm.grid() != grid {
                return Err(SolverError::InvalidConfig(format!(
                    "warm start grid ({} nodes) does not match solve grid ({} nodes)",
                    warm.grid().n(),
                    grid.n()
                )));
            }
            FlowState::new(warm.psi.clone(), warm.omega.clone(), re)
        }
    };
    apply_boundary(&mut state, &config.bc);
    if !state.omega.values().iter().all(|v| v.is_finite()) {
        // a warm start so extreme that the wall closure already overflowed
        return Err(SolverError::Diverged { iteration: 0 });
    }

    let mut history: Vec<ResidualTriad> = Vec::new();
    let mut prev_psi = Vec::new();
    let mut prev_omega = Vec::new();
    let mut last: Option<ResidualTriad> = None;

    for iter in 1..=config.max_iters {
        let triad = iterate_from(&mut state, &mut prev_psi, &mut prev_omega, config, iter)?;
        let converged = triad.res1_psi <= config.tol && triad.res1_omega <= config.tol;
        if iter % config.log_every == 0 {
            history.push(triad);
        }
        if converged {
            if history.last().map(|t| t.iter) != Some(iter) {
                history.push(triad);
            }
            return Ok(SolveOutcome {
                state,
                history,
                converged: true,
                iterations: iter,
            });
        }
        last = Some(triad);
    }

    if let Some(t) = last {
        if history.last().map(|h| h.iter) != Some(t.iter) {
            history.push(t);
        }
    }
    Err(SolverError::NotConverged(Box::new(SolveOutcome {
        state,
        history,
        converged: false,
        iterations: config.max_iters,
    })))
}

/// One entry of a Reynolds continuation sweep.
#[derive(Debug, Clone)]
pub struct ContinuationEntry {
    pub re: f64,
    pub result: Result<SolveOutcome, SolverError>,
}

/// Solves the listed Reynolds numbers in order, warm-starting each solve from
/// the previous converged state (the first entry starts per `config.initial`).
/// Stops after the first entry that fails to converge; that failure record is
/// the last entry returned.
pub fn continuation_sweep(
    re_list: &[f64],
    config: &SolverConfig,
    grid: Grid,
) -> Result<Vec<ContinuationEntry>, SolverError> {
    if re_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SolverError::InvalidConfig(
            "re_list must be strictly increasing".to_string(),
        ));
    }
    let mut entries = Vec::with_capacity(re_list.len());
    let mut warm: Option<FlowState> = None;
    for &re in re_list {
        let mut cfg = config.clone();
        if let Some(prev) = warm.take() {
            cfg.initial = Initial::Warm(prev);
        }
        let result = solve(&cfg, re, grid);
        let failed = result.is_err();
        if let Ok(outcome) = &result {
            warm = Some(outcome.state.clone());
        }
        entries.push(ContinuationEntry { re, result });
        if failed {
            break;
        }
    }
    Ok(entries)
}
