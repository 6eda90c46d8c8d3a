//! Shared setup for the solver benchmarks.

use cavity_core::boundary::apply_boundary;
use cavity_core::solver::{iterate, SolverConfig};
use cavity_core::{FlowState, Grid};

/// A mid-solve state with structure in both fields: a few hundred default
/// iterations from the cold start at Re = 1000. Benchmarking the cold state
/// would understate the convective work.
pub fn warmed_state(n: usize) -> (FlowState, SolverConfig) {
    let grid = Grid::new(n).unwrap();
    let config = SolverConfig::default();
    let mut state = FlowState::zeros(grid, 1000.0);
    apply_boundary(&mut state, &config.bc);
    for it in 1..=200 {
        let (next, _) = iterate(&state, &config, it).unwrap();
        state = next;
    }
    (state, config)
}
