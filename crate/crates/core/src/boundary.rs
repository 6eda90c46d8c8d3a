//! Wall boundary closure.
//!
//! The walls are streamlines (`psi = 0`) and the wall vorticity is closed
//! from the interior streamfunction with Jensen's second-order formula
//!
//! ```text
//! omega_0 = (-4 psi_1 + psi_2 / 2) / h^2  -/+  3 V / h
//! ```
//!
//! where `psi_1` and `psi_2` are the streamfunction one and two nodes along
//! the inward normal from the wall node and `V` is the tangential wall speed.
//! The formula follows from a Taylor expansion of `psi` along the inward
//! normal `d` with `psi(0) = 0` and `d psi/d d (0)` fixed by the wall speed;
//! the sign of the speed term depends on which wall is expanded. Horizontal
//! walls carry their speed along +x, vertical walls along +y, so per wall:
//!
//! ```text
//! top:    d psi/d d = -V   =>  omega_0 = (-4 psi_1 + psi_2 / 2) / h^2 - 3 V / h
//! bottom: d psi/d d = +V   =>  omega_0 = (-4 psi_1 + psi_2 / 2) / h^2 + 3 V / h
//! left:   d psi/d d = -V   =>  omega_0 = (-4 psi_1 + psi_2 / 2) / h^2 - 3 V / h
//! right:  d psi/d d = +V   =>  omega_0 = (-4 psi_1 + psi_2 / 2) / h^2 + 3 V / h
//! ```
//!
//! Each arrangement is pinned by a quadratic-profile test below: the closure
//! is exact when `psi` is quadratic in the wall-normal coordinate.

use crate::fields::FlowState;

/// Cavity wall identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wall {
    Top,
    Bottom,
    Left,
    Right,
}

/// How the four corner nodes get their vorticity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CornerPolicy {
    /// Mean of the two adjacent walls' closures with the corner treated as
    /// stationary (V = 0). Regularizes the lid corners.
    #[default]
    AverageAdjacentWalls,
    /// Corners belong to the horizontal walls and move with them, so the lid
    /// corners take the full `-3V/h` of the moving lid.
    OwnedByLid,
}

/// Tangential wall speeds plus the corner rule. The default is the standard
/// driven cavity: unit lid speed on the top wall, all other walls at rest.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpec {
    pub top: f64,
    pub bottom: f64,
    pub left: f64,
    pub right: f64,
    pub corner_policy: CornerPolicy,
}

impl Default for BoundarySpec {
    fn default() -> Self {
        BoundarySpec {
            top: 1.0,
            bottom: 0.0,
            left: 0.0,
            right: 0.0,
            corner_policy: CornerPolicy::default(),
        }
    }
}

impl BoundarySpec {
    /// Cavity at rest: all four walls stationary.
    pub fn stationary() -> Self {
        BoundarySpec {
            top: 0.0,
            ..BoundarySpec::default()
        }
    }

    pub fn speed(&self, wall: Wall) -> f64 {
        match wall {
            Wall::Top => self.top,
            Wall::Bottom => self.bottom,
            Wall::Left => self.left,
            Wall::Right => self.right,
        }
    }
}

/// Second-order wall vorticity from the two streamfunction values along the
/// inward normal (`psi1` adjacent to the wall, `psi2` on the second line) and
/// the tangential wall speed `v`.
#[inline]
pub fn jensen_wall_vorticity(psi1: f64, psi2: f64, v: f64, h: f64, wall: Wall) -> f64 {
    let sign = match wall {
        Wall::Top | Wall::Left => -1.0,
        Wall::Bottom | Wall::Right => 1.0,
    };
    (-4.0 * psi1 + 0.5 * psi2) / (h * h) + sign * (3.0 * v / h)
}

/// Inward-normal streamfunction samples for a wall node: `(psi1, psi2)` one
/// and two nodes off the wall.
#[inline]
fn normal_samples(state: &FlowState, wall: Wall, i: usize, j: usize) -> (f64, f64) {
    let n = state.grid().n();
    match wall {
        Wall::Top => (state.psi.at(i, n - 2), state.psi.at(i, n - 3)),
        Wall::Bottom => (state.psi.at(i, 1), state.psi.at(i, 2)),
        Wall::Left => (state.psi.at(1, j), state.psi.at(2, j)),
        Wall::Right => (state.psi.at(n - 2, j), state.psi.at(n - 3, j)),
    }
}

#[inline]
fn wall_omega(state: &FlowState, bc: &BoundarySpec, wall: Wall, i: usize, j: usize) -> f64 {
    let (p1, p2) = normal_samples(state, wall, i, j);
    jensen_wall_vorticity(p1, p2, bc.speed(wall), state.grid().h(), wall)
}

#[inline]
fn corner_omega(
    state: &FlowState,
    bc: &BoundarySpec,
    walls: (Wall, Wall),
    i: usize,
    j: usize,
) -> f64 {
    match bc.corner_policy {
        CornerPolicy::AverageAdjacentWalls => {
            let h = state.grid().h();
            let (pa1, pa2) = normal_samples(state, walls.0, i, j);
            let (pb1, pb2) = normal_samples(state, walls.1, i, j);
            0.5 * (jensen_wall_vorticity(pa1, pa2, 0.0, h, walls.0)
                + jensen_wall_vorticity(pb1, pb2, 0.0, h, walls.1))
        }
        CornerPolicy::OwnedByLid => {
            // walls.0 is always the horizontal wall
            wall_omega(state, bc, walls.0, i, j)
        }
    }
}

/// Enforces the wall boundary conditions in place: `psi = 0` on every wall
/// node and wall vorticity recomputed from the current interior
/// streamfunction. Idempotent for a fixed interior.
///
/// Writes raw values: when handed an interior field large enough to overflow
/// the closure, the wall vorticity comes out non-finite and the solver's
/// divergence check picks it up on the next pass.
pub fn apply_boundary(state: &mut FlowState, bc: &BoundarySpec) {
    let n = state.grid().n();
    let last = n - 1;

    for i in 0..n {
        let row = i * n;
        state.psi.values_mut()[row] = 0.0;
        state.psi.values_mut()[row + last] = 0.0;
    }
    for j in 0..n {
        state.psi.values_mut()[j] = 0.0;
        state.psi.values_mut()[last * n + j] = 0.0;
    }

    for i in 1..last {
        let w = wall_omega(state, bc, Wall::Bottom, i, 0);
        state.omega.values_mut()[i * n] = w;
        let w = wall_omega(state, bc, Wall::Top, i, last);
        state.omega.values_mut()[i * n + last] = w;
    }
    for j in 1..last {
        let w = wall_omega(state, bc, Wall::Left, 0, j);
        state.omega.values_mut()[j] = w;
        let w = wall_omega(state, bc, Wall::Right, last, j);
        state.omega.values_mut()[last * n + j] = w;
    }

    let w = corner_omega(state, bc, (Wall::Bottom, Wall::Left), 0, 0);
    state.omega.values_mut()[0] = w;
    let w = corner_omega(state, bc, (Wall::Bottom, Wall::Right), last, 0);
    state.omega.values_mut()[last * n] = w;
    let w = corner_omega(state, bc, (Wall::Top, Wall::Left), 0, last);
    state.omega.values_mut()[last] = w;
    let w = corner_omega(state, bc, (Wall::Top, Wall::Right), last, last);
    state.omega.values_mut()[last * n + last] = w;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{FlowState, Grid, ScalarField};

    const WALLS: [Wall; 4] = [Wall::Top, Wall::Bottom, Wall::Left, Wall::Right];

    /// Inward-normal distance of node (i, j) from `wall`, in units of h.
    fn inward_distance(grid: Grid, wall: Wall, i: usize, j: usize) -> f64 {
        let last = (grid.n() - 1) as f64;
        match wall {
            Wall::Top => (last - j as f64) * grid.h(),
            Wall::Bottom => j as f64 * grid.h(),
            Wall::Left => i as f64 * grid.h(),
            Wall::Right => (last - i as f64) * grid.h(),
        }
    }

    /// Sign of d(psi)/d(d) per unit tangential wall speed. This is the
    /// independent Taylor-expansion oracle for the speed-term signs in
    /// `jensen_wall_vorticity`.
    fn tangential_slope_sign(wall: Wall) -> f64 {
        match wall {
            // u = d(psi)/dy, v = -d(psi)/dx
            Wall::Top => -1.0,
            Wall::Bottom => 1.0,
            Wall::Left => -1.0,
            Wall::Right => 1.0,
        }
    }

    #[test]
    fn zero_inputs_give_zero_vorticity() {
        for wall in WALLS {
            assert_eq!(jensen_wall_vorticity(0.0, 0.0, 0.0, 0.25, wall), 0.0);
        }
    }

    #[test]
    fn moving_lid_over_zero_field() {
        // |omega_0| = 3V/h = 12 for V = 1, h = 1/4; the top-wall sign is
        // negative (lid moving +x shears the fluid clockwise).
        let w = jensen_wall_vorticity(0.0, 0.0, 1.0, 0.25, Wall::Top);
        assert_eq!(w, -12.0);
        assert_eq!(w.abs(), 12.0);
    }

    /// The closure is exact on quadratic near-wall profiles
    /// psi(d) = slope*V*d - omega*/2 * d^2, for every wall orientation.
    #[test]
    fn quadratic_profile_recovers_wall_vorticity_exactly() {
        let grid = Grid::new(9).unwrap();
        let h = grid.h();
        let omega_star = 3.25;
        for wall in WALLS {
            for v in [0.0, 1.0, -0.5] {
                let slope = tangential_slope_sign(wall) * v;
                let psi = ScalarField::from_fn(grid, |x, y| {
                    let i = (x / h).round() as usize;
                    let j = (y / h).round() as usize;
                    let d = inward_distance(grid, wall, i, j);
                    slope * d - 0.5 * omega_star * d * d
                });
                let state = FlowState::new(psi, ScalarField::zeros(grid), 1.0);
                // probe a non-corner wall node
                let (i, j) = match wall {
                    Wall::Top => (4, 8),
                    Wall::Bottom => (4, 0),
                    Wall::Left => (0, 4),
                    Wall::Right => (8, 4),
                };
                let (p1, p2) = normal_samples(&state, wall, i, j);
                let got = jensen_wall_vorticity(p1, p2, v, h, wall);
                assert!(
                    (got - omega_star).abs() < 1e-12,
                    "{wall:?} v={v}: got {got}, want {omega_star}"
                );
            }
        }
    }

    /// A cubic term in the normal coordinate cancels out of the formula, so
    /// cubic profiles are recovered exactly as well.
    #[test]
    fn cubic_profile_recovers_wall_vorticity_exactly() {
        let omega_star = -1.5;
        let cubic = 7.0;
        for wall in WALLS {
            for h in [0.25, 0.125] {
                let d1 = h;
                let d2 = 2.0 * h;
                let p = |d: f64| -0.5 * omega_star * d * d + cubic * d * d * d;
                let got = jensen_wall_vorticity(p(d1), p(d2), 0.0, h, wall);
                assert!(
                    (got - omega_star).abs() < 1e-11,
                    "{wall:?} h={h}: got {got}, want {omega_star}"
                );
            }
        }
    }

    #[test]
    fn resting_cavity_stays_zero() {
        let grid = Grid::new(5).unwrap();
        let mut state = FlowState::zeros(grid, 10.0);
        apply_boundary(&mut state, &BoundarySpec::stationary());
        assert!(state.psi.values().iter().all(|&v| v == 0.0));
        assert!(state.omega.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lid_forcing_on_zero_streamfunction() {
        let grid = Grid::new(5).unwrap();
        let mut state = FlowState::zeros(grid, 10.0);
        let bc = BoundarySpec::default();
        apply_boundary(&mut state, &bc);
        let want = jensen_wall_vorticity(0.0, 0.0, 1.0, grid.h(), Wall::Top);
        for i in 1..4 {
            assert_eq!(state.omega.at(i, 4), want);
        }
        // all other walls see zero psi and zero speed
        for i in 1..4 {
            assert_eq!(state.omega.at(i, 0), 0.0);
            assert_eq!(state.omega.at(0, i), 0.0);
            assert_eq!(state.omega.at(4, i), 0.0);
        }
    }

    #[test]
    fn averaged_corners_treat_lid_as_stationary() {
        let grid = Grid::new(5).unwrap();
        let mut state = FlowState::zeros(grid, 10.0);
        apply_boundary(&mut state, &BoundarySpec::default());
        let h = grid.h();
        let want = 0.5
            * (jensen_wall_vorticity(0.0, 0.0, 0.0, h, Wall::Top)
                + jensen_wall_vorticity(0.0, 0.0, 0.0, h, Wall::Left));
        assert_eq!(state.omega.at(0, 4), want);
        assert_eq!(want, 0.0);
    }

    #[test]
    fn lid_owned_corners_move_with_the_lid() {
        let grid = Grid::new(5).unwrap();
        let mut state = FlowState::zeros(grid, 10.0);
        let bc = BoundarySpec {
            corner_policy: CornerPolicy::OwnedByLid,
            ..BoundarySpec::default()
        };
        apply_boundary(&mut state, &bc);
        let want = jensen_wall_vorticity(0.0, 0.0, 1.0, grid.h(), Wall::Top);
        assert_eq!(state.omega.at(0, 4), want);
        assert_eq!(state.omega.at(4, 4), want);
        // bottom corners belong to the resting bottom wall
        assert_eq!(state.omega.at(0, 0), 0.0);
        assert_eq!(state.omega.at(4, 0), 0.0);
    }

    #[test]
    fn apply_boundary_is_idempotent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let grid = Grid::new(9).unwrap();
        let psi = ScalarField::from_fn(grid, |_, _| rng.gen_range(-1.0..1.0));
        let omega = ScalarField::from_fn(grid, |_, _| rng.gen_range(-1.0..1.0));
        let mut state = FlowState::new(psi, omega, 100.0);
        let bc = BoundarySpec::default();
        apply_boundary(&mut state, &bc);
        let once = state.clone();
        apply_boundary(&mut state, &bc);
        assert_eq!(state, once);
    }
}
