//! Grid geometry and field storage for the unit-square cavity.
//!
//! Everything downstream works on node-centered scalar fields over a uniform
//! n x n mesh with spacing `h = 1/(n-1)`. Index `i` runs along x, `j` along y,
//! so node `(i, j)` sits at `(i*h, j*h)`. Storage is lexicographic with `i`
//! outer and `j` inner; sweeps and file dumps walk the same order so that runs
//! are byte-reproducible.

use std::fmt;

/// Uniform square mesh on the unit cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    h: f64,
}

/// Grid construction failure: the mesh cannot support the composite Simpson
/// rule and the centerline diagnostics unless the node count is odd and at
/// least 5.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RejectedGridSize {
    pub n: usize,
}

impl fmt::Display for RejectedGridSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "grid size {} rejected: node count must be odd and >= 5",
            self.n
        )
    }
}

impl std::error::Error for RejectedGridSize {}

impl Grid {
    /// Builds an `n x n` grid with spacing `h = 1/(n-1)`.
    ///
    /// `n` must be odd (even interval count, so Simpson quadrature and the
    /// centerline samplers are well defined) and at least 5 (so second-line
    /// points exist for the wall vorticity closure).
    pub fn new(n: usize) -> Result<Grid, RejectedGridSize> {
        if n < 5 || n % 2 == 0 {
            return Err(RejectedGridSize { n });
        }
        Ok(Grid {
            n,
            h: 1.0 / (n - 1) as f64,
        })
    }

    /// Nodes per side.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Mesh spacing.
    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    /// x (or y) coordinate of node index `k`.
    #[inline]
    pub fn coord(&self, k: usize) -> f64 {
        k as f64 * self.h
    }

    /// Index of the node row/column sitting on the centerline (x or y = 0.5).
    #[inline]
    pub fn mid(&self) -> usize {
        (self.n - 1) / 2
    }

    /// True for nodes on any of the four walls.
    #[inline]
    pub fn is_wall(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.n - 1 || j == self.n - 1
    }
}

/// One real value per grid node. Used for both the streamfunction and the
/// vorticity. Values are kept finite; the solver aborts before a non-finite
/// value is ever stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    /// All-zero field.
    pub fn zeros(grid: Grid) -> ScalarField {
        ScalarField {
            grid,
            values: vec![0.0; grid.n * grid.n],
        }
    }

    /// Field sampled from `f(x, y)` at the grid nodes.
    pub fn from_fn<F: FnMut(f64, f64) -> f64>(grid: Grid, mut f: F) -> ScalarField {
        let n = grid.n;
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            let x = grid.coord(i);
            for j in 0..n {
                let v = f(x, grid.coord(j));
                assert!(v.is_finite(), "non-finite sample at ({i}, {j})");
                values.push(v);
            }
        }
        ScalarField { grid, values }
    }

    /// Wraps an existing value vector (length `n*n`, lexicographic `i` outer).
    pub fn from_values(grid: Grid, values: Vec<f64>) -> ScalarField {
        assert_eq!(values.len(), grid.n * grid.n, "value count != n*n");
        assert!(
            values.iter().all(|v| v.is_finite()),
            "non-finite entry in field data"
        );
        ScalarField { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.grid.n + j
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(v.is_finite(), "non-finite value at ({i}, {j})");
        let k = self.idx(i, j);
        self.values[k] = v;
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Maximum absolute value over all nodes.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Paired streamfunction/vorticity fields plus the Reynolds number: the
/// solver's unit of state.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub psi: ScalarField,
    pub omega: ScalarField,
    pub re: f64,
}

impl FlowState {
    /// Zero-initialized state (the cold start used by the solver).
    pub fn zeros(grid: Grid, re: f64) -> FlowState {
        assert!(
            re > 0.0 && re.is_finite(),
            "Reynolds number must be positive"
        );
        FlowState {
            psi: ScalarField::zeros(grid),
            omega: ScalarField::zeros(grid),
            re,
        }
    }

    pub fn new(psi: ScalarField, omega: ScalarField, re: f64) -> FlowState {
        assert_eq!(
            psi.grid(),
            omega.grid(),
            "psi and omega must share one grid"
        );
        assert!(
            re > 0.0 && re.is_finite(),
            "Reynolds number must be positive"
        );
        FlowState { psi, omega, re }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.psi.grid
    }
}
