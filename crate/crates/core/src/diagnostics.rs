//! Solution verification and characterization.
//!
//! A converged state is checked rather than trusted: the centerline velocity
//! profiles are integrated with the composite Simpson rule and compared
//! against the zero net flow a divergence-free field must have, the vortices
//! are located as strict local extrema of the streamfunction, and the core
//! vorticity of the primary vortex is compared against the infinite-Reynolds
//! asymptote of the recirculating-core model.

use std::fmt;

use serde::Serialize;

use crate::boundary::BoundarySpec;
use crate::fields::FlowState;
use crate::stencil::{velocity_u, velocity_v};

/// Theoretical uniform core vorticity magnitude of the primary vortex in the
/// infinite-Reynolds limit (Batchelor-model value for the square cavity).
pub const CORE_VORTICITY_ASYMPTOTE: f64 = 1.886;

/// Characteristic flow rate of plane Couette flow (unit lid over unit depth
/// without side walls); normalizes the continuity check.
pub const COUETTE_FLOW_RATE: f64 = 0.5;

/// Streamfunction extrema below this magnitude are treated as round-off
/// ripples, not vortices.
pub const VORTEX_PSI_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticsError {
    /// Composite Simpson needs an odd sample count of at least 3.
    BadSampleCount { len: usize },
    /// The streamfunction has no significant extremum to call a primary vortex.
    NoPrimaryVortex,
}

impl fmt::Display for DiagnosticsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagnosticsError::BadSampleCount { len } => {
                write!(f, "Simpson rule needs an odd sample count >= 3, got {len}")
            }
            DiagnosticsError::NoPrimaryVortex => {
                write!(
                    f,
                    "no primary vortex: streamfunction has no significant extremum"
                )
            }
        }
    }
}

impl std::error::Error for DiagnosticsError {}

/// Composite Simpson estimate of the integral over the sampled span.
/// `samples` are equally spaced values with spacing `h`; the count must be
/// odd (an even number of intervals) and at least 3.
pub fn simpson(samples: &[f64], h: f64) -> Result<f64, DiagnosticsError> {
    let m = samples.len();
    if m < 3 || m % 2 == 0 {
        return Err(DiagnosticsError::BadSampleCount { len: m });
    }
    let mut acc = samples[0] + samples[m - 1];
    for (idx, v) in samples[1..m - 1].iter().enumerate() {
        let w = if idx % 2 == 0 { 4.0 } else { 2.0 };
        acc += w * v;
    }
    Ok(acc * h / 3.0)
}

/// Normalized net volumetric flow rates through the cavity centerlines.
/// Both vanish for a solution that conserves mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowRateReport {
    /// |integral of u over the vertical centerline| / qc
    pub q1: f64,
    /// |integral of v over the horizontal centerline| / qc
    pub q2: f64,
    /// characteristic rate (plane Couette), always 0.5
    pub qc: f64,
}

/// Integrates the centerline velocity profiles (signed, absolute value taken
/// of the totals) with the Simpson rule and normalizes by the Couette rate.
pub fn continuity_check(state: &FlowState, bc: &BoundarySpec) -> FlowRateReport {
    let grid = state.grid();
    let n = grid.n();
    let mid = grid.mid();
    let u: Vec<f64> = (0..n).map(|j| velocity_u(state, bc, mid, j)).collect();
    let v: Vec<f64> = (0..n).map(|i| velocity_v(state, bc, i, mid)).collect();
    // odd n is a grid invariant, so the sample counts are valid
    let qu = simpson(&u, grid.h()).expect("odd grid");
    let qv = simpson(&v, grid.h()).expect("odd grid");
    FlowRateReport {
        q1: qu.abs() / COUETTE_FLOW_RATE,
        q2: qv.abs() / COUETTE_FLOW_RATE,
        qc: COUETTE_FLOW_RATE,
    }
}

/// Which part of the cavity a vortex is assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VortexRegion {
    /// The global streamfunction extremum.
    Primary,
    /// Bottom-right corner family.
    BR,
    /// Bottom-left corner family.
    BL,
    /// Top-left corner family.
    TL,
}

/// One detected vortex: a strict 8-neighbor extremum of the streamfunction.
#[derive(Debug, Clone, PartialEq)]
pub struct VortexRecord {
    pub region: VortexRegion,
    /// 1-based size rank within the region (1 = largest |psi|).
    pub rank: u32,
    /// Grid node of the extremum.
    pub node: (usize, usize),
    /// Reported center (the node position, or the refined sub-grid position).
    pub center: (f64, f64),
    pub psi_value: f64,
    pub omega_value: f64,
}

impl VortexRecord {
    /// "primary" for the global extremum, region+rank ("BR1", "BL2", ...) for
    /// the corner eddies.
    pub fn label(&self) -> String {
        match self.region {
            VortexRegion::Primary => "primary".to_string(),
            VortexRegion::BR => format!("BR{}", self.rank),
            VortexRegion::BL => format!("BL{}", self.rank),
            VortexRegion::TL => format!("TL{}", self.rank),
        }
    }
}

fn is_strict_extremum(state: &FlowState, i: usize, j: usize) -> bool {
    let c = state.psi.at(i, j);
    let mut above = 0;
    let mut below = 0;
    for di in -1i64..=1 {
        for dj in -1i64..=1 {
            if di == 0 && dj == 0 {
                continue;
            }
            let nb = state
                .psi
                .at((i as i64 + di) as usize, (j as i64 + dj) as usize);
            if c > nb {
                above += 1;
            } else if c < nb {
                below += 1;
            }
        }
    }
    above == 8 || below == 8
}

/// Quadrant region for a non-primary extremum at (x, y). Ties on a centerline
/// go toward the lower/left region; an extremum in the top-right quadrant is
/// assigned to its nearest corner among BR, BL, TL.
fn classify_region(x: f64, y: f64) -> VortexRegion {
    let rightish = x > 0.5;
    let toppish = y > 0.5;
    match (rightish, toppish) {
        (true, false) => VortexRegion::BR,
        (false, false) => VortexRegion::BL,
        (false, true) => VortexRegion::TL,
        (true, true) => {
            let d2 = |cx: f64, cy: f64| (x - cx) * (x - cx) + (y - cy) * (y - cy);
            let (br, bl, tl) = (d2(1.0, 0.0), d2(0.0, 0.0), d2(0.0, 1.0));
            if br <= bl && br <= tl {
                VortexRegion::BR
            } else if bl <= tl {
                VortexRegion::BL
            } else {
                VortexRegion::TL
            }
        }
    }
}

/// Least-squares quadratic fit over the 3x3 neighborhood of a node; returns
/// the stationary-point offset (clamped to one cell) and the fitted field
/// values there. Used by the sub-grid refinement mode.
fn biquadratic_refine(state: &FlowState, i: usize, j: usize) -> ((f64, f64), f64, f64) {
    // Fit f(dx,dy) = a + b dx + c dy + d dx^2 + e dy^2 + g dx dy over the 9
    // offsets in {-1,0,1}^2. With the stencil moments (sum x^2 = 6,
    // sum x^4 = 6, sum x^2 y^2 = 4) the normal equations reduce to closed
    // form: only (a, d, e) couple.
    let fit = |f: &dyn Fn(i64, i64) -> f64| -> [f64; 6] {
        let (mut s, mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for dx in -1i64..=1 {
            for dy in -1i64..=1 {
                let v = f(dx, dy);
                let (x, y) = (dx as f64, dy as f64);
                s += v;
                sx += x * v;
                sy += y * v;
                sxx += x * x * v;
                syy += y * y * v;
                sxy += x * y * v;
            }
        }
        let a = (5.0 * s - 3.0 * sxx - 3.0 * syy) / 9.0;
        let b = sx / 6.0;
        let c = sy / 6.0;
        let d = sxx / 2.0 - s / 3.0;
        let e = syy / 2.0 - s / 3.0;
        let g = sxy / 4.0;
        [a, b, c, d, e, g]
    };
    let psi_fit = fit(&|dx, dy| {
        state
            .psi
            .at((i as i64 + dx) as usize, (j as i64 + dy) as usize)
    });
    let omega_fit = fit(&|dx, dy| {
        state
            .omega
            .at((i as i64 + dx) as usize, (j as i64 + dy) as usize)
    });
    let [_, b, c, d, e, g] = psi_fit;
    // stationary point of the fitted quadratic: solve [2d g; g 2e] t = -[b; c]
    let det = 4.0 * d * e - g * g;
    let (mut tx, mut ty) = (0.0, 0.0);
    if det.abs() > 1e-300 {
        tx = (-2.0 * e * b + g * c) / det;
        ty = (-2.0 * d * c + g * b) / det;
    }
    tx = tx.clamp(-1.0, 1.0);
    ty = ty.clamp(-1.0, 1.0);
    let eval = |q: &[f64; 6]| {
        q[0] + q[1] * tx + q[2] * ty + q[3] * tx * tx + q[4] * ty * ty + q[5] * tx * ty
    };
    let h = state.grid().h();
    let center = (
        state.grid().coord(i) + tx * h,
        state.grid().coord(j) + ty * h,
    );
    (center, eval(&psi_fit), eval(&omega_fit))
}

fn detect_vortices_impl(state: &FlowState, refine: bool) -> Vec<VortexRecord> {
    let grid = state.grid();
    let n = grid.n();
    let mut found: Vec<(usize, usize, f64, f64)> = Vec::new();
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            let psi = state.psi.at(i, j);
            if psi.abs() < VORTEX_PSI_THRESHOLD {
                continue;
            }
            if is_strict_extremum(state, i, j) {
                found.push((i, j, psi, state.omega.at(i, j)));
            }
        }
    }
    if found.is_empty() {
        return Vec::new();
    }

    // deterministic size order: |psi| descending, node index as tie-break
    found.sort_by(|a, b| {
        b.2.abs()
            .partial_cmp(&a.2.abs())
            .unwrap()
            .then(a.0.cmp(&b.0))
            .then(a.1.cmp(&b.1))
    });

    let mut records = Vec::with_capacity(found.len());
    let mut counts = [0u32; 3]; // BR, BL, TL
    for (idx, &(i, j, psi, omega)) in found.iter().enumerate() {
        let (center, psi_value, omega_value) = if refine {
            biquadratic_refine(state, i, j)
        } else {
            ((grid.coord(i), grid.coord(j)), psi, omega)
        };
        let (region, rank) = if idx == 0 {
            (VortexRegion::Primary, 1)
        } else {
            let region = classify_region(grid.coord(i), grid.coord(j));
            let slot = match region {
                VortexRegion::BR => 0,
                VortexRegion::BL => 1,
                VortexRegion::TL => 2,
                VortexRegion::Primary => unreachable!(),
            };
            counts[slot] += 1;
            (region, counts[slot])
        };
        records.push(VortexRecord {
            region,
            rank,
            node: (i, j),
            center,
            psi_value,
            omega_value,
        });
    }
    records
}

/// All strict 8-neighbor extrema of the streamfunction above the significance
/// threshold: the global extremum labeled primary, the rest grouped by corner
/// region and ranked by |psi| within each region. Centers are reported at
/// grid nodes.
pub fn detect_vortices(state: &FlowState) -> Vec<VortexRecord> {
    detect_vortices_impl(state, false)
}

/// Same census with a biquadratic sub-grid refinement of each center.
pub fn detect_vortices_refined(state: &FlowState) -> Vec<VortexRecord> {
    detect_vortices_impl(state, true)
}

/// Gap between the infinite-Reynolds core-vorticity asymptote and the
/// magnitude of the vorticity at the primary-vortex node. Positive while the
/// computed magnitude sits below the asymptote.
pub fn core_vorticity_gap(state: &FlowState) -> Result<f64, DiagnosticsError> {
    let records = detect_vortices(state);
    let primary = records
        .iter()
        .find(|r| r.region == VortexRegion::Primary)
        .ok_or(DiagnosticsError::NoPrimaryVortex)?;
    Ok(CORE_VORTICITY_ASYMPTOTE - primary.omega_value.abs())
}

/// Same gap with the core vorticity taken from the refined (sub-grid) vortex
/// center instead of the raw node.
pub fn core_vorticity_gap_refined(state: &FlowState) -> Result<f64, DiagnosticsError> {
    let records = detect_vortices_refined(state);
    let primary = records
        .iter()
        .find(|r| r.region == VortexRegion::Primary)
        .ok_or(DiagnosticsError::NoPrimaryVortex)?;
    Ok(CORE_VORTICITY_ASYMPTOTE - primary.omega_value.abs())
}

/// Maximum cell Peclet number `max(|u|,|v|) * h * Re` over the interior and
/// the node where it occurs. Large values flag convective destabilization of
/// the central-difference stencil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PecletReport {
    pub peclet_max: f64,
    pub location: (usize, usize),
}

pub fn peclet_report(state: &FlowState, bc: &BoundarySpec) -> PecletReport {
    let grid = state.grid();
    let n = grid.n();
    let mut best = 0.0_f64;
    let mut at = (1, 1);
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            let u = velocity_u(state, bc, i, j).abs();
            let v = velocity_v(state, bc, i, j).abs();
            let pe = u.max(v) * grid.h() * state.re;
            if pe > best {
                best = pe;
                at = (i, j);
            }
        }
    }
    PecletReport {
        peclet_max: best,
        location: at,
    }
}

/// Velocity profiles along the two centerlines: `u(0.5, y)` for every `j`
/// (including the walls) and `v(x, 0.5)` for every `i`.
pub fn centerline_profiles(
    state: &FlowState,
    bc: &BoundarySpec,
) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let grid = state.grid();
    let n = grid.n();
    let mid = grid.mid();
    let u_profile = (0..n)
        .map(|j| (grid.coord(j), velocity_u(state, bc, mid, j)))
        .collect();
    let v_profile = (0..n)
        .map(|i| (grid.coord(i), velocity_v(state, bc, i, mid)))
        .collect();
    (u_profile, v_profile)
}
