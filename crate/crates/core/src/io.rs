//! File formats.
//!
//! Field dump: UTF-8 CSV with header `x,y,psi,omega,u,v`, one row per node in
//! lexicographic order (`i` outer, `j` inner), every value printed with 17
//! significant digits so a dump/load round trip is bit-exact.
//!
//! Convergence log: one headerless text line per logged iteration,
//! `iter,res1_psi,res1_omega,res2_psi,res2_omega,res3_psi,res3_omega`.
//!
//! Continuity report and vortex census are JSON; profiles are headerless
//! `coord,value` CSV. Writers are deterministic: identical inputs give
//! identical bytes.

use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::boundary::BoundarySpec;
use crate::diagnostics::{FlowRateReport, VortexRecord};
use crate::fields::{FlowState, Grid, ScalarField};
use crate::solver::ResidualTriad;
use crate::stencil::{velocity_u, velocity_v};

pub const FIELD_DUMP_HEADER: &str = "x,y,psi,omega,u,v";

/// 17 significant digits, scientific notation. Enough to reproduce any f64
/// exactly on parse.
#[inline]
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// A structural problem in an input file, located by 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for FormatError {}

#[derive(Debug)]
pub enum LoadError {
    Io(io::Error),
    Format(FormatError),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io(e) => write!(f, "{e}"),
            LoadError::Format(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for LoadError {}

impl From<io::Error> for LoadError {
    fn from(e: io::Error) -> Self {
        LoadError::Io(e)
    }
}

impl From<FormatError> for LoadError {
    fn from(e: FormatError) -> Self {
        LoadError::Format(e)
    }
}

/// Writes `render` into `path` atomically: the bytes land in a temporary file
/// in the same directory which is renamed over the target only after a
/// successful flush.
pub fn atomic_write<F>(path: &Path, render: F) -> io::Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let tmp = path.with_extension("tmp~");
    {
        let file = fs::File::create(&tmp)?;
        let mut w = BufWriter::new(file);
        render(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)
}

/// Writes the full field dump for `state`, with velocities evaluated under `bc`.
pub fn write_field_dump(state: &FlowState, bc: &BoundarySpec, w: &mut dyn Write) -> io::Result<()> {
    let grid = state.grid();
    let n = grid.n();
    writeln!(w, "{FIELD_DUMP_HEADER}")?;
    for i in 0..n {
        for j in 0..n {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_g17(grid.coord(i)),
                fmt_g17(grid.coord(j)),
                fmt_g17(state.psi.at(i, j)),
                fmt_g17(state.omega.at(i, j)),
                fmt_g17(velocity_u(state, bc, i, j)),
                fmt_g17(velocity_v(state, bc, i, j)),
            )?;
        }
    }
    Ok(())
}

/// A parsed field dump: the flow state plus the velocity columns as stored in
/// the file (lexicographic, `i` outer).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub state: FlowState,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FieldDump {
    /// Velocity sample of the stored u column along the vertical centerline.
    pub fn u_centerline(&self) -> Vec<f64> {
        let grid = self.state.grid();
        let (n, mid) = (grid.n(), grid.mid());
        (0..n).map(|j| self.u[mid * n + j]).collect()
    }

    /// Velocity sample of the stored v column along the horizontal centerline.
    pub fn v_centerline(&self) -> Vec<f64> {
        let grid = self.state.grid();
        let (n, mid) = (grid.n(), grid.mid());
        (0..n).map(|i| self.v[i * n + mid]).collect()
    }
}

fn parse_value(tok: &str, line: usize, what: &str) -> Result<f64, FormatError> {
    let v: f64 = tok.trim().parse().map_err(|_| FormatError {
        line,
        message: format!("cannot parse {what} value {tok:?}"),
    })?;
    if !v.is_finite() {
        return Err(FormatError {
            line,
            message: format!("non-finite {what} value {tok:?}"),
        });
    }
    Ok(v)
}

/// Reads a field dump written by [`write_field_dump`]. The node count is
/// inferred from the row count, which must be an odd perfect square of at
/// least 25; row order and coordinates are validated against the grid.
pub fn load_field_dump_full(path: &Path, re: f64) -> Result<FieldDump, LoadError> {
    let file = fs::File::open(path)?;
    let reader = io::BufReader::new(file);
    let mut lines = reader.lines();

    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim_end() != FIELD_DUMP_HEADER {
        return Err(FormatError {
            line: 1,
            message: format!("expected header {FIELD_DUMP_HEADER:?}, found {header:?}"),
        }
        .into());
    }

    let mut rows: Vec<[f64; 6]> = Vec::new();
    let mut line_no = 1usize;
    for line in lines {
        let line = line?;
        line_no += 1;
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != 6 {
            return Err(FormatError {
                line: line_no,
                message: format!("expected 6 comma-separated values, found {}", toks.len()),
            }
            .into());
        }
        let names = ["x", "y", "psi", "omega", "u", "v"];
        let mut row = [0.0; 6];
        for (slot, (tok, name)) in toks.iter().zip(names).enumerate() {
            row[slot] = parse_value(tok, line_no, name)?;
        }
        rows.push(row);
    }

    let count = rows.len();
    let n = (count as f64).sqrt().round() as usize;
    if n * n != count || n < 5 || n % 2 == 0 {
        return Err(FormatError {
            line: line_no,
            message: format!("row count {count} is not an odd perfect square >= 25"),
        }
        .into());
    }
    let grid = Grid::new(n).expect("validated above");

    let mut psi = Vec::with_capacity(count);
    let mut omega = Vec::with_capacity(count);
    let mut u = Vec::with_capacity(count);
    let mut v = Vec::with_capacity(count);
    for (k, row) in rows.iter().enumerate() {
        let (i, j) = (k / n, k % n);
        let (x, y) = (grid.coord(i), grid.coord(j));
        if (row[0] - x).abs() > 1e-12 || (row[1] - y).abs() > 1e-12 {
            return Err(FormatError {
                line: k + 2,
                message: format!(
                    "row out of order: expected node ({x}, {y}), found ({}, {})",
                    row[0], row[1]
                ),
            }
            .into());
        }
        psi.push(row[2]);
        omega.push(row[3]);
        u.push(row[4]);
        v.push(row[5]);
    }

    Ok(FieldDump {
        state: FlowState::new(
            ScalarField::from_values(grid, psi),
            ScalarField::from_values(grid, omega),
            re,
        ),
        u,
        v,
    })
}

/// Reads just the flow state from a field dump. A dump/load round trip
/// reproduces the fields bit for bit.
pub fn load_field_dump(path: &Path, re: f64) -> Result<FlowState, LoadError> {
    Ok(load_field_dump_full(path, re)?.state)
}

/// Writes the convergence log for a residual history.
pub fn write_convergence_log(history: &[ResidualTriad], w: &mut dyn Write) -> io::Result<()> {
    for t in history {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            t.iter,
            fmt_g17(t.res1_psi),
            fmt_g17(t.res1_omega),
            fmt_g17(t.res2_psi),
            fmt_g17(t.res2_omega),
            fmt_g17(t.res3_psi),
            fmt_g17(t.res3_omega),
        )?;
    }
    Ok(())
}

/// Writes a `coord,value` profile CSV.
pub fn write_profile(profile: &[(f64, f64)], w: &mut dyn Write) -> io::Result<()> {
    for (coord, value) in profile {
        writeln!(w, "{},{}", fmt_g17(*coord), fmt_g17(*value))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct VortexJson {
    label: String,
    i: usize,
    j: usize,
    x: f64,
    y: f64,
    psi: f64,
    omega: f64,
}

/// Writes the vortex census as a JSON array of records.
pub fn write_vortex_json(records: &[VortexRecord], w: &mut dyn Write) -> io::Result<()> {
    let rows: Vec<VortexJson> = records
        .iter()
        .map(|r| VortexJson {
            label: r.label(),
            i: r.node.0,
            j: r.node.1,
            x: r.center.0,
            y: r.center.1,
            psi: r.psi_value,
            omega: r.omega_value,
        })
        .collect();
    serde_json::to_writer_pretty(&mut *w, &rows)?;
    writeln!(w)?;
    Ok(())
}

/// Writes the continuity report as JSON `{q1, q2, qc}`.
pub fn write_continuity_json(report: &FlowRateReport, w: &mut dyn Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, report)?;
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::continuity_check;
    use rand::{Rng, SeedableRng};

    fn random_state(rng: &mut impl Rng, n: usize) -> FlowState {
        let grid = Grid::new(n).unwrap();
        FlowState::new(
            ScalarField::from_fn(grid, |_, _| rng.gen_range(-1.0..1.0)),
            ScalarField::from_fn(grid, |_, _| rng.gen_range(-20.0..20.0)),
            rng.gen_range(0.5..5000.0),
        )
    }

    #[test]
    fn g17_round_trips_f64() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let x = f64::from_bits(rng.gen::<u64>());
            if !x.is_finite() {
                continue;
            }
            let back: f64 = fmt_g17(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x:?}");
        }
    }

    #[test]
    fn dump_load_round_trip_is_bit_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.csv");
        for trial in 0..100 {
            let state = random_state(&mut rng, if trial % 2 == 0 { 5 } else { 9 });
            let bc = BoundarySpec::default();
            atomic_write(&path, |w| write_field_dump(&state, &bc, w)).unwrap();
            let loaded = load_field_dump(&path, state.re).unwrap();
            assert_eq!(loaded.psi.values(), state.psi.values());
            assert_eq!(loaded.omega.values(), state.omega.values());
            // stored velocity columns reproduce the sampler too
            let full = load_field_dump_full(&path, state.re).unwrap();
            let n = state.grid().n();
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(full.u[i * n + j], velocity_u(&state, &bc, i, j));
                    assert_eq!(full.v[i * n + j], velocity_v(&state, &bc, i, j));
                }
            }
        }
    }

    #[test]
    fn dump_then_load_then_dump_is_byte_identical() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let state = random_state(&mut rng, 9);
        let bc = BoundarySpec::default();
        let mut first = Vec::new();
        write_field_dump(&state, &bc, &mut first).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.csv");
        std::fs::write(&path, &first).unwrap();
        let loaded = load_field_dump(&path, state.re).unwrap();
        let mut second = Vec::new();
        write_field_dump(&loaded, &bc, &mut second).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn header_mismatch_is_line_one() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x,y,psi\n0,0,0\n").unwrap();
        match load_field_dump(&path, 1.0) {
            Err(LoadError::Format(e)) => assert_eq!(e.line, 1),
            other => panic!("expected FormatError, got {other:?}"),
        }
    }

    #[test]
    fn wrong_row_count_is_rejected() {
        let state = FlowState::zeros(Grid::new(5).unwrap(), 1.0);
        let mut bytes = Vec::new();
        write_field_dump(&state, &BoundarySpec::default(), &mut bytes).unwrap();
        let mut text = String::from_utf8(bytes).unwrap();
        // drop the last data row: 24 rows is not a perfect square
        text.truncate(text.trim_end().rfind('\n').unwrap() + 1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.csv");
        std::fs::write(&path, text).unwrap();
        match load_field_dump(&path, 1.0) {
            Err(LoadError::Format(e)) => assert!(e.message.contains("row count")),
            other => panic!("expected FormatError, got {other:?}"),
        }
    }

    #[test]
    fn garbled_value_reports_its_line() {
        let state = FlowState::zeros(Grid::new(5).unwrap(), 1.0);
        let mut bytes = Vec::new();
        write_field_dump(&state, &BoundarySpec::default(), &mut bytes).unwrap();
        let mut lines: Vec<String> = String::from_utf8(bytes)
            .unwrap()
            .lines()
            .map(String::from)
            .collect();
        lines[3] = "0,0,not-a-number,0,0,0".to_string();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("garbled.csv");
        std::fs::write(&path, lines.join("\n")).unwrap();
        match load_field_dump(&path, 1.0) {
            Err(LoadError::Format(e)) => {
                assert_eq!(e.line, 4);
                assert!(e.message.contains("psi"));
            }
            other => panic!("expected FormatError, got {other:?}"),
        }
    }

    #[test]
    fn zero_dump_checks_clean() {
        // an all-zero dump is divergence-free by inspection
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zero.csv");
        let state = FlowState::zeros(Grid::new(9).unwrap(), 1.0);
        atomic_write(&path, |w| {
            write_field_dump(&state, &BoundarySpec::stationary(), w)
        })
        .unwrap();
        let dump = load_field_dump_full(&path, 1.0).unwrap();
        assert!(dump.u.iter().all(|&x| x == 0.0));
        assert!(dump.v.iter().all(|&x| x == 0.0));
        let report = continuity_check(&dump.state, &BoundarySpec::stationary());
        assert_eq!((report.q1, report.q2, report.qc), (0.0, 0.0, 0.5));
    }

    #[test]
    fn convergence_log_format() {
        let history = vec![ResidualTriad {
            iter: 100,
            res1_psi: 1.5e-3,
            res1_omega: 2.5e-2,
            res2_psi: 1e-7,
            res2_omega: 2e-6,
            res3_psi: 3e-5,
            res3_omega: 4e-4,
        }];
        let mut out = Vec::new();
        write_convergence_log(&history, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        let row = lines.next().unwrap();
        assert!(row.starts_with("100,"));
        assert_eq!(row.split(',').count(), 7);
        let v: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(v, 1.5e-3);
    }

    #[test]
    fn report_json_shapes() {
        let report = FlowRateReport {
            q1: 0.0,
            q2: 0.0,
            qc: 0.5,
        };
        let mut out = Vec::new();
        write_continuity_json(&report, &mut out).unwrap();
        let parsed: serde_json::Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(parsed["q1"], 0.0);
        assert_eq!(parsed["qc"], 0.5);

        let record = VortexRecord {
            region: crate::diagnostics::VortexRegion::BR,
            rank: 1,
            node: (10, 3),
            center: (0.625, 0.1875),
            psi_value: 1e-3,
            omega_value: 0.7,
        };
        let mut out = Vec::new();
        write_vortex_json(&[record], &mut out).unwrap();
        let parsed: serde_json::Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(parsed[0]["label"], "BR1");
        assert_eq!(parsed[0]["i"], 10);
        assert_eq!(parsed[0]["x"], 0.625);
        assert_eq!(parsed[0]["omega"], 0.7);
    }
}
