//! Command-line driver for the cavity solver.
//!
//! Subcommands: `solve` (one steady solve), `sweep` (Reynolds continuation),
//! and `check` / `vortices` / `profiles` (diagnostics over an existing field
//! dump). Exit status: 0 on success, 2 when a solve ran out of iterations
//! before converging (outputs are still written), 1 on usage, I/O, or
//! divergence errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cavity_core::boundary::{BoundarySpec, CornerPolicy};
use cavity_core::diagnostics::{
    centerline_profiles, continuity_check, detect_vortices, detect_vortices_refined, peclet_report,
    simpson, FlowRateReport, COUETTE_FLOW_RATE,
};
use cavity_core::io::{
    atomic_write, load_field_dump_full, write_continuity_json, write_convergence_log,
    write_field_dump, write_profile, write_vortex_json, FieldDump,
};
use cavity_core::solver::{
    continuation_sweep, solve, Initial, SolveOutcome, SolverConfig, SolverError, SweepOrder,
};
use cavity_core::Grid;

#[derive(Parser)]
#[command(
    name = "cavity",
    about = "Steady lid-driven cavity flow: SOR solver and solution diagnostics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one steady cavity flow and write field dump, convergence log,
    /// and diagnostics
    Solve(SolveArgs),
    /// Solve an increasing list of Reynolds numbers, warm-starting each from
    /// the previous converged state
    Sweep(SweepArgs),
    /// Continuity (mass conservation) check of an existing field dump
    Check(InputArgs),
    /// Vortex census of an existing field dump
    Vortices(VorticesArgs),
    /// Centerline velocity profiles of an existing field dump
    Profiles(InputArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CornerPolicyArg {
    /// Average the two adjacent wall closures with the corner at rest
    Average,
    /// Corners belong to the horizontal walls and move with them
    Lid,
}

impl From<CornerPolicyArg> for CornerPolicy {
    fn from(p: CornerPolicyArg) -> CornerPolicy {
        match p {
            CornerPolicyArg::Average => CornerPolicy::AverageAdjacentWalls,
            CornerPolicyArg::Lid => CornerPolicy::OwnedByLid,
        }
    }
}

#[derive(Args)]
struct SolverFlags {
    /// Nodes per side (odd, >= 5)
    #[arg(long, default_value_t = 129)]
    n: usize,
    /// SOR factor for the streamfunction sweep, in (0, 2)
    #[arg(long, default_value_t = 1.5)]
    relax_psi: f64,
    /// SOR factor for the vorticity sweep, in (0, 2)
    #[arg(long, default_value_t = 0.5)]
    relax_omega: f64,
    /// RES1 stopping threshold
    #[arg(long, default_value = "1e-10")]
    tol: f64,
    /// Iteration budget
    #[arg(long, default_value_t = 500_000)]
    max_iters: u64,
    /// Convergence-log sampling stride
    #[arg(long, default_value_t = 100)]
    log_every: u64,
    /// Corner treatment for the wall vorticity
    #[arg(long, value_enum, default_value_t = CornerPolicyArg::Average)]
    corner_policy: CornerPolicyArg,
    /// Red-black sweep ordering instead of lexicographic
    #[arg(long)]
    red_black: bool,
}

impl SolverFlags {
    fn to_config(&self) -> Result<(SolverConfig, Grid), CliError> {
        let grid = Grid::new(self.n).map_err(|e| CliError::usage(format!("--n: {e}")))?;
        if !(self.relax_psi > 0.0 && self.relax_psi < 2.0) {
            return Err(CliError::usage(format!(
                "--relax-psi: {} is outside (0, 2)",
                self.relax_psi
            )));
        }
        if !(self.relax_omega > 0.0 && self.relax_omega < 2.0) {
            return Err(CliError::usage(format!(
                "--relax-omega: {} is outside (0, 2)",
                self.relax_omega
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::usage(format!(
                "--tol: {} must be positive and finite",
                self.tol
            )));
        }
        if self.log_every == 0 {
            return Err(CliError::usage(
                "--log-every: must be at least 1".to_string(),
            ));
        }
        let config = SolverConfig {
            relax_psi: self.relax_psi,
            relax_omega: self.relax_omega,
            tol: self.tol,
            max_iters: self.max_iters,
            log_every: self.log_every,
            bc: BoundarySpec {
                corner_policy: self.corner_policy.into(),
                ..BoundarySpec::default()
            },
            initial: Initial::Zero,
            sweep: if self.red_black {
                SweepOrder::RedBlack
            } else {
                SweepOrder::Lexicographic
            },
        };
        Ok((config, grid))
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Reynolds number
    #[arg(long)]
    re: f64,
    #[command(flatten)]
    flags: SolverFlags,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Strictly increasing Reynolds numbers, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    re_list: Vec<f64>,
    #[command(flatten)]
    flags: SolverFlags,
    /// Output directory (one subdirectory per Reynolds number)
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct InputArgs {
    /// Field dump to analyze
    #[arg(long)]
    input: PathBuf,
    /// Reynolds number attached to the loaded state (informational)
    #[arg(long, default_value_t = 1.0)]
    re: f64,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct VorticesArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Biquadratic sub-grid refinement of the vortex centers
    #[arg(long)]
    refine: bool,
}

struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn usage(message: String) -> CliError {
        CliError { message, code: 1 }
    }

    fn io(context: &str, e: std::io::Error) -> CliError {
        CliError {
            message: format!("{context}: {e}"),
            code: 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            // help and version requests are not errors
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("cavity: {}", e.message);
            e.code
        }
    };
    ExitCode::from(code)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Check(args) => run_check(args),
        Command::Vortices(args) => run_vortices(args),
        Command::Profiles(args) => run_profiles(args),
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::io(&format!("creating {}", dir.display()), e))
}

fn validate_re(re: f64) -> Result<(), CliError> {
    if !(re > 0.0 && re.is_finite()) {
        return Err(CliError::usage(format!(
            "--re: {re} must be positive and finite"
        )));
    }
    Ok(())
}

/// Writes the full output set for one solved (or partially solved) state.
fn write_outputs(dir: &Path, outcome: &SolveOutcome, bc: &BoundarySpec) -> Result<(), CliError> {
    ensure_dir(dir)?;
    let io_err = |name: &'static str| {
        let dir = dir.display().to_string();
        move |e| CliError::io(&format!("writing {name} in {dir}"), e)
    };
    let state = &outcome.state;
    atomic_write(&dir.join("field.csv"), |w| write_field_dump(state, bc, w))
        .map_err(io_err("field.csv"))?;
    atomic_write(&dir.join("convergence.csv"), |w| {
        write_convergence_log(&outcome.history, w)
    })
    .map_err(io_err("convergence.csv"))?;
    atomic_write(&dir.join("continuity.json"), |w| {
        write_continuity_json(&continuity_check(state, bc), w)
    })
    .map_err(io_err("continuity.json"))?;
    atomic_write(&dir.join("vortices.json"), |w| {
        write_vortex_json(&detect_vortices(state), w)
    })
    .map_err(io_err("vortices.json"))?;
    let (u_profile, v_profile) = centerline_profiles(state, bc);
    atomic_write(&dir.join("profile_u.csv"), |w| write_profile(&u_profile, w))
        .map_err(io_err("profile_u.csv"))?;
    atomic_write(&dir.join("profile_v.csv"), |w| write_profile(&v_profile, w))
        .map_err(io_err("profile_v.csv"))?;
    Ok(())
}

fn print_summary(re: f64, outcome: &SolveOutcome, bc: &BoundarySpec) {
    let q = continuity_check(&outcome.state, bc);
    let pe = peclet_report(&outcome.state, bc);
    let labels: Vec<String> = detect_vortices(&outcome.state)
        .iter()
        .map(|r| r.label())
        .collect();
    let status = if outcome.converged {
        "converged"
    } else {
        "not converged"
    };
    println!(
        "Re={re}: {status} after {} iterations; q1={:.3e} q2={:.3e} peclet_max={:.3} vortices=[{}]",
        outcome.iterations,
        q.q1,
        q.q2,
        pe.peclet_max,
        labels.join(", ")
    );
    if let Some(t) = outcome.history.last() {
        println!(
            "  res1_psi={:.3e} res1_omega={:.3e} res2_psi={:.3e} res2_omega={:.3e}",
            t.res1_psi, t.res1_omega, t.res2_psi, t.res2_omega
        );
    }
}

fn run_solve(args: SolveArgs) -> Result<u8, CliError> {
    validate_re(args.re)?;
    let (config, grid) = args.flags.to_config()?;
    match solve(&config, args.re, grid) {
        Ok(outcome) => {
            write_outputs(&args.out, &outcome, &config.bc)?;
            print_summary(args.re, &outcome, &config.bc);
            Ok(0)
        }
        Err(SolverError::NotConverged(outcome)) => {
            write_outputs(&args.out, &outcome, &config.bc)?;
            print_summary(args.re, &outcome, &config.bc);
            Ok(2)
        }
        Err(e) => Err(CliError {
            message: e.to_string(),
            code: 1,
        }),
    }
}

/// Directory name for one sweep entry; f64 Display keeps 100 as "100".
fn entry_dir(out: &Path, re: f64) -> PathBuf {
    out.join(format!("re_{re}"))
}

fn run_sweep(args: SweepArgs) -> Result<u8, CliError> {
    if args.re_list.is_empty() {
        return Err(CliError::usage(
            "--re-list: needs at least one value".to_string(),
        ));
    }
    for &re in &args.re_list {
        validate_re(re)?;
    }
    if args.re_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CliError::usage(
            "--re-list: values must be strictly increasing".to_string(),
        ));
    }
    let (config, grid) = args.flags.to_config()?;
    ensure_dir(&args.out)?;
    let entries = continuation_sweep(&args.re_list, &config, grid).map_err(|e| CliError {
        message: e.to_string(),
        code: 1,
    })?;

    let mut summary = Vec::new();
    let mut exit = 0u8;
    for entry in &entries {
        match &entry.result {
            Ok(outcome) => {
                write_outputs(&entry_dir(&args.out, entry.re), outcome, &config.bc)?;
                print_summary(entry.re, outcome, &config.bc);
                let t = outcome.history.last();
                summary.push(serde_json::json!({
                    "re": entry.re,
                    "status": "converged",
                    "iterations": outcome.iterations,
                    "res1_psi": t.map(|t| t.res1_psi),
                    "res1_omega": t.map(|t| t.res1_omega),
                }));
            }
            Err(SolverError::NotConverged(outcome)) => {
                write_outputs(&entry_dir(&args.out, entry.re), outcome, &config.bc)?;
                print_summary(entry.re, outcome, &config.bc);
                let t = outcome.history.last();
                summary.push(serde_json::json!({
                    "re": entry.re,
                    "status": "not_converged",
                    "iterations": outcome.iterations,
                    "res1_psi": t.map(|t| t.res1_psi),
                    "res1_omega": t.map(|t| t.res1_omega),
                }));
                exit = 2;
            }
            Err(e) => {
                println!("Re={}: {e}", entry.re);
                summary.push(serde_json::json!({
                    "re": entry.re,
                    "status": "diverged",
                }));
                exit = 1;
            }
        }
    }
    let rendered = serde_json::to_string_pretty(&summary).expect("serializable");
    atomic_write(&args.out.join("sweep_summary.json"), |w| {
        writeln!(w, "{rendered}")
    })
    .map_err(|e| CliError::io("writing sweep_summary.json", e))?;
    Ok(exit)
}

fn load_input(args: &InputArgs) -> Result<FieldDump, CliError> {
    validate_re(args.re)?;
    load_field_dump_full(&args.input, args.re).map_err(|e| CliError {
        message: format!("{}: {e}", args.input.display()),
        code: 1,
    })
}

/// Continuity of a stored dump, integrating the velocity columns as written.
fn dump_continuity(dump: &FieldDump) -> FlowRateReport {
    let h = dump.state.grid().h();
    let qu = simpson(&dump.u_centerline(), h).expect("odd grid");
    let qv = simpson(&dump.v_centerline(), h).expect("odd grid");
    FlowRateReport {
        q1: qu.abs() / COUETTE_FLOW_RATE,
        q2: qv.abs() / COUETTE_FLOW_RATE,
        qc: COUETTE_FLOW_RATE,
    }
}

fn run_check(args: InputArgs) -> Result<u8, CliError> {
    let dump = load_input(&args)?;
    let report = dump_continuity(&dump);
    ensure_dir(&args.out)?;
    atomic_write(&args.out.join("continuity.json"), |w| {
        write_continuity_json(&report, w)
    })
    .map_err(|e| CliError::io("writing continuity.json", e))?;
    println!("{}", serde_json::to_string(&report).expect("serializable"));
    Ok(0)
}

fn run_vortices(args: VorticesArgs) -> Result<u8, CliError> {
    let dump = load_input(&args.input)?;
    let records = if args.refine {
        detect_vortices_refined(&dump.state)
    } else {
        detect_vortices(&dump.state)
    };
    ensure_dir(&args.input.out)?;
    atomic_write(&args.input.out.join("vortices.json"), |w| {
        write_vortex_json(&records, w)
    })
    .map_err(|e| CliError::io("writing vortices.json", e))?;
    for r in &records {
        println!(
            "{}: node=({}, {}) center=({:.6}, {:.6}) psi={:.6e} omega={:.6e}",
            r.label(),
            r.node.0,
            r.node.1,
            r.center.0,
            r.center.1,
            r.psi_value,
            r.omega_value
        );
    }
    Ok(0)
}

fn run_profiles(args: InputArgs) -> Result<u8, CliError> {
    let dump = load_input(&args)?;
    let grid = dump.state.grid();
    let u_profile: Vec<(f64, f64)> = dump
        .u_centerline()
        .iter()
        .enumerate()
        .map(|(j, &u)| (grid.coord(j), u))
        .collect();
    let v_profile: Vec<(f64, f64)> = dump
        .v_centerline()
        .iter()
        .enumerate()
        .map(|(i, &v)| (grid.coord(i), v))
        .collect();
    ensure_dir(&args.out)?;
    atomic_write(&args.out.join("profile_u.csv"), |w| {
        write_profile(&u_profile, w)
    })
    .map_err(|e| CliError::io("writing profile_u.csv", e))?;
    atomic_write(&args.out.join("profile_v.csv"), |w| {
        write_profile(&v_profile, w)
    })
    .map_err(|e| CliError::io("writing profile_v.csv", e))?;
    println!(
        "wrote centerline profiles ({} samples each) to {}",
        grid.n(),
        args.out.display()
    );
    Ok(0)
}
