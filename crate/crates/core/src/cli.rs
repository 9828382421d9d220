//! The `malus` command line.
//!
//! Every subcommand builds one [`Report`], writes it to stdout or `--output`,
//! and maps the outcome to an exit status: 0 on success, 2 for invalid
//! configuration and 1 when the numerics fail (a non-finite value, an error
//! estimate above `--tolerance`, or an integrator leaving its domain).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, TAU};
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::classical_limit::{self, PhaseSpaceFunction};
use crate::error::MalusError;
use crate::malus::{self, ChshSettings, DETECTOR_CONVENTION};
use crate::path_integral::{self, PathSpec};
use crate::quasi_dist::QuasiDistribution;
use crate::report::{Cell, Format, Report};
use crate::sphere::{build_grid, Direction, QuadratureGrid};
use crate::spin_states::{projector, singlet_projector, DensityMatrix, SpinQuantumNumber, SpinState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "malus",
    version,
    about = "Classical and quantum Malus-law experiments on the Bloch sphere"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Twice the spin quantum number (1 for spin-1/2).
    #[arg(long, default_value_t = 1)]
    pub twice_s: u32,
    /// Gauss-Legendre nodes in cos(theta) [default: max(2*twice_s + 1, 8)].
    #[arg(long)]
    pub n_theta: Option<usize>,
    /// Uniform azimuthal nodes [default: max(2*twice_s + 1, 8)].
    #[arg(long)]
    pub n_phi: Option<usize>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Largest acceptable error estimate before exiting with status 1.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

impl Common {
    fn spin(&self) -> Result<SpinQuantumNumber, Failure> {
        Ok(SpinQuantumNumber::from_twice(self.twice_s)?)
    }

    fn grid(&self) -> Result<QuadratureGrid, Failure> {
        let default = (2 * self.twice_s as usize + 1).max(8);
        Ok(build_grid(
            self.n_theta.unwrap_or(default),
            self.n_phi.unwrap_or(default),
        )?)
    }

    fn tolerance_or(&self, default: f64) -> Result<f64, Failure> {
        let t = self.tolerance.unwrap_or(default);
        if t.is_nan() || t < 0.0 {
            return Err(Failure::Config(format!("tolerance must be nonnegative (got {t})")));
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Oracle {
    Quantum,
    Distribution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HamiltonianName {
    Precession,
    Transverse,
    Zero,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Malus transmission averaged over a one-party distribution, one row per detector.
    Malus {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "uniform")]
        distribution: String,
        /// Detector directions as theta,phi in radians.
        #[arg(long, num_args = 1.., value_parser = parse_direction, required = true)]
        settings: Vec<Direction>,
    },
    /// Joint (+,+) detection probability for a two-party distribution, one row per (a, b) pair.
    Joint {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "pro2")]
        distribution: String,
        /// Detector pairs a b [a b ...] as theta,phi in radians.
        #[arg(long, num_args = 2.., value_parser = parse_direction, required = true)]
        settings: Vec<Direction>,
    },
    /// CHSH combination of correlators.
    Chsh {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Oracle::Quantum)]
        oracle: Oracle,
        #[arg(long, default_value = "pro2")]
        distribution: String,
        /// Use coplanar settings at 0, pi/2 (a, a') and pi/4, 3pi/4 (b, b').
        #[arg(long, conflicts_with = "settings")]
        standard_settings: bool,
        /// a a' b b' as theta,phi in radians.
        #[arg(long, num_args = 4, value_parser = parse_direction)]
        settings: Vec<Direction>,
    },
    /// Density matrix rebuilt from a distribution, one row per entry.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "p-plus")]
        distribution: String,
    },
    /// Minimum of the smooth part of a distribution.
    Negativity {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "p-plus")]
        distribution: String,
    },
    /// Coherent-state amplitude composed through repeated resolutions of the identity.
    Pathint {
        #[command(flatten)]
        common: Common,
        /// Start and end directions as theta,phi in radians.
        #[arg(long, num_args = 2, value_parser = parse_direction, required = true)]
        settings: Vec<Direction>,
        #[arg(long, default_value_t = 1)]
        insertions: usize,
        /// Also sweep the sliced phase along the straight (theta, phi) path start -> end.
        #[arg(long, num_args = 1..)]
        sweep: Vec<usize>,
    },
    /// Sliced amplitude around a closed latitude loop.
    LoopPhase {
        #[command(flatten)]
        common: Common,
        /// Polar angle of the loop.
        #[arg(long, default_value_t = FRAC_PI_2)]
        theta: f64,
        #[arg(long, num_args = 1.., default_values_t = [10usize, 100, 1000, 10000])]
        steps: Vec<usize>,
    },
    /// Angular width of the spin-s transmission function against s.
    WidthScaling {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.5)]
        level: f64,
        /// Values of twice_s to sweep.
        #[arg(long, num_args = 2.., default_values_t = [20u32, 40, 80, 160, 320, 640])]
        spins: Vec<u32>,
    },
    /// Classical trajectory on the sphere, one row per sample.
    Dynamics {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = HamiltonianName::Precession)]
        hamiltonian: HamiltonianName,
        #[arg(long, default_value_t = 1.0)]
        omega0: f64,
        #[arg(long, default_value_t = TAU)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Keep every n-th sample (the final sample is always kept).
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// Initial direction as theta,phi in radians [default: pi/3,0].
        #[arg(long, num_args = 1, value_parser = parse_direction)]
        settings: Vec<Direction>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Malus { common, .. }
            | Command::Joint { common, .. }
            | Command::Chsh { common, .. }
            | Command::Reconstruct { common, .. }
            | Command::Negativity { common, .. }
            | Command::Pathint { common, .. }
            | Command::LoopPhase { common, .. }
            | Command::WidthScaling { common, .. }
            | Command::Dynamics { common, .. } => common,
        }
    }
}

/// Parses `theta,phi` in radians.
pub fn parse_direction(s: &str) -> Result<Direction, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected theta,phi but got `{s}`"));
    }
    let num = |p: &str| p.parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
    Direction::new(num(parts[0])?, num(parts[1])?).map_err(|e| e.to_string())
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Numerical(String),
}

impl From<MalusError> for Failure {
    fn from(e: MalusError) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

/// A finished report plus any tolerance violations found while building it.
struct Outcome {
    report: Report,
    violations: Vec<String>,
}

impl Outcome {
    fn new(report: Report) -> Self {
        Self {
            report,
            violations: Vec::new(),
        }
    }

    fn check(&mut self, what: &str, error: f64, tolerance: f64) {
        if error.is_nan() || error > tolerance {
            self.violations
                .push(format!("{what}: {error:e} exceeds tolerance {tolerance:e}"));
        }
    }
}

/// Parses `args` (including the program name), runs the experiment and writes
/// the report to `out` unless `--output` is given. Diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_CONFIG
                }
            };
        }
    };
    run_command(&cli.command, out, err)
}

pub fn run_command(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let common = command.common();
    let outcome = match execute(command) {
        Ok(o) => o,
        Err(Failure::Config(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_CONFIG;
        }
        Err(Failure::Numerical(msg)) => {
            let _ = writeln!(err, "numerical failure: {msg}");
            return EXIT_NUMERICAL;
        }
    };
    let text = outcome.report.render(common.format.into());
    let written = match &common.output {
        Some(path) => std::fs::write(path, text.as_bytes()).map_err(|e| format!("{}: {e}", path.display())),
        None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        let _ = writeln!(err, "error: cannot write report: {msg}");
        return EXIT_CONFIG;
    }
    if let Some(field) = outcome.report.first_non_finite() {
        let _ = writeln!(err, "numerical failure: non-finite value in `{field}`");
        return EXIT_NUMERICAL;
    }
    if !outcome.violations.is_empty() {
        for v in &outcome.violations {
            let _ = writeln!(err, "numerical failure: {v}");
        }
        return EXIT_NUMERICAL;
    }
    EXIT_OK
}

fn execute(command: &Command) -> Result<Outcome, Failure> {
    match command {
        Command::Malus {
            common,
            distribution,
            settings,
        } => run_malus(common, distribution, settings),
        Command::Joint {
            common,
            distribution,
            settings,
        } => run_joint(common, distribution, settings),
        Command::Chsh {
            common,
            oracle,
            distribution,
            standard_settings,
            settings,
        } => run_chsh(common, *oracle, distribution, *standard_settings, settings),
        Command::Reconstruct { common, distribution } => run_reconstruct(common, distribution),
        Command::Negativity { common, distribution } => run_negativity(common, distribution),
        Command::Pathint {
            common,
            settings,
            insertions,
            sweep,
        } => run_pathint(common, settings, *insertions, sweep),
        Command::LoopPhase { common, theta, steps } => run_loop_phase(common, *theta, steps),
        Command::WidthScaling { common, level, spins } => run_width_scaling(common, *level, spins),
        Command::Dynamics {
            common,
            hamiltonian,
            omega0,
            t_end,
            step,
            stride,
            settings,
        } => run_dynamics(common, *hamiltonian, *omega0, *t_end, *step, *stride, settings),
    }
}

fn distribution_with_parties(name: &str, parties: usize) -> Result<QuasiDistribution, Failure> {
    let p = QuasiDistribution::by_name(name)?;
    if p.parties() != parties {
        return Err(Failure::Config(format!(
            "distribution `{name}` has {} part{}; this experiment needs {parties}",
            p.parties(),
            if p.parties() == 1 { "y" } else { "ies" }
        )));
    }
    Ok(p)
}

fn grid_label(shape: (usize, usize)) -> String {
    format!("{}x{}", shape.0, shape.1)
}

fn base_report(experiment: &str, columns: &[&str], grid: Option<&QuadratureGrid>, tolerance: Option<f64>) -> Report {
    let mut r = Report::new(experiment, columns);
    if let Some(g) = grid {
        r.set_meta("grid", grid_label(g.shape()));
    }
    match tolerance {
        Some(t) => r.set_meta("tolerance", t),
        None => r.set_meta("tolerance", "none"),
    }
    r
}

fn run_malus(common: &Common, name: &str, settings: &[Direction]) -> Result<Outcome, Failure> {
    let s = common.spin()?;
    let grid = common.grid()?;
    let tol = common.tolerance_or(1e-8)?;
    let p = distribution_with_parties(name, 1)?;
    let classical = !p.negativity_scan(&grid).is_negative();
    let mut columns = vec!["theta", "phi", "value", "trace_value", "estimated_error"];
    if classical {
        columns.extend(["classical_value", "classical_estimated_error"]);
    }
    let mut report = base_report("malus", &columns, Some(&grid), Some(tol));
    report.set_meta("distribution", name);
    report.set_meta("s", s.to_string());
    report.set_meta("convention", DETECTOR_CONVENTION);
    let mut outcome = Outcome::new(report);
    for a in settings {
        let q = malus::quantum_malus_average(&p, s, a, &grid)?;
        let trace = malus::quantum_malus_trace(&p, s, a, &grid)?;
        outcome.check("quantum average refinement", q.estimated_error, tol);
        outcome.check("quantum average vs trace", (q.value - trace).abs(), tol);
        let mut row: Vec<Cell> = vec![
            a.theta().into(),
            a.phi().into(),
            q.value.into(),
            trace.into(),
            q.estimated_error.into(),
        ];
        if classical {
            let c = malus::classical_malus(&p, a, &grid)?;
            outcome.check("classical average refinement", c.estimated_error, tol);
            row.extend([c.value.into(), c.estimated_error.into()]);
        }
        outcome.report.push_row(row);
    }
    Ok(outcome)
}

fn run_joint(common: &Common, name: &str, settings: &[Direction]) -> Result<Outcome, Failure> {
    if !settings.len().is_multiple_of(2) {
        return Err(Failure::Config(format!(
            "joint takes detector pairs; got {} directions",
            settings.len()
        )));
    }
    let grid = common.grid()?;
    let tol = common.tolerance_or(1e-8)?;
    let p = distribution_with_parties(name, 2)?;
    let columns = [
        "a_theta",
        "a_phi",
        "b_theta",
        "b_phi",
        "value",
        "trace_value",
        "quantum_oracle",
        "estimated_error",
        "paper_claim",
        "paper_discrepancy",
    ];
    let mut report = base_report("joint", &columns, Some(&grid), Some(tol));
    report.set_meta("distribution", name);
    report.set_meta("convention", DETECTOR_CONVENTION);
    report.set_meta("paper_claim_formula", "(1 - a.b)/2");
    let mut outcome = Outcome::new(report);
    for pair in settings.chunks(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let r = malus::joint_probability(&p, a, b, &grid)?;
        let trace = malus::joint_probability_trace(&p, a, b, &grid)?;
        let claim = malus::printed_singlet_claim(a, b);
        outcome.check("joint probability refinement", r.estimated_error, tol);
        outcome.check("joint probability vs trace", (r.value - trace).abs(), tol);
        outcome.report.push_row(vec![
            a.theta().into(),
            a.phi().into(),
            b.theta().into(),
            b.phi().into(),
            r.value.into(),
            trace.into(),
            malus::quantum_joint_oracle(a, b).into(),
            r.estimated_error.into(),
            claim.into(),
            (r.value - claim).into(),
        ]);
    }
    Ok(outcome)
}

fn run_chsh(
    common: &Common,
    oracle: Oracle,
    name: &str,
    standard: bool,
    settings: &[Direction],
) -> Result<Outcome, Failure> {
    let tol = common.tolerance_or(1e-8)?;
    let chosen = if standard || settings.is_empty() {
        ChshSettings::standard()
    } else {
        ChshSettings {
            a: settings[0],
            a_prime: settings[1],
            b: settings[2],
            b_prime: settings[3],
        }
    };
    let pairs = [
        ("E(a,b)", chosen.a, chosen.b),
        ("E(a,b')", chosen.a, chosen.b_prime),
        ("E(a',b)", chosen.a_prime, chosen.b),
        ("E(a',b')", chosen.a_prime, chosen.b_prime),
    ];
    let columns = ["quantity", "value", "estimated_error"];
    let (values, errors, grid) = match oracle {
        Oracle::Quantum => {
            let joint = |a: &Direction, b: &Direction| malus::quantum_joint_oracle(a, b);
            let e: Vec<f64> = pairs.iter().map(|(_, a, b)| malus::correlator(&joint, a, b)).collect();
            let s = malus::chsh_value(joint, &chosen);
            (e.into_iter().chain([s]).collect::<Vec<_>>(), vec![0.0; 5], None)
        }
        Oracle::Distribution => {
            let grid = common.grid()?;
            let p = distribution_with_parties(name, 2)?;
            let evaluate = |g: &QuadratureGrid| -> Result<Vec<f64>, Failure> {
                // Surface the first integration error instead of a NaN.
                let failed = std::cell::RefCell::new(None);
                let joint = |a: &Direction, b: &Direction| match malus::joint_probability(&p, a, b, g) {
                    Ok(r) => r.value,
                    Err(e) => {
                        failed.borrow_mut().get_or_insert(e);
                        f64::NAN
                    }
                };
                let mut v: Vec<f64> = pairs.iter().map(|(_, a, b)| malus::correlator(&joint, a, b)).collect();
                v.push(malus::chsh_value(joint, &chosen));
                match failed.into_inner() {
                    Some(e) => Err(e.into()),
                    None => Ok(v),
                }
            };
            let coarse = evaluate(&grid)?;
            let fine = evaluate(&grid.refined())?;
            let errors = coarse.iter().zip(&fine).map(|(c, f)| (c - f).abs()).collect();
            (coarse, errors, Some(grid))
        }
    };
    let mut report = base_report("chsh", &columns, grid.as_ref(), Some(tol));
    report.set_meta(
        "oracle",
        if oracle == Oracle::Quantum {
            "quantum"
        } else {
            "distribution"
        },
    );
    if oracle == Oracle::Distribution {
        report.set_meta("distribution", name);
    }
    report.set_meta("local_bound", 2.0);
    report.set_meta("quantum_bound", 2.0 * 2f64.sqrt());
    let mut outcome = Outcome::new(report);
    let labels = pairs.iter().map(|(l, _, _)| *l).chain(["S"]);
    for ((label, v), e) in labels.zip(&values).zip(&errors) {
        outcome.check(label, *e, tol);
        outcome.report.push_row(vec![label.into(), (*v).into(), (*e).into()]);
    }
    Ok(outcome)
}

/// The state a built-in distribution is meant to represent, where the
/// dimension makes that unambiguous.
fn reference_state(name: &str, s: SpinQuantumNumber) -> Option<(&'static str, DensityMatrix)> {
    let d = s.dim();
    match name {
        "uniform" => Some(("maximally mixed", DensityMatrix::maximally_mixed(vec![d]))),
        "p-plus" if d == 2 => Some(("|+><+|", projector(&SpinState::basis(s, 1)))),
        "p-minus" if d == 2 => Some(("|-><-|", projector(&SpinState::basis(s, 0)))),
        "pro1" | "pro1-flipped" | "pro2" => Some(("singlet", singlet_projector())),
        _ => None,
    }
}

fn run_reconstruct(common: &Common, name: &str) -> Result<Outcome, Failure> {
    let p = QuasiDistribution::by_name(name)?;
    let grid = common.grid()?;
    let tol = common.tolerance_or(1e-8)?;
    let spins = if p.parties() == 2 {
        vec![SpinQuantumNumber::half(); 2]
    } else {
        vec![common.spin()?]
    };
    let rho = p.reconstruct_density(&spins, &grid)?;
    let refined = p.reconstruct_density(&spins, &grid.refined())?;
    let estimated_error = rho.max_entry_distance(&refined)?;
    let mut report = base_report("reconstruct", &["row", "col", "re", "im"], Some(&grid), Some(tol));
    report.set_meta("distribution", name);
    report.set_meta(
        "dims",
        rho.dims().iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x"),
    );
    report.set_meta("estimated_error", estimated_error);
    report.set_meta("hermiticity_defect", rho.hermiticity_defect());
    report.set_meta("trace_defect", rho.trace_defect());
    report.set_meta("min_eigenvalue", rho.min_eigenvalue());
    report.set_meta("physical", rho.is_physical(1e-10));
    if let Some((label, reference)) = reference_state(name, spins[0]) {
        report.set_meta("reference", label);
        report.set_meta("reference_distance", rho.max_entry_distance(&reference)?);
        report.set_meta("fidelity", rho.fidelity(&reference)?);
        if matches!(name, "pro1" | "pro2") {
            report.set_meta("paper_claim", "singlet");
        }
    }
    let mut outcome = Outcome::new(report);
    outcome.check("reconstruction refinement", estimated_error, tol);
    let m = rho.entries();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            outcome
                .report
                .push_row(vec![i.into(), j.into(), z.re.into(), z.im.into()]);
        }
    }
    Ok(outcome)
}

fn run_negativity(common: &Common, name: &str) -> Result<Outcome, Failure> {
    let p = QuasiDistribution::by_name(name)?;
    let grid = common.grid()?;
    let tol = common.tolerance_or(1e-8)?;
    let scan = p.negativity_scan(&grid);
    let columns = ["party", "theta", "phi"];
    let mut report = base_report("negativity", &columns, Some(&grid), Some(tol));
    report.set_meta("distribution", name);
    report.set_meta("min_value", scan.min_value);
    report.set_meta("delta_weight", scan.delta_weight);
    report.set_meta("negative", scan.is_negative());
    report.set_meta("normalization", p.normalization(&grid)?);
    let mut outcome = Outcome::new(report);
    for (i, d) in scan.argmin.iter().enumerate() {
        outcome
            .report
            .push_row(vec![i.into(), d.theta().into(), d.phi().into()]);
    }
    Ok(outcome)
}

fn run_pathint(
    common: &Common,
    settings: &[Direction],
    insertions: usize,
    sweep: &[usize],
) -> Result<Outcome, Failure> {
    let s = common.spin()?;
    let grid = common.grid()?;
    let tol = common.tolerance_or(1e-10)?;
    let (start, end) = (settings[0], settings[1]);
    let c = path_integral::compose_amplitude(s, &start, &end, insertions, &grid);
    let complex = |report: &mut Report, key: &str, z: Complex64| {
        report.set_meta(&format!("{key}_re"), z.re);
        report.set_meta(&format!("{key}_im"), z.im);
    };
    let mut report = base_report(
        "pathint",
        &["N", "action", "exact_phase", "gap"],
        Some(&grid),
        Some(tol),
    );
    report.set_meta("s", s.to_string());
    report.set_meta("start", start.to_string());
    report.set_meta("end", end.to_string());
    report.set_meta("K", c.insertions);
    complex(&mut report, "exact", c.exact_amplitude);
    complex(&mut report, "composed", c.composed_amplitude);
    report.set_meta("abs_error", c.abs_error);
    let mut outcome = Outcome::new(report);
    outcome.check("composition", c.abs_error, tol);
    if !sweep.is_empty() {
        let dphi = path_integral::principal_branch(end.phi() - start.phi());
        let build = |n| PathSpec::spiral(s, start.theta(), end.theta(), start.phi(), dphi, n);
        let rows = path_integral::refinement_sweep(build, sweep)?;
        for r in &rows {
            outcome.report.push_row(vec![
                r.steps.into(),
                r.action.into(),
                r.exact_phase.into(),
                r.gap.into(),
            ]);
        }
        let usable: Vec<_> = rows.iter().filter(|r| r.gap != 0.0).collect();
        if usable.len() >= 2 {
            let xs: Vec<f64> = usable.iter().map(|r| r.steps as f64).collect();
            let ys: Vec<f64> = usable.iter().map(|r| r.gap.abs()).collect();
            outcome
                .report
                .set_meta("gap_slope", crate::linalg::log_log_slope(&xs, &ys));
        }
    }
    Ok(outcome)
}

fn run_loop_phase(common: &Common, theta: f64, steps: &[usize]) -> Result<Outcome, Failure> {
    let s = common.spin()?;
    Direction::new(theta, 0.0)?;
    if steps.iter().any(|&n| n < 2) {
        return Err(Failure::Config("loop-phase needs at least 2 steps per loop".into()));
    }
    let columns = [
        "N",
        "amplitude_re",
        "amplitude_im",
        "exact_phase",
        "action",
        "gap",
        "claim_distance",
    ];
    let gamma = path_integral::geometric_phase(s, theta);
    let claim = Complex64::from_polar(1.0, gamma);
    let mut report = base_report("loop-phase", &columns, None, common.tolerance);
    report.set_meta("s", s.to_string());
    report.set_meta("theta", theta);
    report.set_meta("geometric_phase", gamma);
    report.set_meta("paper_claim_re", claim.re);
    report.set_meta("paper_claim_im", claim.im);
    let rows = path_integral::refinement_sweep(|n| PathSpec::closed_loop(s, theta, n), steps)?;
    let mut outcome = Outcome::new(report);
    let mut last = None;
    for r in &rows {
        let distance = (r.amplitude - claim).norm();
        outcome.report.push_row(vec![
            r.steps.into(),
            r.amplitude.re.into(),
            r.amplitude.im.into(),
            r.exact_phase.into(),
            r.action.into(),
            r.gap.into(),
            distance.into(),
        ]);
        last = Some(distance);
    }
    if let (Some(tol), Some(d)) = (common.tolerance, last) {
        outcome.check("finest loop amplitude vs claim", d, tol);
    }
    Ok(outcome)
}

fn run_width_scaling(common: &Common, level: f64, spins: &[u32]) -> Result<Outcome, Failure> {
    let spins = spins
        .iter()
        .map(|&t| SpinQuantumNumber::from_twice(t))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = classical_limit::width_sweep(&spins, level)?;
    let slope = classical_limit::width_scaling_slope(&rows);
    let mut report = base_report("width-scaling", &["s", "width", "level"], None, common.tolerance);
    report.set_meta("slope", slope);
    report.set_meta("paper_claim", -0.5);
    report.set_meta("paper_discrepancy", slope + 0.5);
    let mut outcome = Outcome::new(report);
    if let Some(tol) = common.tolerance {
        outcome.check("width slope vs -1/2", (slope + 0.5).abs(), tol);
    }
    for r in &rows {
        outcome
            .report
            .push_row(vec![r.s.s().into(), r.width.into(), r.level.into()]);
    }
    Ok(outcome)
}

fn run_dynamics(
    common: &Common,
    hamiltonian: HamiltonianName,
    omega0: f64,
    t_end: f64,
    step: f64,
    stride: usize,
    settings: &[Direction],
) -> Result<Outcome, Failure> {
    let s = common.spin()?;
    if stride == 0 || !omega0.is_finite() {
        return Err(Failure::Config("stride must be positive and omega0 finite".into()));
    }
    let h = match hamiltonian {
        HamiltonianName::Precession => PhaseSpaceFunction::precession(omega0, s),
        HamiltonianName::Transverse => PhaseSpaceFunction::transverse_field(omega0, s),
        HamiltonianName::Zero => PhaseSpaceFunction::zero(),
    };
    let initial = settings.first().copied().unwrap_or(Direction::new(FRAC_PI_3, 0.0)?);
    let tr = classical_limit::integrate_motion(&h, &initial, s, t_end, step)?;
    let mut report = base_report("dynamics", &["t", "theta", "phi", "energy"], None, common.tolerance);
    report.set_meta("hamiltonian", h.name());
    report.set_meta("s", s.to_string());
    report.set_meta("omega0", omega0);
    report.set_meta("step", step);
    report.set_meta("energy_drift", tr.energy_drift());
    report.set_meta("finite_difference", tr.finite_difference);
    if hamiltonian == HamiltonianName::Precession {
        let expected = initial.phi() - omega0 * tr.last().t;
        let max_err = tr
            .samples
            .iter()
            .map(|x| (x.phi - (initial.phi() - omega0 * x.t)).abs())
            .fold(0.0, f64::max);
        report.set_meta("expected_final_phi", expected);
        report.set_meta("max_phase_error", max_err);
    }
    let mut outcome = Outcome::new(report);
    if let Some(tol) = common.tolerance {
        outcome.check("energy drift", tr.energy_drift(), tol);
    }
    let n = tr.samples.len();
    for (i, x) in tr.samples.iter().enumerate() {
        if i % stride == 0 || i + 1 == n {
            outcome
                .report
                .push_row(vec![x.t.into(), x.theta.into(), x.phi.into(), x.energy.into()]);
        }
    }
    Ok(outcome)
}
