//! The `ccx` command line: argument parsing, command drivers and exit codes.
//!
//! Exit codes: 0 all checks pass, 2 input error, 3 invariant violation
//! (a failed check or an infeasible certificate), 4 parameter error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::approx::{
    lower_approx_with, mixed_average_approx_with, set_valued_average, upper_approx_with,
    validation_threshold, weighted_average_approx_with, Exterior,
};
use crate::error::{CcxError, Result};
use crate::experiments::{
    self, error_bounds_hole, error_bounds_oracle_on, hausdorff_stability, lambda_ladder,
    lipschitz_on, HoleSetup, StabilitySetup,
};
use crate::fixtures::{self, Fixture};
use crate::geometry::MaskGeometry;
use crate::grid::{bound_a0, Bound, GridDomain, GridFunction, SampleMask, ScatteredSamples, TransformParams};
use crate::io;
use crate::moduli::{empirical_modulus, error_bound_c11, error_bound_lip, error_bound_uc, ModulusModel};
use crate::report::{Check, ParamRecord, PointwiseCheck, RunReport};
use crate::transforms::{lower_transform, mixed_transform, upper_transform, MixedKind};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INVARIANT: u8 = 3;
pub const EXIT_PARAMETER: u8 = 4;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "CCX_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ccx", version, about = "Compensated convex transforms and sample-set approximation")]
pub struct Cli {
    /// Seed for every random choice; reports embed it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Record wall times in the report summary.
    #[arg(long, global = true)]
    pub timings: bool,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lower, upper or mixed transform of a grid.
    Transform(TransformArgs),
    /// Approximant of data sampled on K.
    Interpolate(InterpolateArgs),
    /// Hausdorff stability of the transforms under dithered sample sets.
    Stability(StabilityArgs),
    /// Error bounds, convergence, maximum principle and regularity on a fixture.
    ReportBounds(ReportBoundsArgs),
    /// Empirical modulus of continuity of a grid.
    Modulus(ModulusArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Lower,
    Upper,
    /// `C^u_τ(C^l_λ f)`
    MixedUl,
    /// `C^l_τ(C^u_λ f)`
    MixedLu,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct TransformArgs {
    /// CCXGRID or PGM input.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub lambda: f64,
    /// Second parameter of the mixed kinds.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// CCXGRID output.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Approx {
    Lower,
    Upper,
    /// `s L + (1 − s) U`
    Average,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MChoice {
    Auto,
    Value(f64),
}

fn parse_m(s: &str) -> std::result::Result<MChoice, String> {
    if s == "auto" {
        return Ok(MChoice::Auto);
    }
    s.parse::<f64>()
        .map(MChoice::Value)
        .map_err(|_| format!("expected `auto` or a number, got `{s}`"))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExteriorChoice {
    /// Clipped when K holds the whole window edge, unsampled otherwise.
    Auto,
    Fixed(Exterior),
}

fn parse_exterior(s: &str) -> std::result::Result<ExteriorChoice, String> {
    match s {
        "auto" => Ok(ExteriorChoice::Auto),
        "unsampled" => Ok(ExteriorChoice::Fixed(Exterior::Unsampled)),
        "clipped" => Ok(ExteriorChoice::Fixed(Exterior::Clipped)),
        _ => match s.strip_prefix("sampled:") {
            Some(c) => c
                .parse::<f64>()
                .map(|c| ExteriorChoice::Fixed(Exterior::Sampled(c)))
                .map_err(|_| format!("bad exterior value in `{s}`")),
            None => Err(format!(
                "expected auto, unsampled, clipped or sampled:<c0>, got `{s}`"
            )),
        },
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct InterpolateArgs {
    /// Scattered samples, CSV rows `x1,...,xn,value`.
    #[arg(long, conflicts_with_all = ["grid", "mask"], required_unless_present = "grid")]
    pub samples: Option<PathBuf>,
    /// Grid of values; off-K values serve as ground truth for bound checks.
    #[arg(long, requires = "mask")]
    pub grid: Option<PathBuf>,
    /// Mask grid; nonzero nodes form K.
    #[arg(long, requires = "grid")]
    pub mask: Option<PathBuf>,
    /// Grid spacing for scattered samples.
    #[arg(long, default_value_t = 0.125)]
    pub h: f64,
    /// Window margin around the samples' bounding box.
    #[arg(long, default_value_t = 0.0)]
    pub margin: f64,
    #[arg(long)]
    pub lambda: f64,
    /// Extension constant, or `auto` for just above `2 A0 + λ d²`.
    #[arg(long = "M", alias = "m", value_parser = parse_m, default_value = "auto")]
    pub m: MChoice,
    /// Weight of L in `s L + (1 − s) U`.
    #[arg(long, default_value_t = 0.5)]
    pub s: f64,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, value_enum, default_value_t = Approx::Average)]
    pub approx: Approx,
    /// What lies beyond the window: auto, unsampled, clipped or sampled:<c0>.
    #[arg(long, value_parser = parse_exterior, default_value = "auto")]
    pub exterior: ExteriorChoice,
    /// Lipschitz constant of the data, for error-bound columns.
    #[arg(long)]
    pub lipschitz: Option<f64>,
    /// Lipschitz constant of the gradient, for error-bound columns.
    #[arg(long)]
    pub c11: Option<f64>,
    /// Modulus model CSV as written by `ccx modulus`.
    #[arg(long)]
    pub modulus: Option<PathBuf>,
    /// CSV of error-bound columns at the nodes of co[K].
    #[arg(long)]
    pub bounds_out: Option<PathBuf>,
    /// Output: `.csv` writes the nodes of co[K], `.pgm` an image, anything
    /// else a CCXGRID of the whole window.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct StabilityArgs {
    /// Base mask; by default each trial draws a random one on `[0, 1]²`.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Dither radius δ.
    #[arg(long, default_value_t = 3.0 / 32.0)]
    pub dither: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 4.0)]
    pub lambda: f64,
    /// Fixture with a positive lower bound: positive or one.
    #[arg(long = "f", alias = "fixture", default_value = "positive")]
    pub fixture: String,
    #[arg(long = "M", alias = "m", default_value_t = 1.0)]
    pub m: f64,
    /// Defaults to 10 λ.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Density of the random base masks.
    #[arg(long, default_value_t = 0.05)]
    pub density: f64,
    /// Spacing of the random base masks.
    #[arg(long, default_value_t = 1.0 / 32.0)]
    pub h: f64,
}

#[derive(Debug, Args)]
pub struct ReportBoundsArgs {
    /// Node set K; by default a random set on `[-1, 1]²`.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    #[arg(long, default_value = "lipschitz")]
    pub fixture: String,
    /// Comma-separated λ values.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64,128,256")]
    pub lambda_ladder: Vec<f64>,
    /// Spacing of the default node set.
    #[arg(long, default_value_t = 0.125)]
    pub h: f64,
    /// Spacing of the finite-M grid runs.
    #[arg(long, default_value_t = 1.0 / 32.0)]
    pub grid_h: f64,
    /// Oracle trials for the maximum principle.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct ModulusArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Random pairs used above the exhaustive size limit.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_pairs: usize,
    /// Model CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exit code for an error raised while running a command.
pub fn exit_code(e: &CcxError) -> u8 {
    match e {
        CcxError::Io(_)
        | CcxError::Parse(_)
        | CcxError::EmptyInput
        | CcxError::EmptyMask
        | CcxError::InvalidDomain(_)
        | CcxError::DomainMismatch
        | CcxError::NonFinite { .. } => EXIT_INPUT,
        CcxError::OutsideHull | CcxError::Infeasible => EXIT_INVARIANT,
        CcxError::InvalidParameter(_)
        | CcxError::BelowThreshold { .. }
        | CcxError::TooLarge(_)
        | CcxError::GridTooSmall(_) => EXIT_PARAMETER,
    }
}

/// Parses `args`, runs the command and returns the process exit code.
/// Messages go to standard error; the report goes to standard output or
/// the `--report` path.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_PASS,
                clap::error::ErrorKind::ValueValidation | clap::error::ErrorKind::InvalidValue => {
                    EXIT_PARAMETER
                }
                _ => EXIT_INPUT,
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return exit_code(&e);
    }
    let echo = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match run(&cli, echo) {
        Ok(report) => {
            let text = report.to_json_lines();
            let written = match &cli.report {
                Some(path) => io::write_atomic(path, text.as_bytes()),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return exit_code(&e);
            }
            if report.all_passed() {
                EXIT_PASS
            } else {
                for c in report.checks.iter().filter(|c| !c.pass) {
                    eprintln!(
                        "violation: {} observed {:e} bound {:e}{}",
                        c.name,
                        c.observed,
                        c.bound,
                        c.node.map(|n| format!(" at node {n}")).unwrap_or_default()
                    );
                }
                EXIT_INVARIANT
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CcxError::InvalidParameter(format!("{THREADS_ENV} = `{value}` is not a positive integer")))?;
    // A pool already built by an earlier call in this process is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn run(cli: &Cli, echo: Vec<String>) -> Result<RunReport> {
    let mut report = match &cli.command {
        Command::Transform(a) => cmd_transform(a, cli.seed, echo, cli.timings)?,
        Command::Interpolate(a) => cmd_interpolate(a, cli.seed, echo, cli.timings)?,
        Command::Stability(a) => cmd_stability(a, cli.seed, echo, cli.timings)?,
        Command::ReportBounds(a) => cmd_report_bounds(a, cli.seed, echo, cli.timings)?,
        Command::Modulus(a) => cmd_modulus(a, cli.seed, echo, cli.timings)?,
    };
    report.record_timings = cli.timings;
    Ok(report)
}

fn new_report(echo: Vec<String>, seed: u64, params: ParamRecord, timings: bool) -> RunReport {
    let mut r = RunReport::new(echo, seed, params);
    r.record_timings = timings;
    r
}

fn ensure_finite(name: &str, g: &GridFunction) -> Check {
    let bad = g.values().iter().filter(|v| !v.is_finite()).count();
    Check::scalar(name, bad as f64, 0.0).with_note(format!("{bad} non-finite values"))
}

fn pointwise_order(name: &str, below: &GridFunction, above: &GridFunction) -> Check {
    let mut p = PointwiseCheck::new(name);
    for (i, (&lo, &hi)) in below.values().iter().zip(above.values()).enumerate() {
        p.observe(i, &below.domain().coords_vec(i), lo - hi, 0.0, &[lo, hi]);
    }
    p.finish()
}

pub fn cmd_transform(a: &TransformArgs, seed: u64, echo: Vec<String>, timings: bool) -> Result<RunReport> {
    let f = io::read_grid(&a.input)?;
    let params = ParamRecord {
        lambda: Some(a.lambda),
        tau: a.tau,
        h: Some(f.domain().spacing().to_vec()),
        ..Default::default()
    };
    let mut report = new_report(echo, seed, params, timings);
    let tau = || {
        a.tau
            .ok_or_else(|| CcxError::InvalidParameter("mixed kinds need --tau".into()))
    };
    check_positive("lambda", a.lambda)?;
    if let Some(t) = a.tau {
        check_positive("tau", t)?;
    }
    let g = report.timed("transform", || -> Result<GridFunction> {
        match a.kind {
            Kind::Lower => lower_transform(&f, a.lambda),
            Kind::Upper => upper_transform(&f, a.lambda),
            Kind::MixedUl => mixed_transform(&f, a.lambda, tau()?, MixedKind::UpperOfLower),
            Kind::MixedLu => mixed_transform(&f, a.lambda, tau()?, MixedKind::LowerOfUpper),
        }
    })?;
    report.push(ensure_finite("finite_output", &g));
    match a.kind {
        Kind::Lower => report.push(pointwise_order("lower_below_input", &g, &f)),
        Kind::Upper => report.push(pointwise_order("upper_above_input", &f, &g)),
        Kind::MixedUl | Kind::MixedLu => {}
    }
    io::write_grid(&a.out, &g)?;
    Ok(report)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CcxError::InvalidParameter(format!("{name} must be > 0")))
    }
}

/// Window holding the samples' bounding box plus `margin`, at spacing h.
fn window_for(x: &ScatteredSamples, h: f64, margin: f64) -> Result<GridDomain> {
    check_positive("h", h)?;
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(CcxError::InvalidParameter("margin must be >= 0".into()));
    }
    let n = x.dim();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for (p, _) in x.iter() {
        for k in 0..n {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let origin: Vec<f64> = lo.iter().map(|l| l - margin).collect();
    let shape = (0..n)
        .map(|k| ((hi[k] + margin - origin[k]) / h - 1e-9).ceil().max(0.0) as usize + 1)
        .collect();
    GridDomain::new(shape, vec![h; n], origin)
}

/// Diagonal of the bounding box of the selected nodes; 0 for none.
fn bbox_diagonal(d: &GridDomain, nodes: impl Iterator<Item = usize>) -> f64 {
    let n = d.dim();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    let mut any = false;
    for i in nodes {
        any = true;
        let x = d.coords(i);
        for k in 0..n {
            lo[k] = lo[k].min(x[k]);
            hi[k] = hi[k].max(x[k]);
        }
    }
    if !any {
        return 0.0;
    }
    lo.iter().zip(&hi).map(|(l, h)| (h - l).powi(2)).sum::<f64>().sqrt()
}

/// True when every node on the window's edge is in K.
fn boundary_in_k(k: &SampleMask) -> bool {
    let d = k.domain();
    (0..d.len()).all(|i| {
        let m = d.multi_index(i);
        let on_edge = (0..d.dim()).any(|a| m[a] == 0 || m[a] + 1 == d.shape()[a]);
        !on_edge || k.contains(i)
    })
}

struct Data {
    /// Values for L (the lower reduction when multivalued).
    lo: GridFunction,
    /// Values for U.
    hi: GridFunction,
    k: SampleMask,
    samples: Option<ScatteredSamples>,
    /// Ground truth at every node, when the input is a grid.
    truth: Option<GridFunction>,
}

fn load_data(a: &InterpolateArgs) -> Result<Data> {
    if let Some(path) = &a.samples {
        let x = io::read_samples(path)?;
        let d = window_for(&x, a.h, a.margin)?;
        let (lo, hi, k) = crate::approx::snap_to_grid(&x, &d)?;
        return Ok(Data { lo, hi, k, samples: Some(x), truth: None });
    }
    let (Some(g), Some(m)) = (&a.grid, &a.mask) else {
        return Err(CcxError::EmptyInput);
    };
    let f = io::read_grid(g)?;
    let k = io::read_mask(m)?;
    if f.domain() != k.domain() {
        return Err(CcxError::DomainMismatch);
    }
    Ok(Data { lo: f.clone(), hi: f.clone(), k, samples: None, truth: Some(f) })
}

pub fn cmd_interpolate(a: &InterpolateArgs, seed: u64, echo: Vec<String>, timings: bool) -> Result<RunReport> {
    let data = load_data(a)?;
    let d = data.k.domain().clone();
    let exterior = match a.exterior {
        ExteriorChoice::Fixed(e) => e,
        ExteriorChoice::Auto if boundary_in_k(&data.k) => Exterior::Clipped,
        ExteriorChoice::Auto => Exterior::Unsampled,
    };
    let a0 = bound_a0(&data.lo, &data.k)?.max(bound_a0(&data.hi, &data.k)?);
    // Compact K uses its own extent, K = Ω^c the extent of the hole.
    let extent = match exterior {
        Exterior::Unsampled => bbox_diagonal(&d, data.k.indices().into_iter()),
        Exterior::Clipped | Exterior::Sampled(_) => {
            bbox_diagonal(&d, (0..d.len()).filter(|&i| !data.k.contains(i)))
        }
    };
    check_positive("lambda", a.lambda)?;
    let threshold = validation_threshold(a0, a.lambda, extent);
    let m = match a.m {
        MChoice::Auto => threshold + (1e-6 * threshold).max(1e-9),
        MChoice::Value(m) if m > threshold => m,
        MChoice::Value(m) => return Err(CcxError::BelowThreshold { m, threshold }),
    };
    let mut p = TransformParams::new(a.lambda, Bound::Finite(m))?.with_s(a.s)?;
    if let Some(t) = a.tau {
        p = p.with_tau(t)?;
    }
    let params = ParamRecord {
        lambda: Some(a.lambda),
        tau: a.tau,
        m: Some(m),
        s: Some(a.s),
        h: Some(d.spacing().to_vec()),
    };
    let mut report = new_report(echo, seed, params, timings);
    let multivalued = data.lo.values() != data.hi.values();
    let out = report.timed("approximate", || -> Result<GridFunction> {
        match a.approx {
            Approx::Lower => lower_approx_with(&data.lo, &data.k, &p, exterior),
            Approx::Upper => upper_approx_with(&data.hi, &data.k, &p, exterior),
            Approx::Average if multivalued => {
                let x = data.samples.as_ref().expect("multivalued data comes from samples");
                set_valued_average(x, &d, &p, exterior)
            }
            Approx::Average => weighted_average_approx_with(&data.lo, &data.k, &p, exterior),
            Approx::Mixed if multivalued => Err(CcxError::InvalidParameter(
                "multivalued samples support lower, upper and average only".into(),
            )),
            Approx::Mixed => mixed_average_approx_with(&data.lo, &data.k, &p, exterior),
        }
    })?;
    report.push(ensure_finite("finite_output", &out));
    report.push(
        Check::scalar("extension_threshold", threshold, m)
            .with_note(format!("M above 2 A0 + lambda d^2 with A0 = {a0}, d = {extent}, exterior {exterior:?}")),
    );

    let geo = MaskGeometry::new(data.k.clone());
    let hull: Vec<usize> = crate::approx::hull_restricted(&geo).collect();
    let wants_bounds = a.lipschitz.is_some() || a.c11.is_some() || a.modulus.is_some();
    if wants_bounds {
        let model = a.modulus.as_deref().map(read_modulus).transpose()?;
        let h = d.spacing().iter().copied().fold(0.0, f64::max);
        let lambda = a.lambda;
        let mut parts: Vec<(&str, BoundFn)> = Vec::new();
        if let Some(l) = a.lipschitz {
            parts.push(("lipschitz", Box::new(move |r| Ok(error_bound_lip(r, lambda, l)))));
        }
        if let Some(l) = a.c11 {
            parts.push(("c11", Box::new(move |r| error_bound_c11(r, lambda, l))));
        }
        if let Some(model) = model {
            parts.push(("uc", Box::new(move |r| Ok(error_bound_uc(r, lambda, &model)))));
        }
        let mut csv = String::new();
        let axes: Vec<String> = (0..d.dim()).map(|k| format!("x{k}")).collect();
        csv.push_str(&axes.join(","));
        csv.push_str(",value,r_c");
        for (name, _) in &parts {
            csv.push_str(&format!(",bound_{name}"));
        }
        csv.push('\n');
        let mut checks: Vec<PointwiseCheck> =
            parts.iter().map(|(n, _)| PointwiseCheck::new(format!("error_bound_{n}"))).collect();
        report.timed("bounds", || -> Result<()> {
            for &i in &hull {
                let x = d.coords_vec(i);
                let r_c = geo.convex_density_radius(i)?;
                let mut row: Vec<String> = x.iter().map(|c| format!("{c:?}")).collect();
                row.push(format!("{:?}", out.values()[i]));
                row.push(format!("{r_c:?}"));
                for (j, (_, bound)) in parts.iter().enumerate() {
                    // The lattice resolves r_c to one spacing.
                    let b = bound(r_c + h)?;
                    row.push(format!("{b:?}"));
                    if let Some(t) = &data.truth {
                        let err = (out.values()[i] - t.values()[i]).abs();
                        checks[j].observe(i, &x, err, b, &[out.values()[i], t.values()[i], r_c]);
                    }
                }
                csv.push_str(&row.join(","));
                csv.push('\n');
            }
            Ok(())
        })?;
        if data.truth.is_some() {
            for c in checks {
                report.push(c.finish());
            }
        }
        if let Some(path) = &a.bounds_out {
            io::write_atomic(path, csv.as_bytes())?;
        }
    }

    write_output(&a.out, &out, &hull)?;
    Ok(report)
}

/// Error bound as a function of the convex density radius.
type BoundFn = Box<dyn Fn(f64) -> Result<f64>>;

fn read_modulus(path: &Path) -> Result<ModulusModel> {
    ModulusModel::from_csv(&std::fs::read_to_string(path)?)
}

fn extension(path: &Path) -> String {
    path.extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default()
}

fn write_output(path: &Path, g: &GridFunction, hull: &[usize]) -> Result<()> {
    match extension(path).as_str() {
        "csv" => {
            let d = g.domain();
            let points = hull.iter().map(|&i| d.coords_vec(i)).collect();
            let values = hull.iter().map(|&i| g.values()[i]).collect();
            let x = ScatteredSamples::new(points, values)?;
            io::write_atomic(path, io::samples_to_csv(&x).as_bytes())
        }
        "pgm" => io::write_atomic(path, io::pgm_p2_to_string(g)?.as_bytes()),
        _ => io::write_grid(path, g),
    }
}

pub fn cmd_stability(a: &StabilityArgs, seed: u64, echo: Vec<String>, timings: bool) -> Result<RunReport> {
    let fixture = Fixture::parse(&a.fixture)?;
    let base = a.mask.as_deref().map(io::read_mask).transpose()?;
    let rho = match &base {
        Some(k) => max_norm(k.domain()),
        None => 2f64.sqrt(),
    };
    let tau = a.tau.unwrap_or(10.0 * a.lambda);
    check_positive("lambda", a.lambda)?;
    check_positive("tau", tau)?;
    if !(a.dither >= 0.0 && a.dither.is_finite()) {
        return Err(CcxError::InvalidParameter("dither must be >= 0".into()));
    }
    let setup = StabilitySetup {
        fixture: fixture.capped(rho.max(1.0)),
        lambda: a.lambda,
        h: a.h,
        density: a.density,
        delta: a.dither,
        trials: a.trials,
        seed,
        m: a.m,
        tau,
        base,
    };
    let params = ParamRecord {
        lambda: Some(a.lambda),
        tau: Some(tau),
        m: Some(a.m),
        s: None,
        h: Some(match &setup.base {
            Some(k) => k.domain().spacing().to_vec(),
            None => vec![a.h; 2],
        }),
    };
    let mut report = new_report(echo, seed, params, timings);
    let checks = report.timed("stability", || hausdorff_stability(&setup))?;
    for c in checks {
        report.push(c);
    }
    Ok(report)
}

/// Largest `|x|` over the window's corners.
fn max_norm(d: &GridDomain) -> f64 {
    (0..d.dim())
        .map(|k| {
            let lo = d.origin()[k];
            let hi = lo + d.spacing()[k] * (d.shape()[k] - 1) as f64;
            lo.abs().max(hi.abs()).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

pub fn cmd_report_bounds(a: &ReportBoundsArgs, seed: u64, echo: Vec<String>, timings: bool) -> Result<RunReport> {
    let fixture = Fixture::parse(&a.fixture)?;
    if a.lambda_ladder.is_empty() {
        return Err(CcxError::InvalidParameter("empty lambda ladder".into()));
    }
    for &l in &a.lambda_ladder {
        check_positive("lambda", l)?;
    }
    let k = match &a.samples {
        Some(path) => io::read_mask(path)?,
        None => {
            let mut rng = fixtures::rng(seed);
            let d = GridDomain::cube(2, -1.0, 1.0, a.h)?;
            loop {
                let k = fixtures::random_mask(&d, 0.15, &mut rng);
                if k.count() >= 3 {
                    break k;
                }
            }
        }
    };
    let c = fixture.capped(max_norm(k.domain()).max(1.0));
    let f = c.grid(k.domain())?;
    let params = ParamRecord {
        h: Some(k.domain().spacing().to_vec()),
        ..Default::default()
    };
    let mut report = new_report(echo, seed, params, timings);
    let ladder = a.lambda_ladder.clone();
    let m = 2.0 * c.a0() + 1e-3;

    let checks = report.timed("oracle_bounds", || -> Result<Vec<Check>> {
        let mut out = Vec::new();
        for &lambda in &ladder {
            out.extend(error_bounds_oracle_on(&c, &k, lambda)?);
        }
        Ok(out)
    })?;
    checks.into_iter().for_each(|c| report.push(c));

    let checks = report.timed("grid_bounds", || -> Result<Vec<Check>> {
        let s = HoleSetup {
            fixture,
            rho: 1.0,
            hole: 0.25,
            check_radius: 0.5,
            h: a.grid_h,
        };
        let mut out = Vec::new();
        for &lambda in &ladder {
            out.extend(error_bounds_hole(&s, lambda)?);
        }
        Ok(out)
    })?;
    checks.into_iter().for_each(|c| report.push(c));

    let checks = report.timed("ladder", || lambda_ladder(&f, &k, m, &ladder))?;
    checks.into_iter().for_each(|c| report.push(c));
    if ladder.len() >= 2 {
        let first = ladder[0];
        let last = ladder[ladder.len() - 1];
        let checks = report.timed("convergence", || {
            experiments::convergence(fixture, seed, a.grid_h, (first, last))
        })?;
        checks.into_iter().for_each(|c| report.push(c));
    }

    let check = report.timed("max_principle", || experiments::max_principle(seed, a.trials))?;
    report.push(check);

    let checks = report.timed("lipschitz", || -> Result<Vec<Check>> {
        let mut out = Vec::new();
        for &lambda in &ladder {
            out.extend(lipschitz_on(&f, &k, m, lambda)?);
        }
        Ok(out)
    })?;
    checks.into_iter().for_each(|c| report.push(c));
    Ok(report)
}

pub fn cmd_modulus(a: &ModulusArgs, seed: u64, echo: Vec<String>, timings: bool) -> Result<RunReport> {
    let f = io::read_grid(&a.input)?;
    let params = ParamRecord {
        h: Some(f.domain().spacing().to_vec()),
        ..Default::default()
    };
    let mut report = new_report(echo, seed, params, timings);
    let model = report.timed("modulus", || empirical_modulus(&f, a.max_pairs, seed))?;
    let mut majorant = PointwiseCheck::new("concave_majorant");
    let mut affine = PointwiseCheck::new("affine_majorant");
    for (j, ((&t, &w), &cav)) in model.knots.iter().zip(&model.omega_f).zip(&model.omega_cav).enumerate() {
        majorant.observe(j, &[t], w, cav, &[w, cav]);
        let tol = 1e-12 * (1.0 + cav);
        affine.observe(j, &[t], cav, model.a * t + model.b + tol, &[cav, model.a, model.b]);
    }
    report.push(majorant.finish());
    report.push(affine.finish());
    if let Some(path) = &a.out {
        io::write_atomic(path, model.to_csv().as_bytes())?;
    }
    Ok(report)
}
