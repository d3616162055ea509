//! `summa`: batch front end for formal solutions, Borel-plane scans and k-summation.
//!
//! Exit codes: 0 success, 2 validation error, 3 failed mathematical
//! precondition (resonance, singular direction), 4 numerical failure.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

use summa::borel_plane::{borel_coefficients, singular_scan, SingularData};
use summa::coeff::parse_rat;
use summa::equation::{check_conditions, newton_polygon, parse_spec, ConditionReport, EquationSpec, NewtonPolygon};
use summa::nagumo::{
    m0_constant, nagumo_norm_estimate, verify_inequalities, NagumoParams, NormEstimate, SectorSpec, Suite, SuiteReport,
};
use summa::report::{grid_csv, to_json, write_artifact};
use summa::resum::{borel_sum_solution, Route, SumOptions};
use summa::series::parse_polynomial;
use summa::solver::{solve_formal, FormalSolution};
use summa::{Coeff, Error, Result, TruncatedSeries};

type C64 = Complex64;

#[derive(Parser)]
#[command(name = "summa", version, about = "Formal solutions and k-summation of singular first-order PDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Truncated formal solution of an equation spec.
    Solve(SpecArgs),
    /// Singular points `ξₙ = (n − b)/c` and singular directions.
    Directions(DirectionsArgs),
    /// Borel images `ũₙ(ξ)` of the formal solution.
    Borel(SpecArgs),
    /// Directional k-sum on a grid with PDE residuals.
    Sum(SumArgs),
    /// Nagumo norm of a polynomial in `xi` on a sector.
    Norms(NormsArgs),
    /// Randomized checks of the Nagumo-norm inequalities.
    Verify(VerifyArgs),
    /// Newton polygon of a linearized differential operator.
    Newton(NewtonArgs),
}

#[derive(Args)]
struct Output {
    /// Write the JSON artifact here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Args)]
struct SpecArgs {
    /// Equation spec (JSON).
    input: PathBuf,
    /// Override the truncation `N_t,N_x`.
    #[arg(long, value_parser = parse_pair)]
    trunc: Option<(usize, usize)>,
    /// Override the level `k`.
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Accept `b(0) ∈ N*`; the solver then stops at the resonant order.
    #[arg(long)]
    allow_resonance: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct DirectionsArgs {
    /// `b(0)` as `p/q`, or `re,im` for a complex value.
    #[arg(long, allow_hyphen_values = true)]
    b: String,
    /// `c(0)` as `p/q`, or `re,im` for a complex value.
    #[arg(long, allow_hyphen_values = true)]
    c: String,
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Number of singular points listed.
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Standard,
    Conical,
}

#[derive(Args)]
struct SumArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Summation direction in radians.
    #[arg(long, allow_hyphen_values = true)]
    d: f64,
    #[arg(long, value_enum, default_value = "standard")]
    route: RouteArg,
    /// JSON list of `[t, x]` points, each a number or `[re, im]`.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Padé degrees `L,M` for every slice.
    #[arg(long, value_parser = parse_pair)]
    pade: Option<(usize, usize)>,
    /// Cone radius `R` of `|t| < R|x|` on the conical route.
    #[arg(long, default_value_t = 0.25)]
    cone_radius: f64,
    /// Largest acceptable estimate of the truncated t-tail.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Compare ũ₁ with the Volterra solution on `[0, 1]e^{id}`.
    #[arg(long)]
    cross_check: bool,
    /// Also write the grid samples as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SectorArg {
    Pure,
    Disc,
    Ramified,
}

#[derive(Args)]
struct NormsArgs {
    /// Polynomial in `xi`, e.g. `1+xi^2`.
    #[arg(long)]
    f: String,
    #[arg(long, value_enum, default_value = "pure")]
    sector: SectorArg,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    d: f64,
    #[arg(long, default_value_t = PI / 4.0)]
    theta: f64,
    /// Disc radius `R`.
    #[arg(long, default_value_t = 0.0)]
    radius: f64,
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// `|μ|`; the phase is `−d`.
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// δ-power `n`.
    #[arg(long, default_value_t = 0.0)]
    n: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name, or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct NewtonArgs {
    /// JSON `{"F": series in (x, z0, .., zm), "phi": series in x, "k": "p/q"}`.
    input: PathBuf,
    #[command(flatten)]
    out: Output,
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected two integers `a,b`")?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok((p(a)?, p(b)?))
}

fn parse_coeff(s: &str) -> Result<Coeff> {
    let rat = |v: &str| parse_rat(v).ok_or_else(|| Error::Invalid(format!("invalid rational `{v}`")));
    match s.split_once(',') {
        Some((re, im)) => Ok(Coeff::exact(rat(re)?, rat(im)?)),
        None => Ok(Coeff::exact(rat(s)?, parse_rat("0").expect("zero"))),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn load_spec(a: &SpecArgs) -> Result<EquationSpec> {
    let mut doc: Value = serde_json::from_str(&read(&a.input)?)?;
    let obj = doc.as_object_mut().ok_or_else(|| Error::Invalid("spec must be a JSON object".into()))?;
    if let Some((nt, nx)) = a.trunc {
        obj.insert("trunc".into(), serde_json::json!([nt, nx]));
    }
    if let Some(k) = a.k {
        obj.insert("k".into(), serde_json::json!(k));
    }
    if let Some(m) = a.mode {
        let m = match m {
            ModeArg::Exact => "exact",
            ModeArg::Float => "float",
        };
        obj.insert("mode".into(), serde_json::json!(m));
    }
    parse_spec(&doc.to_string(), a.allow_resonance)
}

fn emit<T: Serialize>(value: &T, out: &Output) -> Result<()> {
    let text = to_json(value)?;
    match &out.output {
        Some(p) => write_artifact(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct CoeffEntry {
    t: usize,
    x: usize,
    value: String,
}

#[derive(Serialize)]
struct SolveReport {
    conditions: ConditionReport,
    solution: FormalSolution,
    /// Nonzero coefficients `u_{t,x}` in readable form.
    coefficients: Vec<CoeffEntry>,
}

fn solve(a: &SpecArgs) -> Result<()> {
    let eq = load_spec(a)?;
    let solution = solve_formal(&eq)?;
    let coefficients = solution
        .series
        .terms()
        .map(|(e, c)| CoeffEntry { t: e[0], x: e[1], value: c.to_string() })
        .collect();
    emit(&SolveReport { conditions: check_conditions(&eq), solution, coefficients }, &a.out)
}

#[derive(Serialize)]
struct DirectionsReport {
    directions_rad: Vec<f64>,
    xi: Vec<String>,
    accumulation: Vec<f64>,
}

fn directions(a: &DirectionsArgs) -> Result<()> {
    let (b, c) = (parse_coeff(&a.b)?, parse_coeff(&a.c)?);
    let SingularData { xi, directions, accumulation, .. } = singular_scan(&b, &c, a.k, a.n)?;
    let xi = xi.iter().map(Coeff::to_string).collect();
    emit(&DirectionsReport { directions_rad: directions, xi, accumulation }, &a.out)
}

fn borel(a: &SpecArgs) -> Result<()> {
    let eq = load_spec(a)?;
    let sol = solve_formal(&eq)?;
    emit(&borel_coefficients(&sol, &eq)?, &a.out)
}

fn complex_json(v: &Value) -> Result<C64> {
    Coeff::from_json(v).map(|c| c.to_c64()).map_err(Error::Invalid)
}

fn load_grid(path: &Path) -> Result<Vec<(C64, C64)>> {
    let doc: Value = serde_json::from_str(&read(path)?)?;
    let bad = || Error::Invalid("grid must be a list of [t, x] pairs".into());
    doc.as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|p| match p.as_array() {
            Some(tx) if tx.len() == 2 => Ok((complex_json(&tx[0])?, complex_json(&tx[1])?)),
            _ => Err(bad()),
        })
        .collect()
}

/// Points on the ray `arg x = d`, with `t` well inside the cone on the conical route.
fn default_grid(d: f64, route: Route, cone_radius: f64) -> Vec<(C64, C64)> {
    let mut g = Vec::new();
    for r in [0.1, 0.2, 0.3] {
        let x = C64::from_polar(r, d);
        match route {
            Route::Standard => g.extend([0.1, 0.2].map(|t| (C64::new(t, 0.0), x))),
            Route::Conical => g.extend([0.25, 0.5].map(|f| (C64::new(f * cone_radius * r, 0.0), x))),
        }
    }
    g
}

fn sum(a: &SumArgs) -> Result<()> {
    let eq = load_spec(&a.spec)?;
    let route = match a.route {
        RouteArg::Standard => Route::Standard,
        RouteArg::Conical => Route::Conical,
    };
    let opts = SumOptions {
        route,
        pade: a.pade,
        cone_radius: a.cone_radius,
        cross_check: a.cross_check,
        tolerance: a.tolerance,
        ..SumOptions::default()
    };
    let grid = match &a.grid {
        Some(p) => load_grid(p)?,
        None => default_grid(a.d, route, a.cone_radius),
    };
    let report = borel_sum_solution(&eq, a.d, &grid, &opts)?;
    if let Some(p) = &a.csv {
        write_artifact(p, &grid_csv(&report.samples))?;
    }
    emit(&report, &a.spec.out)
}

#[derive(Serialize)]
struct NormsReport {
    sector: SectorSpec,
    params: NagumoParams,
    m0: f64,
    estimate: NormEstimate,
}

fn norms(a: &NormsArgs) -> Result<()> {
    let f = parse_polynomial(&a.f, "xi", 0)?;
    let sector = match a.sector {
        SectorArg::Pure => SectorSpec::pure(a.d, a.theta)?,
        SectorArg::Disc => SectorSpec::disc_joined(a.radius, a.d, a.theta)?,
        SectorArg::Ramified => SectorSpec::ramified(a.radius, a.d, a.theta, a.k)?,
    };
    let params = NagumoParams::new(a.mu, sector.base().d, a.n);
    let c = f.to_c64_vec();
    let eval = move |z: C64| c.iter().rev().fold(C64::new(0.0, 0.0), |acc, a| acc * z + a);
    let estimate = nagumo_norm_estimate(&eval, &sector, &params, f.trunc()[0])?;
    emit(&NormsReport { sector, params, m0: m0_constant(), estimate }, &a.out)
}

#[derive(Serialize)]
struct VerifyReport {
    m0: f64,
    passed: bool,
    suites: Vec<SuiteReport>,
}

/// Returns whether every suite passed.
fn verify(a: &VerifyArgs) -> Result<bool> {
    let suites: Vec<Suite> = if a.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![Suite::from_name(&a.suite).ok_or_else(|| Error::Invalid(format!("unknown suite `{}`", a.suite)))?]
    };
    let reports = suites
        .iter()
        .map(|&s| verify_inequalities(s, a.trials, a.seed))
        .collect::<Result<Vec<_>>>()?;
    let passed = reports.iter().all(SuiteReport::passed);
    emit(&VerifyReport { m0: m0_constant(), passed, suites: reports }, &a.out)?;
    Ok(passed)
}

#[derive(Serialize)]
struct NewtonReport {
    polygon: NewtonPolygon,
    k: String,
    gevrey_admissible: bool,
}

fn newton(a: &NewtonArgs) -> Result<()> {
    let doc: Value = serde_json::from_str(&read(&a.input)?)?;
    let field = |key: &str| doc.get(key).ok_or_else(|| Error::Invalid(format!("missing `{key}`")));
    let f: TruncatedSeries = serde_json::from_value(field("F")?.clone())?;
    let phi: TruncatedSeries = serde_json::from_value(field("phi")?.clone())?;
    let k_text = doc.get("k").and_then(Value::as_str).unwrap_or("1");
    let k = parse_rat(k_text).ok_or_else(|| Error::Invalid(format!("invalid level `{k_text}`")))?;
    let polygon = newton_polygon(&f, &phi)?;
    let gevrey_admissible = polygon.gevrey_admissible(&k);
    emit(&NewtonReport { polygon, k: summa::coeff::fmt_rat(&k), gevrey_admissible }, &a.out)
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Solve(a) => solve(a)?,
        Command::Directions(a) => directions(a)?,
        Command::Borel(a) => borel(a)?,
        Command::Sum(a) => sum(a)?,
        Command::Norms(a) => norms(a)?,
        Command::Verify(a) => return verify(a),
        Command::Newton(a) => newton(a)?,
    }
    Ok(true)
}

/// Sizes the global rayon pool from `SUMMA_THREADS`.
fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("SUMMA_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Invalid(format!("SUMMA_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| run(&cli));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: numerical failure: an inequality suite reported violations");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
