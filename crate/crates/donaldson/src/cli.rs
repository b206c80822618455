//! Command-line wiring: one subcommand per process, explicit config,
//! machine-readable reports. Errors leave as structured JSON on stderr
//! with exit codes 1 (usage/parse), 2 (constraint violation), 3
//! (numeric failure).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::builder::{build_entire_solution, catalog, harmonic_catalog, split_g, EntireSolution};
use crate::complexify::{
    build_cma_solution, complex_hessian, curvature_spot_check, hessian_det_residual,
    real_to_complex_bridge,
};
use crate::dirichlet::{newton_solve, probe_problem31, SolveConfig};
use crate::error::{Error, Result};
use crate::exprparse::{parse_poly, VarTable};
use crate::io::{poly_to_json_string, read_grid, write_grid, BundleJson, PolyJson};
use crate::transform::{
    donaldson_transform_numeric, donaldson_transform_symbolic, harmonicity_residual,
    liouville_diagnostic, HarmonicityReport, Theta, TransformResult, LIOUVILLE_TOL_SYMBOLIC,
};
use crate::verifier::{ellipticity_check_grid, ellipticity_check_poly, q_operator_grid,
    q_operator_symbolic, EllipticityVerdict};
use crate::{ExactPoly, GridField, Rational};

#[derive(Parser)]
#[command(name = "donaldson", version, about = "Entire solutions of u_tt*lap(u)-|grad u_t|^2 = 1: construction, certification, transform, complexification, Dirichlet solver")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an exact solution bundle from (a, b).
    Build(BuildArgs),
    /// Certify a solution bundle (exact) or a sampled grid (numeric).
    Verify(VerifyArgs),
    /// Donaldson transform: theta(z, x) with z = u_t, plus diagnostics.
    Transform(TransformArgs),
    /// Liouville diagnostic for dtheta/dz alone.
    Liouville(LiouvilleArgs),
    /// n = 2 complex Monge-Ampere correspondence.
    Complexify(ComplexifyArgs),
    /// Damped-Newton Dirichlet solve on a box.
    Solve(SolveArgs),
    /// Nested-domain experiment: oscillation of u_tt on a fixed core.
    Probe31(Probe31Args),
    /// Enumerate harmonic polynomials (and optionally full bundles).
    Catalog(CatalogArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Leading coefficient a > 0, as p/q.
    #[arg(long)]
    a: String,
    /// Harmonic polynomial b(x1..xn), expression grammar.
    #[arg(long)]
    b: String,
    /// Number of spatial variables (default: inferred from b).
    #[arg(long)]
    n: Option<usize>,
    /// Optional extra harmonic summand for g.
    #[arg(long)]
    extra: Option<String>,
    /// Output bundle path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Solution bundle JSON or grid file (sniffed).
    input: PathBuf,
    /// Samples per axis for the polynomial ellipticity lattice.
    #[arg(long, default_value_t = 11)]
    samples: usize,
    /// Box for the polynomial checks, "lo:hi,lo:hi,..." over (t, x).
    #[arg(long, default_value = "")]
    region: String,
    /// Report path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    /// Solution bundle JSON or grid file (sniffed).
    input: PathBuf,
    /// Where to write the numeric theta grid (grid input only).
    #[arg(long)]
    out_theta: Option<PathBuf>,
    /// Report path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LiouvilleArgs {
    /// Solution bundle JSON or grid file (sniffed).
    input: PathBuf,
    /// Relative-variation tolerance (default: 1e-6 symbolic, 10 h^2 numeric).
    #[arg(long)]
    tol: Option<f64>,
    /// Report path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ComplexifyArgs {
    /// Real n = 2 solution bundle (bridge mode).
    input: Option<PathBuf>,
    /// Leading coefficient a > 0, as p/q (construction mode).
    #[arg(long)]
    a: Option<String>,
    /// Holomorphic-in-w part b(w, wbar) with b_wwbar = 0.
    #[arg(long)]
    b: Option<String>,
    /// z-harmonic part f(z, zbar) with f_zzbar = 0.
    #[arg(long)]
    f: Option<String>,
    /// Sample points for Hessian / bridge / curvature checks.
    #[arg(long, default_value_t = 20)]
    points: usize,
    /// Seed for the sample points.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Finite-difference step for the curvature spot check.
    #[arg(long, default_value_t = 1e-2)]
    curvature_step: f64,
    /// Report path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Solution bundle supplying boundary data (restriction mode).
    #[arg(long)]
    bundle: Option<PathBuf>,
    /// Boundary-value expression in (t, x1..xn) (expression mode).
    #[arg(long)]
    expr: Option<String>,
    /// Box, "lo:hi,lo:hi,..." over (t, x1..xn).
    #[arg(long)]
    bounds: String,
    /// Points per axis, "33,33".
    #[arg(long)]
    shape: String,
    /// Residual sup-norm target.
    #[arg(long, default_value_t = 1e-10)]
    newton_tol: f64,
    #[arg(long, default_value_t = 30)]
    max_iters: usize,
    /// Ellipticity floor for min u_tt and min lap(u).
    #[arg(long, default_value_t = 1e-8)]
    floor: f64,
    /// Where to write the solved grid.
    #[arg(long)]
    out_grid: Option<PathBuf>,
    /// Report path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Probe31Args {
    /// Base solution bundle.
    #[arg(long)]
    bundle: PathBuf,
    /// Boundary perturbation polynomial in (t, x1..xn).
    #[arg(long)]
    perturb: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    amplitude: f64,
    /// Strictly increasing edge lengths, "1,2,4".
    #[arg(long)]
    domains: String,
    #[arg(long, default_value_t = 17)]
    points: usize,
    #[arg(long, default_value_t = 1e-10)]
    newton_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    floor: f64,
    /// Report format.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CatalogArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    max_degree: u32,
    /// Comma-separated list of a values (p/q); with it, full bundles
    /// are emitted instead of the bare harmonic basis.
    #[arg(long)]
    a: Option<String>,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Entry point used by the binary: parses, runs, returns the exit code.
pub fn main_entry<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // help/version are not errors
            use clap::error::ErrorKind::*;
            if matches!(e.kind(), DisplayHelp | DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            eprintln!(
                "{}",
                json!({"error": {"kind": "usage", "message": e.to_string()}})
            );
            return 1;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!(
                "{}",
                json!({"error": {"kind": e.kind(), "message": e.to_string()}})
            );
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Transform(a) => cmd_transform(a),
        Command::Liouville(a) => cmd_liouville(a),
        Command::Complexify(a) => cmd_complexify(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Probe31(a) => cmd_probe31(a),
        Command::Catalog(a) => cmd_catalog(a),
    }
}

// ------------------------------------------------------------------
// argument parsing helpers
// ------------------------------------------------------------------

fn parse_rational(s: &str) -> Result<Rational> {
    let (num, den) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational '{s}'")))?;
    let q: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational '{s}'")))?;
    if q == BigInt::from(0) {
        return Err(Error::Parse(format!("zero denominator in '{s}'")));
    }
    Ok(Rational::new(p, q))
}

fn parse_bounds(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .map(|part| {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("bad bounds component '{part}'")))?;
            let lo: f64 = lo
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad bound '{lo}'")))?;
            let hi: f64 = hi
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad bound '{hi}'")))?;
            Ok((lo, hi))
        })
        .collect()
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad integer '{p}'")))
        })
        .collect()
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad number '{p}'")))
        })
        .collect()
}

/// Highest spatial index mentioned in a spatial expression, so `--n`
/// can default to something sensible.
fn infer_spatial_n(src: &str) -> usize {
    let mut n = 1usize;
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'x' {
            let mut j = i + 1;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j > i + 1 {
                if let Ok(k) = src[i + 1..j].parse::<usize>() {
                    n = n.max(k);
                }
            }
            i = j;
        } else {
            i += 1;
        }
    }
    n
}

enum Input {
    Bundle(Box<EntireSolution>),
    Grid(GridField),
}

/// Sniff a path: a solution bundle parses as BundleJson; otherwise it
/// must be a grid file (header line + CSV payload). Bundles are
/// revalidated exactly here, so tampered inputs exit 2.
fn load_input(path: &Path) -> Result<Input> {
    let text = std::fs::read_to_string(path)?;
    if let Ok(bj) = serde_json::from_str::<BundleJson>(&text) {
        return Ok(Input::Bundle(Box::new(bj.to_solution()?)));
    }
    Ok(Input::Grid(read_grid(path)?))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn poly_value(p: &ExactPoly) -> Result<Value> {
    Ok(serde_json::to_value(PolyJson::from_poly(p))?)
}

fn rational_value(r: &Rational) -> Value {
    json!({"num": r.numer().to_string(), "den": r.denom().to_string()})
}

fn ellipticity_value(v: &EllipticityVerdict<f64>) -> Value {
    json!({
        "u_tt_positive": v.u_tt_positive,
        "lap_positive": v.lap_positive,
        "q_positive": v.q_positive,
        "min_u_tt": v.min_u_tt,
        "min_lap": v.min_lap,
        "min_q": v.min_q,
        "sampled": v.sampled,
    })
}

// ------------------------------------------------------------------
// subcommands
// ------------------------------------------------------------------

fn cmd_build(args: BuildArgs) -> Result<()> {
    let a = parse_rational(&args.a)?;
    let n = args.n.unwrap_or_else(|| infer_spatial_n(&args.b));
    let vars = VarTable::spatial(n);
    let b: ExactPoly = parse_poly(&args.b, &vars)?;
    let extra = match &args.extra {
        Some(src) => Some(parse_poly(src, &vars)?),
        None => None,
    };
    let sol = build_entire_solution(&a, &b, n, extra.as_ref())?;
    let text = serde_json::to_string_pretty(&BundleJson::from_solution(&sol))?;
    emit(&args.out, &text)
}

fn cmd_verify(args: VerifyArgs) -> Result<()> {
    match load_input(&args.input)? {
        Input::Bundle(sol) => {
            // load_input revalidated the identities exactly
            let q = q_operator_symbolic(&sol.u);
            let q_minus_one = q.sub(&ExactPoly::one(sol.u.nvars()));
            if !q_minus_one.is_zero() {
                return Err(Error::ConstraintViolation {
                    what: "Q(D^2 u) != 1".into(),
                    residual: poly_to_json_string(&q_minus_one)?,
                });
            }
            let region = if args.region.is_empty() {
                vec![(-1.0, 1.0); sol.n + 1]
            } else {
                parse_bounds(&args.region)?
            };
            let ell = ellipticity_check_poly(&sol.u, &region, args.samples)?;
            let (f, lap_f) = split_g(&sol)?;
            let report = json!({
                "mode": "symbolic",
                "n": sol.n,
                "a": rational_value(&sol.a),
                "exact_identity": true,
                "q_minus_one": poly_value(&q_minus_one)?,
                "split_f": poly_value(&f)?,
                "lap_f": rational_value(&lap_f),
                "ellipticity": ellipticity_value(&ell),
                "config": {"samples": args.samples, "region": region},
            });
            emit(&args.out, &serde_json::to_string_pretty(&report)?)
        }
        Input::Grid(g) => {
            let rep = q_operator_grid(&g)?;
            let ell = ellipticity_check_grid(&g)?;
            let report = json!({
                "mode": "numeric",
                "shape": g.shape(),
                "bounds": g.bounds(),
                "residual": {"max_abs": rep.max_abs, "rms": rep.rms},
                "ellipticity": ellipticity_value(&ell),
                "config": {},
            });
            emit(&args.out, &serde_json::to_string_pretty(&report)?)
        }
    }
}

fn transform_of(input: &Input) -> Result<TransformResult<f64>> {
    match input {
        Input::Bundle(sol) => donaldson_transform_symbolic(sol),
        Input::Grid(g) => donaldson_transform_numeric(g),
    }
}

fn transform_report(r: &TransformResult<f64>, theta_path: Option<&Path>) -> Result<Value> {
    let harmonicity = match harmonicity_residual(r)? {
        HarmonicityReport::Symbolic(lap) => json!({
            "kind": "symbolic",
            "laplacian": poly_value(&lap)?,
            "harmonic": lap.is_zero(),
        }),
        HarmonicityReport::Numeric(rep) => json!({
            "kind": "numeric",
            "max_abs": rep.max_abs,
            "rms": rep.rms,
        }),
    };
    let theta = match &r.theta {
        Theta::Symbolic(p) => json!({"kind": "symbolic", "poly": poly_value(p)?}),
        Theta::Numeric(g) => json!({
            "kind": "numeric",
            "shape": g.shape(),
            "bounds": g.bounds(),
            "path": theta_path.map(|p| p.display().to_string()),
        }),
    };
    Ok(json!({
        "theta": theta,
        "z_range": [r.z_range.0, r.z_range.1],
        "dtheta_dz": {
            "min": r.dtheta_dz_stats.min,
            "max": r.dtheta_dz_stats.max,
            "mean": r.dtheta_dz_stats.mean,
            "variance": r.dtheta_dz_stats.variance,
            "exact": r.dtheta_dz_exact.as_ref().map(rational_value),
        },
        "harmonicity": harmonicity,
    }))
}

fn cmd_transform(args: TransformArgs) -> Result<()> {
    let input = load_input(&args.input)?;
    let r = transform_of(&input)?;
    if let Theta::Numeric(g) = &r.theta {
        let path = args
            .out_theta
            .clone()
            .ok_or_else(|| Error::InvalidInput("--out-theta required for grid input".into()))?;
        write_grid(&path, g)?;
    }
    let report = transform_report(&r, args.out_theta.as_deref())?;
    emit(&args.out, &serde_json::to_string_pretty(&report)?)
}

fn cmd_liouville(args: LiouvilleArgs) -> Result<()> {
    let input = load_input(&args.input)?;
    let default_tol = match &input {
        Input::Bundle(_) => LIOUVILLE_TOL_SYMBOLIC,
        Input::Grid(g) => {
            let h = g.spacing().iter().cloned().fold(0.0_f64, f64::max);
            10.0 * h * h
        }
    };
    let tol = args.tol.unwrap_or(default_tol);
    let r = transform_of(&input)?;
    let rep = liouville_diagnostic(&r, tol);
    let report = json!({
        "positive": rep.positive,
        "relative_variation": rep.relative_variation,
        "tolerance": rep.tolerance,
        "verdict": format!("{:?}", rep.verdict),
        "config": {"tol": tol},
    });
    emit(&args.out, &serde_json::to_string_pretty(&report)?)
}

fn cmd_complexify(args: ComplexifyArgs) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let report = match (&args.input, &args.a) {
        (Some(path), None) => {
            let sol = match load_input(path)? {
                Input::Bundle(s) => s,
                Input::Grid(_) => {
                    return Err(Error::InvalidInput(
                        "complexify takes a solution bundle, not a grid".into(),
                    ))
                }
            };
            if sol.n != 2 {
                return Err(Error::Unsupported(format!(
                    "the correspondence needs n = 2, bundle has n = {}",
                    sol.n
                )));
            }
            let pts: Vec<[f64; 3]> = (0..args.points)
                .map(|_| {
                    [
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    ]
                })
                .collect();
            let bridge = real_to_complex_bridge(&sol.u, &pts)?;
            json!({
                "mode": "bridge",
                "exact_identity": bridge.exact_identity,
                "sample_points": bridge.sample_points,
                "max_deviation": bridge.max_deviation,
                "config": {"points": args.points, "seed": args.seed},
            })
        }
        (None, Some(a_str)) => {
            let a = parse_rational(a_str)?;
            let vars = VarTable::complex();
            let b_src = args
                .b
                .as_deref()
                .ok_or_else(|| Error::InvalidInput("--b required with --a".into()))?;
            let f_src = args.f.as_deref().unwrap_or("0");
            let b: crate::BiPoly = parse_poly(b_src, &vars)?;
            let f: crate::BiPoly = parse_poly(f_src, &vars)?;
            let v = build_cma_solution(&a, &b, &f)?;
            let det_res = hessian_det_residual(&v);
            let mut samples = Vec::new();
            let mut max_curv: f64 = 0.0;
            let mut curvature_ok = true;
            for _ in 0..args.points {
                let z = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let w = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let h = complex_hessian(&v, z, w);
                let curv = match curvature_spot_check(&v, z, w, args.curvature_step) {
                    Ok(c) => {
                        max_curv = max_curv.max(c);
                        Some(c)
                    }
                    Err(_) => {
                        curvature_ok = false;
                        None
                    }
                };
                samples.push(json!({
                    "z": [z.0, z.1],
                    "w": [w.0, w.1],
                    "det": h.det(),
                    "positive_definite": h.positive_definite(),
                    "max_curvature_component": curv,
                }));
            }
            json!({
                "mode": "construct",
                "det_minus_one_zero": det_res.is_zero(),
                "samples": samples,
                "max_curvature_component": if curvature_ok { Some(max_curv) } else { None },
                "config": {
                    "points": args.points,
                    "seed": args.seed,
                    "curvature_step": args.curvature_step,
                },
            })
        }
        _ => {
            return Err(Error::InvalidInput(
                "complexify takes either a bundle path or --a/--b/--f".into(),
            ))
        }
    };
    emit(&args.out, &serde_json::to_string_pretty(&report)?)
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let bounds = parse_bounds(&args.bounds)?;
    let shape = parse_usize_list(&args.shape)?;
    if bounds.len() != shape.len() {
        return Err(Error::InvalidInput("--bounds and --shape rank mismatch".into()));
    }
    let boundary_poly: ExactPoly = match (&args.bundle, &args.expr) {
        (Some(path), None) => match load_input(path)? {
            Input::Bundle(sol) => {
                if sol.n + 1 != bounds.len() {
                    return Err(Error::InvalidInput(format!(
                        "bundle has n = {}, but the box has {} axes",
                        sol.n,
                        bounds.len()
                    )));
                }
                sol.u.clone()
            }
            Input::Grid(_) => {
                return Err(Error::InvalidInput("--bundle must point at a bundle".into()))
            }
        },
        (None, Some(src)) => parse_poly(src, &VarTable::real(bounds.len() - 1))?,
        _ => {
            return Err(Error::InvalidInput(
                "exactly one of --bundle / --expr is required".into(),
            ))
        }
    };
    let data = GridField::sample_poly(&boundary_poly, bounds.clone(), shape.clone())?;
    let config = SolveConfig {
        newton_tol: args.newton_tol,
        max_newton_iters: args.max_iters,
        ellipticity_floor: args.floor,
        ..SolveConfig::default()
    };
    let (u, report) = newton_solve(&data, &config)?;
    if let Some(p) = &args.out_grid {
        write_grid(p, &u)?;
    }
    let value = json!({
        "converged": report.converged,
        "status": format!("{:?}", report.status),
        "newton_iterations": report.newton_iterations,
        "final_residual": report.final_residual,
        "residual_norms": report.residual_norms,
        "step_sizes": report.step_sizes,
        "ellipticity_margin": [report.ellipticity_margin.0, report.ellipticity_margin.1],
        "grid": args.out_grid.as_ref().map(|p| p.display().to_string()),
        "config": {
            "bounds": bounds,
            "shape": shape,
            "newton_tol": args.newton_tol,
            "max_iters": args.max_iters,
            "floor": args.floor,
        },
    });
    emit(&args.out, &serde_json::to_string_pretty(&value)?)?;
    if !report.converged {
        return Err(Error::NumericFailure(format!(
            "solver did not converge: {:?}, final residual {}",
            report.status, report.final_residual
        )));
    }
    Ok(())
}

fn cmd_probe31(args: Probe31Args) -> Result<()> {
    let sol = match load_input(&args.bundle)? {
        Input::Bundle(s) => s,
        Input::Grid(_) => {
            return Err(Error::InvalidInput("--bundle must point at a bundle".into()))
        }
    };
    let perturb = match &args.perturb {
        Some(src) => Some(parse_poly(src, &VarTable::real(sol.n))?),
        None => None,
    };
    let domains = parse_f64_list(&args.domains)?;
    let config = SolveConfig {
        newton_tol: args.newton_tol,
        ellipticity_floor: args.floor,
        ..SolveConfig::default()
    };
    let report = probe_problem31(
        &sol,
        perturb.as_ref(),
        args.amplitude,
        &domains,
        args.points,
        &config,
    )?;
    let text = match args.format.as_str() {
        "csv" => {
            let mut s = String::from("domain,h,osc_utt,converged,final_residual\n");
            for row in &report.rows {
                s.push_str(&format!(
                    "{},{},{:.17e},{},{:.17e}\n",
                    row.domain, row.h, row.osc_utt, row.converged, row.final_residual
                ));
            }
            s
        }
        "json" => serde_json::to_string_pretty(&json!({
            "complete": report.complete,
            "rows": report.rows.iter().map(|r| json!({
                "domain": r.domain,
                "h": r.h,
                "osc_utt": r.osc_utt,
                "converged": r.converged,
                "final_residual": r.final_residual,
            })).collect::<Vec<_>>(),
            "config": {
                "amplitude": args.amplitude,
                "domains": domains,
                "points": args.points,
                "newton_tol": args.newton_tol,
                "floor": args.floor,
            },
        }))?,
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown format '{other}' (json | csv)"
            )))
        }
    };
    emit(&args.out, text.trim_end())?;
    if !report.complete {
        return Err(Error::NumericFailure(
            "one or more probe solves did not converge (partial report emitted)".into(),
        ));
    }
    Ok(())
}

fn cmd_catalog(args: CatalogArgs) -> Result<()> {
    let text = match &args.a {
        Some(list) => {
            let a_values: Vec<Rational> = list
                .split(',')
                .map(|s| parse_rational(s.trim()))
                .collect::<Result<_>>()?;
            let sols = catalog(args.n, args.max_degree, &a_values)?;
            let bundles: Vec<BundleJson> =
                sols.iter().map(BundleJson::from_solution).collect();
            serde_json::to_string_pretty(&bundles)?
        }
        None => {
            let basis = harmonic_catalog(args.n, args.max_degree)?;
            let polys: Vec<PolyJson> = basis.iter().map(PolyJson::from_poly).collect();
            serde_json::to_string_pretty(&polys)?
        }
    };
    emit(&args.out, &text)
}
