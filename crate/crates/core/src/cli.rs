//! Command-line front end. [`run`] takes the argument list and output
//! streams so it can be driven from tests.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::basic_family::{member_step, DEFAULT_M_CAP, DEFAULT_TOL};
use crate::cubic_solver::{polish, solve, SolveError};
use crate::poly::{cardano_oracle, Polynomial};
use crate::polynomiograph::{
    encode_image, measure_divergence_fraction, render, Method, RenderConfig,
};
use crate::sampling::{canonical_parameters, in_box, instance_rng, random_roots};
use crate::voronoi::{audit, Audit, CanonicalCubic, Theorem2Case, VoronoiError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NO_CONVERGENCE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "cubic-voronoi",
    version,
    about = "Solve cubics from their critical points with the basic sequence"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a cubic and print the report as JSON.
    Solve(SolveArgs),
    /// Check the critical-point cell theorems on random canonical cubics.
    Verify(VerifyArgs),
    /// Render a basin picture as binary PPM.
    Render(RenderArgs),
    /// Compare the solver, the closed form and Newton from random seeds.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SolveArgs {
    /// Coefficients, constant term first, e.g. "2,-2,0,1".
    #[arg(allow_hyphen_values = true)]
    pub coeffs: String,
    #[arg(long, default_value_t = DEFAULT_TOL, value_parser = positive_f64)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_M_CAP, value_parser = positive_usize)]
    pub mcap: usize,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 100_000, value_parser = positive_usize)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest real part of the third root.
    #[arg(long, default_value_t = 10.0, value_parser = non_negative_f64)]
    pub amax: f64,
    /// Largest imaginary part of the third root.
    #[arg(long, default_value_t = 10.0, value_parser = positive_f64)]
    pub bmax: f64,
    /// Check the single instance w = a + ib instead of sampling.
    #[arg(long, requires = "b", value_parser = non_negative_f64)]
    pub a: Option<f64>,
    #[arg(long, requires = "a", value_parser = non_negative_f64)]
    pub b: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct RenderArgs {
    #[arg(allow_hyphen_values = true)]
    pub coeffs: String,
    #[arg(long, default_value = "newton")]
    pub method: Method,
    /// Window center as RE,IM.
    #[arg(long, default_value = "0,0", value_parser = parse_center, allow_hyphen_values = true)]
    pub center: Complex64,
    #[arg(long, default_value_t = 2.5, value_parser = positive_f64)]
    pub half_width: f64,
    /// Image size as WxH.
    #[arg(long, default_value = "512x512", value_parser = parse_size)]
    pub size: (usize, usize),
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, value_parser = positive_f64)]
    pub tol: Option<f64>,
    /// Iteration cap (m-cap for the basic sequence).
    #[arg(long, value_parser = positive_usize)]
    pub cap: Option<usize>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 1000, value_parser = positive_usize)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use this cubic for every sample instead of random ones.
    #[arg(long, allow_hyphen_values = true)]
    pub poly: Option<String>,
    /// Print one line per sample.
    #[arg(long)]
    pub per_sample: bool,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a positive number, got `{s}`")),
    }
}

fn non_negative_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a non-negative number, got `{s}`")),
    }
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive integer, got `{s}`")),
    }
}

fn parse_center(s: &str) -> Result<Complex64, String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected RE,IM, got `{s}`"))?;
    let part = |t: &str| -> Result<f64, String> {
        match t.trim().parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(format!("bad number `{t}` in center")),
        }
    };
    Ok(Complex64::new(part(re)?, part(im)?))
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once('x')
        .ok_or_else(|| format!("expected WxH, got `{s}`"))?;
    Ok((positive_usize(w)?, positive_usize(h)?))
}

fn parse_cubic(text: &str) -> Result<Polynomial, String> {
    let p: Polynomial = text.parse().map_err(|e| format!("{e}"))?;
    if p.degree() != 3 {
        return Err(format!(
            "expected a cubic (4 coefficients), got degree {}",
            p.degree()
        ));
    }
    Ok(p)
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => run_solve(&a, out, err),
        Command::Verify(a) => run_verify(&a, out),
        Command::Render(a) => run_render(&a, out),
        Command::Bench(a) => run_bench(&a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

type CmdResult = Result<i32, String>;

fn io(e: std::io::Error) -> String {
    e.to_string()
}

pub fn run_solve(args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let p = parse_cubic(&args.coeffs)?;
    match solve(&p, args.tol, args.mcap) {
        Ok(report) => {
            let json = serde_json::to_string(&report).map_err(|e| e.to_string())?;
            writeln!(out, "{json}").map_err(io)?;
            Ok(EXIT_OK)
        }
        Err(e @ SolveError::NoConvergence { .. }) => {
            writeln!(err, "error: {e}").map_err(io)?;
            Ok(EXIT_NO_CONVERGENCE)
        }
        Err(e) => Err(e.to_string()),
    }
}

/// Aggregated counts of a verify sweep.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifySummary {
    pub samples: usize,
    pub cases: [usize; 5],
    pub strong: usize,
    pub theorem1: usize,
    pub theorem2: usize,
    pub gap_margin: usize,
    pub gauss_lucas: usize,
    pub max_product_residual: f64,
}

impl VerifySummary {
    pub fn violations(&self) -> usize {
        self.theorem1 + self.theorem2 + self.gap_margin + self.gauss_lucas
    }

    fn add(&mut self, result: &Result<Audit, VoronoiError>) {
        self.samples += 1;
        let audit = match result {
            Ok(a) => a,
            Err(_) => {
                self.cases[case_slot(Theorem2Case::ExcludedCollinear)] += 1;
                return;
            }
        };
        self.cases[case_slot(audit.verdict.case)] += 1;
        self.strong += audit.verdict.strong as usize;
        self.theorem1 += (audit.theorem1 == Some(false)) as usize;
        self.theorem2 += (audit.theorem2 == Some(false)) as usize;
        self.gap_margin += (audit.gap_margin == Some(false)) as usize;
        self.gauss_lucas += !audit.gauss_lucas as usize;
        self.max_product_residual = self.max_product_residual.max(audit.product_residual);
    }
}

fn case_slot(case: Theorem2Case) -> usize {
    Theorem2Case::ALL.iter().position(|&c| c == case).unwrap()
}

fn audit_parameters(a: f64, b: f64) -> Result<Audit, VoronoiError> {
    audit(&CanonicalCubic::from_parameters(a, b)?)
}

/// Audits of the sampled canonical cubics, in sample order.
pub fn verify_sweep(
    samples: usize,
    seed: u64,
    amax: f64,
    bmax: f64,
) -> Vec<Result<Audit, VoronoiError>> {
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let (a, b) = canonical_parameters(&mut instance_rng(seed, i), amax, bmax);
            audit_parameters(a, b)
        })
        .collect()
}

pub fn run_verify(args: &VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let mut summary = VerifySummary::default();
    match (args.a, args.b) {
        (Some(a), Some(b)) => {
            writeln!(out, "verify: instance a={a} b={b}").map_err(io)?;
            let result = audit_parameters(a, b);
            match &result {
                Ok(audit) => writeln!(out, "{}", audit.verdict).map_err(io)?,
                Err(_) => writeln!(out, "case={}", Theorem2Case::ExcludedCollinear).map_err(io)?,
            }
            summary.add(&result);
        }
        _ => {
            writeln!(
                out,
                "verify: samples={} seed={} amax={} bmax={} rng=chacha8",
                args.samples, args.seed, args.amax, args.bmax
            )
            .map_err(io)?;
            for result in verify_sweep(args.samples, args.seed, args.amax, args.bmax) {
                summary.add(&result);
            }
        }
    }
    write_verify_table(&summary, out).map_err(io)?;
    Ok(if summary.violations() == 0 {
        EXIT_OK
    } else {
        EXIT_NO_CONVERGENCE
    })
}

fn write_verify_table(s: &VerifySummary, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "{:<20} {:>8}", "case", "count")?;
    for (case, count) in Theorem2Case::ALL.iter().zip(s.cases) {
        writeln!(out, "{:<20} {:>8}", case.as_str(), count)?;
    }
    writeln!(out, "{:<20} {:>8}", "strong", s.strong)?;
    writeln!(out, "{:<20} {:>8}", "check", "violations")?;
    for (name, count) in [
        ("theorem-1", s.theorem1),
        ("theorem-2", s.theorem2),
        ("distance-gap", s.gap_margin),
        ("gauss-lucas", s.gauss_lucas),
    ] {
        writeln!(out, "{:<20} {:>8}", name, count)?;
    }
    writeln!(
        out,
        "{:<20} {:>8.1e}",
        "max |3c1c2+1|", s.max_product_residual
    )?;
    writeln!(out, "{:<20} {:>8}", "total violations", s.violations())
}

pub fn run_render(args: &RenderArgs, out: &mut dyn Write) -> CmdResult {
    let p = parse_cubic(&args.coeffs)?;
    let (w, h) = args.size;
    let mut cfg = RenderConfig::new(args.method, args.center, args.half_width, w, h);
    if let Some(tol) = args.tol {
        cfg.tol = tol;
    }
    if let Some(cap) = args.cap {
        cfg.cap = cap;
    }
    let g = render(&p, &cfg).map_err(|e| e.to_string())?;
    std::fs::write(&args.output, encode_image(&g))
        .map_err(|e| format!("cannot write {}: {e}", args.output.display()))?;
    writeln!(
        out,
        "method={} size={}x{} cap={}",
        cfg.method, w, h, cfg.cap
    )
    .map_err(io)?;
    writeln!(
        out,
        "divergence fraction: {:.6}",
        measure_divergence_fraction(&g)
    )
    .map_err(io)?;
    Ok(EXIT_OK)
}

/// Per-sample outcome of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchSample {
    /// Largest matched root error of the solver, `None` on no convergence.
    pub solver_error: Option<f64>,
    pub solver_terms: usize,
    pub cardano_error: f64,
    /// Distance from Newton's limit to the nearest root, `None` on failure.
    pub newton_error: Option<f64>,
    pub newton_iters: usize,
}

const NEWTON_CAP: usize = 100;
const NEWTON_TOL: f64 = 1e-12;
/// A Newton limit farther than this from every root counts as a failure.
const NEWTON_HIT: f64 = 1e-6;

fn matched_error(a: &[Complex64; 3], b: &[Complex64; 3]) -> f64 {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    PERMS
        .iter()
        .map(|perm| {
            (0..3)
                .map(|k| (a[k] - b[perm[k]]).norm())
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn bench_sample(p: Option<&Polynomial>, seed: u64, index: u64) -> Result<BenchSample, String> {
    let mut rng = instance_rng(seed, index);
    let p = match p {
        Some(p) => p.clone(),
        None => Polynomial::from_roots(&random_roots(&mut rng, 1.0, 1e-3)),
    };
    let cardano = cardano_oracle(&p).map_err(|e| e.to_string())?;
    let reference = cardano.map(|z| polish(&p, z, 3).z);

    let (solver_error, solver_terms) = match solve(&p, DEFAULT_TOL, DEFAULT_M_CAP) {
        Ok(r) => (Some(matched_error(&r.roots, &reference)), r.terms_used),
        Err(SolveError::NoConvergence { m_cap, .. }) => (None, m_cap),
        Err(e) => return Err(e.to_string()),
    };

    let radius = 1.0 + reference.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut z = in_box(&mut rng, radius);
    let mut newton_iters = NEWTON_CAP;
    let mut settled = false;
    for k in 1..=NEWTON_CAP {
        let Some(next) = member_step(&p, 2, z) else {
            break;
        };
        let moved = (next - z).norm();
        z = next;
        if moved < NEWTON_TOL * (1.0 + z.norm()) {
            newton_iters = k;
            settled = true;
            break;
        }
    }
    let nearest = reference
        .iter()
        .map(|r| (r - z).norm())
        .fold(f64::INFINITY, f64::min);
    Ok(BenchSample {
        solver_error,
        solver_terms,
        cardano_error: matched_error(&cardano, &reference),
        newton_error: (settled && nearest < NEWTON_HIT).then_some(nearest),
        newton_iters,
    })
}

pub fn run_bench(args: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let fixed = args.poly.as_deref().map(parse_cubic).transpose()?;
    let start = Instant::now();
    let rows: Result<Vec<BenchSample>, String> = (0..args.samples as u64)
        .into_par_iter()
        .map(|i| bench_sample(fixed.as_ref(), args.seed, i))
        .collect();
    let rows = rows?;
    let elapsed = start.elapsed();

    let source = fixed
        .as_ref()
        .map_or("random roots in the unit disk".to_string(), |p| {
            p.to_string()
        });
    writeln!(
        out,
        "bench: samples={} seed={} rng=chacha8 poly={source}",
        args.samples, args.seed
    )
    .map_err(io)?;
    if args.per_sample {
        writeln!(
            out,
            "{:>6} {:>12} {:>6} {:>12} {:>12} {:>6}",
            "sample", "solver_err", "terms", "cardano_err", "newton_err", "iters"
        )
        .map_err(io)?;
        let show = |e: Option<f64>| e.map_or("fail".to_string(), |x| format!("{x:.3e}"));
        for (i, r) in rows.iter().enumerate() {
            writeln!(
                out,
                "{:>6} {:>12} {:>6} {:>12.3e} {:>12} {:>6}",
                i,
                show(r.solver_error),
                r.solver_terms,
                r.cardano_error,
                show(r.newton_error),
                r.newton_iters
            )
            .map_err(io)?;
        }
    }

    let n = rows.len() as f64;
    let mean = |xs: Vec<f64>| {
        if xs.is_empty() {
            0.0
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    };
    let solver_ok: Vec<f64> = rows.iter().filter_map(|r| r.solver_error).collect();
    let newton_ok: Vec<f64> = rows.iter().filter_map(|r| r.newton_error).collect();
    writeln!(
        out,
        "{:<10} {:>12} {:>12} {:>10}",
        "method", "mean_error", "mean_steps", "failures"
    )
    .map_err(io)?;
    writeln!(
        out,
        "{:<10} {:>12.3e} {:>12.2} {:>10}",
        "basic",
        mean(solver_ok.clone()),
        rows.iter().map(|r| r.solver_terms as f64).sum::<f64>() / n,
        rows.len() - solver_ok.len()
    )
    .map_err(io)?;
    writeln!(
        out,
        "{:<10} {:>12.3e} {:>12} {:>10}",
        "cardano",
        mean(rows.iter().map(|r| r.cardano_error).collect()),
        "-",
        0
    )
    .map_err(io)?;
    writeln!(
        out,
        "{:<10} {:>12.3e} {:>12.2} {:>10}",
        "newton",
        mean(newton_ok.clone()),
        rows.iter().map(|r| r.newton_iters as f64).sum::<f64>() / n,
        rows.len() - newton_ok.len()
    )
    .map_err(io)?;
    writeln!(
        err,
        "bench wall time: {:.3} ms",
        elapsed.as_secs_f64() * 1e3
    )
    .map_err(io)?;
    Ok(EXIT_OK)
}
