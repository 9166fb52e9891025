//! Command-line front end: configuration, the subcommand pipeline and CSV emission.

pub mod config;
pub mod csv_out;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{error::ErrorKind, Parser, Subcommand};

use crate::blowup_analysis::{cusp_boundary, find_first_blowup, CuspCoeffs, Gamma, GammaSample, GncReport};
use crate::error::{Error, Result};
use crate::field_eval::{
    eval_gradient, eval_solution, fit_exponent, gauge_sups, ExponentFit, FieldSample, Quantity, RayDirection,
    RaySpec, Window,
};
use crate::multivalued_inversion::{invert_with, CharRoots};
use crate::numerics::halton;
use crate::problem_model::{PresetId, Problem};
use crate::reference_fv::{compare_fv, run_fv_observed, smooth_error, FieldGrid, DETECTION_DELAY};
use crate::shock_front::{default_beta, front_states, solve_front, FrontConfig, FrontState, ShockFront};

pub use config::{load_config, parse_config, RunConfig};
use csv_out::*;

#[derive(Parser, Debug)]
#[command(name = "shockform", version, about = "Shock formation near the blowup curve of 2D scalar conservation laws")]
struct Cli {
    /// Output directory for CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in problem: preset-a or preset-b.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Worker threads for the parallel stages.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// First blowup point and the nondegeneracy check.
    Analyze,
    /// Blowup curve and cusp coefficients (gamma.csv, cusp.csv).
    Curve,
    /// Shock front and characteristic roots (front.csv, roots.csv).
    Shock,
    /// Solution field, gradients and Hölder exponents (field.csv, exponents.csv).
    Field,
    /// Godunov reference run and comparison (fv_field.csv, fv_compare.csv).
    Reference,
    /// Acceptance suite (verify.csv plus every other CSV).
    Verify,
}

/// Parse `argv` (program name first), run the subcommand and return the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand => {
                    Error::UnknownSubcommand(e.get(clap::error::ContextKind::InvalidSubcommand).map(|v| v.to_string()).unwrap_or_default())
                        .exit_code()
                }
                _ => Error::UnknownSubcommand(String::new()).exit_code(),
            };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: &Cli) -> Result<i32> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(name) = &cli.preset {
        let id = PresetId::from_name(name).ok_or_else(|| Error::ConfigInvalid {
            line: None,
            key: "--preset".into(),
            msg: format!("unknown preset `{name}`"),
        })?;
        cfg = cfg.with_preset(id);
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if cli.command != Command::Analyze {
        std::fs::create_dir_all(&cfg.out)?;
    }
    let threads = cli.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    let command = cli.command;
    pool.install(|| match command {
        Command::Analyze => analyze(&cfg).map(|_| 0),
        Command::Curve => curve(&cfg).map(|_| 0),
        Command::Shock => shock(&cfg).map(|_| 0),
        Command::Field => field(&cfg).map(|_| 0),
        Command::Reference => reference(&cfg).map(|_| 0),
        Command::Verify => {
            let results = verify::run_suite(&cfg.out, cfg.seed)?;
            let mut stdout = std::io::stdout().lock();
            for r in &results {
                writeln!(stdout, "{}", r.summary_line())?;
            }
            Ok(if results.iter().all(|r| r.passed()) { 0 } else { 2 })
        }
    })
}

/// Problem, first blowup point and configuration for one run.
pub struct Session {
    pub cfg: RunConfig,
    pub problem: Problem,
    pub gnc: GncReport,
}

impl Session {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let problem = cfg.build_problem()?;
        let gnc = find_first_blowup(&problem)?;
        Ok(Session { cfg: cfg.clone(), problem, gnc })
    }

    pub fn gamma(&self) -> Result<Gamma> {
        Gamma::build(&self.problem, &self.gnc, self.cfg.delta)
    }

    pub fn epsilon(&self) -> Result<f64> {
        self.cfg.epsilon(&self.gnc)
    }

    pub fn front(&self, gm: &Gamma) -> Result<ShockFront> {
        let f = &self.cfg.front;
        let mut fc = FrontConfig::new(default_beta(gm, f.n_beta), self.epsilon()?);
        fc.n_s = f.n_s;
        fc.m_bound = f.m_bound;
        fc.tuning.picard_tol = f.picard_tol;
        fc.tuning.noise_floor = f.noise_floor;
        solve_front(&self.problem, gm, &fc)
    }

    fn y_focus(&self, y: Option<f64>) -> f64 {
        y.unwrap_or(self.gnc.y0)
    }
}

fn path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.out.join(name)
}

fn analyze(cfg: &RunConfig) -> Result<()> {
    let p = cfg.build_problem()?;
    println!("problem: {}", p.label());
    let r = match find_first_blowup(&p) {
        Ok(r) => r,
        Err(e) => {
            println!("GNC: FAIL ({e})");
            return Err(e);
        }
    };
    println!("argmin: ({}, {})", r.argmin.0, r.argmin.1);
    println!("minH={}", r.min_h);
    println!("T*={}", r.t_star0);
    println!("first blowup point: x={} y={}", r.x0, r.y0);
    println!("grad norm: {:e}", r.grad_norm);
    println!("Hessian eigenvalues: {}, {}", r.eigenvalues[0], r.eigenvalues[1]);
    println!("GNC: PASS");
    Ok(())
}

/// Γ and cusp coefficients on `n` uniform points of the Γ window.
pub fn curve_tables(p: &Problem, gm: &Gamma, n: usize) -> Result<(Vec<GammaSample>, Vec<CuspCoeffs>)> {
    let (lo, hi) = gm.y_range();
    let mut gs = Vec::with_capacity(n);
    let mut cs = Vec::with_capacity(n);
    for k in 0..n {
        let y = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        let (g, c) = gm.coeffs_at(p, y)?;
        gs.push(g);
        cs.push(c);
    }
    Ok((gs, cs))
}

pub fn write_curve(dir: &Path, gs: &[GammaSample], cs: &[CuspCoeffs]) -> Result<()> {
    write_csv(&dir.join("gamma.csv"), GAMMA_HEADER, &gs.iter().map(gamma_row).collect::<Vec<_>>())?;
    write_csv(&dir.join("cusp.csv"), CUSP_HEADER, &cs.iter().map(cusp_row).collect::<Vec<_>>())
}

fn curve(cfg: &RunConfig) -> Result<()> {
    let s = Session::new(cfg)?;
    let gm = s.gamma()?;
    let (gs, cs) = curve_tables(&s.problem, &gm, cfg.n_y)?;
    write_curve(&cfg.out, &gs, &cs)?;
    let (lo, hi) = gm.y_range();
    println!("Γ on y ∈ [{lo}, {hi}] (δ = {}), {} samples", gm.delta, gs.len());
    let worst = gs.iter().map(|g| g.residual).fold(0.0, f64::max);
    println!("max Newton residual: {worst:e}");
    println!("wrote gamma.csv, cusp.csv");
    Ok(())
}

/// Root inversion on an `n × n` cell-centred grid: `t ∈ [t_lo, t_hi]`, `x − x**(t)` within
/// 1.5 cusp half-widths at `t_hi`.
pub fn probe_grid(p: &Problem, g: &GammaSample, c: &CuspCoeffs, t_lo: f64, t_hi: f64, n: usize) -> Result<Vec<CharRoots>> {
    let (xl, xr) = cusp_boundary(p, g, c, t_hi)?;
    let half = 1.5 * 0.5 * (xr - xl);
    let node = |k: usize| (k as f64 + 0.5) / n as f64;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let t = t_lo + (t_hi - t_lo) * node(i);
        for j in 0..n {
            let x = g.x_tangent(t) - half + 2.0 * half * node(j);
            out.push(invert_with(p, g, c, t, x)?);
        }
    }
    Ok(out)
}

/// Front states on `n_t` times `T*(y) + ε·k/(n_t − 1)` for `n_y` values across the front.
pub fn front_table(p: &Problem, front: &ShockFront, n_t: usize, n_y: usize) -> Result<Vec<FrontState>> {
    let (ylo, yhi) = front.y_range();
    let mut out = Vec::with_capacity(n_t * n_y);
    for j in 0..n_y {
        let y = if n_y == 1 { 0.5 * (ylo + yhi) } else { ylo + (yhi - ylo) * j as f64 / (n_y - 1) as f64 };
        let t_star = front.gamma.at(p, y)?.t_star;
        for k in 0..n_t {
            let dt = if n_t == 1 { 0.0 } else { front.eps * k as f64 / (n_t - 1) as f64 };
            out.push(front_states(front, p, t_star + dt, y)?);
        }
    }
    Ok(out)
}

fn shock(cfg: &RunConfig) -> Result<()> {
    let s = Session::new(cfg)?;
    let gm = s.gamma()?;
    let front = s.front(&gm)?;
    let states = front_table(&s.problem, &front, cfg.front.n_t_out, cfg.front.n_y_out)?;
    write_csv(&path(cfg, "front.csv"), FRONT_HEADER, &states.iter().map(front_row).collect::<Vec<_>>())?;
    let (g, c) = gm.coeffs_at(&s.problem, s.gnc.y0)?;
    let eps = front.eps;
    let probes = probe_grid(&s.problem, &g, &c, g.t_star - 0.2 * eps, g.t_star + 0.8 * eps, cfg.front.n_probe)?;
    write_csv(&path(cfg, "roots.csv"), ROOTS_HEADER, &probes.iter().flat_map(roots_rows).collect::<Vec<_>>())?;
    let (ylo, yhi) = front.y_range();
    println!("front on t − T*(y) ∈ [0, {eps}], y ∈ [{ylo}, {yhi}], {} β columns", front.beta.len());
    println!("α range: [{}, {}]", min(&front.alpha), max(&front.alpha));
    println!("Picard ratio max: {}", front.picard_max_ratio);
    println!("|Λ|/s max: {:e} (bound {}{})", front.m_estimate, front.m_bound, if front.m_flagged { ", EXCEEDED" } else { "" });
    println!("C2 bracket max: {:e}", front.zero_bracket_max);
    println!("max RH residual: {:e}", states.iter().map(|s| s.rh_residual).fold(0.0, f64::max));
    println!("wrote front.csv, roots.csv");
    Ok(())
}

fn min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Solution and gradient on an `n_t × n_x` cell-centred grid around `(T*(y), x*(y))`.
/// Points on the shock or where the Jacobian vanishes are skipped.
pub fn field_table(p: &Problem, win: &Window, y: f64, t_span: f64, x_span: f64, n_t: usize, n_x: usize) -> Result<Vec<FieldSample>> {
    let g = win.gamma.at(p, y)?;
    let node = |k: usize, n: usize| -1.0 + (2 * k + 1) as f64 / n as f64;
    let mut out = Vec::with_capacity(n_t * n_x);
    for i in 0..n_t {
        let t = g.t_star + t_span * node(i, n_t);
        for j in 0..n_x {
            let x = g.x_tangent(t) + x_span * node(j, n_x);
            match eval_gradient(p, win, t, x, y) {
                Ok(fs) => out.push(fs),
                Err(Error::OnShock | Error::JacobianVanishing { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

/// The standard ray set at `y`.
pub fn standard_rays(y: f64, r_max: f64, n: usize) -> Vec<RaySpec> {
    use Quantity::*;
    use RayDirection::*;
    [
        (XAtFixedT, UIncrement, 1.0),
        (XAtFixedT, UIncrement, -1.0),
        (XAtFixedT, Dx, 1.0),
        (XAtFixedT, Dx, -1.0),
        (TAtFixedX, Dx, -1.0),
        (Tangent, Grad, -1.0),
    ]
    .into_iter()
    .map(|(direction, quantity, side)| RaySpec { y, direction, quantity, side, r_max, n })
    .collect()
}

pub fn fit_rays(p: &Problem, win: &Window, rays: &[RaySpec]) -> Result<Vec<ExponentFit>> {
    rays.iter().map(|r| fit_exponent(p, win, r)).collect()
}

/// Largest relative gap between the exact gradient and central differences of `u` at
/// `count` Halton points of the field window. Stencils that touch the shock are skipped.
pub fn gradient_check(p: &Problem, win: &Window, y: f64, span: (f64, f64), h: f64, count: usize, seed: u64) -> Result<(f64, usize)> {
    let g = win.gamma.at(p, y)?;
    let (mut worst, mut used) = (0.0f64, 0usize);
    for k in 0..count {
        let idx = k + 1 + seed as usize;
        let t = g.t_star + span.0 * (2.0 * halton(idx, 2) - 1.0);
        let x = g.x_tangent(t) + span.1 * (2.0 * halton(idx, 3) - 1.0);
        let yy = y + span.1 * (2.0 * halton(idx, 5) - 1.0);
        let exact = match eval_gradient(p, win, t, x, yy) {
            Ok(fs) => fs,
            Err(Error::OnShock | Error::JacobianVanishing { .. }) => continue,
            Err(e) => return Err(e),
        };
        let side = exact.branch;
        let u = |t: f64, x: f64, y: f64| -> Result<Option<f64>> {
            match eval_solution(p, win, t, x, y) {
                Ok(fs) if fs.branch == side || fs.branch == crate::multivalued_inversion::Branch::Center => Ok(Some(fs.u)),
                Ok(_) | Err(Error::OnShock) => Ok(None),
                Err(e) => Err(e),
            }
        };
        let pts = [(t + h, x, yy), (t - h, x, yy), (t, x + h, yy), (t, x - h, yy), (t, x, yy + h), (t, x, yy - h)];
        let vals: Vec<Option<f64>> = pts.iter().map(|&(a, b, c)| u(a, b, c)).collect::<Result<_>>()?;
        if vals.iter().any(|v| v.is_none()) {
            continue;
        }
        let v: Vec<f64> = vals.into_iter().flatten().collect();
        let fd = [(v[0] - v[1]) / (2.0 * h), (v[2] - v[3]) / (2.0 * h), (v[4] - v[5]) / (2.0 * h)];
        let gr = exact.grad.expect("gradient filled");
        let norm = gr.iter().map(|q| q * q).sum::<f64>().sqrt().max(1.0);
        let gap = (0..3).map(|i| (gr[i] - fd[i]).abs()).fold(0.0, f64::max) / norm;
        worst = worst.max(gap);
        used += 1;
    }
    Ok((worst, used))
}

fn field(cfg: &RunConfig) -> Result<()> {
    let s = Session::new(cfg)?;
    let gm = s.gamma()?;
    let front = s.front(&gm)?;
    let win = Window::new(&gm, Some(&front));
    let p = &s.problem;
    let f = &cfg.field;
    let y = s.y_focus(f.y);
    let t_span = f.t_span.min(front.eps);
    let samples = field_table(p, &win, y, t_span, f.x_span, f.n_t, f.n_x)?;
    write_csv(&path(cfg, "field.csv"), FIELD_HEADER, &samples.iter().map(field_row).collect::<Vec<_>>())?;
    let e = &cfg.exponents;
    let ye = s.y_focus(e.y);
    let fits = fit_rays(p, &win, &standard_rays(ye, e.r_max, e.n))?;
    write_csv(&path(cfg, "exponents.csv"), EXPONENTS_HEADER, &fits.iter().map(exponent_row).collect::<Vec<_>>())?;
    for fit in &fits {
        println!(
            "{} {} side {:+}: slope {:.4} ± {:.1e}, R² {:.6}",
            fit.ray.quantity.name(),
            fit.ray.direction.name(),
            fit.ray.side,
            fit.slope,
            fit.stderr,
            fit.r2
        );
    }
    let coarse = gauge_sups(p, &win, ye, e.gauge_h, e.gauge_n)?;
    let fine = gauge_sups(p, &win, ye, e.gauge_h, 2 * e.gauge_n)?;
    println!("gauge sups n={}: e0 {:.6} e1 {:.6} eT {:.6}", e.gauge_n, coarse.e0, coarse.e1, coarse.e_t);
    println!("gauge sups n={}: e0 {:.6} e1 {:.6} eT {:.6}", 2 * e.gauge_n, fine.e0, fine.e1, fine.e_t);
    let (gap, used) = gradient_check(p, &win, y, (t_span, f.x_span), f.fd_step, f.gradient_checks, cfg.seed)?;
    println!("gradient vs central differences: max relative gap {gap:.2e} over {used} points");
    println!("wrote field.csv, exponents.csv");
    Ok(())
}

/// Godunov run writing `fv_field.csv` at `t_end` and `fv_field_NNN.csv` at each intermediate
/// snapshot.
pub fn run_reference(p: &Problem, cfg: &RunConfig, dir: &Path) -> Result<FieldGrid> {
    let fv = &cfg.fv;
    let stops: Vec<f64> = (1..=fv.snapshots).map(|k| fv.t_end * k as f64 / (fv.snapshots + 1) as f64).collect();
    let mut written = 0usize;
    let mut failure: Option<Error> = None;
    let grid = run_fv_observed(p, &fv.grid_spec(), fv.t_end, &stops, |g| {
        if written < stops.len() && g.t == stops[written] {
            written += 1;
            let name = format!("fv_field_{written:03}.csv");
            if let Err(e) = write_csv(&dir.join(name), FV_FIELD_HEADER, &fv_rows(g)) {
                failure.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    write_csv(&dir.join("fv_field.csv"), FV_FIELD_HEADER, &fv_rows(&grid))?;
    Ok(grid)
}

fn reference(cfg: &RunConfig) -> Result<()> {
    let mut fv_cfg = cfg.clone();
    fv_cfg.domain = cfg.fv.domain;
    let s = Session::new(&fv_cfg)?;
    let p = &s.problem;
    let grid = run_reference(p, cfg, &cfg.out)?;
    let (lo, hi) = grid.bounds();
    println!("Godunov {}×{} to t = {} in {} steps", grid.nx, grid.ny, grid.t, grid.steps);
    println!("bounds [{lo}, {hi}] within initial [{}, {}]", grid.initial_bounds.0, grid.initial_bounds.1);
    println!("max mass drift per step: {:e}", grid.max_mass_drift);
    let gm = s.gamma()?;
    if grid.t <= s.gnc.t_star0 + DETECTION_DELAY {
        let win = Window::new(&gm, None);
        let err = smooth_error(p, &grid, &win, cfg.fv.x_half)?;
        println!("smooth regime: max |u_fv − u| = {err:e}");
        println!("wrote fv_field.csv");
        return Ok(());
    }
    let front = s.front(&gm)?;
    let win = Window::new(&gm, Some(&front));
    let cmp = compare_fv(p, &grid, &win, cfg.fv.x_half)?;
    write_csv(&path(cfg, "fv_compare.csv"), FV_COMPARE_HEADER, &cmp.rows.iter().map(fv_compare_row).collect::<Vec<_>>())?;
    println!("banded L1 error: {:e} over {} cells", cmp.banded_l1, cmp.compared_cells);
    match cmp.offset_at_y0 {
        Some(o) => println!("shock offset at y0: {o:.3} cells"),
        None => println!("shock offset at y0: not detected"),
    }
    println!("wrote fv_field.csv, fv_compare.csv");
    Ok(())
}
