//! The shock front `x = w(t, y)` issuing from Γ: Rankine–Hugoniot coefficients in the
//! desingularised variables `(s, λ)`, the front characteristics `(y(s; β), Λ(s; β))`, and
//! the trace states with their RH and entropy checks.

pub mod ivp;

use rayon::prelude::*;

use crate::blowup_analysis::{CuspCoeffs, Gamma, GammaSample};
use crate::error::{Error, Result};
use crate::multivalued_inversion::{invert_with, Branch, OPEN_TOL};
use crate::char_geometry::solve_eta;
use crate::numerics::{depressed_cubic_roots, lagrange_weights, stencil_start};
use crate::problem_model::Problem;

pub use ivp::{solve_singular_ivp, solve_singular_ivp_with, IvpSolution, IvpTuning, SingularIvpSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrontCoeffs {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub f_avg: f64,
    pub g_avg: f64,
    pub dtstar_dy: f64,
    /// `φ* − (1 − ψ* T*')τ − ψ* x*'`, identically zero on exact Γ data.
    pub zero_bracket: f64,
    pub u_minus: f64,
    pub u_plus: f64,
}

/// Below this jump the divided differences are replaced by the flux derivative at the mean.
pub const JUMP_FLOOR: f64 = 1e-14;
pub const ZERO_BRACKET_MAX: f64 = 1e-6;
/// Below this `s` the cusp is narrower than the resolution of `x` and the outer branches
/// come from the roots of `−c₁μ + c₂μ³ = λ`.
pub const S_RESOLVE: f64 = 1e-4;

/// `[F(u)]/[u]` and `[G(u)]/[u]`.
pub fn jump_averages(p: &Problem, um: f64, up: f64) -> (f64, f64) {
    if (up - um).abs() <= JUMP_FLOOR {
        return p.speeds(0.5 * (up + um));
    }
    let (fm, gm) = p.fluxes(um);
    let (fp, gp) = p.fluxes(up);
    ((fp - fm) / (up - um), (gp - gm) / (up - um))
}

pub fn zero_bracket(p: &Problem, g: &GammaSample) -> f64 {
    let (phi, psi) = p.speeds(p.u0(g.xi_star, g.y_star));
    phi - (1.0 - psi * g.dt_dy) * g.tangent_slope - psi * g.dx_dy
}

/// `(u₋, u₊)` at `t = T* + s²`, `x = x** + s³λ`; equal at `s = 0`.
pub fn trace_pair(p: &Problem, g: &GammaSample, c: &CuspCoeffs, s: f64, lambda: f64) -> Result<(f64, f64)> {
    let t = g.t_star + s * s;
    let x = g.x_tangent(t) + s * s * s * lambda;
    let unavailable = || Error::BranchUnavailable { t, x, y: g.y };
    if s * s <= OPEN_TOL {
        let r = invert_with(p, g, c, t, x)?.roots[0];
        let u = p.u0(r.xi, r.eta);
        return Ok((u, u));
    }
    if s < S_RESOLVE {
        let mu = depressed_cubic_roots(c.c2, -c.c1, -lambda);
        if mu.len() != 3 {
            return Err(unavailable());
        }
        let side = |m: f64| -> Result<f64> {
            let xi = g.xi_star + s * m;
            Ok(p.u0(xi, solve_eta(p, t, xi, g.y)?))
        };
        return Ok((side(mu[0])?, side(mu[2])?));
    }
    let roots = invert_with(p, g, c, t, x)?;
    let m = roots.branch(Branch::Minus).ok_or_else(unavailable)?;
    let pl = roots.branch(Branch::Plus).ok_or_else(unavailable)?;
    Ok((p.u0(m.xi, m.eta), p.u0(pl.xi, pl.eta)))
}

/// `C₀`, `C₁`, `C₂` at `(s, λ)` from the Γ point at `y`.
pub fn front_coefficients_at(p: &Problem, g: &GammaSample, c: &CuspCoeffs, s: f64, lambda: f64) -> Result<FrontCoeffs> {
    let zb = zero_bracket(p, g);
    if zb.abs() > ZERO_BRACKET_MAX {
        return Err(Error::CancellationResidual { value: zb });
    }
    let (um, up) = trace_pair(p, g, c, s, lambda)?;
    let (fa, ga) = jump_averages(p, um, up);
    let k = 1.0 - ga * g.dt_dy;
    let bracket = fa - k * g.tangent_slope - ga * g.dx_dy;
    let c2 = -1.5 * lambda * k - s * ga * g.dtangent_dy + bracket / s;
    Ok(FrontCoeffs {
        c0: 0.5 * k,
        c1: ga,
        c2,
        f_avg: fa,
        g_avg: ga,
        dtstar_dy: g.dt_dy,
        zero_bracket: zb,
        u_minus: um,
        u_plus: up,
    })
}

pub fn front_coefficients(p: &Problem, gm: &Gamma, s: f64, lambda: f64, y: f64) -> Result<FrontCoeffs> {
    let (g, c) = gm.coeffs_at(p, y)?;
    front_coefficients_at(p, &g, &c, s, lambda)
}

/// `α = −∂(C₂/C₀)/∂λ` at `λ = 0`, by a central difference at `s`.
pub fn measure_alpha(p: &Problem, g: &GammaSample, c: &CuspCoeffs, s: f64) -> Result<f64> {
    let h = 1e-3;
    let q = |l: f64| front_coefficients_at(p, g, c, s, l).map(|fc| fc.c2 / fc.c0);
    Ok(-(q(h)? - q(-h)?) / (2.0 * h))
}

#[derive(Clone, Debug)]
pub struct FrontConfig {
    pub beta: Vec<f64>,
    /// Time window: the front is built for `0 ≤ t − T*(y) ≤ eps`.
    pub eps: f64,
    pub n_s: usize,
    pub m_bound: f64,
    pub tuning: IvpTuning,
}

impl FrontConfig {
    pub fn new(beta: Vec<f64>, eps: f64) -> Self {
        FrontConfig { beta, eps, n_s: 33, m_bound: 100.0, tuning: IvpTuning::default() }
    }
}

/// Uniform `β` grid over the central 60% of the Γ window, covering `|y − y₀| ≤ δ/2` once
/// the front characteristics drift.
pub fn default_beta(gm: &Gamma, n: usize) -> Vec<f64> {
    beta_grid(gm.gnc.y0 - 0.6 * gm.delta, gm.gnc.y0 + 0.6 * gm.delta, n)
}

/// Uniform `β` grid of `n` points on `[lo, hi]`.
pub fn beta_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

#[derive(Clone, Debug)]
pub struct ShockFront {
    pub gamma: Gamma,
    pub eps: f64,
    pub horizon: f64,
    pub s_grid: Vec<f64>,
    pub beta: Vec<f64>,
    /// `y[k][i] = y(s_i; β_k)`
    pub y: Vec<Vec<f64>>,
    /// `lam[k][i] = Λ(s_i; β_k)`
    pub lam: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub s0: Vec<f64>,
    pub picard_max_ratio: f64,
    pub m_bound: f64,
    /// `max |Λ|/s` over the grid.
    pub m_estimate: f64,
    /// Set when `m_estimate` exceeds `m_bound`; reported, not fatal.
    pub m_flagged: bool,
    pub c0_range: (f64, f64),
    pub zero_bracket_max: f64,
    pub dy_dbeta_range: (f64, f64),
}

pub const C0_RANGE: (f64, f64) = (0.25, 0.75);
pub const DY_DBETA_RANGE: (f64, f64) = (0.25, 4.0);

struct Column {
    sol: IvpSolution,
    alpha: f64,
    c0: (f64, f64),
    zb: f64,
}

fn solve_column(p: &Problem, gm: &Gamma, cfg: &FrontConfig, horizon: f64, s_grid: &[f64], beta: f64) -> Result<Column> {
    let (g, c) = gm.coeffs_at(p, beta)?;
    let alpha = measure_alpha(p, &g, &c, horizon / 16.0)?;
    if alpha < 2.0 {
        return Err(Error::SignViolation { y: beta, coeff: "alpha - 2", value: alpha - 2.0 });
    }
    let stats = std::sync::Mutex::new(((f64::INFINITY, f64::NEG_INFINITY), 0.0f64));
    let rhs = |s: f64, l: f64, y: f64| -> Result<(f64, f64)> {
        let fc = front_coefficients(p, gm, s, l, y)?;
        let mut st = stats.lock().expect("stats lock");
        st.0 .0 = st.0 .0.min(fc.c0);
        st.0 .1 = st.0 .1.max(fc.c0);
        st.1 = st.1.max(fc.zero_bracket.abs());
        Ok((fc.c1 / fc.c0, fc.c2 / fc.c0))
    };
    let spec = SingularIvpSpec { rhs: &rhs, alpha, m_bound: cfg.m_bound, horizon };
    let sol = solve_singular_ivp_with(&spec, beta, s_grid, &cfg.tuning)?;
    let (c0, zb) = stats.into_inner().expect("stats lock");
    Ok(Column { sol, alpha, c0, zb })
}

/// Solve the front characteristics for every `β` and assemble the `(s, β)` tables.
pub fn solve_front(p: &Problem, gm: &Gamma, cfg: &FrontConfig) -> Result<ShockFront> {
    let horizon = cfg.eps.sqrt();
    let n = cfg.n_s;
    let s_grid: Vec<f64> = (0..n).map(|i| horizon * i as f64 / (n - 1) as f64).collect();
    let cols: Vec<Column> = cfg
        .beta
        .par_iter()
        .map(|&b| solve_column(p, gm, cfg, horizon, &s_grid, b))
        .collect::<Result<Vec<_>>>()?;
    let mut c0_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut zb_max: f64 = 0.0;
    let mut ratio: f64 = 0.0;
    let mut m_est: f64 = 0.0;
    for col in &cols {
        c0_range = (c0_range.0.min(col.c0.0), c0_range.1.max(col.c0.1));
        zb_max = zb_max.max(col.zb);
        ratio = ratio.max(col.sol.max_ratio);
        m_est = m_est.max(col.sol.max_lambda_over_s);
    }
    if c0_range.0 < C0_RANGE.0 {
        return Err(Error::WindowExceeded { what: "C0", value: c0_range.0, limit: C0_RANGE.0 });
    }
    if c0_range.1 > C0_RANGE.1 {
        return Err(Error::WindowExceeded { what: "C0", value: c0_range.1, limit: C0_RANGE.1 });
    }
    let y: Vec<Vec<f64>> = cols.iter().map(|c| c.sol.values.iter().map(|v| v.1).collect()).collect();
    let lam: Vec<Vec<f64>> = cols.iter().map(|c| c.sol.values.iter().map(|v| v.0).collect()).collect();
    let mut dyb = (f64::INFINITY, f64::NEG_INFINITY);
    if cfg.beta.len() >= 2 {
        let width = 5.min(cfg.beta.len());
        for i in 0..n {
            for (k, &b) in cfg.beta.iter().enumerate() {
                let st = stencil_start(&cfg.beta, b, width);
                let (_, dw) = lagrange_weights(&cfg.beta[st..st + width], b);
                let d: f64 = (0..width).map(|j| dw[j] * y[st + j][i]).sum();
                dyb = (dyb.0.min(d), dyb.1.max(d));
                if !(DY_DBETA_RANGE.0..=DY_DBETA_RANGE.1).contains(&d) {
                    return Err(Error::MonotonicityLost { s: s_grid[i], beta: cfg.beta[k], dy_dbeta: d });
                }
            }
        }
    }
    Ok(ShockFront {
        gamma: gm.clone(),
        eps: cfg.eps,
        horizon,
        s_grid,
        beta: cfg.beta.clone(),
        y,
        lam,
        alpha: cols.iter().map(|c| c.alpha).collect(),
        s0: cols.iter().map(|c| c.sol.s0).collect(),
        picard_max_ratio: ratio,
        m_bound: cfg.m_bound,
        m_estimate: m_est,
        m_flagged: m_est > cfg.m_bound,
        c0_range,
        zero_bracket_max: zb_max,
        dy_dbeta_range: dyb,
    })
}

/// The front at `(t, y)` in desingularised form.
#[derive(Clone, Copy, Debug)]
pub struct FrontPoint {
    pub g: GammaSample,
    pub c: CuspCoeffs,
    pub s: f64,
    pub beta: f64,
    pub lambda: f64,
    /// `∂λ/∂s` at fixed `y`.
    pub lambda_s: f64,
    /// `∂λ/∂y` at fixed `s`.
    pub lambda_y: f64,
    pub w: f64,
    pub dw_dt: f64,
    pub dw_dy: f64,
}

const STENCIL: usize = 5;

impl ShockFront {
    /// Front position and derivatives at `(t, y)`, `0 ≤ t − T*(y) ≤ eps`.
    pub fn locate(&self, p: &Problem, t: f64, y: f64) -> Result<FrontPoint> {
        let (g, c) = self.gamma.coeffs_at(p, y)?;
        let dt = t - g.t_star;
        if dt < -1e-14 {
            return Err(Error::BeforeBlowup { t, t_star: g.t_star });
        }
        let s = dt.max(0.0).sqrt();
        if s > self.horizon * (1.0 + 1e-12) {
            return Err(Error::OutsideWindow { t, y });
        }
        let w_s = STENCIL.min(self.s_grid.len());
        let is = stencil_start(&self.s_grid, s, w_s);
        let (ws, dws) = lagrange_weights(&self.s_grid[is..is + w_s], s);
        let col = |tab: &Vec<Vec<f64>>, k: usize, wt: &[f64]| -> f64 { (0..w_s).map(|j| wt[j] * tab[k][is + j]).sum() };
        let nb = self.beta.len();
        let yk: Vec<f64> = (0..nb).map(|k| col(&self.y, k, &ws)).collect();
        let ysk: Vec<f64> = (0..nb).map(|k| col(&self.y, k, &dws)).collect();
        let lk: Vec<f64> = (0..nb).map(|k| col(&self.lam, k, &ws)).collect();
        let lsk: Vec<f64> = (0..nb).map(|k| col(&self.lam, k, &dws)).collect();
        if y < yk[0] - 1e-14 || y > yk[nb - 1] + 1e-14 {
            return Err(Error::OutsideWindow { t, y });
        }
        // β with y(s; β) = y: linear guess, then Newton on the local Lagrange interpolant
        let k = yk.partition_point(|v| *v <= y).clamp(1, nb - 1);
        let frac = (y - yk[k - 1]) / (yk[k] - yk[k - 1]);
        let mut beta = self.beta[k - 1] + frac * (self.beta[k] - self.beta[k - 1]);
        let w_b = STENCIL.min(nb);
        let ib = stencil_start(&self.beta, beta, w_b);
        let nodes = &self.beta[ib..ib + w_b];
        let dot = |wt: &[f64], v: &[f64]| -> f64 { (0..w_b).map(|j| wt[j] * v[ib + j]).sum() };
        for _ in 0..30 {
            let (wb, dwb) = lagrange_weights(nodes, beta);
            let f = dot(&wb, &yk) - y;
            let df = dot(&dwb, &yk);
            let step = f / df;
            beta -= step;
            if step.abs() <= 1e-16 * (1.0 + beta.abs()) {
                break;
            }
        }
        let (wb, dwb) = lagrange_weights(nodes, beta);
        let lambda = dot(&wb, &lk);
        let lam_beta = dot(&dwb, &lk);
        let lam_s = dot(&wb, &lsk);
        let y_s = dot(&wb, &ysk);
        let y_beta = dot(&dwb, &yk);
        let lambda_y = lam_beta / y_beta;
        let lambda_s = lam_s - lam_beta * y_s / y_beta;
        let tau = g.tangent_slope;
        let w = g.x_star + tau * s * s + s * s * s * lambda;
        let dw_dt = tau + 1.5 * s * lambda + 0.5 * s * s * lambda_s;
        let dw_dy = g.dx_dy + g.dtangent_dy * s * s - tau * g.dt_dy + s.powi(3) * lambda_y
            - g.dt_dy * (1.5 * s * lambda + 0.5 * s * s * lambda_s);
        Ok(FrontPoint { g, c, s, beta, lambda, lambda_s, lambda_y, w, dw_dt, dw_dy })
    }

    /// `y` range covered at every `s`.
    pub fn y_range(&self) -> (f64, f64) {
        let lo = self.y[0].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let hi = self.y[self.y.len() - 1].iter().copied().fold(f64::INFINITY, f64::min);
        (lo, hi)
    }

    pub fn w(&self, p: &Problem, t: f64, y: f64) -> Result<f64> {
        Ok(self.locate(p, t, y)?.w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrontState {
    pub t: f64,
    pub y: f64,
    pub t_star: f64,
    pub w: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    pub dw_dt: f64,
    pub dw_dy: f64,
    pub rh_residual: f64,
    pub entropy_margin_plus: f64,
    pub entropy_margin_minus: f64,
}

/// Trace states on both sides of the front at `(t, y)` with their RH and entropy data.
pub fn front_states(front: &ShockFront, p: &Problem, t: f64, y: f64) -> Result<FrontState> {
    let fp = front.locate(p, t, y)?;
    let (um, up) = trace_pair(p, &fp.g, &fp.c, fp.s, fp.lambda)?;
    let mut st = FrontState {
        t,
        y,
        t_star: fp.g.t_star,
        w: fp.w,
        u_minus: um,
        u_plus: up,
        dw_dt: fp.dw_dt,
        dw_dy: fp.dw_dy,
        rh_residual: 0.0,
        entropy_margin_plus: 0.0,
        entropy_margin_minus: 0.0,
    };
    st.rh_residual = rh_residual(&st, p);
    let (mp, mm) = entropy_margins(&st, p);
    st.entropy_margin_plus = mp;
    st.entropy_margin_minus = mm;
    Ok(st)
}

/// Time past `T*(y)` after which a vanishing jump or a closed entropy gap is an error.
pub const OPEN_GUARD: f64 = 1e-6;
pub const ENTROPY_SLACK: f64 = 1e-12;

fn rh_residual(st: &FrontState, p: &Problem) -> f64 {
    let du = st.u_plus - st.u_minus;
    let (fp, gp) = p.fluxes(st.u_plus);
    let (fm, gm) = p.fluxes(st.u_minus);
    (st.dw_dt * du - (fp - fm) + st.dw_dy * (gp - gm)).abs() / du.abs().max(JUMP_FLOOR)
}

fn entropy_margins(st: &FrontState, p: &Problem) -> (f64, f64) {
    let (fp, gp) = p.speeds(st.u_plus);
    let (fm, gm) = p.speeds(st.u_minus);
    (st.dw_dt - (fp - st.dw_dy * gp), (fm - st.dw_dy * gm) - st.dw_dt)
}

/// `|∂tw[u] − [F] + ∂yw[G]| / |[u]|`.
pub fn check_rh(st: &FrontState, p: &Problem) -> Result<f64> {
    if (st.u_plus - st.u_minus).abs() <= JUMP_FLOOR && st.t > st.t_star + OPEN_GUARD {
        return Err(Error::DegenerateJump);
    }
    Ok(rh_residual(st, p))
}

/// `(margin_plus, margin_minus)`; both must be positive once the shock has formed.
pub fn check_entropy(st: &FrontState, p: &Problem) -> Result<(f64, f64)> {
    let (mp, mm) = entropy_margins(st, p);
    if st.t > st.t_star + OPEN_GUARD && (mp <= -ENTROPY_SLACK || mm <= -ENTROPY_SLACK) {
        return Err(Error::EntropyViolated { margin_plus: mp, margin_minus: mm });
    }
    Ok((mp, mm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup_analysis::find_first_blowup;
    use crate::problem_model::{preset, PresetId};

    fn gamma(p: &Problem) -> Gamma {
        Gamma::build(p, &find_first_blowup(p).unwrap(), 0.4).unwrap()
    }

    #[test]
    fn preset_a_coefficients() {
        let p = preset(PresetId::A);
        let gm = gamma(&p);
        for (s, l, y) in [(0.1, 0.0, 0.0), (0.05, 0.1, 0.1), (0.2, -0.05, -0.1)] {
            let fc = front_coefficients(&p, &gm, s, l, y).unwrap();
            assert_eq!((fc.c1, fc.c0), (0.0, 0.5));
        }
        let fc = front_coefficients(&p, &gm, 0.1, 0.0, 0.0).unwrap();
        assert!(fc.f_avg.abs() < 1e-15);
        let s = 1e-2;
        let fc = front_coefficients(&p, &gm, s, 1e-3, 0.0).unwrap();
        assert!((fc.c2 / 1e-3 + 2.0).abs() < 0.01, "{}", fc.c2 / 1e-3);
    }

    #[test]
    fn preset_b_zero_bracket_vanishes() {
        let p = preset(PresetId::B);
        let gm = gamma(&p);
        for g in &gm.samples {
            assert!(zero_bracket(&p, g).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_matches_leading_coefficient() {
        let p = preset(PresetId::A);
        let gm = gamma(&p);
        let (g, c) = gm.coeffs_at(&p, 0.0).unwrap();
        let a = measure_alpha(&p, &g, &c, 1e-2).unwrap();
        assert!((a - 4.0).abs() < 0.01, "{a}");
    }

    fn synthetic() -> FrontState {
        FrontState {
            t: 1.01,
            y: 0.0,
            t_star: 1.0,
            w: 0.0,
            u_minus: 0.1,
            u_plus: -0.1,
            dw_dt: 0.0,
            dw_dy: 0.0,
            rh_residual: 0.0,
            entropy_margin_plus: 0.0,
            entropy_margin_minus: 0.0,
        }
    }

    #[test]
    fn rh_residual_is_linear_in_speed_error() {
        let p = preset(PresetId::A);
        let mut st = synthetic();
        assert!(check_rh(&st, &p).unwrap() < 1e-15);
        st.dw_dt = 1e-3;
        assert!((check_rh(&st, &p).unwrap() - 1e-3).abs() < 1e-15);
        st.u_plus = st.u_minus;
        assert!(matches!(check_rh(&st, &p), Err(Error::DegenerateJump)));
    }

    #[test]
    fn swapped_states_violate_entropy() {
        let p = preset(PresetId::A);
        let mut st = synthetic();
        let (a, b) = check_entropy(&st, &p).unwrap();
        assert!((a - 0.1).abs() < 1e-15 && (b - 0.1).abs() < 1e-15);
        std::mem::swap(&mut st.u_minus, &mut st.u_plus);
        assert!(matches!(check_entropy(&st, &p), Err(Error::EntropyViolated { .. })));
    }
}
