//! The blowup curve Γ: for each `y`, the solution `(T*, Ξ*)` of `D = 1 + tH(ξ, Y) = 0`,
//! `D' = ∂ξ[H(ξ, Y(t, ξ, y))] = 0`, traced by Newton continuation from the first blowup point.

use crate::char_geometry::{along_y, char_point, CharPoint};
use crate::error::{Error, Result};
use crate::problem_model::{h_from_phi_psi, Problem};

use super::gnc::GncReport;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaSample {
    pub y: f64,
    pub t_star: f64,
    pub xi_star: f64,
    pub y_star: f64,
    pub x_star: f64,
    pub tangent_slope: f64,
    /// `max(|D|, |D'|)` at the accepted iterate.
    pub residual: f64,
    /// Determinant of `∂(D, D')/∂(t, ξ)`.
    pub det: f64,
    pub h_star: f64,
    pub dt_dy: f64,
    pub dxi_dy: f64,
    pub dystar_dy: f64,
    pub dx_dy: f64,
    pub dtangent_dy: f64,
}

impl GammaSample {
    /// `x**(t, y) = x*(y) + tangent·(t − T*(y))`.
    pub fn x_tangent(&self, t: f64) -> f64 {
        self.x_star + self.tangent_slope * (t - self.t_star)
    }
}

pub const NEWTON_TARGET: f64 = 1e-12;
pub const NEWTON_ACCEPT: f64 = 1e-10;
pub const NEWTON_MAX_ITER: usize = 50;
pub const DET_GUARD: f64 = 1e-6;

struct Eval {
    cp: CharPoint,
    d: f64,
    dp: f64,
    jac: [[f64; 2]; 2],
    rhs_y: [f64; 2],
}

fn evaluate(p: &Problem, t: f64, xi: f64, y: f64, order: usize) -> Result<Eval> {
    let cp = char_point(p, t, xi, y, order)?;
    let h = h_from_phi_psi(&cp.pp);
    let a = along_y(&h.h, &cp.yj);
    let d = 1.0 + t * a.v;
    let dp = a.d_xi;
    let jac = [[a.v + t * a.d_t, t * a.d_xi], [a.d_txi, a.d_xixi]];
    Ok(Eval { cp, d, dp, jac, rhs_y: [t * a.d_y, a.d_xiy] })
}

fn res(e: &Eval) -> f64 {
    e.d.abs().max(e.dp.abs())
}

fn finish(y: f64, e: &Eval) -> Result<GammaSample> {
    let [[a, b], [c, d]] = e.jac;
    let det = a * d - b * c;
    if det.abs() < DET_GUARD {
        return Err(Error::JacobianNearSingular { y, det });
    }
    let cp = &e.cp;
    let (t, xi) = (cp.t, cp.xi);
    let pp = &cp.pp;
    let (phi, psi) = (pp.phi(), pp.psi());
    let (px, pe) = (pp.phi_xi(), pp.phi_eta());
    let tangent = phi + psi * pe / px;
    // implicit derivatives along Γ
    let [ry0, ry1] = e.rhs_y;
    let dt = -(d * ry0 - b * ry1) / det;
    let dxi = -(a * ry1 - c * ry0) / det;
    let yj = &cp.yj;
    let dys = yj.y_t * dt + yj.y_xi * dxi + yj.y_y;
    let dx = dxi + dt * phi + t * (px * dxi + pe * dys);
    let (pxx, pxe, pee) = (pp.phi.get(2, 0), pp.phi.get(1, 1), pp.phi.get(0, 2));
    let (sx, se) = (pp.psi_xi(), pp.psi_eta());
    let tau_xi = px + sx * pe / px + psi * (pxe * px - pe * pxx) / (px * px);
    let tau_eta = pe + se * pe / px + psi * (pee * px - pe * pxe) / (px * px);
    Ok(GammaSample {
        y,
        t_star: t,
        xi_star: xi,
        y_star: yj.eta,
        x_star: xi + t * phi,
        tangent_slope: tangent,
        residual: res(e),
        det,
        h_star: pp.phi_xi() + pp.psi_eta(),
        dt_dy: dt,
        dxi_dy: dxi,
        dystar_dy: dys,
        dx_dy: dx,
        dtangent_dy: tau_xi * dxi + tau_eta * dys,
    })
}

/// Damped Newton on `(D, D')(t, ξ) = 0` at fixed `y` from the seed `(t, ξ)`.
pub fn gamma_newton(p: &Problem, y: f64, seed: (f64, f64)) -> Result<GammaSample> {
    let diverged = |why: &str| Error::NewtonDiverged { context: format!("blowup curve at y={y}: {why}") };
    let (mut t, mut xi) = seed;
    let mut e = evaluate(p, t, xi, y, 3)?;
    let mut r = res(&e);
    for _ in 0..NEWTON_MAX_ITER {
        if r <= NEWTON_TARGET {
            break;
        }
        let [[a, b], [c, d]] = e.jac;
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::JacobianNearSingular { y, det });
        }
        let st = (d * e.d - b * e.dp) / det;
        let sx = (a * e.dp - c * e.d) / det;
        let mut lam = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let (nt, nx) = (t - lam * st, xi - lam * sx);
            if let Ok(ne) = evaluate(p, nt, nx, y, 3) {
                let nr = res(&ne);
                if nr < r || nr <= NEWTON_TARGET {
                    t = nt;
                    xi = nx;
                    e = ne;
                    r = nr;
                    accepted = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if !(r <= NEWTON_ACCEPT) {
        return Err(diverged(&format!("residual {r:e}")));
    }
    let e = evaluate(p, t, xi, y, 4)?;
    finish(y, &e)
}

/// Trace Γ from the first blowup point to each requested `y`, halving the continuation
/// step on failure. Samples are returned in the order of `y_grid`.
pub fn blowup_curve(p: &Problem, gnc: &GncReport, y_grid: &[f64]) -> Result<Vec<GammaSample>> {
    let start = gamma_newton(p, gnc.y0, (gnc.t_star0, gnc.argmin.0))?;
    let mut out: Vec<Option<GammaSample>> = vec![None; y_grid.len()];
    for dir in [1.0, -1.0] {
        let mut idx: Vec<usize> = (0..y_grid.len()).filter(|&i| (y_grid[i] - gnc.y0) * dir >= 0.0).collect();
        idx.sort_by(|&a, &b| ((y_grid[a] - gnc.y0) * dir).total_cmp(&((y_grid[b] - gnc.y0) * dir)));
        let mut cur = start;
        for i in idx {
            cur = continue_to(p, &cur, y_grid[i])?;
            out[i] = Some(cur);
        }
    }
    Ok(out.into_iter().map(|s| s.expect("every y visited")).collect())
}

pub const MAX_CONT_STEP: f64 = 0.02;

/// Continue from a converged sample to `y_target` with a tangent predictor.
pub fn continue_to(p: &Problem, from: &GammaSample, y_target: f64) -> Result<GammaSample> {
    let mut cur = *from;
    let mut step = MAX_CONT_STEP;
    while (y_target - cur.y).abs() > 0.0 {
        let dy = (y_target - cur.y).clamp(-step, step);
        let y = if (y_target - cur.y).abs() <= step { y_target } else { cur.y + dy };
        let seed = (cur.t_star + cur.dt_dy * (y - cur.y), cur.xi_star + cur.dxi_dy * (y - cur.y));
        match gamma_newton(p, y, seed) {
            Ok(s) => {
                cur = s;
                step = (step * 2.0).min(MAX_CONT_STEP);
            }
            Err(e) => {
                step *= 0.5;
                if step < 1e-7 {
                    return Err(e);
                }
            }
        }
    }
    Ok(cur)
}
