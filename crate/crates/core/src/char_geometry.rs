//! Characteristic geometry: the forward map `(ξ, η) ↦ (ξ + tφ, η + tψ)`, the implicit
//! solve `η = Y(t, ξ, y)` of `y = η + tψ(ξ, η)` with its derivative jet, and the Jacobian
//! `D = 1 + tH`.

use crate::error::{Error, Result};
use crate::numerics::rtsafe;
use crate::problem_model::{phi_psi_unchecked, Jet2, PhiPsiJet, Problem};

/// `η = Y(t, ξ, y)` with the partials needed by the cusp coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YJet {
    pub eta: f64,
    pub y_t: f64,
    pub y_xi: f64,
    pub y_y: f64,
    pub y_txi: f64,
    pub y_xixi: f64,
    pub y_xixixi: f64,
    pub y_xiy: f64,
    /// `|y − η − tψ(ξ, η)|`
    pub residual: f64,
}

pub const DEGENERATE_K: f64 = 1e-6;
const RESIDUAL_TOL: f64 = 1e-12;

pub fn forward_char(p: &Problem, t: f64, xi: f64, eta: f64) -> Result<(f64, f64)> {
    p.check_domain(xi, eta)?;
    let j = phi_psi_unchecked(p, xi, eta, 0);
    Ok((xi + t * j.phi(), eta + t * j.psi()))
}

pub fn jacobian_d(p: &Problem, t: f64, xi: f64, eta: f64) -> Result<f64> {
    p.check_domain(xi, eta)?;
    let j = phi_psi_unchecked(p, xi, eta, 1);
    Ok(1.0 + t * (j.phi_xi() + j.psi_eta()))
}

/// Closed-form implicit derivatives of `Y` at a solved point, from the `ψ` jet there.
pub fn y_jet_from(t: f64, eta: f64, psi: &Jet2, residual: f64) -> YJet {
    let k = 1.0 + t * psi.get(0, 1);
    let y_t = -psi.value() / k;
    let y_xi = -t * psi.get(1, 0) / k;
    let y_y = 1.0 / k;
    let (p20, p11, p02) = (psi.get(2, 0), psi.get(1, 1), psi.get(0, 2));
    let y_xixi = -t * (p20 + 2.0 * p11 * y_xi + p02 * y_xi * y_xi) / k;
    let y_xixixi = -t
        * (psi.get(3, 0)
            + 3.0 * psi.get(2, 1) * y_xi
            + 3.0 * psi.get(1, 2) * y_xi * y_xi
            + psi.get(0, 3) * y_xi.powi(3)
            + 3.0 * p11 * y_xixi
            + 3.0 * p02 * y_xi * y_xixi)
        / k;
    let y_txi = -(psi.get(1, 0) + t * p11 * y_t + (psi.get(0, 1) + t * p02 * y_t) * y_xi) / k;
    let y_xiy = -t * (p11 + p02 * y_xi) * y_y / k;
    YJet { eta, y_t, y_xi, y_y, y_txi, y_xixi, y_xixixi, y_xiy, residual }
}

/// Solve `y = η + tψ(ξ, η)` for `η`: Newton from `η = y`, falling back to a bracket grown
/// around `y` and a safeguarded Newton/bisection.
pub fn solve_eta(p: &Problem, t: f64, xi: f64, y: f64) -> Result<f64> {
    let dom = p.domain();
    if !(dom.x_lo - 1e-12..=dom.x_hi + 1e-12).contains(&xi) {
        return Err(Error::OutOfDomain { xi, eta: y });
    }
    let g = |eta: f64| {
        let j = phi_psi_unchecked(p, xi, eta, 1);
        (eta + t * j.psi() - y, 1.0 + t * j.psi_eta())
    };
    let tol = RESIDUAL_TOL * 0.01 * (1.0 + y.abs());
    let mut eta = y;
    let mut converged = false;
    for _ in 0..40 {
        let (r, dr) = g(eta);
        if r.abs() <= tol {
            converged = true;
            break;
        }
        if dr.abs() < DEGENERATE_K || !dr.is_finite() {
            break;
        }
        let next = eta - r / dr;
        if !next.is_finite() || next < dom.y_lo - 1.0 || next > dom.y_hi + 1.0 {
            break;
        }
        eta = next;
    }
    if !converged {
        let mut d = 1e-3 * (1.0 + y.abs());
        let mut bracket = None;
        while d < 4.0 * (dom.y_hi - dom.y_lo) {
            let (lo, hi) = (y - d, y + d);
            if g(lo).0.signum() != g(hi).0.signum() {
                bracket = Some((lo, hi));
                break;
            }
            d *= 2.0;
        }
        let (lo, hi) = bracket.ok_or_else(|| Error::NewtonDiverged {
            context: format!("Y solve at t={t}, xi={xi}, y={y}: no bracket"),
        })?;
        eta = rtsafe(|e| Some(g(e)), lo, hi, Some(eta), 1e-16, 200).ok_or_else(|| Error::NewtonDiverged {
            context: format!("Y solve at t={t}, xi={xi}, y={y}"),
        })?;
    }
    let (r, k) = g(eta);
    if k.abs() < DEGENERATE_K {
        return Err(Error::DegenerateImplicit { t, xi, k });
    }
    if r.abs() > RESIDUAL_TOL * (1.0 + y.abs()) {
        return Err(Error::NewtonDiverged { context: format!("Y residual {r:e} at t={t}, xi={xi}, y={y}") });
    }
    p.check_domain(xi, eta)?;
    Ok(eta)
}

/// Everything known at a point `(t, ξ, y)` of the characteristic parametrisation.
#[derive(Clone, Copy, Debug)]
pub struct CharPoint {
    pub t: f64,
    pub xi: f64,
    pub y: f64,
    pub yj: YJet,
    pub pp: PhiPsiJet,
}

/// Solve for `η` and evaluate the `φ`/`ψ` jets there up to total order `order`.
pub fn char_point(p: &Problem, t: f64, xi: f64, y: f64, order: usize) -> Result<CharPoint> {
    let eta = solve_eta(p, t, xi, y)?;
    let pp = phi_psi_unchecked(p, xi, eta, order);
    let residual = (y - eta - t * pp.psi()).abs();
    Ok(CharPoint { t, xi, y, yj: y_jet_from(t, eta, &pp.psi, residual), pp })
}

pub fn solve_y(p: &Problem, t: f64, xi: f64, y: f64) -> Result<YJet> {
    Ok(char_point(p, t, xi, y, 4)?.yj)
}

/// Derivatives of `g(ξ, Y(t, ξ, y))` with respect to `t`, `ξ`, `y` at fixed other arguments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlongY {
    pub v: f64,
    pub d_xi: f64,
    pub d_xixi: f64,
    pub d_xixixi: f64,
    pub d_t: f64,
    pub d_txi: f64,
    pub d_y: f64,
    pub d_xiy: f64,
}

pub fn along_y(g: &Jet2, yj: &YJet) -> AlongY {
    let (yx, yxx) = (yj.y_xi, yj.y_xixi);
    let g = |i, j| g.get(i, j);
    AlongY {
        v: g(0, 0),
        d_xi: g(1, 0) + g(0, 1) * yx,
        d_xixi: g(2, 0) + 2.0 * g(1, 1) * yx + g(0, 2) * yx * yx + g(0, 1) * yxx,
        d_xixixi: g(3, 0)
            + 3.0 * g(2, 1) * yx
            + 3.0 * g(1, 2) * yx * yx
            + g(0, 3) * yx.powi(3)
            + 3.0 * g(1, 1) * yxx
            + 3.0 * g(0, 2) * yx * yxx
            + g(0, 1) * yj.y_xixixi,
        d_t: g(0, 1) * yj.y_t,
        d_txi: g(1, 1) * yj.y_t + g(0, 2) * yj.y_t * yx + g(0, 1) * yj.y_txi,
        d_y: g(0, 1) * yj.y_y,
        d_xiy: g(1, 1) * yj.y_y + g(0, 2) * yj.y_y * yx + g(0, 1) * yj.y_xiy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem_model::{preset, PresetId};

    #[test]
    fn forward_char_examples() {
        let p = preset(PresetId::A);
        assert_eq!(forward_char(&p, 1.0, 0.0, 0.0).unwrap(), (0.0, 0.0));
        let (x, y) = forward_char(&p, 0.5, 0.2, 0.0).unwrap();
        assert!((x - 0.104).abs() < 1e-15 && y == 0.0);
        assert_eq!(forward_char(&p, 0.0, 0.3, -0.1).unwrap(), (0.3, -0.1));
        assert!(forward_char(&p, 0.0, 0.6, 0.0).is_err());
    }

    #[test]
    fn jacobian_examples() {
        let p = preset(PresetId::A);
        assert_eq!(jacobian_d(&p, 1.0, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(jacobian_d(&p, 0.5, 0.0, 0.0).unwrap(), 0.5);
        assert_eq!(jacobian_d(&p, 0.0, 0.3, 0.2).unwrap(), 1.0);
    }

    #[test]
    fn preset_a_y_is_identity() {
        let p = preset(PresetId::A);
        let yj = solve_y(&p, 0.8, 0.2, 0.1).unwrap();
        assert_eq!(yj.eta, 0.1);
        assert_eq!((yj.y_t, yj.y_xi, yj.y_y), (0.0, 0.0, 1.0));
    }

    #[test]
    fn preset_b_y_examples() {
        let p = preset(PresetId::B);
        assert_eq!(solve_y(&p, 0.0, 0.1, 0.2).unwrap().eta, 0.2);
        let yj = solve_y(&p, 0.5, 0.0, 0.1).unwrap();
        // u0(0, η) = 0 so ψ(0, η) = 0 and Y = y
        assert!((yj.eta - 0.1).abs() < 1e-15);
        let yj = solve_y(&p, 0.5, 0.3, 0.1).unwrap();
        let psi = p.g_jet(p.u0(0.3, yj.eta))[0];
        assert!((yj.eta + 0.5 * psi - 0.1).abs() <= 1e-12);
    }

    #[test]
    fn y_partials_match_differences() {
        let p = preset(PresetId::B);
        let (t, xi, y) = (0.9, 0.25, 0.15);
        let yj = solve_y(&p, t, xi, y).unwrap();
        let h = 1e-5;
        let e = |t: f64, xi: f64, y: f64| solve_eta(&p, t, xi, y).unwrap();
        let d_t = (e(t + h, xi, y) - e(t - h, xi, y)) / (2.0 * h);
        let d_xi = (e(t, xi + h, y) - e(t, xi - h, y)) / (2.0 * h);
        let d_y = (e(t, xi, y + h) - e(t, xi, y - h)) / (2.0 * h);
        let rel = |a: f64, b: f64| (a - b).abs() / (1e-8 + a.abs());
        assert!(rel(yj.y_t, d_t) < 1e-6);
        assert!(rel(yj.y_xi, d_xi) < 1e-6);
        assert!(rel(yj.y_y, d_y) < 1e-6);
        let yx = |t: f64, xi: f64, y: f64| solve_y(&p, t, xi, y).unwrap().y_xi;
        let d_xixi = (yx(t, xi + h, y) - yx(t, xi - h, y)) / (2.0 * h);
        let d_txi = (yx(t + h, xi, y) - yx(t - h, xi, y)) / (2.0 * h);
        let d_xiy = (yx(t, xi, y + h) - yx(t, xi, y - h)) / (2.0 * h);
        assert!(rel(yj.y_xixi, d_xixi) < 1e-6);
        assert!(rel(yj.y_txi, d_txi) < 1e-6);
        assert!(rel(yj.y_xiy, d_xiy) < 1e-6);
        let yxx = |xi: f64| solve_y(&p, t, xi, y).unwrap().y_xixi;
        let d3 = (yxx(xi + h) - yxx(xi - h)) / (2.0 * h);
        assert!(rel(yj.y_xixixi, d3) < 1e-5);
    }
}
