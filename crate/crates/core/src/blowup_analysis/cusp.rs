//! Cusp geometry at a point of Γ: the coefficients `D₀..D₃`, `A₁`, `A₂`, `a*`, `b*`, `c₁`,
//! `c₂`, `θ₀` and the fold boundary of the cusp region for `t > T*(y)`.

use crate::char_geometry::{along_y, char_point};
use crate::error::{Error, Result};
use crate::numerics::rtsafe;
use crate::problem_model::{eval_phi_psi, h_from_phi_psi, Problem};

use super::curve::GammaSample;
use super::gnc::GncReport;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CuspCoeffs {
    pub y: f64,
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub a1: f64,
    pub a2: f64,
    pub a_star: f64,
    pub b_star: f64,
    pub c1: f64,
    pub c2: f64,
    pub theta0: f64,
}

/// Evaluate every coefficient exactly at `(T*(y), Ξ*(y), Y*(y))`.
pub fn cusp_coeffs(p: &Problem, g: &GammaSample) -> Result<CuspCoeffs> {
    let t = g.t_star;
    let cp = char_point(p, t, g.xi_star, g.y, 4)?;
    let h = h_from_phi_psi(&cp.pp);
    let ah = along_y(&h.h, &cp.yj);
    let aphi = along_y(&cp.pp.phi, &cp.yj);
    let d0 = -(ah.v + t * ah.d_t);
    let d1 = 0.5 * t * ah.d_xixi;
    let d2 = t * ah.d_txi;
    let a_star = ah.d_xixixi / 6.0;
    let d3 = a_star * t;
    let sign = |coeff: &'static str, value: f64| {
        if value > 0.0 {
            Ok(())
        } else {
            Err(Error::SignViolation { y: g.y, coeff, value })
        }
    };
    sign("D0", d0)?;
    sign("D1", d1)?;
    let a1 = (d0 / d1).sqrt();
    let a2 = -(d1 * d2 + d0 * d3) / (2.0 * d1 * d1);
    let b_star = -a1 * t * aphi.d_txi - a1 * ah.v - t / 6.0 * a1.powi(3) * aphi.d_xixixi;
    let c1 = -(t * aphi.d_txi + aphi.d_xi);
    let c2 = t / 6.0 * aphi.d_xixixi;
    let theta0 = (cp.pp.psi_xi() / cp.pp.phi_xi()).powi(2);
    sign("A1", a1)?;
    sign("b_star", b_star)?;
    sign("c1", c1)?;
    sign("c2", c2)?;
    Ok(CuspCoeffs { y: g.y, d0, d1, d2, d3, a1, a2, a_star, b_star, c1, c2, theta0 })
}

/// Leading-order forms of `c₁`, `c₂`, `A₁`, `b*` built from `∂ξφ` and `θ₀` at the first
/// blowup point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeadingForms {
    pub c1: f64,
    pub c2: f64,
    pub a1: f64,
    pub b_star: f64,
}

pub fn leading_forms(p: &Problem, gnc: &GncReport) -> Result<LeadingForms> {
    let j = eval_phi_psi(p, gnc.argmin.0, gnc.argmin.1)?;
    let px = j.phi_xi();
    let th = (j.psi_xi() / px).powi(2);
    let root = (3.0 + 3.0 * th).sqrt();
    Ok(LeadingForms { c1: -1.0 / px, c2: -(1.0 + th) / px, a1: 1.0 / root, b_star: -2.0 / (3.0 * px * root) })
}

/// Fold points of `ξ ↦ ξ + tφ(ξ, Y(t, ξ, y))` and their images.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Folds {
    pub xi_lo: f64,
    pub xi_hi: f64,
    /// Image of `xi_hi`: the left edge of the cusp.
    pub x_left: f64,
    /// Image of `xi_lo`: the right edge of the cusp.
    pub x_right: f64,
}

/// `Φ(ξ) = ξ + tφ(ξ, Y(t, ξ, y))` with `Φ'` and `Φ''`.
pub fn char_map(p: &Problem, t: f64, xi: f64, y: f64, order: usize) -> Result<(f64, f64, f64)> {
    let cp = char_point(p, t, xi, y, order)?;
    let a = along_y(&cp.pp.phi, &cp.yj);
    Ok((xi + t * a.v, 1.0 + t * a.d_xi, if order >= 2 { t * a.d_xixi } else { f64::NAN }))
}

pub fn folds(p: &Problem, g: &GammaSample, c: &CuspCoeffs, t: f64) -> Result<Folds> {
    let dt = t - g.t_star;
    if dt < -1e-14 {
        return Err(Error::BeforeBlowup { t, t_star: g.t_star });
    }
    if dt <= 1e-14 {
        return Ok(Folds { xi_lo: g.xi_star, xi_hi: g.xi_star, x_left: g.x_star, x_right: g.x_star });
    }
    let not_found = || Error::FoldNotFound { t, y: g.y };
    let dphi = |xi: f64| char_map(p, t, xi, g.y, 2).ok().map(|(_, d1, d2)| (d1, d2));
    let centre = g.xi_star + c.a2 * dt;
    let inner = [centre, g.xi_star].into_iter().find(|&x| dphi(x).is_some_and(|(v, _)| v < 0.0)).ok_or_else(not_found)?;
    let half = c.a1 * dt.sqrt();
    let mut ends = [0.0; 2];
    for (k, sgn) in [-1.0, 1.0].into_iter().enumerate() {
        let mut w = 1.1 * half;
        let mut outer = None;
        for _ in 0..40 {
            let x = inner + sgn * w;
            match dphi(x) {
                Some((v, _)) if v > 0.0 => {
                    outer = Some(x);
                    break;
                }
                Some(_) => w *= 1.15,
                None => break,
            }
        }
        let outer = outer.ok_or_else(not_found)?;
        let seed = g.xi_star + sgn * half + c.a2 * dt;
        ends[k] = rtsafe(dphi, inner, outer, Some(seed), 1e-16, 200).ok_or_else(not_found)?;
    }
    let x_right = char_map(p, t, ends[0], g.y, 1)?.0;
    let x_left = char_map(p, t, ends[1], g.y, 1)?.0;
    Ok(Folds { xi_lo: ends[0], xi_hi: ends[1], x_left, x_right })
}

/// Numeric cusp edges `(x_minus, x_plus)` at time `t ≥ T*(y)`.
pub fn cusp_boundary(p: &Problem, g: &GammaSample, c: &CuspCoeffs, t: f64) -> Result<(f64, f64)> {
    let f = folds(p, g, c, t)?;
    Ok((f.x_left, f.x_right))
}

/// The expansion `x** ∓ b*(t − T*)^{3/2}` of the cusp edges.
pub fn cusp_boundary_expansion(g: &GammaSample, c: &CuspCoeffs, t: f64) -> (f64, f64) {
    let w = c.b_star * (t - g.t_star).max(0.0).powf(1.5);
    let x = g.x_tangent(t);
    (x - w, x + w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup_analysis::{blowup_curve, find_first_blowup};
    use crate::numerics::loglog_fit;
    use crate::problem_model::{preset, PresetId};

    fn setup(id: PresetId, y: f64) -> (Problem, GammaSample, CuspCoeffs) {
        let p = preset(id);
        let g = find_first_blowup(&p).unwrap();
        let s = blowup_curve(&p, &g, &[y]).unwrap()[0];
        let c = cusp_coeffs(&p, &s).unwrap();
        (p, s, c)
    }

    #[test]
    fn preset_a_coefficients_at_origin() {
        let (_, _, c) = setup(PresetId::A, 0.0);
        assert!((c.c1 - 1.0).abs() < 1e-12 && (c.c2 - 1.0).abs() < 1e-12 && c.theta0 == 0.0);
        assert!((c.a1 - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!((c.b_star - 2.0 / (3.0 * 3f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn preset_a_coefficients_off_axis() {
        let (_, s, c) = setup(PresetId::A, 0.1);
        let a = 0.97;
        assert!((c.c1 - a).abs() < 1e-12 && (c.c2 - 1.0 / a).abs() < 1e-12);
        assert!((c.d0 - a).abs() < 1e-12 && (c.d1 - 3.0 / a).abs() < 1e-12);
        assert!((c.a1 - a / 3f64.sqrt()).abs() < 1e-12);
        assert!((s.t_star - 1.0 / a).abs() < 1e-12);
    }

    #[test]
    fn preset_a_fold_points() {
        let (p, s, c) = setup(PresetId::A, 0.0);
        let t = 1.01f64;
        let f = folds(&p, &s, &c, t).unwrap();
        let xf = ((t - 1.0) / (3.0 * t)).sqrt();
        assert!((f.xi_hi - xf).abs() < 1e-12 && (f.xi_lo + xf).abs() < 1e-12);
        let w = f.x_right - f.x_left;
        assert!((w / (2.0 * c.b_star * 0.01f64.powf(1.5)) - 1.0).abs() < 0.05);
        assert_eq!(cusp_boundary(&p, &s, &c, 1.0).unwrap(), (0.0, 0.0));
        assert!(matches!(cusp_boundary(&p, &s, &c, 0.99), Err(Error::BeforeBlowup { .. })));
    }

    #[test]
    fn cusp_width_scaling_exponent() {
        for id in [PresetId::A, PresetId::B] {
            let (p, s, c) = setup(id, 0.05);
            let dts: Vec<f64> = (0..9).map(|k| 1e-4 * 10f64.powf(k as f64 * 0.25)).collect();
            let ws: Vec<f64> = dts
                .iter()
                .map(|dt| {
                    let (a, b) = cusp_boundary(&p, &s, &c, s.t_star + dt).unwrap();
                    b - a
                })
                .collect();
            let fit = loglog_fit(&dts, &ws);
            assert!((fit.slope - 1.5).abs() < 0.02, "{id:?}: {fit:?}");
            let pref = fit.intercept.exp();
            assert!((pref / (2.0 * c.b_star) - 1.0).abs() < 0.1, "{id:?}: {pref} vs {}", 2.0 * c.b_star);
        }
    }
}
