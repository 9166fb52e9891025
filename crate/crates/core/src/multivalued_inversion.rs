//! Inversion of the characteristic map near Γ: all real roots `ξ` of
//! `x = ξ + tφ(ξ, Y(t, ξ, y))`, their branch labels, and the asymptotic expansions of the
//! roots in the scaled variables, which serve as oracles and Newton seeds.

use crate::blowup_analysis::{char_map, folds, CuspCoeffs, Gamma, GammaSample};
use crate::char_geometry::char_point;
use crate::error::{Error, Result};
use crate::numerics::{depressed_cubic_roots, rtsafe};
use crate::problem_model::Problem;

/// Scaled coordinates of `(t, x)` relative to the Γ point at `y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledCoords {
    /// `√|t − T*(y)|`
    pub s: f64,
    /// `ς / s³`; infinite at `s = 0` with `ς ≠ 0`.
    pub lambda: f64,
    /// `∛ς`
    pub zeta: f64,
    /// `(t − T*(y)) / ζ²`
    pub eta_scaled: f64,
    /// `(ξ − Ξ*(y)) / ζ` when a root is supplied.
    pub nu: Option<f64>,
    /// `x − x**(t, y)`
    pub varsigma: f64,
}

impl ScaledCoords {
    pub fn new(g: &GammaSample, t: f64, x: f64, xi: Option<f64>) -> Self {
        let dt = t - g.t_star;
        let s = dt.abs().sqrt();
        let varsigma = x - g.x_tangent(t);
        let zeta = varsigma.cbrt();
        ScaledCoords {
            s,
            lambda: varsigma / (s * s * s),
            zeta,
            eta_scaled: dt / (zeta * zeta),
            nu: xi.map(|xi| (xi - g.xi_star) / zeta),
            varsigma,
        }
    }

    /// Inverse map `(s, λ) ↦ (t, x)` after blowup.
    pub fn post_point(g: &GammaSample, s: f64, lambda: f64) -> (f64, f64) {
        let t = g.t_star + s * s;
        (t, g.x_tangent(t) + s * s * s * lambda)
    }

    /// Inverse map `(s, λ) ↦ (t, x)` before blowup.
    pub fn pre_point(g: &GammaSample, s: f64, lambda: f64) -> (f64, f64) {
        let t = g.t_star - s * s;
        (t, g.x_tangent(t) + s * s * s * lambda)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    PreBlowup,
    InsideCusp,
    OutsideLeft,
    OutsideRight,
    Boundary,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::PreBlowup => "pre_blowup",
            Region::InsideCusp => "inside_cusp",
            Region::OutsideLeft => "outside_left",
            Region::OutsideRight => "outside_right",
            Region::Boundary => "boundary",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    Minus,
    Center,
    Plus,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Minus => "minus",
            Branch::Center => "center",
            Branch::Plus => "plus",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub xi: f64,
    pub eta: f64,
    pub branch: Branch,
    pub residual: f64,
    pub jacobian_d: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CharRoots {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub region: Region,
    /// Ascending in `ξ`.
    pub roots: Vec<Root>,
}

impl CharRoots {
    pub fn branch(&self, b: Branch) -> Option<&Root> {
        self.roots.iter().find(|r| r.branch == b)
    }
}

/// Distance in `x` from a fold image below which the two merging roots are reported once.
pub const BOUNDARY_TOL: f64 = 1e-8;
/// Cap on the boundary tolerance as a fraction of the cusp width.
pub const BOUNDARY_WIDTH_FRACTION: f64 = 1e-4;
pub const RESIDUAL_MAX: f64 = 1e-10;
/// `t − T*(y)` below which the cusp has not opened.
pub const OPEN_TOL: f64 = 1e-14;

/// Grow outward from `start` in direction `dir` until `Φ(ξ) − x` changes sign.
fn bracket_outward(
    phi: &dyn Fn(f64) -> Option<(f64, f64)>,
    x: f64,
    start: f64,
    dir: f64,
    h0: f64,
) -> Option<(f64, f64)> {
    let f0 = phi(start)?.0 - x;
    if f0 == 0.0 {
        return Some((start, start));
    }
    let mut prev = start;
    let mut h = h0;
    for _ in 0..80 {
        let next = start + dir * h;
        let Some((v, _)) = phi(next) else {
            // shrink toward the last valid point until the domain edge is reached
            let mut lo = prev;
            let mut hi = next;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                match phi(mid) {
                    Some((v, _)) if (v - x).signum() != f0.signum() => return Some((prev, mid)),
                    Some(_) => lo = mid,
                    None => hi = mid,
                }
            }
            return None;
        };
        if (v - x).signum() != f0.signum() {
            return Some((prev, next));
        }
        prev = next;
        h *= 2.0;
    }
    None
}

fn solve_piece(p: &Problem, t: f64, x: f64, y: f64, lo: f64, hi: f64, seed: Option<f64>) -> Result<f64> {
    if lo == hi {
        return Ok(lo);
    }
    let f = |xi: f64| char_map(p, t, xi, y, 1).ok().map(|(v, d, _)| (v - x, d));
    rtsafe(f, lo, hi, seed, 1e-16, 300).ok_or_else(|| Error::NewtonDiverged {
        context: format!("characteristic inversion at t={t}, x={x}, y={y} on [{lo}, {hi}]"),
    })
}

fn make_root(p: &Problem, t: f64, x: f64, y: f64, xi: f64, branch: Branch) -> Result<Root> {
    make_root_tol(p, t, x, y, xi, branch, RESIDUAL_MAX)
}

fn make_root_tol(p: &Problem, t: f64, x: f64, y: f64, xi: f64, branch: Branch, tol: f64) -> Result<Root> {
    let cp = char_point(p, t, xi, y, 1)?;
    let phi = cp.pp.phi();
    let residual = (x - xi - t * phi).abs();
    if residual > tol * (1.0 + x.abs()) {
        return Err(Error::ResidualTooLarge { residual });
    }
    let d = 1.0 + t * (cp.pp.phi_xi() + cp.pp.psi_eta());
    Ok(Root { xi, eta: cp.yj.eta, branch, residual, jacobian_d: d })
}

/// All real roots near Γ at `(t, x, y)`, labelled by region and branch.
pub fn invert_point(p: &Problem, gm: &Gamma, t: f64, x: f64, y: f64) -> Result<CharRoots> {
    let (g, c) = gm.coeffs_at(p, y)?;
    invert_with(p, &g, &c, t, x)
}

/// [`invert_point`] with the Γ point and coefficients already resolved.
pub fn invert_with(p: &Problem, g: &GammaSample, c: &CuspCoeffs, t: f64, x: f64) -> Result<CharRoots> {
    let y = g.y;
    let dt = t - g.t_star;
    let phi = |xi: f64| char_map(p, t, xi, y, 1).ok().map(|(v, d, _)| (v, d));
    let scale = (c.a1 * dt.abs().sqrt()).max(1e-4);
    let out = |region, roots| Ok(CharRoots { t, x, y, region, roots });
    let no_bracket = || Error::RootCountUnexpected { region: "bracket search".into(), found: 0 };
    if dt <= OPEN_TOL {
        let start = g.xi_star;
        let f0 = phi(start).ok_or_else(no_bracket)?.0 - x;
        let dir = if f0 < 0.0 { 1.0 } else { -1.0 };
        let (a, b) = bracket_outward(&phi, x, start, dir, scale).ok_or_else(no_bracket)?;
        let xi = solve_piece(p, t, x, y, a, b, None)?;
        let branch = if x < g.x_tangent(t) { Branch::Minus } else { Branch::Plus };
        return out(Region::PreBlowup, vec![make_root(p, t, x, y, xi, branch)?]);
    }
    let f = folds(p, g, c, t)?;
    let left = || -> Result<Root> {
        let (a, b) = bracket_outward(&phi, x, f.xi_lo, -1.0, scale).ok_or_else(no_bracket)?;
        let xi = solve_piece(p, t, x, y, a, b, None)?;
        make_root(p, t, x, y, xi, Branch::Minus)
    };
    let right = || -> Result<Root> {
        let (a, b) = bracket_outward(&phi, x, f.xi_hi, 1.0, scale).ok_or_else(no_bracket)?;
        let xi = solve_piece(p, t, x, y, a, b, None)?;
        make_root(p, t, x, y, xi, Branch::Plus)
    };
    // the merged double root sits at the fold, so its residual is the distance to the fold image
    let fold_tol = BOUNDARY_TOL + RESIDUAL_MAX;
    // a cusp narrower than the tolerance would otherwise be all boundary
    let btol = BOUNDARY_TOL.min(BOUNDARY_WIDTH_FRACTION * (f.x_right - f.x_left));
    if (x - f.x_left).abs() <= btol {
        let merged = make_root_tol(p, t, x, y, f.xi_hi, Branch::Plus, fold_tol)?;
        return out(Region::Boundary, vec![left()?, merged]);
    }
    if (x - f.x_right).abs() <= btol {
        let merged = make_root_tol(p, t, x, y, f.xi_lo, Branch::Minus, fold_tol)?;
        return out(Region::Boundary, vec![merged, right()?]);
    }
    if x < f.x_left {
        return out(Region::OutsideLeft, vec![left()?]);
    }
    if x > f.x_right {
        return out(Region::OutsideRight, vec![right()?]);
    }
    let xi_c = solve_piece(p, t, x, y, f.xi_lo, f.xi_hi, None)?;
    let roots = vec![left()?, make_root(p, t, x, y, xi_c, Branch::Center)?, right()?];
    if !(roots[0].xi < roots[1].xi && roots[1].xi < roots[2].xi) {
        return Err(Error::RootCountUnexpected { region: Region::InsideCusp.name().into(), found: 3 });
    }
    out(Region::InsideCusp, roots)
}

fn window(what: &'static str, value: f64, limit: f64) -> Result<()> {
    if value.abs() < limit {
        Ok(())
    } else {
        Err(Error::WindowExceeded { what, value, limit })
    }
}

/// `Ξ* + s(±√(c₁/c₂) + λ/(2c₁))`.
pub fn xi_pm_expansion(g: &GammaSample, c: &CuspCoeffs, s: f64, lambda: f64, win: f64) -> Result<(f64, f64)> {
    window("s", s, win)?;
    window("lambda", lambda, win)?;
    let r = (c.c1 / c.c2).sqrt();
    let shift = lambda / (2.0 * c.c1);
    Ok((g.xi_star + s * (-r + shift), g.xi_star + s * (r + shift)))
}

/// Guard on `−c₁ + 3c₂μ_c²` relative to `c₁`.
pub const DENOM_GUARD: f64 = 1e-6;

/// Root `μ_c` of `−c₁μ + c₂μ³ = c` on the requested outer branch.
pub fn offset_root(c: &CuspCoeffs, cc: f64, branch: Branch) -> Result<f64> {
    let roots = depressed_cubic_roots(c.c2, -c.c1, -cc);
    let fold = (c.c1 / (3.0 * c.c2)).sqrt();
    let mu = match branch {
        Branch::Plus => roots.last().copied().filter(|&m| m > fold),
        Branch::Minus => roots.first().copied().filter(|&m| m < -fold),
        Branch::Center => roots.iter().copied().find(|m| m.abs() < fold).filter(|_| roots.len() == 3),
    };
    mu.ok_or(Error::CubicBranchMissing { c: cc })
}

/// `Ξ* + s(μ_c + (λ − c)/(−c₁ + 3c₂μ_c²))` on the plus or minus family.
pub fn xi_offset_expansion(
    g: &GammaSample,
    c: &CuspCoeffs,
    cc: f64,
    s: f64,
    lambda: f64,
    branch: Branch,
) -> Result<f64> {
    let mu = offset_root(c, cc, branch)?;
    let den = -c.c1 + 3.0 * c.c2 * mu * mu;
    if den.abs() < DENOM_GUARD * c.c1 {
        return Err(Error::DenominatorSmall { value: den });
    }
    Ok(g.xi_star + s * (mu + (lambda - cc) / den))
}

/// `Ξ* + ζ(c₂^{-1/3} + c₁η/(3c₂^{2/3}))` in the variables `ζ = ∛ς`, `η = (t − T*)/ζ²`.
pub fn xi_center_expansion(g: &GammaSample, c: &CuspCoeffs, zeta: f64, eta_scaled: f64, win: f64) -> Result<f64> {
    window("zeta", zeta, win)?;
    if eta_scaled.abs() > win {
        return Err(Error::WindowExceeded { what: "eta_scaled", value: eta_scaled, limit: win });
    }
    let c2r = c.c2.cbrt();
    Ok(g.xi_star + zeta * (1.0 / c2r + c.c1 * eta_scaled / (3.0 * c2r * c2r)))
}

/// Unique real root of `c₁μ + c₂μ³ = c`.
pub fn pre_root(c: &CuspCoeffs, cc: f64) -> f64 {
    depressed_cubic_roots(c.c2, c.c1, -cc)[0]
}

/// `Ξ* + s(μ̃_c + (λ − c)/(c₁ + 3c₂μ̃_c²))` with `s = √(T* − t)`.
pub fn xi_pre_expansion(g: &GammaSample, c: &CuspCoeffs, cc: f64, s: f64, lambda: f64) -> f64 {
    let mu = pre_root(c, cc);
    g.xi_star + s * (mu + (lambda - cc) / (c.c1 + 3.0 * c.c2 * mu * mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup_analysis::find_first_blowup;
    use crate::problem_model::{preset, PresetId};

    fn setup(id: PresetId) -> (Problem, Gamma) {
        let p = preset(id);
        let g = find_first_blowup(&p).unwrap();
        let gm = Gamma::build(&p, &g, 0.4).unwrap();
        (p, gm)
    }

    #[test]
    fn three_roots_inside_cusp() {
        let (p, gm) = setup(PresetId::A);
        let r = invert_point(&p, &gm, 1.01, 0.0, 0.0).unwrap();
        assert_eq!(r.region, Region::InsideCusp);
        let want = (0.01f64 / 1.01).sqrt();
        let xs: Vec<f64> = r.roots.iter().map(|q| q.xi).collect();
        assert!((xs[0] + want).abs() < 1e-12 && xs[1].abs() < 1e-12 && (xs[2] - want).abs() < 1e-12);
        assert!((want - 0.0995037).abs() < 1e-7);
        assert!(r.roots.iter().all(|q| q.residual <= 1e-12));
        assert_eq!(r.roots.iter().map(|q| q.branch).collect::<Vec<_>>(), [Branch::Minus, Branch::Center, Branch::Plus]);
    }

    #[test]
    fn single_root_before_and_at_blowup() {
        let (p, gm) = setup(PresetId::A);
        let r = invert_point(&p, &gm, 0.99, 0.001, 0.0).unwrap();
        assert_eq!(r.region, Region::PreBlowup);
        assert_eq!(r.roots.len(), 1);
        let xi = r.roots[0].xi;
        assert!((0.01 * xi + 0.99 * xi.powi(3) - 0.001).abs() < 1e-15);
        assert!((xi - 0.068_365_95).abs() < 1e-8);
        let r = invert_point(&p, &gm, 1.0, 0.001, 0.0).unwrap();
        assert!((r.roots[0].xi - 0.1).abs() < 1e-12);
    }

    #[test]
    fn outside_and_boundary_regions() {
        let (p, gm) = setup(PresetId::A);
        let t = 1.01;
        let (g, c) = gm.coeffs_at(&p, 0.0).unwrap();
        let f = folds(&p, &g, &c, t).unwrap();
        let r = invert_point(&p, &gm, t, f.x_right + 1e-4, 0.0).unwrap();
        assert_eq!((r.region, r.roots.len(), r.roots[0].branch), (Region::OutsideRight, 1, Branch::Plus));
        let r = invert_point(&p, &gm, t, f.x_left - 1e-4, 0.0).unwrap();
        assert_eq!((r.region, r.roots.len(), r.roots[0].branch), (Region::OutsideLeft, 1, Branch::Minus));
        let r = invert_point(&p, &gm, t, f.x_left + 1e-9, 0.0).unwrap();
        assert_eq!((r.region, r.roots.len()), (Region::Boundary, 2));
    }

    #[test]
    fn preset_b_roots_reproduce_point() {
        let (p, gm) = setup(PresetId::B);
        let y = 0.1;
        let (g, _) = gm.coeffs_at(&p, y).unwrap();
        let t = g.t_star + 0.02;
        let r = invert_point(&p, &gm, t, g.x_tangent(t) + 1e-4, y).unwrap();
        assert_eq!(r.region, Region::InsideCusp);
        for q in &r.roots {
            let (xf, yf) = crate::char_geometry::forward_char(&p, t, q.xi, q.eta).unwrap();
            assert!((xf - r.x).abs() < 1e-10 && (yf - y).abs() < 1e-10);
        }
        assert!(r.roots[0].jacobian_d > 0.0 && r.roots[1].jacobian_d < 0.0 && r.roots[2].jacobian_d > 0.0);
    }

    #[test]
    fn pm_expansion_examples() {
        let (p, gm) = setup(PresetId::A);
        let (g, c) = gm.coeffs_at(&p, 0.0).unwrap();
        let err = |s: f64| {
            let (_, xp) = xi_pm_expansion(&g, &c, s, 0.0, 1.0).unwrap();
            let r = invert_point(&p, &gm, 1.0 + s * s, 0.0, 0.0).unwrap();
            (xp - r.roots[2].xi).abs()
        };
        let (e1, e2) = (err(0.1), err(0.05));
        assert!((e1 - 4.96e-4).abs() < 1e-6, "{e1}");
        // at λ = 0 the first correction vanishes, so the error is s(1 - 1/√(1+s²)) = O(s³)
        assert!((e2 - 6.238e-5).abs() < 1e-7, "{e2}");
        assert!(e1 / e2 >= 4.0);
        assert_eq!(xi_pm_expansion(&g, &c, 0.0, 0.0, 1.0).unwrap(), (0.0, 0.0));
        assert!(matches!(xi_pm_expansion(&g, &c, 0.5, 0.0, 0.25), Err(Error::WindowExceeded { .. })));
    }

    #[test]
    fn offset_expansion_examples() {
        let (p, gm) = setup(PresetId::A);
        let (g, c) = gm.coeffs_at(&p, 0.0).unwrap();
        assert!((offset_root(&c, 0.0, Branch::Plus).unwrap() - 1.0).abs() < 1e-14);
        let a = xi_offset_expansion(&g, &c, 0.0, 0.05, 0.01, Branch::Plus).unwrap();
        let b = xi_pm_expansion(&g, &c, 0.05, 0.01, 1.0).unwrap().1;
        assert!((a - b).abs() < 1e-15);
        let mu = offset_root(&c, 1.0, Branch::Plus).unwrap();
        assert!((mu - 1.324_717_957_244_746).abs() < 1e-12);
        let xi = xi_offset_expansion(&g, &c, 1.0, 0.05, 1.0, Branch::Plus).unwrap();
        let (t, x) = ScaledCoords::post_point(&g, 0.05, 1.0);
        let r = invert_point(&p, &gm, t, x, 0.0).unwrap();
        assert!((xi - r.roots.last().unwrap().xi).abs() < 0.05 * 0.05);
        assert!(matches!(offset_root(&c, -0.5, Branch::Plus), Err(Error::CubicBranchMissing { .. })));
    }

    #[test]
    fn center_expansion_examples() {
        let (p, gm) = setup(PresetId::A);
        let (g, c) = gm.coeffs_at(&p, 0.0).unwrap();
        for (x, z) in [(0.001, 0.1), (8e-6, 0.02)] {
            let sc = ScaledCoords::new(&g, 1.0, x, None);
            assert!((sc.zeta - z).abs() < 1e-15 && sc.eta_scaled == 0.0);
            let xi = xi_center_expansion(&g, &c, sc.zeta, sc.eta_scaled, 0.5).unwrap();
            let r = invert_point(&p, &gm, 1.0, x, 0.0).unwrap();
            assert!((xi - z).abs() < 1e-14 && (r.roots[0].xi - z).abs() < 1e-12);
        }
        assert_eq!(xi_center_expansion(&g, &c, 0.0, 0.0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn pre_expansion_examples() {
        let (p, gm) = setup(PresetId::A);
        let (g, c) = gm.coeffs_at(&p, 0.0).unwrap();
        assert!((pre_root(&c, 1.0) - 0.682_327_803_828_019_3).abs() < 1e-12);
        let xi = xi_pre_expansion(&g, &c, 1.0, 0.1, 1.0);
        assert!((xi - 0.0682328).abs() < 1e-6);
        assert_eq!(pre_root(&c, 0.0), 0.0);
        assert!((xi_pre_expansion(&g, &c, 0.0, 0.1, 0.3) - 0.1 * 0.3).abs() < 1e-15);
        let err = |s: f64| {
            let (t, x) = ScaledCoords::pre_point(&g, s, 1.0);
            let r = invert_point(&p, &gm, t, x, 0.0).unwrap();
            (xi_pre_expansion(&g, &c, 1.0, s, 1.0) - r.roots[0].xi).abs()
        };
        assert!(err(0.1) / err(0.05) >= 3.5);
    }

    #[test]
    fn scaled_coords_identities() {
        let (p, gm) = setup(PresetId::B);
        let (g, _) = gm.coeffs_at(&p, 0.05).unwrap();
        let (t, x) = ScaledCoords::post_point(&g, 0.1, 0.7);
        let sc = ScaledCoords::new(&g, t, x, Some(g.xi_star + 0.01));
        assert!((sc.s - 0.1).abs() < 1e-12 && (sc.lambda - 0.7).abs() < 1e-9);
        assert!((sc.zeta.powi(3) - sc.varsigma).abs() < 1e-15);
        assert!((sc.eta_scaled * sc.zeta * sc.zeta - (t - g.t_star)).abs() < 1e-15);
        assert!((sc.nu.unwrap() * sc.zeta - 0.01).abs() < 1e-15);
    }
}
