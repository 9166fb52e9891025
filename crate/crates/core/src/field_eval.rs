//! The entropy solution `u(t, x, y)` near Γ: single-valued before blowup and outside the
//! cusp, branch-selected by the side of the front inside it. Gradients follow from the
//! chain rule through the characteristic map; exponent fits and gauge sups quantify the
//! singular behaviour at Γ.

use rayon::prelude::*;

use crate::blowup_analysis::{CuspCoeffs, Gamma, GammaSample};
use crate::error::{Error, Result};
use crate::multivalued_inversion::{invert_with, Branch, Region};
use crate::numerics::{gauss_legendre, loglog_fit, LineFit};
use crate::problem_model::Problem;
use crate::shock_front::ShockFront;

/// `|x − w(t, y)|` at or below which a point counts as on the shock.
pub const ON_SHOCK_TOL: f64 = 1e-12;
/// `|1 + tH|` at or below which the gradient is not evaluated.
pub const JACOBIAN_MIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub u: f64,
    /// `(∂t u, ∂x u, ∂y u)`, filled by [`eval_gradient`].
    pub grad: Option<[f64; 3]>,
    /// `∂t u + τ ∂x u` with `τ` the Γ tangent slope at `y`.
    pub tangential: Option<f64>,
    pub region: Region,
    pub branch: Branch,
    pub xi: f64,
    pub eta: f64,
    pub jacobian_d: f64,
}

/// The analysis window around Γ: the Γ cache plus, after blowup, the front.
#[derive(Clone, Copy)]
pub struct Window<'a> {
    pub gamma: &'a Gamma,
    pub front: Option<&'a ShockFront>,
}

impl<'a> Window<'a> {
    pub fn new(gamma: &'a Gamma, front: Option<&'a ShockFront>) -> Self {
        Window { gamma, front }
    }
}

/// [`eval_solution`] with the Γ point at `y` already resolved.
pub fn eval_solution_at(
    p: &Problem,
    win: &Window,
    g: &GammaSample,
    c: &CuspCoeffs,
    t: f64,
    x: f64,
) -> Result<FieldSample> {
    let y = g.y;
    let roots = invert_with(p, g, c, t, x)?;
    let root = match roots.region {
        Region::PreBlowup | Region::OutsideLeft | Region::OutsideRight => roots.roots[0],
        Region::InsideCusp | Region::Boundary => {
            let front = win.front.ok_or(Error::OutsideWindow { t, y })?;
            let w = front.w(p, t, y)?;
            if (x - w).abs() <= ON_SHOCK_TOL {
                return Err(Error::OnShock);
            }
            let b = if x < w { Branch::Minus } else { Branch::Plus };
            *roots.branch(b).ok_or(Error::BranchUnavailable { t, x, y })?
        }
    };
    Ok(FieldSample {
        t,
        x,
        y,
        u: p.u0(root.xi, root.eta),
        grad: None,
        tangential: None,
        region: roots.region,
        branch: root.branch,
        xi: root.xi,
        eta: root.eta,
        jacobian_d: root.jacobian_d,
    })
}

/// `u(t, x, y)` from the selected characteristic root.
pub fn eval_solution(p: &Problem, win: &Window, t: f64, x: f64, y: f64) -> Result<FieldSample> {
    let (g, c) = win.gamma.coeffs_at(p, y)?;
    eval_solution_at(p, win, &g, &c, t, x)
}

fn with_gradient(p: &Problem, g: &GammaSample, mut fs: FieldSample) -> Result<FieldSample> {
    let d = fs.jacobian_d;
    if !(d.abs() > JACOBIAN_MIN) {
        return Err(Error::JacobianVanishing { d });
    }
    let j = p.u0_jet(fs.xi, fs.eta, 1);
    let (ux, ue) = (j.get(1, 0), j.get(0, 1));
    let (phi, psi) = p.speeds(fs.u);
    let dx = ux / d;
    let dy = ue / d;
    let dt = -(phi * ux + psi * ue) / d;
    fs.grad = Some([dt, dx, dy]);
    fs.tangential = Some(dt + g.tangent_slope * dx);
    Ok(fs)
}

/// [`eval_solution`] with the chain-rule gradient and the tangential derivative.
pub fn eval_gradient(p: &Problem, win: &Window, t: f64, x: f64, y: f64) -> Result<FieldSample> {
    let (g, c) = win.gamma.coeffs_at(p, y)?;
    let fs = eval_solution_at(p, win, &g, &c, t, x)?;
    with_gradient(p, &g, fs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RayDirection {
    /// `t = T*`, `x = x* + side·r`.
    XAtFixedT,
    /// `x = x*`, `t = T* + side·r`.
    TAtFixedX,
    /// `t = T* + side·r`, `x = x**(t)`.
    Tangent,
}

impl RayDirection {
    pub fn name(self) -> &'static str {
        match self {
            RayDirection::XAtFixedT => "x_at_fixed_t",
            RayDirection::TAtFixedX => "t_at_fixed_x",
            RayDirection::Tangent => "tangent",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantity {
    /// `|u − u(T*, x*, y)|`
    UIncrement,
    /// `|∂x u|`
    Dx,
    /// `|(∂t u, ∂x u, ∂y u)|`
    Grad,
    /// `|∂T u|`
    Tangential,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::UIncrement => "u_increment",
            Quantity::Dx => "dx",
            Quantity::Grad => "grad",
            Quantity::Tangential => "tangential",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RaySpec {
    pub y: f64,
    pub direction: RayDirection,
    pub quantity: Quantity,
    /// `+1` or `−1`.
    pub side: f64,
    /// Largest ray parameter; samples are `r_max·2^{−k}`, `k = 0..n`.
    pub r_max: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentFit {
    pub ray: RaySpec,
    pub slope: f64,
    pub stderr: f64,
    pub r2: f64,
    pub decades: f64,
    /// `(r, quantity)` per sample.
    pub samples: Vec<(f64, f64)>,
}

pub const MIN_RAY_SAMPLES: usize = 8;
pub const MIN_RAY_DECADES: f64 = 2.5;

/// Log-log slope of the quantity against the ray parameter over dyadic samples.
pub fn fit_exponent(p: &Problem, win: &Window, ray: &RaySpec) -> Result<ExponentFit> {
    let decades = (ray.n.max(1) - 1) as f64 * 2f64.log10();
    if ray.n < MIN_RAY_SAMPLES || decades < MIN_RAY_DECADES {
        return Err(Error::InsufficientDecades { decades });
    }
    let (g, c) = win.gamma.coeffs_at(p, ray.y)?;
    let u_star = p.u0(g.xi_star, g.y_star);
    let mut samples = Vec::with_capacity(ray.n);
    let mut side_of_front: Option<Branch> = None;
    for k in 0..ray.n {
        let r = ray.r_max * 0.5f64.powi(k as i32);
        let (t, x) = match ray.direction {
            RayDirection::XAtFixedT => (g.t_star, g.x_star + ray.side * r),
            RayDirection::TAtFixedX => (g.t_star + ray.side * r, g.x_star),
            RayDirection::Tangent => {
                let t = g.t_star + ray.side * r;
                (t, g.x_tangent(t))
            }
        };
        let fs = match eval_solution_at(p, win, &g, &c, t, x) {
            Err(Error::OnShock) => return Err(Error::ShockCrossed),
            other => other?,
        };
        if matches!(fs.region, Region::InsideCusp | Region::Boundary) {
            match side_of_front {
                None => side_of_front = Some(fs.branch),
                Some(b) if b != fs.branch => return Err(Error::ShockCrossed),
                _ => {}
            }
        }
        let q = match ray.quantity {
            Quantity::UIncrement => (fs.u - u_star).abs(),
            other => {
                let fs = with_gradient(p, &g, fs)?;
                let [gt, gx, gy] = fs.grad.expect("gradient filled");
                match other {
                    Quantity::Dx => gx.abs(),
                    Quantity::Grad => (gt * gt + gx * gx + gy * gy).sqrt(),
                    _ => fs.tangential.expect("tangential filled").abs(),
                }
            }
        };
        samples.push((r, q));
    }
    let (rs, qs): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
    let LineFit { slope, stderr, r2, .. } = loglog_fit(&rs, &qs);
    Ok(ExponentFit { ray: *ray, slope, stderr, r2, decades, samples })
}

/// Gauge `|t − T*(y)|^{1/2} + |x − x**(t, y)|^{1/3}`.
pub fn gauge(g: &GammaSample, t: f64, x: f64) -> f64 {
    (t - g.t_star).abs().sqrt() + (x - g.x_tangent(t)).abs().cbrt()
}

/// Suprema of the three gauge-weighted quantities over a sample set.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct GaugeSups {
    /// `|u − u*| / gauge`
    pub e0: f64,
    /// `|∇u| · gauge²`
    pub e1: f64,
    /// `|∂T u| · gauge`
    pub e_t: f64,
    pub samples: usize,
}

/// Gauge sups over an `n × n` cell-centred grid with `t − T* ∈ [−h, h]` and
/// `x − x** ∈ [−h^{3/2}, h^{3/2}]` at the Γ point `y`.
pub fn gauge_sups(p: &Problem, win: &Window, y: f64, h: f64, n: usize) -> Result<GaugeSups> {
    let (g, c) = win.gamma.coeffs_at(p, y)?;
    let u_star = p.u0(g.xi_star, g.y_star);
    let node = |i: usize| -1.0 + (i as f64 + 0.5) * 2.0 / n as f64;
    let rows: Vec<Result<GaugeSups>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let t = g.t_star + h * node(i);
            let mut acc = GaugeSups::default();
            for j in 0..n {
                let x = g.x_tangent(t) + h.powf(1.5) * node(j);
                let fs = match eval_solution_at(p, win, &g, &c, t, x) {
                    Err(Error::OnShock) => continue,
                    other => other?,
                };
                let fs = with_gradient(p, &g, fs)?;
                let [gt, gx, gy] = fs.grad.expect("gradient filled");
                let gg = gauge(&g, t, x);
                acc.e0 = acc.e0.max((fs.u - u_star).abs() / gg);
                acc.e1 = acc.e1.max((gt * gt + gx * gx + gy * gy).sqrt() * gg * gg);
                acc.e_t = acc.e_t.max(fs.tangential.expect("tangential filled").abs() * gg);
                acc.samples += 1;
            }
            Ok(acc)
        })
        .collect();
    let mut out = GaugeSups::default();
    for r in rows {
        let r = r?;
        out.e0 = out.e0.max(r.e0);
        out.e1 = out.e1.max(r.e1);
        out.e_t = out.e_t.max(r.e_t);
        out.samples += r.samples;
    }
    Ok(out)
}

/// Smooth bump `(1 − r²)⁴` on the box `c ± h` in each of `(t, x, y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestFunction {
    pub centre: [f64; 3],
    pub half_width: [f64; 3],
}

impl TestFunction {
    fn factor(v: f64, c: f64, h: f64) -> (f64, f64) {
        let z = (v - c) / h;
        if z.abs() >= 1.0 {
            return (0.0, 0.0);
        }
        let a = 1.0 - z * z;
        (a.powi(4), -8.0 * z * a.powi(3) / h)
    }

    /// `(χ, ∂t χ, ∂x χ, ∂y χ)`
    pub fn eval(&self, t: f64, x: f64, y: f64) -> [f64; 4] {
        let (ft, dt) = Self::factor(t, self.centre[0], self.half_width[0]);
        let (fx, dx) = Self::factor(x, self.centre[1], self.half_width[1]);
        let (fy, dy) = Self::factor(y, self.centre[2], self.half_width[2]);
        [ft * fx * fy, dt * fx * fy, ft * dx * fy, ft * fx * dy]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakResidual {
    /// `∫∫∫ u χ_t + F(u) χ_x + G(u) χ_y`
    pub residual: f64,
    /// The same integral with every term in absolute value.
    pub scale: f64,
}

impl WeakResidual {
    pub fn relative(&self) -> f64 {
        self.residual.abs() / self.scale
    }
}

/// Weak form of the conservation law against a test function supported after blowup.
/// The `x` integral is split at the front so each piece has a smooth integrand.
pub fn weak_residual(p: &Problem, win: &Window, chi: &TestFunction, nq: usize) -> Result<WeakResidual> {
    let front = win.front.ok_or(Error::OutsideWindow { t: chi.centre[0], y: chi.centre[2] })?;
    let [ct, cx, cy] = chi.centre;
    let [ht, hx, hy] = chi.half_width;
    let (tq, tw) = gauss_legendre(nq, ct - ht, ct + ht);
    let (yq, yw) = gauss_legendre(nq, cy - hy, cy + hy);
    let cells: Vec<(usize, usize)> = (0..nq).flat_map(|i| (0..nq).map(move |j| (i, j))).collect();
    let parts: Vec<Result<(f64, f64)>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let (t, y) = (tq[i], yq[j]);
            let (g, c) = win.gamma.coeffs_at(p, y)?;
            let mut pieces = vec![(cx - hx, cx + hx)];
            if t > g.t_star {
                let w = front.w(p, t, y)?;
                if w > cx - hx && w < cx + hx {
                    pieces = vec![(cx - hx, w), (w, cx + hx)];
                }
            }
            let (mut sum, mut abs) = (0.0, 0.0);
            for (a, b) in pieces {
                let (xq, xw) = gauss_legendre(nq, a, b);
                for (x, wx) in xq.iter().zip(&xw) {
                    let u = eval_solution_at(p, win, &g, &c, t, *x)?.u;
                    let (f, gg) = p.fluxes(u);
                    let [_, kt, kx, ky] = chi.eval(t, *x, y);
                    let wgt = tw[i] * yw[j] * wx;
                    sum += wgt * (u * kt + f * kx + gg * ky);
                    abs += wgt * ((u * kt).abs() + (f * kx).abs() + (gg * ky).abs());
                }
            }
            Ok((sum, abs))
        })
        .collect();
    let (mut residual, mut scale) = (0.0, 0.0);
    for r in parts {
        let (s, a) = r?;
        residual += s;
        scale += a;
    }
    Ok(WeakResidual { residual, scale })
}
