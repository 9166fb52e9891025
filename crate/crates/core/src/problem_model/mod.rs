//! Conservation-law problem instances `u_t + F(u)_x + G(u)_y = 0` with initial data `u0`,
//! their derivative jets, and the characteristic speeds `φ = f(u0)`, `ψ = g(u0)` with
//! `f = F'`, `g = G'`.

pub mod expr;
pub mod jet;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::halton;
pub use jet::Jet2;

/// `u ↦ [F, F', F'', F''', F'''', F⁽⁵⁾]`; index `k + 1` is the `k`-th derivative of `f = F'`.
pub type FluxFn = Arc<dyn Fn(f64) -> [f64; 6] + Send + Sync>;
/// `(x, y, order) ↦` partials of `u0` up to total order `order` (at most 4).
pub type DataFn = Arc<dyn Fn(f64, f64, usize) -> Jet2 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainBox {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl DomainBox {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Self {
        DomainBox { x_lo, x_hi, y_lo, y_hi }
    }

    pub fn is_empty(&self) -> bool {
        let finite = [self.x_lo, self.x_hi, self.y_lo, self.y_hi].iter().all(|v| v.is_finite());
        !(finite && self.x_lo < self.x_hi && self.y_lo < self.y_hi)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        const SLACK: f64 = 1e-12;
        x >= self.x_lo - SLACK && x <= self.x_hi + SLACK && y >= self.y_lo - SLACK && y <= self.y_hi + SLACK
    }

    /// Smaller of the two half side lengths.
    pub fn half_width(&self) -> f64 {
        0.5 * (self.x_hi - self.x_lo).min(self.y_hi - self.y_lo)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresetId {
    A,
    B,
}

impl PresetId {
    pub fn name(self) -> &'static str {
        match self {
            PresetId::A => "preset-a",
            PresetId::B => "preset-b",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "preset-a" => Some(PresetId::A),
            "preset-b" => Some(PresetId::B),
            _ => None,
        }
    }
}

/// Ingredients handed to [`make_problem`].
#[derive(Clone)]
pub struct ProblemDef {
    pub flux_x: FluxFn,
    pub flux_y: FluxFn,
    pub u0: DataFn,
    pub preset: Option<PresetId>,
    pub label: String,
}

/// Outcome of the finite-difference cross-check performed by [`make_problem`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidationReport {
    pub samples: usize,
    pub max_rel_err: f64,
}

#[derive(Clone)]
pub struct Problem {
    flux_x: FluxFn,
    flux_y: FluxFn,
    u0: DataFn,
    domain: DomainBox,
    preset: Option<PresetId>,
    label: String,
    validation: ValidationReport,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("preset", &self.preset)
            .finish()
    }
}

pub const VALIDATION_SAMPLES: usize = 128;
pub const VALIDATION_RTOL: f64 = 1e-6;

impl Problem {
    pub fn domain(&self) -> DomainBox {
        self.domain
    }

    pub fn preset(&self) -> Option<PresetId> {
        self.preset
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn validation(&self) -> ValidationReport {
        self.validation
    }

    /// `(f, f', f'', f''', f'''')` at `u`.
    pub fn f_jet(&self, u: f64) -> [f64; 5] {
        let a = (self.flux_x)(u);
        [a[1], a[2], a[3], a[4], a[5]]
    }

    /// `(g, g', g'', g''', g'''')` at `u`.
    pub fn g_jet(&self, u: f64) -> [f64; 5] {
        let a = (self.flux_y)(u);
        [a[1], a[2], a[3], a[4], a[5]]
    }

    /// Flux values `(F(u), G(u))`.
    pub fn fluxes(&self, u: f64) -> (f64, f64) {
        ((self.flux_x)(u)[0], (self.flux_y)(u)[0])
    }

    /// Characteristic speeds `(f(u), g(u))`.
    pub fn speeds(&self, u: f64) -> (f64, f64) {
        ((self.flux_x)(u)[1], (self.flux_y)(u)[1])
    }

    /// Initial-data jet without the domain check.
    pub fn u0_jet(&self, x: f64, y: f64, order: usize) -> Jet2 {
        (self.u0)(x, y, order.min(jet::ORDER))
    }

    pub fn u0(&self, x: f64, y: f64) -> f64 {
        (self.u0)(x, y, 0).value()
    }

    pub fn check_domain(&self, xi: f64, eta: f64) -> Result<()> {
        if self.domain.contains(xi, eta) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { xi, eta })
        }
    }
}

/// Jets of `φ = f(u0)` and `ψ = g(u0)` (and of `u0` itself) at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiPsiJet {
    pub u0: Jet2,
    pub phi: Jet2,
    pub psi: Jet2,
}

impl PhiPsiJet {
    pub fn phi(&self) -> f64 {
        self.phi.value()
    }
    pub fn psi(&self) -> f64 {
        self.psi.value()
    }
    pub fn phi_xi(&self) -> f64 {
        self.phi.get(1, 0)
    }
    pub fn phi_eta(&self) -> f64 {
        self.phi.get(0, 1)
    }
    pub fn psi_xi(&self) -> f64 {
        self.psi.get(1, 0)
    }
    pub fn psi_eta(&self) -> f64 {
        self.psi.get(0, 1)
    }
}

/// Jet of `H = ∂ξφ + ∂ηψ` through total order 3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HJet {
    pub h: Jet2,
}

impl HJet {
    pub fn value(&self) -> f64 {
        self.h.value()
    }
    pub fn gradient(&self) -> [f64; 2] {
        [self.h.get(1, 0), self.h.get(0, 1)]
    }
    pub fn hessian(&self) -> [[f64; 2]; 2] {
        [[self.h.get(2, 0), self.h.get(1, 1)], [self.h.get(1, 1), self.h.get(0, 2)]]
    }
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i + j <= 3);
        self.h.get(i, j)
    }
}

fn fd_first(g: impl Fn(f64) -> f64, h: f64) -> f64 {
    let d = |h: f64| (-g(2.0 * h) + 8.0 * g(h) - 8.0 * g(-h) + g(-2.0 * h)) / (12.0 * h);
    (16.0 * d(0.5 * h) - d(h)) / 15.0
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

/// Build a problem and cross-check every analytic jet entry against a Richardson-extrapolated
/// 5-point central difference of the entry one order below it.
pub fn make_problem(def: ProblemDef, domain: DomainBox) -> Result<Problem> {
    if domain.is_empty() {
        return Err(Error::DomainEmpty);
    }
    let mut max_err: f64 = 0.0;
    for k in 1..=VALIDATION_SAMPLES {
        let px = domain.x_lo + (domain.x_hi - domain.x_lo) * halton(k, 2);
        let py = domain.y_lo + (domain.y_hi - domain.y_lo) * halton(k, 3);
        let jet = (def.u0)(px, py, jet::ORDER);
        for (i, j) in Jet2::indices() {
            if i + j == 0 {
                continue;
            }
            let (axis, li, lj) = if i > 0 { (0, i - 1, j) } else { (1, i, j - 1) };
            let h = 1e-4 * (1.0 + if axis == 0 { px.abs() } else { py.abs() });
            let fd = fd_first(
                |d| {
                    let (x, y) = if axis == 0 { (px + d, py) } else { (px, py + d) };
                    (def.u0)(x, y, jet::ORDER).get(li, lj)
                },
                h,
            );
            let e = rel_err(jet.get(i, j), fd);
            max_err = max_err.max(e);
            if !(e <= VALIDATION_RTOL) {
                return Err(Error::JetMismatch {
                    quantity: "u0".into(),
                    order: (i, j),
                    point: (px, py),
                    analytic: jet.get(i, j),
                    fd,
                });
            }
        }
        let u = jet.value();
        for (name, flux) in [("F", &def.flux_x), ("G", &def.flux_y)] {
            let a = flux(u);
            let h = 1e-4 * (1.0 + u.abs());
            for k in 1..6 {
                let fd = fd_first(|d| flux(u + d)[k - 1], h);
                let e = rel_err(a[k], fd);
                max_err = max_err.max(e);
                if !(e <= VALIDATION_RTOL) {
                    return Err(Error::JetMismatch {
                        quantity: name.into(),
                        order: (k, 0),
                        point: (u, 0.0),
                        analytic: a[k],
                        fd,
                    });
                }
            }
        }
    }
    Ok(Problem {
        flux_x: def.flux_x,
        flux_y: def.flux_y,
        u0: def.u0,
        domain,
        preset: def.preset,
        label: def.label,
        validation: ValidationReport { samples: VALIDATION_SAMPLES, max_rel_err: max_err },
    })
}

/// Jets of `φ` and `ψ` truncated at total order `order` (≤ 4), without the domain check.
pub fn phi_psi_unchecked(p: &Problem, xi: f64, eta: f64, order: usize) -> PhiPsiJet {
    let order = order.min(jet::ORDER);
    let u = p.u0_jet(xi, eta, order);
    let fd = p.f_jet(u.value());
    let gd = p.g_jet(u.value());
    PhiPsiJet { u0: u, phi: Jet2::compose(&fd[..=order], &u), psi: Jet2::compose(&gd[..=order], &u) }
}

/// Full fourth-order jets of `φ` and `ψ` at `(ξ, η)`.
pub fn eval_phi_psi(p: &Problem, xi: f64, eta: f64) -> Result<PhiPsiJet> {
    p.check_domain(xi, eta)?;
    Ok(phi_psi_unchecked(p, xi, eta, jet::ORDER))
}

/// `H` and its partials through order 3, read off the `φ`/`ψ` jets.
pub fn h_from_phi_psi(pp: &PhiPsiJet) -> HJet {
    let mut h = Jet2::zero();
    for (i, j) in Jet2::indices() {
        if i + j <= 3 {
            h.set(i, j, pp.phi.get(i + 1, j) + pp.psi.get(i, j + 1));
        }
    }
    HJet { h }
}

pub fn eval_h(p: &Problem, xi: f64, eta: f64) -> Result<HJet> {
    Ok(h_from_phi_psi(&eval_phi_psi(p, xi, eta)?))
}

/// Second computation path for `H`: `f'(u0) ∂ξu0 + g'(u0) ∂ηu0` assembled directly.
pub fn eval_h_direct(p: &Problem, xi: f64, eta: f64) -> Result<HJet> {
    p.check_domain(xi, eta)?;
    let u = p.u0_jet(xi, eta, jet::ORDER);
    let fx = p.flux_x_derivs(u.value());
    let gy = p.flux_y_derivs(u.value());
    let fp = Jet2::compose(&fx[2..6], &u);
    let gp = Jet2::compose(&gy[2..6], &u);
    let h = fp.mul(&u.derivative(0)).add(&gp.mul(&u.derivative(1))).truncated(3);
    Ok(HJet { h })
}

impl Problem {
    fn flux_x_derivs(&self, u: f64) -> [f64; 6] {
        (self.flux_x)(u)
    }
    fn flux_y_derivs(&self, u: f64) -> [f64; 6] {
        (self.flux_y)(u)
    }
}

// ---------------------------------------------------------------------------
// Presets

fn cubic_data(x: f64, y: f64, order: usize) -> Jet2 {
    // u0 = -x + x^3 + 3 x y^2
    let mut j = Jet2::zero();
    j.set(0, 0, -x + x * x * x + 3.0 * x * y * y);
    if order >= 1 {
        j.set(1, 0, -1.0 + 3.0 * x * x + 3.0 * y * y);
        j.set(0, 1, 6.0 * x * y);
    }
    if order >= 2 {
        j.set(2, 0, 6.0 * x);
        j.set(1, 1, 6.0 * y);
        j.set(0, 2, 6.0 * x);
    }
    if order >= 3 {
        j.set(3, 0, 6.0);
        j.set(1, 2, 6.0);
    }
    j
}

fn burgers(u: f64) -> [f64; 6] {
    [0.5 * u * u, u, 1.0, 0.0, 0.0, 0.0]
}

fn cubic_flux(u: f64) -> [f64; 6] {
    [u * u * u / 3.0, u * u, 2.0 * u, 2.0, 0.0, 0.0]
}

fn zero_flux(_: f64) -> [f64; 6] {
    [0.0; 6]
}

pub fn preset_def(id: PresetId) -> (ProblemDef, DomainBox) {
    let flux_y: FluxFn = match id {
        PresetId::A => Arc::new(zero_flux),
        PresetId::B => Arc::new(cubic_flux),
    };
    let def = ProblemDef {
        flux_x: Arc::new(burgers),
        flux_y,
        u0: Arc::new(cubic_data),
        preset: Some(id),
        label: id.name().into(),
    };
    (def, DomainBox::new(-0.5, 0.5, -0.5, 0.5))
}

pub fn preset(id: PresetId) -> Problem {
    let (def, b) = preset_def(id);
    make_problem(def, b).expect("built-in presets validate")
}

/// Problem definition from expression strings: fluxes `F(u)`, `G(u)` and data `u0(x, y)`.
pub fn expression_def(flux_f: &str, flux_g: &str, u0: &str) -> Result<ProblemDef> {
    let flux = |src: &str| -> Result<FluxFn> {
        let mut d = vec![expr::parse(src, &["u"])?];
        for k in 1..6 {
            let next = d[k - 1].diff(0);
            d.push(next);
        }
        Ok(Arc::new(move |u: f64| {
            let mut out = [0.0; 6];
            for (o, e) in out.iter_mut().zip(&d) {
                *o = e.eval(&[u]);
            }
            out
        }))
    };
    let base = expr::parse(u0, &["x", "y"])?;
    let mut table: Vec<Vec<Option<Arc<expr::Expr>>>> = vec![vec![None; jet::ORDER + 1]; jet::ORDER + 1];
    table[0][0] = Some(base);
    for (i, j) in Jet2::indices() {
        if i + j == 0 {
            continue;
        }
        let e = if i > 0 { table[i - 1][j].as_ref().unwrap().diff(0) } else { table[i][j - 1].as_ref().unwrap().diff(1) };
        table[i][j] = Some(e);
    }
    let data: DataFn = Arc::new(move |x: f64, y: f64, order: usize| {
        let mut jt = Jet2::zero();
        for (i, j) in Jet2::indices() {
            if i + j <= order {
                jt.set(i, j, table[i][j].as_ref().unwrap().eval(&[x, y]));
            }
        }
        jt
    });
    Ok(ProblemDef { flux_x: flux(flux_f)?, flux_y: flux(flux_g)?, u0: data, preset: None, label: "custom".into() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_a_phi_psi_examples() {
        let p = preset(PresetId::A);
        let j = eval_phi_psi(&p, 0.0, 0.0).unwrap();
        assert_eq!((j.phi(), j.psi(), j.phi_xi(), j.psi_eta()), (0.0, 0.0, -1.0, 0.0));
        let j = eval_phi_psi(&p, 0.1, 0.0).unwrap();
        assert!((j.phi() + 0.099).abs() < 1e-15);
        assert!((j.phi_xi() + 0.97).abs() < 1e-15);
        let j = eval_phi_psi(&p, 0.0, 0.1).unwrap();
        assert_eq!((j.psi(), j.psi_xi()), (0.0, 0.0));
    }

    #[test]
    fn preset_a_h_examples() {
        let p = preset(PresetId::A);
        let h = eval_h(&p, 0.0, 0.0).unwrap();
        assert_eq!(h.value(), -1.0);
        assert_eq!(h.gradient(), [0.0, 0.0]);
        assert_eq!(h.hessian(), [[6.0, 0.0], [0.0, 6.0]]);
        let h = eval_h(&p, 0.1, 0.2).unwrap();
        assert!((h.value() + 0.85).abs() < 1e-15);
    }

    #[test]
    fn h_paths_agree() {
        for id in [PresetId::A, PresetId::B] {
            let p = preset(id);
            for k in 1..50 {
                let x = -0.5 + halton(k, 2);
                let y = -0.5 + halton(k, 3);
                let a = eval_h(&p, x, y).unwrap();
                let b = eval_h_direct(&p, x, y).unwrap();
                for (i, j) in Jet2::indices().filter(|(i, j)| i + j <= 3) {
                    let (u, v) = (a.get(i, j), b.get(i, j));
                    assert!((u - v).abs() <= 1e-10 * (1.0 + u.abs()), "{id:?} ({i},{j}) {u} {v}");
                }
            }
        }
    }

    #[test]
    fn normalization_block_holds_for_preset_a() {
        let p = preset(PresetId::A);
        let j = eval_phi_psi(&p, 0.0, 0.0).unwrap();
        assert!(j.psi_eta() >= -0.5 && -0.5 >= j.phi_xi());
    }

    #[test]
    fn corrupted_flux_derivative_is_rejected() {
        let (mut def, b) = preset_def(PresetId::A);
        def.flux_x = Arc::new(|u: f64| [0.5 * u * u, 2.0 * u, 2.0, 0.0, 0.0, 0.0]);
        match make_problem(def, b) {
            Err(Error::JetMismatch { quantity, .. }) => assert_eq!(quantity, "F"),
            other => panic!("expected JetMismatch, got {other:?}"),
        }
    }

    #[test]
    fn empty_domain_is_rejected() {
        let (def, _) = preset_def(PresetId::A);
        let r = make_problem(def, DomainBox::new(0.5, 0.5, -1.0, 1.0));
        assert!(matches!(r, Err(Error::DomainEmpty)));
    }

    #[test]
    fn out_of_domain_is_reported() {
        let p = preset(PresetId::A);
        assert!(matches!(eval_phi_psi(&p, 0.6, 0.0), Err(Error::OutOfDomain { .. })));
        assert!(matches!(eval_h(&p, 0.0, -0.7), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn expression_problem_matches_preset_b() {
        let def = expression_def("u^2/2", "u^3/3", "-x + x^3 + 3*x*y^2").unwrap();
        let q = make_problem(def, DomainBox::new(-0.5, 0.5, -0.5, 0.5)).unwrap();
        let p = preset(PresetId::B);
        for k in 1..20 {
            let x = -0.5 + halton(k, 2);
            let y = -0.5 + halton(k, 3);
            let a = eval_phi_psi(&p, x, y).unwrap();
            let b = eval_phi_psi(&q, x, y).unwrap();
            for (i, j) in Jet2::indices() {
                assert!((a.phi.get(i, j) - b.phi.get(i, j)).abs() < 1e-12);
                assert!((a.psi.get(i, j) - b.psi.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn preset_names_round_trip() {
        for id in [PresetId::A, PresetId::B] {
            assert_eq!(PresetId::from_name(id.name()), Some(id));
        }
        assert_eq!(PresetId::from_name("preset-z"), None);
    }
}
