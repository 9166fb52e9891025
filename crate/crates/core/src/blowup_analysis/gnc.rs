//! First blowup point: global minimiser of `H` and the generic nondegenerate condition.

use crate::error::{Error, Result};
use crate::problem_model::{eval_h, phi_psi_unchecked, Problem};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GncReport {
    pub argmin: (f64, f64),
    pub min_h: f64,
    pub grad_norm: f64,
    pub hessian: [[f64; 2]; 2],
    /// Ascending.
    pub eigenvalues: [f64; 2],
    pub unique_min: bool,
    pub t_star0: f64,
    /// `y` coordinate of the first blowup point, `η₀ + T₀ψ(ξ₀, η₀)`.
    pub y0: f64,
    /// `x` coordinate of the first blowup point, `ξ₀ + T₀φ(ξ₀, η₀)`.
    pub x0: f64,
}

pub const SCAN_POINTS: usize = 129;
const MAX_CANDIDATES: usize = 64;

pub fn sym_eigenvalues(m: [[f64; 2]; 2]) -> [f64; 2] {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let r = (0.25 * (m[0][0] - m[1][1]).powi(2) + m[0][1] * m[0][1]).sqrt();
    [mean - r, mean + r]
}

struct Polished {
    point: (f64, f64),
    h: f64,
    grad_norm: f64,
    hessian: [[f64; 2]; 2],
}

fn polish(p: &Problem, start: (f64, f64)) -> Option<Polished> {
    let dom = p.domain();
    let (mut x, mut y) = start;
    for _ in 0..50 {
        let hj = eval_h(p, x, y).ok()?;
        let g = hj.gradient();
        let m = hj.hessian();
        let gn = g[0].hypot(g[1]);
        if gn <= 1e-14 {
            break;
        }
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let dx = (m[1][1] * g[0] - m[0][1] * g[1]) / det;
        let dy = (m[0][0] * g[1] - m[1][0] * g[0]) / det;
        let (nx, ny) = (x - dx, y - dy);
        if !dom.contains(nx, ny) {
            break;
        }
        x = nx;
        y = ny;
        if dx.hypot(dy) <= 1e-15 * (1.0 + x.abs() + y.abs()) {
            break;
        }
    }
    let hj = eval_h(p, x, y).ok()?;
    let g = hj.gradient();
    Some(Polished { point: (x, y), h: hj.value(), grad_norm: g[0].hypot(g[1]), hessian: hj.hessian() })
}

/// Grid scan for local minima of `H`, Newton polish of each on `∇H = 0`, and the GNC checks.
pub fn find_first_blowup(p: &Problem) -> Result<GncReport> {
    let dom = p.domain();
    let n = SCAN_POINTS;
    let xs: Vec<f64> = (0..n).map(|i| dom.x_lo + (dom.x_hi - dom.x_lo) * i as f64 / (n - 1) as f64).collect();
    let ys: Vec<f64> = (0..n).map(|j| dom.y_lo + (dom.y_hi - dom.y_lo) * j as f64 / (n - 1) as f64).collect();
    let mut grid = vec![0.0; n * n];
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let jt = phi_psi_unchecked(p, x, y, 1);
            grid[i * n + j] = jt.phi_xi() + jt.psi_eta();
        }
    }
    let gmin = grid.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(gmin < 0.0) {
        return Err(Error::NoNegativeMin { min_h: gmin });
    }
    let mut cands: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = grid[i * n + j];
            let mut is_min = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || a < 0 || b < 0 || a >= n as i64 || b >= n as i64 {
                        continue;
                    }
                    if grid[a as usize * n + b as usize] < v {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                cands.push((v, i, j));
            }
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    cands.truncate(MAX_CANDIDATES);

    let mut polished: Vec<Polished> = Vec::new();
    for &(_, i, j) in &cands {
        if let Some(pm) = polish(p, (xs[i], ys[j])) {
            let dup = polished
                .iter()
                .any(|q| (q.point.0 - pm.point.0).hypot(q.point.1 - pm.point.1) < 1e-6);
            if !dup {
                polished.push(pm);
            }
        }
    }
    let best = polished.iter().map(|q| q.h).fold(gmin, f64::min);
    let winners: Vec<&Polished> = polished.iter().filter(|q| q.h <= best + 1e-9).collect();
    let Some(w) = winners.first() else {
        return Err(Error::GncViolated { clause: "no critical point attains the minimum".into() });
    };
    if w.grad_norm > 1e-8 {
        return Err(Error::GncViolated {
            clause: format!("gradient norm {:e} at the minimiser (minimum on the boundary?)", w.grad_norm),
        });
    }
    let eig = sym_eigenvalues(w.hessian);
    if !(eig[0] > 1e-8) {
        return Err(Error::GncViolated { clause: format!("Hessian not positive definite: eigenvalues {eig:?}") });
    }
    if winners.len() > 1 {
        return Err(Error::GncViolated { clause: format!("{} global minima", winners.len()) });
    }
    let t0 = -1.0 / w.h;
    let jt = phi_psi_unchecked(p, w.point.0, w.point.1, 0);
    Ok(GncReport {
        argmin: w.point,
        min_h: w.h,
        grad_norm: w.grad_norm,
        hessian: w.hessian,
        eigenvalues: eig,
        unique_min: true,
        t_star0: t0,
        y0: w.point.1 + t0 * jt.psi(),
        x0: w.point.0 + t0 * jt.phi(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem_model::{expression_def, make_problem, preset, DomainBox, PresetId};

    #[test]
    fn preset_a_first_blowup() {
        let r = find_first_blowup(&preset(PresetId::A)).unwrap();
        assert!(r.argmin.0.abs() < 1e-8 && r.argmin.1.abs() < 1e-8);
        assert!((r.min_h + 1.0).abs() < 1e-10);
        assert!((r.eigenvalues[0] - 6.0).abs() < 1e-6 && (r.eigenvalues[1] - 6.0).abs() < 1e-6);
        assert!((r.t_star0 - 1.0).abs() < 1e-10);
        assert!(r.unique_min);
    }

    fn custom(u0: &str) -> Problem {
        let def = expression_def("u^2/2", "0", u0).unwrap();
        make_problem(def, DomainBox::new(-0.5, 0.5, -0.5, 0.5)).unwrap()
    }

    #[test]
    fn expansive_data_has_no_blowup() {
        assert!(matches!(find_first_blowup(&custom("x")), Err(Error::NoNegativeMin { .. })));
    }

    #[test]
    fn linear_compressive_data_violates_gnc() {
        assert!(matches!(find_first_blowup(&custom("-x")), Err(Error::GncViolated { .. })));
    }

    #[test]
    fn two_symmetric_minima_violate_gnc() {
        // H = ∂x u0 = -1 + 3(x² - 0.04)² + 3y², minima at x = ±0.2
        let r = find_first_blowup(&custom("-x + 3*(x^5/5 - 0.08*x^3/3 + 0.0016*x) + 3*x*y^2"));
        assert!(matches!(r, Err(Error::GncViolated { .. })), "{r:?}");
    }
}
