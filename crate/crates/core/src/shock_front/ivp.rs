//! Singular initial value problem `y' = sP(s, Λ, y)`, `sΛ' = Q(s, Λ, y)`, `y(0) = β`,
//! `Λ(0) = 0` with `Q = −αΛ + Q̃`.
//!
//! On `[0, s₀]` the bounded solution is the fixed point of
//! `Λ(s) = ∫₀¹ τ^{α−1} Q̃(sτ, Λ(sτ), y(sτ)) dτ`, `y(s) = β + s² ∫₀¹ τ P(sτ, …) dτ`,
//! iterated on Chebyshev interpolants with Gauss–Jacobi quadrature. From `s₀` onward the
//! system is regular and is integrated with RK4 and step doubling.

use crate::error::{Error, Result};
use crate::numerics::{gauss_jacobi_unit, ChebInterp};

/// Right-hand side `(s, Λ, y) ↦ (P, Q)`.
pub type IvpRhs<'a> = dyn Fn(f64, f64, f64) -> Result<(f64, f64)> + Sync + 'a;

pub struct SingularIvpSpec<'a> {
    pub rhs: &'a IvpRhs<'a>,
    pub alpha: f64,
    pub m_bound: f64,
    /// End of the `s` interval.
    pub horizon: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct IvpTuning {
    pub cheb_nodes: usize,
    pub quad_nodes: usize,
    pub picard_tol: f64,
    /// Sup-distance below which stagnation is attributed to evaluation noise.
    pub noise_floor: f64,
    pub max_picard: usize,
    pub rk_tol: f64,
}

impl Default for IvpTuning {
    fn default() -> Self {
        IvpTuning { cheb_nodes: 12, quad_nodes: 10, picard_tol: 1e-12, noise_floor: 1e-7, max_picard: 30, rk_tol: 1e-12 }
    }
}

#[derive(Clone, Debug)]
pub struct IvpSolution {
    pub beta: f64,
    pub s0: f64,
    /// Successive sup-distances of the accepted Picard run.
    pub picard_distances: Vec<f64>,
    /// Largest ratio of successive distances above the noise floor.
    pub max_ratio: f64,
    /// `max |Λ|/s` over every node and step.
    pub max_lambda_over_s: f64,
    /// `(Λ, y)` at each requested output point.
    pub values: Vec<(f64, f64)>,
    pub rk_steps: usize,
}

struct Picard {
    cheb: ChebInterp,
    lam: Vec<f64>,
    y: Vec<f64>,
    distances: Vec<f64>,
    max_ratio: f64,
}

fn picard(spec: &SingularIvpSpec, beta: f64, s0: f64, tune: &IvpTuning) -> Result<Picard> {
    let cheb = ChebInterp::new(tune.cheb_nodes, 0.0, s0);
    let (ql, wl) = gauss_jacobi_unit(tune.quad_nodes, spec.alpha - 1.0);
    let (qy, wy) = gauss_jacobi_unit(tune.quad_nodes, 1.0);
    let n = tune.cheb_nodes;
    let mut lam = vec![0.0; n];
    let mut y = vec![beta; n];
    let mut distances = Vec::new();
    let mut max_ratio: f64 = 0.0;
    for _ in 0..tune.max_picard {
        let at = |s: f64, lam: &[f64], y: &[f64]| (cheb.eval(lam, s), cheb.eval(y, s));
        let mut nl = vec![0.0; n];
        let mut ny = vec![0.0; n];
        for (i, &s) in cheb.nodes().iter().enumerate() {
            let mut acc = 0.0;
            for (t, w) in ql.iter().zip(&wl) {
                let st = s * t;
                let (l, yy) = at(st, &lam, &y);
                let (_, q) = (spec.rhs)(st, l, yy)?;
                acc += w * (q + spec.alpha * l);
            }
            nl[i] = acc;
            let mut acc = 0.0;
            for (t, w) in qy.iter().zip(&wy) {
                let st = s * t;
                let (l, yy) = at(st, &lam, &y);
                let (p, _) = (spec.rhs)(st, l, yy)?;
                acc += w * p;
            }
            ny[i] = beta + s * s * acc;
        }
        let d = nl
            .iter()
            .zip(&lam)
            .chain(ny.iter().zip(&y))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        lam = nl;
        y = ny;
        if let Some(&prev) = distances.last() {
            if prev > tune.noise_floor && d > tune.picard_tol {
                let ratio = d / prev;
                max_ratio = max_ratio.max(ratio);
                if ratio > 0.5 {
                    return Err(Error::ContractionFailed { ratio });
                }
            }
        }
        distances.push(d);
        if d <= tune.picard_tol {
            return Ok(Picard { cheb, lam, y, distances, max_ratio });
        }
        if distances.len() >= 2 && d <= tune.noise_floor && d > 0.5 * distances[distances.len() - 2] {
            return Ok(Picard { cheb, lam, y, distances, max_ratio });
        }
    }
    let ratio = match distances.as_slice() {
        [.., a, b] => b / a,
        _ => f64::NAN,
    };
    Err(Error::ContractionFailed { ratio })
}

fn rk4_step(spec: &SingularIvpSpec, s: f64, u: [f64; 2], h: f64) -> Result<[f64; 2]> {
    let f = |s: f64, u: [f64; 2]| -> Result<[f64; 2]> {
        let (p, q) = (spec.rhs)(s, u[0], u[1])?;
        Ok([q / s, s * p])
    };
    let k1 = f(s, u)?;
    let k2 = f(s + 0.5 * h, [u[0] + 0.5 * h * k1[0], u[1] + 0.5 * h * k1[1]])?;
    let k3 = f(s + 0.5 * h, [u[0] + 0.5 * h * k2[0], u[1] + 0.5 * h * k2[1]])?;
    let k4 = f(s + h, [u[0] + h * k3[0], u[1] + h * k3[1]])?;
    Ok([
        u[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        u[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ])
}

/// Largest dyadic `s₀ ≤ horizon/4` on which the Picard iteration contracts.
pub const MIN_S0_FRACTION: f64 = 1.0 / 1024.0;

/// Solve on `[0, spec.horizon]` and report `(Λ, y)` at each point of `s_out` (ascending).
pub fn solve_singular_ivp(spec: &SingularIvpSpec, beta: f64, s_out: &[f64]) -> Result<IvpSolution> {
    solve_singular_ivp_with(spec, beta, s_out, &IvpTuning::default())
}

pub fn solve_singular_ivp_with(
    spec: &SingularIvpSpec,
    beta: f64,
    s_out: &[f64],
    tune: &IvpTuning,
) -> Result<IvpSolution> {
    assert!(spec.alpha >= 2.0, "singular IVP requires alpha >= 2");
    let mut s0 = 2f64.powf((spec.horizon / 4.0).log2().floor());
    let pic = loop {
        match picard(spec, beta, s0, tune) {
            Ok(p) => break p,
            Err(e) => {
                s0 *= 0.5;
                if s0 < spec.horizon * MIN_S0_FRACTION {
                    return Err(e);
                }
            }
        }
    };
    let mut max_los: f64 = 0.0;
    let mut bound = |s: f64, l: f64| -> Result<()> {
        if s > 0.0 {
            max_los = max_los.max(l.abs() / s);
            if l.abs() > spec.m_bound * s {
                return Err(Error::BoundViolated { s, lambda: l, bound: spec.m_bound * s });
            }
        }
        Ok(())
    };
    for (s, l) in pic.cheb.nodes().iter().zip(&pic.lam) {
        bound(*s, *l)?;
    }
    let mut values = Vec::with_capacity(s_out.len());
    let mut s = s0;
    let mut u = [pic.cheb.eval(&pic.lam, s0), pic.cheb.eval(&pic.y, s0)];
    let mut h = s0 / 8.0;
    let mut steps = 0usize;
    for &target in s_out {
        if target <= 0.0 {
            values.push((0.0, beta));
            continue;
        }
        if target <= s0 {
            values.push((pic.cheb.eval(&pic.lam, target), pic.cheb.eval(&pic.y, target)));
            continue;
        }
        while s < target {
            let last = target - s <= h;
            let hh = if last { target - s } else { h };
            let full = rk4_step(spec, s, u, hh)?;
            let half = rk4_step(spec, s, u, 0.5 * hh)?;
            let two = rk4_step(spec, s + 0.5 * hh, half, 0.5 * hh)?;
            let err = (two[0] - full[0]).abs().max((two[1] - full[1]).abs()) / 15.0;
            steps += 1;
            if steps > 100_000 {
                return Err(Error::NewtonDiverged { context: "singular IVP step control".into() });
            }
            if err <= tune.rk_tol || hh < 1e-9 * spec.horizon {
                s = if last { target } else { s + hh };
                u = [two[0] + (two[0] - full[0]) / 15.0, two[1] + (two[1] - full[1]) / 15.0];
                bound(s, u[0])?;
                let grow = if err == 0.0 { 2.0 } else { (0.9 * (tune.rk_tol / err).powf(0.2)).min(2.0) };
                if !last {
                    h = hh * grow.max(0.2);
                }
            } else {
                h = hh * (0.9 * (tune.rk_tol / err).powf(0.2)).max(0.2);
            }
        }
        values.push((u[0], u[1]));
    }
    Ok(IvpSolution {
        beta,
        s0,
        picard_distances: pic.distances,
        max_ratio: pic.max_ratio,
        max_lambda_over_s: max_los,
        values,
        rk_steps: steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, end: f64) -> Vec<f64> {
        (0..=n).map(|k| end * k as f64 / n as f64).collect()
    }

    #[test]
    fn manufactured_linear_solution() {
        let rhs = |s: f64, l: f64, _y: f64| Ok((0.0, -4.0 * l + s));
        let spec = SingularIvpSpec { rhs: &rhs, alpha: 4.0, m_bound: 10.0, horizon: 0.2 };
        let out = grid(40, 0.2);
        let sol = solve_singular_ivp(&spec, 0.0, &out).unwrap();
        for (s, (l, y)) in out.iter().zip(&sol.values) {
            assert!((l - s / 5.0).abs() <= 1e-10, "s={s} l={l}");
            assert_eq!(*y, 0.0);
        }
        assert!(sol.max_ratio <= 0.5);
        assert!(sol.max_lambda_over_s <= 0.2 + 1e-9);
    }

    #[test]
    fn manufactured_quadratic_solution() {
        let rhs = |s: f64, l: f64, _y: f64| Ok((0.0, -2.0 * l + s * s));
        let spec = SingularIvpSpec { rhs: &rhs, alpha: 2.0, m_bound: 10.0, horizon: 0.2 };
        let out = grid(40, 0.2);
        let sol = solve_singular_ivp(&spec, 0.3, &out).unwrap();
        for (s, (l, y)) in out.iter().zip(&sol.values) {
            assert!((l - s * s / 4.0).abs() <= 1e-10);
            assert!((y - 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn homogeneous_problem_has_zero_solution() {
        for alpha in [2.0, 3.5, 6.0] {
            let rhs = move |_s: f64, l: f64, _y: f64| Ok((0.0, -alpha * l));
            let spec = SingularIvpSpec { rhs: &rhs, alpha, m_bound: 10.0, horizon: 0.2 };
            let sol = solve_singular_ivp(&spec, 0.0, &grid(10, 0.2)).unwrap();
            assert!(sol.values.iter().all(|(l, _)| *l == 0.0));
        }
    }

    #[test]
    fn coupled_system_matches_series() {
        // y' = s·1 gives y = β + s²/2; sΛ' = −3Λ + y gives Λ = β/3 + s²/10
        let rhs = |_s: f64, l: f64, y: f64| Ok((1.0, -3.0 * l + y));
        let spec = SingularIvpSpec { rhs: &rhs, alpha: 3.0, m_bound: 1e3, horizon: 0.3 };
        let out = grid(30, 0.3);
        let sol = solve_singular_ivp(&spec, 0.0, &out).unwrap();
        for (s, (l, y)) in out.iter().zip(&sol.values) {
            assert!((y - s * s / 2.0).abs() < 1e-11);
            assert!((l - s * s / 10.0).abs() < 1e-11, "s={s}: {l}");
        }
    }

    #[test]
    fn bound_violation_is_reported() {
        let rhs = |s: f64, l: f64, _y: f64| Ok((0.0, -2.0 * l + 30.0 * s));
        let spec = SingularIvpSpec { rhs: &rhs, alpha: 2.0, m_bound: 2.0, horizon: 0.2 };
        let r = solve_singular_ivp(&spec, 0.0, &grid(4, 0.2));
        assert!(matches!(r, Err(Error::BoundViolated { .. })));
    }
}
