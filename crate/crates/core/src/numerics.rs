//! Small numerical kernels shared by the analysis modules: safeguarded scalar
//! root finding, cubic roots, Gauss quadrature, Chebyshev interpolation,
//! least-squares line fits and low-discrepancy sampling.

use nalgebra::{DMatrix, SymmetricEigen};

/// Safeguarded Newton on a bracket `[lo, hi]` with `f(lo)` and `f(hi)` of opposite sign.
/// `fdf` returns the value and derivative. Falls back to bisection whenever the Newton
/// step leaves the bracket or fails to halve the bracket fast enough.
pub fn rtsafe<F>(mut fdf: F, lo: f64, hi: f64, x0: Option<f64>, xtol: f64, max_iter: usize) -> Option<f64>
where
    F: FnMut(f64) -> Option<(f64, f64)>,
{
    let (flo, _) = fdf(lo)?;
    let (fhi, _) = fdf(hi)?;
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    // orient so that f(a) < 0 < f(b)
    let (mut a, mut b) = if flo < 0.0 { (lo, hi) } else { (hi, lo) };
    let mut x = x0.filter(|x| x.is_finite() && *x > lo.min(hi) && *x < lo.max(hi)).unwrap_or(0.5 * (lo + hi));
    let mut dx_old = (hi - lo).abs();
    let mut dx = dx_old;
    let (mut fx, mut dfx) = fdf(x)?;
    for _ in 0..max_iter {
        if fx == 0.0 {
            return Some(x);
        }
        let newton_ok = dfx != 0.0 && {
            let xn = x - fx / dfx;
            (xn - a) * (xn - b) < 0.0 && (2.0 * fx).abs() <= (dx_old * dfx).abs()
        };
        dx_old = dx;
        if newton_ok {
            dx = fx / dfx;
            x -= dx;
        } else {
            dx = 0.5 * (b - a);
            x = a + dx;
        }
        if dx.abs() <= xtol * (1.0 + x.abs()) {
            return Some(x);
        }
        let r = fdf(x)?;
        fx = r.0;
        dfx = r.1;
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        if (b - a).abs() <= xtol * (1.0 + x.abs()) {
            return Some(x);
        }
    }
    Some(x)
}

/// Real roots of `a μ³ + b μ + c = 0` (depressed cubic, `a ≠ 0`) in ascending order,
/// each polished by Newton.
pub fn depressed_cubic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let p = b / a;
    let q = c / a;
    // μ³ + pμ + q = 0
    let disc = -(4.0 * p * p * p + 27.0 * q * q);
    let mut roots = Vec::with_capacity(3);
    if p == 0.0 {
        roots.push(-q.cbrt());
    } else if disc > 0.0 {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        for k in 0..3 {
            roots.push(m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos());
        }
    } else if disc == 0.0 {
        let r = 3.0 * q / p;
        roots.push(r);
        roots.push(-r / 2.0);
    } else {
        // one real root, Cardano
        let d = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        let u = (-q / 2.0 + d).cbrt();
        let v = (-q / 2.0 - d).cbrt();
        roots.push(u + v);
    }
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let f = *r * *r * *r + p * *r + q;
            let df = 3.0 * *r * *r + p;
            if df == 0.0 {
                break;
            }
            *r -= f / df;
        }
    }
    roots.sort_by(|x, y| x.total_cmp(y));
    roots
}

/// Gauss quadrature on `[0, 1]` for the weight `τ^b`, `b > -1`, via Golub–Welsch on the
/// Jacobi recurrence with parameters (0, b). Returns `(nodes, weights)` ascending.
pub fn gauss_jacobi_unit(n: usize, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && b > -1.0);
    let a = 0.0_f64;
    let ab = a + b;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let denom = (2.0 * kf + ab) * (2.0 * kf + ab + 2.0);
        let diag = if denom == 0.0 { (b - a) / (ab + 2.0) } else { (b * b - a * a) / denom };
        m[(k, k)] = diag;
        if k + 1 < n {
            let j = kf + 1.0;
            let s = 2.0 * j + ab;
            let beta = 4.0 * j * (j + a) * (j + b) * (j + ab) / (s * s * (s + 1.0) * (s - 1.0));
            m[(k, k + 1)] = beta.sqrt();
            m[(k + 1, k)] = beta.sqrt();
        }
    }
    let eig = SymmetricEigen::new(m);
    // total mass of (1+x)^b on [-1,1] is 2^{b+1}/(b+1); mapping to [0,1] divides by 2^{b+1}
    let mass = 1.0 / (b + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            (0.5 * (1.0 + x), mass * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    pairs.into_iter().unzip()
}

/// Gauss–Legendre nodes and weights on `[lo, hi]`.
pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_jacobi_unit(n, 0.0);
    let len = hi - lo;
    (t.iter().map(|t| lo + len * t).collect(), w.iter().map(|w| w * len).collect())
}

/// Chebyshev points of the first kind on `[lo, hi]`, ascending.
pub fn chebyshev_nodes(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let th = std::f64::consts::PI * (2.0 * (n - 1 - j) as f64 + 1.0) / (2.0 * n as f64);
            lo + 0.5 * (hi - lo) * (1.0 + th.cos())
        })
        .collect()
}

/// Barycentric polynomial interpolant through Chebyshev points of the first kind.
#[derive(Clone, Debug)]
pub struct ChebInterp {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ChebInterp {
    pub fn new(n: usize, lo: f64, hi: f64) -> Self {
        let nodes = chebyshev_nodes(n, lo, hi);
        let weights = (0..n)
            .map(|j| {
                let k = n - 1 - j;
                let th = std::f64::consts::PI * (2.0 * k as f64 + 1.0) / (2.0 * n as f64);
                let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * th.sin()
            })
            .collect();
        ChebInterp { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn eval(&self, values: &[f64], x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((xj, wj), fj) in self.nodes.iter().zip(&self.weights).zip(values) {
            let d = x - xj;
            if d == 0.0 {
                return *fj;
            }
            let c = wj / d;
            num += c * fj;
            den += c;
        }
        num / den
    }
}

/// Least-squares line `y = slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub r2: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let stderr = if xs.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    LineFit { slope, intercept, stderr, r2 }
}

/// Fit `log y` against `log x`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> LineFit {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Radical inverse in the given base (Halton sequence component).
pub fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while i > 0 {
        f /= b;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Lagrange basis weights at `x` for the given nodes: value and first derivative.
pub fn lagrange_weights(nodes: &[f64], x: f64) -> (Vec<f64>, Vec<f64>) {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    let mut dw = vec![0.0; n];
    for j in 0..n {
        let mut denom = 1.0;
        for m in 0..n {
            if m != j {
                denom *= nodes[j] - nodes[m];
            }
        }
        let mut prod = 1.0;
        for m in 0..n {
            if m != j {
                prod *= x - nodes[m];
            }
        }
        let mut dsum = 0.0;
        for k in 0..n {
            if k == j {
                continue;
            }
            let mut p = 1.0;
            for m in 0..n {
                if m != j && m != k {
                    p *= x - nodes[m];
                }
            }
            dsum += p;
        }
        w[j] = prod / denom;
        dw[j] = dsum / denom;
    }
    (w, dw)
}

/// Index of the first node of a `width`-point stencil centred on `x` within a uniform grid.
pub fn stencil_start(grid: &[f64], x: f64, width: usize) -> usize {
    let n = grid.len();
    let w = width.min(n);
    let i = match grid.binary_search_by(|g| g.total_cmp(&x)) {
        Ok(i) => i,
        Err(i) => i.saturating_sub(1),
    };
    let start = i.saturating_sub((w - 1) / 2);
    start.min(n - w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_roots_match_known_values() {
        let r = depressed_cubic_roots(1.0, -1.0, -1.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 1.324_717_957_244_746).abs() < 1e-14);
        let r = depressed_cubic_roots(1.0, 1.0, -1.0);
        assert!((r[0] - 0.682_327_803_828_019_3).abs() < 1e-14);
        let r = depressed_cubic_roots(1.0, -1.0, 0.0);
        assert_eq!(r.len(), 3);
        assert!((r[0] + 1.0).abs() < 1e-14 && r[1].abs() < 1e-14 && (r[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_jacobi_integrates_monomials() {
        for &b in &[0.0, 1.0, 3.0, 2.7] {
            let (x, w) = gauss_jacobi_unit(8, b);
            for k in 0..15 {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
                let exact = 1.0 / (b + k as f64 + 1.0);
                assert!((q - exact).abs() < 1e-13, "b={b} k={k}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn chebyshev_interpolant_reproduces_polynomials() {
        let ci = ChebInterp::new(6, 0.0, 0.3);
        let f = |s: f64| 1.0 - 2.0 * s + 3.0 * s.powi(4) - s.powi(5);
        let v: Vec<f64> = ci.nodes().iter().map(|&s| f(s)).collect();
        for &s in &[0.0, 0.01, 0.17, 0.3, 0.31] {
            assert!((ci.eval(&v, s) - f(s)).abs() < 1e-13);
        }
    }

    #[test]
    fn rtsafe_finds_cube_root() {
        let r = rtsafe(|x| Some((x * x * x - 0.001, 3.0 * x * x)), 0.0, 1.0, None, 1e-15, 100).unwrap();
        assert!((r - 0.1).abs() < 1e-14);
    }

    #[test]
    fn lagrange_derivative_is_exact_for_quartics() {
        let nodes = [0.0, 0.1, 0.2, 0.3, 0.4];
        let f = |x: f64| x.powi(4) - x + 2.0;
        let (w, dw) = lagrange_weights(&nodes, 0.23);
        let v: f64 = nodes.iter().zip(&w).map(|(x, w)| w * f(*x)).sum();
        let d: f64 = nodes.iter().zip(&dw).map(|(x, w)| w * f(*x)).sum();
        assert!((v - f(0.23)).abs() < 1e-14);
        assert!((d - (4.0 * 0.23f64.powi(3) - 1.0)).abs() < 1e-12);
    }
}
