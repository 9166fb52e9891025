//! Bivariate derivative jets truncated at total order 4.

pub const ORDER: usize = 4;
const N: usize = ORDER + 1;

const FACT: [f64; N] = [1.0, 1.0, 2.0, 6.0, 24.0];

/// Partial derivatives `∂^{i+j} / ∂ξ^i ∂η^j` for `i + j ≤ 4`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Jet2 {
    d: [[f64; N]; N],
}

impl Jet2 {
    pub fn zero() -> Self {
        Jet2::default()
    }

    pub fn constant(v: f64) -> Self {
        let mut j = Jet2::zero();
        j.d[0][0] = v;
        j
    }

    /// Jet of the coordinate function ξ (axis 0) or η (axis 1) at the value `v`.
    pub fn variable(axis: usize, v: f64) -> Self {
        let mut j = Jet2::constant(v);
        if axis == 0 {
            j.d[1][0] = 1.0;
        } else {
            j.d[0][1] = 1.0;
        }
        j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + j > ORDER {
            0.0
        } else {
            self.d[i][j]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i + j <= ORDER);
        self.d[i][j] = v;
    }

    pub fn value(&self) -> f64 {
        self.d[0][0]
    }

    /// Iterator over all admissible multi-indices.
    pub fn indices() -> impl Iterator<Item = (usize, usize)> {
        (0..N).flat_map(|k| (0..=k).map(move |i| (i, k - i)))
    }

    /// Shifted jet `∂_axis` of this one; the top order is lost.
    pub fn derivative(&self, axis: usize) -> Jet2 {
        let mut out = Jet2::zero();
        for (i, j) in Jet2::indices() {
            let (a, b) = if axis == 0 { (i + 1, j) } else { (i, j + 1) };
            if a + b <= ORDER {
                out.d[i][j] = self.d[a][b];
            }
        }
        out
    }

    /// Truncate derivatives above total order `k` to zero.
    pub fn truncated(&self, k: usize) -> Jet2 {
        let mut out = *self;
        for (i, j) in Jet2::indices() {
            if i + j > k {
                out.d[i][j] = 0.0;
            }
        }
        out
    }

    fn to_taylor(self) -> [[f64; N]; N] {
        let mut t = [[0.0; N]; N];
        for (i, j) in Jet2::indices() {
            t[i][j] = self.d[i][j] / (FACT[i] * FACT[j]);
        }
        t
    }

    fn from_taylor(t: &[[f64; N]; N]) -> Jet2 {
        let mut out = Jet2::zero();
        for (i, j) in Jet2::indices() {
            out.d[i][j] = t[i][j] * FACT[i] * FACT[j];
        }
        out
    }

    fn taylor_mul(a: &[[f64; N]; N], b: &[[f64; N]; N]) -> [[f64; N]; N] {
        let mut c = [[0.0; N]; N];
        for (i1, j1) in Jet2::indices() {
            let av = a[i1][j1];
            if av == 0.0 {
                continue;
            }
            for (i2, j2) in Jet2::indices() {
                if i1 + i2 + j1 + j2 > ORDER {
                    continue;
                }
                c[i1 + i2][j1 + j2] += av * b[i2][j2];
            }
        }
        c
    }

    pub fn mul(&self, other: &Jet2) -> Jet2 {
        Jet2::from_taylor(&Jet2::taylor_mul(&self.to_taylor(), &other.to_taylor()))
    }

    pub fn add(&self, other: &Jet2) -> Jet2 {
        let mut out = *self;
        for (i, j) in Jet2::indices() {
            out.d[i][j] += other.d[i][j];
        }
        out
    }

    pub fn scale(&self, s: f64) -> Jet2 {
        let mut out = *self;
        for (i, j) in Jet2::indices() {
            out.d[i][j] *= s;
        }
        out
    }

    /// Jet of `h(u(ξ,η))` given `derivs[k] = h^{(k)}(u(ξ,η))` for `k = 0..=4`.
    pub fn compose(derivs: &[f64], u: &Jet2) -> Jet2 {
        let mut v = u.to_taylor();
        v[0][0] = 0.0;
        let mut acc = [[0.0; N]; N];
        acc[0][0] = derivs[0];
        let mut pow = [[0.0; N]; N];
        pow[0][0] = 1.0;
        for k in 1..N.min(derivs.len()) {
            pow = Jet2::taylor_mul(&pow, &v);
            let c = derivs[k] / FACT[k];
            for (i, j) in Jet2::indices() {
                acc[i][j] += c * pow[i][j];
            }
        }
        Jet2::from_taylor(&acc)
    }
}
