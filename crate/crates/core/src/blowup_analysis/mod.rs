//! First blowup point, the blowup curve Γ and the cusp coefficients along it.

pub mod curve;
pub mod cusp;
pub mod gnc;

pub use curve::{blowup_curve, continue_to, gamma_newton, GammaSample};
pub use cusp::{
    char_map, cusp_boundary, cusp_boundary_expansion, cusp_coeffs, folds, leading_forms, CuspCoeffs, Folds,
    LeadingForms,
};
pub use gnc::{find_first_blowup, GncReport};

use crate::error::{Error, Result};
use crate::problem_model::Problem;

pub const GAMMA_SAMPLES: usize = 81;
const MIN_DELTA: f64 = 1e-3;

/// Γ traced on a uniform grid over `[y₀ − δ, y₀ + δ]`. `δ` is halved until every sample
/// converges and every cusp coefficient has the required sign.
#[derive(Clone, Debug)]
pub struct Gamma {
    pub gnc: GncReport,
    pub delta: f64,
    pub samples: Vec<GammaSample>,
    pub coeffs: Vec<CuspCoeffs>,
}

impl Gamma {
    pub fn build(p: &Problem, gnc: &GncReport, delta: f64) -> Result<Gamma> {
        let mut delta = delta;
        loop {
            let ys: Vec<f64> = (0..GAMMA_SAMPLES)
                .map(|k| gnc.y0 - delta + 2.0 * delta * k as f64 / (GAMMA_SAMPLES - 1) as f64)
                .collect();
            let attempt = blowup_curve(p, gnc, &ys).and_then(|s| {
                let c = s.iter().map(|g| cusp_coeffs(p, g)).collect::<Result<Vec<_>>>()?;
                Ok((s, c))
            });
            match attempt {
                Ok((samples, coeffs)) => return Ok(Gamma { gnc: *gnc, delta, samples, coeffs }),
                Err(e) if delta * 0.5 < MIN_DELTA => return Err(e),
                Err(_) => delta *= 0.5,
            }
        }
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.gnc.y0 - self.delta, self.gnc.y0 + self.delta)
    }

    pub fn contains(&self, y: f64) -> bool {
        let (a, b) = self.y_range();
        y >= a - 1e-14 && y <= b + 1e-14
    }

    fn nearest(&self, y: f64) -> usize {
        let (a, _) = self.y_range();
        let h = 2.0 * self.delta / (GAMMA_SAMPLES - 1) as f64;
        (((y - a) / h).round().max(0.0) as usize).min(GAMMA_SAMPLES - 1)
    }

    /// The exact Γ point at `y`, continued from the nearest cached sample.
    pub fn at(&self, p: &Problem, y: f64) -> Result<GammaSample> {
        if !self.contains(y) {
            let (lo, hi) = self.y_range();
            return Err(Error::WindowExceeded { what: "y", value: y, limit: if y < lo { lo } else { hi } });
        }
        let s = &self.samples[self.nearest(y)];
        if s.y == y {
            return Ok(*s);
        }
        continue_to(p, s, y)
    }

    pub fn coeffs_at(&self, p: &Problem, y: f64) -> Result<(GammaSample, CuspCoeffs)> {
        let i = self.nearest(y);
        if self.contains(y) && self.samples[i].y == y {
            return Ok((self.samples[i], self.coeffs[i]));
        }
        let g = self.at(p, y)?;
        Ok((g, cusp_coeffs(p, &g)?))
    }
}
