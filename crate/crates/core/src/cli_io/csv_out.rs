//! CSV schemas and writers. Floats are written with 17 significant digits so every value
//! round-trips exactly.

use std::path::Path;

use crate::blowup_analysis::{CuspCoeffs, GammaSample};
use crate::error::Result;
use crate::field_eval::{ExponentFit, FieldSample};
use crate::multivalued_inversion::CharRoots;
use crate::reference_fv::{FieldGrid, RowShock};
use crate::shock_front::FrontState;

pub const GAMMA_HEADER: &[&str] = &["y", "T_star", "Xi_star", "Y_star", "x_star", "tangent_slope", "residual"];
pub const CUSP_HEADER: &[&str] =
    &["y", "D0", "D1", "D2", "D3", "A1", "A2", "a_star", "b_star", "c1", "c2", "theta0"];
pub const ROOTS_HEADER: &[&str] = &["t", "x", "y", "region", "branch", "xi", "eta", "residual", "jacobian_D"];
pub const FRONT_HEADER: &[&str] = &[
    "t",
    "y",
    "w",
    "u_minus",
    "u_plus",
    "dw_dt",
    "dw_dy",
    "rh_residual",
    "entropy_margin_plus",
    "entropy_margin_minus",
];
pub const FIELD_HEADER: &[&str] =
    &["t", "x", "y", "u", "u_t", "u_x", "u_y", "u_T", "region", "branch", "xi", "eta", "jacobian_D"];
pub const EXPONENTS_HEADER: &[&str] =
    &["y", "direction", "quantity", "side", "r_max", "n", "slope", "stderr", "r2", "decades"];
pub const FV_FIELD_HEADER: &[&str] = &["x", "y", "u"];
pub const FV_COMPARE_HEADER: &[&str] = &["y", "T_star", "detected_x", "w", "offset_cells"];
pub const VERIFY_HEADER: &[&str] = &["criterion", "name", "metric", "value", "relation", "limit", "passed"];

pub type Row = Vec<String>;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn gamma_row(g: &GammaSample) -> Row {
    [g.y, g.t_star, g.xi_star, g.y_star, g.x_star, g.tangent_slope, g.residual].map(num).to_vec()
}

pub fn cusp_row(c: &CuspCoeffs) -> Row {
    [c.y, c.d0, c.d1, c.d2, c.d3, c.a1, c.a2, c.a_star, c.b_star, c.c1, c.c2, c.theta0].map(num).to_vec()
}

/// One row per root.
pub fn roots_rows(r: &CharRoots) -> Vec<Row> {
    r.roots
        .iter()
        .map(|q| {
            vec![
                num(r.t),
                num(r.x),
                num(r.y),
                r.region.name().into(),
                q.branch.name().into(),
                num(q.xi),
                num(q.eta),
                num(q.residual),
                num(q.jacobian_d),
            ]
        })
        .collect()
}

pub fn front_row(s: &FrontState) -> Row {
    [s.t, s.y, s.w, s.u_minus, s.u_plus, s.dw_dt, s.dw_dy, s.rh_residual, s.entropy_margin_plus, s.entropy_margin_minus]
        .map(num)
        .to_vec()
}

pub fn field_row(f: &FieldSample) -> Row {
    let g = f.grad;
    vec![
        num(f.t),
        num(f.x),
        num(f.y),
        num(f.u),
        opt(g.map(|g| g[0])),
        opt(g.map(|g| g[1])),
        opt(g.map(|g| g[2])),
        opt(f.tangential),
        f.region.name().into(),
        f.branch.name().into(),
        num(f.xi),
        num(f.eta),
        num(f.jacobian_d),
    ]
}

pub fn exponent_row(e: &ExponentFit) -> Row {
    let r = &e.ray;
    vec![
        num(r.y),
        r.direction.name().into(),
        r.quantity.name().into(),
        num(r.side),
        num(r.r_max),
        r.n.to_string(),
        num(e.slope),
        num(e.stderr),
        num(e.r2),
        num(e.decades),
    ]
}

pub fn fv_rows(g: &FieldGrid) -> Vec<Row> {
    let mut rows = Vec::with_capacity(g.nx * g.ny);
    for j in 0..g.ny {
        for i in 0..g.nx {
            rows.push(vec![num(g.xc(i)), num(g.yc(j)), num(g.at(i, j))]);
        }
    }
    rows
}

pub fn fv_compare_row(r: &RowShock) -> Row {
    vec![num(r.y), num(r.t_star), opt(r.detected_x), opt(r.w), opt(r.offset_cells)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.0f64.sqrt(), 1e-300, 6.02214076e23, 0.0] {
            let s = num(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(num(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn writer_emits_header_first() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&path, FV_FIELD_HEADER, &[vec![num(0.5), num(-0.5), num(1.0)]]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), "x,y,u");
        assert_eq!(text.lines().count(), 2);
    }
}
