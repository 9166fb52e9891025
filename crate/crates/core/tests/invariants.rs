//! Cross-module invariants on the preset problems, checked at random points.

use std::sync::OnceLock;

use proptest::prelude::*;
use shockform::blowup_analysis::{find_first_blowup, Gamma};
use shockform::char_geometry::forward_char;
use shockform::field_eval::{eval_gradient, eval_solution, weak_residual, TestFunction, Window};
use shockform::multivalued_inversion::{invert_point, Branch, Region};
use shockform::numerics::{depressed_cubic_roots, gauss_legendre};
use shockform::problem_model::{preset, PresetId, Problem};
use shockform::shock_front::{check_entropy, default_beta, front_states, jump_averages, solve_front, FrontConfig, ShockFront};
use shockform::Error;

struct Fixture {
    p: Problem,
    gm: Gamma,
    front: ShockFront,
}

impl Fixture {
    fn build(id: PresetId) -> Fixture {
        let p = preset(id);
        let gnc = find_first_blowup(&p).unwrap();
        let gm = Gamma::build(&p, &gnc, 0.4).unwrap();
        let front = solve_front(&p, &gm, &FrontConfig::new(default_beta(&gm, 17), 0.25)).unwrap();
        Fixture { p, gm, front }
    }

    fn win(&self) -> Window<'_> {
        Window::new(&self.gm, Some(&self.front))
    }
}

fn fixture(id: PresetId) -> &'static Fixture {
    static A: OnceLock<Fixture> = OnceLock::new();
    static B: OnceLock<Fixture> = OnceLock::new();
    match id {
        PresetId::A => A.get_or_init(|| Fixture::build(id)),
        PresetId::B => B.get_or_init(|| Fixture::build(id)),
    }
}

fn preset_id() -> impl Strategy<Value = PresetId> {
    prop_oneof![Just(PresetId::A), Just(PresetId::B)]
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn gamma_time_matches_closed_form(y in -0.15f64..0.15) {
        let f = fixture(PresetId::A);
        let g = f.gm.at(&f.p, y).unwrap();
        prop_assert!((g.t_star - 1.0 / (1.0 - 3.0 * y * y)).abs() <= 1e-10);
        prop_assert!(g.x_star.abs() <= 1e-12);
    }

    #[test]
    fn roots_map_forward_to_the_point(id in preset_id(), dt in -0.05f64..0.1, u in -1.5f64..1.5, y in -0.05f64..0.05) {
        let f = fixture(id);
        let g = f.gm.at(&f.p, y).unwrap();
        let t = g.t_star + dt;
        // scale the offset with the cusp so both single- and triple-root points are drawn
        let x = g.x_tangent(t) + u * 0.5 * dt.abs().powf(1.5);
        let r = invert_point(&f.p, &f.gm, t, x, y).unwrap();
        prop_assert!(matches!(r.roots.len(), 1..=3));
        if r.region == Region::InsideCusp {
            prop_assert_eq!(r.roots.len(), 3);
        }
        for q in &r.roots {
            let (xf, yf) = forward_char(&f.p, t, q.xi, q.eta).unwrap();
            prop_assert!((xf - x).abs() <= 1e-10 && (yf - y).abs() <= 1e-10, "{:?}", q);
        }
    }

    #[test]
    fn gradient_matches_central_differences(id in preset_id(), dt in -0.04f64..0.04, u in -1.0f64..1.0, y in -0.04f64..0.04) {
        let f = fixture(id);
        let win = f.win();
        let g = f.gm.at(&f.p, y).unwrap();
        let t = g.t_star + dt;
        let x = g.x_tangent(t) + 0.02 * u;
        let fs = match eval_gradient(&f.p, &win, t, x, y) {
            Ok(fs) => fs,
            Err(Error::OnShock | Error::JacobianVanishing { .. }) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let h = 1e-6;
        let val = |t: f64, x: f64, y: f64| eval_solution(&f.p, &win, t, x, y).ok().filter(|s| s.branch == fs.branch).map(|s| s.u);
        let pts = [(t + h, x, y), (t - h, x, y), (t, x + h, y), (t, x - h, y), (t, x, y + h), (t, x, y - h)];
        let v: Vec<Option<f64>> = pts.iter().map(|&(a, b, c)| val(a, b, c)).collect();
        prop_assume!(v.iter().all(Option::is_some));
        let v: Vec<f64> = v.into_iter().flatten().collect();
        let fd = [(v[0] - v[1]) / (2.0 * h), (v[2] - v[3]) / (2.0 * h), (v[4] - v[5]) / (2.0 * h)];
        let gr = fs.grad.unwrap();
        let norm = gr.iter().map(|q| q * q).sum::<f64>().sqrt().max(1.0);
        for k in 0..3 {
            prop_assert!((gr[k] - fd[k]).abs() / norm <= 1e-4, "component {}: {} vs {}", k, gr[k], fd[k]);
        }
    }

    #[test]
    fn front_states_satisfy_rh_and_entropy(id in preset_id(), frac in 0.0f64..1.0, y in -0.05f64..0.05) {
        let f = fixture(id);
        let g = f.gm.at(&f.p, y).unwrap();
        let t = g.t_star + 0.2 * frac;
        let st = front_states(&f.front, &f.p, t, y).unwrap();
        prop_assert!(st.rh_residual <= 1e-8);
        let (mp, mm) = check_entropy(&st, &f.p).unwrap();
        if t > g.t_star + 1e-6 {
            prop_assert!(mp > 0.0 && mm > 0.0);
            prop_assert!(st.u_minus > st.u_plus);
        }
    }

    #[test]
    fn jump_averages_are_symmetric(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let p = preset(PresetId::B);
        let (f1, g1) = jump_averages(&p, a, b);
        let (f2, g2) = jump_averages(&p, b, a);
        prop_assert!((f1 - f2).abs() <= 1e-12 && (g1 - g2).abs() <= 1e-12);
        // exact divided differences for F = u²/2 and G = u³/3
        prop_assert!((f1 - 0.5 * (a + b)).abs() <= 1e-9);
        prop_assert!((g1 - (a * a + a * b + b * b) / 3.0).abs() <= 1e-9);
    }

    #[test]
    fn cubic_roots_solve_the_cubic(a in 0.1f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
        let roots = depressed_cubic_roots(a, b, c);
        prop_assert!(roots.len() == 1 || roots.len() == 3);
        prop_assert!(roots.windows(2).all(|w| w[0] <= w[1]));
        for r in roots {
            let scale = 1.0 + (a * r * r * r).abs() + (b * r).abs() + c.abs();
            prop_assert!((a * r * r * r + b * r + c).abs() <= 1e-12 * scale);
        }
    }
}

/// Test functions whose supports straddle the front, with characteristic feet inside the box.
const TEST_FUNCTIONS: [TestFunction; 3] = [
    TestFunction { centre: [1.1, 0.01, 0.0], half_width: [0.05, 0.05, 0.04] },
    TestFunction { centre: [1.12, 0.01, 0.03], half_width: [0.04, 0.05, 0.03] },
    TestFunction { centre: [1.08, -0.015, -0.02], half_width: [0.05, 0.04, 0.03] },
];

#[test]
fn weak_form_holds_across_the_front() {
    for id in [PresetId::A, PresetId::B] {
        let f = fixture(id);
        for chi in &TEST_FUNCTIONS {
            let r = weak_residual(&f.p, &f.win(), chi, 16).unwrap();
            assert!(r.scale > 1e-6);
            assert!(r.relative() <= 1e-6, "{id:?} {chi:?}: {}", r.relative());
        }
    }
}

#[test]
fn weak_form_fails_with_a_misplaced_front() {
    // continue the minus branch past the front up to w + shift: the jump then violates RH
    let f = fixture(PresetId::A);
    let win = f.win();
    let chi = TEST_FUNCTIONS[0];
    let shift = 0.002;
    let field = |t: f64, x: f64, y: f64| -> f64 {
        let w = f.front.w(&f.p, t, y).unwrap();
        if x > w && x < w + shift {
            let r = invert_point(&f.p, &f.gm, t, x, y).unwrap();
            let q = r.roots.iter().find(|q| q.branch == Branch::Minus).unwrap();
            return f.p.u0(q.xi, q.eta);
        }
        eval_solution(&f.p, &win, t, x, y).unwrap().u
    };
    let (tq, tw) = gauss_legendre(12, 1.05, 1.15);
    let (yq, yw) = gauss_legendre(12, -0.04, 0.04);
    let (xq, xw) = gauss_legendre(200, -0.04, 0.06);
    let (mut sum, mut scale) = (0.0, 0.0);
    for (t, a) in tq.iter().zip(&tw) {
        for (y, b) in yq.iter().zip(&yw) {
            for (x, c) in xq.iter().zip(&xw) {
                let u = field(*t, *x, *y);
                let [_, kt, kx, _] = chi.eval(*t, *x, *y);
                sum += a * b * c * (u * kt + 0.5 * u * u * kx);
                scale += a * b * c * ((u * kt).abs() + (0.5 * u * u * kx).abs());
            }
        }
    }
    assert!(sum.abs() / scale > 1e-4, "{}", sum.abs() / scale);
}
