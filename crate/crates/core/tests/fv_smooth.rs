//! Godunov reference against the characteristic solution before blowup.

use shockform::blowup_analysis::{find_first_blowup, Gamma};
use shockform::field_eval::Window;
use shockform::problem_model::{make_problem, preset_def, DomainBox, PresetId};
use shockform::reference_fv::{compare_fv, run_fv, smooth_error, GridSpec};
use shockform::Error;

#[test]
fn smooth_regime_matches_in_max_norm() {
    let d = DomainBox::new(-1.0, 1.0, -0.5, 0.5);
    let p = make_problem(preset_def(PresetId::A).0, d).unwrap();
    let gnc = find_first_blowup(&p).unwrap();
    let gm = Gamma::build(&p, &gnc, 0.4).unwrap();
    let grid = run_fv(&p, &GridSpec::new(256, 256, d), 0.5).unwrap();
    let win = Window::new(&gm, None);
    let err = smooth_error(&p, &grid, &win, 0.5).unwrap();
    assert!(err <= 0.01, "{err}");
    assert!(matches!(compare_fv(&p, &grid, &win, 0.5), Err(Error::OutsideWindow { .. } | Error::ShockNotDetected)));
}
