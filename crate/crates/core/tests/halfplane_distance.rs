use bergman_extremal::halfplane::distance::{
    check_decomposition, decompose, estimate_l2, f1_grid, phi_functional, sample_points, DistanceOptions,
};
use bergman_extremal::quad::{ConvergenceVerdict, QuadSettings, TruncationLadder};
use bergman_extremal::{HalfPlaneParams, TestFunction};

fn params() -> HalfPlaneParams<f64> {
    HalfPlaneParams::validate(2.0, 0.0, 1.0).unwrap()
}

#[test]
fn pure_power_distance_brackets_the_norm() {
    let ladder = TruncationLadder::halfplane_default();
    let est = estimate_l2(&TestFunction::pure_power(1.0), &params(), &ladder, &DistanceOptions::default()).unwrap();
    assert!(est.contains(1.0), "{:?}", (est.eps_lo, est.eps_hi));
    assert!(est.eps_lo >= 0.85 && est.eps_hi <= 1.05);
    assert!(est.is_consistent());
}

#[test]
fn phi_grows_linearly_below_the_distance() {
    let ladder = TruncationLadder::halfplane_default();
    let r = phi_functional(&TestFunction::pure_power(1.0), 0.5, &params(), &ladder, &DistanceOptions::default())
        .unwrap();
    assert_eq!(r.verdict, ConvergenceVerdict::Divergent);
    let (slope, r2) = r.linear_fit_tail(5);
    assert!(slope > 0.0 && r2 >= 0.99, "slope {slope} r2 {r2}");
}

#[test]
fn compact_level_sets_give_zero_distance() {
    let ladder = TruncationLadder::halfplane_default().with_max_exp(14);
    let est = estimate_l2(&TestFunction::power_shift(2.0), &params(), &ladder, &DistanceOptions::default()).unwrap();
    assert_eq!(est.eps_lo, 0.0);
    assert!(est.eps_hi <= 0.1 * est.norm_inf);
}

#[test]
fn decomposition_reassembles_f() {
    let f = TestFunction::power_shift(2.0);
    let ladder = TruncationLadder::halfplane_default();
    let opts = DistanceOptions::default();
    let settings = QuadSettings::default();
    let norm_settings = QuadSettings {
        tol: 1e-3,
        max_cells: 5_000,
        ..QuadSettings::default()
    };
    let dec = decompose(&f, 0.1, &params(), &ladder, &opts, &settings).unwrap();
    let check = check_decomposition(&dec, &f1_grid(), &sample_points(), &norm_settings).unwrap();
    assert!(check.residual <= 2e-3);
    assert_eq!(check.f2_norm.verdict, ConvergenceVerdict::Convergent);
}
