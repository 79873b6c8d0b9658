const RADIUS2: f64 = 0.25;
use bergman_extremal::ball::geometry::{be1_ratio, be2_ratio, reproduce_ball, BallDomain};
use bergman_extremal::ball::sampling::BallQuad;
use bergman_extremal::catalog::{BallPoint, Monomial};
use bergman_extremal::quad::TruncationLadder;
use bergman_extremal::{TestFunction, C};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn quadratic(n: usize) -> TestFunction<f64> {
    let mut terms = vec![
        Monomial { coeff: [0.5, -0.25], powers: [0, 0] },
        Monomial { coeff: [1.0, 0.5], powers: [1, 0] },
        Monomial { coeff: [-0.75, 0.0], powers: [2, 0] },
    ];
    if n == 2 {
        terms.push(Monomial { coeff: [0.0, 1.0], powers: [0, 1] });
        terms.push(Monomial { coeff: [0.5, 0.5], powers: [1, 1] });
        terms.push(Monomial { coeff: [0.25, 0.0], powers: [0, 2] });
    }
    TestFunction::polynomial(n, terms).unwrap()
}

fn random_points(n: usize, count: usize, seed: u64) -> Vec<BallPoint<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let mut z = [C::new(0.0, 0.0); 2];
        for c in z.iter_mut().take(n) {
            *c = C::new(rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8));
        }
        if z[0].norm_sqr() + z[1].norm_sqr() < RADIUS2 {
            out.push(z);
        }
    }
    out
}

#[test]
fn polynomial_reproduction() {
    let ladder = TruncationLadder::ball_default();
    for n in [1, 2] {
        let f = quadratic(n);
        let seeds: &[u64] = if n == 1 { &[0] } else { &[1, 2, 3] };
        for &seed in seeds {
            let bq = BallQuad { seed, ..BallQuad::default() };
            let mut worst: f64 = 0.0;
            for z in random_points(n, 10, 11) {
                let r = reproduce_ball(&f, &z, 2.0, &ladder, &bq).unwrap();
                worst = worst.max((r.value - f.eval_ball(&z).unwrap()).norm());
            }
            assert!(worst <= if n == 1 { 1e-3 } else { 1e-2 });
        }
    }
}

#[test]
fn forelli_rudin_plateau() {
    let ladder = TruncationLadder::ball_default();
    let bq = BallQuad::default();
    let dom = BallDomain::new(1).unwrap();
    let ratios: Vec<f64> = (5..=8)
        .map(|m| {
            let xi = BallDomain::radial(1.0 - 2f64.powi(-m));
            be2_ratio(dom, &xi, 4.0, 1.0, &ladder, &bq).unwrap().ratio
        })
        .collect();
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    assert!(max / min <= 2.0);
}

#[test]
fn be1_ratio_is_stable_along_a_radius() {
    let ladder = TruncationLadder::ball_default();
    let bq = BallQuad::default();
    let f = TestFunction::ball_pole(1, 1.0).unwrap();
    let ratios: Vec<f64> = (1..=8)
        .map(|m| {
            let z = BallDomain::radial(1.0 - 2f64.powi(-m));
            be1_ratio(&f, 2.0, 1.0, 0.5, &z, &ladder, &bq).unwrap().ratio
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!(ratios.iter().all(|r| r.is_finite() && (r / mean - 1.0).abs() <= 0.3));
}
