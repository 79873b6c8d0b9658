//! The acceptance suite: one sub-report with pass/fail per criterion.

use std::f64::consts::PI;

use bergman_extremal::ball::distance::{estimate_omega2, BallDistanceOptions};
use bergman_extremal::ball::geometry::{be1_ratio, be2_ratio, reproduce_ball, BallDomain};
use bergman_extremal::ball::sampling::BallQuad;
use bergman_extremal::catalog::Monomial;
use bergman_extremal::halfplane::bergman::{lemma3_ratio, norm_p_alpha, reproduce};
use bergman_extremal::halfplane::distance::{
    check_decomposition, decompose, estimate_l2, f1_grid, phi_functional, sample_points, DecompositionCheck,
    DistanceOptions,
};
use bergman_extremal::quad::{ConvergenceVerdict, QuadSettings, TruncationLadder};
use bergman_extremal::whitney::{overlap_multiplicity_at, DEFAULT_LAMBDA};
use bergman_extremal::{Ball, BallPoint, Estimate, Function, HalfPlane, Ladder, Result, TestFunction, C};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::commands::{spread, viewport_samples};
use crate::config::{RunConfig, Viewport};
use crate::error::CliError;
use crate::report::Artifacts;
use crate::whitney_check::partition_violations;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub criteria: Vec<Criterion>,
}

impl SuiteReport {
    pub fn failed(&self) -> usize {
        self.criteria.iter().filter(|c| !c.pass).count()
    }
}

const EPS_TOL: f64 = 1.0 / 128.0;

fn hp_params() -> HalfPlane {
    HalfPlane::validate(2.0, 0.0, 1.0).expect("valid parameters")
}

fn ball_params() -> Ball {
    Ball::validate(1, 2.0, 1.0, 2.0).expect("valid parameters")
}

fn hp_ladder() -> Ladder {
    TruncationLadder::halfplane_default()
}

fn ball_ladder() -> Ladder {
    TruncationLadder::ball_default()
}

fn max(xs: &[f64]) -> f64 {
    xs.iter().cloned().fold(f64::MIN, f64::max)
}

fn min(xs: &[f64]) -> f64 {
    xs.iter().cloned().fold(f64::MAX, f64::min)
}

pub fn halfplane_decomposition(
    f: &Function,
    eps: f64,
    params: &HalfPlane,
    ladder: &Ladder,
    cfg: &RunConfig,
) -> Result<DecompositionCheck<f64>> {
    let mut opts = DistanceOptions::default();
    opts.quad = cfg.settings_or(opts.quad);
    let norm = QuadSettings { tol: 1e-3, max_cells: 5_000, ..QuadSettings::default() };
    let dec = decompose(f, eps, params, ladder, &opts, &cfg.settings_or(QuadSettings::default()))?;
    check_decomposition(&dec, &f1_grid(), &sample_points(), &norm)
}

fn c01_reproduction() -> Result<(bool, Value)> {
    let f = TestFunction::power_shift(2.0);
    let settings = QuadSettings::default();
    let mut rel: Vec<f64> = Vec::new();
    for z in sample_points() {
        let r = reproduce(&f, z, 1.0, Some((2.0, 0.0)), &hp_ladder(), &settings)?;
        let exact = f.eval_plane(z)?;
        rel.push((r.value - exact).norm() / exact.norm());
    }
    let worst = max(&rel);
    Ok((worst <= 1e-3, json!({"points": rel.len(), "max_rel_error": worst})))
}

fn c02_kernel_integral() -> Result<(bool, Value)> {
    let settings = QuadSettings::default();
    let ws = [C::new(0.0, 1.0), C::new(0.0, 2.0), C::new(1.0, 1.0), C::new(0.0, 0.1)];
    let mut ratios = Vec::new();
    for w in ws {
        ratios.push(lemma3_ratio(w, 0.0, 4.0, &hp_ladder(), &settings)?.ratio);
    }
    let err = max(&ratios.iter().map(|r| (r - PI / 4.0).abs()).collect::<Vec<_>>());
    let sp = spread(&ratios);
    Ok((err <= 1e-3 && sp <= 5e-3, json!({"ratios": ratios, "max_abs_error": err, "spread": sp})))
}

fn c03_whitney(seed: u64) -> Result<(bool, Value)> {
    let vp = Viewport { x0: -8.0, x1: 8.0, y0: 2f64.powi(-8), y1: 2f64.powi(8) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = viewport_samples(&vp, 100_000, &mut rng);
    let m = overlap_multiplicity_at(pts.iter().copied(), DEFAULT_LAMBDA)?;
    let part = viewport_samples(&vp, 10_000, &mut rng);
    let violations = partition_violations(&part)?;
    Ok((
        (1..=9).contains(&m) && violations == 0,
        json!({"overlap_points": pts.len(), "multiplicity": m, "partition_points": part.len(), "violations": violations}),
    ))
}

fn c04_norms() -> Result<(bool, Value)> {
    let settings = QuadSettings::default();
    let a = norm_p_alpha(&TestFunction::power_shift(2.0), 2.0, 0.0, &hp_ladder(), &settings)?;
    let b = norm_p_alpha(&TestFunction::pure_power(1.0), 2.0, 0.0, &hp_ladder(), &settings)?;
    let exact = PI.sqrt() / 2.0;
    let ok = a.value.is_some_and(|v| (v - exact).abs() <= 1e-3) && b.verdict == ConvergenceVerdict::Divergent;
    Ok((ok, json!({"power_shift": a.value, "exact": exact, "pure_power_verdict": b.verdict})))
}

fn c05_homogeneous(art: &mut Artifacts) -> std::result::Result<((bool, Value), Estimate), CliError> {
    let f = TestFunction::pure_power(1.0);
    let opts = DistanceOptions::default();
    let est = estimate_l2(&f, &hp_params(), &hp_ladder(), &opts)?;
    let phi = phi_functional(&f, 0.5, &hp_params(), &hp_ladder(), &opts)?;
    art.ladder("c05_phi_ladder.csv", &phi)?;
    let (slope, r2) = phi.linear_fit_tail(5);
    let ok = est.eps_lo >= 0.85 && est.eps_hi <= 1.05 && r2 >= 0.99 && slope > 0.0;
    let detail = json!({
        "eps_lo": est.eps_lo, "eps_hi": est.eps_hi, "norm_inf": est.norm_inf,
        "phi_verdict": phi.verdict, "phi_slope": slope, "phi_r2": r2,
    });
    Ok(((ok, detail), est))
}

fn c06_membership() -> Result<(bool, Value)> {
    let ladder = hp_ladder().with_max_exp(14);
    let est = estimate_l2(&TestFunction::power_shift(2.0), &hp_params(), &ladder, &DistanceOptions::default())?;
    let ok = est.eps_lo == 0.0 && est.eps_hi <= 0.1 * est.norm_inf;
    Ok((ok, json!({"eps_lo": est.eps_lo, "eps_hi": est.eps_hi, "norm_inf": est.norm_inf, "max_exp": 14})))
}

fn scaling_rows<F>(base: &Estimate, mut scaled: F) -> Result<(bool, Vec<Value>)>
where
    F: FnMut(f64) -> Result<Estimate>,
{
    let mut ok = true;
    let mut rows = Vec::new();
    for lambda in [0.5, 2.0, 5.0] {
        let e = scaled(lambda)?;
        let tol = EPS_TOL * lambda * base.norm_inf;
        let d_lo = (e.eps_lo - lambda * base.eps_lo).abs();
        let d_hi = (e.eps_hi - lambda * base.eps_hi).abs();
        ok &= d_lo <= tol && d_hi <= tol;
        rows.push(json!({"lambda": lambda, "eps_lo": e.eps_lo, "eps_hi": e.eps_hi, "lo_dev": d_lo, "hi_dev": d_hi, "tol": tol}));
    }
    Ok((ok, rows))
}

fn c07_scaling(l2: &Estimate, omega: &Estimate, seed: u64) -> Result<(bool, Value)> {
    let f = TestFunction::pure_power(1.0);
    let (ok_a, a) = scaling_rows(l2, |lam| {
        estimate_l2(&f.scaled(lam), &hp_params(), &hp_ladder(), &DistanceOptions::default())
    })?;
    let g = TestFunction::ball_pole(1, 1.0)?;
    let (ok_b, b) = scaling_rows(omega, |lam| {
        estimate_omega2(&g.scaled(lam), &ball_params(), &ball_ladder(), &ball_opts(seed))
    })?;
    Ok((ok_a && ok_b, json!({"l2": {"base": [l2.eps_lo, l2.eps_hi], "scaled": a}, "omega2": {"base": [omega.eps_lo, omega.eps_hi], "scaled": b}})))
}

fn c08_decomposition(cfg: &RunConfig) -> Result<(bool, Value)> {
    let f = TestFunction::power_shift(2.0);
    let mut ok = true;
    let mut rows = Vec::new();
    let mut sups = Vec::new();
    for k in [0.2, 0.4, 0.6, 0.8] {
        let eps = k * 0.25;
        let c = halfplane_decomposition(&f, eps, &hp_params(), &hp_ladder(), cfg)?;
        ok &= c.residual <= 2e-3 && c.f2_norm.verdict == ConvergenceVerdict::Convergent;
        sups.push(c.f1_sup_over_eps);
        rows.push(json!({
            "eps": eps, "residual": c.residual, "f1_sup_over_eps": c.f1_sup_over_eps,
            "f2_norm": c.f2_norm.value, "f2_verdict": c.f2_norm.verdict, "nodes": c.nodes,
        }));
    }
    let stable = max(&sups) <= 10.0 * min(&sups) && min(&sups) > 0.0;
    Ok((ok && stable, json!({"grid": rows, "f1_sup_ratio": max(&sups) / min(&sups)})))
}

fn quadratic(n: usize) -> Result<Function> {
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
    TestFunction::polynomial(n, terms)
}

/// Ten points with `|z|² < 1/4`.
fn interior_points(n: usize) -> Vec<BallPoint<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut out = Vec::new();
    while out.len() < 10 {
        let mut z = [C::new(0.0, 0.0); 2];
        for c in z.iter_mut().take(n) {
            *c = C::new(rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8));
        }
        if z[0].norm_sqr() + z[1].norm_sqr() < 0.25 {
            out.push(z);
        }
    }
    out
}

fn c09_ball_reproduction(seed: u64) -> Result<(bool, Value)> {
    let mut ok = true;
    let mut rows = Vec::new();
    for n in [1, 2] {
        let f = quadratic(n)?;
        let seeds: Vec<u64> = if n == 1 { vec![seed] } else { (1..=3).map(|k| seed + k).collect() };
        let tol = if n == 1 { 1e-3 } else { 1e-2 };
        for s in seeds {
            let bq = BallQuad { seed: s, ..BallQuad::default() };
            let mut worst: f64 = 0.0;
            for z in interior_points(n) {
                let r = reproduce_ball(&f, &z, 2.0, &ball_ladder(), &bq)?;
                worst = worst.max((r.value - f.eval_ball(&z)?).norm());
            }
            ok &= worst <= tol;
            rows.push(json!({"n": n, "seed": s, "max_error": worst, "tol": tol}));
        }
    }
    Ok((ok, json!(rows)))
}

fn radial(m: i32) -> BallPoint<f64> {
    BallDomain::radial(1.0 - 2f64.powi(-m))
}

fn c10_forelli_rudin() -> Result<(bool, Value)> {
    let dom = BallDomain::new(1)?;
    let bq = BallQuad::default();
    let origin = be2_ratio(dom, &[C::new(0.0, 0.0); 2], 4.0, 1.0, &ball_ladder(), &bq)?.ratio;
    let mut ratios = Vec::new();
    for m in 5..=8 {
        ratios.push(be2_ratio(dom, &radial(m), 4.0, 1.0, &ball_ladder(), &bq)?.ratio);
    }
    let plateau = max(&ratios) / min(&ratios);
    let ok = plateau <= 2.0 && (origin - PI).abs() <= 1e-3;
    Ok((ok, json!({"origin": origin, "ratios": ratios, "max_over_min": plateau})))
}

fn c11_be1() -> Result<(bool, Value)> {
    let f = TestFunction::ball_pole(1, 1.0)?;
    let bq = BallQuad::default();
    let mut ratios = Vec::new();
    for m in 1..=8 {
        ratios.push(be1_ratio(&f, 2.0, 1.0, 0.5, &radial(m), &ball_ladder(), &bq)?.ratio);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let dev = max(&ratios.iter().map(|r| (r / mean - 1.0).abs()).collect::<Vec<_>>());
    let ok = ratios.iter().all(|r| r.is_finite() && *r > 0.0) && dev <= 0.3;
    Ok((ok, json!({"ratios": ratios, "mean": mean, "max_rel_dev": dev})))
}

fn ball_opts(seed: u64) -> BallDistanceOptions<f64> {
    let mut o = BallDistanceOptions::default();
    o.quad.seed = seed;
    o
}

fn c12_ball_distance(seed: u64) -> std::result::Result<((bool, Value), Estimate), CliError> {
    let deep = ball_ladder().with_max_exp(16);
    let a = estimate_omega2(&TestFunction::ball_pole(1, 0.5)?, &ball_params(), &deep, &ball_opts(seed))?;
    let b = estimate_omega2(&TestFunction::ball_pole(1, 1.0)?, &ball_params(), &ball_ladder(), &ball_opts(seed))?;
    let ok = a.eps_lo == 0.0 && b.eps_lo >= 0.2;
    let detail = json!({
        "member": {"eps_lo": a.eps_lo, "eps_hi": a.eps_hi, "norm_inf": a.norm_inf, "max_exp": 16},
        "critical": {"eps_lo": b.eps_lo, "eps_hi": b.eps_hi, "norm_inf": b.norm_inf},
    });
    Ok(((ok, detail), b))
}

fn c13_thread_independence(seed: u64) -> std::result::Result<(bool, Value), CliError> {
    let run = |threads: usize| -> std::result::Result<String, CliError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let v = pool.install(|| -> Result<Value> {
            Ok(json!([c09_ball_reproduction(seed)?.1, c02_kernel_integral()?.1]))
        })?;
        Ok(v.to_string())
    };
    let one = run(1)?;
    let four = run(4)?;
    Ok((one == four, json!({"threads": [1, 4], "compared_bytes": one.len(), "identical": one == four})))
}

fn record(
    art: &mut Artifacts,
    out: &mut Vec<Criterion>,
    id: u32,
    name: &str,
    res: std::result::Result<(bool, Value), CliError>,
) -> Result<(), CliError> {
    let (pass, detail) = match res {
        Ok(v) => v,
        Err(CliError::Io { path, source }) => return Err(CliError::Io { path, source }),
        Err(e) => (false, e.to_json()),
    };
    let c = Criterion { id, name: name.to_string(), pass, detail };
    art.json(&format!("c{id:02}_{name}.json"), "suite", &c)?;
    out.push(c);
    Ok(())
}

/// Run every criterion, writing one JSON sub-report each plus `suite.json`.
pub fn suite(cfg: &RunConfig, art: &mut Artifacts) -> Result<SuiteReport, CliError> {
    let seed = cfg.seed;
    let mut cs = Vec::new();
    record(art, &mut cs, 1, "reproducing_formula", c01_reproduction().map_err(Into::into))?;
    record(art, &mut cs, 2, "kernel_integral_scaling", c02_kernel_integral().map_err(Into::into))?;
    record(art, &mut cs, 3, "whitney_overlap", c03_whitney(seed).map_err(Into::into))?;
    record(art, &mut cs, 4, "norm_oracle", c04_norms().map_err(Into::into))?;
    let (r5, l2) = split(c05_homogeneous(art));
    record(art, &mut cs, 5, "distance_homogeneous", r5)?;
    record(art, &mut cs, 6, "distance_membership", c06_membership().map_err(Into::into))?;
    let (r12, omega) = split(c12_ball_distance(seed));
    let r7 = match (l2, omega) {
        (Some(a), Some(b)) => c07_scaling(&a, &b, seed).map_err(Into::into),
        _ => Ok((false, json!({"error": "base estimates unavailable"}))),
    };
    record(art, &mut cs, 7, "scaling_equivariance", r7)?;
    record(art, &mut cs, 8, "decomposition", c08_decomposition(cfg).map_err(Into::into))?;
    record(art, &mut cs, 9, "ball_reproduction", c09_ball_reproduction(seed).map_err(Into::into))?;
    record(art, &mut cs, 10, "forelli_rudin", c10_forelli_rudin().map_err(Into::into))?;
    record(art, &mut cs, 11, "kernel_inequality", c11_be1().map_err(Into::into))?;
    record(art, &mut cs, 12, "ball_distance", r12)?;
    record(art, &mut cs, 13, "thread_independence", c13_thread_independence(seed))?;
    let report = SuiteReport { criteria: cs };
    art.json("suite.json", "suite", &report)?;
    Ok(report)
}

fn split<T>(
    r: std::result::Result<((bool, Value), T), CliError>,
) -> (std::result::Result<(bool, Value), CliError>, Option<T>) {
    match r {
        Ok((v, t)) => (Ok(v), Some(t)),
        Err(e) => (Err(e), None),
    }
}

/// `suite` command: fails with exit status 4 when any criterion fails.
pub fn run_suite(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let report = suite(cfg, art)?;
    let failed = report.failed();
    if failed > 0 {
        return Err(CliError::SuiteFailed { failed });
    }
    Ok(json!(report
        .criteria
        .iter()
        .map(|c| json!({"id": c.id, "name": c.name, "pass": c.pass}))
        .collect::<Vec<_>>()))
}
