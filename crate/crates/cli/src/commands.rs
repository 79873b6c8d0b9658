//! One function per subcommand. Each writes its artifacts and returns a short
//! JSON summary for stdout.

use std::path::Path;

use bergman_extremal::ball::distance::{
    ball_f1_grid, ball_norm_inf, ball_sample_points, check_ball_decomposition, decompose_ball, estimate_omega2,
    psi_functional, BallDistanceOptions,
};
use bergman_extremal::ball::geometry::{be1_ratio, be2_ratio, disk_point, reproduce_ball, BallDomain};
use bergman_extremal::ball::sampling::{ball_ladder_integrate, BallQuad};
use bergman_extremal::halfplane::bergman::{lemma3_ratio, norm_inf, norm_p_alpha, reproduce, PolarGrid};
use bergman_extremal::halfplane::distance::{
    estimate_l2, phi_functional, sample_points, DistanceOptions,
};
use bergman_extremal::quad::{ConvergenceVerdict, QuadSettings};
use bergman_extremal::whitney::{
    overlap_multiplicity_at, squares_meeting, subharmonic_bound_ratio, PlaneRegion, WhitneySquare, DEFAULT_LAMBDA,
};
use bergman_extremal::{BallPoint, Error, C};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{DomainName, RunConfig, Viewport};
use crate::error::CliError;
use crate::heatmap::render_heatmap;
use crate::report::Artifacts;
use crate::whitney_check::partition_violations;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Norm,
    KernelVerify,
    Whitney,
    Lemma3,
    Levelset,
    Phi,
    Psi,
    Dist,
    Decompose,
    FrCheck,
    Suite,
}

/// Whitney listings larger than this are refused.
const MAX_LISTED_SQUARES: usize = 100_000;

pub fn run(cmd: Command, cfg: &RunConfig, out: &Path) -> Result<Value, CliError> {
    let mut art = Artifacts::new(out, cfg)?;
    let summary = match cmd {
        Command::Norm => norm(cfg, &mut art),
        Command::KernelVerify => kernel_verify(cfg, &mut art),
        Command::Whitney => whitney(cfg, &mut art),
        Command::Lemma3 => lemma3(cfg, &mut art),
        Command::Levelset => levelset(cfg, &mut art),
        Command::Phi | Command::Psi => level_functional(cmd, cfg, &mut art),
        Command::Dist => dist(cfg, &mut art),
        Command::Decompose => decomposition(cfg, &mut art),
        Command::FrCheck => fr_check(cfg, &mut art),
        Command::Suite => crate::suite::run_suite(cfg, &mut art),
    }?;
    Ok(json!({
        "config_sha256": art.config_sha256(),
        "seed": art.seed(),
        "artifacts": art.written(),
        "summary": summary,
    }))
}

fn need_halfplane(cfg: &RunConfig, what: &str) -> Result<(), CliError> {
    if cfg.domain == DomainName::Halfplane {
        Ok(())
    } else {
        Err(Error::HypothesisViolation(format!("`{what}` needs the half-plane")).into())
    }
}

fn need_ball(cfg: &RunConfig, what: &str) -> Result<(), CliError> {
    if cfg.domain == DomainName::Ball {
        Ok(())
    } else {
        Err(Error::HypothesisViolation(format!("`{what}` needs the ball")).into())
    }
}

fn plane_points(cfg: &RunConfig) -> Result<Option<Vec<C<f64>>>, CliError> {
    let Some(pts) = &cfg.payload.points else {
        return Ok(None);
    };
    pts.iter()
        .map(|p| match p.as_slice() {
            [x, y] => Ok(C::new(*x, *y)),
            _ => Err(CliError::Config(format!("expected [re, im], got {p:?}"))),
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn ball_points(cfg: &RunConfig) -> Result<Option<Vec<BallPoint<f64>>>, CliError> {
    let Some(pts) = &cfg.payload.points else {
        return Ok(None);
    };
    pts.iter()
        .map(|p| match (p.as_slice(), cfg.n) {
            ([x, y], 1) => Ok(disk_point(C::new(*x, *y))),
            ([a, b, c, d], 2) => Ok([C::new(*a, *b), C::new(*c, *d)]),
            _ => Err(CliError::Config(format!("point {p:?} does not match n = {}", cfg.n))),
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn num(x: f64) -> String {
    x.to_string()
}

fn norm(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let f = cfg.function()?;
    let ladder = cfg.ladder()?;
    let p = cfg.require("p", cfg.params.p.or(cfg.params.q))?;
    match cfg.domain {
        DomainName::Halfplane => {
            let alpha = cfg.require("alpha", cfg.params.alpha.or(cfg.params.nu))?;
            let r = norm_p_alpha(&f, p, alpha, &ladder, &cfg.settings_or(QuadSettings::default()))?;
            let sup = cfg.params.t.map(|t| norm_inf(&f, t, &PolarGrid::default())).transpose()?;
            art.ladder("norm_ladder.csv", &r.report)?;
            let out = json!({"p": p, "alpha": alpha, "value": r.value, "verdict": r.verdict, "sup": sup});
            art.json("norm.json", "norm", &out)?;
            Ok(out)
        }
        DomainName::Ball => {
            let s = cfg.require("s", cfg.params.s)?;
            let bq = cfg.ball_quad_or(BallQuad::default());
            let w = p * s - (cfg.n + 1) as f64;
            let report = ball_ladder_integrate(cfg.n, &ladder, |nd| f.eval_ball_unchecked(&nd.z).norm().powf(p) * nd.delta.powf(w), &bq)?;
            let value = (report.verdict == ConvergenceVerdict::Convergent).then(|| report.last_value().powf(1.0 / p));
            let sup = ball_norm_inf(&f, s, &Default::default())?;
            art.ladder("norm_ladder.csv", &report)?;
            let out = json!({"p": p, "s": s, "value": value, "verdict": report.verdict, "sup": sup});
            art.json("norm.json", "norm", &out)?;
            Ok(out)
        }
    }
}

fn kernel_verify(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let f = cfg.function()?;
    let ladder = cfg.ladder()?;
    let mut rows = Vec::new();
    let mut worst_abs: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    let mut push = |coords: Vec<f64>, v: C<f64>, exact: C<f64>, verdict: ConvergenceVerdict| {
        let abs = (v - exact).norm();
        let rel = abs / exact.norm().max(f64::MIN_POSITIVE);
        worst_abs = worst_abs.max(abs);
        worst_rel = worst_rel.max(rel);
        let mut row: Vec<String> = coords.into_iter().map(num).collect();
        row.extend([v.re, v.im, exact.re, exact.im, abs, rel].map(num));
        row.push(verdict.to_string());
        rows.push(row);
    };
    let header: Vec<&str> = match cfg.domain {
        DomainName::Halfplane => {
            let beta = cfg.require("beta", cfg.params.beta)?;
            let space = cfg.params.p.zip(cfg.params.alpha);
            let settings = cfg.settings_or(QuadSettings::default());
            for z in plane_points(cfg)?.unwrap_or_else(sample_points) {
                let r = reproduce(&f, z, beta, space, &ladder, &settings)?;
                push(vec![z.re, z.im], r.value, f.eval_plane(z)?, r.report.verdict);
            }
            vec!["re", "im"]
        }
        DomainName::Ball => {
            let t = cfg.require("t", cfg.params.t)?;
            let bq = cfg.ball_quad_or(BallQuad::default());
            for z in ball_points(cfg)?.unwrap_or_else(|| ball_sample_points(cfg.n)) {
                let r = reproduce_ball(&f, &z, t, &ladder, &bq)?;
                push(vec![z[0].re, z[0].im, z[1].re, z[1].im], r.value, f.eval_ball(&z)?, r.report.verdict);
            }
            vec!["z1_re", "z1_im", "z2_re", "z2_im"]
        }
    };
    let header: Vec<&str> = header
        .into_iter()
        .chain(["value_re", "value_im", "exact_re", "exact_im", "abs_error", "rel_error", "verdict"])
        .collect();
    art.table("kernel_verify.csv", &header, &rows)?;
    let out = json!({"points": rows.len(), "max_abs_error": worst_abs, "max_rel_error": worst_rel});
    art.json("kernel_verify.json", "kernel-verify", &out)?;
    Ok(out)
}

/// Points with `x` uniform and `log₂ y` uniform in the viewport.
pub fn viewport_samples(vp: &Viewport, count: usize, rng: &mut ChaCha8Rng) -> Vec<C<f64>> {
    let (l0, l1) = (vp.y0.max(1e-12).log2(), vp.y1.log2());
    (0..count)
        .map(|_| C::new(rng.random_range(vp.x0..vp.x1), rng.random_range(l0..l1).exp2()))
        .collect()
}

fn whitney(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    need_halfplane(cfg, "whitney")?;
    let vp = cfg.payload.viewport.unwrap_or(Viewport { x0: -4.0, x1: 4.0, y0: 0.05, y1: 6.0 });
    let lambda = cfg.payload.lambda.unwrap_or(DEFAULT_LAMBDA);
    let count = cfg.payload.sample_count.unwrap_or(100_000);
    let region = PlaneRegion::Rect { x0: vp.x0, x1: vp.x1, y0: vp.y0, y1: vp.y1 };
    if !(vp.y0 > 0.0) {
        return Err(Error::OutOfDomain("whitney viewport needs y0 > 0".into()).into());
    }
    let squares = squares_meeting(&region);
    if squares.len() > MAX_LISTED_SQUARES {
        return Err(Error::BudgetExceeded { max_cells: MAX_LISTED_SQUARES, estimate: squares.len() as f64, error: 0.0 }.into());
    }
    let rows: Vec<Vec<String>> = squares
        .iter()
        .map(|s| {
            let e = s.extent::<f64>();
            vec![s.j.to_string(), s.k.to_string(), num(e.x0), num(e.x1), num(e.y0), num(e.y1)]
        })
        .collect();
    art.table("whitney_squares.csv", &["j", "k", "x0", "x1", "y0", "y1"], &rows)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pts = viewport_samples(&vp, count, &mut rng);
    let multiplicity = overlap_multiplicity_at(pts.iter().copied(), lambda)?;
    let part = viewport_samples(&vp, count.div_ceil(10), &mut rng);
    let violations = partition_violations(&part)?;

    let f = cfg.function()?;
    let p = cfg.params.p.unwrap_or(2.0);
    let alpha = cfg.params.alpha.unwrap_or(0.0);
    let mut sub = Vec::new();
    for j in -5..=4 {
        let r = subharmonic_bound_ratio(&f, p, alpha, WhitneySquare::new(j, 0), lambda)?;
        sub.push(vec![j.to_string(), "0".into(), num(r)]);
    }
    art.table("whitney_subharmonic.csv", &["j", "k", "ratio"], &sub)?;
    let out = json!({
        "squares": squares.len(),
        "lambda": lambda,
        "overlap_points": pts.len(),
        "overlap_multiplicity": multiplicity,
        "partition_points": part.len(),
        "partition_violations": violations,
    });
    art.json("whitney.json", "whitney", &out)?;
    Ok(out)
}

fn lemma3(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    need_halfplane(cfg, "lemma3")?;
    let ladder = cfg.ladder()?;
    let settings = cfg.settings_or(QuadSettings::default());
    let alpha = cfg.params.alpha.unwrap_or(0.0);
    let lam = cfg.payload.lambda_exp.unwrap_or(4.0);
    let pts = plane_points(cfg)?
        .unwrap_or_else(|| vec![C::new(0.0, 1.0), C::new(0.0, 2.0), C::new(1.0, 1.0), C::new(0.0, 0.1)]);
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    for w in pts {
        let k = lemma3_ratio(w, alpha, lam, &ladder, &settings)?;
        rows.push(vec![num(w.re), num(w.im), num(k.ratio), num(k.integral), k.report.verdict.to_string()]);
        ratios.push(k.ratio);
    }
    art.table("lemma3.csv", &["w_re", "w_im", "ratio", "integral", "verdict"], &rows)?;
    let out = json!({"alpha": alpha, "lambda_exp": lam, "ratios": ratios, "spread": spread(&ratios)});
    art.json("lemma3.json", "lemma3", &out)?;
    Ok(out)
}

/// `(max − min) / mean`
pub fn spread(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::MIN, f64::max);
    let min = xs.iter().cloned().fold(f64::MAX, f64::min);
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (max - min) / mean
}

fn levelset(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let f = cfg.function()?;
    let eps = cfg.require("eps", cfg.payload.eps)?;
    let (weight, vp) = match cfg.domain {
        DomainName::Halfplane => (cfg.require("t", cfg.params.t)?, Viewport { x0: -2.0, x1: 2.0, y0: 0.0, y1: 2.0 }),
        DomainName::Ball => (cfg.require("s", cfg.params.s)?, Viewport { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 }),
    };
    let vp = cfg.payload.viewport.unwrap_or(vp);
    let res = cfg.payload.resolution.unwrap_or([256, 128]);
    let map = render_heatmap(&f, weight, eps, vp, res)?;
    art.png("levelset.png", &map)?;
    let rows: Vec<Vec<String>> = map
        .members
        .iter()
        .map(|m| vec![m.col.to_string(), m.row.to_string(), num(m.x), num(m.y), num(m.value)])
        .collect();
    art.table("levelset.csv", &["col", "row", "x", "y", "value"], &rows)?;
    let out = json!({"eps": eps, "weight": weight, "pixels": map.pixels.len(), "members": map.members.len()});
    art.json("levelset.json", "levelset", &out)?;
    Ok(out)
}

fn level_functional(cmd: Command, cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let f = cfg.function()?;
    let ladder = cfg.ladder()?;
    let eps = cfg.require("eps", cfg.payload.eps)?;
    let (name, report) = if cmd == Command::Phi {
        need_halfplane(cfg, "phi")?;
        let mut opts = DistanceOptions::default();
        opts.quad = cfg.settings_or(opts.quad);
        ("phi", phi_functional(&f, eps, &cfg.halfplane_params()?, &ladder, &opts)?)
    } else {
        need_ball(cfg, "psi")?;
        let mut opts = BallDistanceOptions::default();
        opts.quad = cfg.ball_quad_or(opts.quad);
        ("psi", psi_functional(&f, eps, &cfg.ball_params()?, &ladder, &opts)?)
    };
    art.ladder(&format!("{name}_ladder.csv"), &report)?;
    let (slope, r2) = report.linear_fit_tail(5.min(report.levels.len()));
    let out = json!({
        "eps": eps,
        "verdict": report.verdict,
        "tail_estimate": report.tail_estimate,
        "last_value": report.last_value(),
        "tail_slope": slope,
        "tail_r2": r2,
    });
    art.json(&format!("{name}.json"), name, &out)?;
    Ok(out)
}

fn dist(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let f = cfg.function()?;
    let ladder = cfg.ladder()?;
    let est = match cfg.domain {
        DomainName::Halfplane => {
            let mut opts = DistanceOptions::default();
            opts.quad = cfg.settings_or(opts.quad);
            estimate_l2(&f, &cfg.halfplane_params()?, &ladder, &opts)?
        }
        DomainName::Ball => {
            let mut opts = BallDistanceOptions::default();
            opts.quad = cfg.ball_quad_or(opts.quad);
            estimate_omega2(&f, &cfg.ball_params()?, &ladder, &opts)?
        }
    };
    art.json("dist.json", "dist", &est)?;
    Ok(json!({
        "eps_lo": est.eps_lo,
        "eps_hi": est.eps_hi,
        "norm_inf": est.norm_inf,
        "probes": est.probes.len(),
        "consistent": est.is_consistent(),
    }))
}

fn decomposition(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let f = cfg.function()?;
    let ladder = cfg.ladder()?;
    let eps = cfg.require("eps", cfg.payload.eps)?;
    let out = match cfg.domain {
        DomainName::Halfplane => {
            let check = crate::suite::halfplane_decomposition(&f, eps, &cfg.halfplane_params()?, &ladder, cfg)?;
            serde_json::to_value(&check)
        }
        DomainName::Ball => {
            let mut opts = BallDistanceOptions::default();
            opts.quad = cfg.ball_quad_or(opts.quad);
            let dec = decompose_ball(&f, eps, &cfg.ball_params()?, &ladder, &opts, &cfg.ball_quad_or(BallQuad::default()))?;
            let check = check_ball_decomposition(&dec, &ball_f1_grid(cfg.n), &ball_sample_points(cfg.n), &opts.quad)?;
            serde_json::to_value(&check)
        }
    }
    .map_err(|e| CliError::Config(e.to_string()))?;
    art.json("decompose.json", "decompose", &out)?;
    Ok(json!({
        "residual": out["residual"],
        "f1_sup_over_eps": out["f1_sup_over_eps"],
        "f2_verdict": out["f2_norm"]["verdict"],
        "nodes": out["nodes"],
    }))
}

fn radial(m: i32) -> BallPoint<f64> {
    BallDomain::radial(1.0 - 2f64.powi(-m))
}

fn fr_check(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    need_ball(cfg, "fr-check")?;
    let dom = BallDomain::new(cfg.n)?;
    let ladder = cfg.ladder()?;
    let bq = cfg.ball_quad_or(BallQuad::default());
    let beta = cfg.payload.kernel_beta.unwrap_or(cfg.n as f64 + 3.0);
    let sigma = cfg.payload.sigma.unwrap_or(1.0);
    let levels = cfg.payload.radial_levels.clone().unwrap_or_else(|| (1..=8).collect());

    let origin = be2_ratio(dom, &[C::new(0.0, 0.0); 2], beta, sigma, &ladder, &bq)?;
    let mut be2_rows = vec![vec!["origin".into(), "0".into(), num(origin.ratio), origin.report.verdict.to_string()]];
    let mut be2 = Vec::new();
    for &m in &levels {
        let xi = radial(m);
        let r = be2_ratio(dom, &xi, beta, sigma, &ladder, &bq)?;
        be2_rows.push(vec![m.to_string(), num(xi[0].re), num(r.ratio), r.report.verdict.to_string()]);
        be2.push(r.ratio);
    }
    art.table("fr_be2.csv", &["m", "radius", "ratio", "verdict"], &be2_rows)?;

    let f = cfg.function()?;
    let r = cfg.payload.r.unwrap_or(2.0);
    let s = cfg.params.s.unwrap_or(1.0);
    let p = cfg.params.p.unwrap_or(0.5);
    let mut be1_rows = Vec::new();
    let mut be1 = Vec::new();
    for &m in &levels {
        let z = radial(m);
        let b = be1_ratio(&f, r, s, p, &z, &ladder, &bq)?;
        be1_rows.push(vec![m.to_string(), num(z[0].re), num(b.ratio), num(b.lhs), num(b.rhs)]);
        be1.push(b.ratio);
    }
    art.table("fr_be1.csv", &["m", "radius", "ratio", "lhs", "rhs"], &be1_rows)?;
    let out = json!({
        "be2": {"beta": beta, "sigma": sigma, "origin": origin.ratio, "ratios": be2},
        "be1": {"r": r, "s": s, "p": p, "ratios": be1},
    });
    art.json("fr_check.json", "fr-check", &out)?;
    Ok(out)
}
