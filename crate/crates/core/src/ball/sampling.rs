//! Ladder integrals over the unit ball.
//!
//! The disk (`n = 1`) uses adaptive cubature on `(−ln δ, θ)` cells. The ball of
//! ℂ² uses stratified Monte Carlo per δ-shell in the coordinates
//! `(−ln δ, u, φ₁, φ₂)` with `z = √(1−δ) (√u e^{iφ₁}, √(1−u) e^{iφ₂})`, which
//! makes the sphere measure uniform in `(u, φ₁, φ₂)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::BallPoint;
use crate::error::{Error, Result};
use crate::quad::kahan::KahanSum;
use crate::quad::ladder::{ladder_cubature, LadderReport, LevelIntegrals, QuadSettings, RegionFamily, TruncationLadder};
use crate::scalar::{Real, C};

/// Quadrature node in the ball.
#[derive(Debug, Clone, Copy)]
pub struct BallNode<T> {
    pub z: BallPoint<T>,
    /// `δ(z) = 1 − |z|²` without cancellation.
    pub delta: T,
    /// Volume element of the parameterisation.
    pub jac: T,
    /// First ladder index whose region contains the node.
    pub level: usize,
}

/// Settings of ball integrals: cubature for `n = 1`, Monte Carlo for `n = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallQuad<T> {
    pub quad: QuadSettings<T>,
    /// Strata per axis of each four-dimensional shell box.
    pub strata: usize,
    pub seed: u64,
}

impl<T: Real> Default for BallQuad<T> {
    fn default() -> Self {
        Self {
            quad: QuadSettings::default(),
            strata: 12,
            seed: 0,
        }
    }
}

pub(crate) fn ball_ladder(ladder: &TruncationLadder<impl Real>) -> Result<()> {
    if ladder.family == RegionFamily::BallShells {
        Ok(())
    } else {
        Err(Error::HypothesisViolation("a ball ladder is required".into()))
    }
}

/// `[v_lo, v_hi]` in `v = −ln δ` for each ladder index.
pub fn shell_bounds<T: Real>(ladder: &TruncationLadder<T>) -> Vec<(T, T)> {
    let l = ladder.base.ln();
    ladder
        .levels()
        .into_iter()
        .enumerate()
        .map(|(k, m)| {
            let hi = l * T::lit(m as f64);
            let lo = if k == 0 { T::zero() } else { l * T::lit((m - 1) as f64) };
            (lo, hi)
        })
        .collect()
}

/// Map unit-cube coordinates of shell `k` to a node of the ball of ℂ².
pub fn shell_node<T: Real>(bounds: (T, T), level: usize, p: [T; 4]) -> BallNode<T> {
    let v = bounds.0 + (bounds.1 - bounds.0) * p[0];
    let delta = (-v).exp();
    let r = (-(-v).exp_m1()).sqrt();
    let tau = T::TAU();
    let a = r * p[1].sqrt();
    let b = r * (T::one() - p[1]).sqrt();
    BallNode {
        z: [C::from_polar(a, tau * p[2]), C::from_polar(b, tau * p[3])],
        delta,
        jac: (T::one() - delta) * delta * T::lit(0.25) * (bounds.1 - bounds.0) * tau * tau,
        level,
    }
}

/// Jittered stratified samples of shell `k` as unit-cube points, in a fixed order.
pub fn shell_samples<T: Real>(seed: u64, shell: usize, strata: usize) -> Vec<[T; 4]> {
    let s = strata.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shell as u64);
    let inv = 1.0 / s as f64;
    let mut out = Vec::with_capacity(s.pow(4));
    for i in 0..s.pow(4) {
        let idx = [i % s, (i / s) % s, (i / (s * s)) % s, i / (s * s * s)];
        let mut p = [T::zero(); 4];
        for (d, k) in idx.iter().enumerate() {
            let u: f64 = rng.random();
            p[d] = T::lit((*k as f64 + u) * inv);
        }
        out.push(p);
    }
    out
}

/// Integrate a `width`-component integrand for every ladder level of the
/// ball of dimension `n`, with the buffer convention of [`ladder_cubature`].
pub fn ball_ladder_cubature<T, F>(
    n: usize,
    ladder: &TruncationLadder<T>,
    width: usize,
    reference: &[usize],
    bq: &BallQuad<T>,
    fill: F,
) -> Result<LevelIntegrals<T>>
where
    T: Real,
    F: Fn(&BallNode<T>, &mut [T]) + Sync,
{
    ball_ladder(ladder)?;
    match n {
        1 => Ok(ladder_cubature(ladder, width, reference, &bq.quad, |pt, out| {
            let node = BallNode {
                z: [pt.z, C::new(T::zero(), T::zero())],
                delta: pt.weight_base,
                jac: pt.jac,
                level: pt.level,
            };
            fill(&node, out)
        })),
        2 => Ok(monte_carlo(ladder, width, bq, fill)),
        _ => Err(Error::UnsupportedDimension(n)),
    }
}

fn monte_carlo<T, F>(ladder: &TruncationLadder<T>, width: usize, bq: &BallQuad<T>, fill: F) -> LevelIntegrals<T>
where
    T: Real,
    F: Fn(&BallNode<T>, &mut [T]) + Sync,
{
    let nl = ladder.len();
    let dim = width * nl;
    let bounds = shell_bounds(ladder);
    let shells: Vec<(Vec<T>, Vec<T>)> = bounds
        .par_iter()
        .enumerate()
        .map(|(k, &b)| {
            let samples = shell_samples::<T>(bq.seed, k, bq.strata);
            let count = T::from_usize_lossy(samples.len());
            let mut sum = vec![KahanSum::new(); dim];
            let mut sq = vec![KahanSum::new(); dim];
            let mut buf = vec![T::zero(); dim];
            for p in samples {
                let node = shell_node(b, k, p);
                buf.iter_mut().for_each(|x| *x = T::zero());
                fill(&node, &mut buf);
                for (i, &v) in buf.iter().enumerate() {
                    sum[i].add(v);
                    sq[i].add(v * v);
                }
            }
            let mean: Vec<T> = sum.iter().map(|s| s.value() / count).collect();
            let var: Vec<T> = sq
                .iter()
                .zip(&mean)
                .map(|(s, &m)| ((s.value() / count - m * m).max(T::zero())) / count)
                .collect();
            (mean, var)
        })
        .collect();
    let mut values = vec![KahanSum::new(); dim];
    let mut var = vec![T::zero(); dim];
    for (m, v) in &shells {
        for i in 0..dim {
            values[i].add(m[i]);
            var[i] = var[i] + v[i];
        }
    }
    let values: Vec<T> = values.iter().map(|s| s.value()).collect();
    let errors: Vec<T> = var.iter().map(|v| v.sqrt()).collect();
    let split = |v: &[T]| v.chunks(width).map(|c| c.to_vec()).collect::<Vec<_>>();
    LevelIntegrals {
        values: split(&values),
        errors: split(&errors),
        converged: true,
    }
}

/// Ladder integral of a nonnegative scalar integrand over the ball.
pub fn ball_ladder_integrate<T, F>(
    n: usize,
    ladder: &TruncationLadder<T>,
    integrand: F,
    bq: &BallQuad<T>,
) -> Result<LadderReport<T>>
where
    T: Real,
    F: Fn(&BallNode<T>) -> T + Sync,
{
    let res = ball_ladder_cubature(n, ladder, 1, &[], bq, |node, out| {
        let g = integrand(node) * node.jac;
        for v in out.iter_mut().skip(node.level) {
            *v = g;
        }
    })?;
    let (values, errors) = res.component(0);
    let reliable = res.reliable(0, bq.quad.tol);
    Ok(LadderReport::from_levels(ladder.levels(), values, errors, reliable, &bq.quad.classify))
}
