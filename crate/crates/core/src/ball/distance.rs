//! Level sets `Ω_{ε,s}(f) = {|f| δ^s ≥ ε}` in the ball, the functional
//!
//! `Ψ(ε) = ∫ ( ∫_{Ω_{ε,s}} |K_t(z, ξ)| δ^{t−s}(ξ) dV(ξ) )^q δ^{sq−n−1}(z) dV(z)`,
//!
//! the bisection estimate of `ω₂` and the splitting `f = f₁ + f₂`.
//!
//! On the disk the inner integral runs over polar cells `δ ∈ [2^{−k−1}, 2^{−k}]`
//! cut into `2^{k+4}` angular pieces; the membership area of a cell is measured
//! on a subgrid. In ℂ² the cells are the stratified shell samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::geometry::{delta_unchecked, disk_point, reproduce_ball, BallDomain};
use crate::ball::sampling::{ball_ladder, ball_ladder_cubature, ball_ladder_integrate, shell_bounds, shell_node, shell_samples, BallQuad};
use crate::bisect::{bisect, BisectOptions, DistanceEstimate};
use crate::catalog::{BallPoint, TestFunction};
use crate::error::{Error, Result};
use crate::halfplane::bergman::{grid_sup, norm_from_report, NormReport, SupNorm};
use crate::params::BallParams;
use crate::quad::kahan::KahanSum;
use crate::quad::ladder::{ConvergenceVerdict, LadderReport, TruncationLadder};
use crate::quad::rules::gauss_legendre_unit;
use crate::scalar::{Real, C};

/// `|f(z)| δ(z)^s ≥ ε`
pub fn omega_member<T: Real>(f: &TestFunction<T>, eps: T, s: T, z: &BallPoint<T>) -> Result<bool> {
    let dom = BallDomain::of(f)?;
    let d = dom.delta(z)?;
    Ok(f.eval_ball_unchecked(z).norm() * d.powf(s) >= eps)
}

/// Grid for `sup |f| δ^s`: `δ = 2^{−u}` log-spaced, angles uniform; in ℂ² the
/// sphere is sampled on a `(u, φ₁, φ₂)` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallGrid {
    pub log2_delta_min: f64,
    pub n_delta: usize,
    pub n_theta: usize,
    /// Sphere grid per axis in ℂ².
    pub n_sphere: usize,
}

impl Default for BallGrid {
    fn default() -> Self {
        Self {
            log2_delta_min: -20.0,
            n_delta: 201,
            n_theta: 256,
            n_sphere: 12,
        }
    }
}

impl BallGrid {
    /// Points with an "inner" flag for the first half of the δ range.
    pub fn points<T: Real>(&self, n: usize) -> Vec<(BallPoint<T>, bool)> {
        let nd = self.n_delta.max(2);
        let mut out = Vec::new();
        for i in 0..nd {
            let u = self.log2_delta_min * i as f64 / (nd - 1) as f64;
            let delta = 2f64.powf(u);
            let inner = u >= 0.5 * self.log2_delta_min;
            let r = (1.0 - delta).sqrt();
            if n == 1 {
                for j in 0..self.n_theta.max(1) {
                    let th = std::f64::consts::TAU * j as f64 / self.n_theta.max(1) as f64;
                    out.push((disk_point(C::from_polar(T::lit(r), T::lit(th))), inner));
                }
            } else {
                let m = self.n_sphere.max(2);
                for a in 0..=m {
                    let w = a as f64 / m as f64;
                    for b in 0..m {
                        for c in 0..m {
                            let p1 = std::f64::consts::TAU * b as f64 / m as f64;
                            let p2 = std::f64::consts::TAU * c as f64 / m as f64;
                            out.push((
                                [
                                    C::from_polar(T::lit(r * w.sqrt()), T::lit(p1)),
                                    C::from_polar(T::lit(r * (1.0 - w).sqrt()), T::lit(p2)),
                                ],
                                inner,
                            ));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Grid maximum of `|f| δ^s`; `argmax` holds the first coordinate.
pub fn ball_norm_inf<T: Real>(f: &TestFunction<T>, s: T, grid: &BallGrid) -> Result<SupNorm<T>> {
    let dom = BallDomain::of(f)?;
    if !(s > T::zero()) {
        return Err(Error::HypothesisViolation(format!("s > 0 required, got {s}")));
    }
    let pts = grid.points::<T>(dom.n);
    let samples = pts
        .iter()
        .map(|(z, inner)| (z[0], f.eval_ball_unchecked(z).norm() * delta_unchecked(z).powf(s), *inner));
    Ok(grid_sup(samples, f.analytic_sup_norm(s)))
}

/// Subgrid resolutions for level-set volumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallScanOptions {
    pub coarse: usize,
    pub fine: usize,
    /// Strata per axis of the ℂ² shell samples.
    pub mc_strata: usize,
    pub max_active: usize,
}

impl Default for BallScanOptions {
    fn default() -> Self {
        Self {
            coarse: 8,
            fine: 32,
            mc_strata: 6,
            max_active: 250_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Shape<T> {
    /// Disk cell `δ ∈ [d_lo, d_hi]`, `θ ∈ [t_lo, t_hi]`.
    Polar { d_lo: T, d_hi: T, t_lo: T, t_hi: T },
    /// A single ℂ² sample with its volume.
    Point { xi: BallPoint<T>, vol: T },
}

impl<T: Real> Shape<T> {
    fn volume(&self) -> T {
        match *self {
            Shape::Polar { d_lo, d_hi, t_lo, t_hi } => (t_hi - t_lo) * (d_hi - d_lo) * T::lit(0.5),
            Shape::Point { vol, .. } => vol,
        }
    }

    /// Point at fractional coordinates `(a, b) ∈ [0, 1]²` of a disk cell.
    fn at(&self, a: T, b: T) -> BallPoint<T> {
        match *self {
            Shape::Polar { d_lo, d_hi, t_lo, t_hi } => {
                let d = d_hi - (d_hi - d_lo) * a;
                disk_point(C::from_polar((T::one() - d).sqrt(), t_lo + (t_hi - t_lo) * b))
            }
            Shape::Point { xi, .. } => xi,
        }
    }

    fn grid(&self, n: usize) -> Vec<BallPoint<T>> {
        match self {
            Shape::Polar { .. } => {
                let nn = T::from_usize_lossy(n);
                let mut out = Vec::with_capacity(n * n);
                for a in 0..n {
                    for b in 0..n {
                        let fa = (T::from_usize_lossy(a) + T::lit(0.5)) / nn;
                        let fb = (T::from_usize_lossy(b) + T::lit(0.5)) / nn;
                        out.push(self.at(fa, fb));
                    }
                }
                out
            }
            Shape::Point { xi, .. } => vec![*xi],
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct ScannedCell<T> {
    shape: Shape<T>,
    level: usize,
    max: T,
    min: T,
}

/// Cells of the outermost ball region with sampled extremes of `|f| δ^s`.
#[derive(Debug, Clone)]
pub struct BallLevelScan<T> {
    f: TestFunction<T>,
    dom: BallDomain,
    s: T,
    ladder: TruncationLadder<T>,
    opts: BallScanOptions,
    cells: Vec<ScannedCell<T>>,
}

/// One cell meeting `Ω ∩ R_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallCoverEntry<T> {
    pub xi: BallPoint<T>,
    pub delta: T,
    pub level: usize,
    pub volume: T,
    pub partial: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallCover<T> {
    pub eps: T,
    pub entries: Vec<BallCoverEntry<T>>,
    /// Volume of `Ω ∩ R_m` per level.
    pub level_volume: Vec<T>,
}

impl<T: Real> BallLevelScan<T> {
    pub fn new(f: &TestFunction<T>, s: T, ladder: &TruncationLadder<T>, opts: BallScanOptions, seed: u64) -> Result<Self> {
        let dom = BallDomain::of(f)?;
        ball_ladder(ladder)?;
        let bounds = shell_bounds(ladder);
        let mut shapes = Vec::new();
        if !f.is_zero() {
            for (k, &(v0, v1)) in bounds.iter().enumerate() {
                let (d_hi, d_lo) = ((-v0).exp(), (-v1).exp());
                if dom.n == 1 {
                    let m = 1usize << (k + 4);
                    let w = T::TAU() / T::from_usize_lossy(m);
                    for j in 0..m {
                        let t_lo = w * T::from_usize_lossy(j);
                        shapes.push((k, Shape::Polar { d_lo, d_hi, t_lo, t_hi: t_lo + w }));
                    }
                } else {
                    let samples = shell_samples::<T>(seed, k, opts.mc_strata);
                    let count = T::from_usize_lossy(samples.len());
                    for p in samples {
                        let node = shell_node((v0, v1), k, p);
                        shapes.push((k, Shape::Point { xi: node.z, vol: node.jac / count }));
                    }
                }
            }
        }
        let n = opts.coarse.max(1);
        let cells = shapes
            .par_iter()
            .map(|&(level, shape)| {
                let mut max = T::zero();
                let mut min = T::infinity();
                for z in shape.grid(n) {
                    let v = f.eval_ball_unchecked(&z).norm() * delta_unchecked(&z).powf(s);
                    max = max.max(v);
                    min = min.min(v);
                }
                ScannedCell { shape, level, max, min }
            })
            .collect();
        Ok(Self {
            f: f.clone(),
            dom,
            s,
            ladder: *ladder,
            opts,
            cells,
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn value(&self, z: &BallPoint<T>) -> T {
        self.f.eval_ball_unchecked(z).norm() * delta_unchecked(z).powf(self.s)
    }

    fn active(&self, eps: T) -> impl Iterator<Item = &ScannedCell<T>> {
        self.cells.iter().filter(move |c| c.max >= eps)
    }

    fn fine_members(&self, c: &ScannedCell<T>, eps: T) -> Vec<BallPoint<T>> {
        c.shape
            .grid(self.opts.fine.max(1))
            .into_iter()
            .filter(|z| self.value(z) >= eps)
            .collect()
    }

    pub fn cover(&self, eps: T) -> Result<BallCover<T>> {
        let nl = self.ladder.len();
        let active: Vec<&ScannedCell<T>> = self.active(eps).collect();
        if active.len() > self.opts.max_active {
            return Err(Error::BudgetExceeded {
                max_cells: self.opts.max_active,
                estimate: active.len() as f64,
                error: f64::NAN,
            });
        }
        let fine = T::from_usize_lossy(self.opts.fine.max(1).pow(2));
        let entries: Vec<BallCoverEntry<T>> = active
            .par_iter()
            .filter_map(|c| {
                let center = c.shape.at(T::lit(0.5), T::lit(0.5));
                let vol = c.shape.volume();
                let (volume, partial) = match c.shape {
                    Shape::Point { .. } => (vol, false),
                    Shape::Polar { .. } if c.min >= eps => (vol, false),
                    Shape::Polar { .. } => {
                        let hits = self.fine_members(c, eps).len();
                        (vol * T::from_usize_lossy(hits) / fine, true)
                    }
                };
                (volume > T::zero()).then(|| BallCoverEntry {
                    xi: center,
                    delta: delta_unchecked(&center),
                    level: c.level,
                    volume,
                    partial,
                })
            })
            .collect();
        let mut per_level = vec![KahanSum::new(); nl];
        for e in &entries {
            per_level[e.level].add(e.volume);
        }
        let mut acc = T::zero();
        let level_volume = per_level
            .iter()
            .map(|s| {
                acc = acc + s.value();
                acc
            })
            .collect();
        Ok(BallCover {
            eps,
            entries,
            level_volume,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallDistanceOptions<T> {
    /// Outer integral settings (the sampler uses few strata: the inner sum is costly).
    pub quad: BallQuad<T>,
    pub scan: BallScanOptions,
    pub bisect: BisectOptions<T>,
    pub grid: BallGrid,
}

impl<T: Real> Default for BallDistanceOptions<T> {
    fn default() -> Self {
        let mut quad = BallQuad::default();
        quad.quad.tol = T::lit(1e-3);
        quad.quad.max_cells = 20_000;
        quad.strata = 4;
        Self {
            quad,
            scan: BallScanOptions::default(),
            bisect: BisectOptions::default(),
            grid: BallGrid::default(),
        }
    }
}

/// `Ψ(ε)` per ladder level from a prepared cover.
pub fn psi_from_cover<T: Real>(
    cover: &BallCover<T>,
    dom: BallDomain,
    params: &BallParams<T>,
    ladder: &TruncationLadder<T>,
    bq: &BallQuad<T>,
) -> Result<LadderReport<T>> {
    if cover.entries.is_empty() {
        return Ok(LadderReport::zeros(ladder.levels(), &bq.quad.classify));
    }
    let nl = ladder.len();
    let c = dom.kernel_const(params.t)?;
    let nn = T::from_usize_lossy(dom.n);
    let h = -(nn + T::one() + params.t) * T::lit(0.5);
    let outer_exp = params.s * params.q - nn - T::one();
    let weighted: Vec<(BallPoint<T>, T, usize)> = cover
        .entries
        .iter()
        .map(|e| (e.xi, c * e.delta.powf(params.t - params.s) * e.volume, e.level))
        .collect();
    let res = ball_ladder_cubature(dom.n, ladder, 1, &[], bq, |node, out| {
        let mut buckets = vec![T::zero(); nl];
        for (xi, w, l) in &weighted {
            let hr = C::new(T::one(), T::zero()) - node.z[0] * xi[0].conj() - node.z[1] * xi[1].conj();
            buckets[*l] = buckets[*l] + *w * hr.norm_sqr().powf(h);
        }
        let outer = node.delta.powf(outer_exp) * node.jac;
        let mut inner = T::zero();
        for (l, b) in buckets.iter().enumerate() {
            inner = inner + *b;
            if l >= node.level {
                out[l] = inner.powf(params.q) * outer;
            }
        }
    })?;
    let (values, errors) = res.component(0);
    let reliable = res.reliable(0, bq.quad.tol);
    Ok(LadderReport::from_levels(ladder.levels(), values, errors, reliable, &bq.quad.classify))
}

fn check_scan<T: Real>(scan: &BallLevelScan<T>, params: &BallParams<T>) -> Result<()> {
    if scan.s != params.s || scan.dom.n != params.n {
        return Err(Error::HypothesisViolation(format!(
            "scan (n = {}, s = {}) does not match parameters (n = {}, s = {})",
            scan.dom.n, scan.s, params.n, params.s
        )));
    }
    Ok(())
}

pub fn psi_on_scan<T: Real>(
    scan: &BallLevelScan<T>,
    eps: T,
    params: &BallParams<T>,
    bq: &BallQuad<T>,
) -> Result<LadderReport<T>> {
    check_scan(scan, params)?;
    if !(eps > T::zero()) {
        return Err(Error::HypothesisViolation(format!("eps > 0 required, got {eps}")));
    }
    let cover = scan.cover(eps)?;
    psi_from_cover(&cover, scan.dom, params, &scan.ladder, bq)
}

pub fn psi_functional<T: Real>(
    f: &TestFunction<T>,
    eps: T,
    params: &BallParams<T>,
    ladder: &TruncationLadder<T>,
    opts: &BallDistanceOptions<T>,
) -> Result<LadderReport<T>> {
    let scan = BallLevelScan::new(f, params.s, ladder, opts.scan, opts.quad.seed)?;
    psi_on_scan(&scan, eps, params, &opts.quad)
}

/// Bisection bracket for `ω₂`.
pub fn estimate_omega2<T: Real>(
    f: &TestFunction<T>,
    params: &BallParams<T>,
    ladder: &TruncationLadder<T>,
    opts: &BallDistanceOptions<T>,
) -> Result<DistanceEstimate<T>> {
    let sup = ball_norm_inf(f, params.s, &opts.grid)?;
    if sup.unbounded {
        return Err(Error::UnboundedFunction(format!(
            "sup |f| delta^s keeps growing on the grid (reached {})",
            sup.value
        )));
    }
    if sup.value == T::zero() {
        return Ok(DistanceEstimate {
            eps_lo: T::zero(),
            eps_hi: T::zero(),
            norm_inf: T::zero(),
            probes: Vec::new(),
            policy: opts.bisect.policy,
        });
    }
    let scan = BallLevelScan::new(f, params.s, ladder, opts.scan, opts.quad.seed)?;
    check_scan(&scan, params)?;
    bisect(sup.value, &opts.bisect, |eps| psi_on_scan(&scan, eps, params, &opts.quad))
}

/// `f = f₁ + f₂` with `f₂ = ∫_{Ω_{ε,s}} f(ξ) K_t(·, ξ) δ^t(ξ) dV(ξ)`.
#[derive(Debug, Clone)]
pub struct BallDecomposition<T> {
    pub f: TestFunction<T>,
    pub dom: BallDomain,
    pub eps: T,
    pub params: BallParams<T>,
    pub ladder: TruncationLadder<T>,
    pub reproduce: BallQuad<T>,
    pub psi: LadderReport<T>,
    kc: T,
    nodes: Vec<(BallPoint<T>, C<T>)>,
}

impl<T: Real> BallDecomposition<T> {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn f2(&self, z: &BallPoint<T>) -> C<T> {
        let mut re = KahanSum::new();
        let mut im = KahanSum::new();
        for (xi, g) in &self.nodes {
            let v = *g * self.dom.kernel_with(self.kc, z, xi, self.params.t);
            re.add(v.re);
            im.add(v.im);
        }
        C::new(re.value(), im.value())
    }

    pub fn reproduced(&self, z: &BallPoint<T>) -> Result<C<T>> {
        Ok(reproduce_ball(&self.f, z, self.params.t, &self.ladder, &self.reproduce)?.value)
    }

    pub fn f1(&self, z: &BallPoint<T>) -> Result<C<T>> {
        Ok(self.reproduced(z)? - self.f2(z))
    }
}

pub fn decompose_ball<T: Real>(
    f: &TestFunction<T>,
    eps: T,
    params: &BallParams<T>,
    ladder: &TruncationLadder<T>,
    opts: &BallDistanceOptions<T>,
    reproduce: &BallQuad<T>,
) -> Result<BallDecomposition<T>> {
    let scan = BallLevelScan::new(f, params.s, ladder, opts.scan, opts.quad.seed)?;
    check_scan(&scan, params)?;
    let cover = scan.cover(eps)?;
    let psi = psi_from_cover(&cover, scan.dom, params, ladder, &opts.quad)?;
    if psi.verdict != ConvergenceVerdict::Convergent {
        return Err(Error::NotConvergent(format!("Psi({eps}) is {}", psi.verdict)));
    }
    let t = params.t;
    let gl = gauss_legendre_unit::<T>(3);
    let fine = scan.opts.fine.max(1);
    let active: Vec<&ScannedCell<T>> = scan.active(eps).collect();
    let nested: Vec<Vec<(BallPoint<T>, C<T>)>> = active
        .par_iter()
        .map(|c| {
            let vol = c.shape.volume();
            let weight = |z: &BallPoint<T>, w: T| f.eval_ball_unchecked(z) * (delta_unchecked(z).powf(t) * w);
            match c.shape {
                Shape::Point { xi, vol } => {
                    if scan.value(&xi) >= eps {
                        vec![(xi, weight(&xi, vol))]
                    } else {
                        Vec::new()
                    }
                }
                Shape::Polar { .. } if c.min >= eps => {
                    let mut out = Vec::with_capacity(gl.len() * gl.len());
                    for &(a, wa) in &gl {
                        for &(b, wb) in &gl {
                            let z = c.shape.at(a, b);
                            out.push((z, weight(&z, vol * wa * wb)));
                        }
                    }
                    out
                }
                Shape::Polar { .. } => {
                    // members pooled into a 4×4 block grid, one node per block
                    let nb = 4usize;
                    let per = fine.div_ceil(nb);
                    let dv = vol / T::from_usize_lossy(fine * fine);
                    let nn = T::from_usize_lossy(fine);
                    let mut sums = vec![C::new(T::zero(), T::zero()); nb * nb];
                    let mut any = vec![false; nb * nb];
                    for a in 0..fine {
                        for b in 0..fine {
                            let z = c.shape.at(
                                (T::from_usize_lossy(a) + T::lit(0.5)) / nn,
                                (T::from_usize_lossy(b) + T::lit(0.5)) / nn,
                            );
                            if scan.value(&z) >= eps {
                                let i = (a / per) * nb + b / per;
                                sums[i] = sums[i] + weight(&z, dv);
                                any[i] = true;
                            }
                        }
                    }
                    let nbt = T::from_usize_lossy(nb);
                    (0..nb * nb)
                        .filter(|&i| any[i])
                        .map(|i| {
                            let z = c.shape.at(
                                (T::from_usize_lossy(i / nb) + T::lit(0.5)) / nbt,
                                (T::from_usize_lossy(i % nb) + T::lit(0.5)) / nbt,
                            );
                            (z, sums[i])
                        })
                        .collect()
                }
            }
        })
        .collect();
    Ok(BallDecomposition {
        f: f.clone(),
        dom: scan.dom,
        eps,
        params: *params,
        ladder: *ladder,
        reproduce: *reproduce,
        psi,
        kc: scan.dom.kernel_const(t)?,
        nodes: nested.into_iter().flatten().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallDecompositionCheck<T> {
    pub eps: T,
    /// `max |f₁| δ^s / ε` over the probe points.
    pub f1_sup_over_eps: T,
    /// `(∫ |f₂|^q δ^{sq−n−1} dV)^{1/q}` on the ladder.
    pub f2_norm: NormReport<T>,
    /// `max |f₁ + f₂ − f| / (1 + |f|)` over the sample points.
    pub residual: T,
    pub psi_verdict: ConvergenceVerdict,
    pub nodes: usize,
}

/// Ten fixed points of the disk (`n = 1`) or of the ball of ℂ².
pub fn ball_sample_points<T: Real>(n: usize) -> Vec<BallPoint<T>> {
    (0..10)
        .map(|k| {
            let r = T::lit(0.08 * k as f64);
            let a = T::lit(0.7 * k as f64);
            if n == 1 {
                disk_point(C::from_polar(r, a))
            } else {
                let h = r * T::lit(std::f64::consts::FRAC_1_SQRT_2);
                [C::from_polar(h, a), C::from_polar(h, -a * T::lit(0.5))]
            }
        })
        .collect()
}

/// Probe points for `sup |f₁| δ^s`: `δ = 2^{−1..−6}`, eight directions.
pub fn ball_f1_grid<T: Real>(n: usize) -> Vec<BallPoint<T>> {
    let mut out = Vec::new();
    for k in 1..=6 {
        let r = T::lit((1.0 - 2f64.powi(-k)).sqrt());
        for j in 0..8 {
            let a = T::lit(std::f64::consts::TAU * j as f64 / 8.0);
            if n == 1 {
                out.push(disk_point(C::from_polar(r, a)));
            } else {
                let h = r * T::lit(std::f64::consts::FRAC_1_SQRT_2);
                out.push([C::from_polar(h, a), C::from_polar(h, a * T::lit(2.0))]);
            }
        }
    }
    out
}

pub fn check_ball_decomposition<T: Real>(
    dec: &BallDecomposition<T>,
    grid: &[BallPoint<T>],
    samples: &[BallPoint<T>],
    norm: &BallQuad<T>,
) -> Result<BallDecompositionCheck<T>> {
    let s = dec.params.s;
    let mut sup = T::zero();
    for z in grid {
        sup = sup.max(dec.f1(z)?.norm() * delta_unchecked(z).powf(s));
    }
    let mut residual = T::zero();
    for z in samples {
        let exact = dec.f.eval_ball(z)?;
        let r = dec.f1(z)? + dec.f2(z) - exact;
        residual = residual.max(r.norm() / (T::one() + exact.norm()));
    }
    let q = dec.params.q;
    let w = s * q - T::from_usize_lossy(dec.dom.n + 1);
    let report = if dec.nodes.is_empty() {
        LadderReport::zeros(dec.ladder.levels(), &norm.quad.classify)
    } else {
        ball_ladder_integrate(dec.dom.n, &dec.ladder, |nd| dec.f2(&nd.z).norm().powf(q) * nd.delta.powf(w), norm)?
    };
    Ok(BallDecompositionCheck {
        eps: dec.eps,
        f1_sup_over_eps: sup / dec.eps,
        f2_norm: norm_from_report(report, q),
        residual,
        psi_verdict: dec.psi.verdict,
        nodes: dec.nodes.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Domain;

    #[test]
    fn membership_examples() {
        let pole = TestFunction::ball_pole(1, 1.0).unwrap();
        let o = disk_point(C::new(0.0, 0.0));
        assert!(omega_member(&pole, 0.5, 1.0, &o).unwrap());
        let one = TestFunction::constant(Domain::Ball { n: 1 }, 1.0).unwrap();
        let z = disk_point(C::new(0.9f64.sqrt(), 0.0));
        assert!(!omega_member(&one, 0.2, 1.0, &z).unwrap());
        assert!(omega_member(&one, 0.2, 1.0, &disk_point(C::new(1.0, 0.0))).is_err());
    }

    #[test]
    fn grid_sup_of_the_pole() {
        let pole = TestFunction::ball_pole(1, 1.0).unwrap();
        let sup = ball_norm_inf(&pole, 1.0, &BallGrid::default()).unwrap();
        assert!(!sup.unbounded);
        assert!(sup.rel_gap.unwrap() < 1e-4);
        let ladder = TruncationLadder::<f64>::ball_default().with_max_exp(8);
        let scan = BallLevelScan::new(&pole, 1.0, &ladder, BallScanOptions::default(), 0).unwrap();
        assert!(scan.cover(3.0).unwrap().entries.is_empty());
    }

    #[test]
    fn cover_volume_tracks_the_disk() {
        let one = TestFunction::constant(Domain::Ball { n: 1 }, 1.0).unwrap();
        let ladder = TruncationLadder::<f64>::ball_default().with_max_exp(8);
        let scan = BallLevelScan::new(&one, 1.0, &ladder, BallScanOptions::default(), 0).unwrap();
        // δ ≥ 0.3 is the disk of radius √0.7
        let cover = scan.cover(0.3).unwrap();
        let v = *cover.level_volume.last().unwrap();
        // one subgrid row of the shell δ ∈ [1/4, 1/2] has volume π/128
        assert!((v - 0.7 * std::f64::consts::PI).abs() < std::f64::consts::PI / 128.0, "{v}");
    }

    #[test]
    fn scaling_identity() {
        let pole = TestFunction::ball_pole(1, 0.5).unwrap();
        let ladder = TruncationLadder::<f64>::ball_default().with_max_exp(8);
        let a = BallLevelScan::new(&pole, 1.0, &ladder, BallScanOptions::default(), 0).unwrap().cover(0.25).unwrap();
        let b = BallLevelScan::new(&pole.scaled(2.0), 1.0, &ladder, BallScanOptions::default(), 0)
            .unwrap()
            .cover(0.5)
            .unwrap();
        assert_eq!(a.level_volume, b.level_volume);
    }
}
