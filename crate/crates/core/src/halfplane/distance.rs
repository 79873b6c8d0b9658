//! Level sets `V_{ε,t}(f) = {|f(z)| (Im z)^t ≥ ε}`, the distance functional
//!
//! `Φ(ε) = ∫ ( ∫_{V_{ε,t}} (Im w)^{β−t} |w̄ − z|^{−(β+2)} dm₂(w) )^q (Im z)^ν dm₂(z)`,
//!
//! the bisection estimate of `l₂ = inf{ε : Φ(ε) < ∞}` and the splitting
//! `f = f₁ + f₂` with `f₂` the reproducing integral over `V_{ε,t}`.
//!
//! The inner integral is discretised on Whitney squares: a square contributes
//! `(Im w_k)^{β−t} |w̄_k − z|^{−(β+2)} · m₂(Δ ∩ V)`, with the intersection area
//! measured on a sampling subgrid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bisect::{bisect, BisectOptions, DistanceEstimate};
use crate::catalog::{Domain, TestFunction};
use crate::error::{Error, Result};
use crate::halfplane::bergman::{norm_from_report, norm_inf, reproduce, reproducing_kernel_unchecked, NormReport, PolarGrid};
use crate::params::HalfPlaneParams;
use crate::quad::kahan::KahanSum;
use crate::quad::ladder::{
    ladder_cubature, ladder_integrate, ConvergenceVerdict, LadderReport, QuadSettings, RegionFamily,
    TruncationLadder,
};
use crate::quad::rules::gauss_legendre_unit;
use crate::scalar::{Real, C};
use crate::whitney::{squares_meeting, PlaneRegion, WhitneySquare};

/// `|f(z)| (Im z)^t ≥ ε`
pub fn levelset_member<T: Real>(f: &TestFunction<T>, eps: T, t: T, z: C<T>) -> Result<bool> {
    Ok(f.eval_plane(z)?.norm() * z.im.powf(t) >= eps)
}

/// Subgrid resolutions for level-set areas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Per-side samples used to find candidate squares.
    pub coarse: usize,
    /// Per-side samples for squares straddling the level or a ladder boundary.
    pub fine: usize,
    /// Refuse to build covers with more active squares than this.
    pub max_active: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            coarse: 8,
            fine: 32,
            max_active: 250_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct ScannedSquare<T> {
    sq: WhitneySquare,
    max: T,
    min: T,
    /// First ladder index whose region meets the square.
    lo: usize,
    /// First ladder index whose region contains the square (`nl` if none).
    full: usize,
}

/// Whitney squares of the outermost ladder region with sampled extremes of
/// `|f| y^t`; reusable across `ε`.
#[derive(Debug, Clone)]
pub struct LevelSetScan<T> {
    f: TestFunction<T>,
    t: T,
    ladder: TruncationLadder<T>,
    opts: ScanOptions,
    squares: Vec<ScannedSquare<T>>,
}

/// One Whitney square meeting `V ∩ R_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverEntry<T> {
    pub square: WhitneySquare,
    pub center: C<T>,
    /// `(ladder index, area)` pieces of `Δ ∩ V` first entering at that level.
    pub areas: Vec<(usize, T)>,
    /// Area measured on the fine subgrid rather than taken as the full square.
    pub partial: bool,
}

/// The discretised level set `V_{ε,t} ∩ R_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetCover<T> {
    pub eps: T,
    pub entries: Vec<CoverEntry<T>>,
    /// Area of `V ∩ R_m` per ladder level.
    pub level_area: Vec<T>,
}

impl<T: Real> LevelSetCover<T> {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Smallest `Im w` over the squares of the cover.
    pub fn min_height(&self) -> Option<T> {
        self.entries
            .iter()
            .map(|e| e.square.extent::<T>().y0)
            .fold(None, |acc, y| Some(acc.map_or(y, |a: T| a.min(y))))
    }
}

fn sub_point<T: Real>(sq: &WhitneySquare, n: usize, a: usize, b: usize) -> C<T> {
    let e = sq.extent::<T>();
    let s = e.x1 - e.x0;
    let nn = T::from_usize_lossy(n);
    C::new(
        e.x0 + s * (T::from_usize_lossy(a) + T::lit(0.5)) / nn,
        e.y0 + s * (T::from_usize_lossy(b) + T::lit(0.5)) / nn,
    )
}

impl<T: Real> LevelSetScan<T> {
    pub fn new(f: &TestFunction<T>, t: T, ladder: &TruncationLadder<T>, opts: ScanOptions) -> Result<Self> {
        if f.domain != Domain::HalfPlane {
            return Err(Error::OutOfDomain("expected a half-plane function".into()));
        }
        if ladder.family != RegionFamily::HalfPlaneSectors {
            return Err(Error::HypothesisViolation("a half-plane ladder is required".into()));
        }
        let nl = ladder.len();
        let sectors: Vec<_> = ladder.levels().into_iter().map(|m| ladder.sector(m)).collect();
        let outer = PlaneRegion::Sector(sectors[nl - 1]);
        let all = if f.is_zero() { Vec::new() } else { squares_meeting(&outer) };
        let n = opts.coarse.max(1);
        let squares = all
            .par_iter()
            .map(|&sq| {
                let e = sq.extent::<T>();
                let lo = sectors
                    .iter()
                    .position(|s| s.meets_rect(e.x0, e.x1, e.y0, e.y1))
                    .unwrap_or(nl);
                let full = sectors
                    .iter()
                    .position(|s| s.contains_rect(e.x0, e.x1, e.y0, e.y1))
                    .unwrap_or(nl);
                let mut max = T::zero();
                let mut min = T::infinity();
                for a in 0..n {
                    for b in 0..n {
                        let z = sub_point(&sq, n, a, b);
                        let v = f.eval_plane_unchecked(z).norm() * z.im.powf(t);
                        max = max.max(v);
                        min = min.min(v);
                    }
                }
                ScannedSquare { sq, max, min, lo, full }
            })
            .collect();
        Ok(Self {
            f: f.clone(),
            t,
            ladder: *ladder,
            opts,
            squares,
        })
    }

    pub fn function(&self) -> &TestFunction<T> {
        &self.f
    }

    pub fn weight(&self) -> T {
        self.t
    }

    pub fn ladder(&self) -> &TruncationLadder<T> {
        &self.ladder
    }

    /// Number of squares meeting the outermost region.
    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    /// Largest sampled value of `|f| y^t`.
    pub fn sampled_max(&self) -> T {
        self.squares.iter().map(|s| s.max).fold(T::zero(), T::max)
    }

    fn is_member(&self, z: C<T>, eps: T) -> bool {
        self.f.eval_plane_unchecked(z).norm() * z.im.powf(self.t) >= eps
    }

    /// Fine member samples of a square with their ladder index.
    fn fine_members(&self, s: &ScannedSquare<T>, eps: T) -> Vec<(C<T>, usize)> {
        let n = self.opts.fine.max(1);
        let nl = self.ladder.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                let z = sub_point(&s.sq, n, a, b);
                if !self.is_member(z, eps) {
                    continue;
                }
                let level = if s.lo == s.full {
                    s.lo
                } else {
                    self.ladder.halfplane_level_of(z).unwrap_or(nl)
                };
                if level < nl {
                    out.push((z, level));
                }
            }
        }
        out
    }

    fn active(&self, eps: T) -> impl Iterator<Item = &ScannedSquare<T>> {
        let nl = self.ladder.len();
        self.squares.iter().filter(move |s| s.max >= eps && s.lo < nl)
    }

    /// Discretise `V_{ε,t} ∩ R_M`.
    pub fn cover(&self, eps: T) -> Result<LevelSetCover<T>> {
        let nl = self.ladder.len();
        let active: Vec<&ScannedSquare<T>> = self.active(eps).collect();
        if active.len() > self.opts.max_active {
            return Err(Error::BudgetExceeded {
                max_cells: self.opts.max_active,
                estimate: active.len() as f64,
                error: f64::NAN,
            });
        }
        let fine = T::from_usize_lossy(self.opts.fine.max(1).pow(2));
        let entries: Vec<CoverEntry<T>> = active
            .par_iter()
            .filter_map(|s| {
                let area = s.sq.area::<T>();
                if s.min >= eps && s.lo == s.full {
                    return Some(CoverEntry {
                        square: s.sq,
                        center: s.sq.center(),
                        areas: vec![(s.lo, area)],
                        partial: false,
                    });
                }
                let mut counts = vec![0usize; nl];
                for (_, l) in self.fine_members(s, eps) {
                    counts[l] += 1;
                }
                let areas: Vec<(usize, T)> = counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(l, &c)| (l, area * T::from_usize_lossy(c) / fine))
                    .collect();
                (!areas.is_empty()).then(|| CoverEntry {
                    square: s.sq,
                    center: s.sq.center(),
                    areas,
                    partial: true,
                })
            })
            .collect();
        let mut per_level = vec![KahanSum::new(); nl];
        for e in &entries {
            for &(l, a) in &e.areas {
                per_level[l].add(a);
            }
        }
        let mut level_area = Vec::with_capacity(nl);
        let mut acc = T::zero();
        for s in per_level {
            acc = acc + s.value();
            level_area.push(acc);
        }
        Ok(LevelSetCover {
            eps,
            entries,
            level_area,
        })
    }
}

/// Discretisation and quadrature settings of the distance functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceOptions<T> {
    pub quad: QuadSettings<T>,
    pub scan: ScanOptions,
    pub bisect: BisectOptions<T>,
    pub grid: PolarGrid,
}

impl<T: Real> Default for DistanceOptions<T> {
    fn default() -> Self {
        Self {
            quad: QuadSettings {
                tol: T::lit(1e-3),
                max_cells: 20_000,
                ..QuadSettings::default()
            },
            scan: ScanOptions::default(),
            bisect: BisectOptions::default(),
            grid: PolarGrid::default(),
        }
    }
}

fn check_weight<T: Real>(scan: &LevelSetScan<T>, params: &HalfPlaneParams<T>) -> Result<()> {
    if scan.t != params.t {
        return Err(Error::HypothesisViolation(format!(
            "scan weight {} differs from t = {}",
            scan.t, params.t
        )));
    }
    Ok(())
}

/// `Φ(ε)` per ladder level from a prepared cover.
pub fn phi_from_cover<T: Real>(
    cover: &LevelSetCover<T>,
    params: &HalfPlaneParams<T>,
    ladder: &TruncationLadder<T>,
    settings: &QuadSettings<T>,
) -> LadderReport<T> {
    if cover.is_empty() {
        return LadderReport::zeros(ladder.levels(), &settings.classify);
    }
    let nl = ladder.len();
    let bt = params.beta - params.t;
    let h = -(params.beta + T::lit(2.0)) * T::lit(0.5);
    let weighted: Vec<(C<T>, T, &[(usize, T)])> = cover
        .entries
        .iter()
        .map(|e| (e.center.conj(), e.center.im.powf(bt), e.areas.as_slice()))
        .collect();
    let res = ladder_cubature(ladder, 1, &[], settings, |pt, out| {
        let z = pt.z;
        let mut buckets = vec![T::zero(); nl];
        for &(wc, wt, areas) in &weighted {
            let k = wt * (wc - z).norm_sqr().powf(h);
            for &(l, a) in areas {
                buckets[l] = buckets[l] + k * a;
            }
        }
        let outer = z.im.powf(params.nu) * pt.jac;
        let mut inner = T::zero();
        for (l, b) in buckets.iter().enumerate() {
            inner = inner + *b;
            if l >= pt.level {
                out[l] = inner.powf(params.q) * outer;
            }
        }
    });
    let (values, errors) = res.component(0);
    let reliable = res.reliable(0, settings.tol);
    LadderReport::from_levels(ladder.levels(), values, errors, reliable, &settings.classify)
}

/// `Φ(ε)` on a prepared scan.
pub fn phi_on_scan<T: Real>(
    scan: &LevelSetScan<T>,
    eps: T,
    params: &HalfPlaneParams<T>,
    settings: &QuadSettings<T>,
) -> Result<LadderReport<T>> {
    check_weight(scan, params)?;
    if !(eps > T::zero()) {
        return Err(Error::HypothesisViolation(format!("eps > 0 required, got {eps}")));
    }
    let cover = scan.cover(eps)?;
    Ok(phi_from_cover(&cover, params, &scan.ladder, settings))
}

/// Per-level values of the distance functional `Φ(ε)`.
pub fn phi_functional<T: Real>(
    f: &TestFunction<T>,
    eps: T,
    params: &HalfPlaneParams<T>,
    ladder: &TruncationLadder<T>,
    opts: &DistanceOptions<T>,
) -> Result<LadderReport<T>> {
    let scan = LevelSetScan::new(f, params.t, ladder, opts.scan)?;
    phi_on_scan(&scan, eps, params, &opts.quad)
}

/// Bisection bracket for `l₂`.
pub fn estimate_l2<T: Real>(
    f: &TestFunction<T>,
    params: &HalfPlaneParams<T>,
    ladder: &TruncationLadder<T>,
    opts: &DistanceOptions<T>,
) -> Result<DistanceEstimate<T>> {
    let sup = norm_inf(f, params.t, &opts.grid)?;
    if sup.unbounded {
        return Err(Error::UnboundedFunction(format!(
            "sup |f| y^t keeps growing on the grid (reached {})",
            sup.value
        )));
    }
    let scan = LevelSetScan::new(f, params.t, ladder, opts.scan)?;
    if sup.value == T::zero() {
        return Ok(DistanceEstimate {
            eps_lo: T::zero(),
            eps_hi: T::zero(),
            norm_inf: T::zero(),
            probes: Vec::new(),
            policy: opts.bisect.policy,
        });
    }
    bisect(sup.value, &opts.bisect, |eps| phi_on_scan(&scan, eps, params, &opts.quad))
}

/// `f = f₁ + f₂` with `f₂ = ∫_{V_{ε,t}} f(w) (Im w)^β K(·, w) dm₂(w)`.
#[derive(Debug, Clone)]
pub struct Decomposition<T> {
    pub f: TestFunction<T>,
    pub eps: T,
    pub params: HalfPlaneParams<T>,
    pub ladder: TruncationLadder<T>,
    pub settings: QuadSettings<T>,
    /// Verdict ladder of `Φ(ε)`.
    pub phi: LadderReport<T>,
    /// Quadrature nodes of `f₂`: `(w, f(w) (Im w)^β dm₂)`.
    nodes: Vec<(C<T>, C<T>)>,
}

impl<T: Real> Decomposition<T> {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn f2(&self, z: C<T>) -> C<T> {
        let mut re = KahanSum::new();
        let mut im = KahanSum::new();
        for &(w, g) in &self.nodes {
            let v = g * reproducing_kernel_unchecked(z, w, self.params.beta);
            re.add(v.re);
            im.add(v.im);
        }
        C::new(re.value(), im.value())
    }

    /// Ladder value of the reproducing integral of `f`.
    pub fn reproduced(&self, z: C<T>) -> Result<C<T>> {
        Ok(reproduce(&self.f, z, self.params.beta, None, &self.ladder, &self.settings)?.value)
    }

    pub fn f1(&self, z: C<T>) -> Result<C<T>> {
        Ok(self.reproduced(z)? - self.f2(z))
    }
}

/// Split `f` at level `ε`; requires `Φ(ε)` to be convergent and `β > t − 1`
/// so the representation integral converges for `f ∈ A^∞_t`.
pub fn decompose<T: Real>(
    f: &TestFunction<T>,
    eps: T,
    params: &HalfPlaneParams<T>,
    ladder: &TruncationLadder<T>,
    opts: &DistanceOptions<T>,
    reproduce_settings: &QuadSettings<T>,
) -> Result<Decomposition<T>> {
    if !(params.beta > params.t - T::one()) {
        return Err(Error::HypothesisViolation(format!(
            "beta > t - 1 required for the representation of A^inf_t, got beta = {}, t = {}",
            params.beta, params.t
        )));
    }
    let scan = LevelSetScan::new(f, params.t, ladder, opts.scan)?;
    let cover = scan.cover(eps)?;
    let phi = phi_from_cover(&cover, params, ladder, &opts.quad);
    if phi.verdict != ConvergenceVerdict::Convergent {
        return Err(Error::NotConvergent(format!("Phi({eps}) is {}", phi.verdict)));
    }
    let gl = gauss_legendre_unit::<T>(3);
    let beta = params.beta;
    let active: Vec<&ScannedSquare<T>> = scan.active(eps).collect();
    let block = 4usize;
    let nested: Vec<Vec<(C<T>, C<T>)>> = active
        .par_iter()
        .map(|s| {
            let e = s.sq.extent::<T>();
            let side = e.x1 - e.x0;
            let area = s.sq.area::<T>();
            if s.min >= eps && s.lo == s.full {
                let mut nodes = Vec::with_capacity(gl.len() * gl.len());
                for &(xa, wa) in &gl {
                    for &(yb, wb) in &gl {
                        let w = C::new(e.x0 + side * xa, e.y0 + side * yb);
                        nodes.push((w, f.eval_plane_unchecked(w) * (w.im.powf(beta) * area * wa * wb)));
                    }
                }
                return nodes;
            }
            // member samples are pooled into blocks so partial squares stay cheap
            let n = scan.opts.fine.max(1);
            let nb = n.div_ceil(block);
            let da = area / T::from_usize_lossy(n * n);
            let mut sums = vec![C::new(T::zero(), T::zero()); nb * nb];
            let mut any = vec![false; nb * nb];
            for (z, _) in scan.fine_members(s, eps) {
                let a = ((z.re - e.x0) / side * T::from_usize_lossy(n)).to_usize().unwrap_or(0).min(n - 1);
                let b = ((z.im - e.y0) / side * T::from_usize_lossy(n)).to_usize().unwrap_or(0).min(n - 1);
                let idx = (a / block) * nb + b / block;
                sums[idx] = sums[idx] + f.eval_plane_unchecked(z) * (z.im.powf(beta) * da);
                any[idx] = true;
            }
            let bs = side / T::from_usize_lossy(nb);
            (0..nb * nb)
                .filter(|&i| any[i])
                .map(|i| {
                    let (a, b) = (i / nb, i % nb);
                    let w = C::new(
                        e.x0 + bs * (T::from_usize_lossy(a) + T::lit(0.5)),
                        e.y0 + bs * (T::from_usize_lossy(b) + T::lit(0.5)),
                    );
                    (w, sums[i])
                })
                .collect()
        })
        .collect();
    Ok(Decomposition {
        f: f.clone(),
        eps,
        params: *params,
        ladder: *ladder,
        settings: *reproduce_settings,
        phi,
        nodes: nested.into_iter().flatten().collect(),
    })
}

/// Diagnostics of a decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionCheck<T> {
    pub eps: T,
    /// `max |f₁(z)| (Im z)^t / ε` over the probe grid.
    pub f1_sup_over_eps: T,
    /// `‖f₂‖_{A^q_ν}` on the ladder.
    pub f2_norm: NormReport<T>,
    /// `max |f₁ + f₂ − f| / (1 + |f|)` over the sample points.
    pub residual: T,
    pub phi_verdict: ConvergenceVerdict,
    pub nodes: usize,
}

/// Twenty fixed sample points of ℂ₊.
pub fn sample_points<T: Real>() -> Vec<C<T>> {
    let xs = [-2.0, -0.5, 0.0, 0.5, 2.0];
    let ys = [0.25, 0.5, 1.0, 2.0];
    xs.iter()
        .flat_map(|&x| ys.iter().map(move |&y| C::new(T::lit(x), T::lit(y))))
        .collect()
}

/// Polar probe grid for `sup |f₁| y^t`.
pub fn f1_grid<T: Real>() -> Vec<C<T>> {
    let mut out = Vec::new();
    for k in -3..=3 {
        let r = T::lit(2f64.powi(k));
        for j in 1..=5 {
            out.push(C::from_polar(r, T::PI() * T::lit(j as f64 / 6.0)));
        }
    }
    out
}

pub fn check_decomposition<T: Real>(
    dec: &Decomposition<T>,
    grid: &[C<T>],
    samples: &[C<T>],
    norm_settings: &QuadSettings<T>,
) -> Result<DecompositionCheck<T>> {
    let t = dec.params.t;
    let mut sup = T::zero();
    for &z in grid {
        sup = sup.max(dec.f1(z)?.norm() * z.im.powf(t));
    }
    let mut residual = T::zero();
    for &z in samples {
        let exact = dec.f.eval_plane(z)?;
        let r = dec.f1(z)? + dec.f2(z) - exact;
        residual = residual.max(r.norm() / (T::one() + exact.norm()));
    }
    let q = dec.params.q;
    let nu = dec.params.nu;
    let report = if dec.nodes.is_empty() {
        LadderReport::zeros(dec.ladder.levels(), &norm_settings.classify)
    } else {
        ladder_integrate(&dec.ladder, |pt| dec.f2(pt.z).norm().powf(q) * pt.z.im.powf(nu), norm_settings)
    };
    Ok(DecompositionCheck {
        eps: dec.eps,
        f1_sup_over_eps: sup / dec.eps,
        f2_norm: norm_from_report(report, q),
        residual,
        phi_verdict: dec.phi.verdict,
        nodes: dec.nodes.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type TF = TestFunction<f64>;

    #[test]
    fn membership_examples() {
        let i = C::new(0.0, 1.0);
        assert!(levelset_member(&TF::pure_power(1.0), 0.9, 1.0, i).unwrap());
        let z = C::from_polar(1.0, std::f64::consts::PI / 6.0);
        assert!(!levelset_member(&TF::pure_power(2.0), 0.3, 2.0, z).unwrap());
        assert!(levelset_member(&TF::pure_power(1.0), 0.5, 1.0, C::new(0.0, -1.0)).is_err());
        let f = TF::power_shift(2.0);
        let norm = f.analytic_sup_norm(1.0).unwrap();
        for z in crate::halfplane::bergman::PolarGrid::coarse().points::<f64>() {
            assert!(!levelset_member(&f, norm * 1.01, 1.0, z).unwrap());
        }
    }

    #[test]
    fn scaling_identity_of_covers() {
        let ladder = TruncationLadder::<f64>::halfplane_default().with_max_exp(6);
        let f = TF::power_shift(2.0);
        let a = LevelSetScan::new(&f, 1.0, &ladder, ScanOptions::default()).unwrap().cover(0.1).unwrap();
        let b = LevelSetScan::new(&f.scaled(4.0), 1.0, &ladder, ScanOptions::default())
            .unwrap()
            .cover(0.4)
            .unwrap();
        assert_eq!(a.level_area, b.level_area);
        assert!(!a.is_empty());
    }

    #[test]
    fn compact_level_set_converges() {
        let params = HalfPlaneParams::validate(2.0, 0.0, 1.0).unwrap();
        let ladder = TruncationLadder::halfplane_default();
        let opts = DistanceOptions::default();
        let f = TF::power_shift(2.0);
        let scan = LevelSetScan::new(&f, 1.0, &ladder, opts.scan).unwrap();
        let cover = scan.cover(0.1).unwrap();
        // y/|z+i|² ≥ 0.1 forces y ≥ 0.1
        assert!(cover.min_height().unwrap() >= 0.05);
        let r = phi_from_cover(&cover, &params, &ladder, &opts.quad);
        assert_eq!(r.verdict, ConvergenceVerdict::Convergent);
        let empty = phi_on_scan(&scan, 0.5, &params, &opts.quad).unwrap();
        assert_eq!(empty.verdict, ConvergenceVerdict::Convergent);
        assert!(empty.values.iter().all(|&v| v == 0.0));
    }
}
