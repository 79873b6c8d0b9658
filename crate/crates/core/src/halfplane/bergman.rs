//! Weighted Bergman kernels, the reproducing formula and weighted norms on ℂ₊.

use serde::{Deserialize, Serialize};

use crate::catalog::{Domain, TestFunction};
use crate::error::{Error, Result};
use crate::params::representation_beta_floor;
use crate::quad::adaptive::integrate_1d;
use crate::quad::ladder::{
    ladder_cubature, ladder_integrate, ConvergenceVerdict, LadderReport, QuadSettings, RegionFamily,
    TruncationLadder,
};
use crate::scalar::{cpow, Real, C};

fn upper<T: Real>(z: C<T>, name: &str) -> Result<()> {
    if z.im > T::zero() && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfDomain(format!("{name} = {z} is not in the upper half-plane")))
    }
}

fn halfplane_ladder<T: Real>(ladder: &TruncationLadder<T>) -> Result<()> {
    if ladder.family == RegionFamily::HalfPlaneSectors {
        Ok(())
    } else {
        Err(Error::HypothesisViolation("a half-plane ladder is required".into()))
    }
}

fn halfplane_fn<T: Real>(f: &TestFunction<T>) -> Result<()> {
    if f.domain == Domain::HalfPlane {
        Ok(())
    } else {
        Err(Error::OutOfDomain("expected a half-plane function".into()))
    }
}

/// `K_β(z, w) = ((β+1)/π) (w̄ − z)^{−(2+β)}`, principal branch.
#[inline]
pub fn kernel_unchecked<T: Real>(z: C<T>, w: C<T>, beta: T) -> C<T> {
    cpow(w.conj() - z, -(beta + T::lit(2.0))) * ((beta + T::one()) / T::PI())
}

/// Normalised reproducing kernel `(2^β (β+1)/π) (i(w̄ − z))^{−(2+β)}`.
///
/// It differs from [`kernel`] by the unimodular factor `e^{−iπ(2+β)/2}` and the
/// scale `2^β`; only this normalisation reproduces `A^p_α` functions.
#[inline]
pub fn reproducing_kernel_unchecked<T: Real>(z: C<T>, w: C<T>, beta: T) -> C<T> {
    kernel_unchecked(z, w, beta) * reproducing_factor(beta)
}

#[inline]
pub fn reproducing_factor<T: Real>(beta: T) -> C<T> {
    C::from_polar(T::lit(2.0).powf(beta), -T::FRAC_PI_2() * (beta + T::lit(2.0)))
}

pub fn kernel<T: Real>(z: C<T>, w: C<T>, beta: T) -> Result<C<T>> {
    upper(z, "z")?;
    upper(w, "w")?;
    if !(beta > -T::one()) {
        return Err(Error::HypothesisViolation(format!("beta > -1 required, got {beta}")));
    }
    Ok(kernel_unchecked(z, w, beta))
}

/// Value of a ladder-evaluated reproducing integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reproduction<T> {
    pub value: C<T>,
    /// Ladder of the absolute integrand; its verdict decides admissibility.
    pub report: LadderReport<T>,
}

/// `∫ g(w) (Im w)^β K(z, w) dm₂(w)` with the reproducing kernel, for an
/// arbitrary integrand `g`, truncated along the ladder.
pub fn reproduce_integral<T, G>(
    g: G,
    z: C<T>,
    beta: T,
    ladder: &TruncationLadder<T>,
    settings: &QuadSettings<T>,
) -> Result<Reproduction<T>>
where
    T: Real,
    G: Fn(C<T>) -> C<T> + Sync,
{
    upper(z, "z")?;
    halfplane_ladder(ladder)?;
    let nl = ladder.len();
    let res = ladder_cubature(ladder, 3, &[2, 2, 2], settings, |pt, out| {
        let w = pt.z;
        let v = g(w) * reproducing_kernel_unchecked(z, w, beta) * (w.im.powf(beta) * pt.jac);
        let a = v.norm();
        for l in pt.level..nl {
            out[3 * l] = v.re;
            out[3 * l + 1] = v.im;
            out[3 * l + 2] = a;
        }
    });
    let (re, _) = res.component(0);
    let (im, _) = res.component(1);
    let (abs, abs_err) = res.component(2);
    let reliable = res.reliable(2, settings.tol);
    let report = LadderReport::from_levels(ladder.levels(), abs, abs_err, reliable, &settings.classify);
    let value = C::new(*re.last().unwrap(), *im.last().unwrap());
    if report.verdict != ConvergenceVerdict::Convergent {
        return Err(Error::NotReproducible(format!(
            "reproducing integral at {z} is {} on the ladder",
            report.verdict
        )));
    }
    Ok(Reproduction { value, report })
}

/// Reproduce `f(z)` from the weighted Bergman representation with kernel
/// order `beta`. With `space = Some((p, α))` the function must belong to
/// `A^p_α` and `beta` must meet the representation bound for that space; with
/// `None` only convergence of the integral is required.
pub fn reproduce<T: Real>(
    f: &TestFunction<T>,
    z: C<T>,
    beta: T,
    space: Option<(T, T)>,
    ladder: &TruncationLadder<T>,
    settings: &QuadSettings<T>,
) -> Result<Reproduction<T>> {
    halfplane_fn(f)?;
    upper(z, "z")?;
    if !(beta > -T::one()) {
        return Err(Error::HypothesisViolation(format!("beta > -1 required, got {beta}")));
    }
    if let Some((p, alpha)) = space {
        let floor = representation_beta_floor(p, alpha);
        if !(beta >= floor) {
            return Err(Error::HypothesisViolation(format!(
                "beta = {beta} is below the representation bound {floor} for p = {p}, alpha = {alpha}"
            )));
        }
        if f.halfplane_membership(p, alpha) == Some(false) {
            return Err(Error::HypothesisViolation(format!(
                "function is not in A^{p}_{alpha}"
            )));
        }
    }
    if f.is_zero() {
        return Ok(Reproduction {
            value: C::new(T::zero(), T::zero()),
            report: LadderReport::zeros(ladder.levels(), &settings.classify),
        });
    }
    reproduce_integral(|w| f.eval_plane_unchecked(w), z, beta, ladder, settings)
}

/// A weighted norm on the ladder: the value is present only when convergent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport<T> {
    pub value: Option<T>,
    pub verdict: ConvergenceVerdict,
    pub report: LadderReport<T>,
}

/// `‖f‖_{p,α} = (∫ |f|^p y^α dm₂)^{1/p}` from the ladder of the inner integral.
pub fn norm_p_alpha<T: Real>(
    f: &TestFunction<T>,
    p: T,
    alpha: T,
    ladder: &TruncationLadder<T>,
    settings: &QuadSettings<T>,
) -> Result<NormReport<T>> {
    halfplane_fn(f)?;
    halfplane_ladder(ladder)?;
    if !(p > T::zero()) || !(alpha > -T::one()) {
        return Err(Error::HypothesisViolation(format!(
            "p > 0 and alpha > -1 required, got p = {p}, alpha = {alpha}"
        )));
    }
    let report = if f.is_zero() {
        LadderReport::zeros(ladder.levels(), &settings.classify)
    } else {
        ladder_integrate(
            ladder,
            |pt| f.eval_plane_unchecked(pt.z).norm().powf(p) * pt.z.im.powf(alpha),
            settings,
        )
    };
    Ok(norm_from_report(report, p))
}

pub(crate) fn norm_from_report<T: Real>(report: LadderReport<T>, p: T) -> NormReport<T> {
    let verdict = report.verdict;
    let value = (verdict == ConvergenceVerdict::Convergent).then(|| report.last_value().powf(T::one() / p));
    NormReport { value, verdict, report }
}

/// Log-spaced polar grid `r = 2^u`, `θ_j = jπ/(n_θ+1)`; an odd `n_θ` places a
/// ray exactly on `θ = π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub log2_r_min: f64,
    pub log2_r_max: f64,
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for PolarGrid {
    fn default() -> Self {
        Self {
            log2_r_min: -20.0,
            log2_r_max: 20.0,
            n_r: 401,
            n_theta: 181,
        }
    }
}

impl PolarGrid {
    pub fn coarse() -> Self {
        Self {
            log2_r_min: -12.0,
            log2_r_max: 12.0,
            n_r: 97,
            n_theta: 61,
        }
    }

    fn radii<T: Real>(&self) -> Vec<(T, bool)> {
        let n = self.n_r.max(2);
        let mid_lo = 0.5 * self.log2_r_min;
        let mid_hi = 0.5 * self.log2_r_max;
        (0..n)
            .map(|i| {
                let u = self.log2_r_min + (self.log2_r_max - self.log2_r_min) * i as f64 / (n - 1) as f64;
                (T::lit(u.exp2()), u >= mid_lo && u <= mid_hi)
            })
            .collect()
    }

    fn angles<T: Real>(&self) -> Vec<T> {
        let n = self.n_theta.max(1);
        (1..=n)
            .map(|j| T::PI() * T::from_usize_lossy(j) / T::from_usize_lossy(n + 1))
            .collect()
    }

    /// Every grid point.
    pub fn points<T: Real>(&self) -> Vec<C<T>> {
        let th = self.angles::<T>();
        self.radii::<T>()
            .into_iter()
            .flat_map(|(r, _)| th.iter().map(move |&a| C::from_polar(r, a)))
            .collect()
    }
}

/// Grid estimate of `sup |f| y^ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupNorm<T> {
    /// Grid maximum: a lower bound of the true supremum.
    pub value: T,
    pub argmax: [T; 2],
    /// The maximum keeps growing as the grid extends.
    pub unbounded: bool,
    pub analytic: Option<T>,
    /// `(analytic − value) / analytic` when the analytic value is finite.
    pub rel_gap: Option<T>,
}

/// Grid maximum of a weighted modulus, with the growth test shared by the
/// half-plane and the ball.
pub(crate) fn grid_sup<T: Real>(
    samples: impl Iterator<Item = (C<T>, T, bool)>,
    analytic: Option<T>,
) -> SupNorm<T> {
    let mut best = T::zero();
    let mut arg = C::new(T::zero(), T::zero());
    let mut inner = T::zero();
    let mut finite = true;
    for (z, v, is_inner) in samples {
        if !v.is_finite() {
            finite = false;
            continue;
        }
        if v > best {
            best = v;
            arg = z;
        }
        if is_inner {
            inner = inner.max(v);
        }
    }
    let unbounded = !finite || best > T::lit(2.0) * inner;
    let rel_gap = analytic.filter(|a| a.is_finite() && *a > T::zero()).map(|a| (a - best) / a);
    SupNorm {
        value: best,
        argmax: [arg.re, arg.im],
        unbounded,
        analytic,
        rel_gap,
    }
}

/// `sup_{z ∈ ℂ₊} |f(z)| (Im z)^ν` estimated on a polar grid.
pub fn norm_inf<T: Real>(f: &TestFunction<T>, nu: T, grid: &PolarGrid) -> Result<SupNorm<T>> {
    halfplane_fn(f)?;
    if !(nu > T::zero()) {
        return Err(Error::HypothesisViolation(format!("nu > 0 required, got {nu}")));
    }
    let th = grid.angles::<T>();
    let radii = grid.radii::<T>();
    let samples = radii.iter().flat_map(|&(r, inner)| {
        th.iter().map(move |&a| {
            let z = C::from_polar(r, a);
            (z, f.eval_plane_unchecked(z).norm() * z.im.powf(nu), inner)
        })
    });
    Ok(grid_sup(samples, f.analytic_sup_norm(nu)))
}

/// Scale-invariant constant of the kernel integral estimate: `∫ (Im z)^α |w̄ − z|^{−λ} dm₂(z)`
/// divided by `(Im w)^{α + 2 − λ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelIntegral<T> {
    pub ratio: T,
    pub integral: T,
    pub report: LadderReport<T>,
}

pub fn lemma3_ratio<T: Real>(
    w: C<T>,
    alpha: T,
    lambda_exp: T,
    ladder: &TruncationLadder<T>,
    settings: &QuadSettings<T>,
) -> Result<KernelIntegral<T>> {
    upper(w, "w")?;
    halfplane_ladder(ladder)?;
    if !(alpha > -T::one()) || !(lambda_exp - T::lit(2.0) > alpha) {
        return Err(Error::HypothesisViolation(format!(
            "need lambda_exp - 2 > alpha > -1, got lambda_exp = {lambda_exp}, alpha = {alpha}"
        )));
    }
    let half = -lambda_exp * T::lit(0.5);
    let report = ladder_integrate(
        ladder,
        |pt| pt.z.im.powf(alpha) * (w.conj() - pt.z).norm_sqr().powf(half),
        settings,
    );
    if report.verdict != ConvergenceVerdict::Convergent {
        return Err(Error::NotConvergent(format!("kernel integral at w = {w} is {}", report.verdict)));
    }
    let integral = report.last_value();
    let ratio = integral / w.im.powf(alpha + T::lit(2.0) - lambda_exp);
    Ok(KernelIntegral { ratio, integral, report })
}

fn convergent_norm<T: Real>(
    f: &TestFunction<T>,
    p: T,
    nu: T,
    ladder: &TruncationLadder<T>,
    settings: &QuadSettings<T>,
) -> Result<T> {
    let n = norm_p_alpha(f, p, nu, ladder, settings)?;
    n.value
        .ok_or_else(|| Error::NotConvergent(format!("the A^{p}_{nu} norm is {}", n.verdict)))
}

/// Empirical constant in `|f(x+iy)| ≤ C y^{−(ν+2)/p} ‖f‖_{A^p_ν}`.
pub fn pointwise_ratio<T: Real>(
    f: &TestFunction<T>,
    p: T,
    nu: T,
    grid: &PolarGrid,
    ladder: &TruncationLadder<T>,
    settings: &QuadSettings<T>,
) -> Result<T> {
    halfplane_fn(f)?;
    if f.is_zero() {
        return Ok(T::zero());
    }
    let norm = convergent_norm(f, p, nu, ladder, settings)?;
    let e = (nu + T::lit(2.0)) / p;
    let sup = grid
        .points::<T>()
        .into_iter()
        .map(|z| f.eval_plane_unchecked(z).norm() * z.im.powf(e))
        .fold(T::zero(), T::max);
    Ok(sup / norm)
}

/// `(∫ |f(x+iy)|^p dx)^{1/p}`, by the substitution `x = y tan φ`.
pub fn line_norm<T: Real>(f: &TestFunction<T>, p: T, y: T, settings: &QuadSettings<T>) -> Result<T> {
    halfplane_fn(f)?;
    if !(y > T::zero()) {
        return Err(Error::OutOfDomain(format!("line height must be positive, got {y}")));
    }
    let h = T::FRAC_PI_2();
    let g = |phi: T| {
        let c = phi.cos();
        let x = y * phi.tan();
        f.eval_plane_unchecked(C::new(x, y)).norm().powf(p) * y / (c * c)
    };
    let (v, _) = integrate_1d(g, -h, h, settings.tol, T::zero(), settings.max_cells)?;
    Ok(v.powf(T::one() / p))
}

/// Empirical constant in `‖f(· + iy)‖_{L^p} ≤ C y^{−(ν+1)/p} ‖f‖_{A^p_ν}`, maximised
/// over the given heights.
pub fn line_norm_ratio<T: Real>(
    f: &TestFunction<T>,
    p: T,
    nu: T,
    heights: &[T],
    ladder: &TruncationLadder<T>,
    settings: &QuadSettings<T>,
) -> Result<T> {
    halfplane_fn(f)?;
    if f.is_zero() {
        return Ok(T::zero());
    }
    let norm = convergent_norm(f, p, nu, ladder, settings)?;
    let e = (nu + T::one()) / p;
    let mut best = T::zero();
    for &y in heights {
        best = best.max(line_norm(f, p, y, settings)? * y.powf(e));
    }
    Ok(best / norm)
}

/// `y = 2^u` for `u` evenly spaced in `[lo, hi]`.
pub fn dyadic_heights<T: Real>(lo: f64, hi: f64, n: usize) -> Vec<T> {
    let n = n.max(2);
    (0..n)
        .map(|i| T::lit((lo + (hi - lo) * i as f64 / (n - 1) as f64).exp2()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    type TF = TestFunction<f64>;

    fn ladder() -> TruncationLadder<f64> {
        TruncationLadder::halfplane_default()
    }

    #[test]
    fn kernel_examples() {
        let i = C::new(0.0, 1.0);
        let k = kernel(i, i, 0.0).unwrap();
        assert!((k - C::new(-1.0 / (4.0 * PI), 0.0)).norm() < 1e-15);
        let k = kernel(i, C::new(0.0, 2.0), 1.0).unwrap();
        assert!((k - C::new(0.0, -2.0 / (27.0 * PI))).norm() < 1e-15);
        assert!(kernel(C::new(0.0, -1.0), i, 0.0).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let z: C<f64> = C::new(rng.random_range(-5.0..5.0), rng.random_range(0.01..5.0));
            let w = C::new(rng.random_range(-5.0..5.0), rng.random_range(0.01..5.0));
            let b: f64 = rng.random_range(-0.9..4.0);
            let bound = (b + 1.0) / PI * (z.im + w.im).powf(-(2.0 + b));
            assert!(kernel(z, w, b).unwrap().norm() <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn reproduce_examples() {
        let f = TF::power_shift(2.0);
        let settings = QuadSettings::default();
        for z in [C::new(0.0, 1.0), C::new(0.5, 0.25)] {
            let r = reproduce(&f, z, 1.0, Some((2.0, 0.0)), &ladder(), &settings).unwrap();
            let exact = f.eval_plane(z).unwrap();
            assert!((r.value - exact).norm() <= 1e-3 * (1.0 + exact.norm()), "{z}: {} vs {exact}", r.value);
        }
        let zero = TF::zero(Domain::HalfPlane).unwrap();
        let r = reproduce(&zero, C::new(0.0, 1.0), 1.0, Some((2.0, 0.0)), &ladder(), &settings).unwrap();
        assert_eq!(r.value, C::new(0.0, 0.0));
        assert!(matches!(
            reproduce(&f, C::new(0.0, 1.0), -0.9, Some((2.0, 0.0)), &ladder(), &settings),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn norm_examples() {
        let settings = QuadSettings::default();
        let n = norm_p_alpha(&TF::power_shift(2.0), 2.0, 0.0, &ladder(), &settings).unwrap();
        assert!((n.value.unwrap() - PI.sqrt() / 2.0).abs() < 1e-3);
        let d = norm_p_alpha(&TF::pure_power(1.0), 2.0, 0.0, &ladder(), &settings).unwrap();
        assert_eq!(d.verdict, ConvergenceVerdict::Divergent);
        assert!(d.value.is_none());
        let z = norm_p_alpha(&TF::zero(Domain::HalfPlane).unwrap(), 2.0, 0.0, &ladder(), &settings).unwrap();
        assert_eq!(z.value, Some(0.0));
    }

    #[test]
    fn sup_norm_examples() {
        let g = PolarGrid::default();
        let s = norm_inf(&TF::pure_power(1.0), 1.0, &g).unwrap();
        assert!((s.value - 1.0).abs() < 1e-6 && !s.unbounded);
        assert!(s.rel_gap.unwrap().abs() < 1e-6);
        let c = norm_inf(&TF::constant(Domain::HalfPlane, 1.0).unwrap(), 1.0, &g).unwrap();
        assert!(c.unbounded);
        let p = norm_inf(&TF::power_shift(1.0), 1.0, &g).unwrap();
        assert!(p.value < 1.0 && p.value > 1.0 - 1e-5 && !p.unbounded);
        let small = norm_inf(&TF::power_shift(1.0), 1.0, &PolarGrid::coarse()).unwrap();
        assert!(small.value < p.value);
    }

    #[test]
    fn lemma3_scale_invariance() {
        let settings = QuadSettings::default();
        for w in [C::new(0.0, 1.0), C::new(0.0, 2.0), C::new(1.0, 1.0)] {
            let k = lemma3_ratio(w, 0.0, 4.0, &ladder(), &settings).unwrap();
            assert!((k.ratio - PI / 4.0).abs() < 1e-3, "{w}: {}", k.ratio);
        }
        let k = lemma3_ratio(C::new(0.0, 2.0), 0.0, 4.0, &ladder(), &settings).unwrap();
        assert!((k.integral - PI / 16.0).abs() < 1e-3);
        assert!(lemma3_ratio(C::new(0.0, 1.0), 0.0, 2.0, &ladder(), &settings).is_err());
    }

    #[test]
    fn inequality_constants() {
        let settings = QuadSettings::default();
        let f = TF::power_shift(2.0);
        let a = pointwise_ratio(&f, 2.0, 0.0, &PolarGrid::coarse(), &ladder(), &settings).unwrap();
        let b = pointwise_ratio(&f, 2.0, 0.0, &PolarGrid::default(), &ladder(), &settings).unwrap();
        assert!(a.is_finite() && (a / b - 1.0).abs() <= 0.05);
        let scaled = pointwise_ratio(&f.scaled(10.0), 2.0, 0.0, &PolarGrid::coarse(), &ladder(), &settings).unwrap();
        assert!((scaled / a - 1.0).abs() < 1e-6);
        let zero = TF::zero(Domain::HalfPlane).unwrap();
        assert_eq!(pointwise_ratio(&zero, 2.0, 0.0, &PolarGrid::coarse(), &ladder(), &settings).unwrap(), 0.0);

        // ∫ (x² + (1+y)²)^{-2} dx = π / (2 (1+y)³)
        for y in [0.1, 1.0, 7.0] {
            let l: f64 = line_norm(&f, 2.0, y, &settings).unwrap();
            assert!((l * l - PI / (2.0 * (1.0 + y).powi(3))).abs() < 1e-9);
        }
        let ys = dyadic_heights(-6.0, 6.0, 97);
        let r = line_norm_ratio(&f, 2.0, 0.0, &ys, &ladder(), &settings).unwrap();
        // sup_y √(π y / (2 (1+y)³)) / (√π/2), attained at y = 1/2
        let exact = (PI * 0.5 / (2.0 * 1.5f64.powi(3))).sqrt() / (PI.sqrt() / 2.0);
        assert!((r - exact).abs() < 1e-3);
        let r10 = line_norm_ratio(&f.scaled(10.0), 2.0, 0.0, &ys, &ladder(), &settings).unwrap();
        assert!((r10 / r - 1.0).abs() < 1e-6);
    }
}
