//! Geometric truncation ladders and the convergence/divergence classifier.
//!
//! An improper integral of a nonnegative integrand is evaluated on a nested
//! family of truncated regions `R_m`. The per-level values `Φ_m` are turned
//! into a verdict from the trend of the increments `d_m = Φ_{m+1} − Φ_m`:
//! geometric decay means a finite integral, non-decaying increments mean
//! divergence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::adaptive::{cubature, CubatureOptions, Rect};
use crate::quad::region::Sector;
use crate::scalar::{Real, C};

/// Which nested region family the ladder walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionFamily {
    /// `{b^{-m} ≤ |z| ≤ b^m, Im z ≥ b^{-m}|z|}` in ℂ₊.
    HalfPlaneSectors,
    /// `{δ(z) ≥ b^{-m}}` in the unit ball.
    BallShells,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationLadder<T> {
    pub base: T,
    pub min_exp: i32,
    pub max_exp: i32,
    pub family: RegionFamily,
}

impl<T: Real> TruncationLadder<T> {
    pub fn new(base: T, min_exp: i32, max_exp: i32, family: RegionFamily) -> Result<Self> {
        if !(base > T::one()) || !base.is_finite() {
            return Err(Error::HypothesisViolation(format!("ladder base must exceed 1, got {base}")));
        }
        if min_exp < 1 || max_exp < min_exp {
            return Err(Error::HypothesisViolation(format!(
                "ladder exponents need 1 <= min_exp <= max_exp, got {min_exp}..{max_exp}"
            )));
        }
        Ok(Self {
            base,
            min_exp,
            max_exp,
            family,
        })
    }

    /// Base 2, `m ∈ [1, 12]`.
    pub fn halfplane_default() -> Self {
        Self::new(T::lit(2.0), 1, 12, RegionFamily::HalfPlaneSectors).unwrap()
    }

    /// Base 2, `m ∈ [1, 14]`.
    pub fn ball_default() -> Self {
        Self::new(T::lit(2.0), 1, 14, RegionFamily::BallShells).unwrap()
    }

    pub fn with_max_exp(mut self, max_exp: i32) -> Self {
        self.max_exp = max_exp.max(self.min_exp);
        self
    }

    pub fn levels(&self) -> Vec<i32> {
        (self.min_exp..=self.max_exp).collect()
    }

    pub fn len(&self) -> usize {
        (self.max_exp - self.min_exp + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn log_base(&self) -> T {
        self.base.ln()
    }

    /// Half-plane region `R_m`.
    pub fn sector(&self, m: i32) -> Sector<T> {
        let s = self.base.powi(-m);
        Sector {
            r_lo: s,
            r_hi: self.base.powi(m),
            sin_floor: s,
        }
    }

    /// Ball region `R_m` is `{δ ≥ threshold}`.
    pub fn delta_threshold(&self, m: i32) -> T {
        self.base.powi(-m)
    }

    /// Index of the innermost level whose region contains a half-plane point.
    pub fn halfplane_level_of(&self, z: C<T>) -> Option<usize> {
        (self.min_exp..=self.max_exp)
            .position(|m| self.sector(m).contains(z))
    }

    /// Index of the innermost ball level with `δ ≥ b^{-m}`.
    pub fn ball_level_of(&self, delta: T) -> Option<usize> {
        (self.min_exp..=self.max_exp).position(|m| delta >= self.delta_threshold(m))
    }

    /// Parameter-space cells of the outermost region, aligned with every
    /// level boundary. Half-plane coordinates are `(ln r, θ)`; ball coordinates
    /// are `(−ln δ, θ)` for the one-dimensional ball.
    pub fn param_cells(&self, theta_cells: usize) -> Vec<Rect<T>> {
        let l = self.log_base();
        let m_hi = self.max_exp;
        match self.family {
            RegionFamily::HalfPlaneSectors => {
                let u_breaks: Vec<T> = (-m_hi..=m_hi).map(|k| l * T::lit(k as f64)).collect();
                let mut th_breaks: Vec<T> = (self.min_exp..=m_hi)
                    .rev()
                    .map(|m| self.base.powi(-m).asin())
                    .collect();
                th_breaks.push(T::FRAC_PI_2());
                let mirrored: Vec<T> = th_breaks.iter().rev().skip(1).map(|&a| T::PI() - a).collect();
                th_breaks.extend(mirrored);
                let mut out = Vec::new();
                for uw in u_breaks.windows(2) {
                    for tw in th_breaks.windows(2) {
                        out.push(Rect::new(uw[0], uw[1], tw[0], tw[1]));
                    }
                }
                out
            }
            RegionFamily::BallShells => {
                let mut out = Vec::new();
                let th = Rect::new(T::zero(), T::one(), -T::PI(), T::PI()).grid(1, theta_cells.max(2));
                for k in 0..m_hi {
                    let v0 = l * T::lit(k as f64);
                    let v1 = l * T::lit((k + 1) as f64);
                    for r in &th {
                        out.push(Rect::new(v0, v1, r.lo[1], r.hi[1]));
                    }
                }
                out
            }
        }
    }

    /// Map a parameter point to the domain point it represents.
    pub fn map_param(&self, p: [T; 2]) -> LadderPoint<T> {
        match self.family {
            RegionFamily::HalfPlaneSectors => {
                let r = p[0].exp();
                let z = C::from_polar(r, p[1]);
                LadderPoint {
                    z,
                    weight_base: z.im,
                    jac: r * r,
                    level: self.halfplane_level_of(z).unwrap_or(self.len()),
                }
            }
            RegionFamily::BallShells => {
                let delta = (-p[0]).exp();
                let rho = (-(-p[0]).exp_m1()).sqrt();
                LadderPoint {
                    z: C::from_polar(rho, p[1]),
                    weight_base: delta,
                    jac: delta * T::lit(0.5),
                    level: self.ball_level_of(delta).unwrap_or(self.len()),
                }
            }
        }
    }
}

/// Quadrature node of a ladder integral.
#[derive(Debug, Clone, Copy)]
pub struct LadderPoint<T> {
    /// Point of ℂ₊, or of the unit disk.
    pub z: C<T>,
    /// `Im z` on ℂ₊, `δ(z) = 1 − |z|²` on the ball (computed without cancellation).
    pub weight_base: T,
    /// Area element of the parameterisation.
    pub jac: T,
    /// First level index whose region contains the point.
    pub level: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceVerdict {
    Convergent,
    Divergent,
    Inconclusive,
}

impl std::fmt::Display for ConvergenceVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Convergent => "convergent",
            Self::Divergent => "divergent",
            Self::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions<T> {
    /// Ratio ceiling for convergence.
    pub rho: T,
    /// Ratio floor for divergence.
    pub diverge: T,
    /// Geometric tail bound relative to the last value.
    pub tol_tail: T,
    pub min_levels: usize,
}

impl<T: Real> Default for ClassifyOptions<T> {
    fn default() -> Self {
        Self {
            rho: T::lit(0.75),
            diverge: T::lit(0.9),
            tol_tail: T::lit(0.1),
            min_levels: 5,
        }
    }
}

/// Successive nonnegative increments.
pub fn increments<T: Real>(values: &[T]) -> Vec<T> {
    values.windows(2).map(|w| (w[1] - w[0]).max(T::zero())).collect()
}

/// `d_{m+1} / d_m` with `0/0 = 0` and `x/0 = ∞`.
pub fn ratios<T: Real>(incs: &[T]) -> Vec<T> {
    incs.windows(2)
        .map(|w| {
            if w[0] > T::zero() {
                w[1] / w[0]
            } else if w[1] == T::zero() {
                T::zero()
            } else {
                T::infinity()
            }
        })
        .collect()
}

/// Classify a ladder from its level values. Returns the verdict and, when
/// convergent, the geometric tail bound `d_M ρ / (1 − ρ)`.
pub fn classify<T: Real>(values: &[T], opts: &ClassifyOptions<T>) -> Result<(ConvergenceVerdict, Option<T>)> {
    let need = opts.min_levels.max(5);
    if values.len() < need {
        return Err(Error::InsufficientLevels {
            have: values.len(),
            need,
        });
    }
    let incs = increments(values);
    let rs = ratios(&incs);
    let last = &rs[rs.len() - 3..];
    let d_last = *incs.last().unwrap();
    let phi_last = values.last().unwrap().abs();
    let tail = d_last * opts.rho / (T::one() - opts.rho);
    if last.iter().all(|&r| r <= opts.rho) && tail <= opts.tol_tail * phi_last {
        return Ok((ConvergenceVerdict::Convergent, Some(tail)));
    }
    if last.iter().all(|&r| r >= opts.diverge) {
        return Ok((ConvergenceVerdict::Divergent, None));
    }
    Ok((ConvergenceVerdict::Inconclusive, None))
}

/// Per-level values of a ladder integral with the verdict attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderReport<T> {
    pub levels: Vec<i32>,
    pub values: Vec<T>,
    pub errors: Vec<T>,
    pub reliable: Vec<bool>,
    pub verdict: ConvergenceVerdict,
    pub tail_estimate: Option<T>,
}

/// One CSV row of a ladder report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderRow<T> {
    pub m: i32,
    pub value: T,
    pub increment: Option<T>,
    pub ratio: Option<T>,
    pub reliable: bool,
}

impl<T: Real> LadderReport<T> {
    /// Build a report; unreliable levels are excluded from the verdict.
    pub fn from_levels(
        levels: Vec<i32>,
        values: Vec<T>,
        errors: Vec<T>,
        reliable: Vec<bool>,
        opts: &ClassifyOptions<T>,
    ) -> Self {
        let kept: Vec<T> = values
            .iter()
            .zip(&reliable)
            .filter(|(_, &ok)| ok)
            .map(|(&v, _)| v)
            .collect();
        let (verdict, tail_estimate) = classify(&kept, opts).unwrap_or((ConvergenceVerdict::Inconclusive, None));
        Self {
            levels,
            values,
            errors,
            reliable,
            verdict,
            tail_estimate,
        }
    }

    /// A report whose every level is exactly zero.
    pub fn zeros(levels: Vec<i32>, opts: &ClassifyOptions<T>) -> Self {
        let n = levels.len();
        Self::from_levels(levels, vec![T::zero(); n], vec![T::zero(); n], vec![true; n], opts)
    }

    pub fn last_value(&self) -> T {
        *self.values.last().unwrap()
    }

    pub fn increments(&self) -> Vec<T> {
        increments(&self.values)
    }

    /// Rows with `increment = value_m − value_{m−1}` and `ratio` of successive increments.
    pub fn rows(&self) -> Vec<LadderRow<T>> {
        let incs = increments(&self.values);
        let rs = ratios(&incs);
        (0..self.values.len())
            .map(|i| LadderRow {
                m: self.levels[i],
                value: self.values[i],
                increment: i.checked_sub(1).map(|j| incs[j]),
                ratio: i.checked_sub(2).map(|j| rs[j]),
                reliable: self.reliable[i],
            })
            .collect()
    }

    /// Least-squares fit of `value` against `m` over the last `k` levels; returns
    /// `(slope, r²)`.
    pub fn linear_fit_tail(&self, k: usize) -> (T, T) {
        let n = self.values.len();
        let k = k.min(n);
        let xs: Vec<T> = self.levels[n - k..].iter().map(|&m| T::lit(m as f64)).collect();
        let ys = &self.values[n - k..];
        linear_fit(&xs, ys)
    }
}

/// Ordinary least squares `y ≈ a + b x`; returns `(b, r²)`.
pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> (T, T) {
    let n = T::from_usize_lossy(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let sxy: T = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let syy: T = ys.iter().map(|&y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > T::zero() {
        sxy * sxy / (sxx * syy)
    } else {
        T::zero()
    };
    (slope, r2)
}

/// Settings shared by every ladder integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSettings<T> {
    pub tol: T,
    pub max_cells: usize,
    pub classify: ClassifyOptions<T>,
    /// Angular cells per shell on the disk.
    pub theta_cells: usize,
}

impl<T: Real> Default for QuadSettings<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-6),
            max_cells: 200_000,
            classify: ClassifyOptions::default(),
            theta_cells: 16,
        }
    }
}

impl<T: Real> QuadSettings<T> {
    pub fn cubature_options(&self) -> CubatureOptions<T> {
        CubatureOptions::new(self.tol, self.max_cells)
    }
}

/// Per-level, per-component integrals on one shared partition.
#[derive(Debug, Clone)]
pub struct LevelIntegrals<T> {
    /// `values[level][component]`
    pub values: Vec<Vec<T>>,
    pub errors: Vec<Vec<T>>,
    pub converged: bool,
}

impl<T: Real> LevelIntegrals<T> {
    /// Per-level reliability of one component.
    pub fn reliable(&self, component: usize, tol: T) -> Vec<bool> {
        self.values
            .iter()
            .zip(&self.errors)
            .map(|(v, e)| self.converged || e[component] <= tol * v[component].abs())
            .collect()
    }

    pub fn component(&self, c: usize) -> (Vec<T>, Vec<T>) {
        (
            self.values.iter().map(|v| v[c]).collect(),
            self.errors.iter().map(|e| e[c]).collect(),
        )
    }
}

/// Integrate a `width`-component integrand for every ladder level at once.
///
/// `fill(point, out)` receives a zeroed buffer laid out as
/// `out[level * width + component]` and must write the integrand (including
/// `point.jac`) for every level `≥ point.level`. `reference` (empty or of length
/// `width`) names, per component, a component of the same level whose magnitude
/// also sets the error target.
pub fn ladder_cubature<T, F>(
    ladder: &TruncationLadder<T>,
    width: usize,
    reference: &[usize],
    settings: &QuadSettings<T>,
    fill: F,
) -> LevelIntegrals<T>
where
    T: Real,
    F: Fn(&LadderPoint<T>, &mut [T]) + Sync,
{
    let nl = ladder.len();
    let cells = ladder.param_cells(settings.theta_cells);
    let mut opts = settings.cubature_options();
    if !reference.is_empty() {
        opts.reference = (0..nl)
            .flat_map(|l| reference.iter().map(move |&r| l * width + r))
            .collect();
    }
    let out = cubature(
        &cells,
        width * nl,
        |p| {
            let pt = ladder.map_param(p);
            let mut buf = vec![T::zero(); width * nl];
            if pt.level < nl {
                fill(&pt, &mut buf);
            }
            buf
        },
        &opts,
    );
    let split = |v: &[T]| v.chunks(width).map(|c| c.to_vec()).collect::<Vec<_>>();
    LevelIntegrals {
        values: split(&out.values),
        errors: split(&out.errors),
        converged: out.converged,
    }
}

/// Ladder integral of a nonnegative scalar integrand.
pub fn ladder_integrate<T, F>(ladder: &TruncationLadder<T>, integrand: F, settings: &QuadSettings<T>) -> LadderReport<T>
where
    T: Real,
    F: Fn(&LadderPoint<T>) -> T + Sync,
{
    let res = ladder_cubature(ladder, 1, &[], settings, |pt, out| {
        let g = integrand(pt) * pt.jac;
        for v in out.iter_mut().skip(pt.level) {
            *v = g;
        }
    });
    let (values, errors) = res.component(0);
    let reliable = res.reliable(0, settings.tol);
    LadderReport::from_levels(ladder.levels(), values, errors, reliable, &settings.classify)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn opts() -> ClassifyOptions<f64> {
        ClassifyOptions::default()
    }

    #[test]
    fn classify_examples() {
        let geo = [1.0, 1.5, 1.75, 1.875, 1.9375];
        assert_eq!(classify(&geo, &opts()).unwrap().0, ConvergenceVerdict::Convergent);
        let lin = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(classify(&lin, &opts()).unwrap().0, ConvergenceVerdict::Divergent);
        // increments 1, 0.8, 0.64, 0.512: ratios 0.8
        let mid = [0.0, 1.0, 1.8, 2.44, 2.952];
        assert_eq!(classify(&mid, &opts()).unwrap().0, ConvergenceVerdict::Inconclusive);
        assert!(matches!(
            classify(&[1.0, 2.0, 3.0], &opts()),
            Err(Error::InsufficientLevels { have: 3, need: 5 })
        ));
        assert_eq!(classify(&[0.0; 6], &opts()).unwrap().0, ConvergenceVerdict::Convergent);
    }

    #[test]
    fn halfplane_cells_cover_the_top_region() {
        let ladder = TruncationLadder::<f64>::new(2.0, 1, 4, RegionFamily::HalfPlaneSectors).unwrap();
        let area: f64 = ladder
            .param_cells(16)
            .iter()
            .map(|r| {
                // ∫ r² du dθ = (e^{2u1} − e^{2u0})/2 · Δθ
                ((2.0 * r.hi[0]).exp() - (2.0 * r.lo[0]).exp()) / 2.0 * (r.hi[1] - r.lo[1])
            })
            .sum();
        let s = ladder.sector(4);
        let th = s.sin_floor.asin();
        let exact = (s.r_hi.powi(2) - s.r_lo.powi(2)) / 2.0 * (PI - 2.0 * th);
        assert!((area - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn ladder_examples_halfplane() {
        let ladder = TruncationLadder::<f64>::halfplane_default();
        let settings = QuadSettings::default();
        let conv = ladder_integrate(
            &ladder,
            |p| (p.z.re * p.z.re + (1.0 + p.z.im).powi(2)).powi(-2),
            &settings,
        );
        assert_eq!(conv.verdict, ConvergenceVerdict::Convergent);
        assert!((conv.last_value() - PI / 4.0).abs() < 1e-3);
        assert!(conv.tail_estimate.unwrap() <= settings.classify.tol_tail * conv.last_value());
        for w in conv.values.windows(2) {
            assert!(w[1] >= w[0]);
        }

        let div = ladder_integrate(&ladder, |p| 1.0 / p.z.norm_sqr(), &settings);
        assert_eq!(div.verdict, ConvergenceVerdict::Divergent);
        let (_, r2) = div.linear_fit_tail(5);
        assert!(r2 > 0.999);

        let zero = ladder_integrate(&ladder, |_| 0.0, &settings);
        assert_eq!(zero.verdict, ConvergenceVerdict::Convergent);
        assert!(zero.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ladder_ball_shells() {
        let ladder = TruncationLadder::<f64>::ball_default();
        let settings = QuadSettings::default();
        let r = ladder_integrate(&ladder, |p| p.weight_base.powi(3), &settings);
        assert_eq!(r.verdict, ConvergenceVerdict::Convergent);
        assert!((r.last_value() - PI / 4.0).abs() < 1e-6);
        let d = ladder_integrate(&ladder, |p| 1.0 / p.weight_base, &settings);
        assert_eq!(d.verdict, ConvergenceVerdict::Divergent);
    }

    #[test]
    fn report_rows() {
        let r = LadderReport::from_levels(
            vec![1, 2, 3, 4, 5],
            vec![1.0, 2.0, 4.0, 5.0, 5.5],
            vec![0.0; 5],
            vec![true; 5],
            &opts(),
        );
        let rows = r.rows();
        assert_eq!(rows.len(), 5);
        assert_eq!((rows[0].increment, rows[0].ratio), (None, None));
        assert_eq!((rows[1].increment, rows[1].ratio), (Some(1.0), None));
        assert_eq!((rows[2].increment, rows[2].ratio), (Some(2.0), Some(2.0)));
        assert_eq!((rows[4].increment, rows[4].ratio), (Some(0.5), Some(0.5)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn geometric_sequences_converge(first in 1e-6f64..1e6, ratio in 0.0f64..=0.75, n in 5usize..12) {
                // tail after n levels must also be within 10%: start far enough in
                let mut vals = vec![first * 1e3];
                let mut d = first;
                for _ in 1..n {
                    let next = vals.last().unwrap() + d;
                    vals.push(next);
                    d *= ratio;
                }
                let (v, _) = classify(&vals, &ClassifyOptions::default()).unwrap();
                prop_assert_eq!(v, ConvergenceVerdict::Convergent);
            }

            #[test]
            fn arithmetic_sequences_diverge(start in -1e3f64..1e3, step in 1e-3f64..1e3, n in 5usize..20) {
                let vals: Vec<f64> = (0..n).map(|i| start + step * i as f64).collect();
                let (v, _) = classify(&vals, &ClassifyOptions::default()).unwrap();
                prop_assert_eq!(v, ConvergenceVerdict::Divergent);
            }
        }
    }
}
