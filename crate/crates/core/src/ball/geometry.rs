//! Defining function, Henkin–Ramirez function and weighted Bergman kernel of
//! the unit ball, with the reproducing formula and two kernel-integral ratios.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::ball::sampling::{ball_ladder, ball_ladder_cubature, BallQuad};
use crate::catalog::{BallPoint, Domain, TestFunction};
use crate::error::{Error, Result};
use crate::quad::adaptive::integrate_1d;
use crate::quad::ladder::{ConvergenceVerdict, LadderReport, TruncationLadder};
use crate::scalar::{cpow, Real, C};

/// The unit ball of ℂⁿ, `n ∈ {1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallDomain {
    pub n: usize,
}

/// `1 − ⟨z, ξ⟩`.
#[inline]
pub fn hr_unchecked<T: Real>(z: &BallPoint<T>, xi: &BallPoint<T>) -> C<T> {
    C::new(T::one(), T::zero()) - z[0] * xi[0].conj() - z[1] * xi[1].conj()
}

/// `δ(z) = 1 − |z|²`.
#[inline]
pub fn delta_unchecked<T: Real>(z: &BallPoint<T>) -> T {
    T::one() - z[0].norm_sqr() - z[1].norm_sqr()
}

fn weighted_volume_f64(n: usize, t: f64) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&(n, t.to_bits())) {
        return *v;
    }
    // ∫_B δ^t dV = (|S^{2n−1}|/2) ∫₀¹ (1−u)^t u^{n−1} du; with w = (1−u)^{t+1}
    // the radial integral is (1/(t+1)) ∫₀¹ (1 − w^{1/(t+1)})^{n−1} dw.
    let e = 1.0 / (t + 1.0);
    let (radial, _) = integrate_1d(|w: f64| (1.0 - w.powf(e)).powi(n as i32 - 1), 0.0, 1.0, 1e-14, 1e-16, 4096)
        .expect("radial normalisation integral");
    let sphere = 2.0 * std::f64::consts::PI.powi(n as i32) / (1..n).product::<usize>() as f64;
    let v = 0.5 * sphere * radial * e;
    cache.lock().unwrap().insert((n, t.to_bits()), v);
    v
}

impl BallDomain {
    pub fn new(n: usize) -> Result<Self> {
        if n == 1 || n == 2 {
            Ok(Self { n })
        } else {
            Err(Error::UnsupportedDimension(n))
        }
    }

    pub fn of(f: &TestFunction<impl Real>) -> Result<Self> {
        match f.domain {
            Domain::Ball { n } => Self::new(n),
            Domain::HalfPlane => Err(Error::OutOfDomain("expected a ball function".into())),
        }
    }

    pub fn contains<T: Real>(&self, z: &BallPoint<T>) -> bool {
        let r2 = z[0].norm_sqr() + z[1].norm_sqr();
        r2 < T::one() && (self.n == 2 || z[1] == C::new(T::zero(), T::zero()))
    }

    pub fn check<T: Real>(&self, z: &BallPoint<T>, name: &str) -> Result<()> {
        if self.contains(z) {
            Ok(())
        } else {
            Err(Error::OutOfDomain(format!(
                "{name} = ({}, {}) is not in the open ball of dimension {}",
                z[0], z[1], self.n
            )))
        }
    }

    pub fn delta<T: Real>(&self, z: &BallPoint<T>) -> Result<T> {
        self.check(z, "z")?;
        Ok(delta_unchecked(z))
    }

    pub fn hr<T: Real>(&self, z: &BallPoint<T>, xi: &BallPoint<T>) -> Result<C<T>> {
        self.check(z, "z")?;
        self.check(xi, "xi")?;
        Ok(hr_unchecked(z, xi))
    }

    /// `∫_B δ^t dV`, computed by quadrature and cached per `(n, t)`.
    pub fn weighted_volume<T: Real>(&self, t: T) -> Result<T> {
        if !(t > -T::one()) || !t.is_finite() {
            return Err(Error::HypothesisViolation(format!("t > -1 required, got {t}")));
        }
        Ok(T::lit(weighted_volume_f64(self.n, t.to_f64_lossy())))
    }

    /// `c_{n,t}` with `∫_B K_t(0, ξ) δ^t(ξ) dV(ξ) = 1`.
    pub fn kernel_const<T: Real>(&self, t: T) -> Result<T> {
        Ok(T::one() / self.weighted_volume(t)?)
    }

    /// `c (1 − ⟨z, ξ⟩)^{−(n+1+t)}` for a precomputed constant.
    #[inline]
    pub fn kernel_with<T: Real>(&self, c: T, z: &BallPoint<T>, xi: &BallPoint<T>, t: T) -> C<T> {
        cpow(hr_unchecked(z, xi), -(T::from_usize_lossy(self.n + 1) + t)) * c
    }

    pub fn kernel<T: Real>(&self, z: &BallPoint<T>, xi: &BallPoint<T>, t: T) -> Result<C<T>> {
        self.check(z, "z")?;
        self.check(xi, "xi")?;
        let c = self.kernel_const(t)?;
        Ok(self.kernel_with(c, z, xi, t))
    }

    /// The `e₁` point `(x, 0)`.
    pub fn radial<T: Real>(x: T) -> BallPoint<T> {
        [C::new(x, T::zero()), C::new(T::zero(), T::zero())]
    }
}

/// `(z, 0)` for a point of the disk.
pub fn disk_point<T: Real>(z: C<T>) -> BallPoint<T> {
    [z, C::new(T::zero(), T::zero())]
}

/// Ladder value of `∫_B f(ξ) K_t(z, ξ) δ^t(ξ) dV(ξ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallReproduction<T> {
    pub value: C<T>,
    pub report: LadderReport<T>,
}

/// Reproducing integral of an arbitrary integrand `g` against `K_t(z, ·) δ^t`.
pub fn reproduce_ball_integral<T, G>(
    dom: BallDomain,
    g: G,
    z: &BallPoint<T>,
    t: T,
    ladder: &TruncationLadder<T>,
    bq: &BallQuad<T>,
) -> Result<BallReproduction<T>>
where
    T: Real,
    G: Fn(&BallPoint<T>) -> C<T> + Sync,
{
    dom.check(z, "z")?;
    ball_ladder(ladder)?;
    let c = dom.kernel_const(t)?;
    let nl = ladder.len();
    let res = ball_ladder_cubature(dom.n, ladder, 3, &[2, 2, 2], bq, |node, out| {
        let v = g(&node.z) * dom.kernel_with(c, z, &node.z, t) * (node.delta.powf(t) * node.jac);
        let a = v.norm();
        for l in node.level..nl {
            out[3 * l] = v.re;
            out[3 * l + 1] = v.im;
            out[3 * l + 2] = a;
        }
    })?;
    let (re, _) = res.component(0);
    let (im, _) = res.component(1);
    let (abs, abs_err) = res.component(2);
    let reliable = res.reliable(2, bq.quad.tol);
    let report = LadderReport::from_levels(ladder.levels(), abs, abs_err, reliable, &bq.quad.classify);
    if report.verdict != ConvergenceVerdict::Convergent {
        return Err(Error::NotReproducible(format!(
            "ball reproducing integral is {} on the ladder",
            report.verdict
        )));
    }
    Ok(BallReproduction {
        value: C::new(*re.last().unwrap(), *im.last().unwrap()),
        report,
    })
}

pub fn reproduce_ball<T: Real>(
    f: &TestFunction<T>,
    z: &BallPoint<T>,
    t: T,
    ladder: &TruncationLadder<T>,
    bq: &BallQuad<T>,
) -> Result<BallReproduction<T>> {
    let dom = BallDomain::of(f)?;
    dom.check(z, "z")?;
    if !(t > -T::one()) {
        return Err(Error::HypothesisViolation(format!("t > -1 required, got {t}")));
    }
    if f.is_zero() {
        return Ok(BallReproduction {
            value: C::new(T::zero(), T::zero()),
            report: LadderReport::zeros(ladder.levels(), &bq.quad.classify),
        });
    }
    reproduce_ball_integral(dom, |xi| f.eval_ball_unchecked(xi), z, t, ladder, bq)
}

/// Empirical constant of the `L^p`-type kernel inequality for `p ≤ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Be1Ratio<T> {
    pub ratio: T,
    /// `(∫ |f| |Φ̃|^r δ^s dV)^p`
    pub lhs: T,
    /// `∫ |f|^p |Φ̃|^{rp} δ^{p(s+n+1)−(n+1)} dV`
    pub rhs: T,
    /// Both sides vanish; the ratio is reported as 0.
    pub degenerate: bool,
    pub lhs_report: LadderReport<T>,
    pub rhs_report: LadderReport<T>,
}

#[allow(clippy::too_many_arguments)]
pub fn be1_ratio<T: Real>(
    f: &TestFunction<T>,
    r: T,
    s: T,
    p: T,
    z: &BallPoint<T>,
    ladder: &TruncationLadder<T>,
    bq: &BallQuad<T>,
) -> Result<Be1Ratio<T>> {
    let dom = BallDomain::of(f)?;
    dom.check(z, "z")?;
    let nn = T::from_usize_lossy(dom.n);
    let n1 = nn + T::one();
    if !(r > T::zero()) || !(p > T::zero() && p <= T::one()) || !(s > -T::one()) || !(p * (s + n1) > nn) {
        return Err(Error::HypothesisViolation(format!(
            "need r > 0, 0 < p <= 1, s > -1, p(s+n+1) > n; got r = {r}, p = {p}, s = {s}, n = {}",
            dom.n
        )));
    }
    let nl = ladder.len();
    let rhs_exp = p * (s + n1) - n1;
    let res = ball_ladder_cubature(dom.n, ladder, 2, &[], bq, |node, out| {
        let fv = f.eval_ball_unchecked(&node.z).norm();
        let h = hr_unchecked(z, &node.z).norm();
        let a = fv * h.powf(r) * node.delta.powf(s) * node.jac;
        let b = fv.powf(p) * h.powf(r * p) * node.delta.powf(rhs_exp) * node.jac;
        for l in node.level..nl {
            out[2 * l] = a;
            out[2 * l + 1] = b;
        }
    })?;
    let report = |c: usize| {
        let (v, e) = res.component(c);
        LadderReport::from_levels(ladder.levels(), v, e, res.reliable(c, bq.quad.tol), &bq.quad.classify)
    };
    let lhs_report = report(0);
    let rhs_report = report(1);
    for rep in [&lhs_report, &rhs_report] {
        if rep.verdict != ConvergenceVerdict::Convergent {
            return Err(Error::NotConvergent(format!("kernel integral is {}", rep.verdict)));
        }
    }
    let lhs = lhs_report.last_value().powf(p);
    let rhs = rhs_report.last_value();
    let degenerate = rhs == T::zero();
    Ok(Be1Ratio {
        ratio: if degenerate { T::zero() } else { lhs / rhs },
        lhs,
        rhs,
        degenerate,
        lhs_report,
        rhs_report,
    })
}

/// `∫ |Φ̃(z, ξ)|^{−β} δ^{σ−1}(z) dV(z) / δ^{σ+n−β}(ξ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Be2Ratio<T> {
    pub ratio: T,
    pub integral: T,
    pub report: LadderReport<T>,
}

pub fn be2_ratio<T: Real>(
    dom: BallDomain,
    xi: &BallPoint<T>,
    beta: T,
    sigma: T,
    ladder: &TruncationLadder<T>,
    bq: &BallQuad<T>,
) -> Result<Be2Ratio<T>> {
    dom.check(xi, "xi")?;
    let nn = T::from_usize_lossy(dom.n);
    if !(sigma > T::zero()) || !(sigma + nn - beta < T::zero()) {
        return Err(Error::HypothesisViolation(format!(
            "need sigma > 0 and sigma + n - beta < 0, got sigma = {sigma}, beta = {beta}, n = {}",
            dom.n
        )));
    }
    let nl = ladder.len();
    let half = -beta * T::lit(0.5);
    let res = ball_ladder_cubature(dom.n, ladder, 1, &[], bq, |node, out| {
        let g = hr_unchecked(&node.z, xi).norm_sqr().powf(half) * node.delta.powf(sigma - T::one()) * node.jac;
        for v in out.iter_mut().take(nl).skip(node.level) {
            *v = g;
        }
    })?;
    let (v, e) = res.component(0);
    let report = LadderReport::from_levels(ladder.levels(), v, e, res.reliable(0, bq.quad.tol), &bq.quad.classify);
    let integral = report.last_value();
    let d = delta_unchecked(xi);
    Ok(Be2Ratio {
        ratio: integral / d.powf(sigma + nn - beta),
        integral,
        report,
    })
}
