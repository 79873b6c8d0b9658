//! Dyadic Whitney decomposition of the upper half-plane.
//!
//! `Δ_{j,k} = [j·2^k, (j+1)·2^k) × [2^k, 2^{k+1})`. Squares of one level tile a
//! horizontal strip and the strips tile ℂ₊. The enlargement `Δ*` is the
//! `λ`-dilation about the center, clamped to `y ≥ 2^{k−1}`.

use serde::{Deserialize, Serialize};

use crate::catalog::TestFunction;
use crate::error::{Error, Result};
use crate::quad::region::{integrate, Region, Sector};
use crate::scalar::{Real, C};

pub const DEFAULT_LAMBDA: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WhitneySquare {
    /// Horizontal index.
    pub j: i64,
    /// Dyadic level.
    pub k: i32,
}

/// Closed axis-aligned box `[x0, x1] × [y0, y1]` in ℂ₊.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneBox<T> {
    pub x0: T,
    pub x1: T,
    pub y0: T,
    pub y1: T,
}

impl<T: Real> PlaneBox<T> {
    pub fn area(&self) -> T {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn contains_closed(&self, z: C<T>) -> bool {
        z.re >= self.x0 && z.re <= self.x1 && z.im >= self.y0 && z.im <= self.y1
    }

    pub fn region(&self) -> Region<T> {
        Region::Rect {
            x0: self.x0,
            x1: self.x1,
            y0: self.y0,
            y1: self.y1,
        }
    }
}

fn pow2<T: Real>(k: i32) -> T {
    T::lit(2.0).powi(k)
}

impl WhitneySquare {
    pub fn new(j: i64, k: i32) -> Self {
        Self { j, k }
    }

    pub fn side<T: Real>(&self) -> T {
        pow2(self.k)
    }

    /// Closure of the half-open extent.
    pub fn extent<T: Real>(&self) -> PlaneBox<T> {
        let s: T = self.side();
        let x0 = T::lit(self.j as f64) * s;
        PlaneBox {
            x0,
            x1: x0 + s,
            y0: s,
            y1: s + s,
        }
    }

    /// `((j + ½) 2^k, (3/2) 2^k)`
    pub fn center<T: Real>(&self) -> C<T> {
        let s: T = self.side();
        C::new((T::lit(self.j as f64) + T::lit(0.5)) * s, T::lit(1.5) * s)
    }

    /// `m₂(Δ) = 4^k`
    pub fn area<T: Real>(&self) -> T {
        pow2(2 * self.k)
    }

    /// Membership in the half-open extent.
    pub fn contains<T: Real>(&self, z: C<T>) -> bool {
        let e = self.extent::<T>();
        z.re >= e.x0 && z.re < e.x1 && z.im >= e.y0 && z.im < e.y1
    }

    /// `Δ*`: the `λ`-dilation about the center, intersected with `y ≥ 2^{k−1}`.
    pub fn enlarged<T: Real>(&self, lambda: T) -> PlaneBox<T> {
        let s: T = self.side();
        let c = self.center::<T>();
        let h = lambda * s * T::lit(0.5);
        PlaneBox {
            x0: c.re - h,
            x1: c.re + h,
            y0: (c.im - h).max(s * T::lit(0.5)),
            y1: c.im + h,
        }
    }
}

fn check_lambda<T: Real>(lambda: T) -> Result<()> {
    if lambda > T::one() && lambda < T::lit(2.0) {
        Ok(())
    } else {
        Err(Error::HypothesisViolation(format!(
            "enlargement factor must lie in (1, 2), got {lambda}"
        )))
    }
}

/// `floor(log2 y)` for `y > 0`, exact at powers of two.
fn level_of<T: Real>(y: T) -> i32 {
    let mut k = y.log2().floor().to_i32().unwrap_or(0);
    while pow2::<T>(k) > y {
        k -= 1;
    }
    while pow2::<T>(k + 1) <= y {
        k += 1;
    }
    k
}

/// The unique square whose half-open extent contains `z`.
pub fn square_of<T: Real>(z: C<T>) -> Result<WhitneySquare> {
    if !(z.im > T::zero()) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::OutOfDomain(format!("Im z > 0 required, got {z}")));
    }
    let k = level_of(z.im);
    let j = (z.re / pow2::<T>(k)).floor();
    let j = j
        .to_i64()
        .ok_or_else(|| Error::OutOfDomain(format!("{z} is outside the indexable range")))?;
    Ok(WhitneySquare { j, k })
}

/// Regions whose Whitney covers can be enumerated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlaneRegion<T> {
    /// Half-open rectangle `[x0, x1) × [y0, y1)` with `y0 > 0`.
    Rect { x0: T, x1: T, y0: T, y1: T },
    /// A ladder region.
    Sector(Sector<T>),
    Empty,
}

impl<T: Real> PlaneRegion<T> {
    fn meets(&self, sq: &WhitneySquare) -> bool {
        let e = sq.extent::<T>();
        match *self {
            PlaneRegion::Rect { x0, x1, y0, y1 } => x0 < e.x1 && e.x0 < x1 && y0 < e.y1 && e.y0 < y1,
            PlaneRegion::Sector(s) => s.meets_rect(e.x0, e.x1, e.y0, e.y1),
            PlaneRegion::Empty => false,
        }
    }

    /// `(y_min, y_max, x_abs_bound)` or `None` when empty.
    fn bounds(&self) -> Option<(T, T, T, T)> {
        match *self {
            PlaneRegion::Rect { x0, x1, y0, y1 } => {
                if x0 < x1 && y0 < y1 && y1 > T::zero() {
                    Some((x0, x1, y0.max(T::min_positive_value()), y1))
                } else {
                    None
                }
            }
            PlaneRegion::Sector(s) => {
                if s.r_lo > s.r_hi || s.sin_floor > T::one() {
                    return None;
                }
                let ymin = (s.r_lo * s.sin_floor).max(T::min_positive_value());
                Some((-s.r_hi, s.r_hi, ymin, s.r_hi))
            }
            PlaneRegion::Empty => None,
        }
    }

    pub fn contains(&self, z: C<T>) -> bool {
        match *self {
            PlaneRegion::Rect { x0, x1, y0, y1 } => z.re >= x0 && z.re < x1 && z.im >= y0 && z.im < y1,
            PlaneRegion::Sector(s) => s.contains(z),
            PlaneRegion::Empty => false,
        }
    }
}

/// Every square whose extent meets the region, ordered by `(k, j)`.
///
/// Squares are tested as closed sets against closed regions, so a square that
/// only touches a sector along its open top or right edge is included.
pub fn squares_meeting<T: Real>(region: &PlaneRegion<T>) -> Vec<WhitneySquare> {
    let Some((xa, xb, ymin, ymax)) = region.bounds() else {
        return Vec::new();
    };
    let k_lo = level_of(ymin);
    let k_hi = level_of(ymax);
    let mut out = Vec::new();
    for k in k_lo..=k_hi {
        let s: T = pow2(k);
        let (mut x_lo, mut x_hi) = (xa, xb);
        if let PlaneRegion::Sector(sec) = region {
            // |x| ≤ y·cot θ_f on the cone, and |x| ≤ √(r² − y²) inside the outer arc
            let cot = (T::one() - sec.sin_floor * sec.sin_floor).max(T::zero()).sqrt() / sec.sin_floor;
            let by_cone = s * T::lit(2.0) * cot;
            let by_arc = (sec.r_hi * sec.r_hi - s * s).max(T::zero()).sqrt();
            let bound = by_cone.min(by_arc);
            x_lo = -bound;
            x_hi = bound;
        }
        let j0 = (x_lo / s).floor().to_i64().unwrap_or(i64::MIN / 2) - 1;
        let j1 = (x_hi / s).floor().to_i64().unwrap_or(i64::MAX / 2) + 1;
        for j in j0..=j1 {
            let sq = WhitneySquare { j, k };
            if region.meets(&sq) {
                out.push(sq);
            }
        }
    }
    out
}

/// Number of enlarged squares `Δ*` containing `z`.
pub fn overlap_count<T: Real>(z: C<T>, lambda: T) -> Result<usize> {
    check_lambda(lambda)?;
    let home = square_of(z)?;
    let mut count = 0;
    // Δ* at level k spans heights in (2^{k-1}, 2^{k+1}·1.25): levels home.k-1 ..= home.k+1 suffice
    for k in home.k - 2..=home.k + 1 {
        let s: T = pow2(k);
        let j0 = (z.re / s).floor().to_i64().unwrap_or(0);
        for j in j0 - 2..=j0 + 2 {
            if (WhitneySquare { j, k }).enlarged(lambda).contains_closed(z) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Largest overlap count over the given points.
pub fn overlap_multiplicity_at<T: Real, I>(points: I, lambda: T) -> Result<usize>
where
    I: IntoIterator<Item = C<T>>,
{
    let mut best = 0;
    for z in points {
        best = best.max(overlap_count(z, lambda)?);
    }
    Ok(best)
}

/// Largest overlap count over an `n × n` grid of cell centers in the bounding
/// box of the region, restricted to points of the region.
pub fn overlap_multiplicity<T: Real>(region: &PlaneRegion<T>, lambda: T, n: usize) -> Result<usize> {
    check_lambda(lambda)?;
    let Some((x0, x1, y0, y1)) = region.bounds() else {
        return Ok(0);
    };
    let nn = T::from_usize_lossy(n);
    let pts = (0..n * n).filter_map(|idx| {
        let (a, b) = (idx / n, idx % n);
        let x = x0 + (x1 - x0) * (T::from_usize_lossy(a) + T::lit(0.5)) / nn;
        let y = y0 + (y1 - y0) * (T::from_usize_lossy(b) + T::lit(0.5)) / nn;
        let z = C::new(x, y);
        region.contains(z).then_some(z)
    });
    overlap_multiplicity_at(pts, lambda)
}

/// Empirical mean-value constant of one square: the grid sup of
/// `|f|^p (Im z)^α` over `Δ` divided by the mean of the same quantity over `Δ*`.
pub fn subharmonic_bound_ratio<T: Real>(
    f: &TestFunction<T>,
    p: T,
    alpha: T,
    square: WhitneySquare,
    lambda: T,
) -> Result<T> {
    check_lambda(lambda)?;
    let big = square.enlarged(lambda);
    if !(big.y0 > T::zero()) {
        return Err(Error::OutOfDomain("enlarged square leaves the half-plane".into()));
    }
    let g = |z: C<T>| f.eval_plane_unchecked(z).norm().powf(p) * z.im.powf(alpha);
    let e = square.extent::<T>();
    let n = 64;
    let nn = T::from_usize_lossy(n);
    let mut sup = T::zero();
    for a in 0..=n {
        for b in 0..=n {
            let x = e.x0 + (e.x1 - e.x0) * T::from_usize_lossy(a) / nn;
            let y = e.y0 + (e.y1 - e.y0) * T::from_usize_lossy(b) / nn;
            sup = sup.max(g(C::new(x, y)));
        }
    }
    let total = integrate(&big.region(), g, T::lit(1e-10), 20_000)?;
    let mean = total / big.area();
    if mean == T::zero() {
        return Ok(T::zero());
    }
    Ok(sup / mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Domain;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn square_of_examples() {
        let sq = square_of(C::new(0.7, 1.3)).unwrap();
        assert_eq!(sq, WhitneySquare::new(0, 0));
        assert_eq!(sq.center::<f64>(), C::new(0.5, 1.5));
        let sq = square_of(C::new(-3.2, 0.3)).unwrap();
        assert_eq!(sq, WhitneySquare::new(-13, -2));
        let e = sq.extent::<f64>();
        assert_eq!((e.x0, e.x1, e.y0, e.y1), (-3.25, -3.0, 0.25, 0.5));
        assert!(matches!(square_of(C::new(5.0, 0.0)), Err(Error::OutOfDomain(_))));
        assert_eq!(square_of(C::new(1.0, 2.0)).unwrap(), WhitneySquare::new(0, 1));
    }

    #[test]
    fn exact_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let z = C::new(rng.random_range(-50.0..50.0), (rng.random_range(-12.0..8.0f64)).exp2());
            let sq = square_of(z).unwrap();
            assert!(sq.contains(z));
            let wk = sq.center::<f64>();
            assert!((sq.area::<f64>() - 4.0 / 9.0 * wk.im * wk.im).abs() <= 1e-15 * sq.area::<f64>());
            let r = z.im / wk.im;
            assert!((2.0 / 3.0..=4.0 / 3.0).contains(&r));
            for dj in -1..=1 {
                for dk in -1..=1 {
                    if (dj, dk) != (0, 0) {
                        assert!(!WhitneySquare::new(sq.j + dj, sq.k + dk).contains(z));
                    }
                }
            }
        }
    }

    #[test]
    fn squares_meeting_examples() {
        let unit = PlaneRegion::Rect { x0: 0.0, x1: 1.0, y0: 1.0, y1: 2.0 };
        assert_eq!(squares_meeting(&unit), vec![WhitneySquare::new(0, 0)]);
        assert!(squares_meeting::<f64>(&PlaneRegion::Empty).is_empty());

        let sector = Sector { r_lo: 0.5, r_hi: 2.0, sin_floor: 0.5 };
        let found = squares_meeting(&PlaneRegion::Sector(sector));
        assert!(found.contains(&WhitneySquare::new(0, -1)));
        assert!(found.contains(&WhitneySquare::new(-1, -1)));

        // brute force: sample each closed candidate square densely
        let mut brute = Vec::new();
        for k in -4..=2 {
            let s = 2f64.powi(k);
            for j in (-(8.0 / s) as i64)..=((8.0 / s) as i64) {
                let sq = WhitneySquare::new(j, k);
                let e = sq.extent::<f64>();
                let n = 200;
                let hit = (0..=n).any(|a| {
                    (0..=n).any(|b| {
                        let x = e.x0 + s * a as f64 / n as f64;
                        let y = e.y0 + s * b as f64 / n as f64;
                        sector.contains(C::new(x, y))
                    })
                });
                if hit {
                    brute.push(sq);
                }
            }
        }
        brute.sort_by_key(|s| (s.k, s.j));
        assert_eq!(found, brute);
    }

    #[test]
    fn overlap_examples() {
        let region = PlaneRegion::Rect { x0: -4.0, x1: 4.0, y0: 0.05, y1: 6.0 };
        let m = overlap_multiplicity(&region, 1.5, 300).unwrap();
        assert!((1..=9).contains(&m));
        let single = PlaneRegion::Rect { x0: 0.0, x1: 1.0, y0: 1.0, y1: 2.0 };
        assert!(overlap_multiplicity(&single, 1.5, 20).unwrap() >= 1);
        // just above λ = 1 only points near edges see two squares
        let inner = (0..50).flat_map(|a| (0..50).map(move |b| C::new(0.1 + 0.016 * a as f64, 1.1 + 0.016 * b as f64)));
        assert_eq!(overlap_multiplicity_at(inner, 1.0001).unwrap(), 1);
        assert!(overlap_count(C::new(0.0, 1.0), 1.0).is_err());
    }

    #[test]
    fn kernel_comparability() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5000 {
            let sq = WhitneySquare::new(rng.random_range(-20..20), rng.random_range(-5..5));
            let e = sq.extent::<f64>();
            let s = sq.side::<f64>();
            let w = C::new(e.x0 + s * rng.random::<f64>(), e.y0 + s * rng.random::<f64>());
            let big = sq.enlarged(1.5);
            let z = C::new(rng.random_range(-100.0..100.0), rng.random_range(-8.0..7.0f64).exp2());
            if big.contains_closed(z) {
                continue;
            }
            let r = (w.conj() - z).norm() / (sq.center::<f64>().conj() - z).norm();
            assert!((1.0 / 3.0..=3.0).contains(&r), "ratio {r}");
        }
    }

    #[test]
    fn subharmonic_examples() {
        let one = TestFunction::<f64>::constant(Domain::HalfPlane, 1.0).unwrap();
        let r = subharmonic_bound_ratio(&one, 2.0, 0.0, WhitneySquare::new(0, 0), 1.5).unwrap();
        assert!((r - 1.0).abs() < 1e-12);

        let f = TestFunction::<f64>::power_shift(2.0);
        // the ten level-0 squares around the peak of |f| at x = 0
        let rs: Vec<f64> = (-5..5)
            .map(|j| subharmonic_bound_ratio(&f, 2.0, 0.0, WhitneySquare::new(j, 0), 1.5).unwrap())
            .collect();
        let mean = rs.iter().sum::<f64>() / rs.len() as f64;
        for r in &rs {
            assert!(r.is_finite() && (r / mean - 1.0).abs() <= 0.2, "{rs:?}");
        }

        // z^{-1} is scale invariant, so every level sees the same constant
        let g = TestFunction::pure_power(1.0);
        let rs: Vec<f64> = (0..=5)
            .map(|k| subharmonic_bound_ratio(&g, 1.0, 1.0, WhitneySquare::new(0, k), 1.5).unwrap())
            .collect();
        for r in &rs {
            assert!((r / rs[0] - 1.0).abs() < 1e-6);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn partition(x in -1e4f64..1e4, ly in -30.0f64..20.0) {
                let z = C::new(x, ly.exp2());
                let sq = square_of(z).unwrap();
                prop_assert!(sq.contains(z));
                for k in sq.k - 1..=sq.k + 1 {
                    let s = 2f64.powi(k);
                    let j0 = (x / s).floor() as i64;
                    for j in j0 - 1..=j0 + 1 {
                        let other = WhitneySquare::new(j, k);
                        prop_assert_eq!(other.contains(z), other == sq);
                    }
                }
            }
        }
    }
}
