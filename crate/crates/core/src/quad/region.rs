//! Bounded integration regions in the plane and the ladder-region geometry of ℂ₊.

use crate::error::{Error, Result};
use crate::quad::adaptive::{cubature, CubatureOptions, Rect};
use crate::scalar::{Real, C};

/// Bounded region of ℝ² ≅ ℂ for one-shot integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region<T> {
    /// `[x0, x1] × [y0, y1]`.
    Rect { x0: T, x1: T, y0: T, y1: T },
    /// `{r e^{iθ} : r ∈ [r0, r1], θ ∈ [th0, th1]}`.
    Polar { r0: T, r1: T, th0: T, th1: T },
    /// Centred disk of the given radius.
    Disk { radius: T },
}

impl<T: Real> Region<T> {
    fn param_cells(&self) -> Vec<Rect<T>> {
        match *self {
            Region::Rect { x0, x1, y0, y1 } => Rect::new(x0, x1, y0, y1).grid(4, 4),
            Region::Polar { r0, r1, th0, th1 } => Rect::new(r0, r1, th0, th1).grid(4, 8),
            Region::Disk { radius } => Rect::new(T::zero(), radius, -T::PI(), T::PI()).grid(4, 8),
        }
    }

    fn map(&self, p: [T; 2]) -> (C<T>, T) {
        match self {
            Region::Rect { .. } => (C::new(p[0], p[1]), T::one()),
            Region::Polar { .. } | Region::Disk { .. } => (C::from_polar(p[0], p[1]), p[0]),
        }
    }
}

/// Adaptive integral of a real integrand over a bounded region.
///
/// Returns `BudgetExceeded` (carrying the best estimate) when the relative
/// tolerance is not met within `max_cells` cells.
pub fn integrate<T, F>(region: &Region<T>, integrand: F, tol: T, max_cells: usize) -> Result<T>
where
    T: Real,
    F: Fn(C<T>) -> T + Sync,
{
    let out = cubature(
        &region.param_cells(),
        1,
        |p| {
            let (z, jac) = region.map(p);
            vec![integrand(z) * jac]
        },
        &CubatureOptions::new(tol, max_cells),
    );
    if out.converged {
        Ok(out.values[0])
    } else {
        Err(Error::BudgetExceeded {
            max_cells,
            estimate: out.values[0].to_f64_lossy(),
            error: out.errors[0].to_f64_lossy(),
        })
    }
}

/// Truncated annular sector of ℂ₊:
/// `{ r_lo ≤ |z| ≤ r_hi, Im z ≥ sin_floor · |z| }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector<T> {
    pub r_lo: T,
    pub r_hi: T,
    pub sin_floor: T,
}

impl<T: Real> Sector<T> {
    pub fn contains(&self, z: C<T>) -> bool {
        let r = z.norm();
        z.im > T::zero() && r >= self.r_lo && r <= self.r_hi && z.im >= self.sin_floor * r
    }

    /// Closed rectangle `[x0,x1]×[y0,y1]` (with `y0 > 0`) meets the sector.
    pub fn meets_rect(&self, x0: T, x1: T, y0: T, y1: T) -> bool {
        let poly = self.clip_to_cone(x0, x1, y0, y1);
        if poly.is_empty() {
            return false;
        }
        let max_r = poly.iter().map(|p| p.norm()).fold(T::zero(), T::max);
        let min_r = polygon_min_norm(&poly);
        max_r >= self.r_lo && min_r <= self.r_hi
    }

    /// Closed rectangle lies entirely inside the sector.
    pub fn contains_rect(&self, x0: T, x1: T, y0: T, y1: T) -> bool {
        let corners = [C::new(x0, y0), C::new(x1, y0), C::new(x1, y1), C::new(x0, y1)];
        let in_cone = corners.iter().all(|c| c.im >= self.sin_floor * c.norm());
        let max_r = corners.iter().map(|c| c.norm()).fold(T::zero(), T::max);
        let dx = if x0 > T::zero() {
            x0
        } else if x1 < T::zero() {
            -x1
        } else {
            T::zero()
        };
        let min_r = (dx * dx + y0 * y0).sqrt();
        in_cone && max_r <= self.r_hi && min_r >= self.r_lo
    }

    /// The rectangle clipped to the cone `{θ_f ≤ arg z ≤ π − θ_f}` as a convex polygon.
    fn clip_to_cone(&self, x0: T, x1: T, y0: T, y1: T) -> Vec<C<T>> {
        let s = self.sin_floor;
        let c = (T::one() - s * s).max(T::zero()).sqrt();
        let poly = vec![C::new(x0, y0), C::new(x1, y0), C::new(x1, y1), C::new(x0, y1)];
        // y·c ≥ x·s and y·c ≥ −x·s
        let poly = clip_halfplane(&poly, |p| p.im * c - p.re * s);
        clip_halfplane(&poly, |p| p.im * c + p.re * s)
    }
}

/// Sutherland–Hodgman clip of a convex polygon against `{g ≥ 0}` for affine `g`.
fn clip_halfplane<T: Real>(poly: &[C<T>], g: impl Fn(C<T>) -> T) -> Vec<C<T>> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (ga, gb) = (g(a), g(b));
        if ga >= T::zero() {
            out.push(a);
        }
        if (ga >= T::zero()) != (gb >= T::zero()) {
            let t = ga / (ga - gb);
            out.push(a + (b - a) * t);
        }
    }
    out
}

/// Distance from the origin to a convex polygon not containing it.
fn polygon_min_norm<T: Real>(poly: &[C<T>]) -> T {
    if poly.len() == 1 {
        return poly[0].norm();
    }
    let mut best = T::infinity();
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let ab = b - a;
        let len2 = ab.norm_sqr();
        let t = if len2 > T::zero() {
            ((-a.re * ab.re - a.im * ab.im) / len2).max(T::zero()).min(T::one())
        } else {
            T::zero()
        };
        best = best.min((a + ab * t).norm());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn integrate_examples() {
        let one: f64 = integrate(&Region::Rect { x0: 0.0, x1: 1.0, y0: 1.0, y1: 2.0 }, |_| 1.0, 1e-10, 100).unwrap();
        assert!((one - 1.0).abs() < 1e-14);

        let boxed = integrate(
            &Region::Rect { x0: -50.0, x1: 50.0, y0: 0.0, y1: 50.0 },
            |z: C<f64>| (z.re * z.re + (1.0 + z.im).powi(2)).powi(-2),
            1e-8,
            100_000,
        )
        .unwrap();
        // the box misses a tail of about π/(2·50²)
        assert!(boxed < PI / 4.0 && (boxed - PI / 4.0).abs() < 1e-3);

        let disk = integrate(&Region::Disk { radius: 1.0 }, |z: C<f64>| (1.0 - z.norm_sqr()).powi(3), 1e-10, 1000).unwrap();
        assert!((disk - PI / 4.0).abs() < 1e-10);
    }

    #[test]
    fn nested_regions_monotone() {
        let g = |z: C<f64>| (-(z - C::new(0.3, 0.4)).norm_sqr()).exp();
        let inner = integrate(&Region::Polar { r0: 0.1, r1: 1.0, th0: 0.2, th1: 2.5 }, g, 1e-9, 10_000).unwrap();
        let outer = integrate(&Region::Polar { r0: 0.05, r1: 1.5, th0: 0.1, th1: 2.9 }, g, 1e-9, 10_000).unwrap();
        assert!(inner <= outer + 1e-9 * outer);
    }

    #[test]
    fn budget_exceeded_carries_estimate() {
        let r = integrate(
            &Region::Rect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 },
            |z: C<f64>| 1.0 / z.norm(),
            1e-15,
            40,
        );
        match r {
            Err(Error::BudgetExceeded { estimate, max_cells, .. }) => {
                assert_eq!(max_cells, 40);
                assert!(estimate > 1.0);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn sector_geometry() {
        let s = Sector { r_lo: 0.5, r_hi: 2.0, sin_floor: 0.5 };
        assert!(s.contains(C::new(0.0, 1.0)));
        assert!(!s.contains(C::new(1.0, 0.1)));
        assert!(s.meets_rect(0.0, 0.5, 0.5, 1.0));
        assert!(s.meets_rect(-0.5, 0.0, 0.5, 1.0));
        assert!(!s.meets_rect(3.0, 4.0, 0.1, 0.2));
        // touches only at the point 2i
        assert!(s.meets_rect(0.0, 2.0, 2.0, 4.0));
        assert!(!s.meets_rect(0.01, 2.0, 2.0, 4.0));
        assert!(s.contains_rect(0.0, 0.5, 0.5, 1.0));
        assert!(!s.contains_rect(0.0, 2.0, 1.0, 2.0));
    }
}
