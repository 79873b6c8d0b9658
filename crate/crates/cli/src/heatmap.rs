//! Grayscale level-set heatmaps.
//!
//! Pixel intensity encodes `min(1, |f| · weight)`: non-members use `[0, 180]`
//! and members of the level set use `[200, 255]`.

use bergman_extremal::ball::geometry::disk_point;
use bergman_extremal::catalog::ball_delta;
use bergman_extremal::{Domain, Error, Function, Result, C};
use serde::{Deserialize, Serialize};

use crate::config::Viewport;

pub const MEMBER_FLOOR: u8 = 200;
pub const PLAIN_CEIL: u8 = 180;

/// A level-set pixel with its center and weighted modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemberPixel {
    pub col: u32,
    pub row: u32,
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub width: u32,
    pub height: u32,
    /// Row-major, row 0 at the top (`y = y1`).
    pub pixels: Vec<u8>,
    pub members: Vec<MemberPixel>,
}

/// Center of pixel `(col, row)`.
pub fn pixel_center(vp: &Viewport, resolution: [u32; 2], col: u32, row: u32) -> C<f64> {
    let [w, h] = resolution;
    C::new(
        vp.x0 + (col as f64 + 0.5) * (vp.x1 - vp.x0) / w as f64,
        vp.y1 - (row as f64 + 0.5) * (vp.y1 - vp.y0) / h as f64,
    )
}

fn check_viewport(domain: Domain, vp: &Viewport, resolution: [u32; 2]) -> Result<()> {
    if resolution[0] == 0 || resolution[1] == 0 || !(vp.x0 < vp.x1 && vp.y0 < vp.y1) {
        return Err(Error::HypothesisViolation("empty viewport or resolution".into()));
    }
    let inside = match domain {
        Domain::HalfPlane => vp.y0 >= 0.0,
        Domain::Ball { .. } => vp.x0 >= -1.0 && vp.x1 <= 1.0 && vp.y0 >= -1.0 && vp.y1 <= 1.0,
    };
    if !inside {
        return Err(Error::OutOfDomain(format!(
            "viewport [{}, {}] x [{}, {}] leaves the domain",
            vp.x0, vp.x1, vp.y0, vp.y1
        )));
    }
    Ok(())
}

/// Weighted modulus at a pixel center, `None` outside the domain. On the ball
/// the picture is the slice `z₂ = 0`.
fn weighted(f: &Function, weight: f64, z: C<f64>) -> Option<f64> {
    match f.domain {
        Domain::HalfPlane => (z.im > 0.0).then(|| f.eval_plane_unchecked(z).norm() * z.im.powf(weight)),
        Domain::Ball { .. } => {
            let p = disk_point(z);
            let d = ball_delta(&p);
            (d > 0.0).then(|| f.eval_ball_unchecked(&p).norm() * d.powf(weight))
        }
    }
}

pub fn render_heatmap(f: &Function, weight: f64, eps: f64, viewport: Viewport, resolution: [u32; 2]) -> Result<Heatmap> {
    check_viewport(f.domain, &viewport, resolution)?;
    if !(eps > 0.0) {
        return Err(Error::HypothesisViolation(format!("eps > 0 required, got {eps}")));
    }
    let [w, h] = resolution;
    let mut pixels = Vec::with_capacity(w as usize * h as usize);
    let mut members = Vec::new();
    for row in 0..h {
        for col in 0..w {
            let z = pixel_center(&viewport, resolution, col, row);
            let Some(v) = weighted(f, weight, z) else {
                pixels.push(0);
                continue;
            };
            let g = if v.is_finite() { v.min(1.0) } else { 1.0 };
            if v >= eps {
                pixels.push(MEMBER_FLOOR + (g * (255 - MEMBER_FLOOR) as f64).round() as u8);
                members.push(MemberPixel { col, row, x: z.re, y: z.im, value: v });
            } else {
                pixels.push((g * PLAIN_CEIL as f64).round() as u8);
            }
        }
    }
    Ok(Heatmap {
        width: w,
        height: h,
        pixels,
        members,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use bergman_extremal::halfplane::distance::levelset_member;
    use bergman_extremal::TestFunction;

    fn half_annulus() -> Viewport {
        Viewport { x0: -2.0, x1: 2.0, y0: 0.0, y1: 2.0 }
    }

    #[test]
    fn sector_band_of_pure_power() {
        let f = TestFunction::pure_power(1.0);
        let map = render_heatmap(&f, 1.0, 0.5, half_annulus(), [64, 32]).unwrap();
        for row in 0..32 {
            for col in 0..64 {
                let z = pixel_center(&half_annulus(), [64, 32], col, row);
                let px = map.pixels[(row * 64 + col) as usize];
                let member = levelset_member(&f, 0.5, 1.0, z).unwrap();
                assert_eq!(px >= MEMBER_FLOOR, member);
                // |z⁻¹| y = sin θ
                let sin = z.im / z.norm();
                if (sin - 0.5).abs() > 1e-9 {
                    assert_eq!(member, sin > 0.5);
                }
            }
        }
        assert!(!map.members.is_empty());
    }

    #[test]
    fn above_the_norm_nothing_is_marked() {
        let f = TestFunction::pure_power(1.0);
        let map = render_heatmap(&f, 1.0, 1.01, half_annulus(), [40, 20]).unwrap();
        assert!(map.members.is_empty());
        assert!(map.pixels.iter().all(|&p| p <= PLAIN_CEIL));
    }

    #[test]
    fn single_pixel() {
        let f = TestFunction::pure_power(1.0);
        let vp = Viewport { x0: -1.0, x1: 1.0, y0: 0.5, y1: 1.5 };
        let map = render_heatmap(&f, 1.0, 0.9, vp, [1, 1]).unwrap();
        assert_eq!(map.pixels.len(), 1);
        assert!(map.pixels[0] >= MEMBER_FLOOR);
        let map = render_heatmap(&f, 1.0, 0.9, Viewport { x0: 0.5, x1: 2.5, ..vp }, [1, 1]).unwrap();
        assert!(map.pixels[0] <= PLAIN_CEIL);
    }

    #[test]
    fn viewport_must_stay_in_the_domain() {
        let f = TestFunction::pure_power(1.0);
        let vp = Viewport { x0: -1.0, x1: 1.0, y0: -0.5, y1: 1.0 };
        assert!(matches!(render_heatmap(&f, 1.0, 0.5, vp, [4, 4]), Err(Error::OutOfDomain(_))));
        let pole = TestFunction::ball_pole(1, 1.0).unwrap();
        assert!(render_heatmap(&pole, 1.0, 0.5, Viewport { x0: -1.5, x1: 1.0, y0: -1.0, y1: 1.0 }, [4, 4]).is_err());
        let disk = render_heatmap(&pole, 1.0, 0.5, Viewport { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 }, [8, 8]).unwrap();
        assert_eq!(disk.pixels[0], 0);
    }
}
