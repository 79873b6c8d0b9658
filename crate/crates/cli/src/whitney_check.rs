use bergman_extremal::whitney::{square_of, WhitneySquare};
use bergman_extremal::{Result, C};

/// Points that lie in no square or in more than one square of the tiling.
pub fn partition_violations(points: &[C<f64>]) -> Result<usize> {
    let mut bad = 0;
    for &z in points {
        let home = square_of(z)?;
        let mut hits = 0;
        for k in home.k - 1..=home.k + 1 {
            let j0 = (z.re / 2f64.powi(k)).floor() as i64;
            for j in j0 - 1..=j0 + 1 {
                if WhitneySquare::new(j, k).contains(z) {
                    hits += 1;
                }
            }
        }
        if hits != 1 || !home.contains(z) {
            bad += 1;
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_corners_belong_to_one_square() {
        let pts = [C::new(0.0, 1.0), C::new(-0.5, 0.5), C::new(3.0, 2.0), C::new(1e-9, 1e-9)];
        assert_eq!(partition_violations(&pts).unwrap(), 0);
    }
}
