use crate::scalar::Real;

/// Compensated (Kahan–Babuška/Neumaier) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum<T> {
    sum: T,
    comp: T,
}

impl<T: Real> KahanSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.comp
    }

    pub fn sum_iter<I: IntoIterator<Item = T>>(iter: I) -> T {
        let mut k = Self::new();
        for x in iter {
            k.add(x);
        }
        k.value()
    }
}

/// Component-wise compensated sum of equally sized vectors, in iteration order.
pub fn kahan_sum_vectors<'a, T: Real, I>(dim: usize, rows: I) -> Vec<T>
where
    I: IntoIterator<Item = &'a [T]>,
{
    let mut acc = vec![KahanSum::new(); dim];
    for row in rows {
        for (a, &x) in acc.iter_mut().zip(row) {
            a.add(x);
        }
    }
    acc.iter().map(KahanSum::value).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensates_cancellation() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(KahanSum::sum_iter(xs), 2.0);
        let naive: f64 = xs.iter().sum();
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn many_small_terms() {
        let s = KahanSum::sum_iter(std::iter::repeat_n(0.1f64, 1_000_000));
        assert!((s - 100_000.0).abs() < 1e-9);
    }

    #[test]
    fn vectors() {
        let rows: Vec<Vec<f64>> = vec![vec![1.0, 2.0], vec![1e-17, 3.0], vec![-1.0, 0.5]];
        let s = kahan_sum_vectors(2, rows.iter().map(|r| r.as_slice()));
        assert_eq!(s, vec![1e-17, 5.5]);
    }
}
