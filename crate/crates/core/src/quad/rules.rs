//! Fixed quadrature rules: Gauss–Kronrod 7/15 in one dimension and the
//! Genz–Malik degree 7/5 embedded pair in two dimensions.

use crate::scalar::Real;

pub(crate) const GK15_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

pub(crate) const GK15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss 7-point weights for Kronrod nodes 1, 3, 5, 7.
pub(crate) const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Apply GK15 on `[a, b]`; returns `(kronrod, |kronrod − gauss|)`.
pub fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid);
    let mut k = fc * T::lit(GK15_WEIGHTS[7]);
    let mut g = fc * T::lit(G7_WEIGHTS[3]);
    for i in 0..7 {
        let dx = half * T::lit(GK15_NODES[i]);
        let s = f(mid - dx) + f(mid + dx);
        k = k + s * T::lit(GK15_WEIGHTS[i]);
        if i % 2 == 1 {
            g = g + s * T::lit(G7_WEIGHTS[i / 2]);
        }
    }
    (k * half, ((k - g) * half).abs())
}

/// Genz–Malik node offsets on `[-1, 1]²` grouped by weight class.
pub(crate) struct GenzMalik<T> {
    pub l2: T,
    pub l3: T,
    pub l4: T,
    pub l5: T,
    pub w7: [T; 5],
    pub w5: [T; 4],
    /// `(λ2/λ3)²`, used in the fourth-difference split heuristic.
    pub ratio: T,
}

impl<T: Real> GenzMalik<T> {
    pub fn new() -> Self {
        let d = 2.0;
        Self {
            l2: T::lit((9.0f64 / 70.0).sqrt()),
            l3: T::lit((9.0f64 / 10.0).sqrt()),
            l4: T::lit((9.0f64 / 10.0).sqrt()),
            l5: T::lit((9.0f64 / 19.0).sqrt()),
            w7: [
                T::lit((12824.0 - 9120.0 * d + 400.0 * d * d) / 19683.0),
                T::lit(980.0 / 6561.0),
                T::lit((1820.0 - 400.0 * d) / 19683.0),
                T::lit(200.0 / 19683.0),
                T::lit(6859.0 / 19683.0 / 4.0),
            ],
            w5: [
                T::lit((729.0 - 950.0 * d + 50.0 * d * d) / 729.0),
                T::lit(245.0 / 486.0),
                T::lit((265.0 - 100.0 * d) / 1458.0),
                T::lit(25.0 / 729.0),
            ],
            ratio: T::lit((9.0 / 70.0) / (9.0 / 10.0)),
        }
    }
}

/// Tensor Gauss–Legendre nodes/weights on `[0, 1]` for small orders.
pub fn gauss_legendre_unit<T: Real>(order: usize) -> Vec<(T, T)> {
    let (x, w): (&[f64], &[f64]) = match order {
        1 => (&[0.0], &[2.0]),
        2 => (&[-0.577_350_269_189_625_8, 0.577_350_269_189_625_8], &[1.0, 1.0]),
        3 => (
            &[-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4],
            &[0.555_555_555_555_555_6, 0.888_888_888_888_888_9, 0.555_555_555_555_555_6],
        ),
        4 => (
            &[
                -0.861_136_311_594_052_6,
                -0.339_981_043_584_856_3,
                0.339_981_043_584_856_3,
                0.861_136_311_594_052_6,
            ],
            &[
                0.347_854_845_137_453_8,
                0.652_145_154_862_546_2,
                0.652_145_154_862_546_2,
                0.347_854_845_137_453_8,
            ],
        ),
        _ => panic!("Gauss-Legendre order {order} not tabulated (1..=4)"),
    };
    x.iter()
        .zip(w)
        .map(|(&x, &w)| (T::lit(0.5 * (x + 1.0)), T::lit(0.5 * w)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk15_polynomials_exact() {
        let (v, e) = gk15(&|x: f64| x.powi(13), 0.0, 1.0);
        assert!((v - 1.0 / 14.0).abs() < 1e-14);
        assert!(e < 1e-13);
        let (v, _) = gk15(&|x: f64| x.exp(), -1.0, 2.0);
        assert!((v - (2f64.exp() - (-1f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn genz_malik_weights_sum_to_one() {
        let gm = GenzMalik::<f64>::new();
        let s7 = gm.w7[0] + 4.0 * gm.w7[1] + 4.0 * gm.w7[2] + 4.0 * gm.w7[3] + 4.0 * gm.w7[4];
        let s5 = gm.w5[0] + 4.0 * gm.w5[1] + 4.0 * gm.w5[2] + 4.0 * gm.w5[3];
        assert!((s7 - 1.0).abs() < 1e-15);
        assert!((s5 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_integrates_cubics() {
        for order in 2..=4 {
            let s: f64 = gauss_legendre_unit(order).iter().map(|&(x, w): &(f64, f64)| w * x.powi(3)).sum();
            assert!((s - 0.25).abs() < 1e-15);
        }
    }
}
