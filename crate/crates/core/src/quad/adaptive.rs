//! Globally adaptive cubature on unions of rectangles.
//!
//! The integrand is vector valued so that several related integrals (for
//! example every level of a truncation ladder) share one partition; their
//! differences then carry correlated rather than independent rule errors.
//!
//! Results are bit-reproducible for a fixed input: cells are refined in batches
//! chosen by a deterministic priority order, evaluated in parallel, and finally
//! summed with compensated arithmetic in creation order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::kahan::{kahan_sum_vectors, KahanSum};
use super::rules::{gk15, GenzMalik};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Axis-aligned rectangle `[lo0, hi0] × [lo1, hi1]` in parameter space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect<T> {
    pub lo: [T; 2],
    pub hi: [T; 2],
}

impl<T: Real> Rect<T> {
    pub fn new(x0: T, x1: T, y0: T, y1: T) -> Self {
        Self {
            lo: [x0, y0],
            hi: [x1, y1],
        }
    }

    pub fn area(&self) -> T {
        (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1])
    }

    /// Split into an `nx × ny` grid, row-major in the first coordinate.
    pub fn grid(&self, nx: usize, ny: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(nx * ny);
        let dx = (self.hi[0] - self.lo[0]) / T::from_usize_lossy(nx);
        let dy = (self.hi[1] - self.lo[1]) / T::from_usize_lossy(ny);
        for i in 0..nx {
            let x0 = self.lo[0] + dx * T::from_usize_lossy(i);
            let x1 = if i + 1 == nx { self.hi[0] } else { x0 + dx };
            for j in 0..ny {
                let y0 = self.lo[1] + dy * T::from_usize_lossy(j);
                let y1 = if j + 1 == ny { self.hi[1] } else { y0 + dy };
                out.push(Self::new(x0, x1, y0, y1));
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct CubatureOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_cells: usize,
    /// Cells refined per round.
    pub batch: usize,
    /// Optional per-component reference: component `i` is measured against
    /// `max(|total_i|, |total_{reference[i]}|)`, so signed components whose
    /// totals cancel can borrow the scale of a nonnegative majorant.
    pub reference: Vec<usize>,
}

impl<T: Real> CubatureOptions<T> {
    pub fn new(rel_tol: T, max_cells: usize) -> Self {
        Self {
            rel_tol,
            abs_tol: T::zero(),
            max_cells,
            batch: 16,
            reference: Vec::new(),
        }
    }

    fn tolerance(&self, i: usize, totals: &[T]) -> T {
        let mut v = totals[i].abs();
        if let Some(&r) = self.reference.get(i) {
            v = v.max(totals[r].abs());
        }
        (self.rel_tol * v).max(self.abs_tol)
    }
}

/// Outcome of [`cubature`]: per-component values and error estimates.
#[derive(Debug, Clone)]
pub struct Cubature<T> {
    pub values: Vec<T>,
    pub errors: Vec<T>,
    pub cells: usize,
    pub converged: bool,
}

struct Cell<T> {
    rect: Rect<T>,
    root: usize,
    seq: u64,
    value: Vec<T>,
    error: Vec<T>,
    split: usize,
}

#[derive(PartialEq)]
struct Key {
    priority: f64,
    seq: u64,
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn axpy<T: Real>(acc: &mut [T], w: T, x: &[T]) {
    for (a, &v) in acc.iter_mut().zip(x) {
        *a = *a + w * v;
    }
}

fn eval_rect<T, F>(rect: &Rect<T>, dim: usize, gm: &GenzMalik<T>, f: &F) -> (Vec<T>, Vec<T>, usize)
where
    T: Real,
    F: Fn([T; 2]) -> Vec<T>,
{
    let half = T::lit(0.5);
    let c = [
        (rect.lo[0] + rect.hi[0]) * half,
        (rect.lo[1] + rect.hi[1]) * half,
    ];
    let h = [
        (rect.hi[0] - rect.lo[0]) * half,
        (rect.hi[1] - rect.lo[1]) * half,
    ];
    let at = |dx: T, dy: T| f([c[0] + dx * h[0], c[1] + dy * h[1]]);

    let fc = at(T::zero(), T::zero());
    debug_assert_eq!(fc.len(), dim);
    let two = T::lit(2.0);
    let mut s2 = vec![T::zero(); dim];
    let mut s3 = vec![T::zero(); dim];
    let mut s4 = vec![T::zero(); dim];
    let mut s5 = vec![T::zero(); dim];
    let mut fourth = [T::zero(); 2];

    for axis in 0..2 {
        let (ex, ey) = if axis == 0 {
            (T::one(), T::zero())
        } else {
            (T::zero(), T::one())
        };
        let p2 = at(ex * gm.l2, ey * gm.l2);
        let m2 = at(-ex * gm.l2, -ey * gm.l2);
        let p3 = at(ex * gm.l3, ey * gm.l3);
        let m3 = at(-ex * gm.l3, -ey * gm.l3);
        let mut diff = T::zero();
        for i in 0..dim {
            let d2 = p2[i] + m2[i] - two * fc[i];
            let d3 = p3[i] + m3[i] - two * fc[i];
            diff = diff.max((d2 - gm.ratio * d3).abs());
            s2[i] = s2[i] + p2[i] + m2[i];
            s3[i] = s3[i] + p3[i] + m3[i];
        }
        fourth[axis] = diff;
    }
    for (sx, sy) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
        let (sx, sy) = (T::lit(sx as f64), T::lit(sy as f64));
        let p4 = at(sx * gm.l4, sy * gm.l4);
        let p5 = at(sx * gm.l5, sy * gm.l5);
        axpy(&mut s4, T::one(), &p4);
        axpy(&mut s5, T::one(), &p5);
    }

    let vol = rect.area();
    let mut value = vec![T::zero(); dim];
    let mut error = vec![T::zero(); dim];
    for i in 0..dim {
        let r7 = gm.w7[0] * fc[i] + gm.w7[1] * s2[i] + gm.w7[2] * s3[i] + gm.w7[3] * s4[i] + gm.w7[4] * s5[i];
        let r5 = gm.w5[0] * fc[i] + gm.w5[1] * s2[i] + gm.w5[2] * s3[i] + gm.w5[3] * s4[i];
        value[i] = r7 * vol;
        error[i] = ((r7 - r5) * vol).abs();
    }
    let scale = fourth[0].max(fourth[1]);
    let split = if (fourth[0] - fourth[1]).abs() <= T::lit(1e-10) * scale {
        if h[0] >= h[1] {
            0
        } else {
            1
        }
    } else if fourth[0] > fourth[1] {
        0
    } else {
        1
    };
    (value, error, split)
}

fn converged<T: Real>(values: &[T], errors: &[T], opts: &CubatureOptions<T>) -> bool {
    errors
        .iter()
        .enumerate()
        .all(|(i, &e)| e <= opts.tolerance(i, values))
}

fn priority<T: Real>(err: &[T], totals: &[T], opts: &CubatureOptions<T>) -> f64 {
    err.iter()
        .enumerate()
        .map(|(i, &e)| {
            let scale = opts.tolerance(i, totals).max(T::min_positive_value());
            (e / scale).to_f64_lossy()
        })
        .fold(0.0, f64::max)
}

/// Integrate a `dim`-component integrand over the union of `initial` rectangles.
pub fn cubature<T, F>(initial: &[Rect<T>], dim: usize, f: F, opts: &CubatureOptions<T>) -> Cubature<T>
where
    T: Real,
    F: Fn([T; 2]) -> Vec<T> + Sync,
{
    let gm = GenzMalik::<T>::new();
    let mut seq: u64 = 0;
    let evaluated: Vec<_> = initial
        .par_iter()
        .map(|r| eval_rect(r, dim, &gm, &f))
        .collect();
    let mut slab: Vec<Option<Cell<T>>> = Vec::with_capacity(initial.len() * 4);
    for (root, (rect, (value, error, split))) in initial.iter().zip(evaluated).enumerate() {
        slab.push(Some(Cell {
            rect: *rect,
            root,
            seq,
            value,
            error,
            split,
        }));
        seq += 1;
    }

    let recompute = |slab: &[Option<Cell<T>>]| -> (Vec<T>, Vec<T>) {
        let live: Vec<&Cell<T>> = slab.iter().flatten().collect();
        (
            kahan_sum_vectors(dim, live.iter().map(|c| c.value.as_slice())),
            kahan_sum_vectors(dim, live.iter().map(|c| c.error.as_slice())),
        )
    };
    let (mut totals, mut total_err) = recompute(&slab);

    let mut heap = BinaryHeap::new();
    for (idx, cell) in slab.iter().enumerate() {
        let cell = cell.as_ref().unwrap();
        heap.push((
            Key {
                priority: priority(&cell.error, &totals, opts),
                seq: cell.seq,
            },
            idx,
        ));
    }

    let mut live = slab.len();
    let mut rounds = 0usize;
    let mut done = converged(&totals, &total_err, opts);
    while !done && live < opts.max_cells {
        if totals.iter().chain(&total_err).any(|x| !x.is_finite()) {
            break;
        }
        let take = opts.batch.max(1).min(opts.max_cells - live).min(heap.len());
        if take == 0 {
            break;
        }
        let mut parents = Vec::with_capacity(take);
        for _ in 0..take {
            let (_, idx) = heap.pop().unwrap();
            parents.push(slab[idx].take().unwrap());
        }
        let children: Vec<(Rect<T>, usize)> = parents
            .iter()
            .flat_map(|p| {
                let d = p.split;
                let mid = (p.rect.lo[d] + p.rect.hi[d]) * T::lit(0.5);
                let mut a = p.rect;
                let mut b = p.rect;
                a.hi[d] = mid;
                b.lo[d] = mid;
                [(a, p.root), (b, p.root)]
            })
            .collect();
        let results: Vec<_> = children
            .par_iter()
            .map(|(r, _)| eval_rect(r, dim, &gm, &f))
            .collect();
        for p in &parents {
            for i in 0..dim {
                totals[i] = totals[i] - p.value[i];
                total_err[i] = total_err[i] - p.error[i];
            }
        }
        for ((rect, root), (value, error, split)) in children.into_iter().zip(results) {
            for i in 0..dim {
                totals[i] = totals[i] + value[i];
                total_err[i] = total_err[i] + error[i];
            }
            let key = Key {
                priority: priority(&error, &totals, opts),
                seq,
            };
            slab.push(Some(Cell {
                rect,
                root,
                seq,
                value,
                error,
                split,
            }));
            heap.push((key, slab.len() - 1));
            seq += 1;
        }
        live += take;
        rounds += 1;
        if rounds % 64 == 0 {
            (totals, total_err) = recompute(&slab);
        }
        done = converged(&totals, &total_err, opts);
    }

    let mut cells: Vec<Cell<T>> = slab.into_iter().flatten().collect();
    cells.sort_by_key(|c| (c.root, c.seq));
    let values = kahan_sum_vectors(dim, cells.iter().map(|c| c.value.as_slice()));
    let errors = kahan_sum_vectors(dim, cells.iter().map(|c| c.error.as_slice()));
    let converged = converged(&values, &errors, opts);
    Cubature {
        values,
        errors,
        cells: cells.len(),
        converged,
    }
}

/// Adaptive Gauss–Kronrod 7/15 on `[a, b]`. Returns `(value, error)`.
pub fn integrate_1d<T, F>(f: F, a: T, b: T, rel_tol: T, abs_tol: T, max_intervals: usize) -> Result<(T, T)>
where
    T: Real,
    F: Fn(T) -> T,
{
    struct Piece<T> {
        a: T,
        b: T,
        v: T,
        e: T,
        seq: u64,
    }
    let (v0, e0) = gk15(&f, a, b);
    let mut pieces = vec![Some(Piece { a, b, v: v0, e: e0, seq: 0 })];
    let mut heap = BinaryHeap::new();
    heap.push((Key { priority: e0.to_f64_lossy(), seq: 0 }, 0usize));
    let mut seq = 1u64;
    let (mut total, mut err) = (v0, e0);
    let mut live = 1;
    while err > (rel_tol * total.abs()).max(abs_tol) {
        if live >= max_intervals || !total.is_finite() || !err.is_finite() {
            return Err(Error::BudgetExceeded {
                max_cells: max_intervals,
                estimate: total.to_f64_lossy(),
                error: err.to_f64_lossy(),
            });
        }
        let (_, idx) = heap.pop().unwrap();
        let p = pieces[idx].take().unwrap();
        let mid = (p.a + p.b) * T::lit(0.5);
        total = total - p.v;
        err = err - p.e;
        for (lo, hi) in [(p.a, mid), (mid, p.b)] {
            let (v, e) = gk15(&f, lo, hi);
            total = total + v;
            err = err + e;
            pieces.push(Some(Piece { a: lo, b: hi, v, e, seq }));
            heap.push((Key { priority: e.to_f64_lossy(), seq }, pieces.len() - 1));
            seq += 1;
        }
        live += 1;
    }
    let mut live_pieces: Vec<Piece<T>> = pieces.into_iter().flatten().collect();
    live_pieces.sort_by_key(|p| p.seq);
    let value = KahanSum::sum_iter(live_pieces.iter().map(|p| p.v));
    let error = KahanSum::sum_iter(live_pieces.iter().map(|p| p.e));
    Ok((value, error))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_area() {
        let r = cubature(
            &[Rect::new(0.0, 1.0, 1.0, 2.0)],
            1,
            |_| vec![1.0f64],
            &CubatureOptions::new(1e-10, 100),
        );
        assert!(r.converged);
        assert!((r.values[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn peaked_gaussian() {
        let r = cubature(
            &[Rect::new(-1.0, 1.0, -1.0, 1.0)],
            2,
            |p: [f64; 2]| {
                let g = (-(p[0] * p[0] + p[1] * p[1]) / 0.001).exp();
                vec![g, 2.0 * g]
            },
            &CubatureOptions::new(1e-8, 100_000),
        );
        let exact = std::f64::consts::PI * 0.001;
        assert!(r.converged);
        assert!((r.values[0] - exact).abs() < 1e-8 * exact * 10.0);
        assert!((r.values[1] - 2.0 * exact).abs() < 1e-7 * exact);
    }

    #[test]
    fn budget_flag() {
        let r = cubature(
            &[Rect::new(0.0, 1.0, 0.0, 1.0)],
            1,
            |p: [f64; 2]| vec![1.0 / (p[0] + p[1]).sqrt()],
            &CubatureOptions::new(1e-14, 20),
        );
        assert!(!r.converged);
        assert!(r.cells <= 20);
    }

    #[test]
    fn deterministic_across_pools() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    cubature(
                        &Rect::new(0.0, 3.0, 0.0, 2.0).grid(3, 2),
                        1,
                        |p: [f64; 2]| vec![(p[0] * p[1]).sin().abs().sqrt()],
                        &CubatureOptions::new(1e-9, 50_000),
                    )
                    .values[0]
            })
        };
        assert_eq!(run(1).to_bits(), run(4).to_bits());
    }

    #[test]
    fn one_dimensional() {
        let (v, _) = integrate_1d(|x: f64| 1.0 / (1.0 + x * x), -1e3, 1e3, 1e-12, 0.0, 10_000).unwrap();
        assert!((v - 2.0 * 1e3f64.atan()).abs() < 1e-10);
        let (v, _) = integrate_1d(|x: f64| x.sqrt(), 0.0, 1.0, 1e-10, 0.0, 10_000).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
        assert!(matches!(
            integrate_1d(|x: f64| 1.0 / x, 0.0, 1.0, 1e-10, 0.0, 50),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
