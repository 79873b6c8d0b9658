//! Bisection for the extremal distance `inf{ε > 0 : Φ(ε) < ∞}`.
//!
//! `Φ` is antitone in `ε`, so a convergent probe moves the upper end of the
//! bracket down and a non-convergent probe moves the lower end up.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::quad::ladder::{ConvergenceVerdict, LadderReport};
use crate::scalar::Real;

/// How an inconclusive probe is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InconclusivePolicy {
    /// Biases the distance upward; never reports a smaller distance than justified.
    #[default]
    AsDivergent,
    AsConvergent,
}

impl InconclusivePolicy {
    pub fn coerce(self, v: ConvergenceVerdict) -> ConvergenceVerdict {
        match (v, self) {
            (ConvergenceVerdict::Inconclusive, Self::AsDivergent) => ConvergenceVerdict::Divergent,
            (ConvergenceVerdict::Inconclusive, Self::AsConvergent) => ConvergenceVerdict::Convergent,
            (v, _) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe<T> {
    pub eps: T,
    /// Verdict of the ladder before coercion.
    pub verdict: ConvergenceVerdict,
    /// Verdict used by the bisection.
    pub decided: ConvergenceVerdict,
    pub report: LadderReport<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceEstimate<T> {
    pub eps_lo: T,
    pub eps_hi: T,
    pub norm_inf: T,
    pub probes: Vec<Probe<T>>,
    pub policy: InconclusivePolicy,
}

impl<T: Real> DistanceEstimate<T> {
    pub fn contains(&self, x: T) -> bool {
        self.eps_lo <= x && x <= self.eps_hi
    }

    pub fn width(&self) -> T {
        self.eps_hi - self.eps_lo
    }

    /// Every probe at or below `eps_lo` was non-convergent and every probe at or
    /// above `eps_hi` convergent.
    pub fn is_consistent(&self) -> bool {
        self.probes.iter().all(|p| {
            let conv = p.decided == ConvergenceVerdict::Convergent;
            (p.eps <= self.eps_lo && !conv) || (p.eps >= self.eps_hi && conv)
        })
    }
}

/// Bisection settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectOptions<T> {
    /// Upper end of the initial bracket is `(1 + margin) · norm_inf`.
    pub margin: T,
    /// Stop once the bracket is at most `eps_tol · norm_inf` wide.
    pub eps_tol: T,
    pub policy: InconclusivePolicy,
}

impl<T: Real> Default for BisectOptions<T> {
    fn default() -> Self {
        Self {
            margin: T::lit(0.1),
            eps_tol: T::lit(1.0 / 128.0),
            policy: InconclusivePolicy::AsDivergent,
        }
    }
}

/// Bisect on `[0, (1 + margin) · norm_inf]` with the given probe.
pub fn bisect<T, F>(norm_inf: T, opts: &BisectOptions<T>, mut probe: F) -> Result<DistanceEstimate<T>>
where
    T: Real,
    F: FnMut(T) -> Result<LadderReport<T>>,
{
    let mut lo = T::zero();
    let mut hi = (T::one() + opts.margin) * norm_inf;
    let mut probes = Vec::new();
    let width = opts.eps_tol * norm_inf;
    while hi - lo > width {
        let mid = (lo + hi) * T::lit(0.5);
        let report = probe(mid)?;
        let verdict = report.verdict;
        let decided = opts.policy.coerce(verdict);
        if decided == ConvergenceVerdict::Convergent {
            hi = mid;
        } else {
            lo = mid;
        }
        probes.push(Probe {
            eps: mid,
            verdict,
            decided,
            report,
        });
    }
    Ok(DistanceEstimate {
        eps_lo: lo,
        eps_hi: hi,
        norm_inf,
        probes,
        policy: opts.policy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::ladder::ClassifyOptions;

    fn fake(threshold: f64) -> impl FnMut(f64) -> Result<LadderReport<f64>> {
        move |eps| {
            let vals: Vec<f64> = if eps >= threshold {
                vec![1.0, 1.5, 1.75, 1.875, 1.9375]
            } else {
                vec![1.0, 2.0, 3.0, 4.0, 5.0]
            };
            Ok(LadderReport::from_levels(
                (1..=5).collect(),
                vals,
                vec![0.0; 5],
                vec![true; 5],
                &ClassifyOptions::default(),
            ))
        }
    }

    #[test]
    fn brackets_a_threshold() {
        let est = bisect(1.0, &BisectOptions::default(), fake(0.37)).unwrap();
        assert!(est.contains(0.37));
        assert!(est.width() <= 1.0 / 128.0);
        assert!(est.is_consistent());
        let zero = bisect(1.0, &BisectOptions::default(), fake(0.0)).unwrap();
        assert_eq!(zero.eps_lo, 0.0);
    }

    #[test]
    fn coercion() {
        assert_eq!(
            InconclusivePolicy::AsDivergent.coerce(ConvergenceVerdict::Inconclusive),
            ConvergenceVerdict::Divergent
        );
        assert_eq!(
            InconclusivePolicy::AsConvergent.coerce(ConvergenceVerdict::Inconclusive),
            ConvergenceVerdict::Convergent
        );
    }
}
