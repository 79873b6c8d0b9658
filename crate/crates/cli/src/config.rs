//! Run configuration: one JSON document per invocation.

use std::path::Path;

use bergman_extremal::ball::sampling::BallQuad;
use bergman_extremal::catalog::{Domain, FunctionKind, TestFunction};
use bergman_extremal::quad::{ClassifyOptions, QuadSettings, RegionFamily, TruncationLadder};
use bergman_extremal::{BallParams, Error, HalfPlaneParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainName {
    Halfplane,
    Ball,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    #[serde(flatten)]
    pub kind: FunctionKind<f64>,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

fn default_n() -> usize {
    1
}

/// Space parameters; which ones are required depends on the command.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderSpec {
    pub base: f64,
    pub min_exp: i32,
    pub max_exp: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadSpec {
    pub tol: f64,
    pub max_cells: usize,
    pub rho: f64,
    pub diverge: f64,
    pub tol_tail: f64,
    pub min_levels: usize,
    pub theta_cells: usize,
    /// Strata per axis for ball Monte Carlo (`n = 2`).
    pub strata: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        let q = QuadSettings::<f64>::default();
        Self {
            tol: q.tol,
            max_cells: q.max_cells,
            rho: q.classify.rho,
            diverge: q.classify.diverge,
            tol_tail: q.classify.tol_tail,
            min_levels: q.classify.min_levels,
            theta_cells: q.theta_cells,
            strata: BallQuad::<f64>::default().strata,
        }
    }
}

/// `[x0, x1] × [y0, y1]`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

/// Command-specific inputs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Payload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Evaluation points: `[re, im]` on ℂ₊ or the disk, `[re1, im1, re2, im2]` in ℂ².
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub viewport: Option<Viewport>,
    /// `[width, height]` in pixels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<[u32; 2]>,
    /// Whitney enlargement factor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<usize>,
    /// Kernel exponent of the scale-invariant kernel integral.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_exp: Option<f64>,
    /// Radial levels `m` for points `(1 − 2^{−m}) e₁`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial_levels: Option<Vec<i32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainName,
    #[serde(default = "default_n")]
    pub n: usize,
    pub function: FunctionSpec,
    #[serde(default)]
    pub params: ParamSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<LadderSpec>,
    /// Overrides the command's own quadrature defaults.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad: Option<QuadSpec>,
    #[serde(default)]
    pub payload: Payload,
    #[serde(default)]
    pub seed: u64,
}

fn missing(name: &str) -> CliError {
    CliError::Core(Error::HypothesisViolation(format!("parameter `{name}` is required")))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn sha256(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn domain(&self) -> Domain {
        match self.domain {
            DomainName::Halfplane => Domain::HalfPlane,
            DomainName::Ball => Domain::Ball { n: self.n },
        }
    }

    pub fn function(&self) -> Result<TestFunction<f64>, CliError> {
        let f = TestFunction::new(self.domain(), self.function.kind.clone())?;
        Ok(f.scaled(self.function.scale))
    }

    pub fn halfplane_params(&self) -> Result<HalfPlaneParams<f64>, CliError> {
        let p = &self.params;
        Ok(HalfPlaneParams::validate(
            p.q.ok_or_else(|| missing("q"))?,
            p.nu.ok_or_else(|| missing("nu"))?,
            p.beta.ok_or_else(|| missing("beta"))?,
        )?)
    }

    pub fn ball_params(&self) -> Result<BallParams<f64>, CliError> {
        let p = &self.params;
        Ok(BallParams::validate(
            self.n,
            p.q.ok_or_else(|| missing("q"))?,
            p.s.ok_or_else(|| missing("s"))?,
            p.t.ok_or_else(|| missing("t"))?,
        )?)
    }

    pub fn require(&self, name: &str, v: Option<f64>) -> Result<f64, CliError> {
        v.ok_or_else(|| missing(name))
    }

    pub fn ladder(&self) -> Result<TruncationLadder<f64>, CliError> {
        let family = match self.domain {
            DomainName::Halfplane => RegionFamily::HalfPlaneSectors,
            DomainName::Ball => RegionFamily::BallShells,
        };
        Ok(match self.ladder {
            Some(l) => TruncationLadder::new(l.base, l.min_exp, l.max_exp, family)?,
            None if family == RegionFamily::HalfPlaneSectors => TruncationLadder::halfplane_default(),
            None => TruncationLadder::ball_default(),
        })
    }

    pub fn settings_or(&self, base: QuadSettings<f64>) -> QuadSettings<f64> {
        let Some(q) = &self.quad else {
            return base;
        };
        QuadSettings {
            tol: q.tol,
            max_cells: q.max_cells,
            classify: ClassifyOptions {
                rho: q.rho,
                diverge: q.diverge,
                tol_tail: q.tol_tail,
                min_levels: q.min_levels,
            },
            theta_cells: q.theta_cells,
        }
    }

    /// Ball settings seeded with the run seed.
    pub fn ball_quad_or(&self, base: BallQuad<f64>) -> BallQuad<f64> {
        BallQuad {
            quad: self.settings_or(base.quad),
            strata: self.quad.map_or(base.strata, |q| q.strata),
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "domain": "halfplane",
        "function": {"kind": "pure_power", "t": 1.0},
        "params": {"q": 2.0, "nu": 0.0, "beta": 1.0},
        "payload": {"eps": 0.5}
    }"#;

    #[test]
    fn round_trip() {
        let cfg: RunConfig = serde_json::from_str(SAMPLE).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.sha256(), back.sha256());
        assert_eq!(cfg.halfplane_params().unwrap().t, 1.0);
    }

    #[test]
    fn ball_config() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"domain": "ball", "n": 1, "function": {"kind": "ball_pole", "s": 1.0, "scale": 3.0},
                "params": {"q": 2.0, "s": 1.0, "t": 2.0}}"#,
        )
        .unwrap();
        let f = cfg.function().unwrap();
        assert_eq!(f.scale, 3.0);
        assert!(cfg.ball_params().is_ok());
        assert_eq!(cfg.ladder().unwrap().family, RegionFamily::BallShells);
    }

    #[test]
    fn invalid_inputs() {
        let mut cfg: RunConfig = serde_json::from_str(SAMPLE).unwrap();
        cfg.params.beta = Some(0.0);
        assert!(matches!(cfg.halfplane_params(), Err(CliError::Core(Error::HypothesisViolation(_)))));
        cfg.params.beta = None;
        assert!(cfg.halfplane_params().is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"domain": "disk", "function": {"kind": "zero"}}"#).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn opt() -> impl Strategy<Value = Option<f64>> {
            proptest::option::of(-1e6f64..1e6)
        }

        prop_compose! {
            fn configs()(
                ball in any::<bool>(),
                a in 0.01f64..10.0,
                scale in -1e3f64..1e3,
                p in (opt(), opt(), opt(), opt()),
                eps in opt(),
                res in proptest::option::of((1u32..4096, 1u32..4096)),
                levels in proptest::option::of(proptest::collection::vec(-20i32..20, 0..6)),
                tol in 1e-9f64..1e-1,
                seed in any::<u64>(),
            ) -> RunConfig {
                let (domain, kind) = if ball {
                    (DomainName::Ball, FunctionKind::BallPole { s: a })
                } else {
                    (DomainName::Halfplane, FunctionKind::PowerShift { a })
                };
                RunConfig {
                    domain,
                    n: 1,
                    function: FunctionSpec { kind, scale },
                    params: ParamSpec { q: p.0, nu: p.1, beta: p.2, t: p.3, ..ParamSpec::default() },
                    ladder: Some(LadderSpec { base: 2.0, min_exp: 1, max_exp: 12 }),
                    quad: Some(QuadSpec { tol, ..QuadSpec::default() }),
                    payload: Payload {
                        eps,
                        resolution: res.map(|(w, h)| [w, h]),
                        radial_levels: levels,
                        ..Payload::default()
                    },
                    seed,
                }
            }
        }

        proptest! {
            #[test]
            fn json_round_trip_is_identity(cfg in configs()) {
                let text = serde_json::to_string(&cfg).unwrap();
                let back: RunConfig = serde_json::from_str(&text).unwrap();
                prop_assert_eq!(&back, &cfg);
                prop_assert_eq!(back.sha256(), cfg.sha256());
            }
        }
    }
}
