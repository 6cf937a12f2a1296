//! Experiment documents.
//!
//! Configs are JSON. Region and bifunction descriptors are flat objects with
//! a `type` key so that parse errors can name the exact offending path.

use std::path::PathBuf;

use hypequil::bifunction::NonNegative;
use hypequil::harness::HarnessConfig;
use hypequil::region::Positive;
use hypequil::{Bifunction, BifunctionSpec, Combine, ConvexRegion, HPoint, LambdaSchedule, Objective, SolverOptions, Term};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Resolve,
    Ppa,
    Verify,
    GridOracle,
}

impl std::str::FromStr for Task {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        serde_json::from_value(serde_json::Value::String(s.into()))
            .map_err(|_| format!("unknown task `{s}` (expected resolve, ppa, verify or grid-oracle)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Ball,
    Halfspace,
    Intersection,
    Whole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    #[serde(rename = "type")]
    pub kind: RegionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<HPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<Positive>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<RegionConfig>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BifunctionKind {
    Zero,
    ObjectiveDiff,
    GainWeighted,
    MaxDiff,
    Distance,
    NegSquaredDistance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BifunctionConfig {
    #[serde(rename = "type")]
    pub kind: BifunctionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<Term>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combine: Option<Combine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<NonNegative>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Objective>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Objective>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<NonNegative>,
}

fn default_stop_tol() -> f64 {
    1e-10
}
fn default_max_steps() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PpaConfig {
    #[serde(default)]
    pub schedule: LambdaSchedule,
    #[serde(default = "default_stop_tol")]
    pub stop_tol: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// Record per-step wall-clock times; off by default to keep traces reproducible.
    #[serde(default)]
    pub timing: bool,
}

impl Default for PpaConfig {
    fn default() -> Self {
        PpaConfig {
            schedule: LambdaSchedule::default(),
            stop_tol: default_stop_tol(),
            max_steps: default_max_steps(),
            timing: false,
        }
    }
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimension: usize,
    pub region: RegionConfig,
    pub bifunction: BifunctionConfig,
    pub task: Task,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Drives `solver.seed` and `harness.seed`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub plot: bool,
    /// The point `x` to resolve, or the PPA start. Defaults to the origin.
    #[serde(default)]
    pub point: Option<HPoint>,
    #[serde(default)]
    pub ppa: PpaConfig,
    #[serde(default)]
    pub harness: HarnessConfig,
}

/// Strict parse followed by validation; the result has every default filled in.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(path, e.into_inner().to_string())
    })?;
    cfg.normalize()?;
    Ok(cfg)
}

impl ExperimentConfig {
    /// Validates invariants and materializes defaults.
    pub fn normalize(&mut self) -> Result<()> {
        if self.dimension < 2 {
            return Err(CliError::config("dimension", format!("must be at least 2, got {}", self.dimension)));
        }
        for (path, sub) in [("solver.seed", self.solver.seed), ("harness.seed", self.harness.seed)] {
            if sub != 0 && sub != self.seed {
                return Err(CliError::config(path, "conflicts with the top-level seed; set `seed` instead"));
            }
        }
        self.set_seed(self.seed);
        self.solver.validate().map_err(|e| CliError::config("solver", e.to_string()))?;
        self.region.check("region", self.dimension)?;
        self.bifunction.normalize("bifunction", self.dimension)?;
        let point = self.point.get_or_insert_with(|| HPoint::origin(self.dimension));
        if point.dim() != self.dimension {
            return Err(CliError::config("point", format!("expected dimension {}, got {}", self.dimension, point.dim())));
        }
        self.ppa.schedule.validate().map_err(|e| CliError::config("ppa.schedule", e.to_string()))?;
        if !(self.ppa.stop_tol.is_finite() && self.ppa.stop_tol > 0.0) {
            return Err(CliError::config("ppa.stop_tol", "must be positive"));
        }
        if self.ppa.max_steps == 0 {
            return Err(CliError::config("ppa.max_steps", "must be positive"));
        }
        Ok(())
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.solver.seed = seed;
        self.harness.seed = seed;
    }

    pub fn build_region(&self) -> Result<ConvexRegion> {
        self.region.build(self.dimension)
    }

    pub fn build_bifunction(&self) -> Result<Bifunction> {
        Ok(self.bifunction.to_spec()?.into())
    }

    pub fn point(&self) -> HPoint {
        self.point.clone().unwrap_or_else(|| HPoint::origin(self.dimension))
    }

    /// Pretty JSON of the effective config.
    pub fn echo(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize") + "\n"
    }
}

fn require<'a, T>(v: &'a Option<T>, path: &str, kind: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| CliError::config(path, format!("required for type {kind}")))
}

fn forbid<T>(v: &Option<T>, path: &str, kind: &str) -> Result<()> {
    match v {
        Some(_) => Err(CliError::config(path, format!("not allowed for type {kind}"))),
        None => Ok(()),
    }
}

fn check_dim(p: &HPoint, path: &str, dim: usize) -> Result<()> {
    if p.dim() == dim {
        Ok(())
    } else {
        Err(CliError::config(path, format!("expected dimension {dim}, got {}", p.dim())))
    }
}

impl RegionConfig {
    fn check(&self, path: &str, dim: usize) -> Result<()> {
        let at = |key: &str| format!("{path}.{key}");
        let kind = format!("{:?}", self.kind).to_lowercase();
        let ball = self.kind == RegionKind::Ball;
        let half = self.kind == RegionKind::Halfspace;
        let inter = self.kind == RegionKind::Intersection;
        if ball {
            check_dim(require(&self.center, &at("center"), &kind)?, &at("center"), dim)?;
            require(&self.radius, &at("radius"), &kind)?;
        } else {
            forbid(&self.center, &at("center"), &kind)?;
            forbid(&self.radius, &at("radius"), &kind)?;
        }
        if half {
            let n = require(&self.normal, &at("normal"), &kind)?;
            if n.len() != dim + 1 {
                return Err(CliError::config(at("normal"), format!("expected {} coordinates, got {}", dim + 1, n.len())));
            }
        } else {
            forbid(&self.normal, &at("normal"), &kind)?;
        }
        if inter {
            let members = require(&self.members, &at("members"), &kind)?;
            for (i, m) in members.iter().enumerate() {
                m.check(&format!("{path}.members[{i}]"), dim)?;
            }
        } else {
            forbid(&self.members, &at("members"), &kind)?;
        }
        self.build(dim).map(|_| ()).map_err(|e| match e {
            CliError::Core(c) => CliError::config(path, c.to_string()),
            other => other,
        })
    }

    pub fn build(&self, dim: usize) -> Result<ConvexRegion> {
        let missing = || CliError::config("region", "incomplete descriptor");
        Ok(match self.kind {
            RegionKind::Ball => ConvexRegion::ball(
                self.center.clone().ok_or_else(missing)?,
                self.radius.ok_or_else(missing)?.get(),
            )?,
            RegionKind::Halfspace => ConvexRegion::half_space(self.normal.clone().ok_or_else(missing)?)?,
            RegionKind::Intersection => ConvexRegion::intersection(
                self.members
                    .as_ref()
                    .ok_or_else(missing)?
                    .iter()
                    .map(|m| m.build(dim))
                    .collect::<Result<_>>()?,
            )?,
            RegionKind::Whole => ConvexRegion::WholeSpace { dim },
        })
    }
}

impl BifunctionConfig {
    fn normalize(&mut self, path: &str, dim: usize) -> Result<()> {
        let at = |key: &str| format!("{path}.{key}");
        let kind = serde_json::to_value(self.kind).expect("kind serializes");
        let kind = kind.as_str().unwrap_or_default().to_string();
        let uses_terms = matches!(self.kind, BifunctionKind::ObjectiveDiff | BifunctionKind::GainWeighted);
        if uses_terms {
            let terms = require(&self.terms, &at("terms"), &kind)?;
            for (i, t) in terms.iter().enumerate() {
                check_dim(&t.anchor, &format!("{path}.terms[{i}].anchor"), dim)?;
            }
            self.combine.get_or_insert(Combine::Sum);
        } else {
            forbid(&self.terms, &at("terms"), &kind)?;
            forbid(&self.combine, &at("combine"), &kind)?;
        }
        if self.kind == BifunctionKind::GainWeighted {
            require(&self.gain, &at("gain"), &kind)?;
        } else {
            forbid(&self.gain, &at("gain"), &kind)?;
        }
        if self.kind == BifunctionKind::MaxDiff {
            for (key, obj) in [("g", &self.g), ("h", &self.h)] {
                for (i, t) in require(obj, &at(key), &kind)?.terms.iter().enumerate() {
                    check_dim(&t.anchor, &format!("{path}.{key}.terms[{i}].anchor"), dim)?;
                }
            }
            require(&self.c, &at("c"), &kind)?;
        } else {
            forbid(&self.g, &at("g"), &kind)?;
            forbid(&self.h, &at("h"), &kind)?;
            forbid(&self.c, &at("c"), &kind)?;
        }
        Ok(())
    }

    pub fn to_spec(&self) -> Result<BifunctionSpec> {
        let missing = || CliError::config("bifunction", "incomplete descriptor");
        let terms = || self.terms.clone().ok_or_else(missing);
        let combine = self.combine.unwrap_or_default();
        Ok(match self.kind {
            BifunctionKind::Zero => BifunctionSpec::Zero {},
            BifunctionKind::ObjectiveDiff => BifunctionSpec::ObjectiveDiff { terms: terms()?, combine },
            BifunctionKind::GainWeighted => BifunctionSpec::GainWeighted {
                terms: terms()?,
                combine,
                gain: self.gain.ok_or_else(missing)?,
            },
            BifunctionKind::MaxDiff => BifunctionSpec::MaxDiff {
                g: self.g.clone().ok_or_else(missing)?,
                h: self.h.clone().ok_or_else(missing)?,
                c: self.c.ok_or_else(missing)?,
            },
            BifunctionKind::Distance => BifunctionSpec::Distance,
            BifunctionKind::NegSquaredDistance => BifunctionSpec::NegSquaredDistance,
        })
    }
}
