use std::path::Path;

use serde::{Deserialize, Serialize};

use aniso_core::solver::{BoundaryCondition, ProblemSpec, Source};
use aniso_core::verify::LocalBall;
use aniso_core::{AnisotropicNorm, Domain2D, StressOperator, YoungFunction};

/// Everything a run can be configured with; flags override the file.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub jobs: Option<usize>,
    pub h: Option<Vec<f64>>,
    pub eps_ladder: Option<Vec<f64>>,
    pub epsilons: Option<Vec<f64>>,
    pub bc: Option<String>,
    pub radii: Option<Vec<f64>>,
    pub fields: Option<usize>,
    pub resolution: Option<usize>,
    pub domain: Option<DomainConfig>,
    pub norm: Option<NormConfig>,
    pub young: Option<YoungConfig>,
    pub source: Option<SourceConfig>,
    pub balls: Option<Vec<BallConfig>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainConfig {
    Disk { radius: f64 },
    Ellipse { a: f64, b: f64 },
    Superellipse { a: f64, b: f64, m: u32 },
    Square { side: f64 },
    Regular { sides: usize, radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum NormConfig {
    Euclidean,
    Weighted { weights: Vec<f64> },
    Blend { p: f64, q: f64, alpha: f64, beta: f64 },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum YoungConfig {
    Power { p: f64 },
    PowerLog { p: f64, q: f64, c: f64 },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SourceConfig {
    Constant { value: f64 },
    Bump { amplitude: f64, width: f64 },
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BallConfig {
    pub center: [f64; 2],
    pub radius: f64,
}

/// A user-facing configuration problem; always exits with status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<aniso_core::Error> for ConfigError {
    fn from(e: aniso_core::Error) -> Self {
        ConfigError(e.to_string())
    }
}

pub fn load(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Err(ConfigError(format!("{}: configuration is empty, nothing to run", path.display())));
    }
    let table: toml::Table =
        toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    if table.is_empty() {
        return Err(ConfigError(format!("{}: configuration has no keys, nothing to run", path.display())));
    }
    toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

pub fn domain_from_flag(name: &str, r: f64) -> Result<DomainConfig, ConfigError> {
    Ok(match name {
        "disk" => DomainConfig::Disk { radius: r },
        "ellipse" => DomainConfig::Ellipse { a: 2.0 * r, b: r },
        "superellipse" => DomainConfig::Superellipse { a: r, b: r, m: 4 },
        "square" => DomainConfig::Square { side: 2.0 * r },
        "hexagon" => DomainConfig::Regular { sides: 6, radius: r },
        other => {
            return Err(ConfigError(format!(
                "unknown domain '{other}' (expected disk, ellipse, superellipse, square or hexagon)"
            )))
        }
    })
}

pub fn norm_from_flag(name: &str) -> Result<NormConfig, ConfigError> {
    Ok(match name {
        "euclidean" => NormConfig::Euclidean,
        "weighted" => NormConfig::Weighted { weights: vec![4.0, 1.0] },
        "blend" => NormConfig::Blend { p: 4.0, q: 4.0, alpha: 1.0, beta: 1.0 },
        other => return Err(ConfigError(format!("unknown norm '{other}' (expected euclidean, weighted or blend)"))),
    })
}

pub fn source_from_flag(name: &str) -> Result<SourceConfig, ConfigError> {
    if name == "bump" {
        return Ok(SourceConfig::Bump { amplitude: 4.0, width: 8.0 });
    }
    name.parse::<f64>()
        .map(|value| SourceConfig::Constant { value })
        .map_err(|_| ConfigError(format!("source must be 'bump' or a number, got '{name}'")))
}

impl Config {
    pub fn build_domain(&self) -> Result<Domain2D, ConfigError> {
        let d = self.domain.clone().unwrap_or(DomainConfig::Disk { radius: 1.0 });
        Ok(match d {
            DomainConfig::Disk { radius } => Domain2D::disk(radius)?,
            DomainConfig::Ellipse { a, b } => Domain2D::ellipse(a, b)?,
            DomainConfig::Superellipse { a, b, m } => Domain2D::superellipse(a, b, m)?,
            DomainConfig::Square { side } => Domain2D::square(side)?,
            DomainConfig::Regular { sides, radius } => Domain2D::regular_polygon(sides, radius)?,
            DomainConfig::Polygon { vertices } => Domain2D::polygon(vertices)?,
        })
    }

    pub fn build_norm(&self) -> Result<Option<AnisotropicNorm>, ConfigError> {
        Ok(match &self.norm {
            None => None,
            Some(NormConfig::Euclidean) => Some(AnisotropicNorm::euclidean(2)?),
            Some(NormConfig::Weighted { weights }) => Some(AnisotropicNorm::weighted_quadratic(weights)?),
            Some(NormConfig::Blend { p, q, alpha, beta }) => Some(AnisotropicNorm::blend(2, *p, *q, *alpha, *beta)?),
        })
    }

    pub fn build_young(&self) -> Result<Option<YoungFunction>, ConfigError> {
        Ok(match &self.young {
            None => None,
            Some(YoungConfig::Power { p }) => Some(YoungFunction::power(*p)?),
            Some(YoungConfig::PowerLog { p, q, c }) => Some(YoungFunction::power_log(*p, *q, *c)?),
        })
    }

    pub fn build_source(&self) -> Source {
        match self.source {
            None => Source::Constant(4.0),
            Some(SourceConfig::Constant { value }) => Source::Constant(value),
            Some(SourceConfig::Bump { amplitude, width }) => Source::Bump { amplitude, width },
        }
    }

    pub fn build_bc(&self) -> Result<BoundaryCondition, ConfigError> {
        match self.bc.as_deref().unwrap_or("dirichlet") {
            "dirichlet" => Ok(BoundaryCondition::Dirichlet),
            "neumann" => Ok(BoundaryCondition::Neumann),
            other => Err(ConfigError(format!("bc must be 'dirichlet' or 'neumann', got '{other}'"))),
        }
    }

    /// Problem with defaults euclidean norm, `p = 2`, `f = 4`, Dirichlet data.
    pub fn build_spec(&self) -> Result<ProblemSpec, ConfigError> {
        let norm = self.build_norm()?.unwrap_or(AnisotropicNorm::euclidean(2)?);
        let young = self.build_young()?.unwrap_or(YoungFunction::power(2.0)?);
        let mut spec = ProblemSpec::new(StressOperator::new(norm, young), self.build_domain()?, self.build_source(), self.build_bc()?)?;
        if let Some(ladder) = &self.eps_ladder {
            spec = spec.with_ladder(ladder.clone())?;
        }
        Ok(spec)
    }

    pub fn mesh_sizes(&self, default: &[f64]) -> Vec<f64> {
        self.h.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn local_balls(&self) -> Vec<LocalBall> {
        match &self.balls {
            Some(b) => b.iter().map(|b| LocalBall { center: b.center, radius: b.radius }).collect(),
            None => [0.2, 0.3].iter().map(|&radius| LocalBall { center: [0.0, 0.0], radius }).collect(),
        }
    }
}
