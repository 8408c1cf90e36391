//! JSON run configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use hill_core::dynamics::hill_params_from_equilibrium;
use hill_core::equilibrium::{rescale_oblateness, OblateBody, TriangleConfig};
use hill_core::integrator::CollisionRunOptions;
use hill_core::rational::parse_rational;
use hill_core::{ExponentMode, HillParams, Rational};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bodies: Option<[OblateBody; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct: Option<DirectConfig>,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Equilibrium given by its mass ratio and sides; λ's are computed unless
/// given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectConfig {
    pub mu: f64,
    pub u1: f64,
    pub u2: f64,
    #[serde(default)]
    pub lambda1: Option<f64>,
    #[serde(default)]
    pub lambda2: Option<f64>,
    /// Hill-rescaled oblateness of the tertiary; `c = −c3`.
    pub c3: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default)]
    pub nu: Option<RationalSpec>,
    #[serde(default)]
    pub alpha: Option<RationalSpec>,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub mode: Option<ExponentMode>,
}

/// Exact exponent written either as a JSON integer or as a string such
/// as `"4/3"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalSpec {
    Int(i64),
    Text(String),
}

impl RationalSpec {
    pub fn value(&self) -> Result<Rational, CliError> {
        match self {
            RationalSpec::Int(n) => Ok(Rational::from_integer(*n)),
            RationalSpec::Text(s) => Ok(parse_rational(s)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub tau_max: f64,
    pub r_floor: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        let d = CollisionRunOptions::default();
        IntegratorConfig {
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            tau_max: d.tau_max,
            r_floor: d.r_floor,
        }
    }
}

impl IntegratorConfig {
    pub fn run_options(&self) -> CollisionRunOptions {
        CollisionRunOptions {
            tau_max: self.tau_max,
            r_floor: self.r_floor,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Svg => "svg",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

/// Physical model derived from a validated config.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub triangle: TriangleConfig,
    /// Side-equation residuals when the sides were solved for (`bodies`).
    pub residuals: Option<[f64; 2]>,
    pub c3: f64,
    pub params: HillParams,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Schema checks that need no numerics.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        match (&self.bodies, &self.direct) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage(
                    "config has both `bodies` and `direct`".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Usage(
                    "config needs one of `bodies` or `direct`".into(),
                ))
            }
            _ => {}
        }
        if let Some(bodies) = &self.bodies {
            for b in bodies {
                b.validate()?;
            }
            let [b1, b2, b3] = bodies;
            if !(b1.mass > b2.mass && b2.mass > b3.mass) {
                return Err(CliError::Usage(format!(
                    "masses must satisfy m1 > m2 > m3, got {}, {}, {}",
                    b1.mass, b2.mass, b3.mass
                )));
            }
        }
        if let Some(d) = &self.direct {
            if d.lambda1.is_some() != d.lambda2.is_some() {
                return Err(CliError::Usage(
                    "`direct` needs both lambda1 and lambda2 or neither".into(),
                ));
            }
        }
        let i = &self.integrator;
        if !(i.rel_tol > 0.0 && i.abs_tol > 0.0) {
            return Err(CliError::Usage(
                "integrator tolerances must be positive".into(),
            ));
        }
        if !(i.r_floor > 0.0) {
            return Err(CliError::Usage(
                "integrator.r_floor must be positive".into(),
            ));
        }
        if !i.tau_max.is_finite() || i.tau_max == 0.0 {
            return Err(CliError::Usage(
                "integrator.tau_max must be finite and nonzero".into(),
            ));
        }
        for (name, spec) in [("nu", &self.overrides.nu), ("alpha", &self.overrides.alpha)] {
            if let Some(spec) = spec {
                spec.value()
                    .map_err(|e| CliError::Usage(format!("overrides.{name}: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn nu(&self) -> Result<Rational, CliError> {
        self.overrides
            .nu
            .as_ref()
            .map_or(Ok(Rational::from_integer(1)), |s| s.value())
    }

    pub fn alpha(&self) -> Result<Rational, CliError> {
        self.overrides
            .alpha
            .as_ref()
            .map_or(Ok(Rational::from_integer(3)), |s| s.value())
    }

    /// Solves (or reads) the equilibrium and assembles the Hill parameters.
    pub fn model(&self) -> Result<Model, CliError> {
        let (triangle, residuals, c3) = match (&self.bodies, &self.direct) {
            (Some(bodies), _) => {
                let triangle = TriangleConfig::from_bodies(bodies)?;
                let [b1, b2, b3] = bodies;
                let rhs = 1.0 - 3.0 * (b1.zonal() + b2.zonal());
                let res = [
                    side_residual(triangle.u1, b1.zonal() + b3.zonal(), rhs),
                    side_residual(triangle.u2, b2.zonal() + b3.zonal(), rhs),
                ];
                (
                    triangle,
                    Some(res),
                    rescale_oblateness(b3.c20, b3.radius, b3.mass)?,
                )
            }
            (None, Some(d)) => {
                let mut triangle = TriangleConfig::from_sides(d.mu, d.u1, d.u2)?;
                if let (Some(l1), Some(l2)) = (d.lambda1, d.lambda2) {
                    triangle.lambda1 = l1;
                    triangle.lambda2 = l2;
                }
                (triangle, None, d.c3)
            }
            (None, None) => unreachable!("validated config"),
        };
        let base = hill_params_from_equilibrium(&triangle, c3)?;
        let c = self.overrides.c.unwrap_or(base.c());
        let mode = self.overrides.mode.unwrap_or(ExponentMode::Standard);
        let params = HillParams::with_mode(base.a(), base.b(), c, self.nu()?, self.alpha()?, mode)?;
        Ok(Model {
            triangle,
            residuals,
            c3,
            params,
        })
    }
}

fn side_residual(u: f64, coupling: f64, rhs: f64) -> f64 {
    hill_core::equilibrium::side_residual(u, coupling, rhs).unwrap_or(f64::NAN)
}
