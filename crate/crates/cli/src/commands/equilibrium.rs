use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub mu: f64,
    pub u1: f64,
    pub u2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub delta: f64,
    /// Side-equation residuals; absent when the sides were given.
    pub residuals: Option<[f64; 2]>,
    pub hill: HillCoefficients,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HillCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub fn cmd_equilibrium(config: &RunConfig) -> Result<EquilibriumReport, CliError> {
    let model = config.model()?;
    let t = model.triangle;
    Ok(EquilibriumReport {
        mu: t.mu,
        u1: t.u1,
        u2: t.u2,
        lambda1: t.lambda1,
        lambda2: t.lambda2,
        delta: t.delta,
        residuals: model.residuals,
        hill: HillCoefficients {
            a: model.params.a(),
            b: model.params.b(),
            c: model.params.c(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bodies(c1: f64, c2: f64, c3: f64) -> RunConfig {
        RunConfig::from_json(&format!(
            r#"{{"schema": 1, "bodies": [
                {{"mass": 1.0, "radius": 0.1, "c20": {c1}}},
                {{"mass": 0.001, "radius": 0.1, "c20": {c2}}},
                {{"mass": 1e-9, "radius": 0.001, "c20": {c3}}}]}}"#
        ))
        .unwrap()
    }

    #[test]
    fn spherical_primaries_give_the_equilateral_triangle() {
        let r = cmd_equilibrium(&bodies(0.0, 0.0, 0.0)).unwrap();
        assert_eq!((r.u1, r.u2), (1.0, 1.0));
        assert!(r.residuals.unwrap().iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn equal_oblateness_gives_equal_sides() {
        let r = cmd_equilibrium(&bodies(-0.2, -0.2, -0.1)).unwrap();
        assert_eq!(r.u1, r.u2);
        assert!(r.u1 != 1.0);
    }

    #[test]
    fn hill_coefficients_follow_the_lambdas() {
        let r = cmd_equilibrium(&bodies(-0.1, 0.0, -0.1)).unwrap();
        assert!((r.hill.a - (1.0 - r.lambda2) / 2.0).abs() < 1e-15);
        assert!((r.hill.b - (1.0 - r.lambda1) / 2.0).abs() < 1e-15);
        // m3^{-2/3} C20 R² / 2 with m3 = 1e-9, R = 1e-3, C20 = -0.1.
        assert!((r.hill.c - 0.05).abs() < 1e-12);
    }
}
