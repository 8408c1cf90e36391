use std::io::Write;

use hill_core::dynamics::{hamiltonian, vector_field};
use hill_core::integrator::{
    integrate, integrate_to_collision, CollisionRunOptions, IntegrationFailure, Options, Solution,
    Verdict,
};
use hill_core::mcgehee::{energy_residual, from_mcgehee, recover_physical_time};
use hill_core::{CartesianState, HillParams, McGeheeState};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Coords {
    Cartesian,
    Mcgehee,
}

/// Initial state `[x1, x2, y1, y2]` or `[r, θ, v, w]` and the span in t or τ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateRequest {
    pub coords: Coords,
    pub state0: [f64; 4],
    pub span: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureInfo {
    pub kind: String,
    pub message: String,
}

/// Thresholds behind the collision verdict, reported because the verdict
/// is a numerical heuristic rather than a proof.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerdictCriteria {
    pub heuristic: bool,
    pub r_floor: f64,
    pub r_ceiling: f64,
    pub window_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropagateSummary {
    pub coords: Coords,
    pub samples: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub start: f64,
    pub end: f64,
    /// `H` at the initial state (Cartesian) or the energy level `h` of the
    /// initial state (McGehee; 0 when it starts on the collision manifold).
    pub energy: f64,
    /// `max |H − H₀|` or `max |residual − residual₀|` over the samples.
    pub max_drift: f64,
    pub final_state: [f64; 4],
    pub verdict: Option<Verdict>,
    pub verdict_criteria: Option<VerdictCriteria>,
    /// Recovered physical time at the last sample (McGehee only).
    pub physical_time: Option<f64>,
    pub final_manifold_distance: Option<f64>,
    pub truncated: bool,
    pub failure: Option<FailureInfo>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagateOutput {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    pub summary: PropagateSummary,
}

impl PropagateOutput {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| format!("{x:?}")))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Error to report after the (possibly partial) output is written.
    pub fn failure(&self) -> Option<CliError> {
        self.summary
            .failure
            .as_ref()
            .map(|f| CliError::Truncated(format!("{} ({})", f.message, f.kind)))
    }
}

pub fn cmd_propagate(
    config: &RunConfig,
    req: &PropagateRequest,
) -> Result<PropagateOutput, CliError> {
    let (t0, t1) = req.span;
    if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
        return Err(CliError::Usage(format!("invalid span [{t0}, {t1}]")));
    }
    if req.state0.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Usage("initial state must be finite".into()));
    }
    let params = config.model()?.params;
    match req.coords {
        Coords::Cartesian => propagate_cartesian(&params, req, config),
        Coords::Mcgehee => propagate_mcgehee(&params, req, config),
    }
}

fn split(result: Result<Solution, IntegrationFailure>) -> (Solution, Option<FailureInfo>) {
    match result {
        Ok(sol) => (sol, None),
        Err(f) => {
            let info = FailureInfo {
                kind: f.error.kind().into(),
                message: f.error.to_string(),
            };
            (f.partial, Some(info))
        }
    }
}

fn propagate_cartesian(
    params: &HillParams,
    req: &PropagateRequest,
    config: &RunConfig,
) -> Result<PropagateOutput, CliError> {
    let s0 = CartesianState::from_array(req.state0, req.span.0);
    let h0 = hamiltonian(&s0, params)?;
    let field = |_: f64, y: &[f64], dy: &mut [f64]| -> hill_core::Result<()> {
        let s = CartesianState::from_array([y[0], y[1], y[2], y[3]], 0.0);
        dy.copy_from_slice(&vector_field(&s, params)?);
        Ok(())
    };
    let opts = Options::with_tolerances(config.integrator.rel_tol, config.integrator.abs_tol);
    let (sol, failure) = split(integrate(&field, &req.state0, req.span, &opts, &[]));

    let mut rows = Vec::with_capacity(sol.trajectory.samples.len());
    let mut max_drift = 0.0f64;
    for s in &sol.trajectory.samples {
        let st = CartesianState::from_array([s.y[0], s.y[1], s.y[2], s.y[3]], s.t);
        let h = hamiltonian(&st, params).unwrap_or(f64::NAN);
        max_drift = max_drift.max((h - h0).abs());
        rows.push(vec![s.t, s.y[0], s.y[1], s.y[2], s.y[3], h]);
    }
    let last = rows.last().expect("initial sample present");
    let summary = PropagateSummary {
        coords: Coords::Cartesian,
        samples: rows.len(),
        accepted_steps: sol.trajectory.accepted_steps,
        rejected_steps: sol.trajectory.rejected_steps,
        start: req.span.0,
        end: last[0],
        energy: h0,
        max_drift,
        final_state: [last[1], last[2], last[3], last[4]],
        verdict: None,
        verdict_criteria: None,
        physical_time: None,
        final_manifold_distance: None,
        truncated: failure.is_some(),
        failure,
    };
    Ok(PropagateOutput {
        columns: vec!["t", "x1", "x2", "y1", "y2", "H"],
        rows,
        summary,
    })
}

fn propagate_mcgehee(
    params: &HillParams,
    req: &PropagateRequest,
    config: &RunConfig,
) -> Result<PropagateOutput, CliError> {
    let [r, theta, v, w] = req.state0;
    let s0 = McGeheeState::new(r, theta, v, w)?.with_tau(req.span.0);
    let h = if r > 0.0 {
        hamiltonian(&from_mcgehee(&s0, params.beta(), params.gamma())?, params)?
    } else {
        0.0
    };
    let opts = CollisionRunOptions {
        tau_max: req.span.1 - req.span.0,
        ..config.integrator.run_options()
    };
    let (sol, verdict, physical, distance, failure) =
        match integrate_to_collision(params, s0, &opts) {
            Ok(run) => {
                let d = run.final_distance;
                (
                    run.solution,
                    Some(run.verdict),
                    run.physical_time,
                    Some(d),
                    None,
                )
            }
            Err(f) => {
                let (sol, failure) = split(Err(f));
                let clock: Vec<(f64, f64)> = sol
                    .trajectory
                    .samples
                    .iter()
                    .map(|s| (s.t, s.y[0].max(0.0)))
                    .collect();
                let physical = recover_physical_time(&clock, 0.0)
                    .unwrap_or_else(|_| vec![f64::NAN; clock.len()]);
                (sol, None, physical, None, failure)
            }
        };

    let res0 = energy_residual(&s0, params, h);
    let mut rows = Vec::with_capacity(sol.trajectory.samples.len());
    let mut max_drift = 0.0f64;
    for (s, t) in sol.trajectory.samples.iter().zip(&physical) {
        let st = McGeheeState::from_array(&s.y, s.t);
        let res = energy_residual(&st, params, h);
        max_drift = max_drift.max((res - res0).abs());
        rows.push(vec![s.t, st.r, st.theta, st.v, st.w, res, *t]);
    }
    let last = rows.last().expect("initial sample present");
    let summary = PropagateSummary {
        coords: Coords::Mcgehee,
        samples: rows.len(),
        accepted_steps: sol.trajectory.accepted_steps,
        rejected_steps: sol.trajectory.rejected_steps,
        start: req.span.0,
        end: last[0],
        energy: h,
        max_drift,
        final_state: [last[1], last[2], last[3], last[4]],
        verdict,
        verdict_criteria: Some(VerdictCriteria {
            heuristic: true,
            r_floor: opts.r_floor,
            r_ceiling: opts.r_ceiling,
            window_fraction: opts.window_fraction,
        }),
        physical_time: Some(last[6]),
        final_manifold_distance: distance,
        truncated: failure.is_some(),
        failure,
    };
    Ok(PropagateOutput {
        columns: vec!["tau", "r", "theta", "v", "w", "energy_residual", "t"],
        rows,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(a_b: (f64, f64), c: f64) -> RunConfig {
        // λ's chosen so that A = (1−λ₂)/2 and B = (1−λ₁)/2 take the given values.
        let (a, b) = a_b;
        RunConfig::from_json(&format!(
            r#"{{"schema": 1, "direct": {{"mu": 0.001, "u1": 1, "u2": 1,
                "lambda1": {}, "lambda2": {}, "c3": {}}}}}"#,
            1.0 - 2.0 * b,
            1.0 - 2.0 * a,
            -c
        ))
        .unwrap()
    }

    #[test]
    fn bounded_cartesian_orbit_conserves_h() {
        let out = cmd_propagate(
            &config((1.0, 1.0), 0.01),
            &PropagateRequest {
                coords: Coords::Cartesian,
                state0: [1.0, 0.0, 0.0, 1.8],
                span: (0.0, 20.0),
            },
        )
        .unwrap();
        assert!(!out.summary.truncated);
        assert!(out.summary.max_drift < 1e-8, "{}", out.summary.max_drift);
        assert_eq!(out.summary.end, 20.0);
    }

    #[test]
    fn infall_reaches_the_sink() {
        let out = cmd_propagate(
            &config((-1.0, 0.5), 1.0),
            &PropagateRequest {
                coords: Coords::Mcgehee,
                state0: [0.05, 0.3, -0.1, 0.0],
                span: (0.0, 60.0),
            },
        )
        .unwrap();
        let s = &out.summary;
        assert_eq!(s.verdict, Some(Verdict::CollisionAsymptotic));
        assert!((s.final_state[2] + 2f64.sqrt()).abs() < 1e-4);
        assert!(s.final_state[3].abs() < 1e-4);
        assert!(s.physical_time.unwrap().is_finite());
    }

    #[test]
    fn prolate_run_is_not_a_collision() {
        let out = cmd_propagate(
            &config((-1.0, 0.5), -1.0),
            &PropagateRequest {
                coords: Coords::Mcgehee,
                state0: [0.2, 1.0, -1.0, 0.3],
                span: (0.0, 20.0),
            },
        )
        .unwrap();
        assert_ne!(out.summary.verdict, Some(Verdict::CollisionAsymptotic));
    }

    #[test]
    fn collision_in_cartesian_chart_truncates() {
        let out = cmd_propagate(
            // Isotropic and with zero angular momentum: a radial collision.
            &config((1.0, 1.0), 0.0),
            &PropagateRequest {
                coords: Coords::Cartesian,
                state0: [0.1, 0.0, 0.0, 0.0],
                span: (0.0, 10.0),
            },
        )
        .unwrap();
        assert!(out.summary.truncated);
        assert!(out.failure().is_some());
        assert!(out.rows.len() > 1);
        assert!(out.summary.end < 10.0);
    }

    #[test]
    fn csv_has_one_row_per_sample() {
        let out = cmd_propagate(
            &config((1.0, 1.0), 0.0),
            &PropagateRequest {
                coords: Coords::Mcgehee,
                state0: [1.0, 0.0, 0.0, 1.0],
                span: (0.0, 1.0),
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        out.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), out.rows.len() + 1);
        assert!(text.starts_with("tau,r,theta,v,w,energy_residual,t\n"));
        let first: Vec<f64> = text
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .map(|x| x.parse().unwrap())
            .collect();
        assert_eq!(first, out.rows[0]);
    }
}
