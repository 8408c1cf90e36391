//! Propagation in McGehee coordinates with a collision verdict.

use serde::{Deserialize, Serialize};

use super::{integrate, Direction, EventSpec, IntegrationFailure, Options, Solution, Status};
use crate::dynamics::HillParams;
use crate::error::Error;
use crate::mcgehee::{recover_physical_time, regularized_field, McGeheeState};

/// Outcome of a regularized propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// `r` fell below the floor while decreasing and the distance to the
    /// collision manifold shrank over the final window.
    CollisionAsymptotic,
    /// `r` exceeded the ceiling.
    Escaped,
    TimedOut,
}

/// Thresholds of the collision verdict. These are numerical heuristics:
/// collision is only reached as τ → ±∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionRunOptions {
    /// Signed τ-span; negative values integrate backward.
    pub tau_max: f64,
    pub r_floor: f64,
    pub r_ceiling: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Trailing fraction of the τ-span inspected for the approach to `N_h`.
    pub window_fraction: f64,
}

impl Default for CollisionRunOptions {
    fn default() -> Self {
        CollisionRunOptions {
            tau_max: 60.0,
            r_floor: 1e-8,
            r_ceiling: 1e4,
            rel_tol: 1e-12,
            abs_tol: 1e-12,
            window_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionRun {
    pub solution: Solution,
    pub verdict: Verdict,
    /// Physical time at each sample, starting from 0.
    pub physical_time: Vec<f64>,
    /// Distance `max(r, |v² + w² − 2c|)` to the collision manifold at the
    /// last sample (infinite when the manifold is empty).
    pub final_distance: f64,
}

impl CollisionRun {
    pub fn final_state(&self) -> McGeheeState {
        let s = self
            .solution
            .trajectory
            .last()
            .expect("trajectory holds at least the initial sample");
        McGeheeState::from_array(&s.y, s.t)
    }
}

/// Regularized field as an integrator right-hand side on `[r, θ, v, w]`
/// (θ unwrapped).
pub fn regularized_system(
    params: &HillParams,
) -> impl Fn(f64, &[f64], &mut [f64]) -> Result<(), Error> + Send + Sync + '_ {
    move |tau, y, dy| {
        let f = regularized_field(&McGeheeState::from_array(y, tau), params);
        dy.copy_from_slice(&f);
        Ok(())
    }
}

fn manifold_distance(y: &[f64], c: f64) -> f64 {
    if c <= 0.0 {
        return f64::INFINITY;
    }
    let r = y[0].max(0.0);
    r.max((y[2] * y[2] + y[3] * y[3] - 2.0 * c).abs())
}

pub fn integrate_to_collision(
    params: &HillParams,
    state0: McGeheeState,
    opts: &CollisionRunOptions,
) -> Result<CollisionRun, IntegrationFailure> {
    let bad = |msg: &str| IntegrationFailure {
        error: super::IntegratorError::InvalidInput(msg.into()),
        partial: Solution {
            trajectory: Default::default(),
            events: Vec::new(),
            status: Status::Completed,
        },
    };
    if !(opts.r_floor > 0.0) {
        return Err(bad("r_floor must be positive"));
    }
    if !(opts.r_ceiling > opts.r_floor) {
        return Err(bad("r_ceiling must exceed r_floor"));
    }
    if !(opts.window_fraction > 0.0 && opts.window_fraction <= 1.0) {
        return Err(bad("window_fraction must lie in (0, 1]"));
    }

    let field = regularized_system(params);
    let ceiling = opts.r_ceiling;
    let events = [EventSpec::new(move |_, y: &[f64]| y[0] - ceiling)
        .direction(Direction::Rising)
        .terminal()];
    let t0 = state0.tau;
    let solution = integrate(
        &field,
        &state0.to_array(),
        (t0, t0 + opts.tau_max),
        &Options::with_tolerances(opts.rel_tol, opts.abs_tol),
        &events,
    )?;

    let samples = &solution.trajectory.samples;
    let clock: Vec<(f64, f64)> = samples.iter().map(|s| (s.t, s.y[0].max(0.0))).collect();
    let physical_time = recover_physical_time(&clock, 0.0).map_err(|e| IntegrationFailure {
        error: super::IntegratorError::Field { t: t0, source: e },
        partial: solution.clone(),
    })?;

    let c = params.c();
    let last = samples.last().expect("initial sample present");
    let final_distance = manifold_distance(&last.y, c);
    let verdict = if solution.status == Status::Terminated(0) {
        Verdict::Escaped
    } else {
        let dir = opts.tau_max.signum();
        let t_end = last.t;
        let window = opts.window_fraction * (t_end - t0).abs();
        let in_window: Vec<f64> = samples
            .iter()
            .filter(|s| (t_end - s.t).abs() <= window)
            .map(|s| manifold_distance(&s.y, c))
            .collect();
        let approaching =
            in_window.len() >= 2 && in_window.last().unwrap() < in_window.first().unwrap();
        let r = last.y[0].max(0.0);
        let shrinking = dir * last.y[2] < 0.0;
        if r < opts.r_floor && shrinking && approaching {
            Verdict::CollisionAsymptotic
        } else {
            Verdict::TimedOut
        }
    };

    Ok(CollisionRun {
        solution,
        verdict,
        physical_time,
        final_distance,
    })
}
