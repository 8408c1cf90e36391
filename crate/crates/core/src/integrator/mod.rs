//! Adaptive explicit Runge–Kutta integration with dense output and scalar
//! event location.
//!
//! The stepper is the Dormand–Prince 5(4) pair with local extrapolation and
//! its free 4th-order interpolant. Errors are measured in the RMS norm of
//! `err_i / (abs_tol + rel_tol·max(|y_i|, |y_new_i|))`.

mod collision_run;
mod stepper;
pub mod tableau;

use std::fmt;

use thiserror::Error;

use crate::error::Error;

pub use collision_run::{
    integrate_to_collision, regularized_system, CollisionRun, CollisionRunOptions, Verdict,
};
pub use stepper::{Dopri5, Step};

/// Right-hand side `dy/dt = f(t, y)`. Implementations must be re-entrant.
pub trait VectorField {
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), Error>;
}

impl<F> VectorField for F
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<(), Error>,
{
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), Error> {
        self(t, y, dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    #[default]
    Any,
    /// `g` crosses from negative to non-negative in the direction of
    /// integration.
    Rising,
    /// `g` crosses from positive to non-positive in the direction of
    /// integration.
    Falling,
}

/// Scalar event `g(t, y) = 0`.
pub struct EventSpec<'a> {
    pub function: Box<dyn Fn(f64, &[f64]) -> f64 + Send + Sync + 'a>,
    pub direction: Direction,
    pub terminal: bool,
    pub refine_tol: f64,
}

impl<'a> EventSpec<'a> {
    pub fn new(function: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'a) -> Self {
        EventSpec {
            function: Box::new(function),
            direction: Direction::Any,
            terminal: false,
            refine_tol: 1e-12,
        }
    }

    pub fn direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn terminal(mut self) -> Self {
        self.terminal = true;
        self
    }

    pub fn refine_tol(mut self, tol: f64) -> Self {
        self.refine_tol = tol;
        self
    }
}

impl fmt::Debug for EventSpec<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EventSpec")
            .field("direction", &self.direction)
            .field("terminal", &self.terminal)
            .field("refine_tol", &self.refine_tol)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Rejected attempts allowed for a single step.
    pub max_rejections: usize,
    pub max_steps: usize,
    /// Upper bound on |h|; `None` means the span length.
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_rejections: 20,
            max_steps: 2_000_000,
            max_step: None,
            initial_step: None,
        }
    }
}

impl Options {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Options {
            rel_tol,
            abs_tol,
            ..Options::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegratorError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("field evaluation failed at t = {t}: {source}")]
    Field { t: f64, source: Error },
    #[error("maximum number of steps ({0}) exceeded")]
    MaxStepsExceeded(usize),
    #[error("t = {t} lies outside the integrated span [{start}, {end}]")]
    OutOfSpan { t: f64, start: f64, end: f64 },
    #[error("invalid integrator input: {0}")]
    InvalidInput(String),
}

impl IntegratorError {
    pub fn kind(&self) -> &'static str {
        match self {
            IntegratorError::StepSizeUnderflow { .. } => "step_size_underflow",
            IntegratorError::Field { .. } => "field_error",
            IntegratorError::MaxStepsExceeded(_) => "max_steps_exceeded",
            IntegratorError::OutOfSpan { .. } => "out_of_span",
            IntegratorError::InvalidInput(_) => "invalid_input",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub y: Vec<f64>,
}

/// Interpolant of one accepted step, valid on `[t0, t0 + h]`.
#[derive(Debug, Clone, PartialEq)]
struct Segment {
    t0: f64,
    h: f64,
    rcont: Vec<f64>,
}

impl Segment {
    fn eval(&self, t: f64, out: &mut [f64]) {
        let n = out.len();
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        for (i, o) in out.iter_mut().enumerate() {
            let r = |k: usize| self.rcont[k * n + i];
            *o = r(0) + theta * (r(1) + theta1 * (r(2) + theta * (r(3) + theta1 * r(4))));
        }
    }
}

/// Accepted samples of an integration, one per step plus the initial point,
/// with the interpolants between them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    segments: Vec<Segment>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, |s| s.y.len())
    }

    pub fn start(&self) -> Option<f64> {
        self.samples.first().map(|s| s.t)
    }

    pub fn end(&self) -> Option<f64> {
        self.samples.last().map(|s| s.t)
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    fn forward(&self) -> bool {
        match (self.start(), self.end()) {
            (Some(a), Some(b)) => b >= a,
            _ => true,
        }
    }

    /// Evaluates the dense output at `t`. Sample times return the stored
    /// sample exactly.
    pub fn dense_eval(&self, t: f64) -> Result<Vec<f64>, IntegratorError> {
        let (Some(start), Some(end)) = (self.start(), self.end()) else {
            return Err(IntegratorError::InvalidInput("empty trajectory".into()));
        };
        let forward = self.forward();
        let inside = if forward {
            t >= start && t <= end
        } else {
            t <= start && t >= end
        };
        if !inside || t.is_nan() {
            return Err(IntegratorError::OutOfSpan { t, start, end });
        }
        // Index of the first sample not before t along the direction.
        let idx = self
            .samples
            .partition_point(|s| if forward { s.t < t } else { s.t > t });
        if let Some(s) = self.samples.get(idx) {
            if s.t == t {
                return Ok(s.y.clone());
            }
        }
        let seg = &self.segments[idx - 1];
        let mut out = vec![0.0; self.dim()];
        seg.eval(t, &mut out);
        Ok(out)
    }
}

/// Location of a detected event.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    /// Index into the event list passed to [`integrate`].
    pub index: usize,
    pub t: f64,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Completed,
    /// Stopped by the terminal event with this index.
    Terminated(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub trajectory: Trajectory,
    pub events: Vec<EventRecord>,
    pub status: Status,
}

/// An integration that stopped on an error, with everything computed up to
/// the last accepted step.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{error}")]
pub struct IntegrationFailure {
    pub error: IntegratorError,
    pub partial: Solution,
}

fn fail(
    error: IntegratorError,
    trajectory: Trajectory,
    events: Vec<EventRecord>,
) -> IntegrationFailure {
    IntegrationFailure {
        error,
        partial: Solution {
            trajectory,
            events,
            status: Status::Completed,
        },
    }
}

fn crossed(direction: Direction, g_old: f64, g_new: f64) -> bool {
    let rising = g_old < 0.0 && g_new >= 0.0;
    let falling = g_old > 0.0 && g_new <= 0.0;
    match direction {
        Direction::Any => rising || falling,
        Direction::Rising => rising,
        Direction::Falling => falling,
    }
}

/// Bisection for the root of `g` on the interpolant between `a` and `b`
/// (`g(a)` and `g(b)` of opposite sign or `g(b) = 0`).
fn locate(
    event: &EventSpec<'_>,
    seg: &Segment,
    mut a: f64,
    mut b: f64,
    g_a: f64,
    buf: &mut [f64],
) -> f64 {
    let g = |t: f64, buf: &mut [f64]| {
        seg.eval(t, buf);
        (event.function)(t, buf)
    };
    let sign_a = g_a.signum();
    for _ in 0..200 {
        if (b - a).abs() <= event.refine_tol {
            break;
        }
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let gm = g(m, buf);
        if gm == 0.0 {
            return m;
        }
        if gm.signum() == sign_a {
            a = m;
        } else {
            b = m;
        }
    }
    b
}

/// Integrates `field` from `y0` over `t_span = (t0, t1)` (`t1 < t0`
/// integrates backward).
pub fn integrate<F: VectorField + ?Sized>(
    field: &F,
    y0: &[f64],
    t_span: (f64, f64),
    options: &Options,
    events: &[EventSpec<'_>],
) -> Result<Solution, IntegrationFailure> {
    let (t0, t1) = t_span;
    let n = y0.len();
    let mut trajectory = Trajectory::default();
    let mut records = Vec::new();

    let invalid = |msg: String| IntegratorError::InvalidInput(msg);
    if !(options.rel_tol > 0.0 && options.abs_tol > 0.0) {
        return Err(fail(
            invalid("tolerances must be positive".into()),
            trajectory,
            records,
        ));
    }
    if !(t0.is_finite() && t1.is_finite()) || y0.iter().any(|v| !v.is_finite()) {
        return Err(fail(
            invalid("non-finite initial data".into()),
            trajectory,
            records,
        ));
    }
    if let Some(e) = events.iter().find(|e| !(e.refine_tol > 0.0)) {
        return Err(fail(
            invalid(format!("refine_tol must be positive: {e:?}")),
            trajectory,
            records,
        ));
    }

    trajectory.samples.push(Sample {
        t: t0,
        y: y0.to_vec(),
    });
    if t1 == t0 {
        return Ok(Solution {
            trajectory,
            events: records,
            status: Status::Completed,
        });
    }

    let span = (t1 - t0).abs();
    let dir = (t1 - t0).signum();
    let min_step = 1e-14 * span;
    let max_step = options.max_step.unwrap_or(span).min(span);

    let mut stepper = match Dopri5::new(field, t0, y0, options) {
        Ok(s) => s,
        Err(e) => return Err(fail(e, trajectory, records)),
    };
    let mut h = match options.initial_step {
        Some(h) => h.abs().min(max_step),
        None => match stepper.initial_step(field, dir, max_step) {
            Ok(h) => h,
            Err(e) => return Err(fail(e, trajectory, records)),
        },
    };

    let mut g_old: Vec<f64> = events.iter().map(|e| (e.function)(t0, y0)).collect();
    let mut buf = vec![0.0; n];
    let mut last_rejected = false;

    loop {
        if trajectory.accepted_steps >= options.max_steps {
            return Err(fail(
                IntegratorError::MaxStepsExceeded(options.max_steps),
                trajectory,
                records,
            ));
        }
        let t = stepper.t();
        let remaining = (t1 - t).abs();
        let mut rejections = 0;
        let step = loop {
            let mut hh = h.min(max_step);
            // Land exactly on t1; avoid a sliver final step.
            if hh >= remaining || remaining - hh < 1e-10 * hh {
                hh = remaining;
            }
            if hh < min_step && hh < remaining {
                return Err(fail(
                    IntegratorError::StepSizeUnderflow { t, h: hh },
                    trajectory,
                    records,
                ));
            }
            let landing = hh == remaining;
            let attempt = match stepper.attempt(field, dir * hh) {
                Ok(s) => s,
                Err(e) => return Err(fail(e, trajectory, records)),
            };
            let err = attempt.error;
            if err <= 1.0 {
                let fac = if err == 0.0 {
                    10.0
                } else {
                    (0.9 * err.powf(-1.0 / tableau::ORDER as f64)).clamp(0.2, 10.0)
                };
                h = if last_rejected {
                    hh * fac.min(1.0)
                } else {
                    hh * fac
                };
                last_rejected = false;
                break (attempt, landing);
            }
            trajectory.rejected_steps += 1;
            rejections += 1;
            last_rejected = true;
            if rejections >= options.max_rejections {
                return Err(fail(
                    IntegratorError::StepSizeUnderflow { t, h: hh },
                    trajectory,
                    records,
                ));
            }
            let fac = if err.is_finite() {
                (0.9 * err.powf(-1.0 / tableau::ORDER as f64)).clamp(0.1, 0.9)
            } else {
                0.1
            };
            h = hh * fac;
        };
        let (mut attempt, landing) = step;
        let t_new = if landing { t1 } else { attempt.t_new };
        let segment = Segment {
            t0: t,
            h: attempt.t_new - t,
            rcont: std::mem::take(&mut attempt.rcont),
        };
        stepper.accept(attempt, t_new);
        trajectory.accepted_steps += 1;
        let y_new = stepper.y().to_vec();

        // Events in this step, ordered along the direction of integration.
        let mut hits: Vec<(f64, usize)> = Vec::new();
        let g_new: Vec<f64> = events.iter().map(|e| (e.function)(t_new, &y_new)).collect();
        for (k, e) in events.iter().enumerate() {
            if crossed(e.direction, g_old[k], g_new[k]) {
                let te = if g_new[k] == 0.0 {
                    t_new
                } else {
                    locate(e, &segment, t, t_new, g_old[k], &mut buf)
                };
                hits.push((te, k));
            }
        }
        hits.sort_by(|a, b| (dir * a.0).total_cmp(&(dir * b.0)).then(a.1.cmp(&b.1)));
        let mut terminal = None;
        for (te, k) in hits {
            let ye = if te == t_new {
                y_new.clone()
            } else {
                segment.eval(te, &mut buf);
                buf.clone()
            };
            records.push(EventRecord {
                index: k,
                t: te,
                y: ye.clone(),
            });
            if events[k].terminal {
                terminal = Some((te, k, ye));
                break;
            }
        }
        g_old = g_new;
        trajectory.segments.push(segment);

        if let Some((te, k, ye)) = terminal {
            trajectory.samples.push(Sample { t: te, y: ye });
            return Ok(Solution {
                trajectory,
                events: records,
                status: Status::Terminated(k),
            });
        }
        trajectory.samples.push(Sample { t: t_new, y: y_new });
        if landing {
            return Ok(Solution {
                trajectory,
                events: records,
                status: Status::Completed,
            });
        }
    }
}

#[cfg(test)]
mod tests;
