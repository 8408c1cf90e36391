use super::tableau::*;
use super::{IntegratorError, Options, VectorField};

/// Result of one trial step.
#[derive(Debug, Clone)]
pub struct Step {
    pub t_new: f64,
    pub y_new: Vec<f64>,
    /// Derivative at the new point (first stage of the next step).
    pub k_new: Vec<f64>,
    /// Scaled RMS error estimate; the step is acceptable when ≤ 1.
    pub error: f64,
    /// Coefficients of the continuous extension, five blocks of `n`.
    pub rcont: Vec<f64>,
}

/// Single-step Dormand–Prince 5(4) machinery, usable with fixed steps.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    t: f64,
    y: Vec<f64>,
    k1: Vec<f64>,
    rel_tol: f64,
    abs_tol: f64,
}

fn field_err(t: f64) -> impl Fn(crate::error::Error) -> IntegratorError {
    move |source| IntegratorError::Field { t, source }
}

impl Dopri5 {
    pub fn new<F: VectorField + ?Sized>(
        field: &F,
        t0: f64,
        y0: &[f64],
        options: &Options,
    ) -> Result<Self, IntegratorError> {
        let mut k1 = vec![0.0; y0.len()];
        field.eval(t0, y0, &mut k1).map_err(field_err(t0))?;
        Ok(Dopri5 {
            t: t0,
            y: y0.to_vec(),
            k1,
            rel_tol: options.rel_tol,
            abs_tol: options.abs_tol,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.abs_tol + self.rel_tol * a.abs().max(b.abs())
    }

    fn rms(&self, v: &[f64], reference: &[f64]) -> f64 {
        let n = v.len().max(1) as f64;
        let sum: f64 = v
            .iter()
            .zip(reference)
            .map(|(x, r)| {
                let q = x / self.scale(*r, *r);
                q * q
            })
            .sum();
        (sum / n).sqrt()
    }

    /// Starting step size from the usual two-evaluation heuristic.
    pub fn initial_step<F: VectorField + ?Sized>(
        &self,
        field: &F,
        dir: f64,
        max_step: f64,
    ) -> Result<f64, IntegratorError> {
        let d0 = self.rms(&self.y, &self.y);
        let d1 = self.rms(&self.k1, &self.y);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h0 = h0.min(max_step);
        let y1: Vec<f64> = self
            .y
            .iter()
            .zip(&self.k1)
            .map(|(y, k)| y + dir * h0 * k)
            .collect();
        let mut k = vec![0.0; self.y.len()];
        let t = self.t + dir * h0;
        field.eval(t, &y1, &mut k).map_err(field_err(t))?;
        let diff: Vec<f64> = k.iter().zip(&self.k1).map(|(a, b)| a - b).collect();
        let d2 = self.rms(&diff, &self.y) / h0;
        let dm = d1.max(d2);
        let h1 = if !dm.is_finite() {
            h0 * 1e-3
        } else if dm <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dm).powf(1.0 / ORDER as f64)
        };
        Ok((100.0 * h0).min(h1).min(max_step))
    }

    /// Trial step of signed size `h` from the current point.
    pub fn attempt<F: VectorField + ?Sized>(
        &self,
        field: &F,
        h: f64,
    ) -> Result<Step, IntegratorError> {
        let n = self.y.len();
        let t = self.t;
        let y = &self.y;
        let k1 = &self.k1;
        let mut tmp = vec![0.0; n];
        let eval = |tt: f64, arg: &[f64], out: &mut Vec<f64>| -> Result<(), IntegratorError> {
            field.eval(tt, arg, out).map_err(field_err(tt))
        };

        let mut k2 = vec![0.0; n];
        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        eval(t + C2 * h, &tmp, &mut k2)?;
        let mut k3 = vec![0.0; n];
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        eval(t + C3 * h, &tmp, &mut k3)?;
        let mut k4 = vec![0.0; n];
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        eval(t + C4 * h, &tmp, &mut k4)?;
        let mut k5 = vec![0.0; n];
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        eval(t + C5 * h, &tmp, &mut k5)?;
        let mut k6 = vec![0.0; n];
        for i in 0..n {
            tmp[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = t + h;
        eval(t_new, &tmp, &mut k6)?;
        let mut y_new = vec![0.0; n];
        for i in 0..n {
            y_new[i] =
                y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        let mut k7 = vec![0.0; n];
        eval(t_new, &y_new, &mut k7)?;

        let mut sum = 0.0;
        for i in 0..n {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let q = e / self.scale(y[i], y_new[i]);
            sum += q * q;
        }
        let mut error = (sum / n.max(1) as f64).sqrt();
        if !error.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            error = f64::INFINITY;
        }

        let mut rcont = vec![0.0; 5 * n];
        for i in 0..n {
            let ydiff = y_new[i] - y[i];
            let bspl = h * k1[i] - ydiff;
            rcont[i] = y[i];
            rcont[n + i] = ydiff;
            rcont[2 * n + i] = bspl;
            rcont[3 * n + i] = ydiff - h * k7[i] - bspl;
            rcont[4 * n + i] =
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        Ok(Step {
            t_new,
            y_new,
            k_new: k7,
            error,
            rcont,
        })
    }

    /// Moves to the end of an accepted step. `t_new` may differ from
    /// `step.t_new` by round-off when snapping to the end of the span.
    pub fn accept(&mut self, step: Step, t_new: f64) {
        self.t = t_new;
        self.y = step.y_new;
        self.k1 = step.k_new;
    }

    /// Fixed-step integration without error control; returns the final state.
    pub fn fixed_steps<F: VectorField + ?Sized>(
        field: &F,
        t0: f64,
        y0: &[f64],
        h: f64,
        steps: usize,
    ) -> Result<Vec<f64>, IntegratorError> {
        let mut s = Dopri5::new(field, t0, y0, &Options::default())?;
        for _ in 0..steps {
            let step = s.attempt(field, h)?;
            let t_new = step.t_new;
            s.accept(step, t_new);
        }
        Ok(s.y)
    }
}
