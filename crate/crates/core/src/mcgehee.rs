//! McGehee blow-up of the collision singularity.
//!
//! `x = r^γ e^{iθ}`, `y = r^{−γβ}(v + iw) e^{iθ}`, followed by the time
//! change `dt = r dτ`. After the change of time the vector field extends
//! continuously to the collision set `Z = {r = 0}`, which is invariant.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::dynamics::{CartesianState, HillParams};
use crate::error::{Error, Result};
use crate::rational::{int, pow_nonneg, rational, to_f64, Rational};

/// Which pair of McGehee exponents to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentMode {
    /// `β = α/2`, `γ = 2/(α+2)`: blows up the dominant `|x|^{−α}` term.
    Standard,
    /// `β = ν/2`, `γ = 2/(2+ν)`: only valid when the `c` term is absent.
    NewtonianLimit,
}

/// `(β, γ)` for the chosen mode, in exact arithmetic.
pub fn exponents(
    nu: Rational,
    alpha: Rational,
    mode: ExponentMode,
) -> Result<(Rational, Rational)> {
    if nu < int(1) {
        return Err(Error::domain(format!("ν must be at least 1, got {nu}")));
    }
    match mode {
        ExponentMode::Standard => {
            if !(nu < alpha) {
                return Err(Error::domain(format!(
                    "need ν < α, got ν = {nu}, α = {alpha}"
                )));
            }
            Ok((alpha / int(2), int(2) / (alpha + int(2))))
        }
        ExponentMode::NewtonianLimit => Ok((nu / int(2), int(2) / (int(2) + nu))),
    }
}

/// Point in McGehee coordinates at rescaled time `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct McGeheeState {
    pub r: f64,
    pub theta: f64,
    pub v: f64,
    pub w: f64,
    pub tau: f64,
}

/// `(r′, θ′, v′, w′)` with respect to τ (or t, for [`physical_field`]).
pub type McGeheeRates = [f64; 4];

impl McGeheeState {
    /// Validates `r ≥ 0` and normalises θ to `[0, 2π)`.
    pub fn new(r: f64, theta: f64, v: f64, w: f64) -> Result<Self> {
        if !(r >= 0.0) {
            return Err(Error::domain(format!("r must be non-negative, got {r}")));
        }
        Ok(McGeheeState {
            r,
            theta: normalize_angle(theta),
            v,
            w,
            tau: 0.0,
        })
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.r, self.theta, self.v, self.w]
    }

    /// Builds a state from an integrator vector; θ may be unwrapped and
    /// is normalised, tiny negative `r` from round-off is clamped to 0.
    pub fn from_array(y: &[f64], tau: f64) -> Self {
        McGeheeState {
            r: y[0].max(0.0),
            theta: normalize_angle(y[1]),
            v: y[2],
            w: y[3],
            tau,
        }
    }
}

pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Cartesian → McGehee. The output carries `tau = 0`.
pub fn to_mcgehee(state: &CartesianState, beta: Rational, gamma: Rational) -> Result<McGeheeState> {
    let rho = state.radius();
    if rho == 0.0 {
        return Err(Error::SingularState(
            "the McGehee map is undefined at |x| = 0".into(),
        ));
    }
    let theta = normalize_angle(state.x2.atan2(state.x1));
    let (s, c) = theta.sin_cos();
    // r^{γβ} = |x|^β
    let scale = pow_nonneg(rho, beta);
    Ok(McGeheeState {
        r: pow_nonneg(rho, gamma.recip()),
        theta,
        v: scale * (state.y1 * c + state.y2 * s),
        w: scale * (-state.y1 * s + state.y2 * c),
        tau: 0.0,
    })
}

/// McGehee → Cartesian. The output carries `t = 0`.
pub fn from_mcgehee(
    state: &McGeheeState,
    beta: Rational,
    gamma: Rational,
) -> Result<CartesianState> {
    if !(state.r >= 0.0) {
        return Err(Error::domain(format!(
            "r must be non-negative, got {}",
            state.r
        )));
    }
    let (s, c) = state.theta.sin_cos();
    if state.r == 0.0 {
        if state.v != 0.0 || state.w != 0.0 {
            return Err(Error::SingularState(
                "momentum is unbounded at r = 0 with (v, w) ≠ 0".into(),
            ));
        }
        return Ok(CartesianState::default());
    }
    let rx = pow_nonneg(state.r, gamma);
    let ry = pow_nonneg(state.r, -(gamma * beta));
    Ok(CartesianState {
        x1: rx * c,
        x2: rx * s,
        y1: ry * (state.v * c - state.w * s),
        y2: ry * (state.v * s + state.w * c),
        t: 0.0,
    })
}

/// Regularized field in the rescaled time τ:
///
/// ```text
/// r′ = (β+1) v r
/// θ′ = w − r
/// v′ = β v² + w² − α c r^{2−γ(α+2)} − ν r^{2−γ(ν+2)} − 2A r² cos²θ − 2B r² sin²θ
/// w′ = (β−1) v w + 2(A−B) r² sinθ cosθ
/// ```
///
/// In standard mode `2 − γ(α+2) = 0`, so the `c` term is the constant `αc`.
pub fn regularized_field(state: &McGeheeState, params: &HillParams) -> McGeheeRates {
    let McGeheeState { r, theta, v, w, .. } = *state;
    let r = r.max(0.0);
    let (beta, alpha, nu) = (
        to_f64(params.beta()),
        to_f64(params.alpha()),
        to_f64(params.nu()),
    );
    let (s, c) = theta.sin_cos();
    let r2 = r * r;
    [
        (beta + 1.0) * v * r,
        w - r,
        beta * v * v + w * w
            - alpha * params.c() * pow_nonneg(r, params.oblate_power())
            - nu * pow_nonneg(r, params.newton_power())
            - 2.0 * params.a() * r2 * c * c
            - 2.0 * params.b() * r2 * s * s,
        (beta - 1.0) * v * w + 2.0 * (params.a() - params.b()) * r2 * s * c,
    ]
}

/// The transformed equations in physical time `t`, before the time change.
/// Singular at `r = 0`.
pub fn physical_field(state: &McGeheeState, params: &HillParams) -> Result<McGeheeRates> {
    let McGeheeState { r, theta, v, w, .. } = *state;
    if !(r > 0.0) {
        return Err(Error::SingularState(
            "the physical-time McGehee field is singular at r = 0".into(),
        ));
    }
    let (beta, alpha, nu) = (
        to_f64(params.beta()),
        to_f64(params.alpha()),
        to_f64(params.nu()),
    );
    let (s, c) = theta.sin_cos();
    let one = int(1);
    Ok([
        (beta + 1.0) * v,
        w / r - 1.0,
        (beta * v * v + w * w) / r
            - alpha * params.c() * pow_nonneg(r, params.oblate_power() - one)
            - nu * pow_nonneg(r, params.newton_power() - one)
            - 2.0 * params.a() * r * c * c
            - 2.0 * params.b() * r * s * s,
        (beta - 1.0) * v * w / r + 2.0 * (params.a() - params.b()) * r * s * c,
    ])
}

/// `dt/dτ = r`.
pub fn physical_time_rate(r: f64) -> f64 {
    r
}

/// Energy condition `H = h` multiplied by `r^{2−2γ}`:
///
/// ```text
/// (v² + w²)/2 − c r^{2−γ(α+2)} − r w + r²(A cos²θ + B sin²θ) − r^{2−γ(ν+2)} − r^{2−2γ} h
/// ```
///
/// which in standard mode starts with `(v² + w² − 2c)/2`.
pub fn energy_residual(state: &McGeheeState, params: &HillParams, h: f64) -> f64 {
    let McGeheeState { r, theta, v, w, .. } = *state;
    let r = r.max(0.0);
    let (s, c) = theta.sin_cos();
    0.5 * (v * v + w * w) - params.c() * pow_nonneg(r, params.oblate_power()) - r * w
        + r * r * (params.a() * c * c + params.b() * s * s)
        - pow_nonneg(r, params.newton_power())
        - pow_nonneg(r, int(2) - int(2) * params.gamma()) * h
}

/// Physical time along a sampled τ-trajectory: `t(τ) = t₀ + ∫ r dτ`.
///
/// Each interval is integrated with the quadratic through three adjacent
/// samples (Simpson's rule on non-uniform grids), so the result is exact
/// for `r` quadratic in τ. Works for increasing or decreasing τ.
pub fn recover_physical_time(samples: &[(f64, f64)], t0: f64) -> Result<Vec<f64>> {
    let n = samples.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let increasing = n < 2 || samples[1].0 > samples[0].0;
    for pair in samples.windows(2) {
        let ordered = if increasing {
            pair[1].0 > pair[0].0
        } else {
            pair[1].0 < pair[0].0
        };
        if !ordered {
            return Err(Error::domain("τ samples must be strictly monotone"));
        }
    }
    if let Some(&(_, r)) = samples.iter().find(|(_, r)| !(*r >= 0.0)) {
        return Err(Error::domain(format!(
            "r samples must be non-negative, got {r}"
        )));
    }
    let mut out = Vec::with_capacity(n);
    out.push(t0);
    let mut t = t0;
    for i in 0..n - 1 {
        let (a, fa) = samples[i];
        let (b, fb) = samples[i + 1];
        let inc = if n == 2 {
            0.5 * (b - a) * (fa + fb)
        } else {
            // Third node: the next sample, or the previous one at the end.
            let (m, fm) = if i + 2 < n {
                samples[i + 2]
            } else {
                samples[i - 1]
            };
            quadratic_interval(a, fa, b, fb, m, fm)
        };
        // r ≥ 0 forces a monotone clock; the quadratic can undershoot on
        // rapidly decaying samples.
        let inc = if increasing {
            inc.max(0.0)
        } else {
            inc.min(0.0)
        };
        t += inc;
        out.push(t);
    }
    Ok(out)
}

/// ∫ₐᵇ of the quadratic interpolating (a, fa), (b, fb), (m, fm).
fn quadratic_interval(a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64) -> f64 {
    // Shift to x = s − a, with h = b − a and d = m − a.
    let h = b - a;
    let d = m - a;
    // p(x) = fa + c1 x + c2 x (x − h)
    let c1 = (fb - fa) / h;
    let c2 = (fm - fa - c1 * d) / (d * (d - h));
    // ∫₀ʰ x(x − h) dx = −h³/6
    fa * h + c1 * h * h / 2.0 - c2 * h * h * h / 6.0
}

/// `(β, γ)` of the oblate Hill problem, `(3/2, 2/5)`.
pub fn oblate_exponents() -> (Rational, Rational) {
    (rational(3, 2), rational(2, 5))
}
