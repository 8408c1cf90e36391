//! Planar quasi-homogeneous Hill Hamiltonian and its Hamilton equations in
//! Cartesian coordinates of the rotating frame.

use serde::{Deserialize, Serialize};

use crate::equilibrium::TriangleConfig;
use crate::error::{Error, Result};
use crate::mcgehee::{exponents, ExponentMode};
use crate::rational::{int, pow_nonneg, to_f64, Rational};

/// Coefficients of
/// `H = ½|y|² + x₂y₁ − x₁y₂ + A x₁² + B x₂² − |x|^{−ν} − c |x|^{−α}`
/// together with the McGehee exponents β, γ.
///
/// Fields are private so that β and γ stay consistent with ν, α and the
/// exponent mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HillParams {
    a: f64,
    b: f64,
    c: f64,
    nu: Rational,
    alpha: Rational,
    beta: Rational,
    gamma: Rational,
    mode: ExponentMode,
}

impl HillParams {
    /// Standard-mode parameters (`β = α/2`, `γ = 2/(α+2)`).
    pub fn new(a: f64, b: f64, c: f64, nu: Rational, alpha: Rational) -> Result<Self> {
        Self::with_mode(a, b, c, nu, alpha, ExponentMode::Standard)
    }

    pub fn with_mode(
        a: f64,
        b: f64,
        c: f64,
        nu: Rational,
        alpha: Rational,
        mode: ExponentMode,
    ) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::domain("A, B and c must be finite"));
        }
        let (beta, gamma) = exponents(nu, alpha, mode)?;
        if mode == ExponentMode::NewtonianLimit && c != 0.0 {
            return Err(Error::domain(format!(
                "newtonian-limit exponents require c = 0, got c = {c}"
            )));
        }
        Ok(HillParams {
            a,
            b,
            c,
            nu,
            alpha,
            beta,
            gamma,
            mode,
        })
    }

    /// The oblate Hill problem: `ν = 1`, `α = 3`.
    pub fn oblate(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(a, b, c, int(1), int(3))
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn nu(&self) -> Rational {
        self.nu
    }
    pub fn alpha(&self) -> Rational {
        self.alpha
    }
    pub fn beta(&self) -> Rational {
        self.beta
    }
    pub fn gamma(&self) -> Rational {
        self.gamma
    }
    pub fn mode(&self) -> ExponentMode {
        self.mode
    }

    /// Copy with a different oblateness coupling `c`.
    pub fn with_c(&self, c: f64) -> Result<Self> {
        Self::with_mode(self.a, self.b, c, self.nu, self.alpha, self.mode)
    }

    /// Exponent `2 − γ(ν+2)` of the Newtonian term after blow-up.
    pub(crate) fn newton_power(&self) -> Rational {
        int(2) - self.gamma * (self.nu + int(2))
    }

    /// Exponent `2 − γ(α+2)` of the oblateness term after blow-up
    /// (zero in standard mode).
    pub(crate) fn oblate_power(&self) -> Rational {
        int(2) - self.gamma * (self.alpha + int(2))
    }
}

/// Hill parameters for the oblate problem around a relative equilibrium:
/// `A = (1−λ₂)/2`, `B = (1−λ₁)/2`, `c = −c₃`.
pub fn hill_params_from_equilibrium(config: &TriangleConfig, c3: f64) -> Result<HillParams> {
    HillParams::oblate(
        (1.0 - config.lambda2) / 2.0,
        (1.0 - config.lambda1) / 2.0,
        -c3,
    )
}

/// Position and momentum in the rotating frame at physical time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CartesianState {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
    pub t: f64,
}

/// Time derivative `(ẋ₁, ẋ₂, ẏ₁, ẏ₂)`.
pub type CartesianRates = [f64; 4];

impl CartesianState {
    pub fn new(x1: f64, x2: f64, y1: f64, y2: f64) -> Self {
        CartesianState {
            x1,
            x2,
            y1,
            y2,
            t: 0.0,
        }
    }

    pub fn from_array(v: [f64; 4], t: f64) -> Self {
        CartesianState {
            x1: v[0],
            x2: v[1],
            y1: v[2],
            y2: v[3],
            t,
        }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x1, self.x2, self.y1, self.y2]
    }

    pub fn radius(&self) -> f64 {
        self.x1.hypot(self.x2)
    }
}

fn nonsingular_radius(state: &CartesianState) -> Result<f64> {
    let rho = state.radius();
    if rho == 0.0 {
        return Err(Error::SingularState(
            "collision: |x| = 0 in Cartesian coordinates".into(),
        ));
    }
    Ok(rho)
}

pub fn hamiltonian(state: &CartesianState, params: &HillParams) -> Result<f64> {
    let rho = nonsingular_radius(state)?;
    let CartesianState { x1, x2, y1, y2, .. } = *state;
    let kinetic = 0.5 * (y1 * y1 + y2 * y2) + x2 * y1 - x1 * y2;
    let quadratic = params.a * x1 * x1 + params.b * x2 * x2;
    let potential = -pow_nonneg(rho, -params.nu) - params.c * pow_nonneg(rho, -params.alpha);
    Ok(kinetic + quadratic + potential)
}

/// Hamilton equations `ẋ = y − ix`, `ẏ = −ν x/|x|^{ν+2} − αc x/|x|^{α+2} − iy − Tx`.
pub fn vector_field(state: &CartesianState, params: &HillParams) -> Result<CartesianRates> {
    let rho = nonsingular_radius(state)?;
    let CartesianState { x1, x2, y1, y2, .. } = *state;
    let radial = to_f64(params.nu) * pow_nonneg(rho, -(params.nu + int(2)))
        + to_f64(params.alpha) * params.c * pow_nonneg(rho, -(params.alpha + int(2)));
    Ok([
        y1 + x2,
        y2 - x1,
        -radial * x1 + y2 - 2.0 * params.a * x1,
        -radial * x2 - y1 - 2.0 * params.b * x2,
    ])
}
