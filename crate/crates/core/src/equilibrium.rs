//! Scalene-triangle relative equilibrium of three oblate primaries and the
//! rotating-frame coefficients λ₁, λ₂ of the Hill approximation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Search bracket for the triangle sides (distance m₁–m₂ normalised to 1).
pub const SIDE_BRACKET: (f64, f64) = (0.5, 1.5);
/// Absolute tolerance of the side solver.
pub const SIDE_TOL: f64 = 1e-14;

/// A massive body with a second zonal harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OblateBody {
    pub mass: f64,
    pub radius: f64,
    pub c20: f64,
}

impl OblateBody {
    pub fn new(mass: f64, radius: f64, c20: f64) -> Result<Self> {
        let body = OblateBody { mass, radius, c20 };
        body.validate()?;
        Ok(body)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::domain(format!(
                "body mass must be positive, got {}",
                self.mass
            )));
        }
        if !(self.radius > 0.0) {
            return Err(Error::domain(format!(
                "body radius must be positive, got {}",
                self.radius
            )));
        }
        if !self.c20.is_finite() {
            return Err(Error::domain("c20 must be finite"));
        }
        Ok(())
    }

    /// `C = C₂₀ R² / 2`, the coefficient entering the side equations.
    pub fn zonal(&self) -> f64 {
        self.c20 * self.radius * self.radius / 2.0
    }
}

/// Relative equilibrium: mass ratio, sides and rotating-frame coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleConfig {
    pub mu: f64,
    pub u1: f64,
    pub u2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub delta: f64,
}

impl TriangleConfig {
    /// Builds the configuration from known sides.
    pub fn from_sides(mu: f64, u1: f64, u2: f64) -> Result<Self> {
        let (lambda1, lambda2, delta) = lambdas(mu, u1, u2)?;
        Ok(TriangleConfig {
            mu,
            u1,
            u2,
            lambda1,
            lambda2,
            delta,
        })
    }

    /// Solves the side equations for three bodies ordered `m₁ > m₂ > m₃`.
    pub fn from_bodies(bodies: &[OblateBody; 3]) -> Result<Self> {
        for b in bodies {
            b.validate()?;
        }
        let [b1, b2, b3] = bodies;
        if !(b1.mass > b2.mass && b2.mass > b3.mass) {
            return Err(Error::domain(format!(
                "masses must satisfy m1 > m2 > m3, got {}, {}, {}",
                b1.mass, b2.mass, b3.mass
            )));
        }
        let (u1, u2) = solve_triangle(b1.zonal(), b2.zonal(), b3.zonal())?;
        Self::from_sides(b2.mass / (b1.mass + b2.mass), u1, u2)
    }
}

/// Residual of one side equation: `1/u³ − 3C/u⁵ − rhs`.
pub fn side_residual(u: f64, coupling: f64, rhs: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(Error::domain(format!(
            "side length must be positive, got {u}"
        )));
    }
    Ok(side_fn(u, coupling) - rhs)
}

fn side_fn(u: f64, coupling: f64) -> f64 {
    let u2 = u * u;
    let u3 = u2 * u;
    1.0 / u3 - 3.0 * coupling / (u3 * u2)
}

fn side_slope(u: f64, coupling: f64) -> f64 {
    let u4 = u.powi(4);
    -3.0 / u4 + 15.0 * coupling / (u4 * u * u)
}

/// Solves `1/u³ − 3C/u⁵ = rhs` on [`SIDE_BRACKET`] by bisection polished
/// with safeguarded Newton steps.
pub fn solve_side(coupling: f64, rhs: f64) -> Result<f64> {
    let (lo, hi) = SIDE_BRACKET;
    // f' = -3u⁻⁶(u² − 5C) changes sign at most once, so equal end signs
    // imply monotonicity on the bracket.
    if side_slope(lo, coupling).signum() != side_slope(hi, coupling).signum() {
        return Err(Error::MultipleRoots { lo, hi, coupling });
    }
    let g_lo = side_fn(lo, coupling) - rhs;
    let g_hi = side_fn(hi, coupling) - rhs;
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::NoRoot {
            lo,
            hi,
            coupling,
            rhs,
        });
    }

    let (mut a, mut b) = (lo, hi);
    let rising = g_lo < 0.0;
    // Coarse bisection.
    while b - a > 1e-3 {
        let m = 0.5 * (a + b);
        let g = side_fn(m, coupling) - rhs;
        if g == 0.0 {
            return Ok(m);
        }
        if (g < 0.0) == rising {
            a = m;
        } else {
            b = m;
        }
    }

    let mut u = 0.5 * (a + b);
    for _ in 0..100 {
        let g = side_fn(u, coupling) - rhs;
        if g == 0.0 {
            return Ok(u);
        }
        if (g < 0.0) == rising {
            a = u;
        } else {
            b = u;
        }
        let mut next = u - g / side_slope(u, coupling);
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        let step = (next - u).abs();
        u = next;
        if step <= SIDE_TOL || b - a <= SIDE_TOL {
            break;
        }
    }
    Ok(u)
}

/// Sides `(u₁, u₂)` of the relative equilibrium for zonal coefficients
/// `C₁, C₂, C₃`.
pub fn solve_triangle(c1: f64, c2: f64, c3: f64) -> Result<(f64, f64)> {
    let rhs = 1.0 - 3.0 * (c1 + c2);
    if !(rhs > 0.0) {
        return Err(Error::domain(format!(
            "1 - 3(C1 + C2) must be positive, got {rhs}"
        )));
    }
    let u1 = solve_side(c1 + c3, rhs)?;
    let u2 = solve_side(c2 + c3, rhs)?;
    Ok((u1, u2))
}

/// Discriminant Δ of the λ formulas.
pub fn lambda_discriminant(mu: f64, u1: f64, u2: f64) -> f64 {
    let (u1s, u2s) = (u1 * u1, u2 * u2);
    let lead = mu * u1s * u1 + (1.0 - mu) * u2s * u2;
    let poly = -u1s * u1s - u2s * u2s + 2.0 * u1s + 2.0 * u2s + 2.0 * u1s * u2s - 1.0;
    lead * lead - mu * (1.0 - mu) * u1 * u2 * poly
}

/// Rotating-frame coefficients `(λ₁, λ₂, Δ)`; λ₁ takes the minus branch.
pub fn lambdas(mu: f64, u1: f64, u2: f64) -> Result<(f64, f64, f64)> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::domain(format!(
            "mass ratio must lie in [0, 1], got {mu}"
        )));
    }
    if !(u1 > 0.0 && u2 > 0.0) {
        return Err(Error::domain(format!(
            "sides must be positive, got u1 = {u1}, u2 = {u2}"
        )));
    }
    let delta = lambda_discriminant(mu, u1, u2);
    if delta < 0.0 {
        return Err(Error::domain(format!("discriminant is negative: {delta}")));
    }
    let (u1c, u2c) = (u1.powi(3), u2.powi(3));
    let (u1q, u2q) = (u1c * u1 * u1, u2c * u2 * u2);
    let trace =
        2.0 - 2.0 * (1.0 - mu) / u1q - 2.0 * mu / u2q + 3.0 * (1.0 - mu) / u1c + 3.0 * mu / u2c;
    let split = 3.0 * delta.sqrt() / (u1c * u2c);
    Ok((0.5 * (trace - split), 0.5 * (trace + split), delta))
}

/// Hill-rescaled oblateness `c = m₃^{-2/3} C₂₀ R² / 2`.
pub fn rescale_oblateness(c20: f64, radius: f64, m3: f64) -> Result<f64> {
    if !(m3 > 0.0) {
        return Err(Error::domain(format!("m3 must be positive, got {m3}")));
    }
    if !(radius > 0.0) {
        return Err(Error::domain(format!(
            "radius must be positive, got {radius}"
        )));
    }
    Ok(m3.powf(-2.0 / 3.0) * c20 * radius * radius / 2.0)
}
