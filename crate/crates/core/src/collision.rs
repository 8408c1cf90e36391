//! Dynamics on the collision set `Z = {r = 0}`: the reduced `(v, w)`
//! system, its first integral, equilibria and their bifurcation in `c`, and
//! the branch/block regularizability predicates.

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcgehee::McGeheeState;
use crate::rational::{int, pow_nonneg, to_f64, Rational};

/// Point of the reduced system with its θ companion.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReducedState {
    pub v: f64,
    pub w: f64,
    pub theta: f64,
}

impl ReducedState {
    pub fn new(v: f64, w: f64) -> Self {
        ReducedState { v, w, theta: 0.0 }
    }
}

/// `(θ′, v′, w′)`.
pub type ReducedRates = [f64; 3];

/// The collision manifold `N_h = {r = 0, v² + w² = 2c}`, independent of `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionManifold {
    pub c: f64,
    pub radius_sq: f64,
}

impl CollisionManifold {
    pub fn new(c: f64) -> Self {
        CollisionManifold {
            c,
            radius_sq: 2.0 * c,
        }
    }

    /// A 2-torus for `c > 0`; a single circle point-set at `c = 0`.
    pub fn is_empty(&self) -> bool {
        self.c < 0.0
    }
}

/// `θ′ = w`, `v′ = βv² + w² − αc`, `w′ = (β−1)vw`.
pub fn reduced_field(
    state: &ReducedState,
    beta: Rational,
    alpha: Rational,
    c: f64,
) -> ReducedRates {
    let (beta, alpha) = (to_f64(beta), to_f64(alpha));
    let ReducedState { v, w, .. } = *state;
    [w, beta * v * v + w * w - alpha * c, (beta - 1.0) * v * w]
}

/// Reduced system as an integrator right-hand side on `[θ, v, w]`.
pub fn reduced_system(
    alpha: Rational,
    beta: Rational,
    c: f64,
) -> impl Fn(f64, &[f64], &mut [f64]) -> Result<()> + Send + Sync {
    move |_, y, dy| {
        let f = reduced_field(
            &ReducedState {
                theta: y[0],
                v: y[1],
                w: y[2],
            },
            beta,
            alpha,
            c,
        );
        dy.copy_from_slice(&f);
        Ok(())
    }
}

/// First integral `K = |w|^α |v² + w² − 2c|^{1−β}` of the reduced system
/// (for `α = 2β`).
pub fn integral_k(v: f64, w: f64, alpha: Rational, beta: Rational, c: f64) -> Result<f64> {
    let q = v * v + w * w - 2.0 * c;
    let exponent = int(1) - beta;
    if q == 0.0 && exponent < int(0) {
        return Err(Error::DivergentValue(format!(
            "K is infinite on the invariant circle v² + w² = 2c (β = {beta})"
        )));
    }
    Ok(pow_nonneg(w.abs(), alpha) * pow_nonneg(q.abs(), exponent))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquilibriumKind {
    Saddle,
    Source,
    Sink,
    /// Purely imaginary eigenvalues (only for β < 1).
    Center,
    Degenerate,
}

impl EquilibriumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EquilibriumKind::Saddle => "saddle",
            EquilibriumKind::Source => "source",
            EquilibriumKind::Sink => "sink",
            EquilibriumKind::Center => "center",
            EquilibriumKind::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquilibriumName {
    #[serde(rename = "S+")]
    SPlus,
    #[serde(rename = "S-")]
    SMinus,
    #[serde(rename = "Q+")]
    QPlus,
    #[serde(rename = "Q-")]
    QMinus,
    #[serde(rename = "O")]
    Origin,
}

impl EquilibriumName {
    pub fn as_str(&self) -> &'static str {
        match self {
            EquilibriumName::SPlus => "S+",
            EquilibriumName::SMinus => "S-",
            EquilibriumName::QPlus => "Q+",
            EquilibriumName::QMinus => "Q-",
            EquilibriumName::Origin => "O",
        }
    }
}

/// Eigenvalue `re + i·im` of the linearisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl Eigenvalue {
    pub fn real(re: f64) -> Self {
        Eigenvalue { re, im: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub name: EquilibriumName,
    pub v: f64,
    pub w: f64,
    pub eigenvalues: [Eigenvalue; 2],
    pub kind: EquilibriumKind,
}

impl EquilibriumPoint {
    fn new(name: EquilibriumName, v: f64, w: f64, eigenvalues: [Eigenvalue; 2]) -> Self {
        EquilibriumPoint {
            name,
            v,
            w,
            eigenvalues,
            kind: classify_eigenvalues(&eigenvalues),
        }
    }

    pub fn location(&self) -> (f64, f64) {
        (self.v, self.w)
    }
}

fn classify_eigenvalues(ev: &[Eigenvalue; 2]) -> EquilibriumKind {
    let [a, b] = *ev;
    if a.im != 0.0 || b.im != 0.0 {
        return if a.re == 0.0 {
            EquilibriumKind::Center
        } else if a.re > 0.0 {
            EquilibriumKind::Source
        } else {
            EquilibriumKind::Sink
        };
    }
    if a.re == 0.0 || b.re == 0.0 {
        EquilibriumKind::Degenerate
    } else if a.re > 0.0 && b.re > 0.0 {
        EquilibriumKind::Source
    } else if a.re < 0.0 && b.re < 0.0 {
        EquilibriumKind::Sink
    } else {
        EquilibriumKind::Saddle
    }
}

/// Equilibria of the reduced `(v, w)` system with closed-form eigenvalues,
/// ordered `S₊, S₋, Q₊, Q₋`. For `c = 0` a single degenerate point at the
/// origin; for `c < 0` none.
pub fn equilibria(alpha: Rational, beta: Rational, c: f64) -> Vec<EquilibriumPoint> {
    use EquilibriumName::*;
    if c < 0.0 {
        return Vec::new();
    }
    let zero = Eigenvalue::real(0.0);
    if c == 0.0 {
        return vec![EquilibriumPoint::new(Origin, 0.0, 0.0, [zero, zero])];
    }
    let (a, b) = (to_f64(alpha), to_f64(beta));
    let ws = (a * c).sqrt();
    // λ² = 2(β−1)αc at S±.
    let disc = 2.0 * (b - 1.0) * a * c;
    let s_eigs = if disc > 0.0 {
        let l = disc.sqrt();
        [Eigenvalue::real(l), Eigenvalue::real(-l)]
    } else if disc < 0.0 {
        let l = (-disc).sqrt();
        [
            Eigenvalue { re: 0.0, im: l },
            Eigenvalue { re: 0.0, im: -l },
        ]
    } else {
        [zero, zero]
    };
    // βv² = αc on the invariant line w = 0.
    let vq = (a * c / b).sqrt();
    let q_eigs = |v: f64| {
        [
            Eigenvalue::real(2.0 * b * v),
            Eigenvalue::real((b - 1.0) * v),
        ]
    };
    vec![
        EquilibriumPoint::new(SPlus, 0.0, ws, s_eigs),
        EquilibriumPoint::new(SMinus, 0.0, -ws, s_eigs),
        EquilibriumPoint::new(QPlus, vq, 0.0, q_eigs(vq)),
        EquilibriumPoint::new(QMinus, -vq, 0.0, q_eigs(-vq)),
    ]
}

/// One row of a bifurcation scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub c: f64,
    pub count: usize,
    pub kinds: Vec<EquilibriumKind>,
    pub points: Vec<EquilibriumPoint>,
}

impl ScanRow {
    pub fn max_pairwise_distance(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                best = best.max((p.v - q.v).hypot(p.w - q.w));
            }
        }
        best
    }
}

/// Equilibria for each `c`, in input order.
pub fn bifurcation_scan(alpha: Rational, beta: Rational, c_values: &[f64]) -> Result<Vec<ScanRow>> {
    if let Some(c) = c_values.iter().find(|c| !c.is_finite()) {
        return Err(Error::domain(format!(
            "scan values must be finite, got {c}"
        )));
    }
    Ok(c_values
        .par_iter()
        .map(|&c| {
            let points = equilibria(alpha, beta, c);
            ScanRow {
                c,
                count: points.len(),
                kinds: points.iter().map(|p| p.kind).collect(),
                points,
            }
        })
        .collect())
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| {
                let s = i as f64 / (steps - 1) as f64;
                (1.0 - s) * lo + s * hi
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extension {
    Reflection,
    Transmission,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchCriterion {
    /// One homogeneous term `|x|^{−α}`.
    SingleTerm,
    /// Two homogeneous terms with exponents ν and α.
    TwoTerm,
}

/// Exact branch/block verdicts for a (quasi-)homogeneous singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularizabilityReport {
    pub criterion: BranchCriterion,
    pub gamma_p: i64,
    pub gamma_q: i64,
    /// `min/(2 + max)` in lowest terms; only for the two-term criterion.
    pub second_ratio_p: Option<i64>,
    pub second_ratio_q: Option<i64>,
    pub beta_p: i64,
    pub beta_q: i64,
    pub branch: bool,
    pub extension: Extension,
    pub block: bool,
}

impl RegularizabilityReport {
    pub fn gamma(&self) -> Rational {
        Rational::new(self.gamma_p, self.gamma_q)
    }
}

/// `p/q` in lowest terms with `0 < p < q` and `q` odd.
fn odd_denominator_fraction(x: Rational) -> bool {
    let (p, q) = (*x.numer(), *x.denom());
    debug_assert_eq!(p.gcd(&q), 1);
    p > 0 && p < q && q.is_odd()
}

/// Branch regularizability of collisions in `|x|^{−α}` (single term) or in
/// the quasi-homogeneous potential with exponents ν and α (two terms).
pub fn classify_branch(
    nu: Rational,
    alpha: Rational,
    criterion: BranchCriterion,
) -> Result<RegularizabilityReport> {
    let zero = int(0);
    if alpha <= zero || (criterion == BranchCriterion::TwoTerm && nu <= zero) {
        return Err(Error::domain(format!(
            "exponents must be positive, got ν = {nu}, α = {alpha}"
        )));
    }
    let two = int(2);
    let (top, second) = match criterion {
        BranchCriterion::SingleTerm => (alpha, None),
        BranchCriterion::TwoTerm => {
            let (lo, hi) = if nu <= alpha {
                (nu, alpha)
            } else {
                (alpha, nu)
            };
            (hi, Some(lo / (two + hi)))
        }
    };
    let gamma = two / (two + top);
    let beta = top / two;
    let branch = odd_denominator_fraction(gamma) && second.is_none_or(odd_denominator_fraction);
    let extension = if !branch {
        Extension::None
    } else if gamma.numer().is_even() {
        Extension::Reflection
    } else {
        Extension::Transmission
    };
    Ok(RegularizabilityReport {
        criterion,
        gamma_p: *gamma.numer(),
        gamma_q: *gamma.denom(),
        second_ratio_p: second.map(|s| *s.numer()),
        second_ratio_q: second.map(|s| *s.denom()),
        beta_p: *beta.numer(),
        beta_q: *beta.denom(),
        branch,
        extension,
        block: classify_block(beta),
    })
}

/// Classification for the Hill potential `−|x|^{−ν} − c|x|^{−α}`: the
/// two-term criterion needs both coefficients positive (`c > 0`); otherwise
/// only the Newtonian term is classified.
pub fn classify_for_coupling(
    nu: Rational,
    alpha: Rational,
    c: f64,
) -> Result<RegularizabilityReport> {
    if c > 0.0 {
        classify_branch(nu, alpha, BranchCriterion::TwoTerm)
    } else {
        classify_branch(nu, nu, BranchCriterion::SingleTerm)
    }
}

/// Block regularizable iff `β = 1 − 1/n` for a positive integer `n`.
pub fn classify_block(beta: Rational) -> bool {
    let one = int(1);
    if beta >= one {
        return false;
    }
    let n = one / (one - beta);
    n.is_integer() && n >= one
}

/// `r ≤ tol` and `|v² + w² − 2c| ≤ tol`.
pub fn on_collision_manifold(state: &McGeheeState, c: f64, tol: f64) -> bool {
    state.r <= tol && (state.v * state.v + state.w * state.w - 2.0 * c).abs() <= tol
}
