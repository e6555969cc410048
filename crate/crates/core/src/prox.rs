//! Proximity operators and the metric-scaled prox.
//!
//! `prox_{γg}(x) = argmin_u g(u) + ||u - x||² / (2γ)`. Indicator functions
//! have projections as prox for every `γ`. [`prox_in_metric`] evaluates
//! `argmin_z g(z) + ½ (z - ξ)ᵀ A⁻¹ (z - ξ)` with a dual forward-backward
//! iteration that only needs `prox_{ρg}`.

use std::fmt::Debug;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::spd::SpdMatrix;

/// Relative slack used by the constraint sets, so that projected points
/// always test as feasible and projections are idempotent in floating point.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// A convex, lower semicontinuous function with a computable prox.
pub trait ProxFn: Send + Sync + Debug {
    /// `g(x)`, possibly `+∞`.
    fn eval(&self, x: &DVector<f64>) -> f64;

    /// `prox_{γg}(x)` for `γ > 0`.
    fn prox(&self, x: &DVector<f64>, gamma: f64) -> DVector<f64>;

    fn name(&self) -> &'static str;
}

/// `g ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Zero;

impl ProxFn for Zero {
    fn eval(&self, _x: &DVector<f64>) -> f64 {
        0.0
    }

    fn prox(&self, x: &DVector<f64>, _gamma: f64) -> DVector<f64> {
        x.clone()
    }

    fn name(&self) -> &'static str {
        "zero"
    }
}

/// `g(x) = α ||x||₁`.
#[derive(Debug, Clone, Copy)]
pub struct L1Norm {
    pub alpha: f64,
}

impl ProxFn for L1Norm {
    fn eval(&self, x: &DVector<f64>) -> f64 {
        self.alpha * x.iter().map(|v| v.abs()).sum::<f64>()
    }

    fn prox(&self, x: &DVector<f64>, gamma: f64) -> DVector<f64> {
        soft_threshold(x, gamma, self.alpha)
    }

    fn name(&self) -> &'static str {
        "l1"
    }
}

/// Indicator of the full-dimensional unit simplex `{x ≥ 0, Σ xᵢ ≤ 1}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimplexIndicator;

impl ProxFn for SimplexIndicator {
    fn eval(&self, x: &DVector<f64>) -> f64 {
        if in_simplex(x) {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn prox(&self, x: &DVector<f64>, _gamma: f64) -> DVector<f64> {
        project_simplex(x)
    }

    fn name(&self) -> &'static str {
        "simplex"
    }
}

/// Indicator of the Euclidean ball `{||x||₂ ≤ r}`.
#[derive(Debug, Clone, Copy)]
pub struct L2BallIndicator {
    pub radius: f64,
}

impl ProxFn for L2BallIndicator {
    fn eval(&self, x: &DVector<f64>) -> f64 {
        if x.norm() <= self.radius * (1.0 + FEASIBILITY_TOL) {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn prox(&self, x: &DVector<f64>, _gamma: f64) -> DVector<f64> {
        project_l2_ball(x, self.radius)
    }

    fn name(&self) -> &'static str {
        "l2_ball"
    }
}

/// `sign(xᵢ) max(|xᵢ| - γα, 0)`, the prox of `γ α ||·||₁`.
pub fn soft_threshold(x: &DVector<f64>, gamma: f64, alpha: f64) -> DVector<f64> {
    let t = gamma * alpha;
    x.map(|v| {
        if v > t {
            v - t
        } else if v < -t {
            v + t
        } else {
            0.0
        }
    })
}

fn in_simplex(x: &DVector<f64>) -> bool {
    x.iter().all(|&v| v >= 0.0) && x.sum() <= 1.0 + FEASIBILITY_TOL
}

/// Euclidean projection onto `{x ≥ 0, Σ xᵢ ≤ 1}`.
pub fn project_simplex(x: &DVector<f64>) -> DVector<f64> {
    let clipped = x.map(|v| v.max(0.0));
    if clipped.sum() <= 1.0 + FEASIBILITY_TOL {
        return clipped;
    }
    // the constraint Σ xᵢ ≤ 1 is active: project onto the face Σ xᵢ = 1
    let mut u: Vec<f64> = x.iter().copied().collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &v) in u.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    x.map(|v| (v - theta).max(0.0))
}

/// Euclidean projection onto the ball of radius `r` centred at the origin.
pub fn project_l2_ball(x: &DVector<f64>, r: f64) -> DVector<f64> {
    let n = x.norm();
    if n <= r * (1.0 + FEASIBILITY_TOL) {
        x.clone()
    } else {
        x * (r / n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DfbOutcome {
    pub point: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `Lξ_J` fell outside `dom g`; `point` is the feasible dual-side iterate.
    pub projected: bool,
}

/// `argmin_z g(z) + ½ (z - ξ)ᵀ A⁻¹ (z - ξ)` by dual forward-backward.
///
/// With `L = A^{1/2}` (symmetric), `ζ̃ = L⁻¹ξ`, `ρ = ||L||²` and `ζ₁ = Lξ`:
///
/// ```text
/// ξⱼ   = ζ̃ - Lᵀ ζⱼ
/// ζ̃ⱼ   = ζⱼ + ρ⁻¹ L ξⱼ
/// ζⱼ₊₁ = ζ̃ⱼ - ρ⁻¹ prox_{ρg}(ρ ζ̃ⱼ)
/// ```
///
/// Stops when `||ξⱼ - ξⱼ₋₁|| < tol ||ξⱼ₋₁||` or after `max_iter` passes and
/// returns `L ξ_J`. Hitting the cap is not an error; `converged` is false.
pub fn prox_in_metric(
    g: &dyn ProxFn,
    a: &SpdMatrix,
    xi: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<DfbOutcome> {
    if xi.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: xi.len(),
        });
    }
    if xi.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("prox argument"));
    }
    let l = a.sqrt();
    let zeta_tilde = a.inv_sqrt() * xi;
    let rho = a.max_eigenvalue();
    let mut zeta = l * xi;
    let mut prev: Option<DVector<f64>> = None;
    let mut feasible = DVector::zeros(xi.len());
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..max_iter.max(1) {
        iterations += 1;
        let xi_j = &zeta_tilde - l.tr_mul(&zeta);
        let zt = &zeta + (l * &xi_j) / rho;
        feasible = g.prox(&(&zt * rho), rho);
        zeta = &zt - &feasible / rho;
        let done = match &prev {
            Some(p) => {
                let scale = p.norm();
                let diff = (&xi_j - p).norm();
                if scale > 0.0 {
                    diff < tol * scale
                } else {
                    diff < tol
                }
            }
            None => false,
        };
        prev = Some(xi_j);
        if done {
            converged = true;
            break;
        }
    }
    let last = prev.expect("at least one iteration");
    let point = l * last;
    // For indicators Lξ_J is only asymptotically feasible; prox_{ρg}(ρζ̃_J)
    // converges to the same minimizer and always lies in dom g.
    if g.eval(&point).is_finite() {
        Ok(DfbOutcome { point, iterations, converged, projected: false })
    } else {
        Ok(DfbOutcome { point: feasible, iterations, converged, projected: true })
    }
}
