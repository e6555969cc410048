//! Targets `π(x) = exp(-f(x) - g(x))` and their ground truth.

mod banana;
mod gaussian;
mod ground_truth;

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

pub use banana::BananaNll;
pub use gaussian::{GaussianMixtureNll, GaussianNll};
pub use ground_truth::{banana_reference, banana_rejection_reference, grid_ground_truth, Bounds, GroundTruth};

use crate::error::{Error, Result};
use crate::prox::{L1Norm, L2BallIndicator, ProxFn, SimplexIndicator, Zero};
use crate::spd::SpdMatrix;

/// The smooth part `f` with its derivatives.
pub trait SmoothFn: Send + Sync + Debug {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;
}

/// The pair `(f, g)` defining `π ∝ exp(-f - g)`.
#[derive(Debug, Clone)]
pub struct TargetModel {
    pub id: String,
    smooth: Arc<dyn SmoothFn>,
    nonsmooth: Arc<dyn ProxFn>,
}

impl TargetModel {
    pub fn new(id: impl Into<String>, smooth: Arc<dyn SmoothFn>, nonsmooth: Arc<dyn ProxFn>) -> Self {
        Self {
            id: id.into(),
            smooth,
            nonsmooth,
        }
    }

    pub fn dim(&self) -> usize {
        self.smooth.dim()
    }

    pub fn f(&self, x: &DVector<f64>) -> f64 {
        self.smooth.value(x)
    }

    pub fn grad_f(&self, x: &DVector<f64>) -> DVector<f64> {
        self.smooth.gradient(x)
    }

    pub fn hess_f(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.smooth.hessian(x)
    }

    pub fn g(&self, x: &DVector<f64>) -> f64 {
        self.nonsmooth.eval(x)
    }

    pub fn prox_g(&self, x: &DVector<f64>, gamma: f64) -> DVector<f64> {
        self.nonsmooth.prox(x, gamma)
    }

    pub fn nonsmooth(&self) -> &dyn ProxFn {
        self.nonsmooth.as_ref()
    }

    /// `-f(x) - g(x)`; `-∞` outside `dom g` (without evaluating `f`).
    pub fn log_pi_unnorm(&self, x: &DVector<f64>) -> f64 {
        let g = self.g(x);
        if g == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        let v = -self.f(x) - g;
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }
}

/// Equal-weight mixture of `N([0.1, 0.3], 0.01 I)` and `N([0.7, 0.4], 0.01 I)`
/// truncated to the unit simplex.
pub fn make_example_a() -> TargetModel {
    let cov = SpdMatrix::scaled_identity(2, 0.01).expect("SPD");
    let comps = vec![
        GaussianNll::new(DVector::from_vec(vec![0.1, 0.3]), cov.clone()),
        GaussianNll::new(DVector::from_vec(vec![0.7, 0.4]), cov),
    ];
    let f = GaussianMixtureNll::new(vec![0.5, 0.5], comps).expect("valid mixture");
    TargetModel::new("example-a", Arc::new(f), Arc::new(SimplexIndicator))
}

/// Gaussian likelihood `N(x; [0.5, 0.5], 0.25 I)` with the prior `exp(-2 ||x||₁)`.
pub fn make_example_b() -> TargetModel {
    let f = GaussianNll::new(
        DVector::from_vec(vec![0.5, 0.5]),
        SpdMatrix::scaled_identity(2, 0.25).expect("SPD"),
    );
    TargetModel::new("example-b", Arc::new(f), Arc::new(L1Norm { alpha: 2.0 }))
}

pub const BANANA_RADIUS: f64 = 4.0;
pub const BANANA_DEFAULT_B: f64 = 3.0;
pub const BANANA_DEFAULT_ETA: f64 = 1.0;

/// Banana-shaped target truncated to the ball `||x||₂ ≤ 4`.
pub fn make_example_c(dim: usize, b: f64, eta: f64) -> Result<TargetModel> {
    let f = BananaNll::new(dim, b, eta)?;
    Ok(TargetModel::new(
        "example-c",
        Arc::new(f),
        Arc::new(L2BallIndicator {
            radius: BANANA_RADIUS,
        }),
    ))
}

/// Untruncated `scale · N(mean, cov)`, so the normalization constant is `scale`.
pub fn make_gaussian(mean: DVector<f64>, cov: SpdMatrix, scale: f64) -> Result<TargetModel> {
    if mean.len() != cov.dim() {
        return Err(Error::DimensionMismatch {
            expected: cov.dim(),
            got: mean.len(),
        });
    }
    if !(scale > 0.0) {
        return Err(Error::InvalidConfig("gaussian scale must be positive".into()));
    }
    let f = GaussianNll::new(mean, cov).with_log_scale(scale.ln());
    Ok(TargetModel::new("gaussian", Arc::new(f), Arc::new(Zero)))
}
