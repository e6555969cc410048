use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::SmoothFn;
use crate::error::{Error, Result};
use crate::spd::SpdMatrix;

/// `f(x) = -log(c · N(x; m, Σ))`.
#[derive(Debug, Clone)]
pub struct GaussianNll {
    mean: DVector<f64>,
    precision: DMatrix<f64>,
    log_norm: f64,
    log_scale: f64,
}

impl GaussianNll {
    pub fn new(mean: DVector<f64>, cov: SpdMatrix) -> Self {
        let d = mean.len() as f64;
        Self {
            log_norm: 0.5 * (d * (2.0 * PI).ln() + cov.log_det()),
            precision: cov.inverse().clone(),
            mean,
            log_scale: 0.0,
        }
    }

    pub fn with_log_scale(mut self, log_scale: f64) -> Self {
        self.log_scale = log_scale;
        self
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }
}

impl SmoothFn for GaussianNll {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let r = x - &self.mean;
        0.5 * r.dot(&(&self.precision * &r)) + self.log_norm - self.log_scale
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.precision * (x - &self.mean)
    }

    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        self.precision.clone()
    }
}

/// `f(x) = -log Σⱼ wⱼ N(x; mⱼ, Σⱼ)`.
///
/// With responsibilities `rⱼ` and component terms `gⱼ = ∇fⱼ`, `Hⱼ = ∇²fⱼ`:
/// `∇f = Σ rⱼ gⱼ` and `∇²f = Σ rⱼ (Hⱼ - gⱼ gⱼᵀ) + (Σ rⱼ gⱼ)(Σ rⱼ gⱼ)ᵀ`.
#[derive(Debug, Clone)]
pub struct GaussianMixtureNll {
    log_weights: Vec<f64>,
    components: Vec<GaussianNll>,
}

impl GaussianMixtureNll {
    pub fn new(weights: Vec<f64>, components: Vec<GaussianNll>) -> Result<Self> {
        if weights.len() != components.len() || components.is_empty() {
            return Err(Error::InvalidConfig("mixture needs one weight per component".into()));
        }
        let dim = components[0].dim();
        if components.iter().any(|c| c.dim() != dim) {
            return Err(Error::InvalidConfig("mixture components differ in dimension".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidConfig("mixture weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        Ok(Self {
            log_weights: weights.iter().map(|w| (w / total).ln()).collect(),
            components,
        })
    }

    /// Per-component `log wⱼ - fⱼ(x)`.
    fn log_terms(&self, x: &DVector<f64>) -> Vec<f64> {
        self.components
            .iter()
            .zip(&self.log_weights)
            .map(|(c, lw)| lw - c.value(x))
            .collect()
    }

    fn responsibilities(&self, x: &DVector<f64>) -> (f64, Vec<f64>) {
        let terms = self.log_terms(x);
        let lse = log_sum_exp(&terms);
        let r = terms.iter().map(|t| (t - lse).exp()).collect();
        (lse, r)
    }
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl SmoothFn for GaussianMixtureNll {
    fn dim(&self) -> usize {
        self.components[0].dim()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        -log_sum_exp(&self.log_terms(x))
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let (_, r) = self.responsibilities(x);
        self.components
            .iter()
            .zip(&r)
            .fold(DVector::zeros(self.dim()), |acc, (c, rj)| acc + c.gradient(x) * *rj)
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let (_, r) = self.responsibilities(x);
        let d = self.dim();
        let mut h = DMatrix::zeros(d, d);
        let mut gbar = DVector::zeros(d);
        for (c, rj) in self.components.iter().zip(&r) {
            let g = c.gradient(x);
            h += (c.hessian(x) - &g * g.transpose()) * *rj;
            gbar += g * *rj;
        }
        h + &gbar * gbar.transpose()
    }
}
