//! Gaussian proposals.

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spd::SpdMatrix;

/// Static proposal parameters. Gaussian proposals carry none; the record is
/// kept so every mixture component has the `(μ, Σ, ν)` shape.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StaticParams;

#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub mu: DVector<f64>,
    pub sigma: SpdMatrix,
    pub nu: StaticParams,
}

impl Proposal {
    pub fn new(mu: DVector<f64>, sigma: SpdMatrix) -> Result<Self> {
        if mu.len() != sigma.dim() {
            return Err(Error::DimensionMismatch {
                expected: sigma.dim(),
                got: mu.len(),
            });
        }
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("proposal mean"));
        }
        Ok(Self {
            mu,
            sigma,
            nu: StaticParams,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }
}

/// Fully normalized `log N(x; μ, Σ)`.
pub fn gaussian_log_density(x: &DVector<f64>, p: &Proposal) -> Result<f64> {
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("density argument"));
    }
    let d = p.dim() as f64;
    let maha = p.sigma.inv_quad_form(&(x - &p.mu));
    Ok(-0.5 * (d * (2.0 * PI).ln() + p.sigma.log_det() + maha))
}

/// Draws `μ + L z` with `z` standard normal and `L` the Cholesky factor of Σ.
pub fn gaussian_sample<R: Rng + ?Sized>(p: &Proposal, rng: &mut R) -> DVector<f64> {
    let z = DVector::<f64>::from_fn(p.dim(), |_, _| rng.sample(StandardNormal));
    &p.mu + p.sigma.cholesky() * z
}
