use nalgebra::DVector;

use crate::error::{Error, Result};

/// One draw with its DM-MIS weight. `proposal` and `iteration` are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    pub x: DVector<f64>,
    pub weight: f64,
    pub proposal: usize,
    pub iteration: usize,
}

impl WeightedSample {
    pub fn new(x: DVector<f64>, weight: f64, proposal: usize, iteration: usize) -> Result<Self> {
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::InvalidWeight(weight));
        }
        Ok(Self {
            x,
            weight,
            proposal,
            iteration,
        })
    }
}
