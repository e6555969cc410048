use nalgebra::{DMatrix, DVector};

use super::SmoothFn;
use crate::error::{Error, Result};

/// `f(x) = x₁²/(2η²) + ½ Σ_{i≥2} (xᵢ + b(x₁² - η²))²`.
///
/// Untruncated, `x₁ ~ N(0, η²)` and `xᵢ | x₁ ~ N(-b(x₁² - η²), 1)`.
#[derive(Debug, Clone, Copy)]
pub struct BananaNll {
    dim: usize,
    b: f64,
    eta: f64,
}

impl BananaNll {
    pub fn new(dim: usize, b: f64, eta: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidConfig("banana target needs dim >= 2".into()));
        }
        if !(eta > 0.0) || !b.is_finite() {
            return Err(Error::InvalidConfig("banana needs eta > 0 and finite b".into()));
        }
        Ok(Self { dim, b, eta })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    fn shift(&self, x1: f64) -> f64 {
        self.b * (x1 * x1 - self.eta * self.eta)
    }
}

impl SmoothFn for BananaNll {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let s = self.shift(x[0]);
        let tail: f64 = x.iter().skip(1).map(|xi| (xi + s) * (xi + s)).sum();
        x[0] * x[0] / (2.0 * self.eta * self.eta) + 0.5 * tail
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let s = self.shift(x[0]);
        let mut g = DVector::zeros(self.dim);
        let mut sum_u = 0.0;
        for i in 1..self.dim {
            let u = x[i] + s;
            g[i] = u;
            sum_u += u;
        }
        g[0] = x[0] / (self.eta * self.eta) + 2.0 * self.b * x[0] * sum_u;
        g
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let s = self.shift(x[0]);
        let sum_u: f64 = x.iter().skip(1).map(|xi| xi + s).sum();
        let c = 2.0 * self.b * x[0];
        let m = (self.dim - 1) as f64;
        let mut h = DMatrix::identity(self.dim, self.dim);
        h[(0, 0)] = 1.0 / (self.eta * self.eta) + m * c * c + 2.0 * self.b * sum_u;
        for i in 1..self.dim {
            h[(0, i)] = c;
            h[(i, 0)] = c;
        }
        h
    }
}
