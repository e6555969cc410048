//! Ground truth by deterministic integration.
//!
//! 2-D targets are integrated with a midpoint Riemann sum on a box. For the
//! truncated banana in any dimension the integral reduces to two variables:
//! given `x₁`, the tail `y = (x₂..x_d)` is `N(c·1, I)` restricted to a ball,
//! so splitting `y` into its component `s` along `1/√(d-1)` and the orthogonal
//! radius `r` (chi distributed with `d - 2` degrees of freedom) leaves a sum
//! over `(x₁, s)` with chi-square CDF factors.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;

use super::{BananaNll, TargetModel, BANANA_RADIUS};
use crate::error::{Error, Result};

/// Axis-aligned integration box `[lo₀, hi₀] × [lo₁, hi₁]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Bounds {
    pub fn square(lo: f64, hi: f64) -> Self {
        Self {
            lo: [lo, lo],
            hi: [hi, hi],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub target: String,
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Bounds>,
    pub resolution: usize,
    pub mean: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub z: f64,
}

impl GroundTruth {
    /// Variance nonnegativity and a positive normalizer.
    pub fn is_consistent(&self) -> bool {
        self.z > 0.0
            && self
                .mean
                .iter()
                .zip(&self.second_moment)
                .all(|(m, s)| *s >= m * m * (1.0 - 1e-12))
    }
}

/// Midpoint Riemann sums of `Z`, `E[X]` and `E[X²]` over `bounds`.
pub fn grid_ground_truth(t: &TargetModel, bounds: Bounds, resolution: usize) -> Result<GroundTruth> {
    if t.dim() != 2 {
        return Err(Error::Unsupported(format!(
            "grid integration needs a 2-D target, got dim {}",
            t.dim()
        )));
    }
    if resolution == 0 {
        return Err(Error::InvalidConfig("resolution must be >= 1".into()));
    }
    let hx = (bounds.hi[0] - bounds.lo[0]) / resolution as f64;
    let hy = (bounds.hi[1] - bounds.lo[1]) / resolution as f64;
    if !(hx > 0.0 && hy > 0.0) {
        return Err(Error::InvalidConfig("empty integration box".into()));
    }
    // per-row partial sums, reduced afterwards in row order
    let rows: Vec<[f64; 5]> = (0..resolution)
        .into_par_iter()
        .map(|i| {
            let x0 = bounds.lo[0] + (i as f64 + 0.5) * hx;
            let mut p = nalgebra::DVector::from_vec(vec![x0, 0.0]);
            let mut acc = [0.0; 5];
            for j in 0..resolution {
                let x1 = bounds.lo[1] + (j as f64 + 0.5) * hy;
                p[1] = x1;
                let w = t.log_pi_unnorm(&p).exp();
                acc[0] += w;
                acc[1] += w * x0;
                acc[2] += w * x1;
                acc[3] += w * x0 * x0;
                acc[4] += w * x1 * x1;
            }
            acc
        })
        .collect();
    let mut tot = [0.0; 5];
    for r in &rows {
        for (a, b) in tot.iter_mut().zip(r) {
            *a += b;
        }
    }
    let z = tot[0] * hx * hy;
    if !(z > 0.0) {
        return Err(Error::DegenerateWeights);
    }
    Ok(GroundTruth {
        target: t.id.clone(),
        method: "grid".into(),
        bounds: Some(bounds),
        resolution,
        mean: vec![tot[1] / tot[0], tot[2] / tot[0]],
        second_moment: vec![tot[3] / tot[0], tot[4] / tot[0]],
        z,
    })
}

fn chi2_cdf(k: usize, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if k == 0 {
        1.0
    } else {
        gamma_lr(k as f64 / 2.0, x / 2.0)
    }
}

/// Moments of the banana target truncated to `||x|| ≤ 4`, by the
/// two-variable reduction over `(x₁, s)` with `resolution` midpoints per axis.
pub fn banana_reference(banana: &BananaNll, resolution: usize) -> Result<GroundTruth> {
    use super::SmoothFn;
    if resolution == 0 {
        return Err(Error::InvalidConfig("resolution must be >= 1".into()));
    }
    let d = banana.dim();
    let m = (d - 1) as f64;
    let k = d - 2;
    let radius = BANANA_RADIUS;
    let (b, eta) = (banana.b(), banana.eta());
    let hx = 2.0 * radius / resolution as f64;
    // columns: Σw, Σw x₁, Σw x₁², Σw s, Σw s², Σ (w/F_k) k F_{k+2}
    let rows: Vec<[f64; 6]> = (0..resolution)
        .into_par_iter()
        .map(|i| {
            let x1 = -radius + (i as f64 + 0.5) * hx;
            let rho2 = radius * radius - x1 * x1;
            let mut acc = [0.0; 6];
            if rho2 <= 0.0 {
                return acc;
            }
            let rho = rho2.sqrt();
            let hs = 2.0 * rho / resolution as f64;
            // y ~ N(-b(x₁² - η²)·1, I), so s ~ N(-b(x₁² - η²)√m, 1)
            let s_mean = -b * (x1 * x1 - eta * eta) * m.sqrt();
            let px1 = (-x1 * x1 / (2.0 * eta * eta)).exp();
            for j in 0..resolution {
                let s = -rho + (j as f64 + 0.5) * hs;
                let rem = rho2 - s * s;
                let phi = (-(s - s_mean) * (s - s_mean) / 2.0).exp() / (2.0 * PI).sqrt();
                let base = px1 * phi * hs * hx;
                let w = base * chi2_cdf(k, rem);
                acc[0] += w;
                acc[1] += w * x1;
                acc[2] += w * x1 * x1;
                acc[3] += w * s;
                acc[4] += w * s * s;
                // E[r² 1{r² ≤ c}] = k F_{k+2}(c) for r² ~ χ²_k
                acc[5] += base * k as f64 * chi2_cdf(k + 2, rem);
            }
            acc
        })
        .collect();
    let mut tot = [0.0; 6];
    for r in &rows {
        for (a, b) in tot.iter_mut().zip(r) {
            *a += b;
        }
    }
    if !(tot[0] > 0.0) {
        return Err(Error::DegenerateWeights);
    }
    let mut mean = vec![tot[3] / tot[0] / m.sqrt(); d];
    mean[0] = tot[1] / tot[0];
    let mut second = vec![(tot[4] + tot[5]) / tot[0] / m; d];
    second[0] = tot[2] / tot[0];
    Ok(GroundTruth {
        target: "example-c".into(),
        method: "banana-reduction".into(),
        bounds: None,
        resolution,
        mean,
        second_moment: second,
        z: tot[0] * (2.0 * PI).powf(m / 2.0),
    })
}

/// Self-normalized reference by exact sampling of the untruncated banana
/// followed by rejection outside the ball. Slow, and hopeless once the ball
/// holds a negligible share of the mass; kept as a cross-check.
pub fn banana_rejection_reference(banana: &BananaNll, n_samples: usize, seed: u64) -> Result<GroundTruth> {
    use super::SmoothFn;
    use rand::Rng;
    use rand_distr::StandardNormal;
    let d = banana.dim();
    let (b, eta) = (banana.b(), banana.eta());
    let mut rng = crate::rng::substream(seed, crate::rng::StreamTag::Sample, 0, 0, 0);
    let mut x = vec![0.0; d];
    let mut sum = vec![0.0; d];
    let mut sum2 = vec![0.0; d];
    let mut accepted = 0usize;
    for _ in 0..n_samples {
        let z: f64 = rng.sample(StandardNormal);
        x[0] = eta * z;
        let shift = -b * (x[0] * x[0] - eta * eta);
        for xi in x.iter_mut().skip(1) {
            let e: f64 = rng.sample(StandardNormal);
            *xi = shift + e;
        }
        if x.iter().map(|v| v * v).sum::<f64>() <= BANANA_RADIUS * BANANA_RADIUS {
            accepted += 1;
            for i in 0..d {
                sum[i] += x[i];
                sum2[i] += x[i] * x[i];
            }
        }
    }
    if accepted == 0 {
        return Err(Error::DegenerateWeights);
    }
    let a = accepted as f64;
    let full = (2.0 * PI).sqrt() * eta * (2.0 * PI).powf((d - 1) as f64 / 2.0);
    Ok(GroundTruth {
        target: "example-c".into(),
        method: "banana-rejection".into(),
        bounds: None,
        resolution: n_samples,
        mean: sum.iter().map(|s| s / a).collect(),
        second_moment: sum2.iter().map(|s| s / a).collect(),
        z: full * a / n_samples as f64,
    })
}
