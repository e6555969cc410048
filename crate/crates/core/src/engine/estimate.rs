//! Self-normalized estimators and error metrics.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::sample::WeightedSample;

/// Self-normalized estimate of `E_π[φ(X)]`.
pub fn estimate<F>(samples: &[WeightedSample], phi: F) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let total: f64 = samples.iter().map(|s| s.weight).sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateWeights);
    }
    let mut acc: Option<DVector<f64>> = None;
    for s in samples.iter().filter(|s| s.weight > 0.0) {
        let v = phi(&s.x) * s.weight;
        match acc.as_mut() {
            Some(a) => *a += v,
            None => acc = Some(v),
        }
    }
    // total > 0 guarantees at least one contribution
    Ok(acc.expect("positive weight") / total)
}

pub fn snis_mean(samples: &[WeightedSample]) -> Result<DVector<f64>> {
    estimate(samples, |x| x.clone())
}

pub fn snis_second_moment(samples: &[WeightedSample]) -> Result<DVector<f64>> {
    estimate(samples, |x| x.component_mul(x))
}

/// Unbiased normalizer estimate: the mean of all unnormalized weights.
pub fn z_hat(samples: &[WeightedSample]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.weight).sum::<f64>() / samples.len() as f64
}

/// `(1/R) Σ_r ‖Î_r − I‖² / ‖I‖²` over `R` runs.
pub fn relative_mse(estimates: &[DVector<f64>], truth: &DVector<f64>) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::NoRuns);
    }
    let denom = truth.norm_squared();
    if denom == 0.0 {
        return Err(Error::ZeroTruth);
    }
    let mut total = 0.0;
    for e in estimates {
        if e.len() != truth.len() {
            return Err(Error::DimensionMismatch {
                expected: truth.len(),
                got: e.len(),
            });
        }
        total += (e - truth).norm_squared();
    }
    Ok(total / estimates.len() as f64 / denom)
}

/// Per-coordinate relative MSE; `None` where the true value is zero.
pub fn relative_mse_per_coord(estimates: &[DVector<f64>], truth: &DVector<f64>) -> Result<Vec<Option<f64>>> {
    if estimates.is_empty() {
        return Err(Error::NoRuns);
    }
    if let Some(e) = estimates.iter().find(|e| e.len() != truth.len()) {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: e.len(),
        });
    }
    Ok((0..truth.len())
        .map(|i| {
            let t = truth[i];
            (t != 0.0).then(|| {
                estimates.iter().map(|e| (e[i] - t).powi(2)).sum::<f64>() / estimates.len() as f64 / (t * t)
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws(x: &[f64], w: f64) -> WeightedSample {
        WeightedSample::new(DVector::from_row_slice(x), w, 1, 1).unwrap()
    }

    #[test]
    fn weighted_average_by_hand() {
        let s = [ws(&[1.0, 0.0], 1.0), ws(&[3.0, 2.0], 3.0), ws(&[100.0, 100.0], 0.0)];
        let m = snis_mean(&s).unwrap();
        assert!((m[0] - 2.5).abs() < 1e-15 && (m[1] - 1.5).abs() < 1e-15);
        let q = snis_second_moment(&s).unwrap();
        assert!((q[0] - 7.0).abs() < 1e-14 && (q[1] - 3.0).abs() < 1e-14);
        assert_eq!(z_hat(&s), 4.0 / 3.0);
    }

    #[test]
    fn snis_is_scale_invariant() {
        let s = [ws(&[1.0], 0.2), ws(&[-2.0], 0.7)];
        let t = [ws(&[1.0], 2.0), ws(&[-2.0], 7.0)];
        assert!((snis_mean(&s).unwrap()[0] - snis_mean(&t).unwrap()[0]).abs() < 1e-15);
    }

    #[test]
    fn zero_weights_are_degenerate() {
        let s = [ws(&[1.0], 0.0)];
        assert_eq!(snis_mean(&s).unwrap_err(), Error::DegenerateWeights);
        assert_eq!(z_hat(&[]), 0.0);
    }

    #[test]
    fn relative_mse_by_hand() {
        let truth = DVector::from_vec(vec![1.0, 1.0]);
        let est = [DVector::from_vec(vec![1.1, 1.0]), DVector::from_vec(vec![1.0, 0.7])];
        // (0.01 + 0.09) / 2 / 2
        assert!((relative_mse(&est, &truth).unwrap() - 0.025).abs() < 1e-15);
        let per = relative_mse_per_coord(&est, &truth).unwrap();
        assert!((per[0].unwrap() - 0.005).abs() < 1e-15);
        assert!((per[1].unwrap() - 0.045).abs() < 1e-15);
    }

    #[test]
    fn relative_mse_errors() {
        let zero = DVector::zeros(2);
        let e = [DVector::from_vec(vec![1.0, 0.0])];
        assert_eq!(relative_mse(&e, &zero).unwrap_err(), Error::ZeroTruth);
        assert_eq!(relative_mse(&[], &e[0]).unwrap_err(), Error::NoRuns);
        let bad = [DVector::from_vec(vec![1.0])];
        assert!(relative_mse(&bad, &e[0]).is_err());
        let per = relative_mse_per_coord(&e, &e[0]).unwrap();
        assert_eq!(per, vec![Some(0.0), None]);
    }
}
