//! Sampler configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResamplingMode {
    Global,
    Local,
    Glocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdaptationMode {
    /// No adaptation at all (DM-PMC).
    None,
    /// Identity-metric proximal gradient step (PNAIS-grad).
    ProxGrad,
    /// Newton-scaled proximal step (PNAIS).
    ProxNewton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceMode {
    /// `Σ = σ² I` at every iteration.
    Fixed,
    /// Weighted empirical covariance of the originating pool.
    Robust,
    /// `Σ = θ Γ`, the damped Newton-like matrix.
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BacktrackingConfig {
    pub tau: f64,
    pub max_steps: usize,
}

impl Default for BacktrackingConfig {
    fn default() -> Self {
        Self {
            tau: 0.5,
            max_steps: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DfbConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for DfbConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-7,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub n_proposals: usize,
    pub samples_per_proposal: usize,
    pub n_iterations: usize,
    pub init_sigma: f64,
    pub glr_period: usize,
    pub resampling_mode: ResamplingMode,
    pub adaptation_mode: AdaptationMode,
    pub covariance_mode: CovarianceMode,
    pub backtracking: BacktrackingConfig,
    pub dfb: DfbConfig,
    pub seed: u64,
    pub init_box: (f64, f64),
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_proposals: 50,
            samples_per_proposal: 20,
            n_iterations: 20,
            init_sigma: 1.0,
            glr_period: 5,
            resampling_mode: ResamplingMode::Glocal,
            adaptation_mode: AdaptationMode::ProxNewton,
            covariance_mode: CovarianceMode::Newton,
            backtracking: BacktrackingConfig::default(),
            dfb: DfbConfig::default(),
            seed: 0,
            init_box: (0.0, 1.0),
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.n_proposals == 0 {
            return bad("n_proposals must be >= 1");
        }
        if self.samples_per_proposal == 0 {
            return bad("samples_per_proposal must be >= 1");
        }
        if self.n_iterations == 0 {
            return bad("n_iterations must be >= 1");
        }
        if self.glr_period == 0 {
            return bad("glr_period must be >= 1");
        }
        if !(self.init_sigma > 0.0) || !self.init_sigma.is_finite() {
            return bad("init_sigma must be positive and finite");
        }
        let tau = self.backtracking.tau;
        if !(tau > 0.0 && tau < 1.0) {
            return bad("backtracking.tau must lie in (0, 1)");
        }
        if self.backtracking.max_steps == 0 {
            return bad("backtracking.max_steps must be >= 1");
        }
        if !(self.dfb.tolerance > 0.0) {
            return bad("dfb.tolerance must be positive");
        }
        if self.dfb.max_iterations == 0 {
            return bad("dfb.max_iterations must be >= 1");
        }
        let (lo, hi) = self.init_box;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return bad("init_box must be a finite interval lo < hi");
        }
        Ok(())
    }

    /// Total number of weighted samples a run produces (`K N T`).
    pub fn budget(&self) -> usize {
        self.n_proposals * self.samples_per_proposal * self.n_iterations
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SamplerConfig::default().validate().unwrap();
        assert_eq!(SamplerConfig::default().budget(), 20_000);
    }

    #[test]
    fn rejects_out_of_range_fields() {
        let base = SamplerConfig::default();
        let cases = [
            SamplerConfig { n_proposals: 0, ..base.clone() },
            SamplerConfig { glr_period: 0, ..base.clone() },
            SamplerConfig { init_sigma: -1.0, ..base.clone() },
            SamplerConfig {
                backtracking: BacktrackingConfig { tau: 1.0, max_steps: 5 },
                ..base.clone()
            },
            SamplerConfig {
                dfb: DfbConfig { tolerance: 0.0, max_iterations: 5 },
                ..base.clone()
            },
            SamplerConfig { init_box: (1.0, 0.0), ..base.clone() },
        ];
        for c in cases {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn json_uses_snake_case_modes_and_defaults() {
        let cfg: SamplerConfig =
            serde_json::from_str(r#"{"adaptation_mode":"prox_grad","resampling_mode":"local"}"#)
                .unwrap();
        assert_eq!(cfg.adaptation_mode, AdaptationMode::ProxGrad);
        assert_eq!(cfg.resampling_mode, ResamplingMode::Local);
        assert_eq!(cfg.n_proposals, 50);
        assert!(serde_json::from_str::<SamplerConfig>(r#"{"bogus":1}"#).is_err());
    }
}
