//! Physical and singular-limit parameters of the model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the singular-pressure model.
///
/// The left far-field state is pinned to v₋ = 1 + ε^{1/γ}, the choice for which
/// p_ε(v₋) = 1 exactly, so the shock speed stays O(1) as ε → 0. `v_minus` is
/// cached at construction and must never be recomputed differently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Intensity ε of the singular pressure (dimensionless, > 0).
    pub epsilon: f64,
    /// Pressure exponent γ ≥ 1.
    pub gamma: f64,
    /// Viscosity μ > 0.
    pub mu: f64,
    /// Right far-field specific volume v₊ > 1, independent of ε.
    pub v_plus: f64,
    /// Left far-field specific volume v₋ = 1 + ε^{1/γ} (cached).
    pub v_minus: f64,
    /// Right far-field velocity (default 0).
    pub u_plus: f64,
}

impl ModelParams {
    pub fn new(epsilon: f64, gamma: f64, mu: f64, v_plus: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Params(format!("epsilon must be > 0, got {epsilon}")));
        }
        if !(gamma >= 1.0) || !gamma.is_finite() {
            return Err(Error::Params(format!("gamma must be >= 1, got {gamma}")));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::Params(format!("mu must be > 0, got {mu}")));
        }
        if !(v_plus > 1.0) || !v_plus.is_finite() {
            return Err(Error::Params(format!("v_plus must be > 1, got {v_plus}")));
        }
        let v_minus = 1.0 + epsilon.powf(1.0 / gamma);
        if v_minus >= v_plus {
            return Err(Error::Params(format!(
                "v_minus = 1 + epsilon^(1/gamma) = {v_minus} must be < v_plus = {v_plus}; \
                 epsilon is too large"
            )));
        }
        Ok(Self { epsilon, gamma, mu, v_plus, v_minus, u_plus: 0.0 })
    }

    pub fn with_u_plus(mut self, u_plus: f64) -> Self {
        self.u_plus = u_plus;
        self
    }

    /// Congested-layer width ε^{1/γ}.
    pub fn layer_scale(&self) -> f64 {
        self.epsilon.powf(1.0 / self.gamma)
    }

    /// Limit shock speed s̄ = (v₊ − 1)^{−1/2}.
    pub fn limit_speed(&self) -> f64 {
        1.0 / (self.v_plus - 1.0).sqrt()
    }

    /// Left far-field velocity u₋ = u₊ + s(v₊ − v₋) for a given shock speed.
    pub fn u_minus(&self, s: f64) -> f64 {
        self.u_plus + s * (self.v_plus - self.v_minus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn v_minus_is_cached_exactly() {
        let p = ModelParams::new(1e-4, 2.0, 1.0, 1.5).unwrap();
        assert_eq!(p.v_minus, 1.0 + 1e-4f64.powf(0.5));
        assert_eq!(p.v_minus, 1.01);
    }

    #[test]
    fn rejects_congested_right_state() {
        // epsilon so large that v_minus >= v_plus
        assert!(ModelParams::new(0.5, 1.0, 1.0, 1.2).is_err());
        assert!(ModelParams::new(-1.0, 1.0, 1.0, 1.5).is_err());
        assert!(ModelParams::new(1e-3, 0.5, 1.0, 1.5).is_err());
        assert!(ModelParams::new(1e-3, 1.0, 0.0, 1.5).is_err());
        assert!(ModelParams::new(1e-3, 1.0, 1.0, 0.9).is_err());
    }

    #[test]
    fn limit_speed_matches_formula() {
        let p = ModelParams::new(1e-6, 2.0, 1.0, 1.5).unwrap();
        assert!((p.limit_speed() - 2f64.sqrt()).abs() < 1e-15);
    }
}
