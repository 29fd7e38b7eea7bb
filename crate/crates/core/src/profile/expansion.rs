//! The matched transition expansion
//!
//!   fv_app(ξ) = bar𝔳(ξ) + ε^{1/γ} 𝑣̃((ξ − ξ*)/ε^{1/γ})        for ξ ≤ 0,
//!   fv_app(ξ) = bar𝔳(ξ) + K ε^{1/(γ+1)} χ(ξ)                  for ξ > 0,
//!
//! with K = (μ s̄)^{−1/(γ+1)}, matching level ω_ε = K ε^{−1/(γ(γ+1))} and
//! matching point ξ* < 0 solving 𝑣̃(−ξ*/ε^{1/γ}) = ω_ε. With these choices the
//! two branches agree at ξ = 0 together with their first derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::profile::corrector::{solve_corrector_with, Corrector};
use crate::profile::{transition_amplitude, LimitProfile, ShiftSpec, TravelingWave};

/// Smooth compactly supported cutoff with χ(0) = 1, χ'(0) = −1:
/// χ(ξ) = (1 − ξ) exp(−t²/(1 − t²)), t = ξ/width, supported on [0, width].
/// Any C∞ cutoff with those two normalizations is admissible; the width is
/// configurable in (0, 1].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Cutoff {
    pub width: f64,
}

impl Default for Cutoff {
    fn default() -> Self {
        Self { width: 1.0 }
    }
}

impl Cutoff {
    pub fn new(width: f64) -> Result<Self> {
        if !(width > 0.0 && width <= 1.0) {
            return Err(Error::Usage(format!("cutoff width must be in (0, 1], got {width}")));
        }
        Ok(Self { width })
    }

    pub fn value(&self, xi: f64) -> f64 {
        if xi <= 0.0 {
            return 1.0;
        }
        let t = xi / self.width;
        if t >= 1.0 {
            return 0.0;
        }
        (1.0 - xi) * (-t * t / (1.0 - t * t)).exp()
    }
}

/// The matching parameters and tabulated corrector of the expansion.
#[derive(Debug, Clone)]
pub struct TransitionExpansion {
    pub params: ModelParams,
    /// K = (μ s̄)^{−1/(γ+1)}.
    pub k: f64,
    /// ω_ε = K ε^{−1/(γ(γ+1))}: corrector level at the matching point.
    pub omega: f64,
    /// Matching point ξ* = −ε^{1/γ} ζ*, with 𝑣̃(ζ*) = ω_ε (root-found).
    pub xi_star: f64,
    pub zeta_star: f64,
    pub corrector: Corrector,
    pub cutoff: Cutoff,
    /// Margin M in ξ_min = ξ* + M ε^{1/γ} for the weighted error window.
    pub m_margin: f64,
}

/// Matching parameters as plain numbers, with the asymptotic prediction
/// −(μ s̄)^{γ/(γ+1)} ε^{1/(γ+1)} for ξ* reported as a consistency check.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TransitionParams {
    pub omega: f64,
    pub k: f64,
    pub xi_star: f64,
    pub xi_star_asymptotic: f64,
}

impl TransitionExpansion {
    pub fn build(params: &ModelParams) -> Result<Self> {
        Self::build_with(params, Cutoff::default(), 100.0)
    }

    pub fn build_with(params: &ModelParams, cutoff: Cutoff, m_margin: f64) -> Result<Self> {
        let k = transition_amplitude(params);
        let g = params.gamma;
        let omega = k * params.epsilon.powf(-1.0 / (g * (g + 1.0)));
        // Table reaching past the matching level; ζ* ≈ μ s̄ ω for large ω.
        let zeta_hi = (params.mu * params.limit_speed() * omega * 1.5).max(10.0);
        let corrector =
            solve_corrector_with(params, (-50.0, zeta_hi), Some(omega * 1.02), 1e-10)?;
        let zeta_star = corrector.find_level(omega)?;
        let xi_star = -params.layer_scale() * zeta_star;
        Ok(Self {
            params: *params,
            k,
            omega,
            xi_star,
            zeta_star,
            corrector,
            cutoff,
            m_margin: m_margin.max(0.0),
        })
    }

    pub fn with_m_margin(mut self, m: f64) -> Self {
        self.m_margin = m.max(0.0);
        self
    }

    /// fv_app(0⁻) = 1 + K ε^{1/(γ+1)}: the anchor value shared with
    /// [`ShiftSpec::TransitionAnchor`].
    pub fn anchor_value(&self) -> f64 {
        1.0 + self.k * self.params.epsilon.powf(1.0 / (self.params.gamma + 1.0))
    }

    fn check_limit(&self, lp: &LimitProfile) -> Result<()> {
        if (lp.v_plus - self.params.v_plus).abs() > 1e-13 || (lp.mu - self.params.mu).abs() > 1e-13
        {
            return Err(Error::Usage(
                "limit profile does not share parameters with the expansion".into(),
            ));
        }
        Ok(())
    }

    /// fv_app(ξ); the flag marks corrector-tail extrapolation beyond the
    /// tabulated range.
    pub fn eval_flagged(&self, xi: f64, lp: &LimitProfile) -> Result<(f64, bool)> {
        self.check_limit(lp)?;
        let e = self.params.layer_scale();
        if xi <= 0.0 {
            let (vt, extrapolated) = self.corrector.eval_flagged((xi - self.xi_star) / e);
            Ok((lp.value(xi) + e * vt, extrapolated))
        } else {
            let amp = self.k * self.params.epsilon.powf(1.0 / (self.params.gamma + 1.0));
            Ok((lp.value(xi) + amp * self.cutoff.value(xi), false))
        }
    }

    pub fn eval(&self, xi: f64, lp: &LimitProfile) -> Result<f64> {
        Ok(self.eval_flagged(xi, lp)?.0)
    }
}

/// Matching parameters (ω_ε, K, ξ*) with the asymptotic ξ* check value.
pub fn transition_params(params: &ModelParams) -> Result<TransitionParams> {
    let exp = TransitionExpansion::build(params)?;
    let g = params.gamma;
    let msb = params.mu * params.limit_speed();
    Ok(TransitionParams {
        omega: exp.omega,
        k: exp.k,
        xi_star: exp.xi_star,
        xi_star_asymptotic: -msb.powf(g / (g + 1.0)) * params.epsilon.powf(1.0 / (g + 1.0)),
    })
}

/// fv_app(ξ).
pub fn approx_profile(xi: f64, expansion: &TransitionExpansion, lp: &LimitProfile) -> Result<f64> {
    expansion.eval(xi, lp)
}

/// Error of the expansion against a computed front.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TransitionError {
    /// sup over [−R, R] of |𝔳_ε − fv_app|.
    pub sup_err: f64,
    /// sup over [ξ_min, 0) of |𝔳_ε − fv_app| / |ξ|; `None` when the window
    /// [ξ* + M ε^{1/γ}, 0) is empty at this ε.
    pub weighted_err: Option<f64>,
    pub xi_min: f64,
}

/// Compare a front against its expansion. The wave must use the transition
/// anchor (the error statement normalizes 𝔳_ε(0) = fv_app(0⁻)); mixing shift
/// conventions is a usage error.
pub fn transition_error(
    wave: &TravelingWave,
    expansion: &TransitionExpansion,
    lp: &LimitProfile,
    r_box: f64,
) -> Result<TransitionError> {
    if wave.shift != ShiftSpec::TransitionAnchor {
        return Err(Error::Usage(
            "transition_error requires a wave anchored with ShiftSpec::TransitionAnchor".into(),
        ));
    }
    if wave.domain.0 > -r_box || wave.domain.1 < r_box {
        return Err(Error::DomainTooNarrow(format!(
            "wave domain {:?} does not cover [-{r_box}, {r_box}]",
            wave.domain
        )));
    }
    let n = 4000;
    let mut sup_err: f64 = 0.0;
    for i in 0..=n {
        let xi = -r_box + 2.0 * r_box * i as f64 / n as f64;
        let err = (wave.v_at(xi) - expansion.eval(xi, lp)?).abs();
        sup_err = sup_err.max(err);
    }

    let e = wave.params.layer_scale();
    let xi_min = expansion.xi_star + expansion.m_margin * e;
    let weighted_err = if xi_min >= 0.0 {
        None
    } else {
        let m = 2000;
        let mut sup: f64 = 0.0;
        for i in 0..m {
            // avoid ξ = 0 where the ratio is 0/0; both factors vanish there
            let xi = xi_min * (1.0 - i as f64 / m as f64).max(1e-4);
            let err = (wave.v_at(xi) - expansion.eval(xi, lp)?).abs();
            sup = sup.max(err / xi.abs());
        }
        Some(sup)
    };
    Ok(TransitionError { sup_err, weighted_err, xi_min })
}
