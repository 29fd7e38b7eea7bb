//! Barrier functions for the congested tail.
//!
//! On ζ < 0 the rescaled profile 𝑣̃_ε satisfies
//!
//!   ρ̄_ε (1 − 𝑣̃^{−γ}) ≤ 𝑣̃' ≤ ρ̲_ε (1 − 𝑣̃^{−γ}),
//!
//!   ρ̄_ε = (1 + ε^{1/γ})/(μ s_ε) · (1 − s_ε² ε^{−(γ−1)/γ} (𝔳(0)−1)^γ / γ),
//!   ρ̲_ε = 𝔳(0)/(μ s_ε),
//!
//! so the solutions v̄, v̲ of v' = ρ (1 − v^{−γ}), v(0) = 2, shifted to cross
//! the profile's anchor level, sandwich it: v̲(ζ+ζ̲) ≤ 𝑣̃_ε(ζ) ≤ v̄(ζ+ζ̄).
//! The lower barrier yields the decay exponent σ̲ = ρ̲_ε γ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ode::{trbdf2, Drive, OdeTol};
use crate::params::ModelParams;
use crate::pressure::pressure;
use crate::profile::layer::{solve_rate_ode, LayerTable, TAIL_FLOOR};
use crate::profile::{layer_decay_rate, layer_rhs, layer_rhs_deriv, shock_speed};

/// Result of the pointwise sandwich scan against the rescaled profile.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SandwichReport {
    pub n_checked: usize,
    pub violations: usize,
    /// Largest signed excursion outside the sandwich (0 when none).
    pub max_violation: f64,
}

/// The two barriers, their crossing coordinates and decay exponent.
#[derive(Debug, Clone)]
pub struct BarrierPair {
    pub rho_upper: f64,
    pub rho_lower: f64,
    /// ζ̄_ε with v̄(ζ̄_ε) = 𝑣̃_ε(0).
    pub zeta_upper: f64,
    /// ζ̲_ε with v̲(ζ̲_ε) = 𝑣̃_ε(0).
    pub zeta_lower: f64,
    /// σ̲ = ρ̲_ε γ: valid exponent for the lower tail bound.
    pub sigma_lower: f64,
    /// Asymptotic prediction μ s̄ (𝔳(0) − 1) ε^{−1/γ} for both crossings.
    pub crossing_asymptote: f64,
    pub upper: LayerTable,
    pub lower: LayerTable,
    pub sandwich: SandwichReport,
}

/// The barrier rates (ρ̄_ε, ρ̲_ε). `v0_at_zero` is the profile anchor 𝔳(0),
/// which must sit inside the admissible window ε^{1/γ} ≪ 𝔳(0) − 1 and
/// (𝔳(0) − 1)^γ ε^{−(γ−1)/γ} s² < γ (otherwise the upper rate degenerates).
pub fn barrier_rates(params: &ModelParams, v0_at_zero: f64) -> Result<(f64, f64)> {
    let g = params.gamma;
    let e = params.layer_scale();
    if v0_at_zero <= params.v_minus || v0_at_zero >= params.v_plus {
        return Err(Error::Usage(format!(
            "barrier anchor v(0) = {v0_at_zero} outside (v_minus, v_plus)"
        )));
    }
    let s = shock_speed(params);
    let correction =
        s * s * params.epsilon.powf(-(g - 1.0) / g) * (v0_at_zero - 1.0).powf(g) / g;
    if correction >= 1.0 {
        return Err(Error::Usage(format!(
            "barrier anchor v(0) - 1 = {} too large: s² (v(0)-1)^γ ε^{{-(γ-1)/γ}} / γ = \
             {correction} >= 1 (the admissible window requires v(0) - 1 << ε^{{(γ-1)/γ²}})",
            v0_at_zero - 1.0
        )));
    }
    let rho_upper = (1.0 + e) / (params.mu * s) * (1.0 - correction);
    let rho_lower = v0_at_zero / (params.mu * s);
    Ok((rho_upper, rho_lower))
}

/// Solve the two barrier ODEs, locate the crossings with the profile anchor
/// level, and verify the sandwich on the congested side against the rescaled
/// true profile (solved internally from the same anchor).
pub fn solve_barriers(params: &ModelParams, v0_at_zero: f64) -> Result<BarrierPair> {
    let (rho_upper, rho_lower) = barrier_rates(params, v0_at_zero)?;
    let g = params.gamma;
    let e = params.layer_scale();
    let s = shock_speed(params);
    let p_minus = pressure(params.v_minus, 0, params).unwrap();
    let tol = OdeTol::from_residual(1e-10);

    // Anchor level in rescaled variables.
    let target = (v0_at_zero - 1.0) / e;
    if target <= 2.0 {
        return Err(Error::Usage(format!(
            "anchor level (v(0)-1) ε^{{-1/γ}} = {target} must exceed the barrier seed 2 \
             (v(0) - 1 >> ε^{{1/γ}} required)"
        )));
    }
    let zeta_cap = 4.0 * params.mu * params.limit_speed() * target + 20.0;
    let upper = solve_rate_ode(rho_upper, g, -60.0, zeta_cap, Some(target * 1.02), tol)?;
    let lower = solve_rate_ode(rho_lower, g, -60.0, zeta_cap, Some(target * 1.02), tol)?;
    let zeta_upper = upper.find_level(target)?;
    let zeta_lower = lower.find_level(target)?;

    // Rescaled true profile from the same anchor. The stop floor sits above
    // the float fixed point |p(v₋) − 1| of the rescaled ODE.
    let floor = TAIL_FLOOR.max(100.0 * (p_minus - 1.0).abs());
    let stop = move |_x: f64, y: f64| y - 1.0 <= floor;
    let admissible = |y: f64| y > 1.0;
    let profile = trbdf2(
        |_, y| layer_rhs(y, s, p_minus, params),
        |_, y| layer_rhs_deriv(y, s, p_minus, params),
        0.0,
        target,
        -60.0 / e.min(1.0),
        tol,
        Drive { admissible: Some(&admissible), stop: Some(&stop), max_steps: 2_000_000 },
    )?;
    let profile = LayerTable::from_monotone_solution(profile, layer_decay_rate(s, params));

    // Pointwise sandwich scan on ζ < 0, down to where the profile tail sits
    // above the floating floor.
    let zeta_scan = profile.zeta_min().max(-1e6);
    let n_checked = 1000;
    let mut violations = 0usize;
    let mut max_violation: f64 = 0.0;
    let slack = 1e-9;
    for i in 1..=n_checked {
        let zeta = zeta_scan * i as f64 / n_checked as f64;
        let vt = profile.eval(zeta);
        let lo = lower.eval(zeta + zeta_lower);
        let hi = upper.eval(zeta + zeta_upper);
        let scale = 1.0 + (vt - 1.0).abs();
        if lo > vt + slack * scale || vt > hi + slack * scale {
            violations += 1;
            max_violation = max_violation.max((lo - vt).max(vt - hi));
        }
    }

    Ok(BarrierPair {
        rho_upper,
        rho_lower,
        zeta_upper,
        zeta_lower,
        sigma_lower: rho_lower * g,
        crossing_asymptote: params.mu * params.limit_speed() * (v0_at_zero - 1.0) / e,
        upper,
        lower,
        sandwich: SandwichReport { n_checked, violations, max_violation },
    })
}
