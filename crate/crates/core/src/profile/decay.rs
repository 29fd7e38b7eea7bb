//! Exponential decay fit of the congested tail: on ξ < ξ_ε the profile obeys
//! C̲ ε^{1/γ} e^{σ̲ ε^{−1/γ} ξ} ≤ 𝔳 − v₋ ≤ C̄ ε^{1/γ} e^{σ̄ ε^{−1/γ} ξ}, and the
//! fitted rescaled rate σ̂ must sit below the lower-barrier exponent
//! σ̲ = ρ̲_ε γ (and is expected close to it for small ε).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::fit::linear_fit;
use crate::profile::{solve_barriers, TravelingWave};

/// Relative gap below which v − v₋ is floating-point noise in the rescaled
/// tail table.
const FIT_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted rescaled rate σ̂ of ln(𝑣̃ − 1) against ζ.
    pub sigma_hat: f64,
    /// Fitted amplitude in rescaled variables: 𝑣̃ − 1 ≈ Ĉ e^{σ̂ ζ}.
    pub c_hat: f64,
    pub r_squared: f64,
    /// σ̲ = ρ̲_ε γ from the lower barrier at this wave's anchor.
    pub sigma_lower: f64,
    /// ζ-window of the fit.
    pub window: (f64, f64),
    pub n_points: usize,
    /// More than half of the candidate window sat below the floating floor.
    pub window_shrunk: bool,
}

/// Least-squares fit of ln(vt − 1) against ζ. The independent oracle for this
/// routine is an exact exponential, which it recovers to machine precision.
pub fn fit_exponential_tail(zeta: &[f64], vt: &[f64]) -> Result<(f64, f64, f64)> {
    if zeta.len() < 3 {
        return Err(Error::Usage("need at least 3 points for the tail fit".into()));
    }
    let mut xs = Vec::with_capacity(zeta.len());
    let mut ys = Vec::with_capacity(zeta.len());
    for (&z, &v) in zeta.iter().zip(vt) {
        if v - 1.0 > 0.0 {
            xs.push(z);
            ys.push((v - 1.0).ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::Usage("tail fit: fewer than 3 points above the floor".into()));
    }
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    Ok((slope, intercept.exp(), r2))
}

/// Fit the congested tail of a computed wave on the barrier-certified window
/// ζ < −max(ζ̄, ζ̲), restricted to the clean exponential regime
/// 𝑣̃ − 1 ∈ [10⁻¹¹, cap] (the cap starts at 0.05 and widens if the window is
/// too thin). Requires a wave with a rescaled tail table.
pub fn congested_decay_fit(wave: &TravelingWave) -> Result<DecayFit> {
    let tail = wave.tail.as_ref().ok_or_else(|| {
        Error::Usage("congested_decay_fit needs a wave solved with a rescaled tail".into())
    })?;
    let v0 = wave.v_at_zero();
    let barriers = solve_barriers(&wave.params, v0)?;
    let zeta_eps = -barriers.zeta_upper.max(barriers.zeta_lower);

    let sol = &tail.sol;
    let mut caps = [0.05, 0.2, 0.5];
    caps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let candidates: Vec<(f64, f64)> = sol
        .x
        .iter()
        .zip(&sol.y)
        .filter(|(&z, _)| z <= zeta_eps)
        .map(|(&z, &y)| (z, y))
        .collect();
    if candidates.is_empty() {
        return Err(Error::DomainTooNarrow(format!(
            "no tail samples beyond the barrier window ζ < {zeta_eps}"
        )));
    }
    let below_floor = candidates.iter().filter(|(_, y)| y - 1.0 < FIT_FLOOR).count();
    let window_shrunk = 2 * below_floor > candidates.len();

    for cap in caps {
        let pts: Vec<(f64, f64)> = candidates
            .iter()
            .copied()
            .filter(|(_, y)| y - 1.0 >= FIT_FLOOR && y - 1.0 <= cap)
            .collect();
        if pts.len() < 8 && cap < 0.5 {
            continue;
        }
        if pts.len() < 3 {
            break;
        }
        let zs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let vs: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let (sigma_hat, c_hat, r_squared) = fit_exponential_tail(&zs, &vs)?;
        return Ok(DecayFit {
            sigma_hat,
            c_hat,
            r_squared,
            sigma_lower: barriers.sigma_lower,
            window: (zs[0], *zs.last().unwrap()),
            n_points: zs.len(),
            window_shrunk,
        });
    }
    Err(Error::DomainTooNarrow(
        "congested tail too thin above the floating floor for a fit".into(),
    ))
}
