//! Effective-velocity and integrated-variable transforms.
//!
//! w = u − μ ∂ₓ ln v renders the volume equation parabolic; the integrated
//! perturbations W = ∫ˣ(w − w_ε), V = ∫ˣ(v − v_ε) are the working variables of
//! the stability analysis and require zero-mass data to vanish at +∞.

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::profile::TravelingWave;
use crate::sim::{Frame, SimState};

/// Default tolerance on the perturbation mass defect.
pub const MASS_TOL: f64 = 1e-10;

/// w on a grid: u − μ ∂ₓ ln v with the same centered stencil the stepper uses
/// (one-sided second order at the ends).
pub fn effective_velocity_of(u: &[f64], v: &[f64], dx: f64, mu: f64) -> Vec<f64> {
    let n = u.len();
    let ln: Vec<f64> = v.iter().map(|&vi| vi.ln()).collect();
    let mut w = vec![0.0; n];
    for i in 0..n {
        let dlnv = if i == 0 {
            (-3.0 * ln[0] + 4.0 * ln[1] - ln[2]) / (2.0 * dx)
        } else if i == n - 1 {
            (3.0 * ln[n - 1] - 4.0 * ln[n - 2] + ln[n - 3]) / (2.0 * dx)
        } else {
            (ln[i + 1] - ln[i - 1]) / (2.0 * dx)
        };
        w[i] = u[i] - mu * dlnv;
    }
    w
}

/// Effective velocity of a simulation state.
pub fn effective_velocity(state: &SimState, params: &ModelParams) -> Vec<f64> {
    effective_velocity_of(&state.u, &state.v, state.dx, params.mu)
}

/// Integrated perturbation state (W, V) on the simulation grid.
#[derive(Debug, Clone)]
pub struct IntegratedState {
    pub x: Vec<f64>,
    pub dx: f64,
    pub w_int: Vec<f64>,
    pub v_int: Vec<f64>,
    pub t: f64,
    pub frame: Frame,
    pub s: f64,
    /// Right-end values of the cumulative integrals (the mass defects).
    pub mass_defect_w: f64,
    pub mass_defect_v: f64,
}

impl IntegratedState {
    /// Direct construction from (W, V) samples (linearized experiments).
    pub fn from_fields(x: Vec<f64>, w_int: Vec<f64>, v_int: Vec<f64>, s: f64) -> Self {
        let dx = x[1] - x[0];
        Self {
            x,
            dx,
            w_int,
            v_int,
            t: 0.0,
            frame: Frame::Lab,
            s,
            mass_defect_w: 0.0,
            mass_defect_v: 0.0,
        }
    }

    /// Background profile position for grid point x at the current time.
    pub fn profile_xi(&self, x: f64) -> f64 {
        match self.frame {
            Frame::CoMoving => x,
            Frame::Lab => x - self.s * self.t,
        }
    }
}

/// Cumulative trapezoid from the left end.
fn cumulative(d: &[f64], dx: f64) -> Vec<f64> {
    let mut out = vec![0.0; d.len()];
    for i in 1..d.len() {
        out[i] = out[i - 1] + 0.5 * dx * (d[i] + d[i - 1]);
    }
    out
}

/// Build (W, V) from a state. Errors if either perturbation mass defect
/// exceeds `MASS_TOL`: integrating non-zero-mass data is meaningless for the
/// decaying variables.
pub fn integrated_perturbation(
    state: &SimState,
    wave: &TravelingWave,
    params: &ModelParams,
) -> Result<IntegratedState> {
    let n = state.x.len();
    let mut vprof = vec![0.0; n];
    let mut uprof = vec![0.0; n];
    for (i, &x) in state.x.iter().enumerate() {
        let xi = state.profile_xi(x);
        vprof[i] = wave.v_at(xi);
        uprof[i] = wave.u_at(xi);
    }
    let w = effective_velocity(state, params);
    let wprof = effective_velocity_of(&uprof, &vprof, state.dx, params.mu);
    let dw: Vec<f64> = (0..n).map(|i| w[i] - wprof[i]).collect();
    let dv: Vec<f64> = (0..n).map(|i| state.v[i] - vprof[i]).collect();

    let w_int = cumulative(&dw, state.dx);
    let v_int = cumulative(&dv, state.dx);
    let mass_defect_w = *w_int.last().unwrap();
    let mass_defect_v = *v_int.last().unwrap();
    let defect = mass_defect_w.abs().max(mass_defect_v.abs());
    if defect > MASS_TOL {
        return Err(Error::NonZeroMass { defect, tol: MASS_TOL });
    }
    Ok(IntegratedState {
        x: state.x.clone(),
        dx: state.dx,
        w_int,
        v_int,
        t: state.t,
        frame: state.frame,
        s: state.s,
        mass_defect_w,
        mass_defect_v,
    })
}
