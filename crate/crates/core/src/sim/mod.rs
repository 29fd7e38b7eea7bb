//! Semi-implicit time integration of the full system around a traveling wave.
//!
//! Splitting: the pressure gradient is explicit (a fully implicit pressure
//! would need a nonlinear solve with a near-singular Jacobian at the
//! congestion threshold), the viscous term is implicit (tridiagonal solve),
//! and in the co-moving frame the advection −s∂ₓ is a second-order upwind
//! flux. All spatial operators are in flux form, so with Dirichlet far-field
//! boundaries the discrete masses of (v − v_ε, u − u_ε) are conserved to
//! round-off per step: the boundary fluxes cancel through the traveling-wave
//! relations s v + u = s v₊ + u₊ and s u − p + μ u'/v = s u₊ − p₊.
//!
//! Time accuracy is first order (splitting), space second order.

mod linearized;
mod perturbation;
mod transforms;

pub use linearized::{run_linearized, step_linearized, LinearizedRun};
pub use perturbation::{Perturbation, PerturbationSpec, Shape, Target};
pub use transforms::{effective_velocity, effective_velocity_of, integrated_perturbation, IntegratedState};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, EnergyHistory, EnergyReport};
use crate::error::{Error, Result};
use crate::numerics::tridiag;
use crate::params::ModelParams;
use crate::pressure::pressure;
use crate::profile::TravelingWave;

/// Reference frame of the integration. CoMoving keeps the background profile
/// stationary (the default for stability studies); Lab lets it translate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    Lab,
    CoMoving,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_lo: f64,
    pub x_hi: f64,
    pub n: usize,
}

/// Time-step control: fixed dt, or CFL from the acoustic bound
/// dt ≤ safety · dx / sqrt(max|p'_ε| · max v) combined with the splitting
/// relaxation bound dt ≤ safety · μ / (max|p'_ε| · max v) and (co-moving) the
/// advective bound dt ≤ safety · dx/(2s).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum DtControl {
    Fixed(f64),
    Cfl { safety: f64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub dt_control: DtControl,
    /// Runtime guard: |perturbation| in the cells nearest the boundary must
    /// stay below this (the domain must be wide enough for the horizon).
    pub boundary_guard: f64,
    /// Compute energy reports at observations.
    pub energy_reports: bool,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            dt_control: DtControl::Cfl { safety: 0.8 },
            boundary_guard: 1e-8,
            energy_reports: true,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        match self.dt_control {
            DtControl::Fixed(dt) if dt > 0.0 => Ok(()),
            DtControl::Cfl { safety } if safety > 0.0 && safety <= 1.0 => Ok(()),
            _ => Err(Error::Usage("dt must be > 0 and CFL safety in (0, 1]".into())),
        }
    }
}

/// Discrete state on a uniform grid. The outermost two cells on each side are
/// pinned to the sampled background (Dirichlet); interior cells evolve.
#[derive(Debug, Clone)]
pub struct SimState {
    pub x: Vec<f64>,
    pub dx: f64,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub t: f64,
    pub frame: Frame,
    /// Shock speed of the background wave (frame speed when CoMoving).
    pub s: f64,
}

impl SimState {
    /// Background profile position for grid point x at the current time.
    pub fn profile_xi(&self, x: f64) -> f64 {
        match self.frame {
            Frame::CoMoving => x,
            Frame::Lab => x - self.s * self.t,
        }
    }

    pub fn min_v(&self) -> f64 {
        self.v.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Sample the wave and superpose a realized zero-mass perturbation.
/// Rejects amplitudes that push v to the congestion threshold.
pub fn init_state(
    wave: &TravelingWave,
    pert: &PerturbationSpec,
    grid: GridSpec,
    frame: Frame,
) -> Result<SimState> {
    if grid.n < 16 {
        return Err(Error::Usage("grid too small".into()));
    }
    if grid.x_lo < wave.domain.0 || grid.x_hi > wave.domain.1 {
        return Err(Error::Usage(format!(
            "grid [{}, {}] not covered by the wave domain {:?}",
            grid.x_lo, grid.x_hi, wave.domain
        )));
    }
    let dx = (grid.x_hi - grid.x_lo) / (grid.n - 1) as f64;
    let x: Vec<f64> = (0..grid.n).map(|i| grid.x_lo + dx * i as f64).collect();
    let mut v: Vec<f64> = x.iter().map(|&xi| wave.v_at(xi)).collect();
    let mut u: Vec<f64> = x.iter().map(|&xi| wave.u_at(xi)).collect();
    let p = pert.realize(&x, dx)?;
    for i in 0..grid.n {
        v[i] += p.dv[i];
        u[i] += p.du[i];
    }
    let min_v = v.iter().copied().fold(f64::INFINITY, f64::min);
    if min_v <= 1.0 {
        return Err(Error::Usage(format!(
            "perturbation pushes min(v) = {min_v} <= 1; max admissible excursion exceeded"
        )));
    }
    Ok(SimState { x, dx, v, u, t: 0.0, frame, s: wave.s })
}

fn cfl_dt(state: &SimState, params: &ModelParams, safety: f64) -> Result<f64> {
    let mut pmax: f64 = 0.0;
    let mut vmax: f64 = 0.0;
    for &vi in &state.v {
        pmax = pmax.max(-pressure(vi, 1, params)?);
        vmax = vmax.max(vi);
    }
    // Explicit-part spectrum: acoustic sqrt(max|p'| max v)/dx plus, in the
    // co-moving frame, the upwinded advection ~ 2s/dx. The splitting also
    // bounds dt by μ/(max|p'| max v) independently of dx.
    let mut speed = (pmax * vmax).sqrt();
    if state.frame == Frame::CoMoving {
        speed += 2.0 * state.s;
    }
    let acoustic = state.dx / speed;
    let relax = params.mu / (pmax * vmax);
    Ok(safety * acoustic.min(relax))
}

/// One time step. Order within the step: explicit volume update (advection +
/// velocity divergence), congestion check, then the velocity update with
/// explicit pressure gradient (at the new volume) and implicit viscosity.
/// Returns the dt used.
pub fn step(state: &mut SimState, cfg: &SchemeConfig, params: &ModelParams) -> Result<f64> {
    step_with_dt_cap(state, cfg, params, f64::INFINITY)
}

/// As [`step`], with dt additionally capped (used to land exactly on t_end).
pub fn step_with_dt_cap(
    state: &mut SimState,
    cfg: &SchemeConfig,
    params: &ModelParams,
    dt_cap: f64,
) -> Result<f64> {
    cfg.validate()?;
    let n = state.x.len();
    let dx = state.dx;
    let dt = match cfg.dt_control {
        DtControl::Fixed(dt) => dt,
        DtControl::Cfl { safety } => cfl_dt(state, params, safety)?,
    }
    .min(dt_cap);
    let s = state.s;
    let co_moving = state.frame == Frame::CoMoving;

    // Faces i+1/2 for i = 0..n-2. Second-order upwind advective flux of a
    // leftward transport (upwind side is the right): φ_{i+1/2} = −s (3q_{i+1}
    // − q_{i+2})/2, degraded to first order at the last face (frozen zone).
    let adv_flux = |q: &[f64], i: usize| -> f64 {
        if i + 2 < n {
            -s * (3.0 * q[i + 1] - q[i + 2]) / 2.0
        } else {
            -s * q[i + 1]
        }
    };

    // Volume update.
    let mut v_new = state.v.clone();
    for i in 2..n - 2 {
        let fu = 0.5 * (state.u[i + 1] + state.u[i]) - 0.5 * (state.u[i] + state.u[i - 1]);
        let mut dv = fu / dx;
        if co_moving {
            dv -= (adv_flux(&state.v, i) - adv_flux(&state.v, i - 1)) / dx;
        }
        v_new[i] = state.v[i] + dt * dv;
    }
    let min_v = v_new.iter().copied().fold(f64::INFINITY, f64::min);
    if min_v <= 1.0 {
        return Err(Error::CongestionViolation { t: state.t + dt, min_v });
    }

    // Velocity update: explicit advection + pressure, implicit viscosity.
    let mut pv = vec![0.0; n];
    for i in 0..n {
        pv[i] = pressure(v_new[i], 0, params)?;
    }
    let mut rhs = state.u.clone();
    for i in 2..n - 2 {
        let fp = 0.5 * (pv[i + 1] + pv[i]) - 0.5 * (pv[i] + pv[i - 1]);
        let mut du = -fp / dx;
        if co_moving {
            du -= (adv_flux(&state.u, i) - adv_flux(&state.u, i - 1)) / dx;
        }
        rhs[i] = state.u[i] + dt * du;
    }
    let lam = dt * params.mu / (dx * dx);
    let mut a = vec![0.0; n];
    let mut b = vec![1.0; n];
    let mut c = vec![0.0; n];
    let face = |i: usize| 0.5 * (1.0 / v_new[i] + 1.0 / v_new[i + 1]);
    for i in 2..n - 2 {
        let fm = face(i - 1);
        let fp = face(i);
        a[i] = -lam * fm;
        b[i] = 1.0 + lam * (fm + fp);
        c[i] = -lam * fp;
    }
    let mut work = Vec::new();
    tridiag::solve_in_place(&a, &b, &c, &mut rhs, &mut work)?;

    state.v = v_new;
    state.u = rhs;
    state.t += dt;
    Ok(dt)
}

/// Result of a full run: observation-time energy reports plus the final state.
#[derive(Debug)]
pub struct RunResult {
    pub reports: Vec<EnergyReport>,
    pub state: SimState,
    pub min_v_overall: f64,
    pub steps: usize,
}

/// Advance to `t_end`, invoking observations every `stride` steps (and at the
/// start and end). Aborts on congestion violation or when the perturbation
/// contaminates the boundary cells.
pub fn run(
    mut state: SimState,
    cfg: &SchemeConfig,
    params: &ModelParams,
    wave: &TravelingWave,
    t_end: f64,
    stride: usize,
    mut sink: impl FnMut(&SimState, &EnergyReport) -> Result<()>,
) -> Result<RunResult> {
    if !(t_end > 0.0) {
        return Err(Error::Usage("t_end must be positive".into()));
    }
    let stride = stride.max(1);
    let mut history = EnergyHistory::new(params);
    let mut reports = Vec::new();
    let mut min_v_overall = state.min_v();
    let mut steps = 0usize;

    let observe = |state: &SimState,
                   history: &mut EnergyHistory,
                   reports: &mut Vec<EnergyReport>,
                   sink: &mut dyn FnMut(&SimState, &EnergyReport) -> Result<()>|
     -> Result<()> {
        let report = diagnostics::observe(state, wave, params, history, cfg.energy_reports)?;
        boundary_guard(state, wave, cfg.boundary_guard)?;
        sink(state, &report)?;
        reports.push(report);
        Ok(())
    };

    observe(&state, &mut history, &mut reports, &mut sink)?;
    while state.t < t_end {
        let remaining = t_end - state.t;
        step_with_dt_cap(&mut state, cfg, params, remaining)?;
        steps += 1;
        min_v_overall = min_v_overall.min(state.min_v());
        if steps % stride == 0 || state.t >= t_end {
            observe(&state, &mut history, &mut reports, &mut sink)?;
        }
    }
    Ok(RunResult { reports, state, min_v_overall, steps })
}

fn boundary_guard(state: &SimState, wave: &TravelingWave, guard: f64) -> Result<()> {
    let n = state.x.len();
    for &i in &[0usize, 1, 2, 3, n - 4, n - 3, n - 2, n - 1] {
        let xi = state.profile_xi(state.x[i]);
        let dv = (state.v[i] - wave.v_at(xi)).abs();
        let du = (state.u[i] - wave.u_at(xi)).abs();
        if dv > guard || du > guard {
            return Err(Error::DomainTooNarrow(format!(
                "perturbation reached the boundary at t = {}: |δv| = {dv:e}, |δu| = {du:e} \
                 at x = {} (guard {guard:e})",
                state.t, state.x[i]
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{solve_profile, ShiftSpec};

    fn setup(eps: f64) -> (ModelParams, TravelingWave) {
        let p = ModelParams::new(eps, 2.0, 1.0, 1.5).unwrap();
        let w = solve_profile(&p, ShiftSpec::ValueAtZero(0.5 * (1.0 + p.v_plus)), (-20.0, 30.0), 1e-9)
            .unwrap();
        (p, w)
    }

    fn no_pert() -> PerturbationSpec {
        PerturbationSpec {
            shape: Shape::GaussianDipole { center: 0.0, width: 1.0 },
            amplitude: 0.0,
            target: Target::U,
        }
    }

    #[test]
    fn zero_perturbation_state_equals_wave() {
        let (_, w) = setup(1e-2);
        let grid = GridSpec { x_lo: -10.0, x_hi: 20.0, n: 800 };
        let st = init_state(&w, &no_pert(), grid, Frame::CoMoving).unwrap();
        for (i, &x) in st.x.iter().enumerate() {
            assert_eq!(st.v[i], w.v_at(x));
            assert_eq!(st.u[i], w.u_at(x));
        }
    }

    #[test]
    fn rejects_excessive_amplitude() {
        let (_, w) = setup(1e-2);
        let grid = GridSpec { x_lo: -10.0, x_hi: 20.0, n: 800 };
        let pert = PerturbationSpec {
            shape: Shape::GaussianDipole { center: -5.0, width: 0.5 },
            amplitude: 0.5, // derivative overwhelms v − 1 ≈ 0.1 on the plateau
            target: Target::V,
        };
        assert!(matches!(init_state(&w, &pert, grid, Frame::CoMoving), Err(Error::Usage(_))));
    }

    #[test]
    fn budget_scale_amplitude_accepted_with_margin() {
        // amplitude 0.1 ε^{5/(2γ)} at ε = 1e−3, γ = 2: accepted, and the
        // congestion margin keeps more than half the layer width.
        let p = ModelParams::new(1e-3, 2.0, 1.0, 1.5).unwrap();
        let w = solve_profile(&p, ShiftSpec::ValueAtZero(1.25), (-20.0, 30.0), 1e-9).unwrap();
        let amp = 0.1 * p.epsilon.powf(2.5 / p.gamma);
        let pert = PerturbationSpec {
            shape: Shape::GaussianDipole { center: 2.0, width: 0.5 },
            amplitude: amp,
            target: Target::Both,
        };
        assert!(pert.within_theory_budget(&p));
        let grid = GridSpec { x_lo: -10.0, x_hi: 20.0, n: 4000 };
        let st = init_state(&w, &pert, grid, Frame::CoMoving).unwrap();
        assert!(st.min_v() - 1.0 > 0.5 * p.layer_scale());
    }

    #[test]
    fn stationary_profile_drift_shrinks_under_refinement() {
        // Exact sampled wave in the co-moving frame: after a fixed horizon the
        // drift sup|v − v_ε| is O(dx² + dt); halving both must shrink it.
        let (p, w) = setup(1e-2);
        let drift = |n: usize, dt: f64| -> f64 {
            let grid = GridSpec { x_lo: -12.0, x_hi: 18.0, n };
            let mut st = init_state(&w, &no_pert(), grid, Frame::CoMoving).unwrap();
            let cfg = SchemeConfig { dt_control: DtControl::Fixed(dt), ..Default::default() };
            while st.t < 0.4 - 1e-12 {
                let cap = 0.4 - st.t;
                step_with_dt_cap(&mut st, &cfg, &p, cap).unwrap();
            }
            st.x
                .iter()
                .enumerate()
                .map(|(i, &x)| (st.v[i] - w.v_at(x)).abs())
                .fold(0.0, f64::max)
        };
        let d1 = drift(1500, 2e-3);
        let d2 = drift(3000, 1e-3);
        assert!(d2 < d1 / 1.6, "d1 = {d1:e}, d2 = {d2:e}");
    }

    #[test]
    fn spatial_order_two_on_smooth_data() {
        // Fixed small dt; the steady-state drift is then dominated by the
        // O(dx²) spatial truncation: halving dx divides it by ~4.
        let p = ModelParams::new(1e-1, 1.0, 1.0, 3.0).unwrap();
        let w =
            solve_profile(&p, ShiftSpec::ValueAtZero(2.0), (-12.0, 18.0), 1e-10).unwrap();
        let drift = |n: usize| -> f64 {
            let grid = GridSpec { x_lo: -8.0, x_hi: 12.0, n };
            let mut st = init_state(&w, &no_pert(), grid, Frame::CoMoving).unwrap();
            let cfg = SchemeConfig { dt_control: DtControl::Fixed(1e-4), ..Default::default() };
            while st.t < 0.5 - 1e-12 {
                let cap = 0.5 - st.t;
                step_with_dt_cap(&mut st, &cfg, &p, cap).unwrap();
            }
            st.x
                .iter()
                .enumerate()
                .map(|(i, &x)| (st.v[i] - w.v_at(x)).abs())
                .fold(0.0, f64::max)
        };
        let d1 = drift(500);
        let d2 = drift(1000);
        let ratio = d1 / d2;
        assert!((2.8..6.0).contains(&ratio), "d1 = {d1:e}, d2 = {d2:e}, ratio = {ratio}");
    }

    #[test]
    fn lab_frame_profile_translates_at_shock_speed() {
        let (p, w) = setup(1e-2);
        let grid = GridSpec { x_lo: -15.0, x_hi: 25.0, n: 3000 };
        let mut st = init_state(&w, &no_pert(), grid, Frame::Lab).unwrap();
        let cfg = SchemeConfig::default();
        let t_end = 3.0;
        while st.t < t_end - 1e-12 {
            let cap = t_end - st.t;
            step_with_dt_cap(&mut st, &cfg, &p, cap).unwrap();
        }
        // locate the mid-level crossing at t = 0 and t = T
        let mid = 0.5 * (p.v_minus + p.v_plus);
        let crossing = |v: &[f64], x: &[f64]| -> f64 {
            let i = v.iter().position(|&vv| vv > mid).unwrap();
            let f = (mid - v[i - 1]) / (v[i] - v[i - 1]);
            x[i - 1] + f * (x[i] - x[i - 1])
        };
        let x0 = crossing(&w.v_at_many(&st.x), &st.x);
        let x1 = crossing(&st.v, &st.x);
        let shift = x1 - x0;
        assert!(
            (shift - w.s * t_end).abs() <= 2.0 * st.dx,
            "shift {shift} vs s t = {}",
            w.s * t_end
        );
    }

    #[test]
    fn masses_conserved_without_perturbation() {
        // The discrete-adjustment transient radiates left at about s + c;
        // the domain must contain that horizon over the run time.
        let (p, w) = setup(1e-2);
        let grid = GridSpec { x_lo: -20.0, x_hi: 18.0, n: 1520 };
        let st = init_state(&w, &no_pert(), grid, Frame::CoMoving).unwrap();
        let cfg = SchemeConfig::default();
        let res = run(st, &cfg, &p, &w, 1.5, 50, |_, _| Ok(())).unwrap();
        for r in &res.reports {
            assert!(r.mass_dv.abs() < 1e-11, "mass_dv = {:e}", r.mass_dv);
            assert!(r.mass_du.abs() < 1e-11, "mass_du = {:e}", r.mass_du);
        }
        assert!(res.min_v_overall > 1.0);
    }
}
