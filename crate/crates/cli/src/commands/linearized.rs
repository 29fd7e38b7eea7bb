//! `vshock linearized-check`: dt-refinement study of the linearized energy
//! identity (residual halves with dt at first order).

use std::path::Path;

use anyhow::Result;
use serde::Serialize;
use vshock::profile::{solve_profile, ShiftSpec};
use vshock::sim::{run_linearized, Frame, IntegratedState};

use crate::commands::Outcome;
use crate::config::Config;

#[derive(Serialize)]
struct LinearizedOut {
    dt_levels: Vec<f64>,
    residuals: Vec<f64>,
    ratios: Vec<f64>,
}

pub fn run(cfg: &Config, out: &Path) -> Result<Outcome> {
    crate::commands::execute("linearized-check", out, cfg, |log| {
        let params = super::model_params(cfg)?;
        let params = params.map_err(|e| anyhow::anyhow!("{e}"))?;
        let dt_levels = cfg.get_f64_list("lin.dt_levels", &[2e-4, 1e-4, 5e-5])?;
        let t_end = cfg.get_f64("lin.t_end", 0.4)?;
        let x_lo = cfg.get_f64("lin.x_lo", -8.0)?;
        let x_hi = cfg.get_f64("lin.x_hi", 12.0)?;
        let n = cfg.get_usize("lin.n", 5000)?;
        let amp = cfg.get_f64("lin.bump_amp", 1e-3)?;
        let ratio_lo = cfg.get_f64("lin.ratio_lo", 1.6)?;
        let ratio_hi = cfg.get_f64("lin.ratio_hi", 2.4)?;
        let tol = cfg.get_f64("profile.tol", 1e-9)?;

        let wave = solve_profile(
            &params,
            ShiftSpec::ValueAtZero(0.5 * (params.v_minus + params.v_plus)),
            (x_lo - 2.0 - wave_travel(t_end, &params), x_hi + 2.0),
            tol,
        )?;
        log.residual("ode", wave.meta.max_residual);

        let make_state = || {
            let dx = (x_hi - x_lo) / (n - 1) as f64;
            let x: Vec<f64> = (0..n).map(|i| x_lo + dx * i as f64).collect();
            let bump = |x: f64, c: f64| (-(x - c) * (x - c)).exp();
            let wf: Vec<f64> = x.iter().map(|&x| amp * bump(x, 0.5)).collect();
            let vf: Vec<f64> = x.iter().map(|&x| amp * bump(x, -0.5)).collect();
            let mut ws = IntegratedState::from_fields(x, wf, vf, wave.s);
            ws.frame = Frame::Lab;
            ws
        };

        let mut residuals = Vec::new();
        for &dt in &dt_levels {
            let run = run_linearized(make_state(), &wave, &params, dt, t_end)?;
            residuals.push(run.energy_identity_residual());
        }
        let ratios: Vec<f64> =
            residuals.windows(2).map(|w| w[0] / w[1]).collect();
        for (i, r) in ratios.iter().enumerate() {
            log.gate(format!("halving_ratio_{i}"), *r, ratio_lo, ">=");
            log.gate(format!("halving_ratio_{i}_upper"), *r, ratio_hi, "<=");
        }
        std::fs::write(
            out.join("linearized_check.json"),
            serde_json::to_string_pretty(&LinearizedOut {
                dt_levels,
                residuals,
                ratios,
            })?,
        )?;
        log.output("linearized_check.json");
        Ok(())
    })
}

fn wave_travel(t_end: f64, params: &vshock::ModelParams) -> f64 {
    // lab-frame profile slides by s·t; cover it in the wave domain
    (t_end * 2.0 / (params.v_plus - 1.0).sqrt()).ceil()
}
