//! `vshock expansion`: the matched transition expansion against computed
//! fronts over an ε sweep, with the sup-error rate fit and the weighted
//! transition-zone bound.

use std::io::Write;
use std::path::Path;

use anyhow::Result;
use serde::Serialize;
use vshock::diagnostics::rate_fit;
use vshock::profile::{
    solve_profile, transition_error, Cutoff, LimitProfile, ShiftSpec, TransitionExpansion,
};
use vshock::ModelParams;

use crate::commands::Outcome;
use crate::config::Config;

#[derive(Serialize)]
struct ExpansionRow {
    epsilon: f64,
    sup_err: f64,
    weighted_err: Option<f64>,
    weighted_c_hat: Option<f64>,
    k: f64,
    omega: f64,
    xi_star: f64,
    xi_star_asymptotic: f64,
    matching_residual: f64,
}

#[derive(Serialize)]
struct RateFitOut {
    slope: f64,
    intercept: f64,
    r_squared: f64,
    target: f64,
    tolerance: f64,
}

pub fn run(cfg: &Config, out: &Path) -> Result<Outcome> {
    crate::commands::execute("expansion", out, cfg, |log| {
        let base = super::model_params(cfg)?;
        let base = base.map_err(|e| anyhow::anyhow!("{e}"))?;
        let eps_list =
            cfg.get_f64_list("expansion.epsilons", &[1e-3, 1e-4, 1e-5, 1e-6, 1e-7])?;
        let r_box = cfg.get_f64("expansion.r_box", 1.0)?;
        let m_margin = cfg.get_f64("expansion.m_margin", 100.0)?;
        let cutoff_width = cfg.get_f64("expansion.cutoff_width", 1.0)?;
        let slope_tol = cfg.get_f64("expansion.slope_tol", 0.15)?;
        let tol = cfg.get_f64("profile.tol", 1e-9)?;
        let xi_lo = cfg.get_f64("profile.xi_lo", -2.5)?;
        let xi_hi = cfg.get_f64("profile.xi_hi", 10.0)?;

        let mut rows = Vec::new();
        let mut pairs = Vec::new();
        for (i, &eps) in eps_list.iter().enumerate() {
            let params = ModelParams::new(eps, base.gamma, base.mu, base.v_plus)
                .map_err(|e| anyhow::anyhow!("{e}"))?
                .with_u_plus(base.u_plus);
            let lp = LimitProfile::from_params(&params);
            let exp =
                TransitionExpansion::build_with(&params, Cutoff::new(cutoff_width)?, m_margin)?;
            let wave =
                solve_profile(&params, ShiftSpec::TransitionAnchor, (xi_lo, xi_hi), tol)?;
            log.residual("ode", wave.meta.max_residual);
            let te = transition_error(&wave, &exp, &lp, r_box)?;

            // C1 matching residual at 0 (one-sided differences).
            let h = 1e-9;
            let dl = (exp.eval(0.0, &lp)? - exp.eval(-h, &lp)?) / h;
            let dr = (exp.eval(h, &lp)? - exp.eval(0.0, &lp)?) / h;
            let matching_residual = (dl - dr).abs() / dl.abs().max(dr.abs());
            log.residual("c1_matching", matching_residual);

            let name = format!("expansion_{i:02}_eps{eps:.3e}.csv");
            let mut f = std::io::BufWriter::new(std::fs::File::create(out.join(&name))?);
            writeln!(f, "xi,v_front,v_app")?;
            let n = 1601;
            for j in 0..n {
                let xi = -r_box + 2.0 * r_box * j as f64 / (n - 1) as f64;
                writeln!(f, "{xi:.10e},{:.12e},{:.12e}", wave.v_at(xi), exp.eval(xi, &lp)?)?;
            }
            log.output(name);

            pairs.push((eps, te.sup_err));
            rows.push(ExpansionRow {
                epsilon: eps,
                sup_err: te.sup_err,
                weighted_err: te.weighted_err,
                weighted_c_hat: te
                    .weighted_err
                    .map(|w| w / eps.powf(1.0 / (params.gamma + 1.0))),
                k: exp.k,
                omega: exp.omega,
                xi_star: exp.xi_star,
                xi_star_asymptotic: -(params.mu * params.limit_speed())
                    .powf(params.gamma / (params.gamma + 1.0))
                    * eps.powf(1.0 / (params.gamma + 1.0)),
                matching_residual,
            });
        }

        let mut f = std::io::BufWriter::new(std::fs::File::create(out.join("error_table.csv"))?);
        writeln!(
            f,
            "epsilon,sup_err,weighted_err,weighted_c_hat,k,omega,xi_star,xi_star_asymptotic,matching_residual"
        )?;
        for r in &rows {
            writeln!(
                f,
                "{:.6e},{:.10e},{},{},{:.10e},{:.10e},{:.10e},{:.10e},{:.3e}",
                r.epsilon,
                r.sup_err,
                r.weighted_err.map_or("nan".into(), |v| format!("{v:.10e}")),
                r.weighted_c_hat.map_or("nan".into(), |v| format!("{v:.10e}")),
                r.k,
                r.omega,
                r.xi_star,
                r.xi_star_asymptotic,
                r.matching_residual
            )?;
        }
        log.output("error_table.csv");

        // The rate fit needs a sweep; single-ε runs (e.g. inside `vshock
        // sweep`, which aggregates across runs) skip it.
        if pairs.len() >= 3 {
            let fit = rate_fit(&pairs)?;
            let target = 1.0 / (base.gamma + 1.0);
            let fit_out = RateFitOut {
                slope: fit.slope,
                intercept: fit.intercept,
                r_squared: fit.r_squared,
                target,
                tolerance: slope_tol,
            };
            std::fs::write(out.join("rate_fit.json"), serde_json::to_string_pretty(&fit_out)?)?;
            log.output("rate_fit.json");
            log.gate("rate_slope_deviation", (fit.slope - target).abs(), slope_tol, "<=");
        }
        let matching_worst = rows.iter().map(|r| r.matching_residual).fold(0.0f64, f64::max);
        log.gate("c1_matching_residual", matching_worst, 1e-6, "<");
        let c_hats: Vec<f64> = rows.iter().filter_map(|r| r.weighted_c_hat).collect();
        if c_hats.len() >= 3 {
            let (lo, hi) = c_hats
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(l, h), &c| (l.min(c), h.max(c)));
            log.gate("weighted_constant_spread", hi / lo, 2.0, "<");
        }
        Ok(())
    })
}
