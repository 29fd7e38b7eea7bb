//! `vshock profile`: traveling fronts for a list of ε plus the ε → 0 limit
//! front, with a gnuplot-ready overlay reproducing the front-steepening
//! picture (shift fixed per the plain anchor 𝔳(0) = 1 + ε^{1/(γ+1)} by
//! default).

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use vshock::profile::{solve_profile, LimitProfile, ShiftSpec};
use vshock::{io as vio, ModelParams};

use crate::config::Config;
use crate::commands::Outcome;

pub fn shift_from_config(cfg: &Config, params: &ModelParams) -> Result<ShiftSpec> {
    let spec = cfg.get_str("profile.shift", "plain-anchor");
    Ok(match spec.as_str() {
        "transition-anchor" => ShiftSpec::TransitionAnchor,
        // Figure-style anchor: 𝔳(0) = 1 + ε^{1/(γ+1)} (unit coefficient).
        "plain-anchor" => ShiftSpec::ValueAtZero(
            1.0 + params.epsilon.powf(1.0 / (params.gamma + 1.0)),
        ),
        "midpoint" => ShiftSpec::ValueAtZero(0.5 * (params.v_minus + params.v_plus)),
        other => match other.parse::<f64>() {
            Ok(v0) => ShiftSpec::ValueAtZero(v0),
            Err(_) => bail!("usage error: profile.shift = '{other}' not recognized"),
        },
    })
}

pub fn run(cfg: &Config, out: &Path) -> Result<Outcome> {
    crate::commands::execute("profile", out, cfg, |log| {
        let base = super::model_params(cfg)?;
        let base = base.map_err(|e| anyhow::anyhow!("{e}"))?;
        let eps_list = cfg.get_f64_list("profile.epsilons", &[base.epsilon])?;
        let xi_lo = cfg.get_f64("profile.xi_lo", -8.0)?;
        let xi_hi = cfg.get_f64("profile.xi_hi", 14.0)?;
        let tol = cfg.get_f64("profile.tol", 1e-9)?;
        let samples = cfg.get_usize("profile.samples", 2001)?;

        let mut waves = Vec::new();
        for (i, &eps) in eps_list.iter().enumerate() {
            let params = ModelParams::new(eps, base.gamma, base.mu, base.v_plus)
                .map_err(|e| anyhow::anyhow!("{e}"))?
                .with_u_plus(base.u_plus);
            let shift = shift_from_config(cfg, &params)?;
            let wave = solve_profile(&params, shift, (xi_lo, xi_hi), tol)?;
            log.residual("ode", wave.meta.max_residual);
            log.residual("rankine_hugoniot", wave.meta.rh_residual);
            let name = format!("profile_{i:02}_eps{eps:.3e}.csv");
            let file = std::fs::File::create(out.join(&name))?;
            vio::write_profile_csv(std::io::BufWriter::new(file), &wave, samples)?;
            log.output(name);
            waves.push(wave);
        }

        // Limit front sampled on the same grid.
        let lp = LimitProfile::new(base.v_plus, base.mu);
        let name = "limit_profile.csv";
        let mut f = std::io::BufWriter::new(std::fs::File::create(out.join(name))?);
        writeln!(f, "xi,v")?;
        for i in 0..samples {
            let xi = xi_lo + (xi_hi - xi_lo) * i as f64 / (samples - 1) as f64;
            writeln!(f, "{:.17e},{:.17e}", xi, lp.value(xi))?;
        }
        log.output(name);

        // gnuplot overlay: xi, v for each eps, then the limit front.
        let name = "overlay.dat";
        let mut f = std::io::BufWriter::new(std::fs::File::create(out.join(name))?);
        write!(f, "# xi")?;
        for eps in &eps_list {
            write!(f, " v(eps={eps:.1e})")?;
        }
        writeln!(f, " v(limit)")?;
        for i in 0..samples {
            let xi = xi_lo + (xi_hi - xi_lo) * i as f64 / (samples - 1) as f64;
            write!(f, "{xi:.10e}")?;
            for w in &waves {
                write!(f, " {:.10e}", w.v_at(xi))?;
            }
            writeln!(f, " {:.10e}", lp.value(xi))?;
        }
        f.flush().context("flushing overlay")?;
        log.output(name);

        let worst_rh = waves.iter().map(|w| w.meta.rh_residual).fold(0.0f64, f64::max);
        let worst_res = waves.iter().map(|w| w.meta.max_residual).fold(0.0f64, f64::max);
        log.gate("rankine_hugoniot_residual", worst_rh, 1e-12, "<");
        log.gate("ode_residual", worst_res, 1e-8, "<");
        Ok(())
    })
}
