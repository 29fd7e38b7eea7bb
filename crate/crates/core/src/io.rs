//! File formats: profile CSV with a JSON header block, energy-report CSV
//! streams, and JSON tables. Outputs are deterministic functions of their
//! inputs (no timestamps inside data files).

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::diagnostics::EnergyReport;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::profile::{ShiftSpec, TravelingWave};

/// JSON header carried on the first line of a profile CSV (after `# `).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileHeader {
    pub params: ModelParams,
    pub s: f64,
    pub shift: ShiftSpec,
    pub res_tol: f64,
    pub max_residual: f64,
    pub rh_residual: f64,
}

/// Write a wave as `# {json}\nxi,v,u\n...` with `n` uniform samples.
pub fn write_profile_csv(mut out: impl Write, wave: &TravelingWave, n: usize) -> Result<()> {
    let header = ProfileHeader {
        params: wave.params,
        s: wave.s,
        shift: wave.shift,
        res_tol: wave.meta.res_tol,
        max_residual: wave.meta.max_residual,
        rh_residual: wave.meta.rh_residual,
    };
    let hjson = serde_json::to_string(&header).map_err(|e| Error::Numerical(e.to_string()))?;
    let (xi, v, u) = wave.sample_uniform(n.max(2));
    let io = |e: std::io::Error| Error::Numerical(format!("write: {e}"));
    writeln!(out, "# {hjson}").map_err(io)?;
    writeln!(out, "xi,v,u").map_err(io)?;
    for i in 0..xi.len() {
        writeln!(out, "{:.17e},{:.17e},{:.17e}", xi[i], v[i], u[i]).map_err(io)?;
    }
    Ok(())
}

/// Read a profile CSV back (header + samples).
pub fn read_profile_csv(input: impl BufRead) -> Result<TravelingWave> {
    let mut lines = input.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::Usage("empty profile file".into()))?
        .map_err(|e| Error::Usage(format!("read: {e}")))?;
    let head = head
        .strip_prefix("# ")
        .ok_or_else(|| Error::Usage("missing JSON header line".into()))?;
    let header: ProfileHeader =
        serde_json::from_str(head).map_err(|e| Error::Usage(format!("bad header: {e}")))?;
    let mut xi = Vec::new();
    let mut v = Vec::new();
    for (ln, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Usage(format!("read: {e}")))?;
        if ln == 0 && line.starts_with("xi") {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let (Some(a), Some(b)) = (parts.next(), parts.next()) else {
            return Err(Error::Usage(format!("bad row {ln}")));
        };
        xi.push(a.parse::<f64>().map_err(|e| Error::Usage(format!("row {ln}: {e}")))?);
        v.push(b.parse::<f64>().map_err(|e| Error::Usage(format!("row {ln}: {e}")))?);
    }
    TravelingWave::from_samples(header.params, header.s, xi, v, header.shift)
}

/// CSV header for energy-report streams.
pub const ENERGY_CSV_HEADER: &str =
    "t,e0,e1,e2,d0,d1,d2,x_norm_sq,mass_du,mass_dw,mass_dv,sup_du,sup_dv";

pub fn write_energy_csv_row(mut out: impl Write, r: &EnergyReport) -> Result<()> {
    let e = r.e.unwrap_or([f64::NAN; 3]);
    let d = r.d.unwrap_or([f64::NAN; 3]);
    writeln!(
        out,
        "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
        r.t,
        e[0],
        e[1],
        e[2],
        d[0],
        d[1],
        d[2],
        r.x_norm_sq.unwrap_or(f64::NAN),
        r.mass_du,
        r.mass_dw,
        r.mass_dv,
        r.sup_du,
        r.sup_dv
    )
    .map_err(|e| Error::Numerical(format!("write: {e}")))
}
