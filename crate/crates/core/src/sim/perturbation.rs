//! Zero-mass perturbations, realized as exact discrete derivatives of
//! compactly supported potentials so the trapezoid mass telescopes to zero at
//! round-off level by construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Shape of the underlying potential; the realized perturbation is its
/// centered discrete derivative (a dipole).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Shape {
    GaussianDipole { center: f64, width: f64 },
    CompactBump { center: f64, width: f64 },
    /// Potential given directly as samples on the simulation grid.
    Custom { samples: Vec<f64> },
}

/// Which field(s) receive the perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    U,
    V,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub shape: Shape,
    pub amplitude: f64,
    pub target: Target,
}

/// Realized perturbation: the potentials and their discrete derivatives.
#[derive(Debug, Clone)]
pub struct Perturbation {
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
    pub u_potential: Vec<f64>,
    pub v_potential: Vec<f64>,
}

impl PerturbationSpec {
    /// Theorem-scale advisory gate: amplitudes up to ε^{5/(2γ)} sit inside the
    /// weighted-energy budget of the stability theory; larger ones still run
    /// (out-of-theory experiments) but deserve a warning.
    pub fn within_theory_budget(&self, params: &ModelParams) -> bool {
        self.amplitude.abs() <= params.epsilon.powf(2.5 / params.gamma)
    }

    fn potential(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.shape {
            Shape::GaussianDipole { center, width } => {
                if !(*width > 0.0) {
                    return Err(Error::Usage("dipole width must be positive".into()));
                }
                Ok(x.iter()
                    .map(|&xi| {
                        let y = (xi - center) / width;
                        self.amplitude * (-y * y).exp()
                    })
                    .collect())
            }
            Shape::CompactBump { center, width } => {
                if !(*width > 0.0) {
                    return Err(Error::Usage("bump width must be positive".into()));
                }
                Ok(x.iter()
                    .map(|&xi| {
                        let y = (xi - center) / width;
                        if y.abs() >= 1.0 {
                            0.0
                        } else {
                            self.amplitude * (-y * y / (1.0 - y * y)).exp()
                        }
                    })
                    .collect())
            }
            Shape::Custom { samples } => {
                if samples.len() != x.len() {
                    return Err(Error::Usage(format!(
                        "custom potential has {} samples, grid has {}",
                        samples.len(),
                        x.len()
                    )));
                }
                Ok(samples.iter().map(|&s| self.amplitude * s).collect())
            }
        }
    }

    /// Realize on a uniform grid.
    pub fn realize(&self, x: &[f64], dx: f64) -> Result<Perturbation> {
        let n = x.len();
        let empty_u = matches!(self.target, Target::V);
        let empty_v = matches!(self.target, Target::U);
        let pot = self.potential(x)?;
        let deriv = |p: &[f64]| -> Vec<f64> {
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                d[i] = (p[i + 1] - p[i - 1]) / (2.0 * dx);
            }
            d
        };
        let zero = vec![0.0; n];
        let (u_potential, du) =
            if empty_u { (zero.clone(), zero.clone()) } else { (pot.clone(), deriv(&pot)) };
        let (v_potential, dv) = if empty_v { (zero.clone(), zero) } else { (pot.clone(), deriv(&pot)) };
        Ok(Perturbation { du, dv, u_potential, v_potential })
    }
}
