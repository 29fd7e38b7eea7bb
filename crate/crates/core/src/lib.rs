//! Viscous shock profiles of the 1D compressible Navier-Stokes equations with a
//! singular pressure law, in Lagrangian mass coordinates:
//!
//!   ∂ₜv − ∂ₓu = 0,
//!   ∂ₜu + ∂ₓ p_ε(v) − μ ∂ₓ(v⁻¹ ∂ₓu) = 0,      p_ε(v) = ε (v−1)^{−γ},  γ ≥ 1.
//!
//! The pressure blows up at the congestion threshold v = 1, so fronts connecting an
//! almost congested left state v₋ = 1 + ε^{1/γ} to a free right state v₊ > 1 develop
//! a stiff boundary layer of width ε^{1/γ}. This crate computes those fronts, the
//! ε → 0 free-congested limit, a C¹ matched asymptotic approximation with the
//! transition corrector, barrier bounds for the congested tail, and verifies the
//! nonlinear asymptotic stability of the fronts under zero-mass perturbations by
//! direct semi-implicit time integration of the full system.
//!
//! Modules:
//! - [`pressure`]: the singular pressure law, its derivatives and the nonlinear
//!   remainders F_ε, G_ε = μ∂ₓH_ε used by the stability analysis.
//! - [`profile`]: traveling-wave solver, limit profile, transition expansion,
//!   barrier functions, congested-tail decay fits.
//! - [`sim`]: semi-implicit PDE integration (full and linearized), zero-mass
//!   perturbations, effective-velocity and integrated-variable transforms.
//! - [`diagnostics`]: weighted energies E_k / dissipations D_k, the X-norm, the
//!   linearized energy identity, commutator identities, lemma bound scans,
//!   rate fits.

pub mod diagnostics;
pub mod error;
pub mod io;
pub mod numerics;
pub mod params;
pub mod pressure;
pub mod profile;
pub mod sim;

pub use error::{Error, Result};
pub use params::ModelParams;
