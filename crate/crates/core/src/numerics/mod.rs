//! Shared numerical kernels: adaptive ODE integration with per-step residual
//! control, monotone cubic interpolation, Gauss-Legendre quadrature, linear
//! least squares, scalar root finding and minimization, tridiagonal solves.

pub mod fit;
pub mod interp;
pub mod ode;
pub mod quad;
pub mod tridiag;
