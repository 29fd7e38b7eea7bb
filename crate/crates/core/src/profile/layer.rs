//! Solutions of the congested-layer ODEs in the rescaled variable ζ = ξ/ε^{1/γ}.
//!
//! Both the transition corrector and the barrier functions solve
//!
//!   v'(ζ) = ρ (1 − v^{−γ}),   v(0) = v₀ > 1,
//!
//! and the rescaled true profile solves the ε-perturbed variant. All are
//! monotone, approach 1 exponentially as ζ → −∞ and grow linearly as
//! ζ → +∞, so a single tabulated representation with analytic tail
//! extensions serves every consumer.

use crate::error::Result;
use crate::numerics::ode::{rk45, trbdf2, Drive, OdeSolution, OdeTol};

/// Relative gap to the left fixed point below which integration stops and the
/// exponential tail takes over.
pub(crate) const TAIL_FLOOR: f64 = 1e-13;

/// A monotone layer solution: tabulated on [ζ_min, ζ_max], exponential tail
/// `1 + gap_ref e^{σ(ζ − ζ_ref)}` below (anchored at the leftmost node so no
/// overflow occurs for large |ζ_ref|), first-order linear extension above.
#[derive(Debug, Clone)]
pub struct LayerTable {
    pub sol: OdeSolution,
    /// Decay rate of v − 1 as ζ → −∞ (linearization at the fixed point).
    pub sigma: f64,
    /// Leftmost tabulated node and its gap to the fixed point.
    pub zeta_ref: f64,
    pub gap_ref: f64,
}

impl LayerTable {
    /// Wrap a monotone solution table; `sigma` is the linearized decay rate
    /// at the left fixed point, used for the tail extension.
    pub(crate) fn from_monotone_solution(sol: OdeSolution, sigma: f64) -> Self {
        let zeta_ref = sol.x[0];
        let gap_ref = (sol.y[0] - 1.0).max(0.0);
        Self { sol, sigma, zeta_ref, gap_ref }
    }

    pub fn zeta_min(&self) -> f64 {
        self.sol.x_min()
    }

    pub fn zeta_max(&self) -> f64 {
        self.sol.x_max()
    }

    /// Value at ζ; analytic tail below the table, linear extension above.
    /// The bool flags evaluation outside the tabulated range.
    pub fn eval_flagged(&self, zeta: f64) -> (f64, bool) {
        if zeta < self.zeta_min() {
            return (1.0 + self.gap_ref * (self.sigma * (zeta - self.zeta_ref)).exp(), true);
        }
        if zeta > self.zeta_max() {
            let n = self.sol.x.len() - 1;
            return (self.sol.y[n] + (zeta - self.sol.x[n]) * self.sol.yp[n], true);
        }
        (self.sol.eval(zeta), false)
    }

    pub fn eval(&self, zeta: f64) -> f64 {
        self.eval_flagged(zeta).0
    }

    /// ζ at which the solution reaches `level` (monotone inversion).
    pub fn find_level(&self, level: f64) -> Result<f64> {
        self.sol.find_root(level)
    }

    pub fn max_residual(&self) -> f64 {
        self.sol.max_residual
    }
}

/// Solve a monotone layer ODE v' = f(v), v(0) = v0, forward until `grow_until`
/// is reached (or ζ_hi) and backward until the tail floor (or ζ_lo).
/// `sigma` is the linearized decay rate at v = 1 used for the tail extension.
/// The fixed point is assumed exactly representable (true for the rate ODEs).
pub(crate) fn solve_layer(
    f: impl Fn(f64) -> f64 + Copy,
    dfdv: impl Fn(f64) -> f64 + Copy,
    v0: f64,
    zeta_lo: f64,
    zeta_hi: f64,
    grow_until: Option<f64>,
    sigma: f64,
    tol: OdeTol,
) -> Result<LayerTable> {
    let admissible = |y: f64| y > 1.0;
    let fwd = {
        let stop_level = grow_until;
        let stop = move |_x: f64, y: f64| stop_level.map(|l| y >= l).unwrap_or(false);
        rk45(
            |_, y| f(y),
            0.0,
            v0,
            zeta_hi,
            tol,
            Drive { admissible: Some(&admissible), stop: Some(&stop), max_steps: 2_000_000 },
        )?
    };
    let bwd = {
        let stop = move |_x: f64, y: f64| y - 1.0 <= TAIL_FLOOR * v0.max(2.0);
        trbdf2(
            |_, y| f(y),
            |_, y| dfdv(y),
            0.0,
            v0,
            zeta_lo,
            tol,
            Drive { admissible: Some(&admissible), stop: Some(&stop), max_steps: 2_000_000 },
        )?
    };
    // Merge: bwd is stored in increasing ζ and ends at ζ = 0 = fwd start.
    let mut x = bwd.x;
    let mut y = bwd.y;
    let mut yp = bwd.yp;
    x.extend_from_slice(&fwd.x[1..]);
    y.extend_from_slice(&fwd.y[1..]);
    yp.extend_from_slice(&fwd.yp[1..]);
    let sol = OdeSolution { x, y, yp, max_residual: bwd.max_residual.max(fwd.max_residual) };
    Ok(LayerTable::from_monotone_solution(sol, sigma))
}

/// Solve v' = ρ (1 − v^{−γ}), v(0) = 2: the corrector (ρ = 1/(μ s̄)) and the
/// barrier functions (ρ = ρ̄_ε, ρ̲_ε). The decay rate at the fixed point is
/// ρ γ and the slope at +∞ is ρ.
pub(crate) fn solve_rate_ode(
    rho: f64,
    gamma: f64,
    zeta_lo: f64,
    zeta_hi: f64,
    grow_until: Option<f64>,
    tol: OdeTol,
) -> Result<LayerTable> {
    let f = move |v: f64| rho * (1.0 - v.powf(-gamma));
    let dfdv = move |v: f64| rho * gamma * v.powf(-gamma - 1.0);
    solve_layer(f, dfdv, 2.0, zeta_lo, zeta_hi, grow_until, rho * gamma, tol)
}
