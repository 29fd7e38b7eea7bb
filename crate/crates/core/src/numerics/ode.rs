//! Adaptive scalar ODE integrators with per-step residual control.
//!
//! Both steppers accept a step only when (a) the embedded/step-doubling error
//! estimate passes and (b) the cubic Hermite interpolant of the step satisfies
//! the ODE at the step midpoint to `res_tol`. The accepted-step residual is the
//! quantity downstream consumers see: interpolated values between nodes solve
//! the equation to that tolerance.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeTol {
    pub atol: f64,
    pub rtol: f64,
    /// Max |H'(mid) - f(mid)| / (1 + |f(mid)|) allowed per accepted step.
    pub res_tol: f64,
}

impl OdeTol {
    pub fn from_residual(res_tol: f64) -> Self {
        // Error-control tolerances a bit tighter than the residual target,
        // floored where Newton/round-off noise would stall the controller.
        let t = (res_tol * 1e-3).max(1e-13);
        Self { atol: t, rtol: t, res_tol }
    }
}

impl Default for OdeTol {
    fn default() -> Self {
        Self::from_residual(1e-9)
    }
}

/// Dense solution of a scalar ODE: nodes with exact derivative values, joined
/// by cubic Hermite interpolation. Nodes are stored in increasing x.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub yp: Vec<f64>,
    /// Max accepted-step midpoint residual, absolute.
    pub max_residual: f64,
}

impl OdeSolution {
    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.x.last().unwrap()
    }

    fn segment(&self, xq: f64) -> usize {
        match self.x.binary_search_by(|v| v.partial_cmp(&xq).unwrap()) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.clamp(1, self.x.len() - 1) - 1,
        }
    }

    /// Hermite evaluation; clamps to the end values outside the table.
    pub fn eval(&self, xq: f64) -> f64 {
        if xq <= self.x_min() {
            return self.y[0];
        }
        if xq >= self.x_max() {
            return *self.y.last().unwrap();
        }
        let i = self.segment(xq);
        let h = self.x[i + 1] - self.x[i];
        let t = (xq - self.x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.y[i]
            + (t3 - 2.0 * t2 + t) * h * self.yp[i]
            + (-2.0 * t3 + 3.0 * t2) * self.y[i + 1]
            + (t3 - t2) * h * self.yp[i + 1]
    }

    pub fn eval_deriv(&self, xq: f64) -> f64 {
        if xq <= self.x_min() || xq >= self.x_max() {
            return 0.0;
        }
        let i = self.segment(xq);
        let h = self.x[i + 1] - self.x[i];
        let t = (xq - self.x[i]) / h;
        let t2 = t * t;
        ((6.0 * t2 - 6.0 * t) * self.y[i]
            + (3.0 * t2 - 4.0 * t + 1.0) * h * self.yp[i]
            + (-6.0 * t2 + 6.0 * t) * self.y[i + 1]
            + (3.0 * t2 - 2.0 * t) * h * self.yp[i + 1])
            / h
    }

    /// Invert a monotone solution: x such that y(x) = target (bisection on the
    /// Hermite interpolant).
    pub fn find_root(&self, target: f64) -> Result<f64> {
        let n = self.y.len();
        let increasing = self.y[n - 1] > self.y[0];
        let (ylo, yhi) = if increasing {
            (self.y[0], self.y[n - 1])
        } else {
            (self.y[n - 1], self.y[0])
        };
        if target < ylo || target > yhi {
            return Err(Error::ExtendDomain(format!(
                "level {target} outside tabulated range [{ylo}, {yhi}]"
            )));
        }
        let idx = self
            .y
            .windows(2)
            .position(|w| {
                if increasing {
                    w[0] <= target && target <= w[1]
                } else {
                    w[1] <= target && target <= w[0]
                }
            })
            .ok_or_else(|| Error::Numerical("root bracket lost (non-monotone table)".into()))?;
        let (mut a, mut b) = (self.x[idx], self.x[idx + 1]);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let fm = self.eval(m) - target;
            let fa = self.eval(a) - target;
            if (fm == 0.0) || (b - a).abs() < 1e-15 * (1.0 + m.abs()) {
                return Ok(m);
            }
            if (fa <= 0.0) == (fm <= 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }
}

struct StepRecorder {
    x: Vec<f64>,
    y: Vec<f64>,
    yp: Vec<f64>,
    max_residual: f64,
}

impl StepRecorder {
    fn new(x0: f64, y0: f64, yp0: f64) -> Self {
        Self { x: vec![x0], y: vec![y0], yp: vec![yp0], max_residual: 0.0 }
    }

    fn push(&mut self, x: f64, y: f64, yp: f64, residual: f64) {
        self.x.push(x);
        self.y.push(y);
        self.yp.push(yp);
        self.max_residual = self.max_residual.max(residual);
    }

    fn finish(mut self, forward: bool) -> OdeSolution {
        if !forward {
            self.x.reverse();
            self.y.reverse();
            self.yp.reverse();
        }
        OdeSolution { x: self.x, y: self.y, yp: self.yp, max_residual: self.max_residual }
    }
}

/// Midpoint Hermite residual of a candidate step, and the residual measured
/// relative to 1 + |f| after subtracting the noise floor of differencing the
/// endpoint values over h. `noise_scale` is the absolute accuracy of the
/// endpoint values themselves (round-off for explicit steps, the Newton
/// stopping tolerance for implicit ones); without the floor, halving a
/// noise-dominated step raises the measured residual and the controller
/// spirals into underflow.
#[allow(clippy::too_many_arguments)]
fn step_residual(
    f: &mut impl FnMut(f64, f64) -> f64,
    x0: f64,
    y0: f64,
    yp0: f64,
    x1: f64,
    y1: f64,
    yp1: f64,
    noise_scale: f64,
) -> (f64, f64) {
    let h = x1 - x0;
    let ym = 0.5 * (y0 + y1) + 0.125 * h * (yp0 - yp1);
    let dym = 1.5 * (y1 - y0) / h - 0.25 * (yp0 + yp1);
    let fm = f(x0 + 0.5 * h, ym);
    let res = (dym - fm).abs();
    let noise = noise_scale * (1.0 + y0.abs().max(y1.abs())) / h.abs();
    let effective = (res - noise).max(0.0);
    (res, effective / (1.0 + fm.abs()))
}

/// Endpoint-value accuracy of explicit RK steps (round-off level).
const RK_NOISE: f64 = 64.0 * f64::EPSILON;
/// Endpoint-value accuracy of Newton-terminated implicit steps.
const NEWTON_NOISE: f64 = 2e-13;

/// Integration driver options.
pub struct Drive<'a> {
    /// Admissible region for y; steps leaving it are rejected and halved.
    pub admissible: Option<&'a dyn Fn(f64) -> bool>,
    /// Stop early once a node satisfies this predicate.
    pub stop: Option<&'a dyn Fn(f64, f64) -> bool>,
    pub max_steps: usize,
}

impl Default for Drive<'_> {
    fn default() -> Self {
        Self { admissible: None, stop: None, max_steps: 1_000_000 }
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Adaptive explicit Dormand-Prince 5(4) for y' = f(x, y).
pub fn rk45(
    mut f: impl FnMut(f64, f64) -> f64,
    x0: f64,
    y0: f64,
    x_end: f64,
    tol: OdeTol,
    drive: Drive<'_>,
) -> Result<OdeSolution> {
    let forward = x_end >= x0;
    let dir = if forward { 1.0 } else { -1.0 };
    let span = (x_end - x0).abs().max(1e-30);
    let mut h = dir * (span / 100.0).min(0.1);
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, y);
    let mut rec = StepRecorder::new(x, y, k1);
    let mut steps = 0usize;

    while (x_end - x) * dir > 0.0 {
        if steps > drive.max_steps {
            return Err(Error::Numerical(format!("rk45: step budget exhausted at x = {x}")));
        }
        steps += 1;
        if (x + h - x_end) * dir > 0.0 {
            h = x_end - x;
        }
        if h.abs() < 1e-14 * (1.0 + x.abs()) {
            return Err(Error::StepUnderflow { at: x, step: h });
        }

        let mut k = [k1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let mut failed = false;
        for s in 0..6 {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(s + 1) {
                acc += A[s][j] * kj;
            }
            let ys = y + h * acc;
            if let Some(adm) = drive.admissible {
                if !adm(ys) {
                    failed = true;
                    break;
                }
            }
            k[s + 1] = f(x + C[s] * h, ys);
        }
        if failed {
            h *= 0.5;
            continue;
        }
        let y_new = y + h * (A[5][0] * k[0] + A[5][2] * k[2] + A[5][3] * k[3] + A[5][4] * k[4] + A[5][5] * k[5]);
        let err_raw: f64 = E.iter().zip(&k).map(|(e, kk)| e * kk).sum::<f64>() * h;
        if !y_new.is_finite() {
            h *= 0.5;
            continue;
        }
        let scale = tol.atol + tol.rtol * y.abs().max(y_new.abs());
        let err_noise = RK_NOISE * (1.0 + y.abs().max(y_new.abs()));
        let err = (err_raw.abs() - err_noise).max(0.0) / scale;
        if err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            continue;
        }
        let yp_new = k[6];
        let (res_abs, res_rel) =
            step_residual(&mut f, x, y, k[0], x + h, y_new, yp_new, RK_NOISE);
        if res_rel > tol.res_tol {
            h *= 0.5;
            continue;
        }
        x += h;
        y = y_new;
        k1 = yp_new;
        rec.push(x, y, k1, res_abs);
        if let Some(stop) = drive.stop {
            if stop(x, y) {
                break;
            }
        }
        h *= (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
    }
    Ok(rec.finish(forward))
}

/// One TR-BDF2 step (L-stable, second order) solved by Newton iteration.
fn trbdf2_single(
    f: &mut impl FnMut(f64, f64) -> f64,
    dfdy: &mut impl FnMut(f64, f64) -> f64,
    x: f64,
    y: f64,
    h: f64,
    admissible: Option<&dyn Fn(f64) -> bool>,
) -> Option<(f64, f64)> {
    const G: f64 = 2.0 - std::f64::consts::SQRT_2;
    let newton = |f: &mut dyn FnMut(f64, f64) -> f64,
                  dfdy: &mut dyn FnMut(f64, f64) -> f64,
                  xs: f64,
                  c: f64,
                  rhs: f64,
                  guess: f64,
                  admissible: Option<&dyn Fn(f64) -> bool>|
     -> Option<f64> {
        let mut z = guess;
        for _ in 0..30 {
            if !z.is_finite() {
                return None;
            }
            if let Some(adm) = admissible {
                if !adm(z) {
                    return None;
                }
            }
            let g = z - c * f(xs, z) - rhs;
            let dg = 1.0 - c * dfdy(xs, z);
            if dg == 0.0 {
                return None;
            }
            let dz = g / dg;
            z -= dz;
            if dz.abs() <= 1e-14 * (1.0 + z.abs()) {
                return Some(z);
            }
        }
        None
    };

    let f0 = f(x, y);
    // TR stage to x + G h.
    let c1 = 0.5 * G * h;
    let z1 = newton(f, dfdy, x + G * h, c1, y + c1 * f0, y + G * h * f0, admissible)?;
    // BDF2 stage to x + h.
    let d = G * (2.0 - G);
    let c2 = (1.0 - G) / (2.0 - G) * h;
    let rhs = z1 / d - (1.0 - G) * (1.0 - G) / d * y;
    let z2 = newton(f, dfdy, x + h, c2, rhs, z1, admissible)?;
    if let Some(adm) = admissible {
        if !adm(z2) {
            return None;
        }
    }
    Some((z2, f(x + h, z2)))
}

/// Adaptive TR-BDF2 with step-doubling error control. L-stable; suited to the
/// congested-side integrations where explicit steppers would need tiny steps
/// in the original variables.
pub fn trbdf2(
    mut f: impl FnMut(f64, f64) -> f64,
    mut dfdy: impl FnMut(f64, f64) -> f64,
    x0: f64,
    y0: f64,
    x_end: f64,
    tol: OdeTol,
    drive: Drive<'_>,
) -> Result<OdeSolution> {
    let forward = x_end >= x0;
    let dir = if forward { 1.0 } else { -1.0 };
    let span = (x_end - x0).abs().max(1e-30);
    let mut h = dir * (span / 200.0).min(0.05);
    let mut x = x0;
    let mut y = y0;
    let yp0 = f(x, y);
    let mut rec = StepRecorder::new(x, y, yp0);
    let mut steps = 0usize;

    while (x_end - x) * dir > 0.0 {
        if steps > drive.max_steps {
            return Err(Error::Numerical(format!("trbdf2: step budget exhausted at x = {x}")));
        }
        steps += 1;
        if (x + h - x_end) * dir > 0.0 {
            h = x_end - x;
        }
        if h.abs() < 1e-14 * (1.0 + x.abs()) {
            return Err(Error::StepUnderflow { at: x, step: h });
        }

        let big = trbdf2_single(&mut f, &mut dfdy, x, y, h, drive.admissible);
        let half1 = trbdf2_single(&mut f, &mut dfdy, x, y, 0.5 * h, drive.admissible);
        let (Some((yb, _)), Some((y1, yp1))) = (big, half1) else {
            h *= 0.5;
            continue;
        };
        let Some((y2, yp2)) = trbdf2_single(&mut f, &mut dfdy, x + 0.5 * h, y1, 0.5 * h, drive.admissible)
        else {
            h *= 0.5;
            continue;
        };
        let scale = tol.atol + tol.rtol * y.abs().max(y2.abs());
        // Step-doubling compares two Newton-terminated values; below their
        // convergence noise the estimate is meaningless and must not reject.
        let err_noise = NEWTON_NOISE * (1.0 + y.abs().max(y2.abs()));
        let err = ((yb - y2).abs() - err_noise).max(0.0) / (3.0 * scale);
        if err > 1.0 {
            h *= (0.9 * err.powf(-1.0 / 3.0)).clamp(0.2, 1.0);
            continue;
        }
        let yp_here = f(x, y);
        let (res1_abs, res1_rel) =
            step_residual(&mut f, x, y, yp_here, x + 0.5 * h, y1, yp1, NEWTON_NOISE);
        let (res2_abs, res2_rel) =
            step_residual(&mut f, x + 0.5 * h, y1, yp1, x + h, y2, yp2, NEWTON_NOISE);
        if res1_rel.max(res2_rel) > tol.res_tol {
            h *= 0.5;
            continue;
        }
        rec.push(x + 0.5 * h, y1, yp1, res1_abs);
        rec.push(x + h, y2, yp2, res2_abs);
        x += h;
        y = y2;
        if let Some(stop) = drive.stop {
            if stop(x, y) {
                break;
            }
        }
        h *= (0.9 * err.max(1e-10).powf(-1.0 / 3.0)).clamp(0.2, 4.0);
    }
    Ok(rec.finish(forward))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk45_exponential() {
        let sol = rk45(|_, y| -y, 0.0, 1.0, 5.0, OdeTol::default(), Drive::default()).unwrap();
        let exact = (-2.5f64).exp();
        assert!((sol.eval(2.5) - exact).abs() < 1e-9, "{}", sol.eval(2.5));
        assert!(sol.max_residual < 1e-8);
    }

    #[test]
    fn rk45_backward() {
        let sol = rk45(|x, _| x, 0.0, 0.0, -3.0, OdeTol::default(), Drive::default()).unwrap();
        assert!((sol.eval(-2.0) - 2.0).abs() < 1e-9);
        assert!(sol.x.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn trbdf2_stiff_decay() {
        // y' = -1000 (y - cos x): strongly stiff; L-stability keeps steps sane.
        let l = 1000.0;
        let sol = trbdf2(
            |x: f64, y: f64| -l * (y - x.cos()),
            |_, _| -l,
            0.0,
            2.0,
            1.0,
            OdeTol::from_residual(1e-8),
            Drive::default(),
        )
        .unwrap();
        // Slow manifold: y_p = (l² cos x + l sin x)/(1 + l²); the transient
        // from y(0) = 2 is e^{-1000 x} and long gone at x = 1.
        let exact = (l * l * 1.0f64.cos() + l * 1.0f64.sin()) / (1.0 + l * l);
        assert!((sol.eval(1.0) - exact).abs() < 1e-6, "{}", sol.eval(1.0));
    }

    #[test]
    fn root_finding_on_monotone_solution() {
        let sol = rk45(|_, y| y, 0.0, 1.0, 3.0, OdeTol::default(), Drive::default()).unwrap();
        let x = sol.find_root(std::f64::consts::E).unwrap();
        assert!((x - 1.0).abs() < 1e-9);
        assert!(sol.find_root(100.0).is_err());
    }
}
