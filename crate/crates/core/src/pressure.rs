//! The singular pressure law p_ε(v) = ε (v−1)^{−γ}, its derivatives, and the
//! nonlinear remainders
//!
//!   F_ε(f) = −[p_ε(v+f) − p_ε(v) − p_ε'(v) f],
//!   H_ε(f) = ln(1 + f/v) − f/v,      G_ε(f) = μ ∂ₓ H_ε(f),
//!
//! which have quadratic contact at f = 0. Direct three-term evaluation of F_ε
//! loses all significant digits near f = 0, so small-f accuracy comes from
//! factored closed forms (γ = 1, 2) and from the integral form of the Taylor
//! remainder (general γ), which is cancellation-free because p'' > 0.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::numerics::quad::gauss_legendre;
use crate::params::ModelParams;

/// Highest derivative order used anywhere in the analysis (commutator and
/// second-derivative remainder bounds reach p⁽⁴⁾).
pub const MAX_DERIV: usize = 4;

/// k-th derivative of the pressure, k = 0..=4:
/// p^{(k)}(v) = (−1)^k ε γ(γ+1)⋯(γ+k−1) (v−1)^{−γ−k}.
pub fn pressure(v: f64, k: usize, params: &ModelParams) -> Result<f64> {
    if k > MAX_DERIV {
        return Err(Error::Usage(format!("pressure derivative order {k} > {MAX_DERIV}")));
    }
    if !(v > 1.0) {
        return Err(Error::CongestionDomain { what: "pressure", v });
    }
    let g = params.gamma;
    let mut coeff = params.epsilon;
    for j in 0..k {
        coeff *= -(g + j as f64);
    }
    Ok(coeff * (v - 1.0).powf(-g - k as f64))
}

/// −1/p_ε'(v) = (v−1)^{γ+1} / (γ ε): the weight of the energy functionals.
/// Positive on v > 1; O(ε^{1/γ}) at v₋ and O(ε^{−1}) in the free zone.
pub fn energy_weight(v: f64, params: &ModelParams) -> f64 {
    (v - 1.0).powf(params.gamma + 1.0) / (params.gamma * params.epsilon)
}

/// p_ε''(v) / p_ε'(v)² = (γ+1)(v−1)^γ / (γ ε) ≥ (γ+1)/γ on (1, v₋].
pub fn dpp_over_dp_sq(v: f64, params: &ModelParams) -> f64 {
    (params.gamma + 1.0) * (v - 1.0).powf(params.gamma) / (params.gamma * params.epsilon)
}

fn check_shifted(v_base: f64, f: f64, what: &'static str) -> Result<()> {
    if !(v_base > 1.0) {
        return Err(Error::CongestionDomain { what, v: v_base });
    }
    if !(v_base + f > 1.0) {
        return Err(Error::CongestionDomain { what, v: v_base + f });
    }
    Ok(())
}

fn gl_rule(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static RULES: OnceLock<[(Vec<f64>, Vec<f64>); 2]> = OnceLock::new();
    let rules = RULES.get_or_init(|| [gauss_legendre(24), gauss_legendre(20)]);
    if n == 24 {
        &rules[0]
    } else {
        &rules[1]
    }
}

/// ∫₀¹ w(t) g(t) dt with panels refined toward t = 1 when the shifted argument
/// approaches the singular boundary (f close to −(v−1)).
fn remainder_quad(g: impl Fn(f64) -> f64, refine: bool) -> f64 {
    if !refine {
        let (xs, ws) = gl_rule(24);
        let mut acc = 0.0;
        for (&x, &w) in xs.iter().zip(ws) {
            acc += w * g(0.5 * (x + 1.0));
        }
        return 0.5 * acc;
    }
    let breaks = [0.0, 0.5, 0.9, 0.99, 0.999, 0.9999, 1.0];
    let (xs, ws) = gl_rule(20);
    let mut acc = 0.0;
    for p in breaks.windows(2) {
        let (a, b) = (p[0], p[1]);
        let half = 0.5 * (b - a);
        for (&x, &w) in xs.iter().zip(ws) {
            acc += w * half * g(a + half * (x + 1.0));
        }
    }
    acc
}

/// p^{(k)}(v+f) − p^{(k)}(v) − p^{(k+1)}(v) f, the order-2 Taylor remainder,
/// evaluated as f² ∫₀¹ (1−t) p^{(k+2)}(v+tf) dt (no cancellation; the
/// integrand has one sign).
pub fn taylor_remainder2(k: usize, v: f64, f: f64, params: &ModelParams) -> Result<f64> {
    check_shifted(v, f, "taylor_remainder2")?;
    if k + 2 > MAX_DERIV {
        return Err(Error::Usage(format!("remainder needs derivative order {}", k + 2)));
    }
    let refine = f < -0.5 * (v - 1.0);
    let val = remainder_quad(
        |t| (1.0 - t) * pressure(v + t * f, k + 2, params).unwrap_or(f64::NAN),
        refine,
    );
    Ok(f * f * val)
}

/// p^{(k)}(v+f) − p^{(k)}(v) = f ∫₀¹ p^{(k+1)}(v+tf) dt.
pub fn deriv_gap(k: usize, v: f64, f: f64, params: &ModelParams) -> Result<f64> {
    check_shifted(v, f, "deriv_gap")?;
    if k + 1 > MAX_DERIV {
        return Err(Error::Usage(format!("gap needs derivative order {}", k + 1)));
    }
    let refine = f < -0.5 * (v - 1.0);
    let val = remainder_quad(|t| pressure(v + t * f, k + 1, params).unwrap_or(f64::NAN), refine);
    Ok(f * val)
}

/// F_ε(f) = −[p_ε(v+f) − p_ε(v) − p_ε'(v) f]. Nonpositive for γ ≥ 1
/// (convexity of p_ε); quadratic contact at f = 0.
pub fn nonlinear_f(f: f64, v_base: f64, params: &ModelParams) -> Result<f64> {
    check_shifted(v_base, f, "nonlinear_f")?;
    let a = v_base - 1.0;
    let eps = params.epsilon;
    if params.gamma == 1.0 {
        return Ok(-eps * f * f / (a * a * (a + f)));
    }
    if params.gamma == 2.0 {
        let af = a + f;
        return Ok(-eps * f * f * (3.0 * a + 2.0 * f) / (a * a * a * af * af));
    }
    Ok(-taylor_remainder2(0, v_base, f, params)?)
}

/// F_ε(f₁) − F_ε(f₂), factored through f₁ − f₂ so the result keeps full
/// relative accuracy when the two arguments are close.
pub fn nonlinear_f_diff(f1: f64, f2: f64, v_base: f64, params: &ModelParams) -> Result<f64> {
    check_shifted(v_base, f1, "nonlinear_f_diff")?;
    check_shifted(v_base, f2, "nonlinear_f_diff")?;
    let d = f1 - f2;
    if d == 0.0 {
        return Ok(0.0);
    }
    let a = v_base - 1.0;
    if params.gamma == 1.0 {
        let num = a * (f1 + f2) + f1 * f2;
        return Ok(-params.epsilon * d * num / (a * a * (a + f1) * (a + f2)));
    }
    // F(f1) − F(f2) = −Δ ∫₀¹ (f₂+τΔ) [∫₀¹ p''(v + σ(f₂+τΔ)) dσ] dτ.
    let refine = f1.min(f2) < -0.5 * a;
    let val = remainder_quad(
        |tau| {
            let g = f2 + tau * d;
            g * remainder_quad(|s| pressure(v_base + s * g, 2, params).unwrap_or(f64::NAN), refine)
        },
        refine,
    );
    Ok(-d * val)
}

/// ln(1+x) − x with full relative accuracy near x = 0.
fn log1p_minus_x(x: f64) -> f64 {
    if x.abs() > 0.25 {
        return x.ln_1p() - x;
    }
    // −x²/2 + x³/3 − x⁴/4 + …
    let mut term = x;
    let mut acc = 0.0;
    for k in 2..80 {
        term *= -x;
        let add = term / k as f64;
        acc += add;
        if add.abs() <= f64::EPSILON * acc.abs() {
            break;
        }
    }
    acc
}

/// H_ε(f) = ln(1 + f/v) − f/v ≤ 0; quadratic contact at f = 0.
pub fn nonlinear_h(f: f64, v_base: f64) -> Result<f64> {
    let x = f / v_base;
    if !(1.0 + x > 0.0) {
        return Err(Error::CongestionDomain { what: "nonlinear_h", v: v_base + f });
    }
    Ok(log1p_minus_x(x))
}

/// H_ε(f₁) − H_ε(f₂), cancellation-aware.
pub fn nonlinear_h_diff(f1: f64, f2: f64, v_base: f64) -> Result<f64> {
    let x1 = f1 / v_base;
    let x2 = f2 / v_base;
    if !(1.0 + x1 > 0.0) || !(1.0 + x2 > 0.0) {
        return Err(Error::CongestionDomain { what: "nonlinear_h_diff", v: v_base + f1.min(f2) });
    }
    // H₁ − H₂ = log1pmx(d) − d x₂ with d = (x₁−x₂)/(1+x₂).
    let d = (x1 - x2) / (1.0 + x2);
    Ok(log1p_minus_x(d) - d * x2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(eps: f64, gamma: f64) -> ModelParams {
        ModelParams::new(eps, gamma, 1.0, 10.0).unwrap()
    }

    #[test]
    fn pressure_values() {
        let p = params(0.01, 2.0);
        // (v−1) = 1 ⇒ p = ε
        assert_eq!(pressure(2.0, 0, &p).unwrap(), 0.01);
        // p(v₋) = ε / (ε^{1/γ})^γ = 1 exactly for v₋ = 1 + ε^{1/γ}
        // Exact in reals; in f64 the cached v₋ carries a representation error
        // amplified by 1/ε^{1/γ} when subtracting 1.
        for (eps, g) in [(1e-2, 2.0), (1e-5, 1.0), (1e-4, 3.0)] {
            let p = params(eps, g);
            let val = pressure(p.v_minus, 0, &p).unwrap();
            assert!((val - 1.0).abs() < 1e-10, "p(v_minus) = {val}");
            // p'(v₋) = −γ ε^{−1/γ}
            let d1 = pressure(p.v_minus, 1, &p).unwrap();
            let expect = -g * eps.powf(-1.0 / g);
            assert!((d1 / expect - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn pressure_domain_and_order_errors() {
        let p = params(0.01, 2.0);
        assert!(matches!(pressure(1.0, 0, &p), Err(Error::CongestionDomain { .. })));
        assert!(matches!(pressure(0.5, 2, &p), Err(Error::CongestionDomain { .. })));
        assert!(matches!(pressure(2.0, 5, &p), Err(Error::Usage(_))));
    }

    #[test]
    fn derivative_signs_alternate() {
        let p = params(1e-3, 1.5);
        for (k, sign) in [(0, 1.0), (1, -1.0), (2, 1.0), (3, -1.0), (4, 1.0)] {
            for v in [1.001, 1.1, 2.0, 7.5] {
                let val = pressure(v, k, &p).unwrap();
                assert!(val * sign > 0.0, "k={k} v={v} val={val}");
            }
        }
    }

    #[test]
    fn nonlinear_f_frozen_values() {
        // Closed-form oracle for γ=1: F = −ε f² / ((v−1)² (v−1+f)).
        let p = params(0.01, 1.0);
        let f = nonlinear_f(0.1, 2.0, &p).unwrap();
        assert!((f - (-9.090909090909091e-5)).abs() < 1e-18);
        let f = nonlinear_f(-0.1, 2.0, &p).unwrap();
        assert!((f - (-1.1111111111111112e-4)).abs() < 1e-17);
        assert_eq!(nonlinear_f(0.0, 2.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn nonlinear_f_diff_frozen_values() {
        let p = params(0.01, 1.0);
        assert_eq!(nonlinear_f_diff(0.05, 0.05, 2.0, &p).unwrap(), 0.0);
        let d = nonlinear_f_diff(0.1, 0.0, 2.0, &p).unwrap();
        assert!((d - (-9.090909090909091e-5)).abs() < 1e-17);
        let d = nonlinear_f_diff(0.1, 0.05, 2.0, &p).unwrap();
        // two direct evaluations: F(0.1) − F(0.05) = −6.70995670995671e−5
        assert!((d - (-6.70995670995671e-5)).abs() < 1e-17, "{d}");
    }

    #[test]
    fn nonlinear_h_frozen_values() {
        assert_eq!(nonlinear_h(0.0, 2.0).unwrap(), 0.0);
        let h = nonlinear_h(0.1, 2.0).unwrap();
        assert!((h - (1.05f64.ln() - 0.05)).abs() < 1e-16);
        assert!((h - (-1.2098358305679969e-3)).abs() < 1e-15);
        let h = nonlinear_h(-0.1, 2.0).unwrap();
        assert!((h - (0.95f64.ln() + 0.05)).abs() < 1e-16);
        assert!(nonlinear_h(-2.5, 2.0).is_err());
    }

    #[test]
    fn h_diff_matches_direct_for_separated_args() {
        let d = nonlinear_h_diff(0.1, -0.05, 2.0).unwrap();
        let direct = nonlinear_h(0.1, 2.0).unwrap() - nonlinear_h(-0.05, 2.0).unwrap();
        assert!((d - direct).abs() < 1e-17);
    }

    #[test]
    fn quadrature_path_matches_closed_forms() {
        // Dual route: the general-γ remainder quadrature against the γ∈{1,2}
        // factored forms, across benign and near-boundary arguments.
        for g in [1.0, 2.0] {
            let p = params(1e-3, g);
            for v in [1.05, 1.5, 3.0] {
                for f in [1e-8, -1e-8, 0.01, -0.01, 0.4 * (v - 1.0), -0.8 * (v - 1.0)] {
                    let closed = nonlinear_f(f, v, &p).unwrap();
                    let qd = -taylor_remainder2(0, v, f, &p).unwrap();
                    let rel = ((qd - closed) / closed.abs().max(1e-300)).abs();
                    assert!(rel < 1e-10, "g={g} v={v} f={f} rel={rel:.2e}");
                }
            }
        }
    }

    #[test]
    fn quadratic_contact_to_machine_precision() {
        // F(f) = −p''(v) f²/2 + O(f³) must hold at ~1e−12 relative for tiny f.
        for g in [1.0, 2.0, 3.0] {
            let p = params(1e-4, g);
            let v = 1.7;
            let ppp = pressure(v, 2, &p).unwrap();
            for f in [1e-6, -1e-6, 1e-9, -1e-9] {
                let fe = nonlinear_f(f, v, &p).unwrap();
                let lead = -0.5 * ppp * f * f;
                assert!(
                    ((fe - lead) / lead).abs() < 1e-5 * f.abs().max(1e-9) / 1e-9,
                    "g={g} f={f}"
                );
                // and the value itself is clean quadratic-scale, not noise
                assert!(fe < 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn monotone_decreasing_and_convex(v in 1.01f64..8.0, g in 1.0f64..4.0, le in -6.0f64..-1.0) {
            let p = params(10f64.powf(le), g);
            prop_assert!(pressure(v, 1, &p).unwrap() < 0.0);
            prop_assert!(pressure(v, 2, &p).unwrap() > 0.0);
        }

        #[test]
        fn derivative_consistency_central_difference(
            v in 1.3f64..6.0, g in 1.0f64..4.0, k in 0usize..4,
        ) {
            let p = params(1e-3, g);
            let h = 1e-5 * v;
            let fd = (pressure(v + h, k, &p).unwrap() - pressure(v - h, k, &p).unwrap()) / (2.0 * h);
            let exact = pressure(v, k + 1, &p).unwrap();
            prop_assert!(((fd - exact) / exact).abs() < 1e-7);
        }

        #[test]
        fn f_nonpositive_h_nonpositive(
            v in 1.05f64..5.0, g in 1.0f64..3.5, fr in -0.99f64..4.0,
        ) {
            let p = params(1e-3, g);
            let f = fr * (v - 1.0);
            let fe = nonlinear_f(f, v, &p).unwrap();
            prop_assert!(fe <= 0.0, "F = {fe}");
            let he = nonlinear_h(f, v).unwrap();
            prop_assert!(he <= 1e-16, "H = {he}");
        }

        #[test]
        fn f_diff_consistent_with_two_evaluations(
            v in 1.2f64..4.0, g in 1.0f64..3.0, f1 in -0.15f64..0.3, f2 in -0.15f64..0.3,
        ) {
            let p = params(1e-2, g);
            let d = nonlinear_f_diff(f1, f2, v, &p).unwrap();
            let direct = nonlinear_f(f1, v, &p).unwrap() - nonlinear_f(f2, v, &p).unwrap();
            let scale = nonlinear_f(f1, v, &p).unwrap().abs().max(nonlinear_f(f2, v, &p).unwrap().abs()).max(1e-300);
            prop_assert!((d - direct).abs() <= 1e-9 * scale + 1e-18);
        }
    }
}
