//! Quantitative checks: weighted energies E_k and dissipations D_k, the
//! X-norm, the linearized energy identity, the commutator identities, the
//! nonlinear remainder bounds, and rate fitting.
//!
//!   E_k = ∫ [ |∂ₓᵏW|²/(−p_ε'(v_ε)) + |∂ₓᵏV|² ],
//!   D_k = ∫ [ ∂ₓv_ε |∂ₓᵏW|² + |∂ₓ^{k+1}V|² ],
//!   ‖(W,V)‖²_X = sup_t Σ_k cᵏ ε^{2k/γ} [ E_k(t) + ∫₀ᵗ D_k ].
//!
//! Profile-dependent weights are evaluated analytically through the profile
//! ODE (−1/p' > 0 and ∂ₓv_ε > 0 exactly), never by differencing samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::fit::linear_fit;
use crate::params::ModelParams;
use crate::pressure::{
    deriv_gap, energy_weight, nonlinear_f, nonlinear_f_diff, nonlinear_h, nonlinear_h_diff,
    pressure, taylor_remainder2,
};
use crate::profile::TravelingWave;
use crate::sim::{integrated_perturbation, IntegratedState, LinearizedRun, SimState};

/// Default X-norm coupling constant c (small, independent of ε).
pub const X_NORM_C_DEFAULT: f64 = 0.25;

fn trapz(vals: impl Fn(usize) -> f64, n: usize, dx: f64) -> f64 {
    let mut acc = 0.5 * (vals(0) + vals(n - 1));
    for i in 1..n - 1 {
        acc += vals(i);
    }
    acc * dx
}

/// Trapezoid mass of a sampled field.
pub fn mass_of(field: &[f64], dx: f64) -> f64 {
    trapz(|i| field[i], field.len(), dx)
}

/// k-th centered derivative of a sampled field (one-sided second-order
/// closure at the boundaries, where integrands are certified negligible by
/// the far-field checks).
fn derivative_k(f: &[f64], dx: f64, k: usize) -> Vec<f64> {
    match k {
        0 => f.to_vec(),
        1 => {
            let n = f.len();
            let mut d = vec![0.0; n];
            d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
            d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
            for i in 1..n - 1 {
                d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
            }
            d
        }
        2 => {
            let n = f.len();
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (dx * dx);
            }
            d[0] = d[1];
            d[n - 1] = d[n - 2];
            d
        }
        3 => {
            let n = f.len();
            let mut d = vec![0.0; n];
            for i in 2..n - 2 {
                d[i] = (f[i + 2] - 2.0 * f[i + 1] + 2.0 * f[i - 1] - f[i - 2]) / (2.0 * dx * dx * dx);
            }
            d[0] = d[2];
            d[1] = d[2];
            d[n - 1] = d[n - 3];
            d[n - 2] = d[n - 3];
            d
        }
        _ => panic!("derivative order {k} not used"),
    }
}

fn profile_fields(ws: &IntegratedState, wave: &TravelingWave) -> (Vec<f64>, Vec<f64>) {
    let n = ws.x.len();
    let mut vprof = vec![0.0; n];
    let mut dvprof = vec![0.0; n];
    for (i, &x) in ws.x.iter().enumerate() {
        let xi = ws.profile_xi(x);
        vprof[i] = wave.v_at(xi);
        dvprof[i] = wave.dv_at(xi);
    }
    (vprof, dvprof)
}

/// E_k of an integrated state (k = 0, 1, 2).
pub fn energy_ek(ws: &IntegratedState, wave: &TravelingWave, params: &ModelParams, k: usize) -> f64 {
    assert!(k <= 2, "E_k defined for k = 0, 1, 2");
    let (vprof, _) = profile_fields(ws, wave);
    let dw = derivative_k(&ws.w_int, ws.dx, k);
    let dv = derivative_k(&ws.v_int, ws.dx, k);
    trapz(
        |i| energy_weight(vprof[i], params) * dw[i] * dw[i] + dv[i] * dv[i],
        ws.x.len(),
        ws.dx,
    )
}

/// D_k of an integrated state (k = 0, 1, 2).
pub fn dissipation_dk(
    ws: &IntegratedState,
    wave: &TravelingWave,
    params: &ModelParams,
    k: usize,
) -> f64 {
    assert!(k <= 2, "D_k defined for k = 0, 1, 2");
    let _ = params;
    let (_, dvprof) = profile_fields(ws, wave);
    let dw = derivative_k(&ws.w_int, ws.dx, k);
    let dv = derivative_k(&ws.v_int, ws.dx, k + 1);
    trapz(|i| dvprof[i] * dw[i] * dw[i] + dv[i] * dv[i], ws.x.len(), ws.dx)
}

/// Time history of (E_k, ∫D_k) with the running X-norm.
#[derive(Debug, Clone, Default)]
pub struct EnergyHistory {
    eps_2g: f64,
    times: Vec<f64>,
    e: Vec<[f64; 3]>,
    d: Vec<[f64; 3]>,
    d_int: Vec<[f64; 3]>,
}

impl EnergyHistory {
    pub fn new(params: &ModelParams) -> Self {
        Self { eps_2g: params.epsilon.powf(2.0 / params.gamma), ..Default::default() }
    }

    pub fn push(&mut self, t: f64, e: [f64; 3], d: [f64; 3]) {
        let d_int = if let (Some(&tp), Some(dp), Some(ip)) =
            (self.times.last(), self.d.last(), self.d_int.last())
        {
            let h = t - tp;
            [
                ip[0] + 0.5 * h * (dp[0] + d[0]),
                ip[1] + 0.5 * h * (dp[1] + d[1]),
                ip[2] + 0.5 * h * (dp[2] + d[2]),
            ]
        } else {
            [0.0; 3]
        };
        self.times.push(t);
        self.e.push(e);
        self.d.push(d);
        self.d_int.push(d_int);
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// sup over recorded times of Σ_k cᵏ ε^{2k/γ} [E_k + ∫₀ᵗ D_k].
    pub fn x_norm_sq(&self, c: f64) -> f64 {
        let mut sup: f64 = 0.0;
        for i in 0..self.times.len() {
            let mut acc = 0.0;
            let mut wk = 1.0;
            for k in 0..3 {
                acc += wk * (self.e[i][k] + self.d_int[i][k]);
                wk *= c * self.eps_2g;
            }
            sup = sup.max(acc);
        }
        sup
    }
}

/// sup-in-time combined norm of a history (c in (0, 1]).
pub fn x_norm_sq(history: &EnergyHistory, c: f64) -> f64 {
    history.x_norm_sq(c)
}

/// Per-observation report emitted by simulation runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    pub e: Option<[f64; 3]>,
    pub d: Option<[f64; 3]>,
    pub x_norm_sq: Option<f64>,
    pub mass_du: f64,
    pub mass_dw: f64,
    pub mass_dv: f64,
    pub sup_du: f64,
    pub sup_dv: f64,
}

/// Compute the report for a state (used by `sim::run` at observations).
pub fn observe(
    state: &SimState,
    wave: &TravelingWave,
    params: &ModelParams,
    history: &mut EnergyHistory,
    energy: bool,
) -> Result<EnergyReport> {
    let n = state.x.len();
    let mut du = vec![0.0; n];
    let mut dv = vec![0.0; n];
    let mut uprof = vec![0.0; n];
    let mut vprof = vec![0.0; n];
    for (i, &x) in state.x.iter().enumerate() {
        let xi = state.profile_xi(x);
        vprof[i] = wave.v_at(xi);
        uprof[i] = wave.u_at(xi);
        du[i] = state.u[i] - uprof[i];
        dv[i] = state.v[i] - vprof[i];
    }
    let w = crate::sim::effective_velocity(state, params);
    let wprof = crate::sim::effective_velocity_of(&uprof, &vprof, state.dx, params.mu);
    let dw: Vec<f64> = (0..n).map(|i| w[i] - wprof[i]).collect();

    let sup_du = du.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let sup_dv = dv.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let (mut e, mut d, mut xn) = (None, None, None);
    if energy {
        let ws = integrated_perturbation(state, wave, params)?;
        let ek = [0, 1, 2].map(|k| energy_ek(&ws, wave, params, k));
        let dk = [0, 1, 2].map(|k| dissipation_dk(&ws, wave, params, k));
        history.push(state.t, ek, dk);
        e = Some(ek);
        d = Some(dk);
        xn = Some(history.x_norm_sq(X_NORM_C_DEFAULT));
    }
    Ok(EnergyReport {
        t: state.t,
        e,
        d,
        x_norm_sq: xn,
        mass_du: mass_of(&du, state.dx),
        mass_dw: mass_of(&dw, state.dx),
        mass_dv: mass_of(&dv, state.dx),
        sup_du,
        sup_dv,
    })
}

/// |E₀(T) + ∫(s-term + viscous term) − E₀(0)| of a linearized run: the
/// discrete residual of the linearized energy identity.
pub fn energy_identity_residual(run: &LinearizedRun) -> f64 {
    run.energy_identity_residual()
}

/// Result of the commutator identity checks at one grid spacing.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CommutatorReport {
    /// max over the grid of |discrete [L,∂] − closed form| (both components).
    pub first_order_err: f64,
    /// max discrepancy of the second-order identity.
    pub second_order_err: f64,
    /// max change of the commutator output under a change of f (exact 0 in
    /// reals: the identity does not read f).
    pub f_dependence: f64,
}

struct DiscreteL<'a> {
    vprof: &'a [f64],
    dx: f64,
    mu: f64,
}

impl DiscreteL<'_> {
    fn d1(&self, f: &[f64]) -> Vec<f64> {
        derivative_k(f, self.dx, 1)
    }

    /// Flux-form viscous operator ∂ₓ(v⁻¹ ∂ₓg), as in the linearized stepper.
    fn visc(&self, g: &[f64]) -> Vec<f64> {
        let n = g.len();
        let mut out = vec![0.0; n];
        let face = |i: usize| 0.5 * (1.0 / self.vprof[i] + 1.0 / self.vprof[i + 1]);
        for i in 1..n - 1 {
            out[i] =
                (face(i) * (g[i + 1] - g[i]) - face(i - 1) * (g[i] - g[i - 1])) / (self.dx * self.dx);
        }
        out[0] = out[1];
        out[n - 1] = out[n - 2];
        out
    }

    fn apply(&self, f: &[f64], g: &[f64], params: &ModelParams) -> (Vec<f64>, Vec<f64>) {
        let n = f.len();
        let dg = self.d1(g);
        let df = self.d1(f);
        let vg = self.visc(g);
        let mut first = vec![0.0; n];
        let mut second = vec![0.0; n];
        for i in 0..n {
            first[i] = pressure(self.vprof[i], 1, params).unwrap() * dg[i];
            second[i] = -df[i] - self.mu * vg[i];
        }
        (first, second)
    }

    fn commutator(&self, f: &[f64], g: &[f64], params: &ModelParams) -> (Vec<f64>, Vec<f64>) {
        let (lf, lg) = self.apply(f, g, params);
        let (l_df, l_dg) = self.apply(&self.d1(f), &self.d1(g), params);
        let dlf = self.d1(&lf);
        let dlg = self.d1(&lg);
        let n = f.len();
        let mut c1 = vec![0.0; n];
        let mut c2 = vec![0.0; n];
        for i in 0..n {
            c1[i] = l_df[i] - dlf[i];
            c2[i] = l_dg[i] - dlg[i];
        }
        (c1, c2)
    }
}

/// Verify the first- and second-order commutator identities
///   [L_ε, ∂ₓ](f, g) = (−p_ε''(v_ε) ∂ₓv_ε ∂ₓg, −μ ∂ₓ((∂ₓv_ε/v_ε²) ∂ₓg)),
///   [L_ε, ∂ₓ²](f, g) = 2 [L_ε, ∂ₓ](∂ₓf, ∂ₓg)
///                      − (∂ₓ(p_ε'' ∂ₓv_ε) ∂ₓg, +μ ∂ₓ(∂ₓ(∂ₓv_ε/v_ε²) ∂ₓg)),
/// against the discrete operators at spacing h. Errors are O(h²). (Expanding
/// [L,∂²] = [L,∂]∂ + ∂[L,∂] pins the sign of the last term: the second
/// component of the subtracted pair is +μ∂ₓ(∂ₓ(∂ₓv_ε/v_ε²)∂ₓg).)
pub fn commutator_check(
    wave: &TravelingWave,
    params: &ModelParams,
    test_g: impl Fn(f64) -> f64,
    h: f64,
) -> Result<CommutatorReport> {
    let (lo, hi) = wave.domain;
    let a = lo + 0.05 * (hi - lo);
    let b = hi - 0.05 * (hi - lo);
    let n = ((b - a) / h).ceil() as usize + 1;
    if n < 32 {
        return Err(Error::Usage("commutator grid too coarse".into()));
    }
    let x: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
    let vprof: Vec<f64> = x.iter().map(|&xi| wave.v_at(xi)).collect();
    let dvprof: Vec<f64> = x.iter().map(|&xi| wave.dv_at(xi)).collect();
    // ∂²ₓv_ε = A'(𝔳)A(𝔳), obtained by differentiating the profile ODE.
    let ddvprof: Vec<f64> = x
        .iter()
        .map(|&xi| {
            let v = wave.v_at(xi);
            let s = wave.s;
            let a_v = wave.dv_at(xi);
            // A'(v) = A(v)/v + v/(μs) (−s² − p'(v))
            let ap = a_v / v + v / (params.mu * s) * (-s * s - pressure(v, 1, params).unwrap());
            ap * a_v
        })
        .collect();

    let g: Vec<f64> = x.iter().map(|&xi| test_g(xi)).collect();
    let f: Vec<f64> = x.iter().map(|&xi| (0.7 * xi).cos()).collect();
    let op = DiscreteL { vprof: &vprof, dx: h, mu: params.mu };

    let (c1, c2) = op.commutator(&f, &g, params);
    let dg = op.d1(&g);
    // closed form, profile factors analytic
    let mut exact1 = vec![0.0; n];
    let mut prod = vec![0.0; n];
    for i in 0..n {
        exact1[i] = -pressure(vprof[i], 2, params)? * dvprof[i] * dg[i];
        prod[i] = dvprof[i] / (vprof[i] * vprof[i]) * dg[i];
    }
    let dprod = op.d1(&prod);
    let margin = ((1.0 / h).ceil() as usize).max(6);
    let mut first_err: f64 = 0.0;
    for i in margin..n - margin {
        first_err = first_err.max((c1[i] - exact1[i]).abs());
        first_err = first_err.max((c2[i] + params.mu * dprod[i]).abs());
    }

    // f-independence: replace f entirely; the commutator must not move.
    let f2: Vec<f64> = x.iter().map(|&xi| 2.3 * (0.31 * xi).sin() + 0.4).collect();
    let (c1b, c2b) = op.commutator(&f2, &g, params);
    let mut f_dep: f64 = 0.0;
    for i in margin..n - margin {
        f_dep = f_dep.max((c1[i] - c1b[i]).abs()).max((c2[i] - c2b[i]).abs());
    }

    // Second-order identity: [L, ∂²](f,g) against
    // 2 [L,∂](∂f, ∂g) − (∂ₓ(p''∂ₓv)·∂ₓg, −μ ∂ₓ(∂ₓ(∂ₓv/v²)·∂ₓg)).
    let d2 = |q: &[f64]| op.d1(&op.d1(q));
    let (l_ddf, l_ddg) = op.apply(&d2(&f), &d2(&g), params);
    let (lf, lg) = op.apply(&f, &g, params);
    let ddlf = d2(&lf);
    let ddlg = d2(&lg);
    let (k1, k2) = op.commutator(&op.d1(&f), &op.d1(&g), params);
    // analytic inner factors
    let mut t1 = vec![0.0; n]; // ∂ₓ(p''(v_ε)∂ₓv_ε) = p'''(∂ₓv)² + p''∂²ₓv
    let mut t2 = vec![0.0; n]; // ∂ₓ(∂ₓv/v²)
    for i in 0..n {
        t1[i] = pressure(vprof[i], 3, params)? * dvprof[i] * dvprof[i]
            + pressure(vprof[i], 2, params)? * ddvprof[i];
        t2[i] = ddvprof[i] / (vprof[i] * vprof[i])
            - 2.0 * dvprof[i] * dvprof[i] / (vprof[i] * vprof[i] * vprof[i]);
    }
    let mut extra2 = vec![0.0; n];
    for i in 0..n {
        extra2[i] = t2[i] * dg[i];
    }
    let dextra2 = op.d1(&extra2);
    let mut second_err: f64 = 0.0;
    for i in margin..n - margin {
        let lhs1 = l_ddf[i] - ddlf[i];
        let rhs1 = 2.0 * k1[i] - t1[i] * dg[i];
        let lhs2 = l_ddg[i] - ddlg[i];
        let rhs2 = 2.0 * k2[i] - params.mu * dextra2[i];
        second_err = second_err.max((lhs1 - rhs1).abs()).max((lhs2 - rhs2).abs());
    }

    Ok(CommutatorReport { first_order_err: first_err, second_order_err: second_err, f_dependence: f_dep })
}

/// One empirical constant: max over samples of |LHS| / (RHS without C).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundRatio {
    pub name: String,
    pub max_ratio: f64,
}

/// Per-ε row of the bound scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRow {
    pub epsilon: f64,
    pub gamma: f64,
    pub ratios: Vec<BoundRatio>,
}

impl ScanRow {
    pub fn ratio(&self, name: &str) -> Option<f64> {
        self.ratios.iter().find(|r| r.name == name).map(|r| r.max_ratio)
    }
}

/// Deterministic sampling plan for the bound scan. Amplitudes are fractions
/// of the hypothesis radius ε^{1/γ}/2; profile points are fixed in the
/// rescaled congested variable 𝑣̃ and in the free-zone fraction of (1, v₊),
/// which keeps the sampled configurations comparable across ε.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplePlan {
    pub amplitudes: Vec<f64>,
    pub wavenumbers: Vec<f64>,
    pub phases: Vec<f64>,
    pub layer_points: Vec<f64>,
    pub free_fractions: Vec<f64>,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self {
            amplitudes: vec![1.0, 0.5, 0.1],
            wavenumbers: vec![0.5, 1.0, 3.0],
            phases: vec![-std::f64::consts::FRAC_PI_2, -0.7, 0.3, 1.1, 2.5],
            layer_points: vec![1.0 + 1e-9, 1.05, 1.3, 2.0, 4.0],
            free_fractions: vec![0.25, 0.5, 0.8, 0.97],
        }
    }
}

impl SamplePlan {
    fn validate(&self) -> Result<()> {
        if self.amplitudes.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
            return Err(Error::Usage(
                "amplitudes are fractions of the hypothesis radius and must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct FSample {
    f: f64,
    fx: f64,
    fxx: f64,
}

struct ScanPoint {
    v: f64,
    dv: f64,
    ddv: f64,
}

/// max over samples of |LHS|/RHS for each bound of the two nonlinear-remainder
/// lemmas, at each parameter set. Samples violating the hypothesis
/// |f| ≤ ε^{1/γ}/2 (|f₁| + |f₂| for the difference bounds) are rejected by
/// construction of the plan.
pub fn lemma_bound_scan(params_list: &[ModelParams], plan: &SamplePlan) -> Result<Vec<ScanRow>> {
    plan.validate()?;
    let mut rows = Vec::new();
    for params in params_list {
        rows.push(scan_one(params, plan)?);
    }
    Ok(rows)
}

fn scan_one(params: &ModelParams, plan: &SamplePlan) -> Result<ScanRow> {
    let e = params.layer_scale();
    let s = crate::profile::shock_speed(params);
    let radius = 0.5 * e;

    // Profile points: congested layer (v = 1 + ε^{1/γ} 𝑣̃) and free zone.
    let mut points = Vec::new();
    for &vt in &plan.layer_points {
        let v = 1.0 + e * vt;
        points.push(point_at(v, s, params));
    }
    for &th in &plan.free_fractions {
        let v = 1.0 + th * (params.v_plus - 1.0);
        if v > params.v_minus {
            points.push(point_at(v, s, params));
        }
    }

    // f samples: (f, ∂ₓf, ∂²ₓf) = a·radius·(sin φ, k cos φ, −k² sin φ).
    let mut samples = Vec::new();
    for &a in &plan.amplitudes {
        for &k in &plan.wavenumbers {
            for &phi in &plan.phases {
                samples.push(FSample {
                    f: a * radius * phi.sin(),
                    fx: a * radius * k * phi.cos(),
                    fxx: -a * radius * k * k * phi.sin(),
                });
            }
        }
    }

    let names = [
        "F", "dxF", "dxxF", "H", "dxH", "dxxH", "F_diff", "dxF_diff", "dxxF_diff", "H_diff",
        "dxH_diff", "dxxH_diff",
    ];
    let mut maxima = [0.0f64; 12];
    let push = |maxima: &mut [f64; 12], idx: usize, lhs: f64, rhs: f64| {
        if rhs > 1e-300 {
            maxima[idx] = maxima[idx].max(lhs.abs() / rhs);
        }
    };

    for pt in &points {
        let v = pt.v;
        let a1 = v - 1.0;
        let p0 = pressure(v, 0, params)?;
        let p1 = pressure(v, 1, params)?;
        for (i, sf) in samples.iter().enumerate() {
            single_bounds(params, pt, sf, p0, p1, a1, &mut maxima, &push)?;
            // Difference bounds: pair with a half-amplitude sample at another
            // phase so |f₁| + |f₂| ≤ radius still holds.
            let sg = samples[(i + 3) % samples.len()];
            let sg = FSample { f: 0.5 * sg.f, fx: 0.5 * sg.fx, fxx: 0.5 * sg.fxx };
            if sf.f.abs() * 0.5 + sg.f.abs() <= radius {
                let sf_half = FSample { f: 0.5 * sf.f, fx: 0.5 * sf.fx, fxx: 0.5 * sf.fxx };
                diff_bounds(params, pt, &sf_half, &sg, p0, a1, &mut maxima, &push)?;
            }
        }
    }

    Ok(ScanRow {
        epsilon: params.epsilon,
        gamma: params.gamma,
        ratios: names
            .iter()
            .zip(maxima)
            .map(|(n, m)| BoundRatio { name: n.to_string(), max_ratio: m })
            .collect(),
    })
}

fn point_at(v: f64, s: f64, params: &ModelParams) -> ScanPoint {
    let dv = crate::profile::wave_slope(v, s, params);
    let ap = dv / v + v / (params.mu * s) * (-s * s - pressure(v, 1, params).unwrap());
    ScanPoint { v, dv, ddv: ap * dv }
}

#[allow(clippy::too_many_arguments)]
fn single_bounds(
    params: &ModelParams,
    pt: &ScanPoint,
    sf: &FSample,
    p0: f64,
    p1: f64,
    a1: f64,
    maxima: &mut [f64; 12],
    push: &impl Fn(&mut [f64; 12], usize, f64, f64),
) -> Result<()> {
    let v = pt.v;
    let (f, fx, fxx) = (sf.f, sf.fx, sf.fxx);
    let e = params.layer_scale();

    // |F| ≤ C p f²/(v−1)²
    let lhs = nonlinear_f(f, v, params)?;
    push(maxima, 0, lhs, p0 * f * f / (a1 * a1));

    // ∂ₓF = −∂ₓv [p'(v+f) − p'(v) − p''(v)f] − ∂ₓf [p'(v+f) − p'(v)]
    let r2p1 = taylor_remainder2(1, v, f, params)?;
    let gap1 = deriv_gap(1, v, f, params)?;
    let lhs = -pt.dv * r2p1 - fx * gap1;
    let rhs = pt.dv * p1.abs() * f * f / (a1 * a1) + p0 * f.abs() * fx.abs() / (a1 * a1);
    push(maxima, 1, lhs, rhs);

    // ∂²ₓF
    let r2p2 = taylor_remainder2(2, v, f, params)?;
    let gap2 = deriv_gap(2, v, f, params)?;
    let p2f = pressure(v + f, 2, params)?;
    let lhs = -pt.ddv * r2p1 - pt.dv * pt.dv * r2p2 - 2.0 * pt.dv * fx * gap2 - fx * fx * p2f
        - fxx * gap1;
    let rhs = e.recip() * pt.dv * p1.abs() * f * f / (a1 * a1)
        + p0 * fx * fx / (a1 * a1)
        + p0 * f.abs() * fxx.abs() / (a1 * a1);
    push(maxima, 2, lhs, rhs);

    // H bounds
    let q = f / v;
    let qx = fx / v - f * pt.dv / (v * v);
    let qxx = fxx / v - 2.0 * fx * pt.dv / (v * v) - f * pt.ddv / (v * v)
        + 2.0 * f * pt.dv * pt.dv / (v * v * v);
    let lhs = nonlinear_h(f, v)?;
    push(maxima, 3, lhs, f * f);
    let lhs = -q * qx / (1.0 + q);
    push(maxima, 4, lhs, f.abs() * fx.abs() + f * f);
    let lhs = -(qx * qx + q * qxx) / (1.0 + q) + q * qx * qx / ((1.0 + q) * (1.0 + q));
    let rhs = f.abs() * fxx.abs()
        + (f.abs() + fx.abs()) * fx.abs()
        + (1.0 + pt.ddv.abs()) * f * f;
    push(maxima, 5, lhs, rhs);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn diff_bounds(
    params: &ModelParams,
    pt: &ScanPoint,
    s1: &FSample,
    s2: &FSample,
    p0: f64,
    a1: f64,
    maxima: &mut [f64; 12],
    push: &impl Fn(&mut [f64; 12], usize, f64, f64),
) -> Result<()> {
    let v = pt.v;
    let e = params.layer_scale();
    let (f1, f2) = (s1.f, s2.f);
    let (df, dfx, dfxx) = (s1.f - s2.f, s1.fx - s2.fx, s1.fxx - s2.fxx);
    let base = p0 / (a1 * a1);

    // |F(f₁) − F(f₂)|
    let lhs = nonlinear_f_diff(f1, f2, v, params)?;
    push(maxima, 6, lhs, base * df.abs() * (f1.abs() + f2.abs()));

    // ∂ₓ(F(f₁) − F(f₂))
    let r2a = taylor_remainder2(1, v, f1, params)?;
    let r2b = taylor_remainder2(1, v, f2, params)?;
    let gap1a = deriv_gap(1, v, f1, params)?;
    let gap1b = deriv_gap(1, v, f2, params)?;
    let lhs = -pt.dv * (r2a - r2b) - (s1.fx * gap1a - s2.fx * gap1b);
    let rhs = base
        * (pt.dv / a1 * df.abs() * (f1.abs() + f2.abs())
            + dfx.abs() * f1.abs()
            + s2.fx.abs() * df.abs());
    push(maxima, 7, lhs, rhs);

    // ∂²ₓ(F(f₁) − F(f₂))
    let r2a2 = taylor_remainder2(2, v, f1, params)?;
    let r2b2 = taylor_remainder2(2, v, f2, params)?;
    let gap2a = deriv_gap(2, v, f1, params)?;
    let gap2b = deriv_gap(2, v, f2, params)?;
    let p2a = pressure(v + f1, 2, params)?;
    let p2b = pressure(v + f2, 2, params)?;
    let lhs = -pt.ddv * (r2a - r2b)
        - pt.dv * pt.dv * (r2a2 - r2b2)
        - 2.0 * pt.dv * (s1.fx * gap2a - s2.fx * gap2b)
        - (s1.fx * s1.fx * p2a - s2.fx * s2.fx * p2b)
        - (s1.fxx * gap1a - s2.fxx * gap1b);
    let rhs = base
        * (e.recip() * pt.dv / a1 * df.abs() * (f1.abs() + f2.abs())
            + (dfx.abs() * f1.abs() + df.abs() * s1.fx.abs()) / a1
            + dfx.abs() * (s1.fx.abs() + s2.fx.abs())
            + df.abs() * s1.fxx.abs()
            + dfxx.abs() * f2.abs()
            + s2.fx * s2.fx * df.abs() / a1);
    push(maxima, 8, lhs, rhs);

    // H differences
    let h = |sf: &FSample| -> (f64, f64, f64) {
        let q = sf.f / v;
        let qx = sf.fx / v - sf.f * pt.dv / (v * v);
        let qxx = sf.fxx / v - 2.0 * sf.fx * pt.dv / (v * v) - sf.f * pt.ddv / (v * v)
            + 2.0 * sf.f * pt.dv * pt.dv / (v * v * v);
        let hx = -q * qx / (1.0 + q);
        let hxx = -(qx * qx + q * qxx) / (1.0 + q) + q * qx * qx / ((1.0 + q) * (1.0 + q));
        (q, hx, hxx)
    };
    let (_, h1x, h1xx) = h(s1);
    let (_, h2x, h2xx) = h(s2);
    let lhs = nonlinear_h_diff(f1, f2, v)?;
    push(maxima, 9, lhs, df.abs() * (f1.abs() + f2.abs()));
    let rhs = f1.abs() * dfx.abs()
        + f1.abs() * df.abs()
        + (s2.fx.abs() + f2.abs()) * df.abs();
    push(maxima, 10, h1x - h2x, rhs);
    let rhs = f1.abs() * ((1.0 + pt.ddv.abs()) * df.abs() + dfx.abs() + dfxx.abs())
        + ((1.0 + pt.ddv.abs()) * f2.abs() + s2.fx.abs() + s2.fxx.abs()) * df.abs()
        + dfx.abs() * (s1.fx.abs() + s2.fx.abs())
        + (f2 * f2 + s2.fx * s2.fx) * df.abs();
    push(maxima, 11, h1xx - h2xx, rhs);
    Ok(())
}

/// Decay summary of a sup-norm time series.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecaySummary {
    pub peak: f64,
    pub final_value: f64,
    /// final / peak (1.0 for an all-zero series).
    pub ratio: f64,
    pub monotone_after_peak: bool,
}

pub fn sup_norm_decay(series: &[f64]) -> DecaySummary {
    assert!(!series.is_empty());
    let (ipeak, peak) = series
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let final_value = *series.last().unwrap();
    let monotone_after_peak = series[ipeak..].windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    let ratio = if peak > 0.0 { final_value / peak } else { 1.0 };
    DecaySummary { peak, final_value, ratio, monotone_after_peak }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least squares of ln(err) against ln(ε).
pub fn rate_fit(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 3 {
        return Err(Error::Usage("rate_fit needs at least 3 pairs".into()));
    }
    if pairs.iter().any(|&(e, err)| e <= 0.0 || err <= 0.0) {
        return Err(Error::Usage("rate_fit needs strictly positive inputs".into()));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
    Ok(RateFit { slope, intercept, r_squared })
}
