//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured quantities. Tolerances are pinned here, not computed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vshock::diagnostics::{
    commutator_check, lemma_bound_scan, rate_fit, sup_norm_decay, SamplePlan,
};
use vshock::profile::{
    anchor_value, congested_decay_fit, min_shift_distance, rankine_hugoniot_residual,
    shock_speed, solve_barriers, solve_profile, transition_error, Cutoff, LimitProfile,
    ShiftSpec, TransitionExpansion,
};
use vshock::sim::{
    init_state, integrated_perturbation, run, run_linearized, DtControl, Frame, GridSpec,
    IntegratedState, PerturbationSpec, SchemeConfig, Shape, Target,
};
use vshock::{Error, ModelParams};

fn pass(criterion: u32, detail: &str) {
    println!("[criterion {criterion:2}] PASS: {detail}");
}

#[test]
fn acceptance_01_rankine_hugoniot_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 20 {
        let eps = 10f64.powf(rng.gen_range(-6.0..-1.3));
        let gamma = rng.gen_range(1.0..4.0);
        let v_plus = rng.gen_range(1.2..4.0);
        let Ok(p) = ModelParams::new(eps, gamma, 1.0, v_plus) else {
            continue;
        };
        count += 1;
        let s = shock_speed(&p);
        let res = rankine_hugoniot_residual(&p, s);
        worst = worst.max(res);
        assert!(
            res < 1e-12,
            "RH residual {res:e} for eps={eps:.3e} gamma={gamma:.3} v+={v_plus:.3}"
        );
    }
    pass(1, &format!("20 random configs, worst relative RH residual {worst:.2e} < 1e-12"));
}

#[test]
fn acceptance_02_profile_validity() {
    let mut worst_res: f64 = 0.0;
    for gamma in [1.0, 2.0, 3.0] {
        for eps in [1e-2, 1e-4, 1e-6] {
            for v_plus in [1.5, 3.0] {
                let p = ModelParams::new(eps, gamma, 1.0, v_plus).unwrap();
                let mid = 0.5 * (1.0 + v_plus);
                let w = solve_profile(&p, ShiftSpec::ValueAtZero(mid), (-3.0, 16.0), 1e-9)
                    .unwrap_or_else(|e| panic!("g={gamma} eps={eps} v+={v_plus}: {e}"));
                // strictly monotone in the resolved interior; monotone within
                // round-off bands at the two plateaus (enforced at build, and
                // re-checked here on the stored samples)
                let span = p.v_plus - p.v_minus;
                let band = 1e-10 * span;
                for win in w.v.windows(2) {
                    let interior =
                        win[0] - p.v_minus > band && p.v_plus - win[1] > band;
                    if interior {
                        assert!(win[1] > win[0], "not strictly increasing");
                    } else {
                        assert!(win[1] >= win[0] - band, "plateau wiggle beyond tolerance");
                    }
                }
                assert!(w.v.iter().all(|&v| v > 1.0 && v < v_plus + 1e-9), "confinement");
                assert!(
                    w.v.iter().all(|&v| v > p.v_minus - 1e-9 * span),
                    "below v_minus"
                );
                assert!(
                    w.meta.max_residual < 1e-8,
                    "g={gamma} eps={eps} v+={v_plus}: residual {}",
                    w.meta.max_residual
                );
                worst_res = worst_res.max(w.meta.max_residual);
            }
        }
    }
    pass(2, &format!(
        "18 parameter sets: monotone, confined, worst ODE residual {worst_res:.2e} < 1e-8"
    ));
}

#[test]
fn acceptance_03_limit_convergence() {
    let mut prev = f64::INFINITY;
    let mut dists = Vec::new();
    for eps in [1e-1, 1e-2, 1e-3, 1e-4, 1e-5] {
        let p = ModelParams::new(eps, 2.0, 1.0, 1.5).unwrap();
        let lp = LimitProfile::from_params(&p);
        // midpoint of the admissible interval ((1+v₊)/2 sits below v₋ at the
        // largest ε of the sweep)
        let mid = 0.5 * (p.v_minus + p.v_plus);
        let w = solve_profile(&p, ShiftSpec::ValueAtZero(mid), (-9.0, 16.0), 1e-9).unwrap();
        let d = min_shift_distance(&w, &lp).unwrap();
        assert!(d < prev, "distance not strictly decreasing at eps={eps}: {d} !< {prev}");
        prev = d;
        dists.push(d);
    }
    assert!(
        *dists.last().unwrap() < 0.05,
        "terminal distance {} >= 0.05",
        dists.last().unwrap()
    );
    pass(3, &format!(
        "min-shift distances strictly decreasing {:?}, terminal {:.4} < 0.05",
        dists.iter().map(|d| (d * 1e4).round() / 1e4).collect::<Vec<_>>(),
        dists.last().unwrap()
    ));
}

#[test]
fn acceptance_04_transition_rate() {
    let eps_list = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7];
    for (gamma, m_margin) in [(1.0, 20.0), (2.0, 0.5)] {
        let mut pairs = Vec::new();
        let mut c_hats = Vec::new();
        for &eps in &eps_list {
            let p = ModelParams::new(eps, gamma, 1.0, 1.5).unwrap();
            let lp = LimitProfile::from_params(&p);
            let exp = TransitionExpansion::build_with(&p, Cutoff::default(), m_margin).unwrap();
            let w = solve_profile(&p, ShiftSpec::TransitionAnchor, (-2.5, 10.0), 1e-9).unwrap();
            let te = transition_error(&w, &exp, &lp, 1.0).unwrap();
            pairs.push((eps, te.sup_err));
            let weighted = te.weighted_err.unwrap_or_else(|| {
                panic!("weighted window empty at gamma={gamma}, eps={eps} (margin {m_margin})")
            });
            c_hats.push(weighted / eps.powf(1.0 / (gamma + 1.0)));
        }
        let fit = rate_fit(&pairs).unwrap();
        let target = 1.0 / (gamma + 1.0);
        assert!(
            (fit.slope - target).abs() <= 0.15,
            "gamma={gamma}: slope {:.4} not within {target} +- 0.15 (errors {pairs:?})",
            fit.slope
        );
        let (lo, hi) = c_hats.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &c| {
            (l.min(c), h.max(c))
        });
        assert!(
            hi / lo < 2.0,
            "gamma={gamma}: weighted constants vary x{:.2}: {c_hats:?}",
            hi / lo
        );
        pass(4, &format!(
            "gamma={gamma}: sup-error slope {:.3} in {target:.3}+-0.15; weighted C-hat in \
             [{lo:.3}, {hi:.3}] (x{:.2} < 2, window margin M={m_margin})",
            fit.slope,
            hi / lo
        ));
    }
}

#[test]
fn acceptance_05_congested_decay() {
    // NOTE: at (gamma=2, eps=1e-3) this criterion is mathematically
    // unattainable as stated: the fitted rate cannot exceed the profile's
    // tail rate (1+eps^{1/g})(gamma - s^2 eps^{1/g})/(mu s) = 0.915*sigma_lower
    // < 0.95*sigma_lower, because sigma_lower = rho_lower*gamma carries the
    // anchor offset v(0)-1 = K eps^{1/(gamma+1)} ~ 8.9% at this eps. The
    // criterion is asserted as written; see the decisions ledger.
    let mut failures = Vec::new();
    for gamma in [1.0, 2.0] {
        for eps in [1e-3, 1e-5] {
            let p = ModelParams::new(eps, gamma, 1.0, 1.5).unwrap();
            let w = solve_profile(&p, ShiftSpec::TransitionAnchor, (-2.0, 10.0), 1e-9).unwrap();
            let fit = congested_decay_fit(&w).unwrap();
            let threshold = fit.sigma_lower * (1.0 - 0.05);
            let ok = fit.r_squared > 0.99 && fit.sigma_hat >= threshold;
            let line = format!(
                "gamma={gamma} eps={eps:.0e}: sigma_hat={:.5} vs 0.95*sigma_lower={:.5} \
                 (sigma_lower={:.5}), r2={:.6} -> {}",
                fit.sigma_hat,
                threshold,
                fit.sigma_lower,
                fit.r_squared,
                if ok { "pass" } else { "FAIL" }
            );
            println!("[criterion  5] {line}");
            if !ok {
                failures.push(line);
            }
        }
    }
    assert!(
        failures.is_empty(),
        "congested-decay criterion failed (see ledger for the blocking analysis): {failures:#?}"
    );
    pass(5, "all four (gamma, eps) combinations within the 5% fit allowance");
}

#[test]
fn acceptance_06_barrier_sandwich() {
    // Sandwich: exact mathematics, checked at both gamma. Crossing
    // asymptotics: checked at gamma=1 where the asymptotic regime
    // (omega_eps >> 1) is reached at these eps (see ledger).
    for gamma in [1.0, 2.0] {
        for eps in [1e-3, 1e-4] {
            let p = ModelParams::new(eps, gamma, 1.0, 1.5).unwrap();
            let v0 = anchor_value(&p, ShiftSpec::TransitionAnchor).unwrap();
            let bp = solve_barriers(&p, v0).unwrap();
            assert_eq!(
                bp.sandwich.violations, 0,
                "gamma={gamma} eps={eps}: {} violations (max {:.2e})",
                bp.sandwich.violations, bp.sandwich.max_violation
            );
            assert_eq!(bp.sandwich.n_checked, 1000);
            if gamma == 1.0 {
                for (name, z) in [("upper", bp.zeta_upper), ("lower", bp.zeta_lower)] {
                    let rel = (z / bp.crossing_asymptote - 1.0).abs();
                    assert!(
                        rel <= 0.15,
                        "gamma=1 eps={eps}: {name} crossing {z:.3} vs asymptote {:.3} ({rel:.3})",
                        bp.crossing_asymptote
                    );
                }
            }
        }
    }
    pass(6, "zero sandwich violations on 1000-point grids (gamma in {1,2}, eps in {1e-3,1e-4}); \
          gamma=1 crossings within 15% of mu*s_bar*(v(0)-1)*eps^{-1/gamma}");
}

#[test]
fn acceptance_07_linearized_energy_identity() {
    let p = ModelParams::new(1e-3, 2.0, 1.0, 1.5).unwrap();
    let w = solve_profile(&p, ShiftSpec::ValueAtZero(1.25), (-10.0, 14.0), 1e-9).unwrap();
    let make_state = || {
        let n = 5000;
        let (a, b) = (-8.0, 12.0);
        let dx = (b - a) / (n - 1) as f64;
        let x: Vec<f64> = (0..n).map(|i| a + dx * i as f64).collect();
        let bump = |x: f64, c: f64| (-(x - c) * (x - c)).exp();
        let wf: Vec<f64> = x.iter().map(|&x| 1e-3 * bump(x, 0.5)).collect();
        let vf: Vec<f64> = x.iter().map(|&x| 1e-3 * bump(x, -0.5)).collect();
        let mut ws = IntegratedState::from_fields(x, wf, vf, w.s);
        ws.frame = Frame::Lab;
        ws
    };
    let mut residuals = Vec::new();
    for dt in [2e-4, 1e-4, 5e-5] {
        let run = run_linearized(make_state(), &w, &p, dt, 0.4).unwrap();
        residuals.push(run.energy_identity_residual());
    }
    let r1 = residuals[0] / residuals[1];
    let r2 = residuals[1] / residuals[2];
    for (i, r) in [r1, r2].iter().enumerate() {
        assert!(
            (1.6..=2.4).contains(r),
            "halving ratio {i}: {r:.3} outside [1.6, 2.4] (residuals {residuals:?})"
        );
    }
    pass(7, &format!(
        "identity residuals {:.3e} -> {:.3e} -> {:.3e}; halving ratios {r1:.2}, {r2:.2} in [1.6, 2.4]",
        residuals[0], residuals[1], residuals[2]
    ));
}

#[test]
fn acceptance_08_commutator_identities() {
    let p = ModelParams::new(1e-2, 2.0, 1.0, 1.5).unwrap();
    let w = solve_profile(&p, ShiftSpec::ValueAtZero(1.25), (-10.0, 14.0), 1e-9).unwrap();
    let g = |x: f64| (0.9 * x).sin() * (-(x * x) / 30.0).exp();
    let r1 = commutator_check(&w, &p, g, 0.02).unwrap();
    let r2 = commutator_check(&w, &p, g, 0.01).unwrap();
    let q1 = r1.first_order_err / r2.first_order_err;
    let q2 = r1.second_order_err / r2.second_order_err;
    assert!((3.0..=5.0).contains(&q1), "first-order ratio {q1:.3} outside 4 +- 1");
    assert!((3.0..=5.0).contains(&q2), "second-order ratio {q2:.3} outside 4 +- 1");
    assert!(r1.f_dependence <= 1e-10 * r1.first_order_err.max(1e-300));
    pass(8, &format!(
        "h-halving error ratios: first-order {q1:.2}, second-order {q2:.2} (both in 4 +- 1); \
         f-independence at round-off"
    ));
}

#[test]
fn acceptance_09_lemma_bounds() {
    let names = [
        "F", "dxF", "dxxF", "H", "dxH", "dxxH", "F_diff", "dxF_diff", "dxxF_diff", "H_diff",
        "dxH_diff", "dxxH_diff",
    ];
    let eps_sweep = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
    for gamma in [1.0, 2.0] {
        let ps: Vec<ModelParams> =
            eps_sweep.iter().map(|&e| ModelParams::new(e, gamma, 1.0, 1.5).unwrap()).collect();
        let rows = lemma_bound_scan(&ps, &SamplePlan::default()).unwrap();
        for name in names {
            let vals: Vec<f64> = rows.iter().map(|r| r.ratio(name).unwrap()).collect();
            let (lo, hi) =
                vals.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
            assert!(lo > 0.0, "gamma={gamma} {name}: degenerate zero ratio");
            assert!(
                hi / lo < 2.0,
                "gamma={gamma} {name}: constants vary x{:.2} across eps ({vals:?})",
                hi / lo
            );
        }
        if gamma == 1.0 {
            for row in &rows {
                let r = row.ratio("F").unwrap();
                assert!(
                    r <= 2.0 + 1e-9,
                    "gamma=1 eps={}: |F| constant {r} exceeds the exact value 2",
                    row.epsilon
                );
                assert!(r >= 2.0 - 1e-6, "gamma=1 eps={}: constant {r} not near 2", row.epsilon);
            }
        }
    }
    pass(9, "empirical constants stable within x2 across eps in {1e-2..1e-6} for all 12 bounds \
          (gamma in {1,2}); gamma=1 |F| constant = 2 within 1e-9");
}

#[test]
fn acceptance_10_nonlinear_stability() {
    let p = ModelParams::new(1e-2, 2.0, 1.0, 1.5).unwrap();
    let amp = 0.1 * p.epsilon.powf(2.5 / p.gamma);
    let w = solve_profile(&p, ShiftSpec::ValueAtZero(1.25), (-52.0, 30.0), 1e-9).unwrap();
    let dx = 0.00625f64;
    let (x_lo, x_hi) = (-50.0, 25.0);
    let n = (((x_hi - x_lo) / dx).round() as usize) + 1;
    let pert = PerturbationSpec {
        shape: Shape::GaussianDipole { center: 3.0, width: 0.35 },
        amplitude: amp,
        target: Target::U,
    };
    assert!(pert.within_theory_budget(&p));
    let st = init_state(&w, &pert, GridSpec { x_lo, x_hi, n }, Frame::CoMoving).unwrap();
    let cfg = SchemeConfig {
        dt_control: DtControl::Cfl { safety: 0.8 },
        boundary_guard: 1e-8,
        energy_reports: true,
    };
    let res = run(st, &cfg, &p, &w, 6.0, 200, |_, _| Ok(())).unwrap();

    // (a) congestion preserved
    assert!(res.min_v_overall > 1.0, "min v = {}", res.min_v_overall);
    // (b) masses conserved to 1e-10
    let mass_worst = res
        .reports
        .iter()
        .map(|r| r.mass_du.abs().max(r.mass_dv.abs()))
        .fold(0.0f64, f64::max);
    assert!(mass_worst < 1e-10, "mass drift {mass_worst:e}");
    // (c) sup norms fall to <= 10% of their peak
    let sup_u: Vec<f64> = res.reports.iter().map(|r| r.sup_du).collect();
    let sup_v: Vec<f64> = res.reports.iter().map(|r| r.sup_dv).collect();
    let du = sup_norm_decay(&sup_u);
    let dv = sup_norm_decay(&sup_v);
    assert!(du.ratio <= 0.1, "sup|u-u_eps| decay ratio {:.4} > 0.1", du.ratio);
    assert!(dv.ratio <= 0.1, "sup|v-v_eps| decay ratio {:.4} > 0.1", dv.ratio);
    // (d) X-norm history bounded by 10x its initial value
    let x0 = res.reports[0].x_norm_sq.unwrap();
    let xmax = res.reports.iter().filter_map(|r| r.x_norm_sq).fold(0.0f64, f64::max);
    assert!(xmax <= 10.0 * x0, "X-norm grew x{:.2}", xmax / x0);

    pass(10, &format!(
        "min(v)-1 = {:.3} > 0; mass drift {mass_worst:.1e} < 1e-10; decay ratios u {:.3}, \
         v {:.3} <= 0.1; X-norm x{:.2} <= 10",
        res.min_v_overall - 1.0,
        du.ratio,
        dv.ratio,
        xmax / x0
    ));
}

#[test]
fn acceptance_11_zero_mass_gate() {
    let p = ModelParams::new(1e-2, 2.0, 1.0, 1.5).unwrap();
    let w = solve_profile(&p, ShiftSpec::ValueAtZero(1.25), (-22.0, 30.0), 1e-9).unwrap();
    let pert = PerturbationSpec {
        shape: Shape::GaussianDipole { center: 0.0, width: 1.0 },
        amplitude: 0.0,
        target: Target::U,
    };
    let grid = GridSpec { x_lo: -20.0, x_hi: 25.0, n: 3000 };
    let mut st = init_state(&w, &pert, grid, Frame::CoMoving).unwrap();
    // Force a non-zero-mass bump directly onto u, bypassing the zero-mass
    // construction.
    for (i, &x) in st.x.iter().enumerate().collect::<Vec<_>>() {
        st.u[i] += 1e-5 * (-(x - 2.0) * (x - 2.0)).exp();
    }
    match integrated_perturbation(&st, &w, &p) {
        Err(Error::NonZeroMass { defect, tol }) => {
            pass(11, &format!(
                "nonzero-mass perturbation rejected: defect {defect:.2e} > tol {tol:.0e}"
            ));
        }
        other => panic!("expected NonZeroMass rejection, got {other:?}"),
    }
}
