//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test -p singreg-core --test acceptance -- --nocapture` to see the report.

use std::f64::consts::PI;
use std::time::Instant;

use singreg_core::analysis::{
    classify_family, envelope_check, fit_growth, model_selection_self_test, scale_exponent, EpsSchedule, Envelope,
    GrowthModel, Verdict,
};
use singreg_core::evolution::{
    self, moderateness_envelope as evolution_envelope, moderateness_sweep, solve_evolution, uniqueness_probe_evolution,
    EvolutionProblem, InitialData, Variant,
};
use singreg_core::fracint::{frac_integral, kernel_bound_report, FracOrder};
use singreg_core::grid::{lp_norm, Field, GridSpec};
use singreg_core::kernels::{
    heat_gradient_l1_bound, heat_l1_bound, kernel_handle, schrodinger_sup_bound, BoundRow, PropagatorFamily,
    PropagatorSpec,
};
use singreg_core::mollifier::{mollifier_derivative_l1, MollifierSpec, ScaleLaw};
use singreg_core::regularize::{
    DeltaTerm, KernelFunctionSpec, NonlinearityModel, NonlinearitySpec, SingularDataSpec, SingularKind,
};
use singreg_core::volterra::{
    self, growth_envelope, moderateness_envelope as volterra_envelope, solve_volterra, uniqueness_probe,
    volterra_sweep, FreeTerm, VolterraProblem,
};
use statrs::function::gamma::{gamma, ln_gamma};

/// Print one report line per check and return whether all passed.
fn report(criterion: u32, checks: &[(String, bool)]) -> bool {
    for (what, pass) in checks {
        println!("{} criterion {criterion}: {what}", if *pass { "PASS" } else { "FAIL" });
    }
    checks.iter().all(|c| c.1)
}

fn max_over_min(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi / lo
}

fn rows_table(rows: &[BoundRow]) -> Vec<(f64, f64)> {
    rows.iter().map(|r| (r.eps, r.value)).collect()
}

/// Mittag-Leffler series `Σ z^k / Γ(αk + 1)`, terms summed until negligible.
fn mittag_leffler(alpha: f64, z: f64) -> f64 {
    let mut sum = 0.0;
    for k in 0..400 {
        let kf = k as f64;
        let log_term = kf * z.abs().ln() - ln_gamma(alpha * kf + 1.0);
        let term = if z == 0.0 {
            if k == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            z.signum().powi(k) * log_term.exp()
        };
        sum += term;
        if k > 5 && term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Step `1e-3`; nodes past `t = 1` are ignored.
fn unit_line() -> GridSpec {
    GridSpec::line(0.0, 1.024, 1024).unwrap()
}

fn on_unit_interval(grid: &GridSpec) -> usize {
    grid.coords(0).iter().filter(|t| **t <= 1.0 + 1e-12).count()
}

#[test]
fn criterion_01_fractional_quadrature() {
    let start = Instant::now();
    let grid = unit_line();
    let one = Field::from_fn(grid.clone(), |_| 1.0).unwrap();
    let mut checks = Vec::new();
    for alpha in [0.5, 1.0, 1.5, 2.5] {
        let j = frac_integral(&one, alpha).unwrap();
        let err = grid
            .coords(0)
            .iter()
            .zip(j.as_real().unwrap())
            .take(on_unit_interval(&grid))
            .skip(1)
            .map(|(t, v)| (v / (t.powf(alpha) / gamma(alpha + 1.0)) - 1.0).abs())
            .fold(0.0, f64::max);
        checks.push((format!("J^{alpha}[1] relative error {err:.3e} <= 1e-6"), err <= 1e-6));
    }
    let secs = start.elapsed().as_secs_f64();
    checks.push((format!("runtime {secs:.3} s < 1 s"), secs < 1.0));
    assert!(report(1, &checks));
}

#[test]
fn criterion_02_semigroup_identity() {
    let grid = unit_line();
    let f = Field::from_fn(grid.clone(), |x| x[0].sin()).unwrap();
    let composed = frac_integral(&frac_integral(&f, 0.7).unwrap(), 0.3).unwrap();
    let direct = frac_integral(&f, 1.0).unwrap();
    let n = on_unit_interval(&grid);
    let gap = composed.as_real().unwrap()[..n]
        .iter()
        .zip(direct.as_real().unwrap())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let closed = grid
        .coords(0)
        .iter()
        .take(n)
        .zip(direct.as_real().unwrap())
        .map(|(t, v)| (v - (1.0 - t.cos())).abs())
        .fold(0.0, f64::max);
    assert!(report(
        2,
        &[
            (format!("sup|J^0.3 J^0.7 sin - J^1 sin| = {gap:.3e} <= 1e-4"), gap <= 1e-4),
            (format!("sup|J^1 sin - (1 - cos)| = {closed:.3e} <= 1e-4"), closed <= 1e-4),
        ]
    ));
}

#[test]
fn criterion_03_kernel_bounds() {
    let start = Instant::now();
    let mspec = MollifierSpec::bump(1);
    let sched = EpsSchedule::default();
    let mut checks = Vec::new();

    let positive = kernel_bound_report(FracOrder::new(0.5).unwrap(), &mspec, &sched, 1.0).unwrap();
    let r = max_over_min(positive.rows.iter().map(|r| r.1));
    checks.push((format!("alpha=0.5 L1 max/min {r:.4} <= 1.5"), r <= 1.5));

    let first = kernel_bound_report(FracOrder::new(-1.0).unwrap(), &mspec, &sched, 1.0).unwrap();
    let k = scale_exponent(&first.rows, &mspec.scale).unwrap();
    checks.push((format!("alpha=-1 log-power exponent {k:.4} in [0.8, 1.2]"), (0.8..=1.2).contains(&k)));
    let oracle_gap = first
        .rows
        .iter()
        .map(|(e, v)| (v / mollifier_derivative_l1(&mspec, *e, 1).unwrap() - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push((
        format!("alpha=-1 matches the closed-form derivative norm, relative gap {oracle_gap:.3e} <= 1e-3"),
        oracle_gap <= 1e-3,
    ));
    // closed form L ||φ'||_1 gives the exponent independently of the kernel builder
    let closed: Vec<(f64, f64)> = sched
        .values()
        .iter()
        .map(|&e| (e, mollifier_derivative_l1(&mspec, e, 1).unwrap()))
        .collect();
    let k_closed = scale_exponent(&closed, &mspec.scale).unwrap();
    checks.push((
        format!("closed-form derivative norm exponent {k_closed:.4} in [0.8, 1.2]"),
        (0.8..=1.2).contains(&k_closed),
    ));

    let three_halves = kernel_bound_report(FracOrder::new(-1.5).unwrap(), &mspec, &sched, 1.0).unwrap();
    let k15 = scale_exponent(&three_halves.rows, &mspec.scale).unwrap();
    checks.push((format!("alpha=-1.5 log-power exponent {k15:.4} in [1.7, 2.3]"), (1.7..=2.3).contains(&k15)));

    let secs = start.elapsed().as_secs_f64();
    checks.push((format!("runtime {secs:.2} s < 10 s"), secs < 10.0));
    assert!(report(3, &checks));
}

#[test]
fn criterion_04_heat_kernel_identities() {
    let grid = GridSpec::line(-20.0, 20.0, 1 << 16).unwrap();
    let mut checks = Vec::new();
    for t in [0.1, 1.0] {
        let e = kernel_handle(&PropagatorSpec::unmollified(PropagatorFamily::Heat, 1, 0), t)
            .unwrap()
            .sample(&grid)
            .unwrap();
        let mass = lp_norm(&e, 1.0).unwrap();
        checks.push((format!("t={t}: ||E||_1 = {mass:.12}, |.-1| <= 1e-8"), (mass - 1.0).abs() <= 1e-8));
        let de = kernel_handle(&PropagatorSpec::unmollified(PropagatorFamily::Heat, 1, 1), t)
            .unwrap()
            .sample(&grid)
            .unwrap();
        let g = lp_norm(&de, 1.0).unwrap();
        let exact = (PI * t).powf(-0.5);
        checks.push((
            format!("t={t}: ||dE||_1 = {g:.10} vs (pi t)^-1/2 = {exact:.10}"),
            (g - exact).abs() <= 1e-6,
        ));
    }
    assert!(report(4, &checks));
}

#[test]
fn criterion_05_propagator_envelopes() {
    let sched = EpsSchedule::default();
    let mollifier = MollifierSpec::bump(1).with_scale(ScaleLaw::LogLog);
    let heat = PropagatorSpec::new(PropagatorFamily::Heat, 1, 2, mollifier, 0.0).unwrap();
    let gradient = PropagatorSpec::new(PropagatorFamily::Heat, 1, 1, mollifier, 0.0).unwrap();
    let mut checks = Vec::new();
    for (name, spec) in [("beta=2 heat", heat), ("beta=1 gradient", gradient)] {
        let rows = rows_table(&heat_l1_bound(&spec, 1.0, &sched).unwrap());
        let m = (spec.time_exponent() - 0.5).max(0.0);
        let v = envelope_check(&rows, &Envelope::scale_power(ScaleLaw::LogLog, m), 2).unwrap();
        checks.push((
            format!("{name}: max ratio {:.9} against C1 (ln|ln eps|)^{m}", v.max_ratio),
            v.passed,
        ));
    }
    let grad = PropagatorSpec::new(PropagatorFamily::HeatGradient, 1, 0, mollifier, 0.0).unwrap();
    let rows = rows_table(&heat_gradient_l1_bound(&grad, 1.0, &sched).unwrap());
    let v = envelope_check(&rows, &Envelope::scale_power(ScaleLaw::LogLog, 0.0), 2).unwrap();
    checks.push((format!("spatial gradient family: max ratio {:.9}", v.max_ratio), v.passed));
    assert!(report(5, &checks));
}

fn linear_volterra(alpha: f64, eps: f64) -> VolterraProblem {
    VolterraProblem::scalar(alpha, KernelFunctionSpec::Linear { coefficient: 1.0 }, FreeTerm::Constant(1.0), 1.0, 1e-3, eps)
}

#[test]
fn criterion_06_volterra_oracles() {
    let start = Instant::now();
    let mut checks = Vec::new();

    let s = solve_volterra(&linear_volterra(1.0, 0.0)).unwrap();
    let err = s
        .nodes()
        .iter()
        .zip(s.component(0))
        .map(|(x, f)| (f - x.exp()).abs())
        .fold(0.0, f64::max);
    checks.push((format!("alpha=1: sup|f - e^x| = {err:.3e} <= 1e-4"), err <= 1e-4));

    // polar kernel |x-y|^{-1/2}: f = E_{1/2}(Γ(1/2) x^{1/2})
    let mut abel = linear_volterra(0.5, 1e-8);
    abel.mollifier = abel.mollifier.with_scale(ScaleLaw::Power { gamma: 0.5 });
    let nodes: Vec<f64> = (0..abel.nodes()).map(|j| j as f64 * abel.step).collect();
    let oracle: Vec<f64> = nodes.iter().map(|x| mittag_leffler(0.5, gamma(0.5) * x.sqrt())).collect();
    let size = oracle.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let rel_error = |p: &VolterraProblem| -> f64 {
        let s = solve_volterra(p).unwrap();
        s.component(0)
            .iter()
            .zip(&oracle)
            .map(|(f, o)| (f - o).abs())
            .fold(0.0, f64::max)
            / size
    };
    let at = rel_error(&abel);
    checks.push((format!("alpha=1/2 at eps=1e-8: relative sup error {at:.4e} <= 5e-2"), at <= 5e-2));
    let sched = EpsSchedule::default();
    let errors: Vec<f64> = sched.values().iter().map(|&e| rel_error(&abel.with_eps(e))).collect();
    let tail = &errors[errors.len() - 4..];
    let decreasing = tail.windows(2).all(|w| w[1] < w[0]);
    checks.push((format!("alpha=1/2 errors over the last four sweep points {tail:?} strictly decrease"), decreasing));

    let secs = start.elapsed().as_secs_f64();
    checks.push((format!("runtime {secs:.2} s < 30 s"), secs < 30.0));
    assert!(report(6, &checks));
}

fn delta_evolution(points: usize) -> EvolutionProblem {
    let grid = GridSpec::line(-8.0, 8.0, points).unwrap();
    let data = SingularDataSpec::delta(vec![0.0], MollifierSpec::bump(1));
    EvolutionProblem::new(Variant::ParabolicPlain, grid, 0.25, 1e-3, InitialData::Singular(data), 1e-4)
}

fn power_law(b: f64) -> NonlinearitySpec {
    NonlinearitySpec::new(NonlinearityModel::PowerLaw { gamma: 0.5 }, b, ScaleLaw::Log)
}

#[test]
fn criterion_07_moderateness_exponent() {
    let sched = EpsSchedule::default();
    let table = |p: &EvolutionProblem, q: f64| -> Vec<(f64, f64)> {
        moderateness_sweep(p, &sched, q).unwrap().iter().map(|r| (r.eps, r.sup_norm)).collect()
    };
    let heat = delta_evolution(2048);
    let k = scale_exponent(&table(&heat, f64::INFINITY), &ScaleLaw::Log).unwrap();
    let fit = fit_growth(&table(&heat, 1.0)).unwrap();

    let mut nonlinear = heat.clone();
    nonlinear.nonlinearity = Some(power_law(0.5));
    let k_nl = scale_exponent(&table(&nonlinear, f64::INFINITY), &ScaleLaw::Log).unwrap();
    // the cut-off source adds mass that creeps up with L^b, so this fit is informational
    let fit_nl = fit_growth(&table(&nonlinear, 1.0)).unwrap();
    println!("INFO criterion 7: power-law b=0.5 p=1 fit {:?}, exponent {:.4}", fit_nl.model, fit_nl.exponent);
    assert!(report(
        7,
        &[
            (format!("heat p=inf exponent {k:.4} in 1 +- 0.15"), (k - 1.0).abs() <= 0.15),
            (format!("heat p=1 fitted model {:?}", fit.model), fit.model == GrowthModel::Bounded),
            (format!("power-law b=0.5 p=inf exponent {k_nl:.4} in 1 +- 0.15"), (k_nl - 1.0).abs() <= 0.15),
        ]
    ));
}

fn nonlinear_volterra(alpha: f64, model: NonlinearityModel, b: f64, lambda: f64) -> VolterraProblem {
    VolterraProblem::scalar(
        alpha,
        KernelFunctionSpec::Nonlinear {
            coefficient: lambda,
            nonlinearity: NonlinearitySpec::new(model, b, ScaleLaw::Log),
        },
        FreeTerm::Constant(1.0),
        1.0,
        1e-3,
        1e-4,
    )
}

#[test]
fn criterion_08_gronwall_envelopes() {
    let sched = EpsSchedule::default();
    let mut checks = Vec::new();

    let volterra_cases = [
        ("volterra alpha=1 linear", linear_volterra(1.0, 1e-4)),
        ("volterra alpha=0.5 power-law b=0.3", nonlinear_volterra(0.5, NonlinearityModel::PowerLaw { gamma: 0.5 }, 0.3, 1.0)),
        ("volterra alpha=-0.3 power-law b=0.5", nonlinear_volterra(-0.3, NonlinearityModel::PowerLaw { gamma: 0.5 }, 0.5, 1.0)),
        ("volterra alpha=0.5 power-law b=0.9 lambda=3", nonlinear_volterra(0.5, NonlinearityModel::PowerLaw { gamma: 0.5 }, 0.9, 3.0)),
    ];
    for (name, p) in volterra_cases {
        p.check_guard().unwrap();
        let rows: Vec<(f64, f64)> = volterra_sweep(&p, &sched).unwrap().iter().map(|r| (r.0, r.1)).collect();
        let v = envelope_check(&rows, &volterra_envelope(&p), 2).unwrap();
        checks.push((format!("{name}: max ratio {:.6}", v.max_ratio), v.passed));
    }

    let mut plain = delta_evolution(2048);
    plain.nonlinearity = Some(power_law(0.5));
    let mut potential = delta_evolution(2048);
    potential.variant = Variant::ParabolicPotential;
    potential.potential = Some(SingularDataSpec {
        kind: SingularKind::DeltaSum(vec![DeltaTerm {
            point: vec![0.0],
            order: 0,
            coefficient: 1.0,
        }]),
        mollifier: MollifierSpec::bump(1).with_amplitude(0.5),
    });
    let mut schrodinger = potential.clone();
    schrodinger.variant = Variant::SchrodingerLinear;
    schrodinger.potential.as_mut().unwrap().mollifier.amplitude = 1.5;
    schrodinger.mollify_propagator = false;
    let smooth_grid = GridSpec::line(-8.0, 8.0, 1024).unwrap();
    let bump = Field::from_fn(smooth_grid.clone(), |x| 3.0 * (-x[0] * x[0]).exp()).unwrap();
    let mut smooth = EvolutionProblem::new(Variant::ParabolicPlain, smooth_grid, 0.25, 1e-3, InitialData::Smooth(bump), 1e-4);
    smooth.nonlinearity = Some(NonlinearitySpec::new(NonlinearityModel::SignedSquare, 0.5, ScaleLaw::Log));
    let evolution_cases = [
        ("plain delta data power-law b=0.5", plain),
        ("potential c=0.5 delta data", potential),
        ("schrodinger potential c=1.5 delta data", schrodinger),
        ("plain smooth data signed-square b=0.5", smooth),
    ];
    for (name, p) in evolution_cases {
        p.check_guard().unwrap();
        let rows: Vec<(f64, f64)> = moderateness_sweep(&p, &sched, f64::INFINITY)
            .unwrap()
            .iter()
            .map(|r| (r.eps, r.sup_norm))
            .collect();
        let v = envelope_check(&rows, &evolution_envelope(&p, f64::INFINITY), 2).unwrap();
        checks.push((format!("{name}: p=inf max ratio {:.6}", v.max_ratio), v.passed));
    }

    // negative control: b = 1.2 breaks the guard and the borderline envelope
    let mut demo = nonlinear_volterra(1.0, NonlinearityModel::SignedSquare, 1.2, 2.0);
    let guard_refused = demo.check_guard().is_err();
    demo.override_guards = true;
    let rows: Vec<(f64, f64)> = volterra_sweep(&demo, &sched).unwrap().iter().map(|r| (r.0, r.1)).collect();
    let v = envelope_check(&rows, &growth_envelope(ScaleLaw::Log, demo.length, 1.0), 2).unwrap();
    checks.push(("b=1.2 override is refused by the guard".to_string(), guard_refused));
    checks.push((format!("b=1.2 override fails the envelope: max ratio {:.3e}", v.max_ratio), !v.passed));
    assert!(report(8, &checks));
}

#[test]
fn criterion_09_schrodinger() {
    let mut checks = Vec::new();
    let grid = GridSpec::line(-16.0, 16.0, 512).unwrap();
    let u0 = Field::from_fn(grid.clone(), |x| (-x[0] * x[0]).exp()).unwrap();
    let mut free = EvolutionProblem::new(Variant::SchrodingerLinear, grid, 1.0, 1e-2, InitialData::Smooth(u0), 0.0);
    free.mollify_propagator = false;
    let s = solve_evolution(&free).unwrap();
    let norms = s.norm_series(2.0).unwrap();
    let drift = norms.iter().map(|v| (v - norms[0]).abs()).fold(0.0, f64::max);
    checks.push((format!("free L2 drift over T=1: {drift:.3e} <= 1e-8"), drift <= 1e-8));

    let sched = EpsSchedule::default();
    let one = PropagatorSpec::new(PropagatorFamily::Schrodinger, 1, 0, MollifierSpec::bump(1), 0.0).unwrap();
    let r = max_over_min(schrodinger_sup_bound(&one, 1.0, &sched).unwrap().iter().map(|r| r.value));
    checks.push((format!("n=1 sup bound max/min {r:.4} <= 2"), r <= 2.0));
    let two = PropagatorSpec::new(PropagatorFamily::Schrodinger, 2, 0, MollifierSpec::bump(1), 0.0).unwrap();
    let rows = rows_table(&schrodinger_sup_bound(&two, 1.0, &sched).unwrap());
    let m = two.time_exponent() - 0.5;
    let v = envelope_check(&rows, &Envelope::scale_power(ScaleLaw::Log, m), 2).unwrap();
    checks.push((format!("n=2 reduction: max ratio {:.9} against C1 |ln eps|^{m}", v.max_ratio), v.passed));
    assert!(report(9, &checks));
}

fn is_negligible(table: Vec<(f64, f64)>) -> bool {
    matches!(classify_family(&[table]).map(|c| c.verdict), Ok(Verdict::Negligible { .. }))
}

#[test]
fn criterion_10_uniqueness_probes() {
    let sched = EpsSchedule::default();
    let mut checks = Vec::new();

    let v = nonlinear_volterra(0.5, NonlinearityModel::PowerLaw { gamma: 0.5 }, 0.3, 1.0);
    let shifted = uniqueness_probe(&v, &volterra::Perturbation::NegligibleShift { power: 3.0 }, &sched).unwrap();
    let last = shifted.last().unwrap().1;
    checks.push((format!("volterra shift s=3 is negligible (last difference {last:.3e})"), is_negligible(shifted)));
    let same = uniqueness_probe(&v, &volterra::Perturbation::Identical, &sched).unwrap();
    checks.push(("volterra identical inputs give exactly 0".into(), same.iter().all(|r| r.1 == 0.0)));

    let mut p = delta_evolution(2048);
    p.horizon = 0.1;
    p.nonlinearity = Some(power_law(0.5));
    let shifted = uniqueness_probe_evolution(&p, &evolution::Perturbation::NegligibleShift { power: 3.0 }, &sched, 2.0).unwrap();
    let last = shifted.last().unwrap().1;
    checks.push((format!("parabolic shift s=3 is negligible (last difference {last:.3e})"), is_negligible(shifted)));
    let same = uniqueness_probe_evolution(&p, &evolution::Perturbation::Identical, &sched, 2.0).unwrap();
    checks.push(("parabolic identical inputs give exactly 0".into(), same.iter().all(|r| r.1 == 0.0)));
    assert!(report(10, &checks));
}

#[test]
fn criterion_11_model_selection() {
    let r = model_selection_self_test(100, 0.01, 2024);
    for (class, correct, total) in &r.per_class {
        println!("  {class:?}: {correct}/{total}");
    }
    let rate = r.worst_rate();
    assert!(report(11, &[(format!("worst per-class accuracy {rate:.2} >= 0.95"), rate >= 0.95)]));
}
