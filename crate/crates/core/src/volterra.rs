//! Regularized nonlinear Volterra systems with polar kernel
//! `f_ε(x) = g_ε(x) + ∫_0^x K_ε(f_ε(y)) R_ε(x - y) dy`, `R_ε = |t|_+^{α-1} * φ_ε`.

use rayon::prelude::*;

use crate::analysis::{EpsSchedule, Envelope};
use crate::error::{Error, Result};
use crate::fracint::{build_mollified_kernel, FracOrder, KernelGrid, MollifierSamples};
use crate::mollifier::{MollifierSpec, ScaleLaw};
use crate::regularize::{shift_bump, KernelFunctionSpec, RegularizedKernel, SingularDataSpec};
use crate::special::{gamma, gauss_legendre};

const MAX_NODE_ITERATIONS: usize = 50;
const NODE_TOLERANCE: f64 = 1e-10;
const MOLLIFIER_CELLS: usize = 2000;

/// Product-integration weights: node `j` sees `start[j] K_0 + Σ_{0<i<j} interior[j-i] K_i + diag K_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarchWeights {
    pub interior: Vec<f64>,
    pub start: Vec<f64>,
    pub diag: f64,
}

impl MarchWeights {
    fn zero(n: usize) -> Self {
        Self {
            interior: vec![0.0; n],
            start: vec![0.0; n],
            diag: 0.0,
        }
    }

    fn history(&self, values: &[f64], j: usize) -> f64 {
        if j == 0 {
            return 0.0;
        }
        let mut s = self.start[j] * values[0];
        for i in 1..j {
            s += self.interior[j - i] * values[i];
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FreeTerm {
    Constant(f64),
    /// Values at the nodes `x_j = j h`, `j = 0..=N`.
    Samples(Vec<f64>),
    /// Mollified delta sum.
    Singular(SingularDataSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolterraComponent {
    pub kernel: KernelFunctionSpec,
    pub free_term: FreeTerm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolterraProblem {
    pub alpha: f64,
    pub components: Vec<VolterraComponent>,
    /// Row `i` mixes the unknowns into the argument of `K_i`; identity when absent.
    pub coupling: Option<Vec<Vec<f64>>>,
    /// Right end `X` of `[0, X]`.
    pub length: f64,
    pub step: f64,
    pub mollifier: MollifierSpec,
    pub eps: f64,
    pub override_guards: bool,
}

impl VolterraProblem {
    /// Scalar problem `f = g + λ∫ K(f) R`.
    pub fn scalar(alpha: f64, kernel: KernelFunctionSpec, free_term: FreeTerm, length: f64, step: f64, eps: f64) -> Self {
        Self {
            alpha,
            components: vec![VolterraComponent { kernel, free_term }],
            coupling: None,
            length,
            step,
            mollifier: MollifierSpec::bump(1),
            eps,
            override_guards: false,
        }
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Self { eps, ..self.clone() }
    }

    pub fn nodes(&self) -> usize {
        (self.length / self.step).round() as usize + 1
    }

    /// Largest cut-off exponent over the components.
    pub fn cutoff_exponent(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.kernel.cutoff_exponent())
            .fold(0.0, f64::max)
    }

    /// Log-power `m` contributed by the kernel: `ᾱ` for `α ≤ 0`, else 0.
    pub fn kernel_growth(&self) -> f64 {
        FracOrder::new(self.alpha).map(|o| o.abar()).unwrap_or(0.0)
    }

    pub fn check_guard(&self) -> Result<()> {
        if self.override_guards {
            return Ok(());
        }
        let b = self.cutoff_exponent();
        let uses_cutoff = self
            .components
            .iter()
            .any(|c| matches!(c.kernel, KernelFunctionSpec::Nonlinear { .. }));
        if self.alpha > 0.0 {
            if b >= 1.0 {
                return Err(Error::GuardViolation(format!("requires b < 1 for alpha > 0, got b = {b}")));
            }
        } else if uses_cutoff && b + self.kernel_growth() >= 1.0 {
            return Err(Error::GuardViolation(format!(
                "requires b + abar < 1 for alpha <= 0, got b = {b}, abar = {}",
                self.kernel_growth()
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        FracOrder::new(self.alpha)?;
        if self.components.is_empty() {
            return Err(Error::InvalidParameter("system needs at least one component".into()));
        }
        if !(self.length > 0.0 && self.step > 0.0 && self.step <= self.length) {
            return Err(Error::InvalidGrid(format!(
                "need 0 < step <= length, got step {} length {}",
                self.step, self.length
            )));
        }
        let ratio = self.length / self.step;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return Err(Error::InvalidGrid("step must divide the interval length".into()));
        }
        if let Some(c) = &self.coupling {
            let n = self.components.len();
            if c.len() != n || c.iter().any(|r| r.len() != n || r.iter().any(|v| !v.is_finite())) {
                return Err(Error::InvalidParameter(format!("coupling must be a finite {n}x{n} matrix")));
            }
        }
        for c in &self.components {
            if let FreeTerm::Samples(v) = &c.free_term {
                if v.len() != self.nodes() {
                    return Err(Error::GridMismatch(format!(
                        "free term has {} samples, grid has {} nodes",
                        v.len(),
                        self.nodes()
                    )));
                }
            }
        }
        if self.eps == 0.0 {
            if self.alpha < 1.0 {
                return Err(Error::Domain(format!(
                    "eps = 0 needs an integrable bounded kernel (alpha >= 1), got alpha = {}",
                    self.alpha
                )));
            }
        } else {
            self.mollifier.validate()?;
            self.mollifier.scale.validate(self.eps)?;
        }
        self.check_guard()
    }

    fn free_term_values(&self, term: &FreeTerm) -> Result<Vec<f64>> {
        let n = self.nodes();
        match term {
            FreeTerm::Constant(c) => Ok(vec![*c; n]),
            FreeTerm::Samples(v) => Ok(v.clone()),
            FreeTerm::Singular(spec) => {
                if self.eps == 0.0 {
                    return Err(Error::Domain("singular free terms need eps > 0".into()));
                }
                (0..n).map(|j| spec.evaluate_1d(self.eps, j as f64 * self.step)).collect()
            }
        }
    }

    /// First and second antiderivatives `P`, `Q` of `R_ε` at the nodes `t = j h`.
    fn antiderivatives(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.nodes();
        let a = self.alpha;
        let h = self.step;
        if self.eps == 0.0 {
            let p = (0..n).map(|j| (j as f64 * h).powf(a) / a).collect();
            let q = (0..n).map(|j| (j as f64 * h).powf(a + 1.0) / (a * (a + 1.0))).collect();
            return Ok((p, q));
        }
        let scale = if a > 0.0 { gamma(a) } else { 1.0 };
        if a > -1.0 {
            let m = self.mollifier.realize(self.eps)?;
            let samples = MollifierSamples::new(&m, MOLLIFIER_CELLS, 0);
            let (gp, gq) = (scale / gamma(a + 1.0), scale / gamma(a + 2.0));
            let rows: Vec<(f64, f64)> = (0..n)
                .into_par_iter()
                .map(|j| {
                    let t = j as f64 * h;
                    Ok((
                        gp * samples.causal_power_integral(t, -a)?,
                        gq * samples.causal_power_integral(t, -a - 1.0)?,
                    ))
                })
                .collect::<Result<_>>()?;
            return Ok(rows.into_iter().unzip());
        }
        let grid = KernelGrid::new(self.length, self.step);
        let p = build_mollified_kernel(FracOrder::new(a + 1.0)?, &self.mollifier, self.eps, &grid)?;
        let q = build_mollified_kernel(FracOrder::new(a + 2.0)?, &self.mollifier, self.eps, &grid)?;
        Ok((p.on_coarse_grid(n)?, q.on_coarse_grid(n)?))
    }

    /// Exact weights of `∫_0^{x_j} K(y) R_ε(x_j - y) dy` for piecewise-linear `K`.
    pub fn march_weights(&self) -> Result<MarchWeights> {
        let (p, q) = self.antiderivatives()?;
        let h = self.step;
        let n = self.nodes();
        let mut interior = vec![0.0; n];
        for m in 1..n - 1 {
            interior[m] = (q[m + 1] - 2.0 * q[m] + q[m - 1]) / h;
        }
        let mut start = vec![0.0; n];
        for j in 1..n {
            start[j] = p[j] - (q[j] - q[j - 1]) / h;
        }
        let diag = if n > 1 { (q[1] - q[0]) / h - p[0] } else { 0.0 };
        if let Some(index) = interior.iter().chain(&start).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(MarchWeights { interior, start, diag })
    }

    fn kernels(&self) -> Result<Vec<RegularizedKernel>> {
        let eps = if self.eps == 0.0 { f64::NAN } else { self.eps };
        self.components
            .iter()
            .map(|c| match (&c.kernel, self.eps) {
                (KernelFunctionSpec::Nonlinear { .. }, e) if e == 0.0 => Err(Error::Domain(
                    "cut-off kernels need eps > 0".into(),
                )),
                (k, _) => k.realize(eps, self.override_guards),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSolution {
    step: f64,
    components: Vec<Vec<f64>>,
    iterations: usize,
    residual: f64,
}

impl VolterraSolution {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.components[0].len()).map(|j| j as f64 * self.step).collect()
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.components[i]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    /// Total node iterations.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Largest node defect at exit.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn sup_norm(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sup of the centered difference quotient over interior nodes.
    pub fn derivative_sup(&self) -> f64 {
        let h = self.step;
        self.components
            .iter()
            .flat_map(|c| c.windows(3).map(move |w| ((w[2] - w[0]) / (2.0 * h)).abs()))
            .fold(0.0, f64::max)
    }
}

fn mix(coupling: &Option<Vec<Vec<f64>>>, i: usize, f: &[f64]) -> f64 {
    match coupling {
        None => f[i],
        Some(c) => c[i].iter().zip(f).map(|(a, b)| a * b).sum(),
    }
}

/// Forward marching with product-integration weights; the diagonal term `diag K(f_j)`
/// is resolved by fixed-point iteration at each node.
pub fn solve_volterra(problem: &VolterraProblem) -> Result<VolterraSolution> {
    problem.validate()?;
    let n = problem.nodes();
    let m = problem.components.len();
    let h = problem.step;
    let g: Vec<Vec<f64>> = problem
        .components
        .iter()
        .map(|c| problem.free_term_values(&c.free_term))
        .collect::<Result<_>>()?;
    let kernels = problem.kernels()?;
    let w = if kernels.iter().all(|k| k.is_zero()) {
        MarchWeights::zero(n)
    } else {
        problem.march_weights()?
    };
    // Weighted history K(f_i) for every component.
    let mut kf = vec![vec![0.0; n]; m];
    let mut f = vec![vec![0.0; n]; m];
    let mut iterations = 0;
    let mut worst = 0.0f64;
    let mut current = vec![0.0; m];
    let mut base = vec![0.0; m];
    for j in 0..n {
        for c in 0..m {
            base[c] = g[c][j] + w.history(&kf[c], j);
            current[c] = if j > 0 { f[c][j - 1] } else { g[c][0] };
        }
        let diag = if j > 0 { w.diag } else { 0.0 };
        let mut converged = diag == 0.0;
        let mut defect = 0.0;
        if converged {
            current.copy_from_slice(&base);
        }
        let mut it = 0;
        while !converged {
            it += 1;
            let next: Vec<f64> = (0..m)
                .map(|c| base[c] + diag * kernels[c].value(mix(&problem.coupling, c, &current)))
                .collect();
            defect = next
                .iter()
                .zip(&current)
                .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
                .fold(0.0, f64::max);
            current = next;
            if !current.iter().all(|v| v.is_finite()) {
                return Err(Error::NonConvergent { node: j, residual: f64::INFINITY });
            }
            if defect <= NODE_TOLERANCE {
                converged = true;
            } else if it >= MAX_NODE_ITERATIONS {
                return Err(Error::NonConvergent { node: j, residual: defect });
            }
        }
        iterations += it;
        worst = worst.max(defect);
        for c in 0..m {
            f[c][j] = current[c];
        }
        for c in 0..m {
            kf[c][j] = kernels[c].value(mix(&problem.coupling, c, &current));
        }
    }
    Ok(VolterraSolution {
        step: h,
        components: f,
        iterations,
        residual: worst,
    })
}

/// `(ε, sup|f_ε|, sup|Df_ε|)` per ε.
pub fn volterra_sweep(problem: &VolterraProblem, schedule: &EpsSchedule) -> Result<Vec<(f64, f64, f64)>> {
    schedule.validate_for(&problem.mollifier.scale)?;
    let rows = crate::analysis::sweep(schedule, |e| {
        let s = solve_volterra(&problem.with_eps(e))?;
        Ok((s.sup_norm(), s.derivative_sup()))
    })?;
    Ok(rows.into_iter().map(|(e, (a, b))| (e, a, b)).collect())
}

/// The moderateness envelope `C₁ L(ε) exp(C₂ X L(ε)^{b+m})`.
pub fn moderateness_envelope(problem: &VolterraProblem) -> Envelope {
    growth_envelope(problem.mollifier.scale, problem.length, problem.cutoff_exponent() + problem.kernel_growth())
}

/// `C₁ L(ε) exp(C₂ X L(ε)^{power})`; `power = 1` is the borderline-moderate shape `C₁ L ε^{-C₂X}`.
/// With `power = 0` the exponential is a constant and the envelope is `C₁ L(ε)`.
pub fn growth_envelope(scale: ScaleLaw, length: f64, power: f64) -> Envelope {
    if power == 0.0 {
        return Envelope::new("C1*L", move |e| scale.scale(e).unwrap_or(f64::NAN));
    }
    Envelope::gronwall(
        format!("C1*L*exp(C2*X*L^{power})"),
        move |e| scale.scale(e).unwrap_or(f64::NAN),
        move |e| length * scale.scale(e).map(|l| l.powf(power)).unwrap_or(f64::NAN),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum Perturbation {
    Identical,
    /// Second solve with a different mollifier.
    TwoMollifiers(MollifierSpec),
    /// Free term shifted by `ε^power` times a bump on the interval.
    NegligibleShift { power: f64 },
}

/// `(ε, sup|f_{1ε} - f_{2ε}|)` per ε.
///
/// Shifted problems solve the difference equation
/// `F = d + ∫ w F R`, `w = ∫_0^1 K'(f + θF) dθ`, so tiny differences are not lost to cancellation.
pub fn uniqueness_probe(
    problem: &VolterraProblem,
    perturbation: &Perturbation,
    schedule: &EpsSchedule,
) -> Result<Vec<(f64, f64)>> {
    schedule.validate_for(&problem.mollifier.scale)?;
    crate::analysis::sweep(schedule, |e| {
        let p = problem.with_eps(e);
        match perturbation {
            Perturbation::Identical => {
                let a = solve_volterra(&p)?;
                let b = solve_volterra(&p)?;
                Ok(sup_difference(&a, &b))
            }
            Perturbation::TwoMollifiers(other) => {
                let a = solve_volterra(&p)?;
                let q = VolterraProblem {
                    mollifier: *other,
                    ..p.clone()
                };
                let b = solve_volterra(&q)?;
                Ok(sup_difference(&a, &b))
            }
            Perturbation::NegligibleShift { power } => {
                let base = solve_volterra(&p)?;
                let x = p.length;
                let d: Vec<f64> = base
                    .nodes()
                    .iter()
                    .map(|&t| e.powf(*power) * shift_bump(t, 0.5 * x, 0.5 * x))
                    .collect();
                let diff = solve_difference(&p, &base, &d)?;
                Ok(diff.iter().flatten().fold(0.0, |m, v: &f64| m.max(v.abs())))
            }
        }
    })
}

fn sup_difference(a: &VolterraSolution, b: &VolterraSolution) -> f64 {
    a.components
        .iter()
        .zip(&b.components)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}

/// Difference `F` between the solution with free term `g + d` (every component) and `base`.
fn solve_difference(problem: &VolterraProblem, base: &VolterraSolution, d: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = problem.nodes();
    let m = problem.components.len();
    let kernels = problem.kernels()?;
    let w = if kernels.iter().all(|k| k.is_zero()) {
        MarchWeights::zero(n)
    } else {
        problem.march_weights()?
    };
    let (gx, gw) = gauss_legendre(4);
    // K(a + z) - K(a) = z ∫_0^1 K'(a + θz) dθ
    let increment = |k: &RegularizedKernel, a: f64, z: f64| -> f64 {
        let w: f64 = gx
            .iter()
            .zip(&gw)
            .map(|(x, wt)| 0.5 * wt * k.derivative(a + 0.5 * (x + 1.0) * z))
            .sum();
        w * z
    };
    let mut dk = vec![vec![0.0; n]; m];
    let mut out = vec![vec![0.0; n]; m];
    let mut current = vec![0.0; m];
    let mut base_val = vec![0.0; m];
    for j in 0..n {
        let f_j: Vec<f64> = (0..m).map(|c| base.components[c][j]).collect();
        for c in 0..m {
            base_val[c] = d[j] + w.history(&dk[c], j);
            current[c] = base_val[c];
        }
        let diag = if j > 0 { w.diag } else { 0.0 };
        if diag != 0.0 {
            let mut it = 0;
            loop {
                it += 1;
                let next: Vec<f64> = (0..m)
                    .map(|c| {
                        let a = mix(&problem.coupling, c, &f_j);
                        base_val[c] + diag * increment(&kernels[c], a, mix(&problem.coupling, c, &current))
                    })
                    .collect();
                let scale = next.iter().fold(f64::MIN_POSITIVE, |a, v| a.max(v.abs()));
                let defect = next
                    .iter()
                    .zip(&current)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
                    / scale;
                current = next;
                if defect <= NODE_TOLERANCE {
                    break;
                }
                if it >= MAX_NODE_ITERATIONS || !defect.is_finite() {
                    return Err(Error::NonConvergent { node: j, residual: defect });
                }
            }
        }
        for c in 0..m {
            out[c][j] = current[c];
            let a = mix(&problem.coupling, c, &f_j);
            dk[c][j] = increment(&kernels[c], a, mix(&problem.coupling, c, &current));
        }
    }
    Ok(out)
}

/// Observed order `log2(‖f_h - f_{h/2}‖ / ‖f_{h/2} - f_{h/4}‖)` on the first component.
pub fn refinement_rate(problem: &VolterraProblem) -> Result<f64> {
    let solve = |k: usize| {
        let p = VolterraProblem {
            step: problem.step / (1 << k) as f64,
            ..problem.clone()
        };
        solve_volterra(&p)
    };
    let s: Vec<VolterraSolution> = (0..3).into_par_iter().map(solve).collect::<Result<_>>()?;
    let at = |a: &VolterraSolution, b: &VolterraSolution| {
        let stride = (b.component(0).len() - 1) / (a.component(0).len() - 1);
        a.component(0)
            .iter()
            .enumerate()
            .map(|(j, v)| (v - b.component(0)[j * stride]).abs())
            .fold(0.0, f64::max)
    };
    Ok((at(&s[0], &s[1]) / at(&s[1], &s[2])).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{classify_family, envelope_check, Verdict};
    use crate::regularize::{NonlinearityModel, NonlinearitySpec};

    fn linear(alpha: f64, lambda: f64, eps: f64) -> VolterraProblem {
        VolterraProblem::scalar(alpha, KernelFunctionSpec::Linear { coefficient: lambda }, FreeTerm::Constant(1.0), 1.0, 1e-3, eps)
    }

    fn mittag_leffler_half(lambda: f64, x: f64) -> f64 {
        let z = lambda * std::f64::consts::PI.sqrt() * x.sqrt();
        (0..60).map(|k| z.powi(k) / gamma(k as f64 / 2.0 + 1.0)).sum()
    }

    #[test]
    fn zero_kernel_returns_free_term() {
        let g: Vec<f64> = (0..=1000).map(|j| (j as f64 * 1e-3).sin()).collect();
        let p = VolterraProblem::scalar(0.5, KernelFunctionSpec::Zero, FreeTerm::Samples(g.clone()), 1.0, 1e-3, 1e-3);
        assert_eq!(solve_volterra(&p).unwrap().component(0), &g[..]);
    }

    #[test]
    fn exponential_case() {
        let s = solve_volterra(&linear(1.0, 1.0, 0.0)).unwrap();
        let err = s
            .nodes()
            .iter()
            .zip(s.component(0))
            .map(|(x, f)| (f - x.exp()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-4, "{err}");
        assert!(refinement_rate(&linear(1.0, 1.0, 0.0)).unwrap() >= 0.9);
    }

    #[test]
    fn abel_case_approaches_series() {
        let mut p = linear(0.5, 1.0, 1e-8);
        p.mollifier = p.mollifier.with_scale(ScaleLaw::Power { gamma: 0.5 });
        let s = solve_volterra(&p).unwrap();
        let err = s
            .nodes()
            .iter()
            .zip(s.component(0))
            .map(|(x, f)| (f - mittag_leffler_half(1.0, *x)).abs() / mittag_leffler_half(1.0, 1.0))
            .fold(0.0, f64::max);
        assert!(err < 5e-2, "{err}");
    }

    #[test]
    fn weights_integrate_linear_data_exactly() {
        // ∫_0^x y (x-y)^{1/2} dy = x^{5/2} Γ(2)Γ(3/2)/Γ(7/2)
        let p = linear(1.5, 1.0, 0.0);
        let w = p.march_weights().unwrap();
        let ys: Vec<f64> = (0..p.nodes()).map(|j| j as f64 * p.step).collect();
        for j in [1, 2, 17, 1000] {
            let v = w.history(&ys, j) + w.diag * ys[j];
            let exact = ys[j].powf(2.5) * gamma(1.5) / gamma(3.5);
            assert!((v - exact).abs() < 1e-12, "{j}: {v} vs {exact}");
        }
    }

    #[test]
    fn decoupled_system_matches_scalar_solves() {
        let a = linear(1.0, 1.0, 1e-3);
        let b = linear(1.0, -0.5, 1e-3);
        let mut sys = a.clone();
        sys.components.push(b.components[0].clone());
        sys.coupling = Some(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let s = solve_volterra(&sys).unwrap();
        assert_eq!(s.component(0), solve_volterra(&a).unwrap().component(0));
        assert_eq!(s.component(1), solve_volterra(&b).unwrap().component(0));
    }

    #[test]
    fn guards_and_domain() {
        let spec = NonlinearitySpec::new(NonlinearityModel::SignedSquare, 1.2, ScaleLaw::Log);
        let k = KernelFunctionSpec::Nonlinear { coefficient: 1.0, nonlinearity: spec };
        let mut p = VolterraProblem::scalar(1.0, k, FreeTerm::Constant(1.0), 1.0, 1e-2, 1e-3);
        assert!(matches!(solve_volterra(&p), Err(Error::GuardViolation(_))));
        p.override_guards = true;
        assert!(solve_volterra(&p).is_ok());
        assert!(matches!(solve_volterra(&linear(0.5, 1.0, 0.0)), Err(Error::Domain(_))));
        let neg = VolterraProblem::scalar(
            -0.5,
            KernelFunctionSpec::Nonlinear {
                coefficient: 1.0,
                nonlinearity: NonlinearitySpec::new(NonlinearityModel::SqrtAbs, 0.6, ScaleLaw::Log),
            },
            FreeTerm::Constant(1.0),
            1.0,
            1e-2,
            1e-3,
        );
        assert!(matches!(solve_volterra(&neg), Err(Error::GuardViolation(_))));
    }

    #[test]
    fn deterministic() {
        let p = linear(0.5, 1.0, 1e-4);
        assert_eq!(solve_volterra(&p).unwrap(), solve_volterra(&p).unwrap());
    }

    #[test]
    fn probes() {
        let sched = EpsSchedule::decades(2, 8).unwrap();
        let p = linear(0.5, 1.0, 1e-3);
        let same = uniqueness_probe(&p, &Perturbation::Identical, &sched).unwrap();
        assert!(same.iter().all(|(_, v)| *v == 0.0));
        let spec = NonlinearitySpec::new(NonlinearityModel::PowerLaw { gamma: 0.5 }, 0.3, ScaleLaw::Log);
        let q = VolterraProblem::scalar(
            0.5,
            KernelFunctionSpec::Nonlinear { coefficient: 1.0, nonlinearity: spec },
            FreeTerm::Constant(1.0),
            1.0,
            1e-3,
            1e-3,
        );
        let shifted = uniqueness_probe(&q, &Perturbation::NegligibleShift { power: 2.0 }, &sched).unwrap();
        let v = envelope_check(&shifted, &Envelope::eps_power(1.5), 2).unwrap();
        assert!(v.passed, "{v:?}");
        let c = classify_family(&[shifted]).unwrap();
        assert_eq!(c.verdict, Verdict::Negligible { exact: false });
    }
}
