//! Mild solutions of the regularized parabolic and Schrödinger problems by a
//! Duhamel march in Fourier space with the time-mollified propagators.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::analysis::{EpsSchedule, Envelope};
use crate::error::{Error, Result};
use crate::grid::{time_derivative_seminorm, Field, GridSpec};
use crate::kernels::TimeMollification;
use crate::mollifier::{MollifierSpec, Profile};
use crate::regularize::{
    regularize_data, regularize_nonlinearity, regularize_nonlinearity_unguarded, shift_bump, NonlinearitySpec,
    RegularizedNonlinearity, SingularDataSpec,
};
use crate::special::gauss_legendre;
use crate::spectral;

/// Sup-norm level treated as blow-up.
pub const OVERFLOW_GUARD: f64 = 1e12;
const TIME_CELLS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// `u_t = Δu + g(u)`.
    ParabolicPlain,
    /// `u_t = Δu - ∇·(g(u), …, g(u))`.
    ParabolicConservative,
    /// `u_t = Δu - V u - g(u)`.
    ParabolicPotential,
    /// `u_t = i Δu - i V u`.
    SchrodingerLinear,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Singular(SingularDataSpec),
    Smooth(Field),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionProblem {
    pub variant: Variant,
    pub grid: GridSpec,
    pub horizon: f64,
    pub dt: f64,
    pub initial: InitialData,
    pub nonlinearity: Option<NonlinearitySpec>,
    pub potential: Option<SingularDataSpec>,
    /// Mollifier of the propagator in time.
    pub time_mollifier: MollifierSpec,
    /// Mollify the propagator in time (data and potential are always mollified at `eps > 0`).
    pub mollify_propagator: bool,
    pub eps: f64,
    pub override_guards: bool,
}

impl EvolutionProblem {
    pub fn new(variant: Variant, grid: GridSpec, horizon: f64, dt: f64, initial: InitialData, eps: f64) -> Self {
        Self {
            variant,
            grid,
            horizon,
            dt,
            initial,
            nonlinearity: None,
            potential: None,
            time_mollifier: MollifierSpec::bump(1),
            mollify_propagator: true,
            eps,
            override_guards: false,
        }
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Self { eps, ..self.clone() }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    /// Exponent `c` of the potential mollifier (`V_ε = L^{cn} φ(xL)`).
    pub fn potential_exponent(&self) -> f64 {
        self.potential.as_ref().map_or(0.0, |v| v.mollifier.amplitude)
    }

    pub fn cutoff_exponent(&self) -> f64 {
        self.nonlinearity.as_ref().map_or(0.0, |g| match g.model {
            crate::regularize::NonlinearityModel::Linear { .. } => 0.0,
            _ => g.cutoff_exponent,
        })
    }

    pub fn check_guard(&self) -> Result<()> {
        if self.override_guards {
            return Ok(());
        }
        let b = self.cutoff_exponent();
        let n = self.grid.dim() as f64;
        let c = self.potential_exponent();
        if self.variant != Variant::SchrodingerLinear && b >= 1.0 {
            return Err(Error::GuardViolation(format!("requires b < 1, got b = {b}")));
        }
        if self.variant == Variant::ParabolicPotential && self.potential.is_some() && c * n >= 1.0 {
            return Err(Error::GuardViolation(format!("requires c*n < 1 for the potential, got c*n = {}", c * n)));
        }
        if self.variant == Variant::SchrodingerLinear && c >= 1.0 + 1.0 / n {
            return Err(Error::GuardViolation(format!(
                "requires c < 1 + 1/n for the potential, got c = {c}, n = {n}"
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.grid.dim();
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid("evolution grids are 1-D or 2-D".into()));
        }
        if !(self.dt > 0.0 && self.horizon > 0.0 && self.dt <= self.horizon) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < dt <= horizon, got dt {} horizon {}",
                self.dt, self.horizon
            )));
        }
        let ratio = self.horizon / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio || self.steps() < 2 {
            return Err(Error::InvalidParameter("dt must divide the horizon into at least 2 steps".into()));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps = {}", self.eps)));
        }
        if let InitialData::Smooth(f) = &self.initial {
            if f.grid() != &self.grid {
                return Err(Error::GridMismatch("initial data lives on another grid".into()));
            }
        }
        let singular = matches!(self.initial, InitialData::Singular(_)) || self.potential.is_some();
        if self.eps == 0.0 && singular {
            return Err(Error::Domain("singular data need eps > 0".into()));
        }
        if self.eps == 0.0 && self.cutoff_exponent() > 0.0 {
            return Err(Error::Domain("cut-off nonlinearities need eps > 0".into()));
        }
        if self.potential.is_some()
            && !matches!(self.variant, Variant::ParabolicPotential | Variant::SchrodingerLinear)
        {
            return Err(Error::InvalidParameter(format!("{:?} takes no potential", self.variant)));
        }
        if self.nonlinearity.is_some() && self.variant == Variant::SchrodingerLinear {
            return Err(Error::InvalidParameter("the Schrödinger problem is linear".into()));
        }
        if self.eps > 0.0 && self.mollify_propagator {
            self.time_mollifier.validate()?;
            if self.time_mollifier.dim != 1 {
                return Err(Error::InvalidParameter("time mollifiers are one-dimensional".into()));
            }
            self.time_mollifier.scale.validate(self.eps)?;
        }
        self.check_guard()
    }

    fn initial_field(&self) -> Result<Field> {
        match &self.initial {
            InitialData::Smooth(f) => Ok(f.clone()),
            InitialData::Singular(spec) => regularize_data(spec, self.eps, &self.grid),
        }
    }

    fn potential_field(&self) -> Result<Option<Vec<f64>>> {
        self.potential
            .as_ref()
            .map(|v| {
                let f = regularize_data(v, self.eps, &self.grid)?;
                Ok(f.as_real().map(|r| r.to_vec()).unwrap_or_else(|| f.moduli()))
            })
            .transpose()
    }

    fn nonlinearity(&self) -> Result<Option<RegularizedNonlinearity>> {
        let Some(spec) = &self.nonlinearity else {
            return Ok(None);
        };
        let eps = if self.eps == 0.0 { f64::NAN } else { self.eps };
        let g = if self.override_guards {
            regularize_nonlinearity_unguarded(spec, eps)?
        } else {
            regularize_nonlinearity(spec, eps)?
        };
        Ok(Some(g))
    }

    fn is_schrodinger(&self) -> bool {
        self.variant == Variant::SchrodingerLinear
    }
}

/// Per-mode propagator tables for one problem.
struct Propagator {
    /// `m_ξ(t_k)`, `k = 0..=K`, mode-major.
    table: Vec<Vec<Complex64>>,
    /// `e^{-λ_ξ Δt}`.
    step: Vec<Complex64>,
    /// Steps after which the propagator is a semigroup in `t`.
    window: usize,
}

impl Propagator {
    fn new(p: &EvolutionProblem) -> Result<Self> {
        let q = spectral::squared_wavenumbers(&p.grid);
        let k = p.steps();
        let lambda = |q: f64| {
            if p.is_schrodinger() {
                Complex64::new(0.0, q)
            } else {
                Complex64::new(q, 0.0)
            }
        };
        let step: Vec<Complex64> = q.iter().map(|&v| (-lambda(v) * p.dt).exp()).collect();
        if p.eps == 0.0 || !p.mollify_propagator {
            let table = q
                .iter()
                .map(|&v| (0..=k).map(|j| (-lambda(v) * (j as f64 * p.dt)).exp()).collect())
                .collect();
            return Ok(Self { table, step, window: 1 });
        }
        let m = p.time_mollifier.realize(p.eps)?;
        let tm = TimeMollification::for_step(&m, p.dt, TIME_CELLS);
        let window = ((m.support_radius() / p.dt).ceil() as usize + 1).max(1);
        let table = q
            .iter()
            .map(|&v| tm.factors_on_grid(lambda(v), p.dt, k + 1))
            .collect::<Result<_>>()?;
        Ok(Self { table, step, window })
    }
}

/// Spectral forcing `F̂(u_k)` for the Duhamel sum; `None` when it vanishes.
type Forcing<'a> = dyn FnMut(usize, &[Complex64]) -> Result<Option<Vec<Complex64>>> + 'a;

/// `û_k = m(t_k) û_0 + Δt Σ_{ℓ<k} m(t_k - t_ℓ) F̂_ℓ`, split into a window of recent
/// terms and a semigroup-propagated accumulator for the rest.
fn march(
    p: &EvolutionProblem,
    prop: &Propagator,
    u0: &[Complex64],
    forcing: &mut Forcing<'_>,
) -> Result<(Vec<Vec<Complex64>>, Vec<f64>)> {
    let grid = &p.grid;
    let n = grid.len();
    let k_max = p.steps();
    let w = prop.window;
    let mut u0_hat = u0.to_vec();
    spectral::forward(grid, &mut u0_hat);
    let mut history: Vec<Vec<Complex64>> = vec![u0.to_vec()];
    let mut residuals = Vec::with_capacity(k_max);
    let mut forces: Vec<Option<Vec<Complex64>>> = Vec::with_capacity(k_max);
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    let mut previous_force: Option<Vec<Complex64>> = None;
    for k in 0..k_max {
        // forcing from the state at t_k
        let f = forcing(k, &history[k])?.map(|mut v| {
            for z in v.iter_mut() {
                *z *= p.dt;
            }
            v
        });
        // local defect of the left-point rule
        let defect = match (&previous_force, &f) {
            (Some(a), Some(b)) => {
                let mut d: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
                spectral::inverse(grid, &mut d);
                0.5 * d.iter().fold(0.0f64, |m, z| m.max(z.norm()))
            }
            _ => 0.0,
        };
        if k > 0 {
            residuals.push(defect);
        }
        previous_force = f.clone();
        forces.push(f);
        let next = k + 1;
        // accumulator holds ℓ ≤ next - w
        if next >= w {
            let l = next - w;
            for i in 0..n {
                acc[i] *= prop.step[i];
            }
            if let Some(fl) = &forces[l] {
                for i in 0..n {
                    acc[i] += prop.table[i][w] * fl[i];
                }
            }
            if l >= 1 {
                forces[l - 1] = None;
            }
        }
        let mut u_hat: Vec<Complex64> = (0..n).map(|i| prop.table[i][next] * u0_hat[i] + acc[i]).collect();
        for l in next.saturating_sub(w - 1)..next {
            if let Some(fl) = &forces[l] {
                let lag = next - l;
                for i in 0..n {
                    u_hat[i] += prop.table[i][lag] * fl[i];
                }
            }
        }
        spectral::inverse(grid, &mut u_hat);
        let sup = u_hat.iter().fold(0.0, |m: f64, z| m.max(z.norm()));
        if !(sup <= OVERFLOW_GUARD) {
            return Err(Error::BlowUp { step: next, norm: sup });
        }
        history.push(u_hat);
    }
    residuals.push(0.0);
    Ok((history, residuals))
}

#[derive(Debug)]
pub struct EvolutionSolution {
    history: Vec<(f64, Field)>,
    residuals: Vec<f64>,
    norms: Mutex<BTreeMap<u64, Arc<Vec<f64>>>>,
}

impl EvolutionSolution {
    fn new(p: &EvolutionProblem, raw: Vec<Vec<Complex64>>, residuals: Vec<f64>, complex: bool) -> Result<Self> {
        let history = raw
            .into_iter()
            .enumerate()
            .map(|(k, v)| {
                let f = if complex {
                    Field::complex(p.grid.clone(), v)?
                } else {
                    Field::real(p.grid.clone(), v.iter().map(|z| z.re).collect())?
                };
                Ok((k as f64 * p.dt, f))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            history,
            residuals,
            norms: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn history(&self) -> &[(f64, Field)] {
        &self.history
    }

    pub fn times(&self) -> Vec<f64> {
        self.history.iter().map(|(t, _)| *t).collect()
    }

    pub fn last(&self) -> &Field {
        &self.history[self.history.len() - 1].1
    }

    /// Local defect of the left-point Duhamel rule, one per step.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// `‖u(t_k)‖_p` for every stored time, computed once per `p`.
    pub fn norm_series(&self, p: f64) -> Result<Arc<Vec<f64>>> {
        let key = p.to_bits();
        if let Some(v) = self.norms.lock().map_err(|_| Error::InvalidParameter("norm cache poisoned".into()))?.get(&key) {
            return Ok(v.clone());
        }
        let series: Vec<f64> = self.history.iter().map(|(_, f)| f.lp_norm(p)).collect::<Result<_>>()?;
        let series = Arc::new(series);
        self.norms
            .lock()
            .map_err(|_| Error::InvalidParameter("norm cache poisoned".into()))?
            .entry(key)
            .or_insert_with(|| series.clone());
        Ok(series)
    }

    pub fn sup_norm(&self, p: f64) -> Result<f64> {
        Ok(self.norm_series(p)?.iter().fold(0.0, |m, v| m.max(*v)))
    }

    /// `sup_{t ∈ [T/4, T)} ‖∂_t u‖_p` from central differences.
    pub fn c1_seminorm(&self, p: f64) -> Result<f64> {
        let horizon = self.history[self.history.len() - 1].0;
        time_derivative_seminorm(&self.history, horizon / 4.0, p)
    }
}

fn nonlinear_field(g: &RegularizedNonlinearity, u: &[Complex64]) -> Vec<Complex64> {
    u.iter().map(|z| Complex64::new(g.value(z.re), 0.0)).collect()
}

fn transformed(grid: &GridSpec, mut v: Vec<Complex64>) -> Vec<Complex64> {
    spectral::forward(grid, &mut v);
    v
}

pub fn solve_evolution(problem: &EvolutionProblem) -> Result<EvolutionSolution> {
    problem.validate()?;
    let grid = problem.grid.clone();
    let u0 = problem.initial_field()?;
    let potential = problem.potential_field()?;
    let g = problem.nonlinearity()?;
    let prop = Propagator::new(problem)?;
    let div = spectral::divergence_symbol(&grid);
    let variant = problem.variant;
    let mut forcing = |_: usize, u: &[Complex64]| -> Result<Option<Vec<Complex64>>> {
        let mut out: Option<Vec<Complex64>> = None;
        let mut add = |v: Vec<Complex64>| match &mut out {
            None => out = Some(v),
            Some(o) => o.iter_mut().zip(v).for_each(|(a, b)| *a += b),
        };
        match variant {
            Variant::ParabolicPlain => {
                if let Some(g) = &g {
                    add(transformed(&grid, nonlinear_field(g, u)));
                }
            }
            Variant::ParabolicConservative => {
                if let Some(g) = &g {
                    let mut v = transformed(&grid, nonlinear_field(g, u));
                    v.iter_mut().zip(&div).for_each(|(a, d)| *a *= -d);
                    add(v);
                }
            }
            Variant::ParabolicPotential => {
                if let Some(g) = &g {
                    add(transformed(&grid, nonlinear_field(g, u).into_iter().map(|z| -z).collect()));
                }
                if let Some(v) = &potential {
                    add(transformed(&grid, u.iter().zip(v).map(|(z, w)| -z * w).collect()));
                }
            }
            Variant::SchrodingerLinear => {
                if let Some(v) = &potential {
                    let mi = Complex64::new(0.0, -1.0);
                    add(transformed(&grid, u.iter().zip(v).map(|(z, w)| mi * w * z).collect()));
                }
            }
        }
        Ok(out)
    };
    let (raw, residuals) = march(problem, &prop, &u0.to_complex_vec(), &mut forcing)?;
    let complex = problem.is_schrodinger() || u0.is_complex();
    EvolutionSolution::new(problem, raw, residuals, complex)
}

/// One row of a moderateness sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    /// `sup_t ‖u_ε(t)‖_p`.
    pub sup_norm: f64,
    /// `sup_{t ≥ T/4} ‖∂_t u_ε(t)‖_p`.
    pub c1_seminorm: f64,
}

pub fn moderateness_sweep(problem: &EvolutionProblem, schedule: &EpsSchedule, p: f64) -> Result<Vec<SweepRow>> {
    let rows = crate::analysis::sweep(schedule, |e| {
        let s = solve_evolution(&problem.with_eps(e))?;
        Ok(SweepRow {
            eps: e,
            sup_norm: s.sup_norm(p)?,
            c1_seminorm: s.c1_seminorm(p)?,
        })
    })?;
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

/// Gronwall envelope of the problem's moderateness estimate:
/// `C₁ L^{n(a-1/p)} exp(C₂ T (L^b + L^{cn}))` for the parabolic variants and
/// `C₁ L^{n(a-1/p)} exp(C₂ T L^{n(c-1)})` for Schrödinger.
pub fn moderateness_envelope(problem: &EvolutionProblem, p: f64) -> Envelope {
    let n = problem.grid.dim() as f64;
    let (scale, a) = match &problem.initial {
        InitialData::Singular(s) => (s.mollifier.scale, s.mollifier.amplitude),
        InitialData::Smooth(_) => (problem.time_mollifier.scale, 1.0 / p.max(1.0)),
    };
    let pre = n * (a - 1.0 / p);
    let b = problem.cutoff_exponent();
    let c = problem.potential_exponent();
    let horizon = problem.horizon;
    let has_potential = problem.potential.is_some();
    let variant = problem.variant;
    let growth = move |l: f64| match variant {
        Variant::SchrodingerLinear => {
            if has_potential {
                l.powf(n * (c - 1.0))
            } else {
                0.0
            }
        }
        _ => {
            let mut s = if b > 0.0 { l.powf(b) } else { 0.0 };
            if has_potential {
                s += l.powf(c * n);
            }
            s
        }
    };
    let grows = match variant {
        Variant::SchrodingerLinear => has_potential,
        _ => b > 0.0 || has_potential,
    };
    if !grows {
        return Envelope::new(format!("C1*L^{pre}"), move |e| {
            scale.scale(e).map(|l| l.powf(pre)).unwrap_or(f64::NAN)
        });
    }
    Envelope::gronwall(
        format!("C1*L^{pre}*exp(C2*T*growth)"),
        move |e| scale.scale(e).map(|l| l.powf(pre)).unwrap_or(f64::NAN),
        move |e| horizon * scale.scale(e).map(growth).unwrap_or(f64::NAN),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum Perturbation {
    Identical,
    /// Second solve with the profile of every mollifier replaced.
    TwoMollifiers(Profile),
    /// Initial data shifted by `ε^power` times a bump at the grid centre.
    NegligibleShift { power: f64 },
}

/// `(ε, sup_t ‖W_ε(t)‖_q)` per ε.
///
/// Shifted problems march the difference equation
/// `W = E_ε * N_0 + ∫ E_ε * (w W)`, `w = ∫_0^1 F'(u + θW) dθ`, directly.
pub fn uniqueness_probe_evolution(
    problem: &EvolutionProblem,
    perturbation: &Perturbation,
    schedule: &EpsSchedule,
    q: f64,
) -> Result<Vec<(f64, f64)>> {
    crate::analysis::sweep(schedule, |e| {
        let p = problem.with_eps(e);
        match perturbation {
            Perturbation::Identical => {
                let a = solve_evolution(&p)?;
                let b = solve_evolution(&p)?;
                sup_difference(&a, &b, q)
            }
            Perturbation::TwoMollifiers(profile) => {
                let a = solve_evolution(&p)?;
                let mut other = p.clone();
                other.time_mollifier = other.time_mollifier.with_profile(*profile);
                if let InitialData::Singular(s) = &mut other.initial {
                    s.mollifier = s.mollifier.with_profile(*profile);
                }
                if let Some(v) = &mut other.potential {
                    v.mollifier = v.mollifier.with_profile(*profile);
                }
                let b = solve_evolution(&other)?;
                sup_difference(&a, &b, q)
            }
            Perturbation::NegligibleShift { power } => {
                let base = solve_evolution(&p)?;
                let w = solve_difference(&p, &base, e.powf(*power))?;
                w.iter().map(|f| f.lp_norm(q)).try_fold(0.0, |m: f64, v| v.map(|v| m.max(v)))
            }
        }
    })
    .map(|rows| rows.into_iter().collect())
}

fn sup_difference(a: &EvolutionSolution, b: &EvolutionSolution, q: f64) -> Result<f64> {
    a.history
        .iter()
        .zip(&b.history)
        .map(|((_, x), (_, y))| x.sub(y)?.lp_norm(q))
        .try_fold(0.0, |m: f64, v| v.map(|v| m.max(v)))
}

/// Bump of height `size` at the grid centre, radius a quarter of the smallest extent.
fn shift_field(grid: &GridSpec, size: f64) -> Result<Field> {
    let centre: Vec<f64> = (0..grid.dim()).map(|a| 0.5 * (grid.lo(a) + grid.hi(a))).collect();
    let radius = (0..grid.dim()).map(|a| grid.extent(a)).fold(f64::INFINITY, f64::min) / 4.0;
    Field::from_fn(grid.clone(), |x| {
        let r2: f64 = x.iter().zip(&centre).map(|(a, c)| (a - c) * (a - c)).sum();
        size * shift_bump(r2.sqrt(), 0.0, radius)
    })
}

fn solve_difference(p: &EvolutionProblem, base: &EvolutionSolution, size: f64) -> Result<Vec<Field>> {
    let grid = p.grid.clone();
    let n0 = shift_field(&grid, size)?;
    let potential = p.potential_field()?;
    let g = p.nonlinearity()?;
    let prop = Propagator::new(p)?;
    let div = spectral::divergence_symbol(&grid);
    let (gx, gw) = gauss_legendre(4);
    let states: Vec<Vec<Complex64>> = base.history.iter().map(|(_, f)| f.to_complex_vec()).collect();
    let variant = p.variant;
    // g(u + W) - g(u) = W ∫_0^1 g'(u + θW) dθ
    let increment = |g: &RegularizedNonlinearity, u: &[Complex64], w: &[Complex64]| -> Vec<Complex64> {
        u.iter()
            .zip(w)
            .map(|(a, z)| {
                let mean: f64 = gx
                    .iter()
                    .zip(&gw)
                    .map(|(x, wt)| 0.5 * wt * g.derivative(a.re + 0.5 * (x + 1.0) * z.re))
                    .sum();
                Complex64::new(mean * z.re, 0.0)
            })
            .collect()
    };
    let mut forcing = |k: usize, w: &[Complex64]| -> Result<Option<Vec<Complex64>>> {
        let u = &states[k];
        let mut out: Option<Vec<Complex64>> = None;
        let mut add = |v: Vec<Complex64>| match &mut out {
            None => out = Some(v),
            Some(o) => o.iter_mut().zip(v).for_each(|(a, b)| *a += b),
        };
        match variant {
            Variant::ParabolicPlain => {
                if let Some(g) = &g {
                    add(transformed(&grid, increment(g, u, w)));
                }
            }
            Variant::ParabolicConservative => {
                if let Some(g) = &g {
                    let mut v = transformed(&grid, increment(g, u, w));
                    v.iter_mut().zip(&div).for_each(|(a, d)| *a *= -d);
                    add(v);
                }
            }
            Variant::ParabolicPotential => {
                if let Some(g) = &g {
                    add(transformed(&grid, increment(g, u, w).into_iter().map(|z| -z).collect()));
                }
                if let Some(v) = &potential {
                    add(transformed(&grid, w.iter().zip(v).map(|(z, c)| -z * c).collect()));
                }
            }
            Variant::SchrodingerLinear => {
                if let Some(v) = &potential {
                    let mi = Complex64::new(0.0, -1.0);
                    add(transformed(&grid, w.iter().zip(v).map(|(z, c)| mi * c * z).collect()));
                }
            }
        }
        Ok(out)
    };
    let (raw, _) = march(p, &prop, &n0.to_complex_vec(), &mut forcing)?;
    let complex = p.is_schrodinger();
    raw.into_iter()
        .map(|v| {
            if complex {
                Field::complex(grid.clone(), v)
            } else {
                Field::real(grid.clone(), v.iter().map(|z| z.re).collect())
            }
        })
        .collect()
}
