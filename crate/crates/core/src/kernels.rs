//! Heat and Schrödinger kernels, their time-mollified versions
//! `K_ε(t) = ∫_{τ<t} K(t-τ) φ_ε(τ) dτ`, spectral application and norm bounds.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::analysis::EpsSchedule;
use crate::error::{Error, Result};
use crate::fracint::MollifierSamples;
use crate::grid::{Field, GridSpec};
use crate::mollifier::{Mollifier, MollifierSpec};
use crate::special::{gauss_legendre, heat_norm_constant, hermite};
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagatorFamily {
    /// `∂^β E_n`.
    Heat,
    /// `∂_0 ∂^β E_n`.
    HeatGradient,
    /// `∂^β S_n`.
    Schrodinger,
}

/// A heat or Schrödinger kernel, optionally mollified in time (`eps = 0`: unmollified).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorSpec {
    pub family: PropagatorFamily,
    pub dim: usize,
    /// Derivative order along axis 0.
    pub beta: u32,
    pub mollifier: MollifierSpec,
    pub eps: f64,
}

impl PropagatorSpec {
    pub fn new(family: PropagatorFamily, dim: usize, beta: u32, mollifier: MollifierSpec, eps: f64) -> Result<Self> {
        let s = Self {
            family,
            dim,
            beta,
            mollifier,
            eps,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn unmollified(family: PropagatorFamily, dim: usize, beta: u32) -> Self {
        Self {
            family,
            dim,
            beta,
            mollifier: MollifierSpec::bump(1),
            eps: 0.0,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("propagator dimension must be >= 1".into()));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps = {}", self.eps)));
        }
        if self.mollifier.dim != 1 {
            return Err(Error::InvalidParameter("time mollifiers are one-dimensional".into()));
        }
        self.mollifier.validate()?;
        if self.eps > 0.0 {
            self.mollifier.scale.validate(self.eps)?;
        }
        Ok(())
    }

    /// Spatial derivative count along axis 0, including the gradient.
    fn derivative_order(&self) -> u32 {
        match self.family {
            PropagatorFamily::HeatGradient => self.beta + 1,
            _ => self.beta,
        }
    }

    /// Power `γ` in `‖K(s)‖ = C s^{-γ}`.
    pub fn time_exponent(&self) -> f64 {
        match self.family {
            PropagatorFamily::Heat => self.beta as f64 / 2.0,
            PropagatorFamily::HeatGradient => (self.beta as f64 + 1.0) / 2.0,
            PropagatorFamily::Schrodinger => self.dim as f64 / 2.0 + self.beta as f64,
        }
    }

    /// `C` in `‖K(s)‖ = C s^{-γ}`: the `L¹` constant for heat kernels, the sup
    /// constant `(4π)^{-n/2}` for Schrödinger.
    pub fn norm_constant(&self) -> f64 {
        match self.family {
            PropagatorFamily::Schrodinger => (4.0 * PI).powf(-(self.dim as f64) / 2.0),
            _ => heat_norm_constant(self.derivative_order()),
        }
    }
}

/// One row of a bound table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub eps: f64,
    pub value: f64,
    /// Mollifier mass at `τ ≥ t`, dropped by the causal extension.
    pub lost_mass: f64,
}

const REDUCTION_CELLS: usize = 4000;

/// `C ∫_{τ<t} (t-τ)^{-γ} φ_ε(τ) dτ` for one ε (`eps = 0`: `C t^{-γ}`).
pub fn time_reduction(spec: &PropagatorSpec, t: f64, eps: f64) -> Result<BoundRow> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time t = {t} must be > 0")));
    }
    let gamma = spec.time_exponent();
    let c = spec.norm_constant();
    if eps == 0.0 {
        return Ok(BoundRow {
            eps,
            value: c * t.powf(-gamma),
            lost_mass: 0.0,
        });
    }
    let m = spec.mollifier.realize(eps)?;
    let samples = MollifierSamples::new(&m, REDUCTION_CELLS, 0);
    Ok(BoundRow {
        eps,
        value: c * samples.causal_power_integral(t, gamma)?,
        lost_mass: samples.mass_after(t),
    })
}

fn bound_table(spec: &PropagatorSpec, t: f64, schedule: &EpsSchedule, family: PropagatorFamily) -> Result<Vec<BoundRow>> {
    spec.validate()?;
    if spec.family != family {
        return Err(Error::InvalidParameter(format!(
            "expected a {family:?} spec, got {:?}",
            spec.family
        )));
    }
    schedule.validate_for(&spec.mollifier.scale)?;
    crate::analysis::sweep(schedule, |e| time_reduction(spec, t, e))
        .map(|rows| rows.into_iter().map(|(_, r)| r).collect())
}

/// `‖∂^β E_{nε}(t)‖_1` per ε via the time reduction with `c_β = ‖s^{β/2} ∂^β E_n(s)‖_1`.
pub fn heat_l1_bound(spec: &PropagatorSpec, t: f64, schedule: &EpsSchedule) -> Result<Vec<BoundRow>> {
    bound_table(spec, t, schedule, PropagatorFamily::Heat)
}

/// `‖∂_0 ∂^β E_{nε}(t)‖_1` per ε.
pub fn heat_gradient_l1_bound(spec: &PropagatorSpec, t: f64, schedule: &EpsSchedule) -> Result<Vec<BoundRow>> {
    bound_table(spec, t, schedule, PropagatorFamily::HeatGradient)
}

/// Bound on `sup_x |∂^β S_{nε}(t, x)|` per ε.
pub fn schrodinger_sup_bound(spec: &PropagatorSpec, t: f64, schedule: &EpsSchedule) -> Result<Vec<BoundRow>> {
    bound_table(spec, t, schedule, PropagatorFamily::Schrodinger)
}

fn hermite_complex(n: usize, z: Complex64) -> Complex64 {
    let mut h0 = Complex64::new(1.0, 0.0);
    if n == 0 {
        return h0;
    }
    let mut h1 = 2.0 * z;
    for k in 1..n {
        let h2 = 2.0 * z * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Unmollified kernel value at time `s > 0`.
fn raw_kernel(spec: &PropagatorSpec, s: f64, x: &[f64]) -> Complex64 {
    let n = spec.dim as f64;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let k = spec.derivative_order() as usize;
    match spec.family {
        PropagatorFamily::Schrodinger => {
            // ∂^k e^{-a x²} = (-√a)^k H_k(√a x) e^{-a x²}, a = -i/(4s)
            let a = Complex64::new(0.0, -1.0 / (4.0 * s));
            let sa = a.sqrt();
            let base = (4.0 * PI * s).powf(-n / 2.0) * Complex64::new(0.0, r2 / (4.0 * s)).exp();
            base * (-sa).powu(k as u32) * hermite_complex(k, sa * x[0])
        }
        _ => {
            let g = (4.0 * PI * s).powf(-n / 2.0) * (-r2 / (4.0 * s)).exp();
            let y = x[0] / (4.0 * s).sqrt();
            let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
            Complex64::new(g * sign * (4.0 * s).powf(-(k as f64) / 2.0) * hermite(k, y), 0.0)
        }
    }
}

/// Exact `∫_{τ<t} e^{-λ(t-τ)} φ(τ) dτ` for piecewise-linear φ with nodes on multiples of `step`.
#[derive(Debug, Clone)]
pub struct TimeMollification {
    samples: MollifierSamples,
}

/// `(∫_0^δ e^{-λv} dv, ∫_0^δ v e^{-λv} dv)`.
fn exp_moments(lambda: Complex64, delta: f64) -> (Complex64, Complex64) {
    let z = lambda * delta;
    if z.norm() < 0.5 {
        let mut i0 = Complex64::new(0.0, 0.0);
        let mut i1 = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for k in 0..20 {
            // term = (-z)^k / k!
            i0 += term / (k as f64 + 1.0);
            i1 += term / (k as f64 + 2.0);
            term *= -z / (k as f64 + 1.0);
        }
        (i0 * delta, i1 * delta * delta)
    } else {
        let e = (-z).exp();
        let one = Complex64::new(1.0, 0.0);
        ((one - e) / lambda, (one - e * (one + z)) / (lambda * lambda))
    }
}

impl TimeMollification {
    pub fn new(m: &Mollifier, step: f64) -> Self {
        Self {
            samples: MollifierSamples::aligned(m, step),
        }
    }

    /// Cell size fine enough to put `cells` nodes across the mollifier width, dividing `dt`.
    pub fn for_step(m: &Mollifier, dt: f64, cells: usize) -> Self {
        let width = 2.0 * m.support_radius();
        let refine = (dt * cells as f64 / width).ceil().max(1.0);
        Self::new(m, dt / refine)
    }

    pub fn step(&self) -> f64 {
        self.samples.step()
    }

    pub fn mass_after(&self, t: f64) -> f64 {
        self.samples.mass_after(t)
    }

    fn cell_term(&self, i: usize, i0: Complex64, i1: Complex64) -> Complex64 {
        let v = self.samples.values();
        let (fa, fb) = (v[i], v[i + 1]);
        i0 * fb + i1 * ((fa - fb) / self.step())
    }

    /// `m(t) = ∫_{τ<t} e^{-λ(t-τ)} φ(τ) dτ`.
    pub fn factor(&self, lambda: Complex64, t: f64) -> Complex64 {
        let v = self.samples.values();
        let h = self.step();
        let start = self.samples.start();
        if t <= start {
            return Complex64::new(0.0, 0.0);
        }
        let (i0, i1) = exp_moments(lambda, h);
        let decay = (-lambda * h).exp();
        let full = (((t - start) / h).floor() as usize).min(v.len() - 1);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..full {
            acc = acc * decay + self.cell_term(i, i0, i1);
        }
        let b = start + full as f64 * h;
        let mut total = acc * (-lambda * (t - b)).exp();
        if full < v.len() - 1 && t > b {
            // partial cell [b, t]
            let w = t - b;
            let fa = v[full];
            let ft = fa + (v[full + 1] - fa) * w / h;
            let (p0, p1) = exp_moments(lambda, w);
            total += p0 * ft + p1 * ((fa - ft) / w);
        }
        total
    }

    /// `m(ℓ dt)` for `ℓ = 0..count`; `dt` must be a multiple of the cell size.
    pub fn factors_on_grid(&self, lambda: Complex64, dt: f64, count: usize) -> Result<Vec<Complex64>> {
        let h = self.step();
        let ratio = dt / h;
        let r = ratio.round() as usize;
        if r == 0 || (ratio - r as f64).abs() > 1e-8 * ratio {
            return Err(Error::InvalidGrid("time step is not a multiple of the mollifier cell".into()));
        }
        let v = self.samples.values();
        let start = self.samples.start();
        // node index of τ = 0
        let zero = (-start / h).round() as usize;
        let (i0, i1) = exp_moments(lambda, h);
        let decay = (-lambda * h).exp();
        let mut out = Vec::with_capacity(count);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut node = 0;
        for l in 0..count {
            let target = zero + l * r;
            while node < target && node < v.len() - 1 {
                acc = acc * decay + self.cell_term(node, i0, i1);
                node += 1;
            }
            if node < target {
                acc *= (-lambda * (h * (target - node) as f64)).exp();
                node = target;
            }
            out.push(acc);
        }
        Ok(out)
    }
}

/// A kernel at a fixed time, ready for evaluation or spectral application.
#[derive(Debug, Clone)]
pub struct KernelHandle {
    spec: PropagatorSpec,
    t: f64,
    time: Option<TimeMollification>,
}

pub fn kernel_handle(spec: &PropagatorSpec, t: f64) -> Result<KernelHandle> {
    spec.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time t = {t} must be > 0")));
    }
    let time = if spec.eps > 0.0 {
        let m = spec.mollifier.realize(spec.eps)?;
        Some(TimeMollification::new(&m, 2.0 * m.support_radius() / 2000.0))
    } else {
        None
    };
    Ok(KernelHandle { spec: *spec, t, time })
}

impl KernelHandle {
    pub fn spec(&self) -> &PropagatorSpec {
        &self.spec
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Pointwise value from the closed form (any dimension), time-integrated when mollified.
    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.spec.dim {
            return Err(Error::InvalidParameter("point dimension mismatch".into()));
        }
        let Some(tm) = &self.time else {
            return Ok(raw_kernel(&self.spec, self.t, x));
        };
        let (gx, gw) = gauss_legendre(8);
        let v = tm.samples.values();
        let h = tm.step();
        let start = tm.samples.start();
        let mut total = Complex64::new(0.0, 0.0);
        for i in 0..v.len() - 1 {
            let a = start + i as f64 * h;
            if a >= self.t {
                break;
            }
            let b = (a + h).min(self.t);
            if v[i] == 0.0 && v[i + 1] == 0.0 {
                continue;
            }
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            for (xi, wi) in gx.iter().zip(&gw) {
                let tau = mid + half * xi;
                let phi = v[i] + (v[i + 1] - v[i]) * (tau - a) / h;
                total += raw_kernel(&self.spec, self.t - tau, x) * (wi * half * phi);
            }
        }
        Ok(total)
    }

    /// Grid samples (`n ≤ 2`).
    pub fn sample(&self, grid: &GridSpec) -> Result<Field> {
        if grid.dim() != self.spec.dim {
            return Err(Error::GridMismatch("kernel and grid dimensions differ".into()));
        }
        let vals = (0..grid.len())
            .map(|i| self.evaluate(&grid.point(i)))
            .collect::<Result<Vec<_>>>()?;
        if self.spec.family == PropagatorFamily::Schrodinger {
            Field::complex(grid.clone(), vals)
        } else {
            Field::real(grid.clone(), vals.iter().map(|z| z.re).collect())
        }
    }

    /// Fourier multiplier in storage order.
    pub fn multiplier(&self, grid: &GridSpec) -> Result<Vec<Complex64>> {
        if grid.dim() != self.spec.dim {
            return Err(Error::GridMismatch("kernel and grid dimensions differ".into()));
        }
        let deriv = spectral::axis0_derivative_symbol(grid, self.spec.derivative_order());
        let q = spectral::squared_wavenumbers(grid);
        let schr = self.spec.family == PropagatorFamily::Schrodinger;
        Ok(q.iter()
            .zip(&deriv)
            .map(|(&q, d)| {
                let lambda = if schr { Complex64::new(0.0, q) } else { Complex64::new(q, 0.0) };
                let time = match &self.time {
                    None => (-lambda * self.t).exp(),
                    Some(tm) => tm.factor(lambda, self.t),
                };
                d * time
            })
            .collect())
    }
}

/// Periodic convolution of `f` with the kernel, applied spectrally.
pub fn apply_propagator(handle: &KernelHandle, f: &Field) -> Result<Field> {
    let grid = f.grid();
    let mult = handle.multiplier(grid)?;
    let mut data = f.to_complex_vec();
    spectral::forward(grid, &mut data);
    for (z, m) in data.iter_mut().zip(&mult) {
        *z *= m;
    }
    spectral::inverse(grid, &mut data);
    if handle.spec.family == PropagatorFamily::Schrodinger || f.is_complex() {
        Field::complex(grid.clone(), data)
    } else {
        Field::real(grid.clone(), data.iter().map(|z| z.re).collect())
    }
}
