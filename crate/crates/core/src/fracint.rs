//! Fractional kernels `Φ_α = t_+^{α-1}/Γ(α)`, Riemann-Liouville integrals and
//! mollified kernels `Φ_α * φ_ε`, with derivatives shifted onto `φ_ε` when `α ≤ 0`.

use rayon::prelude::*;

use crate::analysis::EpsSchedule;
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::mollifier::{Mollifier, MollifierSpec};
use crate::special::{gamma, gauss_legendre};

/// Order α of a fractional integral, with the derivative shift used for `α ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder {
    alpha: f64,
}

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha.abs() > 50.0 {
            return Err(Error::InvalidParameter(format!("order alpha = {alpha}")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `-α` for negative α, else 0.
    pub fn abar(&self) -> f64 {
        if self.alpha < 0.0 {
            -self.alpha
        } else {
            0.0
        }
    }

    /// Smallest `n ≥ 0` with `α + n > 0`.
    pub fn n_shift(&self) -> usize {
        if self.alpha > 0.0 {
            0
        } else {
            (-self.alpha).floor() as usize + 1
        }
    }

    /// `α + n_shift`, the order of the integrable kernel actually convolved.
    pub fn shifted(&self) -> f64 {
        self.alpha + self.n_shift() as f64
    }
}

/// `Φ_α(t) = t_+^{α-1}/Γ(α)`.
pub fn phi_alpha(alpha: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!(
            "phi_alpha needs alpha > 0 (got {alpha}); use a mollified kernel"
        )));
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    Ok(t.powf(alpha - 1.0) / gamma(alpha))
}

fn binomial(p: f64, j: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..j {
        c *= (p - i as f64) / (i + 1) as f64;
    }
    c
}

/// Product-integration weights for `∫_0^{t_n} (t_n-τ)^{β-1} f(τ) dτ` with `f`
/// piecewise linear on a uniform grid.
#[derive(Debug, Clone)]
struct ProductWeights {
    beta: f64,
    powers: Vec<f64>,
}

const SERIES_FROM: usize = 64;

impl ProductWeights {
    fn new(beta: f64, n: usize) -> Self {
        let top = (n + 2).min(SERIES_FROM + 2);
        let powers = (0..=top).map(|k| (k as f64).powf(beta + 1.0)).collect();
        Self { beta, powers }
    }

    /// Weight of an interior node at distance `m ≥ 1` from the evaluation point.
    fn interior(&self, m: usize) -> f64 {
        if m < SERIES_FROM {
            let p = &self.powers;
            return p[m + 1] - 2.0 * p[m] + p[m - 1];
        }
        // m^{β+1} [(1+1/m)^{β+1} - 2 + (1-1/m)^{β+1}], summed as a series.
        let x = 1.0 / m as f64;
        let q = self.beta + 1.0;
        let mut s = 0.0;
        let mut j = 2;
        loop {
            let term = 2.0 * binomial(q, j) * x.powi(j as i32);
            s += term;
            if term.abs() <= 1e-18 * s.abs() || j > 40 {
                break;
            }
            j += 2;
        }
        (m as f64).powf(q) * s
    }

    /// Weight of the left endpoint for evaluation point `n ≥ 1`.
    fn start(&self, n: usize) -> f64 {
        let q = self.beta + 1.0;
        if n < SERIES_FROM {
            return self.powers[n - 1] - (n as f64 - q) * (n as f64).powf(self.beta);
        }
        // n^{β+1} [(1-1/n)^{β+1} - 1 + (β+1)/n]
        let x = 1.0 / n as f64;
        let mut s = 0.0;
        for j in 2..=40 {
            let term = binomial(q, j) * (-x).powi(j as i32);
            s += term;
            if term.abs() <= 1e-18 * s.abs() {
                break;
            }
        }
        (n as f64).powf(q) * s
    }
}

/// `J^α f` on the grid of `f` (which must start at 0), by product integration
/// exact for piecewise-linear `f`.
pub fn frac_integral(f: &Field, alpha: f64) -> Result<Field> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!(
            "frac_integral needs alpha > 0 (got {alpha}); use a mollified kernel"
        )));
    }
    let grid = f.grid();
    if grid.dim() != 1 || grid.lo(0).abs() > 1e-14 * grid.extent(0) {
        return Err(Error::InvalidGrid("fractional integrals need a 1-D grid starting at 0".into()));
    }
    let vals = f
        .as_real()
        .ok_or_else(|| Error::InvalidParameter("fractional integrals take real fields".into()))?;
    let out = product_integrate(vals, grid.spacing(0), alpha);
    Field::real(grid.clone(), out)
}

/// `(Φ_β * f)(t_n)` for samples `f_k = f(t_0 + k h)`, all `n`.
fn product_integrate(f: &[f64], h: f64, beta: f64) -> Vec<f64> {
    let n = f.len();
    let w = ProductWeights::new(beta, n);
    let c: Vec<f64> = (0..n).map(|m| if m == 0 { 0.0 } else { w.interior(m) }).collect();
    let scale = h.powf(beta) / gamma(beta + 2.0);
    let mut out = vec![0.0; n];
    for j in 1..n {
        let mut s = w.start(j) * f[0] + f[j];
        for k in 1..j {
            s += c[j - k] * f[k];
        }
        out[j] = scale * s;
    }
    out
}

/// Resolution of a mollified-kernel grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelGrid {
    /// Right end `T` of the kernel grid.
    pub horizon: f64,
    /// Coarse step; the kernel grid step divides it.
    pub step: f64,
    /// Minimum number of grid steps across the mollifier width `2/L`.
    pub points_across_support: usize,
}

impl KernelGrid {
    pub fn new(horizon: f64, step: f64) -> Self {
        Self {
            horizon,
            step,
            points_across_support: 400,
        }
    }
}

/// `Φ_{α+n} * D^n φ_ε` sampled on `t_j = (j - K) h`, covering `[-support, T]`.
#[derive(Debug, Clone)]
pub struct MollifiedKernel {
    order: FracOrder,
    mollifier: Mollifier,
    offset: usize,
    step: f64,
    refine: usize,
    values: Vec<f64>,
}

impl MollifiedKernel {
    pub fn order(&self) -> FracOrder {
        self.order
    }

    pub fn mollifier(&self) -> &Mollifier {
        &self.mollifier
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Grid nodes.
    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len())
            .map(|j| (j as f64 - self.offset as f64) * self.step)
            .collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Trapezoid `L¹` norm over the whole grid `[-support, T]`.
    pub fn l1_norm(&self) -> f64 {
        let v = &self.values;
        let n = v.len();
        let mut s = 0.0;
        for (j, x) in v.iter().enumerate() {
            let w = if j == 0 || j + 1 == n { 0.5 } else { 1.0 };
            s += w * x.abs();
        }
        s * self.step
    }

    /// Kernel values at `t = 0, h, 2h, …` for the coarse step `h`.
    pub fn on_coarse_grid(&self, count: usize) -> Result<Vec<f64>> {
        (0..count)
            .map(|j| {
                self.values
                    .get(self.offset + j * self.refine)
                    .copied()
                    .ok_or_else(|| Error::InvalidParameter("kernel grid too short".into()))
            })
            .collect()
    }
}

/// Build `Φ_α * φ_ε` (α > 0) or `Φ_{α+n} * D^n φ_ε` (α ≤ 0) by product integration.
pub fn build_mollified_kernel(
    order: FracOrder,
    mspec: &MollifierSpec,
    eps: f64,
    grid: &KernelGrid,
) -> Result<MollifiedKernel> {
    if mspec.dim != 1 {
        return Err(Error::InvalidParameter("kernel mollifiers are one-dimensional".into()));
    }
    if !(grid.horizon > 0.0 && grid.step > 0.0 && grid.step <= grid.horizon) {
        return Err(Error::InvalidGrid(format!(
            "kernel grid needs 0 < step <= horizon, got step {} horizon {}",
            grid.step, grid.horizon
        )));
    }
    if grid.points_across_support < 8 {
        return Err(Error::UnderResolved(format!(
            "{} points across the mollifier; need >= 8",
            grid.points_across_support
        )));
    }
    let moll = mspec.realize(eps)?;
    let width = 2.0 / moll.scale();
    let refine = (grid.step * grid.points_across_support as f64 / width).ceil().max(1.0) as usize;
    let h = grid.step / refine as f64;
    moll.check_resolution(h)?;
    let support = moll.support_radius();
    let offset = (support / h).ceil() as usize;
    let coarse = (grid.horizon / grid.step - 1e-9).ceil() as usize;
    let len = offset + coarse * refine + 1;
    let n = order.n_shift();
    let samples: Vec<f64> = (0..len)
        .map(|j| {
            let t = (j as f64 - offset as f64) * h;
            if t.abs() > support {
                0.0
            } else {
                moll.derivative(t, n)
            }
        })
        .collect();
    let values = convolve_supported(&samples, h, order.shifted(), 2 * offset + 1);
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(MollifiedKernel {
        order,
        mollifier: moll,
        offset,
        step: h,
        refine,
        values,
    })
}

/// Product integration where `f` vanishes beyond index `support_end`.
fn convolve_supported(f: &[f64], h: f64, beta: f64, support_end: usize) -> Vec<f64> {
    let n = f.len();
    let w = ProductWeights::new(beta, n);
    let c: Vec<f64> = (0..n).map(|m| if m == 0 { 0.0 } else { w.interior(m) }).collect();
    let scale = h.powf(beta) / gamma(beta + 2.0);
    let last = support_end.min(n - 1);
    let mut out = vec![0.0; n];
    for j in 1..n {
        let mut s = w.start(j) * f[0];
        if j <= last {
            s += f[j];
        }
        for k in 1..j.min(last + 1) {
            s += c[j - k] * f[k];
        }
        out[j] = scale * s;
    }
    out
}

/// Expected growth of a kernel bound sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelGrowth {
    Bounded,
    /// At most `L(ε)^m` with `m = ⌈ᾱ⌉`.
    LogPower(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelBoundReport {
    pub order: FracOrder,
    pub rows: Vec<(f64, f64)>,
    pub expected: KernelGrowth,
}

/// `‖J^α φ_ε‖_{L¹}` over the kernel grid ending at `T`, for each ε of a schedule.
pub fn kernel_bound_report(
    order: FracOrder,
    mspec: &MollifierSpec,
    schedule: &EpsSchedule,
    horizon: f64,
) -> Result<KernelBoundReport> {
    let step = horizon / 1000.0;
    let rows = schedule
        .values()
        .par_iter()
        .map(|&eps| {
            let k = build_mollified_kernel(order, mspec, eps, &KernelGrid::new(horizon, step))?;
            Ok((eps, k.l1_norm()))
        })
        .collect::<Result<Vec<_>>>()?;
    let expected = if order.alpha() > 0.0 {
        KernelGrowth::Bounded
    } else {
        KernelGrowth::LogPower(order.abar().ceil())
    };
    Ok(KernelBoundReport {
        order,
        rows,
        expected,
    })
}

/// Piecewise-linear samples of `φ_ε^{(k)}` across its support.
#[derive(Debug, Clone)]
pub struct MollifierSamples {
    start: f64,
    step: f64,
    values: Vec<f64>,
    moments: std::sync::OnceLock<Vec<f64>>,
}

const FAR_FIELD_TERMS: usize = 64;

impl MollifierSamples {
    pub fn new(m: &Mollifier, cells: usize, derivative: usize) -> Self {
        let s = m.support_radius();
        let step = 2.0 * s / cells as f64;
        let values = (0..=cells)
            .map(|j| m.derivative(-s + j as f64 * step, derivative))
            .collect();
        Self {
            start: -s,
            step,
            values,
            moments: Default::default(),
        }
    }

    /// Aligned samples: nodes at integer multiples of `step`, covering the support.
    pub fn aligned(m: &Mollifier, step: f64) -> Self {
        let s = m.support_radius();
        let k = (s / step).ceil() as i64;
        let values = (-k..=k)
            .map(|j| {
                let t = j as f64 * step;
                if t.abs() > s {
                    0.0
                } else {
                    m.derivative(t, 0)
                }
            })
            .collect();
        Self {
            start: -(k as f64) * step,
            step,
            values,
            moments: Default::default(),
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }

    /// Piecewise-linear value at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.start || t >= self.end() {
            return 0.0;
        }
        let x = (t - self.start) / self.step;
        let i = (x.floor() as usize).min(self.values.len() - 2);
        let f = x - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }

    /// `∫_{τ ≥ t} φ_ε`, the mass discarded by a causal cut at `t`.
    pub fn mass_after(&self, t: f64) -> f64 {
        let n = self.values.len();
        let mut s = 0.0;
        for i in 0..n - 1 {
            let a = self.start + i as f64 * self.step;
            let b = a + self.step;
            if b <= t {
                continue;
            }
            let lo = a.max(t);
            let (fa, fb) = (self.eval_cell(i, lo), self.values[i + 1]);
            s += 0.5 * (fa + fb) * (b - lo);
        }
        s
    }

    fn eval_cell(&self, i: usize, t: f64) -> f64 {
        let a = self.start + i as f64 * self.step;
        let f = ((t - a) / self.step).clamp(0.0, 1.0);
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }

    /// `∫_{τ < t} (t-τ)^{-γ} φ(τ) dτ` for the piecewise-linear φ.
    ///
    /// Cells touching `τ = t` use exact weights; distant cells use Gauss-Legendre.
    pub fn causal_power_integral(&self, t: f64, gamma_exp: f64) -> Result<f64> {
        let reach = self.start.abs().max(self.end().abs());
        if t >= 3.0 * reach && t > 0.0 {
            return Ok(self.far_field(t, -gamma_exp));
        }
        self.near_field(t, gamma_exp)
    }

    fn near_field(&self, t: f64, gamma_exp: f64) -> Result<f64> {
        let n = self.values.len();
        let inside = t > self.start && t < self.end();
        if inside && gamma_exp >= 1.0 && self.eval(t).abs() > 0.0 {
            return Err(Error::Domain(format!(
                "(t-τ)^-{gamma_exp} is not integrable against the mollifier at t = {t}"
            )));
        }
        let (gx, gw) = gauss_rule8();
        let mut total = 0.0;
        for i in 0..n - 1 {
            let a = self.start + i as f64 * self.step;
            if a >= t {
                break;
            }
            let b = (a + self.step).min(t);
            let (fa, fb) = (self.values[i], self.eval_cell(i, b));
            if fa == 0.0 && fb == 0.0 {
                continue;
            }
            let width = b - a;
            let ub = t - b;
            if ub > 8.0 * width {
                let mid = 0.5 * (a + b);
                let mut s = 0.0;
                for (x, w) in gx.iter().zip(gw) {
                    let tau = mid + 0.5 * width * x;
                    let lin = fa + (fb - fa) * (tau - a) / width;
                    s += w * (t - tau).powf(-gamma_exp) * lin;
                }
                total += 0.5 * width * s;
            } else {
                // φ = fb + slope (u - ub) with u = t - τ.
                let ua = t - a;
                let slope = (fa - fb) / width;
                let d1 = power_primitive_diff(1.0 - gamma_exp, ua, ub);
                let d2 = power_primitive_diff(2.0 - gamma_exp, ua, ub);
                total += (fb - slope * ub) * d1 + slope * d2;
            }
        }
        Ok(total)
    }
}

impl MollifierSamples {
    /// `∫ τ^k φ` for `k < FAR_FIELD_TERMS`.
    fn moments(&self) -> &[f64] {
        self.moments.get_or_init(|| {
            let (gx, gw) = gauss_rule8();
            let mut m = vec![0.0; FAR_FIELD_TERMS];
            for i in 0..self.values.len() - 1 {
                let (fa, fb) = (self.values[i], self.values[i + 1]);
                if fa == 0.0 && fb == 0.0 {
                    continue;
                }
                let a = self.start + i as f64 * self.step;
                for (x, w) in gx.iter().zip(gw) {
                    let u = 0.5 * (x + 1.0);
                    let tau = a + u * self.step;
                    let mut p = 0.5 * self.step * w * (fa + (fb - fa) * u);
                    for mk in m.iter_mut() {
                        *mk += p;
                        p *= tau;
                    }
                }
            }
            m
        })
    }

    /// `∫ (t-τ)^c φ` by the binomial series in `τ/t`, valid for `t ≥ 3 max|τ|`.
    fn far_field(&self, t: f64, c: f64) -> f64 {
        let m = self.moments();
        let reach = self.start.abs().max(self.end().abs());
        let mass: f64 = self.values.iter().map(|v| v.abs()).sum::<f64>() * self.step;
        let mut coeff = 1.0;
        let mut tp = t.powf(c);
        let mut sum = 0.0;
        for (k, mk) in m.iter().enumerate() {
            sum += coeff * mk * tp;
            // odd moments may vanish, so bound the tail rather than test the term
            if (coeff * tp).abs() * reach.powi(k as i32) * mass < 1e-18 * sum.abs() {
                break;
            }
            coeff *= -(c - k as f64) / (k as f64 + 1.0);
            tp /= t;
        }
        sum
    }
}

fn gauss_rule8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8))
}

/// `∫_y^x u^{c-1} du` without cancellation.
fn power_primitive_diff(c: f64, x: f64, y: f64) -> f64 {
    if y == 0.0 {
        return x.powf(c) / c;
    }
    let r = (x / y).ln();
    if c.abs() < 1e-14 {
        return y.powf(c) * r;
    }
    y.powf(c) * (c * r).exp_m1() / c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::mollifier::{MomentOrder, Profile, ScaleLaw};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn order_shift() {
        let cases = [(0.5, 0, 0.5), (0.0, 1, 1.0), (-1.0, 2, 1.0), (-1.5, 2, 0.5), (-0.3, 1, 0.7)];
        for (a, n, s) in cases {
            let o = FracOrder::new(a).unwrap();
            assert_eq!(o.n_shift(), n);
            assert_relative_eq!(o.shifted(), s, epsilon = 1e-15);
        }
        assert_eq!(FracOrder::new(-1.5).unwrap().abar(), 1.5);
    }

    #[test]
    fn phi_alpha_values() {
        assert_relative_eq!(phi_alpha(1.0, 7.3).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(phi_alpha(2.0, 3.0).unwrap(), 3.0, max_relative = 1e-14);
        assert_relative_eq!(phi_alpha(0.5, 1.0).unwrap(), 0.5641895835477563, max_relative = 1e-14);
        assert_eq!(phi_alpha(0.5, -1.0).unwrap(), 0.0);
        assert!(phi_alpha(0.0, 1.0).is_err());
    }

    fn unit_grid() -> GridSpec {
        GridSpec::line(0.0, 1.024, 1024).unwrap()
    }

    #[test]
    fn integral_of_one() {
        let f = Field::from_fn(unit_grid(), |_| 1.0).unwrap();
        let j = frac_integral(&f, 0.5).unwrap();
        let v = j.as_real().unwrap()[1000];
        assert_relative_eq!(v, 1.0 / gamma(1.5), max_relative = 1e-12);
        let j1 = frac_integral(&f, 1.0).unwrap();
        for (t, v) in unit_grid().coords(0).iter().zip(j1.as_real().unwrap()) {
            assert_relative_eq!(*v, *t, epsilon = 1e-12);
        }
    }

    #[test]
    fn exact_for_linear_functions() {
        // J^α t = t^{α+1}/Γ(α+2)
        let f = Field::from_fn(unit_grid(), |x| x[0]).unwrap();
        for alpha in [0.3, 1.7] {
            let j = frac_integral(&f, alpha).unwrap();
            for (t, v) in unit_grid().coords(0).iter().zip(j.as_real().unwrap()) {
                let exact = t.powf(alpha + 1.0) / gamma(alpha + 2.0);
                assert!((v - exact).abs() <= 1e-12 * (1.0 + exact));
            }
        }
    }

    #[test]
    fn series_weights_match_direct_formula() {
        let w = ProductWeights::new(0.4, 10);
        for m in [SERIES_FROM, 100, 1000] {
            let direct = (m as f64 + 1.0).powf(1.4) - 2.0 * (m as f64).powf(1.4) + (m as f64 - 1.0).powf(1.4);
            assert_relative_eq!(w.interior(m), direct, max_relative = 1e-9);
            let n = m as f64;
            let direct = (n - 1.0).powf(1.4) - (n - 1.4) * n.powf(0.4);
            assert_relative_eq!(w.start(m), direct, max_relative = 1e-8);
        }
    }

    #[test]
    fn alpha_zero_kernel_is_the_mollifier() {
        let spec = MollifierSpec::bump(1);
        let k = build_mollified_kernel(FracOrder::new(0.0).unwrap(), &spec, 1e-4, &KernelGrid::new(1.0, 1e-3)).unwrap();
        let m = spec.realize(1e-4).unwrap();
        for (t, v) in k.times().iter().zip(k.values()) {
            assert!((v - m.value(&[*t])).abs() < 1e-4 * m.scale());
        }
        assert_relative_eq!(k.l1_norm(), 1.0, max_relative = 1e-3);
    }

    #[test]
    fn alpha_one_kernel_is_a_smoothed_step() {
        let spec = MollifierSpec::bump(1);
        let k = build_mollified_kernel(FracOrder::new(1.0).unwrap(), &spec, 1e-2, &KernelGrid::new(1.0, 1e-3)).unwrap();
        assert_relative_eq!(k.l1_norm(), 1.0, max_relative = 1e-3);
        let s = k.mollifier().support_radius();
        for (t, v) in k.times().iter().zip(k.values()) {
            if *t > s {
                assert!((v - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn kernel_converges_to_phi_alpha_quadratically() {
        let spec = MollifierSpec::bump(1).with_profile(Profile::MomentVanishing(MomentOrder::Finite(2)));
        let order = FracOrder::new(0.5).unwrap();
        let mut errs = Vec::new();
        for eps in [1e-3, 1e-9] {
            let k = build_mollified_kernel(order, &spec, eps, &KernelGrid::new(1.0, 1e-3)).unwrap();
            let coarse = k.on_coarse_grid(1001).unwrap();
            let err = coarse[500] - phi_alpha(0.5, 0.5).unwrap();
            let l = ScaleLaw::Log.scale(eps).unwrap();
            errs.push((err.abs(), l));
        }
        // second-moment cancellation: error * L² roughly constant or better
        let (e0, l0) = errs[0];
        let (e1, l1) = errs[1];
        assert!(e1 * l1 * l1 <= 1.5 * e0 * l0 * l0 + 1e-9);
    }

    #[test]
    fn causal_power_integral_matches_kernel() {
        let spec = MollifierSpec::bump(1);
        let m = spec.realize(1e-3).unwrap();
        let s = MollifierSamples::new(&m, 4000, 0);
        for t in [0.02, 0.1, 1.0] {
            let v = s.causal_power_integral(t, 0.5).unwrap() / gamma(0.5);
            let k = build_mollified_kernel(FracOrder::new(0.5).unwrap(), &spec, 1e-3, &KernelGrid::new(1.0, 1e-3)).unwrap();
            let idx = k.times().iter().position(|x| (x - t).abs() < 1e-9).unwrap();
            assert_relative_eq!(v, k.values()[idx], max_relative = 1e-5);
        }
        assert!(s.causal_power_integral(0.0, 1.5).is_err());
    }

    #[test]
    fn far_field_series_matches_cell_sum() {
        let m = MollifierSpec::bump(1).realize(1e-3).unwrap();
        let s = MollifierSamples::new(&m, 2000, 0);
        let r = m.support_radius();
        for c in [-0.5, 0.5, 1.5, 2.5] {
            for t in [3.0 * r, 5.0 * r, 40.0 * r] {
                let far = s.far_field(t, c);
                let near = s.near_field(t, -c).unwrap();
                assert_relative_eq!(far, near, max_relative = 1e-13);
            }
        }
        assert_relative_eq!(s.mass_after(-1.0), 1.0, max_relative = 1e-6);
        assert_relative_eq!(s.mass_after(0.0), 0.5, max_relative = 1e-6);
    }

    proptest! {
        #[test]
        fn positivity(vals in proptest::collection::vec(0.0f64..3.0, 32), alpha in 0.1f64..3.0) {
            let g = GridSpec::line(0.0, 1.0, 32).unwrap();
            let f = Field::real(g, vals).unwrap();
            let j = frac_integral(&f, alpha).unwrap();
            prop_assert!(j.as_real().unwrap().iter().all(|v| *v >= -1e-15));
        }

        #[test]
        fn piecewise_linear_exactness(vals in proptest::collection::vec(-3.0f64..3.0, 16), alpha in 0.2f64..2.5) {
            // Independent route: per-cell moments ∫(t-τ)^{α-1} and ∫(t-τ)^{α-1} τ in closed form.
            let g = GridSpec::line(0.0, 1.0, 16).unwrap();
            let h = g.spacing(0);
            let f = Field::real(g, vals.clone()).unwrap();
            let j = frac_integral(&f, alpha).unwrap();
            let n = 15;
            let t = n as f64 * h;
            let mut exact = 0.0;
            for k in 0..n {
                let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
                let i0 = ((t - a).powf(alpha) - (t - b).powf(alpha)) / alpha;
                let i1 = t * i0 - ((t - a).powf(alpha + 1.0) - (t - b).powf(alpha + 1.0)) / (alpha + 1.0);
                let slope = (vals[k + 1] - vals[k]) / h;
                exact += (vals[k] - slope * a) * i0 + slope * i1;
            }
            exact /= gamma(alpha);
            let got = j.as_real().unwrap()[n];
            prop_assert!((got - exact).abs() <= 1e-12 * (1.0 + exact.abs()), "{got} vs {exact}");
        }
    }
}
