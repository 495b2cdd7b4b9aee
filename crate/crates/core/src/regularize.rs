//! Cut-off regularization of non-Lipschitz nonlinearities and mollification of
//! singular data (delta sums, `|D|^k ψ`, derivatives of continuous functions).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::mollifier::{CutoffPlateau, Mollifier, MollifierSpec, ScaleLaw};
use crate::special::{smooth_ramp, smooth_step, smooth_step_derivative};
use crate::spectral;

/// Nonlinearity `g(u)` before regularization.
#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearityModel {
    /// `sign(u) |u|^γ`, `γ ∈ (0, 1)`.
    PowerLaw { gamma: f64 },
    /// `√|u|`.
    SqrtAbs,
    /// `sign(u)`.
    PiecewiseStep,
    /// `u |u|`.
    SignedSquare,
    /// `u² / 2`.
    HalfSquare,
    /// `λ u`; already Lipschitz, never cut off.
    Linear { slope: f64 },
    /// Piecewise-linear interpolation of `(u, g)` samples, flat outside.
    Custom(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearitySpec {
    pub model: NonlinearityModel,
    /// Exponent `b` in the Lipschitz bound `C L(ε)^b`.
    pub cutoff_exponent: f64,
    pub scale: ScaleLaw,
}

impl NonlinearitySpec {
    pub fn new(model: NonlinearityModel, cutoff_exponent: f64, scale: ScaleLaw) -> Self {
        Self {
            model,
            cutoff_exponent,
            scale,
        }
    }

    fn check(&self, allow_out_of_range: bool) -> Result<()> {
        let b = self.cutoff_exponent;
        match &self.model {
            NonlinearityModel::PowerLaw { gamma } if !(*gamma > 0.0 && *gamma < 1.0) => {
                return Err(Error::InvalidParameter(format!("power-law exponent {gamma} outside (0, 1)")))
            }
            NonlinearityModel::Linear { slope } if !slope.is_finite() => {
                return Err(Error::InvalidParameter("linear slope must be finite".into()))
            }
            NonlinearityModel::Custom(pts) => {
                if pts.len() < 2 {
                    return Err(Error::InvalidParameter("custom nonlinearity needs >= 2 samples".into()));
                }
                if pts.windows(2).any(|w| w[1].0 <= w[0].0) || pts.iter().any(|(u, g)| !u.is_finite() || !g.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "custom samples must be finite with strictly increasing u".into(),
                    ));
                }
            }
            _ => {}
        }
        if matches!(self.model, NonlinearityModel::Linear { .. }) {
            return Ok(());
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter(format!("cutoff exponent b = {b} must be > 0")));
        }
        if b >= 1.0 && !allow_out_of_range {
            return Err(Error::GuardViolation(format!(
                "requires b < 1 (moderateness guard), got b = {b}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Cut {
    /// `sign(u)^odd |u|^γ S(|u|/δ - 1)`; `γ = 0` is the step.
    Power { gamma: f64, delta: f64, odd: bool },
    /// `g(c(u)) + g'(c(u)) (u - c(u))` with a smooth clamp `c` saturating at `1.5 U`.
    Clamp { signed: bool, cap: f64 },
    Linear { slope: f64 },
    Table { u: Vec<f64>, g: Vec<f64>, slope: Vec<f64> },
}

/// A regularized nonlinearity `g_ε` with its derivative and design Lipschitz bound.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedNonlinearity {
    cut: Cut,
    bound: f64,
}

impl RegularizedNonlinearity {
    pub fn value(&self, u: f64) -> f64 {
        match &self.cut {
            Cut::Power { gamma, delta, odd } => {
                let a = u.abs();
                let s = smooth_step(a / delta - 1.0);
                if s == 0.0 {
                    return 0.0;
                }
                let mag = if *gamma == 0.0 { 1.0 } else { a.powf(*gamma) };
                let sign = if *odd { u.signum() } else { 1.0 };
                sign * mag * s
            }
            Cut::Clamp { signed, cap } => {
                let (c, _) = smooth_clamp(u, *cap);
                let (g, dg, _) = square_model(c, *signed);
                g + dg * (u - c)
            }
            Cut::Linear { slope } => slope * u,
            Cut::Table { u: us, g, slope } => {
                if u <= us[0] {
                    return g[0];
                }
                let last = us.len() - 1;
                if u >= us[last] {
                    return g[last];
                }
                let i = us.partition_point(|x| *x <= u) - 1;
                g[i] + slope[i] * (u - us[i])
            }
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match &self.cut {
            Cut::Power { gamma, delta, odd: _ } => {
                let a = u.abs();
                let x = a / delta - 1.0;
                if x <= 0.0 {
                    return 0.0;
                }
                let s = smooth_step(x);
                let ds = smooth_step_derivative(x) / delta;
                if *gamma == 0.0 {
                    // even in u for the odd step, odd for the even profile: handled by sign below
                    return ds;
                }
                gamma * a.powf(gamma - 1.0) * s + a.powf(*gamma) * ds
            }
            .copysign_for(u, &self.cut),
            Cut::Clamp { signed, cap } => {
                let (c, dc) = smooth_clamp(u, *cap);
                let (_, dg, d2g) = square_model(c, *signed);
                dg + d2g * dc * (u - c)
            }
            Cut::Linear { slope } => *slope,
            Cut::Table { u: us, slope, .. } => {
                if u <= us[0] || u >= us[us.len() - 1] {
                    return 0.0;
                }
                slope[us.partition_point(|x| *x <= u) - 1]
            }
        }
    }

    /// Design bound on the Lipschitz constant, `C L(ε)^b`.
    pub fn lipschitz_bound(&self) -> f64 {
        self.bound
    }
}

trait SignFix {
    fn copysign_for(self, u: f64, cut: &Cut) -> f64;
}

impl SignFix for f64 {
    /// Derivative of `|u|`-profiles: odd models give an even derivative, even models an odd one.
    fn copysign_for(self, u: f64, cut: &Cut) -> f64 {
        match cut {
            Cut::Power { odd: false, .. } => self * u.signum(),
            _ => self,
        }
    }
}

/// `(c(u), c'(u))` for the smooth clamp: identity on `|u| ≤ U`, saturating at `1.5 U`.
fn smooth_clamp(u: f64, cap: f64) -> (f64, f64) {
    let a = u.abs();
    if a <= cap {
        return (u, 1.0);
    }
    let x = (a - cap) / cap;
    let c = cap + cap * smooth_ramp(x);
    (u.signum() * c, 1.0 - smooth_step(x))
}

/// `(g, g', g'')` for `u|u|` (signed) or `u²/2`.
fn square_model(c: f64, signed: bool) -> (f64, f64, f64) {
    if signed {
        (c * c.abs(), 2.0 * c.abs(), 2.0 * c.signum())
    } else {
        (0.5 * c * c, c, 1.0)
    }
}

/// Build `g_ε` with Lipschitz constant at most `C L(ε)^b`; rejects `b ≥ 1`.
pub fn regularize_nonlinearity(spec: &NonlinearitySpec, eps: f64) -> Result<RegularizedNonlinearity> {
    build_nonlinearity(spec, eps, false)
}

/// As [`regularize_nonlinearity`], but accepts `b ≥ 1` for guard-violation experiments.
pub fn regularize_nonlinearity_unguarded(spec: &NonlinearitySpec, eps: f64) -> Result<RegularizedNonlinearity> {
    build_nonlinearity(spec, eps, true)
}

fn build_nonlinearity(spec: &NonlinearitySpec, eps: f64, unguarded: bool) -> Result<RegularizedNonlinearity> {
    spec.check(unguarded)?;
    let b = spec.cutoff_exponent;
    if let NonlinearityModel::Linear { slope } = spec.model {
        return Ok(RegularizedNonlinearity {
            cut: Cut::Linear { slope },
            bound: slope.abs(),
        });
    }
    let l = spec.scale.scale(eps)?;
    let lb = l.powf(b);
    let (cut, bound) = match &spec.model {
        NonlinearityModel::PowerLaw { gamma } => {
            let delta = l.powf(-b / (1.0 - gamma));
            (
                Cut::Power { gamma: *gamma, delta, odd: true },
                (gamma + 2f64.powf(gamma + 1.0)) * lb,
            )
        }
        NonlinearityModel::SqrtAbs => (
            Cut::Power { gamma: 0.5, delta: l.powf(-2.0 * b), odd: false },
            (0.5 + 2f64.powf(1.5)) * lb,
        ),
        NonlinearityModel::PiecewiseStep => (
            Cut::Power { gamma: 0.0, delta: l.powf(-b), odd: true },
            2.0 * lb,
        ),
        NonlinearityModel::SignedSquare => (Cut::Clamp { signed: true, cap: lb }, 4.0 * lb),
        NonlinearityModel::HalfSquare => (Cut::Clamp { signed: false, cap: lb }, 2.0 * lb),
        NonlinearityModel::Custom(pts) => {
            let u: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let raw: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let slope: Vec<f64> = (0..u.len() - 1)
                .map(|i| ((raw[i + 1] - raw[i]) / (u[i + 1] - u[i])).clamp(-lb, lb))
                .collect();
            // Anchor at the sample closest to 0, integrate clamped slopes outward.
            let anchor = (0..u.len())
                .min_by(|&i, &j| u[i].abs().total_cmp(&u[j].abs()))
                .unwrap_or(0);
            let mut g = vec![0.0; u.len()];
            g[anchor] = raw[anchor];
            for i in anchor + 1..u.len() {
                g[i] = g[i - 1] + slope[i - 1] * (u[i] - u[i - 1]);
            }
            for i in (0..anchor).rev() {
                g[i] = g[i + 1] - slope[i] * (u[i + 1] - u[i]);
            }
            (Cut::Table { u, g, slope }, lb)
        }
        NonlinearityModel::Linear { .. } => unreachable!("handled above"),
    };
    Ok(RegularizedNonlinearity { cut, bound })
}

/// Seed for Lipschitz probes: `SINGREG_SEED` if set, else a fixed default.
pub fn probe_seed() -> u64 {
    std::env::var("SINGREG_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(0x5eed_2024)
}

/// Largest difference quotient of `map` over `samples` random points of `region`.
///
/// Points are sorted, so the maximum over consecutive pairs equals the maximum over
/// all sampled pairs.
pub fn lipschitz_probe(map: impl Fn(f64) -> f64, region: (f64, f64), samples: usize, seed: u64) -> Result<f64> {
    let (lo, hi) = region;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidParameter(format!("probe region ({lo}, {hi}) must be bounded")));
    }
    if samples < 1000 {
        return Err(Error::InvalidParameter(format!("probe needs >= 1000 samples, got {samples}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<f64> = (0..samples).map(|_| rng.gen_range(lo..hi)).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let vals: Vec<f64> = pts.iter().map(|&u| map(u)).collect();
    let mut best = 0.0f64;
    for i in 1..pts.len() {
        let q = ((vals[i] - vals[i - 1]) / (pts[i] - pts[i - 1])).abs();
        best = best.max(q);
    }
    Ok(best)
}

/// Model of the Volterra kernel `K(x, y, u)` in its `u` argument.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelFunctionSpec {
    Zero,
    /// `λ u`.
    Linear { coefficient: f64 },
    /// `λ g_ε(u)`.
    Nonlinear { coefficient: f64, nonlinearity: NonlinearitySpec },
}

impl KernelFunctionSpec {
    /// Cut-off exponent `b` (0 when no cut-off is involved).
    pub fn cutoff_exponent(&self) -> f64 {
        match self {
            KernelFunctionSpec::Nonlinear { nonlinearity, .. }
                if !matches!(nonlinearity.model, NonlinearityModel::Linear { .. }) =>
            {
                nonlinearity.cutoff_exponent
            }
            _ => 0.0,
        }
    }

    pub fn realize(&self, eps: f64, unguarded: bool) -> Result<RegularizedKernel> {
        Ok(match self {
            KernelFunctionSpec::Zero => RegularizedKernel { coefficient: 0.0, g: None },
            KernelFunctionSpec::Linear { coefficient } => RegularizedKernel {
                coefficient: *coefficient,
                g: None,
            },
            KernelFunctionSpec::Nonlinear { coefficient, nonlinearity } => RegularizedKernel {
                coefficient: *coefficient,
                g: Some(build_nonlinearity(nonlinearity, eps, unguarded)?),
            },
        })
    }
}

/// `K_ε(u)` at a fixed ε.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedKernel {
    coefficient: f64,
    g: Option<RegularizedNonlinearity>,
}

impl RegularizedKernel {
    pub fn is_zero(&self) -> bool {
        self.coefficient == 0.0
    }

    pub fn value(&self, u: f64) -> f64 {
        match &self.g {
            Some(g) => self.coefficient * g.value(u),
            None => self.coefficient * u,
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match &self.g {
            Some(g) => self.coefficient * g.derivative(u),
            None => self.coefficient,
        }
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.coefficient.abs() * self.g.as_ref().map_or(1.0, |g| g.lipschitz_bound())
    }
}

/// `a · D^j δ_ξ` (derivatives along axis 0).
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaTerm {
    pub point: Vec<f64>,
    pub order: u32,
    pub coefficient: f64,
}

/// How `|D|^k` is applied to the mollifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracPowerMode {
    /// `|ξ|^k` multiplier.
    Spectral,
    /// `(-Δ)^{k/2}` by exact differentiation; even integer `k`, one dimension.
    Direct,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SingularKind {
    DeltaSum(Vec<DeltaTerm>),
    /// `|D|^k ψ`.
    FracPower { psi: Field, k: f64, mode: FracPowerMode },
    /// `Σ D^{j_i} f_i` restricted to `interval`.
    Distribution { terms: Vec<(Field, u32)>, interval: (f64, f64) },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularDataSpec {
    pub kind: SingularKind,
    pub mollifier: MollifierSpec,
}

impl SingularDataSpec {
    /// A single Dirac mass at `point`.
    pub fn delta(point: Vec<f64>, mollifier: MollifierSpec) -> Self {
        Self {
            kind: SingularKind::DeltaSum(vec![DeltaTerm {
                point,
                order: 0,
                coefficient: 1.0,
            }]),
            mollifier,
        }
    }

    /// Pointwise value of a regularized one-dimensional delta sum (no periodic images).
    pub fn evaluate_1d(&self, eps: f64, x: f64) -> Result<f64> {
        let SingularKind::DeltaSum(terms) = &self.kind else {
            return Err(Error::InvalidParameter("pointwise evaluation needs a delta sum".into()));
        };
        if self.mollifier.dim != 1 {
            return Err(Error::InvalidParameter("pointwise evaluation is one-dimensional".into()));
        }
        let m = self.mollifier.realize(eps)?;
        Ok(terms
            .iter()
            .map(|t| t.coefficient * m.derivative(x - t.point[0], t.order as usize))
            .sum())
    }
}

/// Minimum-image displacement on a periodic axis.
fn wrap(d: f64, period: f64) -> f64 {
    d - period * (d / period).round()
}

/// Periodic samples of `φ_ε^{(k)}` (axis 0) at the grid displacements, in FFT order.
fn displacement_samples(m: &Mollifier, grid: &GridSpec, derivative: u32) -> Result<Vec<Complex64>> {
    if derivative > 0 && grid.dim() != 1 {
        return Err(Error::InvalidParameter("derivatives of data mollifiers need 1-D grids".into()));
    }
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let d: Vec<f64> = disp(grid, i);
        let v = if grid.dim() == 1 {
            m.derivative(d[0], derivative as usize)
        } else {
            m.value(&d)
        };
        out.push(Complex64::new(v, 0.0));
    }
    Ok(out)
}

fn disp(grid: &GridSpec, index: usize) -> Vec<f64> {
    let signed = |j: usize, axis: usize| {
        let n = grid.points(axis);
        let k = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
        k * grid.spacing(axis)
    };
    match grid.dim() {
        1 => vec![signed(index, 0)],
        _ => {
            let n1 = grid.points(1);
            vec![signed(index / n1, 0), signed(index % n1, 1)]
        }
    }
}

/// `h^n Σ_j f_j k(x_i - x_j)` by FFT.
fn circular_convolve(grid: &GridSpec, f: &[Complex64], kernel: &[Complex64], symbol: Option<&[f64]>) -> Vec<Complex64> {
    let mut a = f.to_vec();
    let mut b = kernel.to_vec();
    spectral::forward(grid, &mut a);
    spectral::forward(grid, &mut b);
    let cell = grid.cell_volume();
    for i in 0..a.len() {
        a[i] *= b[i] * cell;
        if let Some(s) = symbol {
            a[i] *= s[i];
        }
    }
    spectral::inverse(grid, &mut a);
    a
}

/// Sample the ε-regularization of singular data on a periodic grid.
pub fn regularize_data(spec: &SingularDataSpec, eps: f64, grid: &GridSpec) -> Result<Field> {
    if spec.mollifier.dim != grid.dim() {
        return Err(Error::GridMismatch(format!(
            "data mollifier of dimension {} on a {}-D grid",
            spec.mollifier.dim,
            grid.dim()
        )));
    }
    let m = spec.mollifier.realize(eps)?;
    m.check_resolution(grid.min_spacing())?;
    match &spec.kind {
        SingularKind::DeltaSum(terms) => {
            for t in terms {
                if t.point.len() != grid.dim() {
                    return Err(Error::InvalidParameter("delta point dimension mismatch".into()));
                }
                if t.order > 0 && grid.dim() != 1 {
                    return Err(Error::InvalidParameter("delta derivatives need a 1-D grid".into()));
                }
            }
            let mut values = vec![0.0; grid.len()];
            for (i, v) in values.iter_mut().enumerate() {
                let x = grid.point(i);
                for t in terms {
                    let d: Vec<f64> = (0..grid.dim())
                        .map(|a| wrap(x[a] - t.point[a], grid.extent(a)))
                        .collect();
                    *v += t.coefficient
                        * if grid.dim() == 1 {
                            m.derivative(d[0], t.order as usize)
                        } else {
                            m.value(&d)
                        };
                }
            }
            Field::real(grid.clone(), values)
        }
        SingularKind::FracPower { psi, k, mode } => {
            if psi.grid() != grid {
                return Err(Error::GridMismatch("psi lives on a different grid".into()));
            }
            if !(*k > 0.0 && k.is_finite()) {
                return Err(Error::InvalidParameter(format!("|D|^k needs k > 0, got {k}")));
            }
            let f = psi.to_complex_vec();
            let out = match mode {
                FracPowerMode::Spectral => {
                    let ker = displacement_samples(&m, grid, 0)?;
                    let sym: Vec<f64> = spectral::squared_wavenumbers(grid)
                        .iter()
                        .map(|q| q.powf(0.5 * k))
                        .collect();
                    circular_convolve(grid, &f, &ker, Some(&sym))
                }
                FracPowerMode::Direct => {
                    let j = k.round();
                    if (k - j).abs() > 1e-12 || j as u32 % 2 != 0 || grid.dim() != 1 {
                        return Err(Error::InvalidParameter(
                            "direct |D|^k needs an even integer k on a 1-D grid".into(),
                        ));
                    }
                    let sign = if (j as u32 / 2) % 2 == 0 { 1.0 } else { -1.0 };
                    let ker: Vec<Complex64> = displacement_samples(&m, grid, j as u32)?
                        .into_iter()
                        .map(|z| z * sign)
                        .collect();
                    circular_convolve(grid, &f, &ker, None)
                }
            };
            finish(grid, psi.is_complex(), out)
        }
        SingularKind::Distribution { terms, interval } => {
            if grid.dim() != 1 {
                return Err(Error::InvalidParameter("distributional data needs a 1-D grid".into()));
            }
            let plateau = CutoffPlateau::new(interval.0, interval.1, eps)?;
            let coords = grid.coords(0);
            let mut total = vec![Complex64::new(0.0, 0.0); grid.len()];
            for (f, order) in terms {
                if f.grid() != grid {
                    return Err(Error::GridMismatch("distribution term on a different grid".into()));
                }
                let cut: Vec<Complex64> = f
                    .to_complex_vec()
                    .iter()
                    .zip(&coords)
                    .map(|(v, x)| v * plateau.value(*x))
                    .collect();
                let ker = displacement_samples(&m, grid, *order)?;
                for (t, v) in total.iter_mut().zip(circular_convolve(grid, &cut, &ker, None)) {
                    *t += v;
                }
            }
            let complex = terms.iter().any(|(f, _)| f.is_complex());
            finish(grid, complex, total)
        }
    }
}

fn finish(grid: &GridSpec, complex: bool, v: Vec<Complex64>) -> Result<Field> {
    if complex {
        Field::complex(grid.clone(), v)
    } else {
        Field::real(grid.clone(), v.iter().map(|z| z.re).collect())
    }
}

/// Unnormalized bump `exp(-1/(1-r²))` on `|x - center| < radius`, used for negligible shifts.
pub fn shift_bump(x: f64, center: f64, radius: f64) -> f64 {
    let r = (x - center) / radius;
    if r.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r * r)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollifier::{MomentOrder, Profile};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn power(b: f64) -> NonlinearitySpec {
        NonlinearitySpec::new(NonlinearityModel::PowerLaw { gamma: 0.5 }, b, ScaleLaw::Log)
    }

    #[test]
    fn cutoff_is_inactive_far_from_zero() {
        let g = regularize_nonlinearity(&power(0.5), 1e-8).unwrap();
        let l = ScaleLaw::Log.scale(1e-8).unwrap();
        let delta = l.powf(-1.0);
        for u in [2.0 * delta, 0.5, 3.0, -7.0] {
            assert_eq!(g.value(u), u.signum() * u.abs().sqrt());
        }
        assert_eq!(g.value(0.0), 0.0);
    }

    #[test]
    fn rejects_b_at_least_one() {
        assert!(matches!(
            regularize_nonlinearity(&power(1.0), 1e-3),
            Err(Error::GuardViolation(_))
        ));
        assert!(regularize_nonlinearity_unguarded(&power(1.2), 1e-3).is_ok());
    }

    #[test]
    fn probe_examples() {
        assert_relative_eq!(lipschitz_probe(|u| 3.0 * u, (-2.0, 2.0), 2000, 1).unwrap(), 3.0, epsilon = 1e-9);
        assert_eq!(lipschitz_probe(|_| 4.0, (-2.0, 2.0), 2000, 1).unwrap(), 0.0);
        assert!(lipschitz_probe(|u| u, (0.0, 1.0), 10, 1).is_err());
    }

    #[test]
    fn measured_lipschitz_respects_design_bounds() {
        let models = [
            NonlinearityModel::PowerLaw { gamma: 0.5 },
            NonlinearityModel::PowerLaw { gamma: 0.2 },
            NonlinearityModel::SqrtAbs,
            NonlinearityModel::PiecewiseStep,
            NonlinearityModel::SignedSquare,
            NonlinearityModel::HalfSquare,
            NonlinearityModel::Custom(vec![(-1.0, -1.0), (0.0, 0.0), (1e-3, 1.0), (2.0, 1.5)]),
        ];
        for model in models {
            let spec = NonlinearitySpec::new(model.clone(), 0.5, ScaleLaw::Log);
            for eps in [1e-2, 1e-8] {
                let g = regularize_nonlinearity(&spec, eps).unwrap();
                let lip = lipschitz_probe(|u| g.value(u), (-40.0, 40.0), 200_000, 3).unwrap();
                assert!(lip <= g.lipschitz_bound() * (1.0 + 1e-3), "{model:?} {lip} > {}", g.lipschitz_bound());
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let models = [
            NonlinearityModel::PowerLaw { gamma: 0.5 },
            NonlinearityModel::SqrtAbs,
            NonlinearityModel::PiecewiseStep,
            NonlinearityModel::SignedSquare,
            NonlinearityModel::HalfSquare,
        ];
        for model in models {
            let g = regularize_nonlinearity(&NonlinearitySpec::new(model.clone(), 0.5, ScaleLaw::Log), 1e-3).unwrap();
            for u in [-3.1, -0.2, 0.13, 0.21, 0.4, 2.9, 4.4, 6.0] {
                let h = 1e-6;
                let fd = (g.value(u + h) - g.value(u - h)) / (2.0 * h);
                assert!((fd - g.derivative(u)).abs() < 1e-5 * (1.0 + fd.abs()), "{model:?} at {u}");
            }
        }
    }

    #[test]
    fn superlinear_models_are_exact_below_cap() {
        let spec = NonlinearitySpec::new(NonlinearityModel::HalfSquare, 0.5, ScaleLaw::Log);
        let g = regularize_nonlinearity(&spec, 1e-4).unwrap();
        let cap = ScaleLaw::Log.scale(1e-4).unwrap().sqrt();
        for u in [-cap, -1.0, 0.5, cap * 0.99] {
            assert_relative_eq!(g.value(u), 0.5 * u * u, max_relative = 1e-14);
        }
    }

    #[test]
    fn delta_data_norms() {
        let spec = SingularDataSpec::delta(vec![0.0], MollifierSpec::bump(1));
        let grid = GridSpec::line(-4.0, 4.0, 1 << 14).unwrap();
        for eps in [1e-2, 1e-6, 1e-12] {
            let f = regularize_data(&spec, eps, &grid).unwrap();
            assert_relative_eq!(f.lp_norm(1.0).unwrap(), 1.0, max_relative = 1e-5);
        }
    }

    #[test]
    fn spectral_and_direct_agree_for_even_k() {
        // the bump's edges need several hundred points across its support for D²
        let grid = GridSpec::line(-8.0, 8.0, 1 << 15).unwrap();
        let psi = Field::from_fn(grid.clone(), |x| (-x[0] * x[0]).exp()).unwrap();
        let mk = |mode| SingularDataSpec {
            kind: SingularKind::FracPower { psi: psi.clone(), k: 2.0, mode },
            mollifier: MollifierSpec::bump(1),
        };
        let a = regularize_data(&mk(FracPowerMode::Spectral), 1e-2, &grid).unwrap();
        let b = regularize_data(&mk(FracPowerMode::Direct), 1e-2, &grid).unwrap();
        let diff = a.sub(&b).unwrap().lp_norm(f64::INFINITY).unwrap();
        assert!(diff < 1e-6, "{diff}");
        // oracle: -(e^{-x²})'' = (2 - 4x²) e^{-x²} at x = 0 is 2, smoothed slightly
        let centre = a.as_real().unwrap()[1 << 14];
        assert!((centre - 2.0).abs() < 0.1);
        let odd = SingularDataSpec {
            kind: SingularKind::FracPower { psi, k: 1.0, mode: FracPowerMode::Direct },
            mollifier: MollifierSpec::bump(1),
        };
        assert!(regularize_data(&odd, 1e-4, &grid).is_err());
    }

    #[test]
    fn distribution_of_derivative() {
        // g = D f with f = sin on (−3, 3): inside the plateau g_ε ≈ cos.
        let grid = GridSpec::line(-8.0, 8.0, 4096).unwrap();
        let f = Field::from_fn(grid.clone(), |x| x[0].sin()).unwrap();
        let spec = SingularDataSpec {
            kind: SingularKind::Distribution { terms: vec![(f, 1)], interval: (-3.0, 3.0) },
            mollifier: MollifierSpec::bump(1).with_profile(Profile::MomentVanishing(MomentOrder::Finite(2))),
        };
        let g = regularize_data(&spec, 1e-10, &grid).unwrap();
        for (x, v) in grid.coords(0).iter().zip(g.as_real().unwrap()) {
            if x.abs() < 2.0 {
                assert!((v - x.cos()).abs() < 1e-3, "{x} {v}");
            }
        }
    }

    proptest! {
        #[test]
        fn odd_models_vanish_at_zero_and_are_odd(u in -5.0f64..5.0, eps_exp in 2i32..12) {
            let eps = 10f64.powi(-eps_exp);
            for model in [NonlinearityModel::PowerLaw { gamma: 0.3 }, NonlinearityModel::PiecewiseStep, NonlinearityModel::SignedSquare] {
                let g = regularize_nonlinearity(&NonlinearitySpec::new(model, 0.4, ScaleLaw::Log), eps).unwrap();
                prop_assert_eq!(g.value(0.0), 0.0);
                prop_assert!((g.value(u) + g.value(-u)).abs() <= 1e-12 * (1.0 + g.value(u).abs()));
            }
        }

        #[test]
        fn consistency_away_from_zero(u in 0.08f64..5.0) {
            let g = regularize_nonlinearity(&power(0.5), 1e-12).unwrap();
            prop_assert!((g.value(u) - u.sqrt()).abs() < 1e-12);
        }
    }
}
