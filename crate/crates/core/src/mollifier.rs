//! Delta sequences `φ_ε(x) = L(ε)^{a n} φ(x L(ε))` and cut-off plateaus.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::special::{bump_jet, factorial, hermite, integrate_panels, smooth_step};

/// How the scale `L(ε)` grows as `ε → 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaleLaw {
    /// `|ln ε|` on `(0, 1)`.
    Log,
    /// `ln|ln ε|` on `(0, e^{-1})`.
    LogLog,
    /// `ε^{-γ}` on `(0, 1)`.
    Power { gamma: f64 },
}

impl ScaleLaw {
    /// Largest admissible ε (exclusive).
    pub fn upper_limit(&self) -> f64 {
        match self {
            ScaleLaw::LogLog => (-1.0f64).exp(),
            _ => 1.0,
        }
    }

    pub fn validate(&self, eps: f64) -> Result<()> {
        if let ScaleLaw::Power { gamma } = self {
            if !(gamma.is_finite() && *gamma > 0.0) {
                return Err(Error::InvalidParameter(format!("power scale needs gamma > 0, got {gamma}")));
            }
        }
        if !(eps > 0.0 && eps < self.upper_limit()) {
            return Err(Error::Domain(format!(
                "eps = {eps} outside (0, {:.6}) for {self:?} scale",
                self.upper_limit()
            )));
        }
        Ok(())
    }

    /// `L(ε)`.
    pub fn scale(&self, eps: f64) -> Result<f64> {
        self.validate(eps)?;
        Ok(match self {
            ScaleLaw::Log => eps.ln().abs(),
            ScaleLaw::LogLog => eps.ln().abs().ln(),
            ScaleLaw::Power { gamma } => eps.powf(-gamma),
        })
    }
}

/// Number of vanishing moments of a moment-vanishing profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentOrder {
    Finite(u32),
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// `c exp(-1/(1-|x|²))` on the unit ball.
    Bump,
    MomentVanishing(MomentOrder),
}

/// Profile, scale law, amplitude exponent `a` and dimension of a delta sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierSpec {
    pub profile: Profile,
    pub scale: ScaleLaw,
    pub amplitude: f64,
    pub dim: usize,
}

impl MollifierSpec {
    pub fn new(profile: Profile, scale: ScaleLaw, amplitude: f64, dim: usize) -> Result<Self> {
        let spec = Self {
            profile,
            scale,
            amplitude,
            dim,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Unit-mass bump with logarithmic scale.
    pub fn bump(dim: usize) -> Self {
        Self {
            profile: Profile::Bump,
            scale: ScaleLaw::Log,
            amplitude: 1.0,
            dim,
        }
    }

    pub fn with_profile(mut self, profile: Profile) -> Self {
        self.profile = profile;
        self
    }

    pub fn with_scale(mut self, scale: ScaleLaw) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "amplitude exponent a = {} must be > 0",
                self.amplitude
            )));
        }
        if self.dim == 0 || self.dim > 2 {
            return Err(Error::InvalidParameter(format!("dimension {} not in {{1, 2}}", self.dim)));
        }
        if let Profile::MomentVanishing(MomentOrder::Finite(0)) = self.profile {
            return Err(Error::InvalidParameter("moment order must be >= 1".into()));
        }
        Ok(())
    }

    pub fn realize(&self, eps: f64) -> Result<Mollifier> {
        self.validate()?;
        let scale = self.scale.scale(eps)?;
        Ok(Mollifier {
            spec: *self,
            eps,
            scale,
        })
    }
}

/// A delta-sequence member at a fixed ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    spec: MollifierSpec,
    eps: f64,
    scale: f64,
}

impl Mollifier {
    pub fn spec(&self) -> &MollifierSpec {
        &self.spec
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `L(ε)`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Radius outside which `φ_ε` is zero (bump) or below 1e-16 relative.
    pub fn support_radius(&self) -> f64 {
        profile_radius(self.spec.profile) / self.scale
    }

    /// `∫ φ_ε = L^{n(a-1)}`.
    pub fn mass(&self) -> f64 {
        self.scale.powf(self.spec.dim as f64 * (self.spec.amplitude - 1.0))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let n = self.spec.dim as f64;
        let amp = self.scale.powf(self.spec.amplitude * n);
        let y: Vec<f64> = x.iter().map(|v| v * self.scale).collect();
        amp * profile_value(self.spec.profile, &y)
    }

    /// `φ_ε^{(k)}(x)` for one-dimensional mollifiers.
    pub fn derivative(&self, x: f64, k: usize) -> f64 {
        let amp = self.scale.powf(self.spec.amplitude + k as f64);
        amp * profile_derivative(self.spec.profile, x * self.scale, k)
    }

    pub fn sample(&self, grid: &GridSpec) -> Result<Field> {
        if grid.dim() != self.spec.dim {
            return Err(Error::GridMismatch(format!(
                "mollifier of dimension {} on a {}-D grid",
                self.spec.dim,
                grid.dim()
            )));
        }
        self.check_resolution(grid.min_spacing())?;
        Field::from_fn(grid.clone(), |x| self.value(x))
    }

    /// Reject spacings coarser than an eighth of the width `2/L`.
    pub fn check_resolution(&self, h: f64) -> Result<()> {
        let width = 2.0 / self.scale;
        if h > width / 8.0 {
            return Err(Error::UnderResolved(format!(
                "mollifier width {width:.3e} needs spacing <= {:.3e}, got {h:.3e}",
                width / 8.0
            )));
        }
        Ok(())
    }
}

/// Sample `φ_ε` on a grid.
pub fn sample_mollifier(spec: &MollifierSpec, eps: f64, grid: &GridSpec) -> Result<Field> {
    spec.realize(eps)?.sample(grid)
}

/// `‖D^k φ_ε‖_1` for a one-dimensional mollifier, by quadrature over its support.
pub fn mollifier_derivative_l1(spec: &MollifierSpec, eps: f64, k: usize) -> Result<f64> {
    if spec.dim != 1 {
        return Err(Error::InvalidParameter(
            "derivative norms are available for one-dimensional mollifiers".into(),
        ));
    }
    let m = spec.realize(eps)?;
    let r = m.support_radius();
    let base = profile_radius(spec.profile);
    let points = (8192.0 * (k as f64 + 1.0)).max(16.0 * base) as usize;
    let h = 2.0 * r / points as f64;
    let mut s = 0.0;
    for j in 0..=points {
        let x = -r + j as f64 * h;
        let w = if j == 0 || j == points { 0.5 } else { 1.0 };
        s += w * m.derivative(x, k).abs();
    }
    Ok(s * h)
}

/// Smooth cut-off `κ_ε`: 1 on `(lo+2ε, hi-2ε)`, 0 outside `(lo+ε, hi-ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPlateau {
    lo: f64,
    hi: f64,
    eps: f64,
}

impl CutoffPlateau {
    pub fn new(lo: f64, hi: f64, eps: f64) -> Result<Self> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("plateau eps = {eps}")));
        }
        if !(hi - lo > 4.0 * eps) {
            return Err(Error::InvalidParameter(format!(
                "interval ({lo}, {hi}) too short for eps = {eps}: need hi - lo > 4 eps"
            )));
        }
        Ok(Self { lo, hi, eps })
    }

    pub fn value(&self, x: f64) -> f64 {
        if self.eps == 0.0 {
            return if x > self.lo && x < self.hi { 1.0 } else { 0.0 };
        }
        let e = self.eps;
        if x <= self.lo + e || x >= self.hi - e {
            return 0.0;
        }
        let left = smooth_step((x - self.lo - e) / e);
        let right = smooth_step((self.hi - e - x) / e);
        left.min(right)
    }
}

/// Sample `κ_ε` on a one-dimensional grid.
pub fn sample_plateau(plateau: &CutoffPlateau, grid: &GridSpec) -> Result<Field> {
    if grid.dim() != 1 {
        return Err(Error::GridMismatch("plateaus live on 1-D grids".into()));
    }
    Field::from_fn(grid.clone(), |x| plateau.value(x[0]))
}

fn bump_raw(r2: f64) -> f64 {
    if r2 >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - r2;
    if 1.0 / q > 700.0 {
        0.0
    } else {
        (-1.0 / q).exp()
    }
}

fn bump_norm(dim: usize) -> f64 {
    static N1: OnceLock<f64> = OnceLock::new();
    static N2: OnceLock<f64> = OnceLock::new();
    match dim {
        1 => *N1.get_or_init(|| 1.0 / integrate_panels(|x| bump_raw(x * x), -1.0, 1.0, 256)),
        // 2π ∫ r f(r) dr = π ∫_0^1 f(√u) du
        _ => *N2.get_or_init(|| 1.0 / (PI * integrate_panels(bump_raw, 0.0, 1.0, 256))),
    }
}

fn hermite_terms(order: u32) -> usize {
    (order / 2) as usize
}

fn hermite_profile(x: f64, terms: usize, k: usize) -> f64 {
    let g = (-x * x).exp() / PI.sqrt();
    if g == 0.0 {
        return 0.0;
    }
    let mut s = 0.0;
    for j in 0..=terms {
        let c = (-1.0f64).powi(j as i32) / (4f64.powi(j as i32) * factorial(j));
        s += c * hermite(2 * j + k, x);
    }
    let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
    sign * g * s
}

/// `χ(ξ)`: 1 on `[0, 1]`, smooth decay to 0 at 2.
fn band_window(xi: f64) -> f64 {
    1.0 - smooth_step(xi - 1.0)
}

/// `φ^{(k)}(x) = (1/π) ∫_0^2 χ(ξ) ξ^k cos(ξ x + kπ/2) dξ`.
fn band_profile(x: f64, k: usize) -> f64 {
    let panels = 2 + (x.abs() / 2.0).ceil() as usize;
    let shift = k as f64 * PI / 2.0;
    let f = |xi: f64| xi.powi(k as i32) * (xi * x + shift).cos();
    let flat = integrate_panels(f, 0.0, 1.0, panels);
    let ramp = integrate_panels(|xi| band_window(xi) * f(xi), 1.0, 2.0, panels);
    (flat + ramp) / PI
}

const BAND_RADIUS: f64 = 700.0;

fn profile_radius(profile: Profile) -> f64 {
    static HERMITE_RADII: OnceLock<Vec<f64>> = OnceLock::new();
    match profile {
        Profile::Bump => 1.0,
        Profile::MomentVanishing(MomentOrder::All) => BAND_RADIUS,
        Profile::MomentVanishing(MomentOrder::Finite(m)) => {
            let terms = hermite_terms(m);
            let radii = HERMITE_RADII.get_or_init(|| (0..=16).map(hermite_radius).collect());
            if terms < radii.len() {
                radii[terms]
            } else {
                hermite_radius(terms)
            }
        }
    }
}

fn hermite_radius(terms: usize) -> f64 {
    let mut x = 3.0;
    loop {
        let worst = (0..=4)
            .map(|k| hermite_profile(x, terms, k).abs())
            .fold(0.0, f64::max);
        if worst < 1e-17 {
            return x;
        }
        x += 0.25;
    }
}

fn profile_value(profile: Profile, y: &[f64]) -> f64 {
    match profile {
        Profile::Bump => {
            let r2: f64 = y.iter().map(|v| v * v).sum();
            bump_norm(y.len()) * bump_raw(r2)
        }
        Profile::MomentVanishing(_) => y.iter().map(|&v| profile_derivative(profile, v, 0)).product(),
    }
}

fn profile_derivative(profile: Profile, y: f64, k: usize) -> f64 {
    match profile {
        Profile::Bump => {
            if y.abs() >= 1.0 {
                return 0.0;
            }
            bump_norm(1) * bump_jet(y, k)[k] * factorial(k)
        }
        Profile::MomentVanishing(MomentOrder::Finite(m)) => {
            if y.abs() > profile_radius(profile) {
                return 0.0;
            }
            hermite_profile(y, hermite_terms(m), k)
        }
        Profile::MomentVanishing(MomentOrder::All) => {
            if y.abs() > BAND_RADIUS {
                return 0.0;
            }
            band_profile(y, k)
        }
    }
}
