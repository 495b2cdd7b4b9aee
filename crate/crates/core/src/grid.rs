//! Uniform periodic grids, sampled fields and discrete norms.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform periodic grid on a box `[lo, hi)` in one or two dimensions.
///
/// Nodes are `lo + j h` with `h = (hi - lo) / points`; 2-D fields are stored
/// row-major with axis 0 slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    lo: Vec<f64>,
    hi: Vec<f64>,
    points: Vec<usize>,
}

impl GridSpec {
    pub fn new(lo: &[f64], hi: &[f64], points: &[usize]) -> Result<Self> {
        let dim = points.len();
        if dim == 0 || dim > 2 || lo.len() != dim || hi.len() != dim {
            return Err(Error::InvalidGrid("dimension must be 1 or 2".into()));
        }
        for axis in 0..dim {
            if !(lo[axis].is_finite() && hi[axis].is_finite()) || hi[axis] <= lo[axis] {
                return Err(Error::InvalidGrid(format!("axis {axis}: need lo < hi")));
            }
            let n = points[axis];
            if n < 8 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: {n} points, need a power of two >= 8"
                )));
            }
        }
        Ok(Self {
            lo: lo.to_vec(),
            hi: hi.to_vec(),
            points: points.to_vec(),
        })
    }

    pub fn line(lo: f64, hi: f64, points: usize) -> Result<Self> {
        Self::new(&[lo], &[hi], &[points])
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self, axis: usize) -> usize {
        self.points[axis]
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.lo[axis]
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.hi[axis]
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extent(axis) / self.points[axis] as f64
    }

    /// Finest spacing over all axes.
    pub fn min_spacing(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coords(&self, axis: usize) -> Vec<f64> {
        let h = self.spacing(axis);
        (0..self.points[axis])
            .map(|j| self.lo[axis] + j as f64 * h)
            .collect()
    }

    /// Coordinates of the node with flat index `index`.
    pub fn point(&self, index: usize) -> Vec<f64> {
        match self.dim() {
            1 => vec![self.lo[0] + index as f64 * self.spacing(0)],
            _ => {
                let n1 = self.points[1];
                let (i0, i1) = (index / n1, index % n1);
                vec![
                    self.lo[0] + i0 as f64 * self.spacing(0),
                    self.lo[1] + i1 as f64 * self.spacing(1),
                ]
            }
        }
    }
}

/// Sample storage of a field.
#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// Samples of a real or complex function on a [`GridSpec`]. All samples are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    samples: Samples,
}

impl Field {
    pub fn real(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            grid,
            samples: Samples::Real(values),
        })
    }

    pub fn complex(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            grid,
            samples: Samples::Complex(values),
        })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self::real(grid, values)
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.len();
        Self {
            grid,
            samples: Samples::Real(vec![0.0; n]),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &Samples {
        &self.samples
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.samples, Samples::Complex(_))
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match &self.samples {
            Samples::Real(v) => Some(v),
            Samples::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&[Complex64]> {
        match &self.samples {
            Samples::Complex(v) => Some(v),
            Samples::Real(_) => None,
        }
    }

    /// Samples promoted to complex values.
    pub fn to_complex_vec(&self) -> Vec<Complex64> {
        match &self.samples {
            Samples::Real(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            Samples::Complex(v) => v.clone(),
        }
    }

    pub fn moduli(&self) -> Vec<f64> {
        match &self.samples {
            Samples::Real(v) => v.iter().map(|x| x.abs()).collect(),
            Samples::Complex(v) => v.iter().map(|z| z.norm()).collect(),
        }
    }

    /// Pointwise difference `self - other`.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        match (&self.samples, &other.samples) {
            (Samples::Real(a), Samples::Real(b)) => Field::real(
                self.grid.clone(),
                a.iter().zip(b).map(|(x, y)| x - y).collect(),
            ),
            _ => {
                let a = self.to_complex_vec();
                let b = other.to_complex_vec();
                Field::complex(
                    self.grid.clone(),
                    a.iter().zip(&b).map(|(x, y)| x - y).collect(),
                )
            }
        }
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm(self, p)
    }
}

fn check_len(grid: &GridSpec, n: usize) -> Result<()> {
    if n != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{n} samples for a grid of {} nodes",
            grid.len()
        )));
    }
    Ok(())
}

/// Discrete `L^p` norm `(h^n Σ|f|^p)^{1/p}`; `p = ∞` gives the max modulus.
/// For `p < 1` this is the quasi-norm.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    moduli_lp(&f.moduli(), f.grid().cell_volume(), p)
}

pub(crate) fn moduli_lp(m: &[f64], cell: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::InvalidParameter(format!("p = {p}, need p > 0")));
    }
    if p.is_infinite() {
        return Ok(m.iter().fold(0.0, |a: f64, &b| a.max(b)));
    }
    // Scale by the max to keep p-th powers in range.
    let top = m.iter().fold(0.0, |a: f64, &b| a.max(b));
    if top == 0.0 {
        return Ok(0.0);
    }
    let mut s = 0.0;
    for &v in m {
        s += (v / top).powf(p);
    }
    Ok(top * (cell * s).powf(1.0 / p))
}

/// `sup_{t ≥ t1} ‖∂_t u(t)‖_p` over a uniformly spaced history, using central
/// differences at the interior samples of `[t1, T)`.
pub fn time_derivative_seminorm(history: &[(f64, Field)], t1: f64, p: f64) -> Result<f64> {
    let start = history
        .iter()
        .position(|(t, _)| *t >= t1 - 1e-12 * (1.0 + t1.abs()))
        .ok_or_else(|| Error::InvalidParameter("no samples after t1".into()))?;
    let tail = &history[start..];
    if tail.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "need >= 3 samples in [t1, T), found {}",
            tail.len()
        )));
    }
    let dt = tail[1].0 - tail[0].0;
    if dt <= 0.0 {
        return Err(Error::InvalidParameter("history times not increasing".into()));
    }
    for w in tail.windows(2) {
        if ((w[1].0 - w[0].0) - dt).abs() > 1e-9 * dt {
            return Err(Error::InvalidParameter("history times not uniform".into()));
        }
    }
    let mut best = 0.0f64;
    for i in 1..tail.len() - 1 {
        let diff = tail[i + 1].1.sub(&tail[i - 1].1)?;
        let norm = lp_norm(&diff, p)? / (2.0 * dt);
        best = best.max(norm);
    }
    Ok(best)
}

/// Both sides of `‖f‖_r ≤ ‖f‖_1^{1-θ} ‖f‖_2^θ` with `r = p/(p+1)`.
///
/// For `r < 1` the left side is the quasi-norm `(h Σ|f|^r)^{1/r}`. Nothing is
/// asserted; callers report the pair.
pub fn interpolation_check(f: &Field, p: f64, theta: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!("theta = {theta} outside [0, 1]")));
    }
    if p.is_nan() || p <= 0.0 {
        return Err(Error::InvalidParameter(format!("p = {p}")));
    }
    let m = f.moduli();
    let cell = f.grid().cell_volume();
    let r = if p.is_infinite() { 1.0 } else { p / (p + 1.0) };
    let lhs = moduli_lp(&m, cell, r)?;
    let l1 = moduli_lp(&m, cell, 1.0)?;
    let l2 = moduli_lp(&m, cell, 2.0)?;
    Ok((lhs, l1.powf(1.0 - theta) * l2.powf(theta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::line(0.0, 1.0, 100).is_err());
        assert!(GridSpec::line(1.0, 0.0, 64).is_err());
        assert!(GridSpec::line(0.0, 1.0, 4).is_err());
        assert!(GridSpec::new(&[0.0; 3], &[1.0; 3], &[8; 3]).is_err());
    }

    #[test]
    fn rejects_non_finite_samples() {
        let g = GridSpec::line(0.0, 1.0, 8).unwrap();
        let mut v = vec![0.0; 8];
        v[5] = f64::NAN;
        assert_eq!(Field::real(g, v), Err(Error::NonFinite { index: 5 }));
    }

    #[test]
    fn gaussian_norms() {
        let g = GridSpec::line(-20.0, 20.0, 4096).unwrap();
        let f = Field::from_fn(g, |x| (-x[0] * x[0]).exp()).unwrap();
        assert_relative_eq!(f.lp_norm(1.0).unwrap(), PI.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(f.lp_norm(f64::INFINITY).unwrap(), 1.0);
        assert_relative_eq!(
            f.lp_norm(2.0).unwrap(),
            (PI / 2.0).sqrt().sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn two_dimensional_norm() {
        let g = GridSpec::new(&[-10.0, -10.0], &[10.0, 10.0], &[256, 256]).unwrap();
        let f = Field::from_fn(g, |x| (-x[0] * x[0] - x[1] * x[1]).exp()).unwrap();
        assert_relative_eq!(f.lp_norm(1.0).unwrap(), PI, max_relative = 1e-10);
    }

    #[test]
    fn seminorm_of_sine_in_time() {
        let g = GridSpec::line(0.0, 2.0 * PI, 64).unwrap();
        let dt = 1e-3;
        let history: Vec<(f64, Field)> = (0..1000)
            .map(|k| {
                let t = k as f64 * dt;
                let f = Field::from_fn(g.clone(), |x| t.sin() * x[0].sin()).unwrap();
                (t, f)
            })
            .collect();
        let sup = time_derivative_seminorm(&history, 0.25, f64::INFINITY).unwrap();
        // first interior sample is t = 0.251; central differences lose a factor 1 - dt²/6
        assert_relative_eq!(sup, 0.251f64.cos() * (1.0 - dt * dt / 6.0), max_relative = 1e-9);
    }

    #[test]
    fn interpolation_of_indicator() {
        let g = GridSpec::line(-2.0, 2.0, 1024).unwrap();
        let f = Field::from_fn(g.clone(), |x| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap();
        let (lhs, rhs) = interpolation_check(&f, 2.0, 0.3).unwrap();
        assert_relative_eq!(lhs, 1.0, max_relative = 1e-12);
        assert_relative_eq!(rhs, 1.0, max_relative = 1e-12);
        assert_eq!(interpolation_check(&Field::zeros(g), 2.0, 0.5).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn ramp_history_has_unit_derivative() {
        let g = GridSpec::line(0.0, 1.0, 8).unwrap();
        let h: Vec<(f64, Field)> = (0..20)
            .map(|k| {
                let t = k as f64 * 0.05;
                (t, Field::from_fn(g.clone(), |_| t).unwrap())
            })
            .collect();
        let v = time_derivative_seminorm(&h, 0.0, f64::INFINITY).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn seminorm_needs_three_samples() {
        let g = GridSpec::line(0.0, 1.0, 8).unwrap();
        let h = vec![(0.0, Field::zeros(g.clone())), (0.1, Field::zeros(g))];
        assert!(time_derivative_seminorm(&h, 0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn interpolation_inequality_holds(
            vals in proptest::collection::vec(-5.0f64..5.0, 16),
            p in 1.0f64..6.0,
        ) {
            let g = GridSpec::line(0.0, 1.0, 16).unwrap();
            let f = Field::real(g, vals).unwrap();
            let (lhs, rhs) = interpolation_check(&f, p, 0.5).unwrap();
            prop_assert!(lhs.is_finite() && rhs.is_finite() && lhs >= 0.0 && rhs >= 0.0);
        }

        #[test]
        fn norm_is_homogeneous(vals in proptest::collection::vec(-5.0f64..5.0, 8), c in -4.0f64..4.0) {
            let g = GridSpec::line(0.0, 1.0, 8).unwrap();
            let f = Field::real(g.clone(), vals.clone()).unwrap();
            let cf = Field::real(g, vals.iter().map(|v| c * v).collect()).unwrap();
            let a = cf.lp_norm(2.0).unwrap();
            let b = c.abs() * f.lp_norm(2.0).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
        }
    }
}
