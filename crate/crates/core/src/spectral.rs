//! FFT plumbing for periodic grids.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::GridSpec;

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Angular wavenumbers of an axis in FFT order. The Nyquist mode is negative.
pub fn wavenumbers(grid: &GridSpec, axis: usize) -> Vec<f64> {
    let n = grid.points(axis);
    let base = 2.0 * PI / grid.extent(axis);
    (0..n)
        .map(|j| {
            let k = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
            base * k
        })
        .collect()
}

/// True for the Nyquist index of an axis.
pub fn is_nyquist(grid: &GridSpec, axis: usize, j: usize) -> bool {
    j == grid.points(axis) / 2
}

fn transform(grid: &GridSpec, data: &mut [Complex64], forward: bool) {
    let pick = |p: Plans| if forward { p.0 } else { p.1 };
    match grid.dim() {
        1 => pick(plans(grid.points(0))).process(data),
        _ => {
            let (n0, n1) = (grid.points(0), grid.points(1));
            pick(plans(n1)).process(data);
            let fft0 = pick(plans(n0));
            let mut col = vec![Complex64::new(0.0, 0.0); n0];
            for c in 0..n1 {
                for r in 0..n0 {
                    col[r] = data[r * n1 + c];
                }
                fft0.process(&mut col);
                for r in 0..n0 {
                    data[r * n1 + c] = col[r];
                }
            }
        }
    }
}

/// Unnormalized forward DFT in place.
pub fn forward(grid: &GridSpec, data: &mut [Complex64]) {
    transform(grid, data, true);
}

/// Inverse DFT in place, normalized so that `inverse(forward(x)) = x`.
pub fn inverse(grid: &GridSpec, data: &mut [Complex64]) {
    transform(grid, data, false);
    let scale = 1.0 / grid.len() as f64;
    for z in data.iter_mut() {
        *z *= scale;
    }
}

/// `|ξ|²` for every mode, in storage order.
pub fn squared_wavenumbers(grid: &GridSpec) -> Vec<f64> {
    let k0 = wavenumbers(grid, 0);
    match grid.dim() {
        1 => k0.iter().map(|k| k * k).collect(),
        _ => {
            let k1 = wavenumbers(grid, 1);
            let mut out = Vec::with_capacity(grid.len());
            for a in &k0 {
                for b in &k1 {
                    out.push(a * a + b * b);
                }
            }
            out
        }
    }
}

/// Multiplier of `Σ_axes ∂_axis` with Nyquist modes zeroed.
pub fn divergence_symbol(grid: &GridSpec) -> Vec<Complex64> {
    let mut per_axis = Vec::new();
    for axis in 0..grid.dim() {
        let k = wavenumbers(grid, axis);
        per_axis.push(
            k.iter()
                .enumerate()
                .map(|(j, &v)| if is_nyquist(grid, axis, j) { 0.0 } else { v })
                .collect::<Vec<_>>(),
        );
    }
    match grid.dim() {
        1 => per_axis[0].iter().map(|&k| Complex64::new(0.0, k)).collect(),
        _ => {
            let mut out = Vec::with_capacity(grid.len());
            for a in &per_axis[0] {
                for b in &per_axis[1] {
                    out.push(Complex64::new(0.0, a + b));
                }
            }
            out
        }
    }
}

/// Multiplier of `∂_0^k` (axis 0), Nyquist zeroed for odd `k`.
pub fn axis0_derivative_symbol(grid: &GridSpec, k: u32) -> Vec<Complex64> {
    let k0 = wavenumbers(grid, 0);
    let i = Complex64::new(0.0, 1.0);
    let per: Vec<Complex64> = k0
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            if k % 2 == 1 && is_nyquist(grid, 0, j) {
                Complex64::new(0.0, 0.0)
            } else {
                (i * v).powu(k)
            }
        })
        .collect();
    match grid.dim() {
        1 => per,
        _ => {
            let n1 = grid.points(1);
            per.iter()
                .flat_map(|&m| std::iter::repeat_n(m, n1))
                .collect()
        }
    }
}
