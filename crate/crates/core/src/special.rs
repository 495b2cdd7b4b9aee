//! Special functions and quadrature helpers shared by the numerical modules.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Gamma function.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite(n: usize, x: f64) -> f64 {
    let mut h0 = 1.0;
    if n == 0 {
        return h0;
    }
    let mut h1 = 2.0 * x;
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Real roots of `H_n`, ascending.
pub fn hermite_roots(n: usize) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    // All roots lie inside |x| < sqrt(2n + 1).
    let bound = (2.0 * n as f64 + 1.0).sqrt() + 0.5;
    let steps = 2000 * n;
    let dx = 2.0 * bound / steps as f64;
    let mut roots = Vec::with_capacity(n);
    let mut a = -bound;
    let mut fa = hermite(n, a);
    for i in 1..=steps {
        let b = -bound + i as f64 * dx;
        let fb = hermite(n, b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            roots.push(bisect(|x| hermite(n, x), a, b));
        }
        a = b;
        fa = fb;
    }
    roots.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    roots
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a) < 1e-15 * (1.0 + m.abs()) {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// `2^-β / √π · ∫ |H_β(y)| e^{-y²} dy`, the constant in `‖∂^β E₁(t)‖₁ = c_β t^{-β/2}`.
///
/// Exact up to rounding: between consecutive roots the integrand has the
/// antiderivative `-H_{β-1}(y) e^{-y²}`.
pub fn heat_norm_constant(beta: u32) -> f64 {
    let n = beta as usize;
    if n == 0 {
        return 1.0;
    }
    let roots = hermite_roots(n);
    let prim = |y: f64| -hermite(n - 1, y) * (-y * y).exp();
    let mut pts = vec![f64::NEG_INFINITY];
    pts.extend(roots);
    pts.push(f64::INFINITY);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let pa = if w[0].is_finite() { prim(w[0]) } else { 0.0 };
        let pb = if w[1].is_finite() { prim(w[1]) } else { 0.0 };
        total += (pb - pa).abs();
    }
    total / (2f64.powi(beta as i32) * PI.sqrt())
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Composite 16-point Gauss-Legendre quadrature over `panels` equal panels.
pub fn integrate_panels(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gl16();
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + 0.5 * width;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(w) {
            s += wi * f(mid + 0.5 * width * xi);
        }
        total += 0.5 * width * s;
    }
    total
}

fn psi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`, C-infinity in between.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = psi(x);
        a / (a + psi(1.0 - x))
    }
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_derivative(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let a = psi(x);
    let b = psi(1.0 - x);
    let da = a / (x * x);
    let db = b / ((1.0 - x) * (1.0 - x));
    (da * b + a * db) / ((a + b) * (a + b))
}

const RAMP_TABLE: usize = 4096;

fn ramp_table() -> &'static Vec<f64> {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let h = 1.0 / RAMP_TABLE as f64;
        let mut v = vec![0.0; RAMP_TABLE + 1];
        for i in 0..RAMP_TABLE {
            let a = i as f64 * h;
            v[i + 1] = v[i] + integrate_panels(|y| 1.0 - smooth_step(y), a, a + h, 1);
        }
        v
    })
}

/// `∫_0^x (1 - S(y)) dy`; saturates at 1/2 for `x >= 1`.
pub fn smooth_ramp(x: f64) -> f64 {
    if x <= 0.0 {
        return x;
    }
    let table = ramp_table();
    if x >= 1.0 {
        return table[RAMP_TABLE];
    }
    // Cubic Hermite interpolation with the exact derivative 1 - S.
    let h = 1.0 / RAMP_TABLE as f64;
    let i = ((x / h) as usize).min(RAMP_TABLE - 1);
    let a = i as f64 * h;
    let s = (x - a) / h;
    let (y0, y1) = (table[i], table[i + 1]);
    let d0 = 1.0 - smooth_step(a);
    let d1 = 1.0 - smooth_step(a + h);
    let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
    let h10 = s.powi(3) - 2.0 * s * s + s;
    let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
    let h11 = s.powi(3) - s * s;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Taylor coefficients `f^{(k)}(x)/k!`, `k = 0..=order`, of `exp(-1/(1-x²))` at `|x| < 1`.
pub fn bump_jet(x: f64, order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    let q0 = 1.0 - x * x;
    if q0 <= 0.0 || 1.0 / q0 > 700.0 {
        return out;
    }
    // q(s) = q0 - 2x s - s²; r = 1/q as a series.
    let q = [q0, -2.0 * x, -1.0];
    let mut r = vec![0.0; order + 1];
    r[0] = 1.0 / q0;
    for k in 1..=order {
        let mut s = 0.0;
        for j in 1..=k.min(2) {
            s += q[j] * r[k - j];
        }
        r[k] = -s / q0;
    }
    out[0] = (-r[0]).exp();
    for k in 1..=order {
        let mut s = 0.0;
        for j in 1..=k {
            s += j as f64 * r[j] * out[k - j];
        }
        out[k] = -s / k as f64;
    }
    out
}

/// `n!` as a float.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
