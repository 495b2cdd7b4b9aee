//! ε-schedules, growth-law fitting, calibrated envelope checks and
//! moderate/negligible classification of ε-families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mollifier::ScaleLaw;

/// Strictly decreasing ε values in `(0, e^{-1})`, at least five of them.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsSchedule(Vec<f64>);

impl EpsSchedule {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySchedule);
        }
        if values.len() < 5 {
            return Err(Error::InvalidParameter(format!(
                "schedule has {} points; need >= 5",
                values.len()
            )));
        }
        let top = (-1.0f64).exp();
        for (i, &e) in values.iter().enumerate() {
            if !(e > 0.0 && e < top) {
                return Err(Error::Domain(format!("schedule entry {i} = {e} outside (0, 1/e)")));
            }
            if i > 0 && e >= values[i - 1] {
                return Err(Error::InvalidParameter("schedule must be strictly decreasing".into()));
            }
        }
        Ok(Self(values))
    }

    /// `10^{-from}, …, 10^{-to}`.
    pub fn decades(from: i32, to: i32) -> Result<Self> {
        Self::new((from..=to).map(|k| 10f64.powi(-k)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn validate_for(&self, scale: &ScaleLaw) -> Result<()> {
        self.0.iter().try_for_each(|&e| scale.validate(e))
    }
}

impl Default for EpsSchedule {
    /// `1e-2, 1e-3, …, 1e-12`.
    fn default() -> Self {
        Self((2..=12).map(|k| 10f64.powi(-k)).collect())
    }
}

/// Evaluate `f` at every ε of a schedule on the rayon pool; rows keep schedule order.
pub fn sweep<T: Send>(
    schedule: &EpsSchedule,
    f: impl Fn(f64) -> Result<T> + Sync,
) -> Result<Vec<(f64, T)>> {
    schedule
        .values()
        .par_iter()
        .map(|&e| f(e).map(|v| (e, v)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GrowthModel {
    Bounded,
    /// `(ln|ln ε|)^m`; only ever confirmed through envelopes.
    LogLogPower,
    /// `|ln ε|^m`.
    LogPower,
    /// `ε^{-N}`; a negative exponent is decay.
    EpsPower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateFit {
    pub model: GrowthModel,
    pub exponent: f64,
    pub intercept: f64,
    pub rss: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    pub model: GrowthModel,
    pub exponent: f64,
    pub r_squared: f64,
    /// Residuals of `ln value` for the selected model, in table order.
    pub residuals: Vec<f64>,
    pub candidates: Vec<CandidateFit>,
}

/// Standard deviation of `ln value` below which fits are considered exact.
pub const NOISE_FLOOR: f64 = 0.02;

fn regressor(model: GrowthModel, eps: f64) -> f64 {
    let inv = (1.0 / eps).ln();
    match model {
        GrowthModel::Bounded => 0.0,
        GrowthModel::LogLogPower => inv.ln().ln(),
        GrowthModel::LogPower => inv.ln(),
        GrowthModel::EpsPower => inv,
    }
}

fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

/// Least-squares fit of `ln value` against the candidate regressors
/// `{1, ln ln(1/ε), ln(1/ε)}`, selected by a BIC score with a noise floor.
pub fn fit_growth(table: &[(f64, f64)]) -> Result<GrowthFit> {
    if table.len() < 5 {
        return Err(Error::InvalidParameter(format!(
            "growth fit needs >= 5 points, got {}",
            table.len()
        )));
    }
    if let Some(i) = table.iter().position(|(e, v)| !(*v > 0.0) || !v.is_finite() || !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "growth fit needs positive values and eps in (0, 1); row {i} is {:?}",
            table[i]
        )));
    }
    let n = table.len() as f64;
    let y: Vec<f64> = table.iter().map(|(_, v)| v.ln()).collect();
    let my = y.iter().sum::<f64>() / n;
    let tss: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let floor = NOISE_FLOOR * NOISE_FLOOR;
    let mut candidates = Vec::new();
    let mut residuals_of = Vec::new();
    for model in [GrowthModel::Bounded, GrowthModel::LogPower, GrowthModel::EpsPower] {
        let x: Vec<f64> = table.iter().map(|(e, _)| regressor(model, *e)).collect();
        let (c, m) = if model == GrowthModel::Bounded {
            (my, 0.0)
        } else {
            line_fit(&x, &y)
        };
        let res: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| yi - c - m * xi).collect();
        let rss: f64 = res.iter().map(|r| r * r).sum();
        let k = if model == GrowthModel::Bounded { 1.0 } else { 2.0 };
        let score = n * (rss / n).max(floor).ln() + k * n.ln();
        candidates.push(CandidateFit {
            model,
            exponent: m,
            intercept: c,
            rss,
            score,
        });
        residuals_of.push(res);
    }
    let mut best = 0;
    for i in 1..candidates.len() {
        let (a, b) = (&candidates[i], &candidates[best]);
        let tie = (a.score - b.score).abs() <= 1e-9 * (1.0 + b.score.abs());
        if a.score < b.score - 1e-9 * (1.0 + b.score.abs()) || (tie && a.rss < b.rss) {
            best = i;
        }
    }
    let chosen = &candidates[best];
    let r_squared = if tss > 0.0 {
        (1.0 - chosen.rss / tss).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(GrowthFit {
        model: chosen.model,
        exponent: chosen.exponent,
        r_squared,
        residuals: residuals_of.swap_remove(best),
        candidates,
    })
}

/// Slope of `ln value` against `ln L(ε)` for a given scale law.
pub fn scale_exponent(table: &[(f64, f64)], scale: &ScaleLaw) -> Result<f64> {
    let mut x = Vec::with_capacity(table.len());
    let mut y = Vec::with_capacity(table.len());
    for &(e, v) in table {
        if !(v > 0.0) {
            return Err(Error::InvalidParameter("scale exponent needs positive values".into()));
        }
        x.push(scale.scale(e)?.ln());
        y.push(v.ln());
    }
    if x.len() < 2 {
        return Err(Error::InvalidParameter("scale exponent needs >= 2 points".into()));
    }
    Ok(line_fit(&x, &y).1)
}

type Shape = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Envelope `C₁ A(ε)` or `C₁ A(ε) exp(C₂ B(ε))` with constants fitted on the largest ε.
pub struct Envelope {
    label: String,
    prefactor: Shape,
    exponent: Option<Shape>,
}

impl std::fmt::Debug for Envelope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Envelope").field("label", &self.label).finish()
    }
}

impl Envelope {
    pub fn new(label: impl Into<String>, prefactor: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            prefactor: Box::new(prefactor),
            exponent: None,
        }
    }

    /// Two-constant form `C₁ A(ε) exp(C₂ B(ε))`.
    pub fn gronwall(
        label: impl Into<String>,
        prefactor: impl Fn(f64) -> f64 + Send + Sync + 'static,
        exponent: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            prefactor: Box::new(prefactor),
            exponent: Some(Box::new(exponent)),
        }
    }

    /// `C L(ε)^m`.
    pub fn scale_power(scale: ScaleLaw, m: f64) -> Self {
        Self::new(format!("C*L^{m}"), move |e| {
            scale.scale(e).map(|l| l.powf(m)).unwrap_or(f64::NAN)
        })
    }

    /// `C ε^s`.
    pub fn eps_power(s: f64) -> Self {
        Self::new(format!("C*eps^{s}"), move |e| e.powf(s))
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeVerdict {
    pub passed: bool,
    pub c1: f64,
    pub c2: f64,
    /// Largest `value / envelope` over the non-calibration points.
    pub max_ratio: f64,
    pub ratios: Vec<f64>,
    pub first_violation: Option<f64>,
}

/// Calibrate on the `k` largest ε and check the remaining points stay below.
pub fn envelope_check(table: &[(f64, f64)], envelope: &Envelope, k: usize) -> Result<EnvelopeVerdict> {
    if k < 2 {
        return Err(Error::Calibration(format!("need k >= 2 calibration points, got {k}")));
    }
    if table.len() <= k {
        return Err(Error::Calibration(format!(
            "{} rows leave nothing to test after calibrating on {k}",
            table.len()
        )));
    }
    let mut rows = table.to_vec();
    rows.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let a: Vec<f64> = rows.iter().map(|(e, _)| (envelope.prefactor)(*e)).collect();
    if let Some(i) = a.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Calibration(format!("envelope not positive at eps = {}", rows[i].0)));
    }
    if let Some(i) = rows.iter().position(|(_, v)| !v.is_finite() || *v < 0.0) {
        return Err(Error::Calibration(format!("bad value at eps = {}", rows[i].0)));
    }
    let (c1, c2, b) = match &envelope.exponent {
        None => {
            let c1 = (0..k).map(|i| rows[i].1 / a[i]).fold(0.0, f64::max);
            (c1, 0.0, vec![0.0; rows.len()])
        }
        Some(bf) => {
            let b: Vec<f64> = rows.iter().map(|(e, _)| bf(*e)).collect();
            let bx = &b[..k];
            if bx.iter().any(|v| !v.is_finite())
                || bx.iter().all(|v| (v - bx[0]).abs() <= 1e-12 * (1.0 + bx[0].abs()))
            {
                return Err(Error::Calibration("exponent shape constant on calibration points".into()));
            }
            if rows[..k].iter().any(|(_, v)| *v <= 0.0) {
                return Err(Error::Calibration("two-constant calibration needs positive values".into()));
            }
            let y: Vec<f64> = (0..k).map(|i| (rows[i].1 / a[i]).ln()).collect();
            let (_, slope) = line_fit(bx, &y);
            let c2 = slope.max(0.0);
            let c1 = (0..k)
                .map(|i| rows[i].1 / (a[i] * (c2 * b[i]).exp()))
                .fold(0.0, f64::max);
            (c1, c2, b)
        }
    };
    let mut ratios = Vec::with_capacity(rows.len());
    let mut max_ratio = 0.0f64;
    let mut first_violation = None;
    for i in 0..rows.len() {
        let env = c1 * a[i] * (c2 * b[i]).exp();
        let r = if env > 0.0 {
            rows[i].1 / env
        } else if rows[i].1 == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        ratios.push(r);
        if i >= k {
            max_ratio = max_ratio.max(r);
            if r > 1.0 + 1e-9 && first_violation.is_none() {
                first_violation = Some(rows[i].0);
            }
        }
    }
    Ok(EnvelopeVerdict {
        passed: first_violation.is_none(),
        c1,
        c2,
        max_ratio,
        ratios,
        first_violation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// Growth at most `ε^{-n}`; `log_mode` when only logarithmic growth was seen.
    Moderate { n: f64, log_mode: bool },
    /// Consistent with negligible; `exact` when every value is zero.
    Negligible { exact: bool },
    Indeterminate(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    pub fits: Vec<Option<GrowthFit>>,
}

fn decays_like_negligible(table: &[(f64, f64)]) -> Result<(bool, f64)> {
    let x: Vec<f64> = table.iter().map(|(e, _)| (1.0 / e).ln()).collect();
    let y: Vec<f64> = table.iter().map(|(_, v)| v.ln()).collect();
    let slope = line_fit(&x, &y).1;
    let monotone = table.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9));
    Ok((slope <= -1.0 && monotone, slope))
}

/// Classify a family from its norm tables (e.g. the sup-in-time `L^p` table and
/// the time-derivative table).
pub fn classify_family(tables: &[Vec<(f64, f64)>]) -> Result<Classification> {
    let first = tables
        .first()
        .ok_or_else(|| Error::InconsistentTables("no tables".into()))?;
    for t in tables {
        if t.len() != first.len() {
            return Err(Error::InconsistentTables(format!(
                "lengths {} and {}",
                first.len(),
                t.len()
            )));
        }
        for (a, b) in t.iter().zip(first) {
            if (a.0 - b.0).abs() > 1e-12 * b.0 {
                return Err(Error::InconsistentTables("eps columns differ".into()));
            }
        }
    }
    if tables.iter().all(|t| t.iter().all(|(_, v)| *v == 0.0)) {
        return Ok(Classification {
            verdict: Verdict::Negligible { exact: true },
            fits: vec![None; tables.len()],
        });
    }
    let mut fits = Vec::with_capacity(tables.len());
    let mut all_negligible = true;
    let mut growth: f64 = 0.0;
    let mut log_mode = true;
    let mut slow_decay = None;
    for (i, t) in tables.iter().enumerate() {
        if t.iter().all(|(_, v)| *v == 0.0) {
            fits.push(None);
            continue;
        }
        if t.iter().any(|(_, v)| !(*v > 0.0)) {
            return Ok(Classification {
                verdict: Verdict::Indeterminate(format!("table {i} mixes zero and positive values")),
                fits,
            });
        }
        let fit = fit_growth(t)?;
        let (negligible, slope) = decays_like_negligible(t)?;
        all_negligible &= negligible;
        if !negligible && slope < -0.5 {
            slow_decay = Some(format!(
                "table {i} decays with slope {slope:.3} in ln(1/eps) but not like eps^1 with monotone improvement"
            ));
        }
        if fit.model == GrowthModel::EpsPower && fit.exponent > 0.0 {
            growth = growth.max(fit.exponent);
            log_mode = false;
        }
        fits.push(Some(fit));
    }
    let verdict = if all_negligible {
        Verdict::Negligible { exact: false }
    } else if let Some(reason) = slow_decay {
        Verdict::Indeterminate(reason)
    } else {
        Verdict::Moderate { n: growth, log_mode }
    };
    Ok(Classification { verdict, fits })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfTestReport {
    /// `(class, correct, total)`.
    pub per_class: Vec<(GrowthModel, usize, usize)>,
}

impl SelfTestReport {
    pub fn worst_rate(&self) -> f64 {
        self.per_class
            .iter()
            .map(|(_, c, t)| *c as f64 / *t as f64)
            .fold(1.0, f64::min)
    }
}

/// Fit synthetic families from each model class with multiplicative Gaussian
/// noise and count correct selections.
pub fn model_selection_self_test(seeds: usize, noise: f64, base_seed: u64) -> SelfTestReport {
    let schedule = EpsSchedule::default();
    let normal = Normal::new(0.0, noise).expect("noise level is finite");
    let classes = [GrowthModel::Bounded, GrowthModel::LogPower, GrowthModel::EpsPower];
    let per_class = classes
        .iter()
        .enumerate()
        .map(|(ci, &class)| {
            let correct = (0..seeds)
                .filter(|&s| {
                    let mut rng = ChaCha8Rng::seed_from_u64(base_seed ^ ((ci as u64) << 32) ^ s as u64);
                    let c: f64 = rng.gen_range(0.5..10.0);
                    let m: f64 = rng.gen_range(0.5..3.0);
                    let table: Vec<(f64, f64)> = schedule
                        .values()
                        .iter()
                        .map(|&e| {
                            let clean = match class {
                                GrowthModel::Bounded => c,
                                GrowthModel::LogPower => c * (1.0 / e).ln().powf(m),
                                _ => c * e.powf(-m),
                            };
                            (e, clean * (1.0 + normal.sample(&mut rng)))
                        })
                        .collect();
                    fit_growth(&table).map(|f| f.model == class).unwrap_or(false)
                })
                .count();
            (class, correct, seeds)
        })
        .collect();
    SelfTestReport { per_class }
}
