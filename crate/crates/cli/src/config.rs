//! Sectioned `key = value` run configuration.
//!
//! Every key has a default, so a file only lists what it changes. Unknown sections
//! and keys are rejected. [`RunConfig::to_ini`] writes every key, and parsing that text
//! gives back the same configuration.

use std::collections::BTreeSet;
use std::fmt;

use ini::Ini;
use singreg_core::evolution::Variant;
use singreg_core::kernels::PropagatorFamily;
use singreg_core::mollifier::{MomentOrder, Profile, ScaleLaw};
use singreg_core::regularize::NonlinearityModel;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type Parsed<T> = std::result::Result<T, ConfigError>;

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    FracBounds,
    Volterra,
    Evolution,
    Schrodinger,
    Sweep,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::FracBounds,
        Experiment::Volterra,
        Experiment::Evolution,
        Experiment::Schrodinger,
        Experiment::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::FracBounds => "frac-bounds",
            Experiment::Volterra => "volterra",
            Experiment::Evolution => "evolution",
            Experiment::Schrodinger => "schrodinger",
            Experiment::Sweep => "sweep",
        }
    }

    fn parse(s: &str) -> Parsed<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| bad(format!("unknown experiment '{s}'")))
    }
}

/// Mollifier shared by the kernel, data and propagator regularizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierConfig {
    pub profile: Profile,
    pub scale: ScaleLaw,
    /// Exponent `a` of the data mollifier.
    pub amplitude: f64,
}

impl Default for MollifierConfig {
    fn default() -> Self {
        Self {
            profile: Profile::Bump,
            scale: ScaleLaw::Log,
            amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FracConfig {
    pub alphas: Vec<f64>,
    pub horizon: f64,
}

impl Default for FracConfig {
    fn default() -> Self {
        Self {
            alphas: vec![0.5],
            horizon: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Zero,
    Linear,
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oracle {
    None,
    /// `g E_α(λ Γ(α) x^α)` for the linear kernel with constant free term.
    MittagLeffler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeKind {
    None,
    Identical,
    TwoMollifiers(Profile),
    Shift(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolterraConfig {
    pub alpha: f64,
    pub length: f64,
    pub step: f64,
    pub eps: f64,
    pub kernel: KernelKind,
    pub coefficient: f64,
    pub nonlinearity: NonlinearityModel,
    pub cutoff: f64,
    pub free_term: f64,
    pub oracle: Oracle,
    pub oracle_tolerance: f64,
    /// Divide the oracle error by `sup |oracle|`.
    pub oracle_relative: bool,
    pub probe: ProbeKind,
}

impl Default for VolterraConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            length: 1.0,
            step: 1e-3,
            eps: 1e-8,
            kernel: KernelKind::Linear,
            coefficient: 1.0,
            nonlinearity: NonlinearityModel::PowerLaw { gamma: 0.5 },
            cutoff: 0.3,
            free_term: 1.0,
            oracle: Oracle::None,
            oracle_tolerance: 1e-4,
            oracle_relative: false,
            probe: ProbeKind::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DataKind {
    Delta,
    /// `amplitude · exp(-x²/(2 width²))`.
    Gaussian { amplitude: f64, width: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub variant: Variant,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub horizon: f64,
    pub dt: f64,
    pub eps: f64,
    pub data: DataKind,
    pub nonlinearity: Option<NonlinearityModel>,
    pub cutoff: f64,
    pub potential: bool,
    pub potential_exponent: f64,
    pub potential_coefficient: f64,
    pub mollify_propagator: bool,
    pub norm: f64,
    pub probe: ProbeKind,
    pub probe_norm: f64,
}

impl EvolutionConfig {
    fn schrodinger() -> Self {
        Self {
            variant: Variant::SchrodingerLinear,
            horizon: 1.0,
            dt: 1e-2,
            data: DataKind::Gaussian {
                amplitude: 1.0,
                width: 1.0,
            },
            mollify_propagator: false,
            norm: 2.0,
            ..Self::default()
        }
    }
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            variant: Variant::ParabolicPlain,
            lo: -8.0,
            hi: 8.0,
            points: 2048,
            horizon: 0.25,
            dt: 1e-3,
            eps: 1e-4,
            data: DataKind::Delta,
            nonlinearity: None,
            cutoff: 0.5,
            potential: false,
            potential_exponent: 0.5,
            potential_coefficient: 1.0,
            mollify_propagator: true,
            norm: f64::INFINITY,
            probe: ProbeKind::None,
            probe_norm: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorConfig {
    pub family: PropagatorFamily,
    pub dim: usize,
    pub beta: u32,
    pub time: f64,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self {
            family: PropagatorFamily::Heat,
            dim: 1,
            beta: 0,
            time: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,
    pub override_guards: bool,
    pub schedule: Vec<f64>,
    pub mollifier: MollifierConfig,
    pub frac: FracConfig,
    pub volterra: VolterraConfig,
    pub evolution: EvolutionConfig,
    pub schrodinger: EvolutionConfig,
    pub propagator: PropagatorConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            override_guards: false,
            schedule: (2..=12).map(|k| 10f64.powi(-k)).collect(),
            mollifier: MollifierConfig::default(),
            frac: FracConfig::default(),
            volterra: VolterraConfig::default(),
            evolution: EvolutionConfig::default(),
            schrodinger: EvolutionConfig::schrodinger(),
            propagator: PropagatorConfig::default(),
        }
    }
}

// ---- value codecs ----

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        format!("{v:?}")
    }
}

fn parse_num(key: &str, s: &str) -> Parsed<f64> {
    let v: f64 = s.trim().parse().map_err(|_| bad(format!("{key}: '{s}' is not a number")))?;
    if v.is_nan() {
        return Err(bad(format!("{key}: NaN is not allowed")));
    }
    Ok(v)
}

fn parse_finite(key: &str, s: &str) -> Parsed<f64> {
    let v = parse_num(key, s)?;
    if !v.is_finite() {
        return Err(bad(format!("{key}: must be finite")));
    }
    Ok(v)
}

fn parse_positive(key: &str, s: &str) -> Parsed<f64> {
    let v = parse_finite(key, s)?;
    if v <= 0.0 {
        return Err(bad(format!("{key}: must be > 0, got {v}")));
    }
    Ok(v)
}

fn parse_norm(key: &str, s: &str) -> Parsed<f64> {
    let v = parse_num(key, s)?;
    if !(v >= 1.0) {
        return Err(bad(format!("{key}: norm exponent must be >= 1 or inf, got {v}")));
    }
    Ok(v)
}

fn parse_bool(key: &str, s: &str) -> Parsed<bool> {
    match s.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(bad(format!("{key}: expected true or false, got '{s}'"))),
    }
}

fn parse_count(key: &str, s: &str) -> Parsed<usize> {
    s.trim().parse().map_err(|_| bad(format!("{key}: '{s}' is not a non-negative integer")))
}

fn parse_list(key: &str, s: &str) -> Parsed<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| parse_finite(key, t))
        .collect()
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(", ")
}

/// `name` or `name:argument`.
fn split_arg(s: &str) -> (&str, Option<&str>) {
    match s.trim().split_once(':') {
        Some((a, b)) => (a.trim(), Some(b.trim())),
        None => (s.trim(), None),
    }
}

fn profile_text(p: Profile) -> String {
    match p {
        Profile::Bump => "bump".into(),
        Profile::MomentVanishing(MomentOrder::All) => "moment-vanishing:all".into(),
        Profile::MomentVanishing(MomentOrder::Finite(k)) => format!("moment-vanishing:{k}"),
    }
}

fn parse_profile(key: &str, s: &str) -> Parsed<Profile> {
    match split_arg(s) {
        ("bump", None) => Ok(Profile::Bump),
        ("moment-vanishing", Some("all")) => Ok(Profile::MomentVanishing(MomentOrder::All)),
        ("moment-vanishing", Some(k)) => Ok(Profile::MomentVanishing(MomentOrder::Finite(
            k.parse().map_err(|_| bad(format!("{key}: bad moment count '{k}'")))?,
        ))),
        _ => Err(bad(format!("{key}: expected bump, moment-vanishing:K or moment-vanishing:all, got '{s}'"))),
    }
}

fn scale_text(s: ScaleLaw) -> String {
    match s {
        ScaleLaw::Log => "log".into(),
        ScaleLaw::LogLog => "loglog".into(),
        ScaleLaw::Power { gamma } => format!("power:{}", num(gamma)),
    }
}

fn parse_scale(key: &str, s: &str) -> Parsed<ScaleLaw> {
    match split_arg(s) {
        ("log", None) => Ok(ScaleLaw::Log),
        ("loglog", None) => Ok(ScaleLaw::LogLog),
        ("power", Some(g)) => Ok(ScaleLaw::Power {
            gamma: parse_positive(key, g)?,
        }),
        _ => Err(bad(format!("{key}: expected log, loglog or power:GAMMA, got '{s}'"))),
    }
}

fn model_text(m: &NonlinearityModel) -> String {
    match m {
        NonlinearityModel::PowerLaw { gamma } => format!("power-law:{}", num(*gamma)),
        NonlinearityModel::SqrtAbs => "sqrt-abs".into(),
        NonlinearityModel::PiecewiseStep => "step".into(),
        NonlinearityModel::SignedSquare => "signed-square".into(),
        NonlinearityModel::HalfSquare => "half-square".into(),
        NonlinearityModel::Linear { slope } => format!("linear:{}", num(*slope)),
        NonlinearityModel::Custom(pts) => {
            let flat: Vec<f64> = pts.iter().flat_map(|(u, g)| [*u, *g]).collect();
            format!("custom:{}", flat.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" "))
        }
    }
}

fn parse_model(key: &str, s: &str) -> Parsed<NonlinearityModel> {
    match split_arg(s) {
        ("power-law", Some(g)) => Ok(NonlinearityModel::PowerLaw {
            gamma: parse_finite(key, g)?,
        }),
        ("sqrt-abs", None) => Ok(NonlinearityModel::SqrtAbs),
        ("step", None) => Ok(NonlinearityModel::PiecewiseStep),
        ("signed-square", None) => Ok(NonlinearityModel::SignedSquare),
        ("half-square", None) => Ok(NonlinearityModel::HalfSquare),
        ("linear", Some(v)) => Ok(NonlinearityModel::Linear {
            slope: parse_finite(key, v)?,
        }),
        ("custom", Some(v)) => {
            let vals: Vec<f64> = v.split_whitespace().map(|t| parse_finite(key, t)).collect::<Parsed<_>>()?;
            if vals.len() < 4 || vals.len() % 2 != 0 {
                return Err(bad(format!("{key}: custom needs an even number (>= 4) of 'u g' values")));
            }
            Ok(NonlinearityModel::Custom(vals.chunks(2).map(|c| (c[0], c[1])).collect()))
        }
        _ => Err(bad(format!(
            "{key}: expected power-law:G, sqrt-abs, step, signed-square, half-square, linear:S or custom:U G ..., got '{s}'"
        ))),
    }
}

fn probe_text(p: &ProbeKind) -> String {
    match p {
        ProbeKind::None => "none".into(),
        ProbeKind::Identical => "identical".into(),
        ProbeKind::TwoMollifiers(profile) => format!("two-mollifiers:{}", profile_text(*profile)),
        ProbeKind::Shift(s) => format!("shift:{}", num(*s)),
    }
}

fn parse_probe(key: &str, s: &str) -> Parsed<ProbeKind> {
    match split_arg(s) {
        ("none", None) => Ok(ProbeKind::None),
        ("identical", None) => Ok(ProbeKind::Identical),
        ("shift", Some(v)) => Ok(ProbeKind::Shift(parse_positive(key, v)?)),
        ("two-mollifiers", Some(rest)) => Ok(ProbeKind::TwoMollifiers(parse_profile(key, rest)?)),
        _ => Err(bad(format!(
            "{key}: expected none, identical, shift:S or two-mollifiers:PROFILE, got '{s}'"
        ))),
    }
}

fn variant_text(v: Variant) -> &'static str {
    match v {
        Variant::ParabolicPlain => "plain",
        Variant::ParabolicConservative => "conservative",
        Variant::ParabolicPotential => "potential",
        Variant::SchrodingerLinear => "schrodinger",
    }
}

fn parse_variant(key: &str, s: &str) -> Parsed<Variant> {
    match s.trim() {
        "plain" => Ok(Variant::ParabolicPlain),
        "conservative" => Ok(Variant::ParabolicConservative),
        "potential" => Ok(Variant::ParabolicPotential),
        "schrodinger" => Ok(Variant::SchrodingerLinear),
        _ => Err(bad(format!("{key}: expected plain, conservative, potential or schrodinger, got '{s}'"))),
    }
}

fn family_text(f: PropagatorFamily) -> &'static str {
    match f {
        PropagatorFamily::Heat => "heat",
        PropagatorFamily::HeatGradient => "heat-gradient",
        PropagatorFamily::Schrodinger => "schrodinger",
    }
}

fn parse_family(key: &str, s: &str) -> Parsed<PropagatorFamily> {
    match s.trim() {
        "heat" => Ok(PropagatorFamily::Heat),
        "heat-gradient" => Ok(PropagatorFamily::HeatGradient),
        "schrodinger" => Ok(PropagatorFamily::Schrodinger),
        _ => Err(bad(format!("{key}: expected heat, heat-gradient or schrodinger, got '{s}'"))),
    }
}

fn data_text(d: &DataKind) -> String {
    match d {
        DataKind::Delta => "delta".into(),
        DataKind::Gaussian { amplitude, width } => format!("gaussian:{} {}", num(*amplitude), num(*width)),
    }
}

fn parse_data(key: &str, s: &str) -> Parsed<DataKind> {
    match split_arg(s) {
        ("delta", None) => Ok(DataKind::Delta),
        ("gaussian", Some(v)) => {
            let vals: Vec<&str> = v.split_whitespace().collect();
            if vals.len() != 2 {
                return Err(bad(format!("{key}: gaussian needs 'AMPLITUDE WIDTH'")));
            }
            Ok(DataKind::Gaussian {
                amplitude: parse_finite(key, vals[0])?,
                width: parse_positive(key, vals[1])?,
            })
        }
        _ => Err(bad(format!("{key}: expected delta or gaussian:AMPLITUDE WIDTH, got '{s}'"))),
    }
}

// ---- sections ----

/// Keys of one section, consumed as they are read so leftovers can be reported.
struct Section {
    name: String,
    entries: Vec<(String, String)>,
    used: BTreeSet<String>,
}

impl Section {
    fn take<T>(&mut self, key: &str, parse: impl Fn(&str, &str) -> Parsed<T>, slot: &mut T) -> Parsed<()> {
        if let Some((_, v)) = self.entries.iter().rev().find(|(k, _)| k == key) {
            let label = format!("[{}] {key}", self.name);
            *slot = parse(&label, v)?;
        }
        self.used.insert(key.to_string());
        Ok(())
    }

    fn finish(self) -> Parsed<()> {
        let mut seen = BTreeSet::new();
        for (k, _) in &self.entries {
            if !self.used.contains(k) {
                return Err(bad(format!("unknown key '{k}' in section [{}]", self.name)));
            }
            if !seen.insert(k) {
                return Err(bad(format!("duplicate key '{k}' in section [{}]", self.name)));
            }
        }
        Ok(())
    }
}

fn read_evolution(sec: &mut Section, cfg: &mut EvolutionConfig, with_variant: bool) -> Parsed<()> {
    if with_variant {
        sec.take("variant", parse_variant, &mut cfg.variant)?;
    }
    sec.take("lo", parse_finite, &mut cfg.lo)?;
    sec.take("hi", parse_finite, &mut cfg.hi)?;
    sec.take("points", parse_count, &mut cfg.points)?;
    sec.take("horizon", parse_positive, &mut cfg.horizon)?;
    sec.take("dt", parse_positive, &mut cfg.dt)?;
    sec.take("eps", parse_finite, &mut cfg.eps)?;
    sec.take("data", parse_data, &mut cfg.data)?;
    sec.take(
        "nonlinearity",
        |k, s| {
            if s.trim() == "none" {
                Ok(None)
            } else {
                parse_model(k, s).map(Some)
            }
        },
        &mut cfg.nonlinearity,
    )?;
    sec.take("cutoff", parse_finite, &mut cfg.cutoff)?;
    sec.take("potential", parse_bool, &mut cfg.potential)?;
    sec.take("potential_exponent", parse_finite, &mut cfg.potential_exponent)?;
    sec.take("potential_coefficient", parse_finite, &mut cfg.potential_coefficient)?;
    sec.take("mollify_propagator", parse_bool, &mut cfg.mollify_propagator)?;
    sec.take("norm", parse_norm, &mut cfg.norm)?;
    sec.take("probe", parse_probe, &mut cfg.probe)?;
    sec.take("probe_norm", parse_norm, &mut cfg.probe_norm)?;
    Ok(())
}

fn write_evolution(ini: &mut Ini, name: &str, c: &EvolutionConfig, with_variant: bool) {
    let mut s = ini.with_section(Some(name));
    if with_variant {
        s.set("variant", variant_text(c.variant));
    }
    s.set("lo", num(c.lo))
        .set("hi", num(c.hi))
        .set("points", c.points.to_string())
        .set("horizon", num(c.horizon))
        .set("dt", num(c.dt))
        .set("eps", num(c.eps))
        .set("data", data_text(&c.data))
        .set("nonlinearity", c.nonlinearity.as_ref().map_or("none".into(), model_text))
        .set("cutoff", num(c.cutoff))
        .set("potential", c.potential.to_string())
        .set("potential_exponent", num(c.potential_exponent))
        .set("potential_coefficient", num(c.potential_coefficient))
        .set("mollify_propagator", c.mollify_propagator.to_string())
        .set("norm", num(c.norm))
        .set("probe", probe_text(&c.probe))
        .set("probe_norm", num(c.probe_norm));
}

impl RunConfig {
    pub fn parse(text: &str) -> Parsed<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| bad(format!("config syntax: {e}")))?;
        let mut cfg = RunConfig::default();
        let mut seen = BTreeSet::new();
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(bad(format!("key '{k}' outside any section")));
                }
                continue;
            };
            if !seen.insert(name.to_string()) {
                return Err(bad(format!("duplicate section [{name}]")));
            }
            let mut sec = Section {
                name: name.to_string(),
                entries: props.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
                used: BTreeSet::new(),
            };
            match name {
                "run" => {
                    sec.take(
                        "experiment",
                        |k, s| {
                            if s.trim() == "any" {
                                Ok(None)
                            } else {
                                Experiment::parse(s.trim()).map(Some).map_err(|e| bad(format!("{k}: {e}")))
                            }
                        },
                        &mut cfg.experiment,
                    )?;
                    sec.take("override_guards", parse_bool, &mut cfg.override_guards)?;
                }
                "schedule" => sec.take("eps", parse_list, &mut cfg.schedule)?,
                "mollifier" => {
                    let m = &mut cfg.mollifier;
                    sec.take("profile", parse_profile, &mut m.profile)?;
                    sec.take("scale", parse_scale, &mut m.scale)?;
                    sec.take("amplitude", parse_finite, &mut m.amplitude)?;
                }
                "frac" => {
                    sec.take("alphas", parse_list, &mut cfg.frac.alphas)?;
                    sec.take("horizon", parse_positive, &mut cfg.frac.horizon)?;
                }
                "volterra" => {
                    let v = &mut cfg.volterra;
                    sec.take("alpha", parse_finite, &mut v.alpha)?;
                    sec.take("length", parse_positive, &mut v.length)?;
                    sec.take("step", parse_positive, &mut v.step)?;
                    sec.take("eps", parse_finite, &mut v.eps)?;
                    sec.take(
                        "kernel",
                        |k, s| match s.trim() {
                            "zero" => Ok(KernelKind::Zero),
                            "linear" => Ok(KernelKind::Linear),
                            "nonlinear" => Ok(KernelKind::Nonlinear),
                            _ => Err(bad(format!("{k}: expected zero, linear or nonlinear, got '{s}'"))),
                        },
                        &mut v.kernel,
                    )?;
                    sec.take("coefficient", parse_finite, &mut v.coefficient)?;
                    sec.take("nonlinearity", parse_model, &mut v.nonlinearity)?;
                    sec.take("cutoff", parse_finite, &mut v.cutoff)?;
                    sec.take("free_term", parse_finite, &mut v.free_term)?;
                    sec.take(
                        "oracle",
                        |k, s| match s.trim() {
                            "none" => Ok(Oracle::None),
                            "mittag-leffler" => Ok(Oracle::MittagLeffler),
                            _ => Err(bad(format!("{k}: expected none or mittag-leffler, got '{s}'"))),
                        },
                        &mut v.oracle,
                    )?;
                    sec.take("oracle_tolerance", parse_positive, &mut v.oracle_tolerance)?;
                    sec.take(
                        "oracle_metric",
                        |k, s| match s.trim() {
                            "absolute" => Ok(false),
                            "relative" => Ok(true),
                            _ => Err(bad(format!("{k}: expected absolute or relative, got '{s}'"))),
                        },
                        &mut v.oracle_relative,
                    )?;
                    sec.take("probe", parse_probe, &mut v.probe)?;
                }
                "evolution" => read_evolution(&mut sec, &mut cfg.evolution, true)?,
                "schrodinger" => read_evolution(&mut sec, &mut cfg.schrodinger, false)?,
                "propagator" => {
                    let p = &mut cfg.propagator;
                    sec.take("family", parse_family, &mut p.family)?;
                    sec.take("dim", parse_count, &mut p.dim)?;
                    sec.take(
                        "beta",
                        |k, s| s.trim().parse::<u32>().map_err(|_| bad(format!("{k}: '{s}' is not a non-negative integer"))),
                        &mut p.beta,
                    )?;
                    sec.take("time", parse_positive, &mut p.time)?;
                }
                other => return Err(bad(format!("unknown section [{other}]"))),
            }
            sec.finish()?;
        }
        cfg.schrodinger.variant = Variant::SchrodingerLinear;
        Ok(cfg)
    }

    pub fn to_ini(&self) -> String {
        let mut ini = Ini::new();
        ini.with_section(Some("run"))
            .set("experiment", self.experiment.map_or("any", Experiment::name))
            .set("override_guards", self.override_guards.to_string());
        ini.with_section(Some("schedule")).set("eps", list(&self.schedule));
        ini.with_section(Some("mollifier"))
            .set("profile", profile_text(self.mollifier.profile))
            .set("scale", scale_text(self.mollifier.scale))
            .set("amplitude", num(self.mollifier.amplitude));
        ini.with_section(Some("frac"))
            .set("alphas", list(&self.frac.alphas))
            .set("horizon", num(self.frac.horizon));
        let v = &self.volterra;
        ini.with_section(Some("volterra"))
            .set("alpha", num(v.alpha))
            .set("length", num(v.length))
            .set("step", num(v.step))
            .set("eps", num(v.eps))
            .set(
                "kernel",
                match v.kernel {
                    KernelKind::Zero => "zero",
                    KernelKind::Linear => "linear",
                    KernelKind::Nonlinear => "nonlinear",
                },
            )
            .set("coefficient", num(v.coefficient))
            .set("nonlinearity", model_text(&v.nonlinearity))
            .set("cutoff", num(v.cutoff))
            .set("free_term", num(v.free_term))
            .set(
                "oracle",
                match v.oracle {
                    Oracle::None => "none",
                    Oracle::MittagLeffler => "mittag-leffler",
                },
            )
            .set("oracle_tolerance", num(v.oracle_tolerance))
            .set("oracle_metric", if v.oracle_relative { "relative" } else { "absolute" })
            .set("probe", probe_text(&v.probe));
        write_evolution(&mut ini, "evolution", &self.evolution, true);
        write_evolution(&mut ini, "schrodinger", &self.schrodinger, false);
        let p = &self.propagator;
        ini.with_section(Some("propagator"))
            .set("family", family_text(p.family))
            .set("dim", p.dim.to_string())
            .set("beta", p.beta.to_string())
            .set("time", num(p.time));
        let mut out = Vec::new();
        ini.write_to(&mut out).expect("writing to memory cannot fail");
        String::from_utf8(out).expect("ini output is utf-8")
    }
}
