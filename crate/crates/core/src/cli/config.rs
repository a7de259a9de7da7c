//! Scenario files: `[model]`, `[grid]`, `[evolution]`, `[initial]` and
//! `[output]` sections of `key = value` lines.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

use crate::dsl::{parse_superpotential, DslError, ExpressionSource};
use crate::potential::{Polynomial, PotentialError, SuperpotentialModel};
use crate::series::Method;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{origin}:{line}:{column}: {message}")]
    Parse { origin: String, line: usize, column: usize, message: String },
    #[error("section [{0}] required")]
    MissingSection(&'static str),
    #[error("{key}: {message}")]
    Invalid { key: &'static str, message: String },
    #[error("[model].W: {0}")]
    Expression(#[from] DslError),
    #[error("[model]: {0}")]
    Model(#[from] PotentialError),
}

fn invalid(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key, message: message.into() }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: Option<RawModel>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    evolution: RawEvolution,
    #[serde(default)]
    initial: RawInitial,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    #[serde(rename = "W")]
    w: String,
    mass: Option<f64>,
    hbar: Option<f64>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: Option<i64>,
    #[serde(rename = "L")]
    half_width: Option<Auto>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvolution {
    dt: Option<Auto>,
    steps: Option<i64>,
    sample_every: Option<i64>,
    clamp_harmonic: Option<bool>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    center: Option<f64>,
    width: Option<Auto>,
    momentum: Option<f64>,
    c_plus: Option<Amplitude>,
    c_minus: Option<Amplitude>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<PathBuf>,
    format: Option<String>,
    methods: Option<Vec<String>>,
    tolerance: Option<f64>,
}

/// A number or the string `"auto"`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
enum Auto {
    Value(f64),
    Keyword(AutoKeyword),
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum AutoKeyword {
    Auto,
}

impl Auto {
    fn value(self) -> Option<f64> {
        match self {
            Auto::Value(v) => Some(v),
            Auto::Keyword(_) => None,
        }
    }
}

/// A real number or a `[re, im]` pair.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Amplitude> for Complex64 {
    fn from(a: Amplitude) -> Self {
        match a {
            Amplitude::Real(re) => Complex64::new(re, 0.0),
            Amplitude::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub expression: String,
    pub model: SuperpotentialModel,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridConfig {
    pub n: usize,
    /// `None` selects the automatic box.
    pub half_width: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionConfig {
    /// `None` selects `period / 20000`.
    pub dt: Option<f64>,
    pub steps: usize,
    pub sample_every: usize,
    pub clamp_harmonic: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialConfig {
    pub center: f64,
    /// `None` selects the geometric-mean vacuum width.
    pub width: Option<f64>,
    pub momentum: f64,
    pub c_plus: Complex64,
    pub c_minus: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub methods: Vec<Method>,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub evolution: EvolutionConfig,
    pub initial: InitialConfig,
    pub output: OutputConfig,
}

pub const DEFAULT_N: usize = 2048;
pub const DEFAULT_STEPS: usize = 20000;
pub const DEFAULT_SAMPLE_EVERY: usize = 100;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_METHODS: [Method; 2] = [Method::EqualFreqEq34, Method::GaussianOracle];

impl ScenarioConfig {
    /// Defaults for every section, with `W` taken from an expression.
    pub fn for_expression(expression: &str) -> Result<Self, ConfigError> {
        parse_config("", "<defaults>", Some(expression))
    }
}

/// Reads and validates a scenario file. `superpotential` overrides `[model].W`
/// and makes the `[model]` section optional.
pub fn load_config(path: &Path, superpotential: Option<&str>) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text, &path.display().to_string(), superpotential)
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, column)
}

fn positive(key: &'static str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, format!("must be positive and finite, got {v}")))
    }
}

fn finite(key: &'static str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, format!("must be finite, got {v}")))
    }
}

fn count(key: &'static str, v: i64) -> Result<usize, ConfigError> {
    usize::try_from(v)
        .ok()
        .filter(|v| *v >= 1)
        .ok_or_else(|| invalid(key, format!("must be at least 1, got {v}")))
}

pub fn parse_config(text: &str, origin: &str, superpotential: Option<&str>) -> Result<ScenarioConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
        ConfigError::Parse { origin: origin.to_string(), line, column, message: e.message().trim().to_string() }
    })?;

    let (expression, source, mass, hbar) = match (superpotential, raw.model) {
        (Some(expr), m) => {
            let (mass, hbar) = m.map_or((None, None), |m| (m.mass, m.hbar));
            (expr.to_string(), ExpressionSource::flag(expr), mass, hbar)
        }
        (None, Some(m)) => (m.w.clone(), ExpressionSource::new(m.w, "[model].W"), m.mass, m.hbar),
        (None, None) => return Err(ConfigError::MissingSection("model")),
    };
    let w: Polynomial = parse_superpotential(&source)?;
    let mass = positive("[model].mass", mass.unwrap_or(1.0))?;
    let hbar = positive("[model].hbar", hbar.unwrap_or(1.0))?;
    let model = SuperpotentialModel::new(w, mass, hbar)?;

    let n = match raw.grid.n {
        None => DEFAULT_N,
        Some(n) => usize::try_from(n)
            .ok()
            .filter(|n| *n >= 64 && n.is_power_of_two())
            .ok_or_else(|| invalid("[grid].n", format!("must be a power of two and at least 64, got {n}")))?,
    };
    let half_width = raw.grid.half_width.and_then(Auto::value).map(|l| positive("[grid].L", l)).transpose()?;

    let evolution = EvolutionConfig {
        dt: raw.evolution.dt.and_then(Auto::value).map(|d| positive("[evolution].dt", d)).transpose()?,
        steps: raw.evolution.steps.map_or(Ok(DEFAULT_STEPS), |s| count("[evolution].steps", s))?,
        sample_every: raw
            .evolution
            .sample_every
            .map_or(Ok(DEFAULT_SAMPLE_EVERY), |s| count("[evolution].sample_every", s))?,
        clamp_harmonic: raw.evolution.clamp_harmonic.unwrap_or(true),
    };

    let r = std::f64::consts::FRAC_1_SQRT_2;
    let initial = InitialConfig {
        center: finite("[initial].center", raw.initial.center.unwrap_or(0.0))?,
        width: raw.initial.width.and_then(Auto::value).map(|w| positive("[initial].width", w)).transpose()?,
        momentum: finite("[initial].momentum", raw.initial.momentum.unwrap_or(0.0))?,
        c_plus: raw.initial.c_plus.map_or(Complex64::new(r, 0.0), Into::into),
        c_minus: raw.initial.c_minus.map_or(Complex64::new(r, 0.0), Into::into),
    };
    let total = initial.c_plus.norm_sqr() + initial.c_minus.norm_sqr();
    if (total - 1.0).abs() > 1e-12 {
        return Err(invalid(
            "[initial].c_plus",
            format!("|c_plus|^2 + |c_minus|^2 must equal 1 within 1e-12, got {total}"),
        ));
    }

    if let Some(format) = raw.output.format {
        if format != "csv" {
            return Err(invalid("[output].format", format!("only \"csv\" is supported, got \"{format}\"")));
        }
    }
    let methods = match raw.output.methods {
        None => DEFAULT_METHODS.to_vec(),
        Some(list) => {
            if list.is_empty() {
                return Err(invalid("[output].methods", "must name at least one method"));
            }
            let mut methods = Vec::new();
            for name in &list {
                let m: Method = name.parse().map_err(|e: String| invalid("[output].methods", e))?;
                if !methods.contains(&m) {
                    methods.push(m);
                }
            }
            methods.sort();
            methods
        }
    };
    let output = OutputConfig {
        path: raw.output.path,
        methods,
        tolerance: positive("[output].tolerance", raw.output.tolerance.unwrap_or(DEFAULT_TOLERANCE))?,
    };

    Ok(ScenarioConfig {
        model: ModelConfig { expression, model },
        grid: GridConfig { n, half_width },
        evolution,
        initial,
        output,
    })
}
