//! Polynomial superpotentials, the partner potentials `V± = W² ± (ħ/√(2m)) W'`
//! they generate, and the harmonic reduction of each channel about its
//! stable equilibrium.

mod polynomial;
mod roots;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use polynomial::Polynomial;
pub use roots::real_roots;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("mass and hbar must be positive and finite (mass = {mass}, hbar = {hbar})")]
    InvalidConstants { mass: f64, hbar: f64 },
    #[error("channel {0} has no stable equilibrium")]
    NoStableEquilibrium(Channel),
    #[error("channel {channel}: x0 = {x0} is not a stable equilibrium (V'' = {curvature})")]
    UnstableEquilibrium { channel: Channel, x0: f64, curvature: f64 },
    #[error("channel {channel}: x0 = {x0} is not an equilibrium (|V'| = {residual:e})")]
    NotAnEquilibrium { channel: Channel, x0: f64, residual: f64 },
    #[error("harmonic frequency must be positive and finite, got {0}")]
    NonPositiveFrequency(f64),
}

/// Spin channel: `Plus` evolves under `H+`, `Minus` under `H-`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Plus,
    Minus,
}

impl Channel {
    pub const BOTH: [Channel; 2] = [Channel::Plus, Channel::Minus];

    /// +1 for `Plus`, -1 for `Minus`.
    pub fn sign(self) -> f64 {
        match self {
            Channel::Plus => 1.0,
            Channel::Minus => -1.0,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Channel::Plus => "plus",
            Channel::Minus => "minus",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.suffix())
    }
}

/// Superpotential `W` together with the mass and ħ.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperpotentialModel {
    w: Polynomial,
    mass: f64,
    hbar: f64,
}

impl SuperpotentialModel {
    pub fn new(w: Polynomial, mass: f64, hbar: f64) -> Result<Self, PotentialError> {
        if !(mass > 0.0 && hbar > 0.0 && mass.is_finite() && hbar.is_finite()) {
            return Err(PotentialError::InvalidConstants { mass, hbar });
        }
        Ok(SuperpotentialModel { w, mass, hbar })
    }

    /// `W = (C/√2) x²` with `m = ħ = 1`.
    pub fn quartic_example(c: f64) -> Self {
        SuperpotentialModel::new(
            Polynomial::monomial(c / std::f64::consts::SQRT_2, 2),
            1.0,
            1.0,
        )
        .expect("unit constants are valid")
    }

    pub fn w(&self) -> &Polynomial {
        &self.w
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `ħ/√(2m)`, the coupling in front of `W'` and in `P/√(2m)`.
    pub fn coupling(&self) -> f64 {
        self.hbar / (2.0 * self.mass).sqrt()
    }
}

pub fn derivative(p: &Polynomial) -> Polynomial {
    p.derivative()
}

pub fn evaluate(p: &Polynomial, x: f64) -> f64 {
    p.evaluate(x)
}

/// `V± = W² ± (ħ/√(2m)) W'`.
pub fn effective_potential(model: &SuperpotentialModel, ch: Channel) -> Polynomial {
    let w = model.w();
    let square = w * w;
    &square + &w.derivative().scale(ch.sign() * model.coupling())
}

/// `F± = -2 W W' ∓ (ħ/√(2m)) W''`, built directly from `W` rather than by
/// differentiating `V±`.
pub fn force(model: &SuperpotentialModel, ch: Channel) -> Polynomial {
    let w = model.w();
    let dw = w.derivative();
    let ddw = dw.derivative();
    &(w * &dw).scale(-2.0) - &ddw.scale(ch.sign() * model.coupling())
}

/// Stable minima of `V±` (`V' = 0`, `V'' > 0`), ascending.
pub fn find_equilibria(model: &SuperpotentialModel, ch: Channel) -> Result<Vec<f64>, PotentialError> {
    let v = effective_potential(model, ch);
    let dv = v.derivative();
    let ddv = dv.derivative();
    let stable: Vec<f64> = real_roots(&dv)
        .into_iter()
        .filter(|x| ddv.evaluate(*x) > 0.0)
        .collect();
    if stable.is_empty() {
        Err(PotentialError::NoStableEquilibrium(ch))
    } else {
        Ok(stable)
    }
}

/// Picks the equilibrium used for the harmonic reduction: lowest `V±`, then
/// smallest `|x0|`, then the negative one.
pub fn select_equilibrium(model: &SuperpotentialModel, ch: Channel) -> Result<f64, PotentialError> {
    let v = effective_potential(model, ch);
    let candidates = find_equilibria(model, ch)?;
    let key = |x: &f64| (v.evaluate(*x), x.abs(), *x);
    let best = candidates
        .into_iter()
        .min_by(|a, b| {
            let (ka, kb) = (key(a), key(b));
            ka.0.total_cmp(&kb.0)
                .then(ka.1.total_cmp(&kb.1))
                .then(ka.2.total_cmp(&kb.2))
        })
        .expect("find_equilibria never returns an empty list");
    Ok(best)
}

/// Quadratic model of one channel about its equilibrium:
/// `H± ≈ ħω₀ b†b + f (b† + b) + E₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HarmonicChannel {
    pub channel: Channel,
    pub x0: f64,
    pub omega0: f64,
    #[serde(rename = "V0")]
    pub v0: f64,
    pub f: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    pub g: f64,
    pub mass: f64,
    pub hbar: f64,
}

impl HarmonicChannel {
    /// Derives `f`, `E₀` and `g` from the well position, frequency and depth.
    pub fn new(
        channel: Channel,
        x0: f64,
        omega0: f64,
        v0: f64,
        mass: f64,
        hbar: f64,
    ) -> Result<Self, PotentialError> {
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(PotentialError::NonPositiveFrequency(omega0));
        }
        if !(mass > 0.0 && hbar > 0.0) {
            return Err(PotentialError::InvalidConstants { mass, hbar });
        }
        let stiffness = mass * omega0 * omega0;
        let f = -stiffness * x0 * (hbar / (2.0 * mass * omega0)).sqrt();
        Ok(HarmonicChannel {
            channel,
            x0,
            omega0,
            v0,
            f,
            e0: v0 + 0.5 * stiffness * x0 * x0,
            g: f / hbar,
            mass,
            hbar,
        })
    }

    /// `V0 + ½ m ω₀² (x - x0)²`.
    pub fn potential(&self, x: f64) -> f64 {
        let d = x - self.x0;
        self.v0 + 0.5 * self.mass * self.omega0 * self.omega0 * d * d
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega0
    }

    /// Position standard deviation of the oscillator ground state, `√(ħ/(2mω₀))`.
    pub fn vacuum_width(&self) -> f64 {
        (self.hbar / (2.0 * self.mass * self.omega0)).sqrt()
    }
}

/// Harmonic data about `x0`, with `ω₀ = √(V''(x0)/m)`.
pub fn harmonic_params(
    model: &SuperpotentialModel,
    ch: Channel,
    x0: f64,
) -> Result<HarmonicChannel, PotentialError> {
    let v = effective_potential(model, ch);
    let dv = v.derivative();
    let curvature = dv.derivative().evaluate(x0);
    let residual = dv.evaluate(x0).abs();
    if residual > 1e-10 * roots::residual_scale(&dv, x0) {
        return Err(PotentialError::NotAnEquilibrium { channel: ch, x0, residual });
    }
    if !(curvature > 0.0) {
        return Err(PotentialError::UnstableEquilibrium { channel: ch, x0, curvature });
    }
    HarmonicChannel::new(
        ch,
        x0,
        (curvature / model.mass()).sqrt(),
        v.evaluate(x0),
        model.mass(),
        model.hbar(),
    )
}

/// Harmonic reduction about the selected equilibrium of `ch`.
pub fn resolve_channel(model: &SuperpotentialModel, ch: Channel) -> Result<HarmonicChannel, PotentialError> {
    harmonic_params(model, ch, select_equilibrium(model, ch)?)
}

/// `m ω₀²` from the closed form in terms of `W'`, `W²W'` and `W'''`:
/// `2W'² ∓ 4(√(2m)/ħ) W² W' ± (ħ/√(2m)) W'''`. Equals `V''(x0)` only at a
/// true equilibrium.
pub fn eq21_frequency(model: &SuperpotentialModel, ch: Channel, x0: f64) -> Result<f64, PotentialError> {
    let v = effective_potential(model, ch);
    let dv = v.derivative();
    let residual = dv.evaluate(x0).abs();
    if residual > 1e-10 * roots::residual_scale(&dv, x0) {
        return Err(PotentialError::NotAnEquilibrium { channel: ch, x0, residual });
    }
    let w = model.w();
    let dw = w.derivative();
    let d3w = dw.derivative().derivative();
    let (w0, dw0, d3w0) = (w.evaluate(x0), dw.evaluate(x0), d3w.evaluate(x0));
    let kappa = model.coupling();
    let s = ch.sign();
    Ok(2.0 * dw0 * dw0 - s * 4.0 / kappa * w0 * w0 * dw0 + s * kappa * d3w0)
}
