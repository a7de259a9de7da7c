//! Exact Gaussian dynamics in a quadratic well.
//!
//! A Gaussian stays Gaussian under `p²/2m + V0 + ½mω²(x - x0)²`. The centre
//! and momentum follow the classical orbit, the complex width follows the
//! linearised flow `(Z, P_Z)` with `a = -i P_Z / (ħ Z)`, and the phase picks
//! up the classical action plus `-½ arg Z` on its continuous branch.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::potential::HarmonicChannel;
use crate::series::{DecoherenceSeries, Method, SeriesError};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Normalised `(Re a/π)^{1/4} exp(-a(x-x̄)²/2 + i p̄(x-x̄)/ħ + iγ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianPacket {
    pub center: f64,
    pub momentum: f64,
    /// Inverse complex variance `a`, `Re a > 0`.
    pub width_param: Complex64,
    pub phase: f64,
    pub hbar: f64,
}

impl GaussianPacket {
    /// Real Gaussian with position standard deviation `sigma`.
    pub fn with_width(center: f64, sigma: f64, momentum: f64, hbar: f64) -> Self {
        GaussianPacket {
            center,
            momentum,
            width_param: Complex64::new(1.0 / (2.0 * sigma * sigma), 0.0),
            phase: 0.0,
            hbar,
        }
    }

    /// Ground state of an oscillator of frequency `omega` centred at `center`.
    pub fn vacuum(center: f64, mass: f64, omega: f64, hbar: f64) -> Self {
        GaussianPacket::with_width(center, (hbar / (2.0 * mass * omega)).sqrt(), 0.0, hbar)
    }

    pub fn is_normalizable(&self) -> bool {
        self.width_param.re > 0.0 && self.width_param.is_finite()
    }

    fn log_norm(&self) -> f64 {
        0.25 * (self.width_param.re / PI).ln()
    }

    pub fn evaluate(&self, x: f64) -> Complex64 {
        let d = x - self.center;
        (self.log_norm() - 0.5 * self.width_param * d * d
            + I * (self.momentum * d / self.hbar + self.phase))
            .exp()
    }

    pub fn sample(&self, xs: &[f64]) -> Vec<Complex64> {
        xs.iter().map(|x| self.evaluate(*x)).collect()
    }

    /// `⟨self|other⟩` in closed form.
    pub fn overlap(&self, other: &GaussianPacket) -> Complex64 {
        let a1 = self.width_param.conj();
        let a2 = other.width_param;
        let (q1, q2) = (self.center, other.center);
        let (k1, k2) = (self.momentum / self.hbar, other.momentum / other.hbar);
        let quad = a1 + a2;
        let lin = a1 * q1 + a2 * q2 + I * (k2 - k1);
        let constant = -0.5 * a1 * q1 * q1 - 0.5 * a2 * q2 * q2 + I * (k1 * q1 - k2 * q2);
        let log = self.log_norm()
            + other.log_norm()
            + I * (other.phase - self.phase)
            + lin * lin / (2.0 * quad)
            + constant;
        (2.0 * PI / quad).sqrt() * log.exp()
    }

    /// Exact evolution for time `t` under the quadratic model of `hc`
    /// (kinetic energy, `V0` and the zero-point energy all included).
    pub fn evolve(&self, hc: &HarmonicChannel, t: f64) -> GaussianPacket {
        let (m, w, hbar) = (hc.mass, hc.omega0, self.hbar);
        let (s, c) = (w * t).sin_cos();
        let u0 = self.center - hc.x0;
        let p0 = self.momentum;
        let u = u0 * c + p0 / (m * w) * s;
        let p = p0 * c - m * w * u0 * s;
        let action = 0.5 * (p * u - p0 * u0) - hc.v0 * t;

        let pz0 = I * hbar * self.width_param;
        let z = c + pz0 / (m * w) * s;
        let pz = pz0 * c - m * w * s;
        GaussianPacket {
            center: hc.x0 + u,
            momentum: p,
            width_param: -I * pz / (hbar * z),
            phase: self.phase + action / hbar - 0.5 * continuous_arg(z, w * t),
            hbar,
        }
    }
}

/// `arg Z(θ)` continued from `arg Z(0) = 0`. `Im Z` has the sign of `sin θ`,
/// so the argument advances by π every half period.
fn continuous_arg(z: Complex64, theta: f64) -> f64 {
    let turns = (theta / PI).floor();
    let rotated = if turns.rem_euclid(2.0) == 0.0 { z } else { -z };
    let mut local = rotated.arg();
    if local < -0.5 * PI {
        local += 2.0 * PI;
    }
    turns * PI + local
}

/// `D(t) = ⟨ψ₊(t)|ψ₋(t)⟩` with both channels started from `initial` and
/// evolved exactly in their quadratic models.
pub fn gaussian_oracle(
    plus: &HarmonicChannel,
    minus: &HarmonicChannel,
    initial: &GaussianPacket,
    times: &[f64],
) -> Result<DecoherenceSeries, SeriesError> {
    DecoherenceSeries::from_fn(times, Method::GaussianOracle, |t| {
        initial.evolve(plus, t).overlap(&initial.evolve(minus, t))
    })
}
