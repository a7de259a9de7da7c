//! Closed-form dynamics of the two forced oscillators obtained from the
//! harmonic reduction, and the decoherence factors that follow from them.
//!
//! Conventions: the evolution operator in the interaction picture is
//! `U = e^{ip} e^{α b†} e^{β b} = e^{iQ} D[A]` with `D[A] = exp(A* b - A b†)`,
//! so the interaction-picture coherent label is `-A`. Rotating back to the
//! Schrödinger picture gives the label `-A e^{-iω₀t} = conj(A)`, which is
//! what every position-space quantity here uses.

mod gaussian;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::potential::HarmonicChannel;
use crate::series::{DecoherenceSeries, Method, SeriesError};

pub use gaussian::{gaussian_oracle, GaussianPacket};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Wei–Norman coefficients of one channel at time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeiNormanState {
    pub t: f64,
    /// `i p(t)`; its real part is nonzero away from revivals.
    pub ip: Complex64,
    pub alpha: Complex64,
    pub beta: Complex64,
    /// Displacement amplitude, `A = -α`.
    pub a: Complex64,
    /// `iQ = ip - ½|A|²`, the bookkeeping used by the overlap formula.
    pub iq: Complex64,
}

impl WeiNormanState {
    /// `ip + ½|A|²`: the exponent that makes `e^{ip} e^{αb†} e^{βb}|0⟩`
    /// equal to a unit-norm coherent state. Purely imaginary.
    pub fn normalized_iq(&self) -> Complex64 {
        self.ip + 0.5 * self.a.norm_sqr()
    }
}

pub fn wei_norman(hc: &HarmonicChannel, t: f64) -> WeiNormanState {
    let w = hc.omega0;
    let ratio = hc.g / w;
    let forward = Complex64::from_polar(1.0, w * t) - 1.0;
    let backward = Complex64::from_polar(1.0, -w * t) - 1.0;
    let alpha = -ratio * forward;
    let beta = ratio * backward;
    let ip = I * (hc.g * hc.g / w - hc.e0 / hc.hbar) * t + ratio * ratio * backward;
    let a = -alpha;
    WeiNormanState { t, ip, alpha, beta, a, iq: ip - 0.5 * a.norm_sqr() }
}

/// Schrödinger-picture coherent label `conj(A(t))`.
pub fn coherent_label(hc: &HarmonicChannel, t: f64) -> Complex64 {
    wei_norman(hc, t).a.conj()
}

/// Mean position and momentum `(x̄, p̄)` of the packet launched from the
/// oscillator vacuum at `x = 0`.
pub fn classical_trajectory(hc: &HarmonicChannel, t: f64) -> (f64, f64) {
    let z = coherent_label(hc, t);
    let mw = hc.mass * hc.omega0;
    ((2.0 * hc.hbar / mw).sqrt() * z.re, (2.0 * hc.hbar * mw).sqrt() * z.im)
}

/// `⟨x|ψ(t)⟩` for the vacuum evolved under the quadratic model of `hc`,
/// including the dynamical and zero-point phases.
pub fn coherent_wavepacket(hc: &HarmonicChannel, t: f64, xs: &[f64]) -> Vec<Complex64> {
    coherent_packet(hc, t).sample(xs)
}

pub(crate) fn coherent_packet(hc: &HarmonicChannel, t: f64) -> GaussianPacket {
    let wn = wei_norman(hc, t);
    let (xbar, pbar) = classical_trajectory(hc, t);
    let phase = wn.normalized_iq().im - 0.5 * hc.omega0 * t + pbar * xbar / (2.0 * hc.hbar);
    GaussianPacket {
        center: xbar,
        momentum: pbar,
        width_param: Complex64::new(hc.mass * hc.omega0 / hc.hbar, 0.0),
        phase,
        hbar: hc.hbar,
    }
}

/// Coefficients `V, W, X, Y` of the two-frequency overlap formula.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverlapCoefficients {
    pub v: Complex64,
    pub w: Complex64,
    pub x: Complex64,
    pub y: Complex64,
}

pub fn overlap_coefficients(mass: f64, omega_plus: f64, omega_minus: f64) -> OverlapCoefficients {
    let ratio = (omega_plus / omega_minus).sqrt();
    let product = (omega_plus * omega_minus).sqrt();
    let re_vw = 0.5 * ratio;
    let im_vw = 0.5 * mass * product;
    let im_xy = -1.0 / (2.0 * mass * product);
    let re_xy = 0.5 / ratio;
    OverlapCoefficients {
        v: Complex64::new(re_vw, im_vw),
        w: Complex64::new(re_vw, -im_vw),
        x: Complex64::new(-re_xy, im_xy),
        y: Complex64::new(re_xy, im_xy),
    }
}

/// Two-frequency overlap formula, evaluated exactly as printed with
/// `A†` read as `conj(A)`. Reported alongside the other methods, not trusted.
pub fn decoherence_paper(plus: &HarmonicChannel, minus: &HarmonicChannel, t: f64) -> Complex64 {
    let wp = wei_norman(plus, t);
    let wm = wei_norman(minus, t);
    let OverlapCoefficients { v, w, x, y } = overlap_coefficients(plus.mass, plus.omega0, minus.omega0);
    let (ap, am) = (wp.a, wm.a);
    let left = ap * w - ap.conj() * y;
    let exponent = -0.5 * left * (ap.conj() * x - ap * v) - left * am - 0.5 * am.norm_sqr();
    (wm.iq - wp.iq + exponent).exp()
}

/// Equal-frequency decoherence factor for channels forced with `g±`;
/// `delta_e0 = E₀⁺ - E₀⁻`. The magnitude is
/// `exp(-2 (g₊ - g₋)² sin²(ω₀t/2) / ω₀²)`.
pub fn decoherence_equal_freq(
    omega0: f64,
    g_plus: f64,
    g_minus: f64,
    delta_e0: f64,
    hbar: f64,
    t: f64,
) -> Complex64 {
    let (cp, cm) = (g_plus / omega0, g_minus / omega0);
    let swing = Complex64::from_polar(1.0, -omega0 * t) - 1.0;
    let (zp, zm) = (cp * swing, cm * swing);
    let overlap = -0.5 * zp.norm_sqr() - 0.5 * zm.norm_sqr() + zp.conj() * zm;
    let phase = (delta_e0 / hbar - (g_plus * g_plus - g_minus * g_minus) / omega0) * t
        + (cp * cp - cm * cm) * (omega0 * t).sin();
    (overlap + I * phase).exp()
}

/// [`decoherence_equal_freq`] for two resolved channels; uses the plus-channel
/// frequency.
pub fn decoherence_equal_freq_channels(plus: &HarmonicChannel, minus: &HarmonicChannel, t: f64) -> Complex64 {
    decoherence_equal_freq(plus.omega0, plus.g, minus.g, plus.e0 - minus.e0, plus.hbar, t)
}

/// Whether two channels share a frequency closely enough for the
/// equal-frequency formula to apply.
pub fn frequencies_match(plus: &HarmonicChannel, minus: &HarmonicChannel) -> bool {
    (plus.omega0 - minus.omega0).abs() <= 1e-9 * plus.omega0.max(minus.omega0)
}

pub fn series_paper(
    plus: &HarmonicChannel,
    minus: &HarmonicChannel,
    times: &[f64],
) -> Result<DecoherenceSeries, SeriesError> {
    DecoherenceSeries::from_fn(times, Method::PaperEq30, |t| decoherence_paper(plus, minus, t))
}

pub fn series_equal_freq(
    plus: &HarmonicChannel,
    minus: &HarmonicChannel,
    times: &[f64],
) -> Result<DecoherenceSeries, SeriesError> {
    DecoherenceSeries::from_fn(times, Method::EqualFreqEq34, |t| {
        decoherence_equal_freq_channels(plus, minus, t)
    })
}

/// Equal-frequency depth `exp(-8g²/ω₀²)` reached at `t = π/ω₀` for symmetric forcing.
pub fn revival_floor(omega0: f64, g: f64) -> f64 {
    (-8.0 * g * g / (omega0 * omega0)).exp()
}

/// Times `k·period` for `k = 0..=count`.
pub fn period_multiples(hc: &HarmonicChannel, count: usize) -> Vec<f64> {
    (0..=count).map(|k| 2.0 * PI * k as f64 / hc.omega0).collect()
}
