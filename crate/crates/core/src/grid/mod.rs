//! Exact numerics on a periodic grid: finite-difference SUSY operators,
//! split-operator propagation of the two channels, the numerical
//! decoherence factor and the reduced spin density matrix.

mod density;
mod operators;
mod propagate;

use num_complex::Complex64;
use thiserror::Error;

use crate::potential::{Channel, HarmonicChannel};
use crate::series::{DecoherenceSeries, Method, SeriesError};

pub use density::{purity, reduced_density, ReducedDensity, SpinorState, SpinorTrajectory};
pub use operators::{
    algebra_residuals, build_block_hamiltonian, build_hamiltonian, build_supercharge, fit_order,
    spectrum, susy_algebra_report, AlgebraResiduals, OperatorLabel, OperatorMatrix, ResidualKind,
    SusyReport, SusyReportEntry, EXACT_FLOOR,
};
pub use propagate::{potential_on_grid, propagate, Propagator, Trajectory};

/// Amplitude that must not be exceeded within 5% of either boundary.
pub const BOUNDARY_AMPLITUDE: f64 = 1e-8;
/// Allowed drift of the discrete norm over a propagation run.
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid size {0} must be a power of two and at least 64")]
    BadSize(usize),
    #[error("grid half-width must be positive and finite, got {0}")]
    BadHalfWidth(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("box too small: |psi| = {amplitude:e} near the boundary at t = {time}")]
    BoxTooSmall { time: f64, amplitude: f64 },
    #[error("norm drifted by {drift:e} (limit {NORM_TOLERANCE:e}) at t = {time}")]
    NormDrift { time: f64, drift: f64 },
    #[error("trajectories are not on the same grid or time samples")]
    GridMismatch,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Uniform periodic grid `x_j = -L + j·2L/n`, `j = 0..n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialGrid {
    n: usize,
    half_width: f64,
}

impl SpatialGrid {
    pub fn new(n: usize, half_width: f64) -> Result<Self, GridError> {
        if n < 64 || !n.is_power_of_two() {
            return Err(GridError::BadSize(n));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(GridError::BadHalfWidth(half_width));
        }
        Ok(SpatialGrid { n, half_width })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Same box, twice the points.
    pub fn refined(&self) -> SpatialGrid {
        SpatialGrid { n: 2 * self.n, half_width: self.half_width }
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = std::f64::consts::PI / self.half_width;
        (0..self.n)
            .map(|j| if j < self.n / 2 { j as f64 } else { j as f64 - self.n as f64 } * dk)
            .collect()
    }

    /// Number of points in each boundary strip (5% of the box).
    fn boundary_strip(&self) -> usize {
        (self.n as f64 * 0.05).ceil() as usize
    }

    /// Box sizing for a pair of channels: `L = 4 (max|x0| + 3 max σ_vac)`, n = 2048.
    pub fn for_channels(plus: &HarmonicChannel, minus: &HarmonicChannel) -> SpatialGrid {
        let reach = plus.x0.abs().max(minus.x0.abs()) + 3.0 * plus.vacuum_width().max(minus.vacuum_width());
        SpatialGrid::new(2048, 4.0 * reach).expect("auto grid parameters are valid")
    }
}

/// Samples of a spatial wavefunction on a [`SpatialGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelWavefunction {
    pub grid: SpatialGrid,
    pub amplitudes: Vec<Complex64>,
    /// `None` for a packet not yet assigned to a channel.
    pub channel: Option<Channel>,
}

impl ChannelWavefunction {
    pub fn new(grid: SpatialGrid, amplitudes: Vec<Complex64>, channel: Option<Channel>) -> Result<Self, GridError> {
        if amplitudes.len() != grid.n() {
            return Err(GridError::GridMismatch);
        }
        Ok(ChannelWavefunction { grid, amplitudes, channel })
    }

    /// `Σ |ψ_j|² dx`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// `⟨self|other⟩ = Σ conj(self_j) other_j dx`.
    pub fn inner(&self, other: &ChannelWavefunction) -> Result<Complex64, GridError> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.dx())
    }

    /// Largest `|ψ|` within 5% of either boundary.
    pub fn boundary_amplitude(&self) -> f64 {
        let strip = self.grid.boundary_strip();
        let n = self.grid.n();
        self.amplitudes[..strip]
            .iter()
            .chain(&self.amplitudes[n - strip..])
            .fold(0.0, |m, a| m.max(a.norm()))
    }

    pub fn is_box_truncated(&self) -> bool {
        self.boundary_amplitude() >= BOUNDARY_AMPLITUDE
    }

    /// `⟨x⟩`.
    pub fn mean_position(&self) -> f64 {
        let dx = self.grid.dx();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(j, a)| a.norm_sqr() * self.grid.point(j))
            .sum::<f64>()
            * dx
            / self.norm_sqr()
    }

    /// `|ψ_j|²`.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Normalised Gaussian `exp(-(x - c)²/(4σ²) + i k x/ħ)` with position
/// standard deviation `width`.
pub fn initial_packet(
    grid: &SpatialGrid,
    center: f64,
    width: f64,
    momentum: f64,
    hbar: f64,
) -> Result<ChannelWavefunction, GridError> {
    if !(width > 2.0 * grid.dx()) || !width.is_finite() {
        return Err(GridError::InvalidParameter(format!(
            "packet width {width} must exceed two grid spacings ({})",
            2.0 * grid.dx()
        )));
    }
    if !center.is_finite() || !momentum.is_finite() {
        return Err(GridError::InvalidParameter("packet center and momentum must be finite".into()));
    }
    let raw: Vec<Complex64> = grid
        .points()
        .into_iter()
        .map(|x| {
            let d = x - center;
            Complex64::from_polar((-d * d / (4.0 * width * width)).exp(), momentum * x / hbar)
        })
        .collect();
    let mut psi = ChannelWavefunction::new(*grid, raw, None)?;
    let scale = psi.norm_sqr().sqrt().recip();
    psi.amplitudes.iter_mut().for_each(|a| *a *= scale);
    let amplitude = psi.boundary_amplitude();
    if amplitude >= BOUNDARY_AMPLITUDE {
        return Err(GridError::BoxTooSmall { time: 0.0, amplitude });
    }
    Ok(psi)
}

/// `D(t) = ⟨φ₊(t)|φ₋(t)⟩` at every common snapshot.
pub fn decoherence_numeric(plus: &Trajectory, minus: &Trajectory) -> Result<DecoherenceSeries, GridError> {
    if plus.times.len() != minus.times.len()
        || plus.times.iter().zip(&minus.times).any(|(a, b)| a != b)
    {
        return Err(GridError::GridMismatch);
    }
    let values = plus
        .snapshots
        .iter()
        .zip(&minus.snapshots)
        .map(|(a, b)| a.inner(b))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DecoherenceSeries::new(plus.times.clone(), values, Method::Grid)?)
}
