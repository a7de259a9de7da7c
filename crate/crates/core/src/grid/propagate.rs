//! Second-order Strang split-operator propagation with an FFT kinetic step.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{ChannelWavefunction, GridError, SpatialGrid, BOUNDARY_AMPLITUDE, NORM_TOLERANCE};
use crate::potential::{effective_potential, Channel, HarmonicChannel, SuperpotentialModel};

/// `V±` on the grid, or the quadratic model when clamped.
pub fn potential_on_grid(
    model: &SuperpotentialModel,
    grid: &SpatialGrid,
    ch: Channel,
    clamp: Option<&HarmonicChannel>,
) -> Vec<f64> {
    match clamp {
        Some(hc) => grid.points().into_iter().map(|x| hc.potential(x)).collect(),
        None => {
            let v = effective_potential(model, ch);
            grid.points().into_iter().map(|x| v.evaluate(x)).collect()
        }
    }
}

/// Precomputed phases and FFT plans for one channel and time step.
pub struct Propagator {
    grid: SpatialGrid,
    half_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Propagator {
    pub fn new(grid: &SpatialGrid, potential: &[f64], mass: f64, hbar: f64, dt: f64) -> Self {
        let n = grid.n();
        let half_potential = potential
            .iter()
            .map(|v| Complex64::from_polar(1.0, -0.5 * v * dt / hbar))
            .collect();
        let scale = 1.0 / n as f64;
        let kinetic = grid
            .wavenumbers()
            .into_iter()
            .map(|k| Complex64::from_polar(scale, -hbar * k * k * dt / (2.0 * mass)))
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Propagator {
            grid: *grid,
            half_potential,
            kinetic,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    /// One step `e^{-iVdt/2ħ} e^{-iTdt/ħ} e^{-iVdt/2ħ}` in place.
    pub fn step(&mut self, psi: &mut [Complex64]) {
        debug_assert_eq!(psi.len(), self.grid.n());
        psi.iter_mut().zip(&self.half_potential).for_each(|(a, p)| *a *= p);
        self.forward.process_with_scratch(psi, &mut self.scratch);
        psi.iter_mut().zip(&self.kinetic).for_each(|(a, p)| *a *= p);
        self.inverse.process_with_scratch(psi, &mut self.scratch);
        psi.iter_mut().zip(&self.half_potential).for_each(|(a, p)| *a *= p);
    }
}

/// Sampled snapshots of one channel.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub channel: Channel,
    pub times: Vec<f64>,
    pub snapshots: Vec<ChannelWavefunction>,
    pub max_norm_drift: f64,
    pub warnings: Vec<String>,
}

/// Propagates `psi0` under `H±` for `steps` steps of `dt`, keeping a snapshot
/// every `sample_every` steps plus `t = 0` and the final time.
#[allow(clippy::too_many_arguments)]
pub fn propagate(
    model: &SuperpotentialModel,
    grid: &SpatialGrid,
    psi0: &ChannelWavefunction,
    ch: Channel,
    dt: f64,
    steps: usize,
    clamp: Option<&HarmonicChannel>,
    sample_every: usize,
) -> Result<Trajectory, GridError> {
    if psi0.grid != *grid {
        return Err(GridError::GridMismatch);
    }
    if steps == 0 || sample_every == 0 {
        return Err(GridError::InvalidParameter("steps and sample_every must be at least 1".into()));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(GridError::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    let potential = potential_on_grid(model, grid, ch, clamp);
    let mut warnings = Vec::new();
    let occupied_max = psi0
        .amplitudes
        .iter()
        .zip(&potential)
        .filter(|(a, _)| a.norm() > BOUNDARY_AMPLITUDE)
        .fold(0.0_f64, |m, (_, v)| m.max(v.abs()));
    if dt * occupied_max > 0.1 * model.hbar() {
        warnings.push(format!(
            "channel {ch}: dt·max|V| = {:.3e} exceeds 0.1ħ over the occupied region",
            dt * occupied_max
        ));
    }

    let mut stepper = Propagator::new(grid, &potential, model.mass(), model.hbar(), dt);
    let norm0 = psi0.norm_sqr();
    let mut psi = psi0.amplitudes.clone();
    let mut times = vec![0.0];
    let mut snapshots = vec![ChannelWavefunction { grid: *grid, amplitudes: psi.clone(), channel: Some(ch) }];
    let mut max_drift = 0.0_f64;
    for k in 1..=steps {
        stepper.step(&mut psi);
        if k % sample_every != 0 && k != steps {
            continue;
        }
        let t = k as f64 * dt;
        let snap = ChannelWavefunction { grid: *grid, amplitudes: psi.clone(), channel: Some(ch) };
        let drift = (snap.norm_sqr() - norm0).abs();
        max_drift = max_drift.max(drift);
        if drift > NORM_TOLERANCE {
            return Err(GridError::NormDrift { time: t, drift });
        }
        let amplitude = snap.boundary_amplitude();
        if amplitude >= BOUNDARY_AMPLITUDE {
            return Err(GridError::BoxTooSmall { time: t, amplitude });
        }
        times.push(t);
        snapshots.push(snap);
    }
    Ok(Trajectory { channel: ch, times, snapshots, max_norm_drift: max_drift, warnings })
}
