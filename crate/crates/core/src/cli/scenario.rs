//! Turns a [`ScenarioConfig`] into concrete channels, grid, time step and
//! sample times.

use num_complex::Complex64;

use super::config::{ConfigError, ScenarioConfig};
use crate::grid::{initial_packet, ChannelWavefunction, GridError, SpatialGrid};
use crate::harmonic::GaussianPacket;
use crate::potential::{resolve_channel, Channel, HarmonicChannel, SuperpotentialModel};

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub plus: HarmonicChannel,
    pub minus: HarmonicChannel,
    pub grid: SpatialGrid,
    pub dt: f64,
    pub width: f64,
    pub times: Vec<f64>,
}

/// Sample times `k·dt` for every `sample_every`-th step, plus the final step.
pub fn sample_times(dt: f64, steps: usize, sample_every: usize) -> Vec<f64> {
    let mut ks: Vec<usize> = (0..=steps).step_by(sample_every).collect();
    if *ks.last().unwrap() != steps {
        ks.push(steps);
    }
    ks.into_iter().map(|k| k as f64 * dt).collect()
}

impl Scenario {
    pub fn resolve(config: &ScenarioConfig) -> Result<Self, ConfigError> {
        let model = &config.model.model;
        let plus = resolve_channel(model, Channel::Plus)?;
        let minus = resolve_channel(model, Channel::Minus)?;
        let grid = match config.grid.half_width {
            Some(l) => SpatialGrid::new(config.grid.n, l),
            None => SpatialGrid::new(config.grid.n, SpatialGrid::for_channels(&plus, &minus).half_width()),
        }
        .map_err(|e| ConfigError::Invalid { key: "[grid]", message: e.to_string() })?;
        let period = plus.period().min(minus.period());
        let dt = config.evolution.dt.unwrap_or(period / 20000.0);
        let width = config.initial.width.unwrap_or_else(|| {
            let omega = (plus.omega0 * minus.omega0).sqrt();
            (model.hbar() / (2.0 * model.mass() * omega)).sqrt()
        });
        let times = sample_times(dt, config.evolution.steps, config.evolution.sample_every);
        Ok(Scenario { config: config.clone(), plus, minus, grid, dt, width, times })
    }

    pub fn model(&self) -> &SuperpotentialModel {
        &self.config.model.model
    }

    pub fn c_plus(&self) -> Complex64 {
        self.config.initial.c_plus
    }

    pub fn c_minus(&self) -> Complex64 {
        self.config.initial.c_minus
    }

    pub fn clamps(&self) -> [Option<&HarmonicChannel>; 2] {
        if self.config.evolution.clamp_harmonic {
            [Some(&self.plus), Some(&self.minus)]
        } else {
            [None, None]
        }
    }

    pub fn channel(&self, ch: Channel) -> &HarmonicChannel {
        match ch {
            Channel::Plus => &self.plus,
            Channel::Minus => &self.minus,
        }
    }

    pub fn gaussian(&self) -> GaussianPacket {
        let i = &self.config.initial;
        GaussianPacket::with_width(i.center, self.width, i.momentum, self.model().hbar())
    }

    pub fn packet(&self) -> Result<ChannelWavefunction, GridError> {
        let i = &self.config.initial;
        initial_packet(&self.grid, i.center, self.width, i.momentum, self.model().hbar())
    }

    /// Whether the initial packet is the common oscillator vacuum at `x = 0`,
    /// the state the closed forms assume.
    pub fn is_vacuum_at_origin(&self) -> bool {
        let i = &self.config.initial;
        let vac = self.plus.vacuum_width();
        i.center == 0.0 && i.momentum == 0.0 && (self.width - vac).abs() <= 1e-12 * vac
    }
}
