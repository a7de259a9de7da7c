//! Spin amplitudes, two-channel evolution and the reduced spin density matrix.

use num_complex::Complex64;

use super::{decoherence_numeric, propagate, ChannelWavefunction, GridError, SpatialGrid, Trajectory};
use crate::potential::{Channel, HarmonicChannel, SuperpotentialModel};
use crate::series::DecoherenceSeries;

const AMPLITUDE_TOLERANCE: f64 = 1e-12;

fn check_amplitudes(c_plus: Complex64, c_minus: Complex64) -> Result<(), GridError> {
    let total = c_plus.norm_sqr() + c_minus.norm_sqr();
    if (total - 1.0).abs() > AMPLITUDE_TOLERANCE {
        return Err(GridError::InvalidParameter(format!(
            "spin amplitudes must satisfy |C+|^2 + |C-|^2 = 1, got {total}"
        )));
    }
    Ok(())
}

/// 2×2 density matrix over `{|+⟩, |−⟩}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedDensity {
    pub rho: [[Complex64; 2]; 2],
}

impl ReducedDensity {
    pub fn trace(&self) -> Complex64 {
        self.rho[0][0] + self.rho[1][1]
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.rho[0][0].re;
        let d = self.rho[1][1].re;
        let b = self.rho[0][1].norm();
        let mid = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        [mid - r, mid + r]
    }

    /// Hermitian, unit trace and positive semidefinite within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        let hermitian = self.rho[0][0].im.abs() <= tol
            && self.rho[1][1].im.abs() <= tol
            && (self.rho[0][1] - self.rho[1][0].conj()).norm() <= tol;
        hermitian && (self.trace() - 1.0).norm() <= tol && self.eigenvalues()[0] >= -tol
    }
}

/// `ρ = |C₊|²|+⟩⟨+| + |C₋|²|−⟩⟨−| + C₊C₋* D* |+⟩⟨−| + h.c.`, the partial trace
/// over position with `D = ⟨φ₊|φ₋⟩`.
pub fn reduced_density(c_plus: Complex64, c_minus: Complex64, d: Complex64) -> ReducedDensity {
    let off = c_plus * c_minus.conj() * d.conj();
    ReducedDensity {
        rho: [
            [Complex64::new(c_plus.norm_sqr(), 0.0), off],
            [off.conj(), Complex64::new(c_minus.norm_sqr(), 0.0)],
        ],
    }
}

/// `Tr ρ²`.
pub fn purity(rho: &ReducedDensity) -> f64 {
    rho.rho
        .iter()
        .flat_map(|row| row.iter())
        .map(|z| z.norm_sqr())
        .sum()
}

/// `C₊|+⟩|φ₊⟩ + C₋|−⟩|φ₋⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorState {
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    pub phi_plus: ChannelWavefunction,
    pub phi_minus: ChannelWavefunction,
}

impl SpinorState {
    /// Factorised state `(C₊|+⟩ + C₋|−⟩) ⊗ |φ⟩`.
    pub fn factorized(c_plus: Complex64, c_minus: Complex64, packet: &ChannelWavefunction) -> Result<Self, GridError> {
        check_amplitudes(c_plus, c_minus)?;
        let mut phi_plus = packet.clone();
        phi_plus.channel = Some(Channel::Plus);
        let mut phi_minus = packet.clone();
        phi_minus.channel = Some(Channel::Minus);
        Ok(SpinorState { c_plus, c_minus, phi_plus, phi_minus })
    }

    /// Partial trace over position.
    pub fn reduced_density(&self) -> Result<ReducedDensity, GridError> {
        let pp = self.phi_plus.inner(&self.phi_plus)?;
        let mm = self.phi_minus.inner(&self.phi_minus)?;
        let mp = self.phi_minus.inner(&self.phi_plus)?;
        let off = self.c_plus * self.c_minus.conj() * mp;
        Ok(ReducedDensity {
            rho: [
                [pp * self.c_plus.norm_sqr(), off],
                [off.conj(), mm * self.c_minus.norm_sqr()],
            ],
        })
    }

    /// Evolves both channels concurrently. `clamps` holds the optional
    /// quadratic models for the plus and minus channels.
    #[allow(clippy::too_many_arguments)]
    pub fn evolve(
        &self,
        model: &SuperpotentialModel,
        grid: &SpatialGrid,
        dt: f64,
        steps: usize,
        clamps: [Option<&HarmonicChannel>; 2],
        sample_every: usize,
    ) -> Result<SpinorTrajectory, GridError> {
        let (plus, minus) = std::thread::scope(|s| {
            let plus = s.spawn(|| propagate(model, grid, &self.phi_plus, Channel::Plus, dt, steps, clamps[0], sample_every));
            let minus = propagate(model, grid, &self.phi_minus, Channel::Minus, dt, steps, clamps[1], sample_every);
            (plus.join().expect("propagation thread panicked"), minus)
        });
        Ok(SpinorTrajectory { c_plus: self.c_plus, c_minus: self.c_minus, plus: plus?, minus: minus? })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinorTrajectory {
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    pub plus: Trajectory,
    pub minus: Trajectory,
}

impl SpinorTrajectory {
    pub fn times(&self) -> &[f64] {
        &self.plus.times
    }

    pub fn decoherence(&self) -> Result<DecoherenceSeries, GridError> {
        decoherence_numeric(&self.plus, &self.minus)
    }

    pub fn state(&self, k: usize) -> SpinorState {
        SpinorState {
            c_plus: self.c_plus,
            c_minus: self.c_minus,
            phi_plus: self.plus.snapshots[k].clone(),
            phi_minus: self.minus.snapshots[k].clone(),
        }
    }

    /// Reduced density at every snapshot.
    pub fn reduced_densities(&self) -> Result<Vec<ReducedDensity>, GridError> {
        (0..self.plus.snapshots.len()).map(|k| self.state(k).reduced_density()).collect()
    }

    pub fn warnings(&self) -> impl Iterator<Item = &String> {
        self.plus.warnings.iter().chain(&self.minus.warnings)
    }
}
