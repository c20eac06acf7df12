//! Per-frequency evaluation of a complete receive chain.

use num_complex::Complex;

use crate::channel::{channel_state_from_impedance, steering_vector, ChannelState, LinkConfig};
use crate::error::Result;
use crate::impedance::{array_impedance_matrix, ArrayGeometry, ImpedanceModel, ImpedanceSet};
use crate::linalg::CMatrix;
use crate::noise::{noise_covariance_with_coupling, NoiseConfig, NoiseCovariance};
use crate::scalar::Real;

/// Channel and noise at one frequency.
#[derive(Debug, Clone)]
pub struct FrequencyResponse<T> {
    pub state: ChannelState<T>,
    pub noise: NoiseCovariance<T>,
}

/// Full circuit model: impedances, loaded coupling, and physically consistent noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitModel<T> {
    pub geometry: ArrayGeometry<T>,
    pub impedance: ImpedanceModel<T>,
    pub link: LinkConfig<T>,
    pub noise: NoiseConfig<T>,
}

impl<T: Real> CircuitModel<T> {
    /// Impedances and response; `P(f)` is factored once and shared by channel and noise.
    pub fn evaluate(&self, freq: T) -> Result<(ImpedanceSet<T>, FrequencyResponse<T>)> {
        let z_set = array_impedance_matrix(&self.geometry, &self.impedance, freq)?;
        let state = channel_state_from_impedance(freq, &self.geometry, &z_set, &self.link)?;
        let noise = noise_covariance_with_coupling(freq, &z_set, &state.coupling, &self.link, &self.noise)?;
        Ok((z_set, FrequencyResponse { state, noise }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArrayModel<T> {
    /// Weakly coupled array with every scalar normalized to one: `h = a(f)`, `R_n = I`.
    WeakUnity { geometry: ArrayGeometry<T>, aoa: T },
    Circuit(CircuitModel<T>),
}

impl<T: Real> ArrayModel<T> {
    pub fn geometry(&self) -> &ArrayGeometry<T> {
        match self {
            ArrayModel::WeakUnity { geometry, .. } => geometry,
            ArrayModel::Circuit(c) => &c.geometry,
        }
    }

    pub fn aoa(&self) -> T {
        match self {
            ArrayModel::WeakUnity { aoa, .. } => *aoa,
            ArrayModel::Circuit(c) => c.link.aoa,
        }
    }

    pub fn response(&self, freq: T) -> Result<FrequencyResponse<T>> {
        match self {
            ArrayModel::WeakUnity { geometry, aoa } => {
                let n = geometry.n_elements();
                let one = Complex::new(T::one(), T::zero());
                let state = ChannelState::from_parts(freq, one, CMatrix::identity(n), steering_vector(freq, *aoa, geometry));
                Ok(FrequencyResponse {
                    state,
                    noise: NoiseCovariance::white(freq, n, T::one())?,
                })
            }
            ArrayModel::Circuit(c) => c.evaluate(freq).map(|(_, r)| r),
        }
    }
}
