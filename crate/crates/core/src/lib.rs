//! Beam squint analysis for mutually coupled wideband uniform linear arrays.
//!
//! The crate models the receive chain of a line-of-sight SIMO link with
//! circuit theory: Chu-limited element impedances, mutual impedances, the
//! loaded coupling matrix `P(f)`, and the physically consistent noise
//! covariance `R_n(f)`. On top of that it builds phase-controlled and
//! time-delay beamformers, evaluates their SNR across frequency, averages it
//! over a band, and reports the normalized squint loss.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`, which is what the experiment
//! harness uses.

// Negated comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod beamform;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod impedance;
pub mod linalg;
pub mod metrics;
pub mod noise;
pub mod quadrature;
pub mod scalar;
pub mod system;

pub use beamform::{Beamformer, BeamformerKind, WeightVector};
pub use channel::{ChannelState, LinkConfig};
pub use error::{Error, Result};
pub use impedance::{AntennaElement, ArrayGeometry, ImpedanceModel, ImpedanceSet, MutualImpedanceModel};
pub use linalg::CMatrix;
pub use metrics::{BandSpec, SnrSample, SquintLoss, WeakScalars};
pub use noise::{NoiseConfig, NoiseCovariance};
pub use quadrature::QuadratureSpec;
pub use scalar::{Real, BOLTZMANN, SPEED_OF_LIGHT};
pub use system::{ArrayModel, CircuitModel, FrequencyResponse};

pub type Complex64 = num_complex::Complex<f64>;
pub type CMatrix64 = CMatrix<f64>;
pub type ArrayGeometry64 = ArrayGeometry<f64>;
pub type AntennaElement64 = AntennaElement<f64>;
pub type ImpedanceModel64 = ImpedanceModel<f64>;
pub type ImpedanceSet64 = ImpedanceSet<f64>;
pub type LinkConfig64 = LinkConfig<f64>;
pub type ChannelState64 = ChannelState<f64>;
pub type NoiseConfig64 = NoiseConfig<f64>;
pub type NoiseCovariance64 = NoiseCovariance<f64>;
pub type BandSpec64 = BandSpec<f64>;
pub type WeakScalars64 = WeakScalars<f64>;
pub type Beamformer64 = Beamformer<f64>;
pub type ArrayModel64 = ArrayModel<f64>;
pub type CircuitModel64 = CircuitModel<f64>;
pub type QuadratureSpec64 = QuadratureSpec<f64>;

pub type ArrayGeometry32 = ArrayGeometry<f32>;
pub type LinkConfig32 = LinkConfig<f32>;
pub type ArrayModel32 = ArrayModel<f32>;
