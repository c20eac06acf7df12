//! Constant-modulus weight construction for phase-controlled and time-delay beamformers.
//!
//! Weights follow `w_k = exp(+j 2π f Δt_k)` and the combiner applies `w^H`.
//! Delays extracted from phases use the principal branch `(-π, π]`, so a
//! delay derived at `f` lies in `(-1/(2f), 1/(2f)]`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::channel::{steering_vector, ChannelState};
use crate::error::{Error, Result};
use crate::impedance::ArrayGeometry;
use crate::noise::NoiseCovariance;
use crate::scalar::{cis, principal_arg, speed_of_light, Real};
use crate::system::{ArrayModel, FrequencyResponse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BeamformerKind {
    Conv,
    TtdWc,
    Pop,
    TdGeneric,
    TdI,
    TdII,
    TdOpt,
}

impl BeamformerKind {
    pub const ALL: [BeamformerKind; 7] = [
        BeamformerKind::Conv,
        BeamformerKind::TtdWc,
        BeamformerKind::Pop,
        BeamformerKind::TdGeneric,
        BeamformerKind::TdI,
        BeamformerKind::TdII,
        BeamformerKind::TdOpt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BeamformerKind::Conv => "conv",
            BeamformerKind::TtdWc => "ttd-wc",
            BeamformerKind::Pop => "pop",
            BeamformerKind::TdGeneric => "td-generic",
            BeamformerKind::TdI => "td-i",
            BeamformerKind::TdII => "td-ii",
            BeamformerKind::TdOpt => "td-opt",
        }
    }
}

impl fmt::Display for BeamformerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BeamformerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BeamformerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown beamformer `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<T> {
    pub freq: T,
    pub weights: Vec<Complex<T>>,
}

impl<T: Real> WeightVector<T> {
    /// Largest `| |w_k| - 1 |`.
    pub fn modulus_defect(&self) -> T {
        self.weights
            .iter()
            .map(|w| (w.norm() - T::one()).abs())
            .fold(T::zero(), T::max)
    }

    /// Weights rotated by a common phase.
    pub fn rotated(&self, phase: T) -> Self {
        let r = cis(phase);
        Self {
            freq: self.freq,
            weights: self.weights.iter().map(|&w| w * r).collect(),
        }
    }
}

fn unit_phases<T: Real>(freq: T, x: &[Complex<T>]) -> WeightVector<T> {
    WeightVector {
        freq,
        weights: x.iter().map(|&z| cis(principal_arg(z))).collect(),
    }
}

/// `w = a(f_c)`, applied unchanged at every frequency.
pub fn conv_weights<T: Real>(design_freq: T, aoa: T, geometry: &ArrayGeometry<T>) -> WeightVector<T> {
    WeightVector {
        freq: design_freq,
        weights: steering_vector(design_freq, aoa, geometry),
    }
}

/// Geometric true-time-delay weights at `f`.
pub fn ttd_wc_weights<T: Real>(freq: T, aoa: T, geometry: &ArrayGeometry<T>) -> WeightVector<T> {
    td_generic_weights(&td1_geometric_delays(aoa, geometry), freq)
}

/// Phases of the whitened matched filter `R_n^{-1} ã(f_c)`.
///
/// `w^H = exp[j∠(γ* a^H P^H R_n^{-1})]` is the conjugate of `exp[j∠(R_n^{-1} γ P a)]`
/// because `R_n` is Hermitian.
pub fn pop_weights<T: Real>(design_freq: T, state: &ChannelState<T>, rn: &NoiseCovariance<T>) -> Result<WeightVector<T>> {
    let whitened = rn.solve(state.distorted_steering())?;
    Ok(unit_phases(design_freq, &whitened))
}

pub fn td_generic_weights<T: Real>(delays: &[T], freq: T) -> WeightVector<T> {
    WeightVector {
        freq,
        weights: delays.iter().map(|&d| cis(T::two_pi() * freq * d)).collect(),
    }
}

/// `Δt_k(f) = ∠([R_n^{-1}(f) ã(f)]_k [R_n^{-1}(f) ã(f)]_1^*) / (2π f)`.
///
/// Phases are taken relative to the first element, so `Δt_1 = 0` as for the
/// geometric delays, and a common phase on the channel (such as `ψ`) cannot
/// move individual delays across the principal-branch cut.
pub fn optimal_delays<T: Real>(freq: T, state: &ChannelState<T>, rn: &NoiseCovariance<T>) -> Result<Vec<T>> {
    if !(freq > T::zero()) {
        return Err(Error::domain("frequency", freq.as_f64(), "must be > 0"));
    }
    let whitened = rn.solve(state.distorted_steering())?;
    let reference = whitened.first().map_or(Complex::new(T::one(), T::zero()), |z| z.conj());
    let omega = T::two_pi() * freq;
    Ok(whitened.iter().map(|&z| principal_arg(z * reference) / omega).collect())
}

/// `Δt_k = (δ/c) (k-1) sin φ`.
pub fn td1_geometric_delays<T: Real>(aoa: T, geometry: &ArrayGeometry<T>) -> Vec<T> {
    let step = geometry.spacing() / speed_of_light::<T>() * aoa.sin();
    (0..geometry.n_elements()).map(|k| step * T::count(k)).collect()
}

/// Optimal delays frozen at the design frequency.
pub fn td2_center_delays<T: Real>(design_freq: T, state: &ChannelState<T>, rn: &NoiseCovariance<T>) -> Result<Vec<T>> {
    optimal_delays(design_freq, state, rn)
}

/// A designed beamformer: fixed weights, fixed delays, or per-frequency optimal delays.
#[derive(Debug, Clone, PartialEq)]
pub enum Beamformer<T> {
    Conv { weights: WeightVector<T> },
    TtdWc { delays: Vec<T> },
    Pop { weights: WeightVector<T> },
    TdGeneric { delays: Vec<T> },
    TdI { delays: Vec<T> },
    TdII { design_freq: T, delays: Vec<T> },
    TdOpt,
}

impl<T: Real> Beamformer<T> {
    /// Designs `kind` for `model` at `design_freq`. `TdGeneric` needs explicit delays instead.
    pub fn design(kind: BeamformerKind, model: &ArrayModel<T>, design_freq: T) -> Result<Self> {
        let geometry = model.geometry();
        let aoa = model.aoa();
        let center = || model.response(design_freq);
        Ok(match kind {
            BeamformerKind::Conv => Beamformer::Conv {
                weights: conv_weights(design_freq, aoa, geometry),
            },
            BeamformerKind::TtdWc => Beamformer::TtdWc {
                delays: td1_geometric_delays(aoa, geometry),
            },
            BeamformerKind::TdI => Beamformer::TdI {
                delays: td1_geometric_delays(aoa, geometry),
            },
            BeamformerKind::Pop => {
                let r = center()?;
                Beamformer::Pop {
                    weights: pop_weights(design_freq, &r.state, &r.noise)?,
                }
            }
            BeamformerKind::TdII => {
                let r = center()?;
                Beamformer::TdII {
                    design_freq,
                    delays: td2_center_delays(design_freq, &r.state, &r.noise)?,
                }
            }
            BeamformerKind::TdOpt => Beamformer::TdOpt,
            BeamformerKind::TdGeneric => {
                return Err(Error::Config("td-generic requires explicit delays".into()));
            }
        })
    }

    pub fn td_generic(delays: Vec<T>) -> Self {
        Beamformer::TdGeneric { delays }
    }

    pub fn kind(&self) -> BeamformerKind {
        match self {
            Beamformer::Conv { .. } => BeamformerKind::Conv,
            Beamformer::TtdWc { .. } => BeamformerKind::TtdWc,
            Beamformer::Pop { .. } => BeamformerKind::Pop,
            Beamformer::TdGeneric { .. } => BeamformerKind::TdGeneric,
            Beamformer::TdI { .. } => BeamformerKind::TdI,
            Beamformer::TdII { .. } => BeamformerKind::TdII,
            Beamformer::TdOpt => BeamformerKind::TdOpt,
        }
    }

    /// Weights applied to a signal at `response.state.freq`.
    pub fn weights(&self, response: &FrequencyResponse<T>) -> Result<WeightVector<T>> {
        let f = response.state.freq;
        let n = response.state.n_elements();
        let w = match self {
            Beamformer::Conv { weights } | Beamformer::Pop { weights } => weights.clone(),
            Beamformer::TtdWc { delays }
            | Beamformer::TdGeneric { delays }
            | Beamformer::TdI { delays }
            | Beamformer::TdII { delays, .. } => td_generic_weights(delays, f),
            Beamformer::TdOpt => td_generic_weights(&optimal_delays(f, &response.state, &response.noise)?, f),
        };
        if w.weights.len() != n {
            return Err(Error::Dimension {
                what: "weight vector",
                got: w.weights.len(),
                expected: n,
            });
        }
        Ok(w)
    }
}
