//! Instantaneous and band-averaged SNR, weakly coupled closed forms, and squint loss.

use num_complex::Complex;

use crate::beamform::WeightVector;
use crate::channel::ChannelState;
use crate::error::{Error, Result};
use crate::impedance::ArrayGeometry;
use crate::linalg::dot_h;
use crate::noise::NoiseCovariance;
use crate::quadrature::{average_over, QuadratureSpec};
use crate::scalar::{sinc, speed_of_light, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSample<T> {
    pub freq: T,
    /// Linear SNR.
    pub snr: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec<T> {
    /// Hz.
    pub center: T,
    /// Hz.
    pub width: T,
    /// Transmit power per tone, W.
    pub power_per_tone: T,
}

impl<T: Real> BandSpec<T> {
    pub fn new(center: T, width: T, power_per_tone: T) -> Result<Self> {
        let band = Self {
            center,
            width,
            power_per_tone,
        };
        band.validate()?;
        Ok(band)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width >= T::zero()) {
            return Err(Error::domain("band width", self.width.as_f64(), "must be >= 0"));
        }
        if !(self.center - self.width / T::lit(2.0) > T::zero()) {
            return Err(Error::domain("band lower edge", (self.center - self.width / T::lit(2.0)).as_f64(), "must be > 0"));
        }
        if !(self.power_per_tone > T::zero()) {
            return Err(Error::domain("power_per_tone", self.power_per_tone.as_f64(), "must be > 0"));
        }
        Ok(())
    }

    pub fn with_width(&self, width: T) -> Self {
        Self { width, ..*self }
    }

    pub fn lower(&self) -> T {
        self.center - self.width / T::lit(2.0)
    }

    pub fn upper(&self) -> T {
        self.center + self.width / T::lit(2.0)
    }
}

/// Frequency-flat scalars of a weakly coupled array: `γ`, `σ_c^2`, `σ_n^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakScalars<T> {
    pub gamma: Complex<T>,
    pub sigma_c2: Complex<T>,
    pub sigma_n2: T,
}

impl<T: Real> WeakScalars<T> {
    pub fn unity() -> Self {
        let one = Complex::new(T::one(), T::zero());
        Self {
            gamma: one,
            sigma_c2: one,
            sigma_n2: T::one(),
        }
    }

    /// `|γ|^2 |σ_c^2|^2 P_T / σ_n^2`.
    pub fn prefactor(&self, power: T) -> T {
        self.gamma.norm_sqr() * self.sigma_c2.norm_sqr() * power / self.sigma_n2
    }
}

/// `|w^H h|^2 P_T / (w^H R_n w)`.
pub fn snr_instantaneous<T: Real>(
    w: &WeightVector<T>,
    state: &ChannelState<T>,
    rn: &NoiseCovariance<T>,
    power: T,
) -> Result<SnrSample<T>> {
    let n = state.n_elements();
    if w.weights.len() != n {
        return Err(Error::Dimension {
            what: "weight vector",
            got: w.weights.len(),
            expected: n,
        });
    }
    if rn.matrix().rows() != n {
        return Err(Error::Dimension {
            what: "noise covariance",
            got: rn.matrix().rows(),
            expected: n,
        });
    }
    let signal = dot_h(&w.weights, &state.channel).norm_sqr();
    let noise = rn.matrix().quadratic_form(&w.weights).re;
    if !(noise > T::zero()) || !noise.is_finite() {
        return Err(Error::NumericalDegeneracy("w^H R_n w must be positive"));
    }
    Ok(SnrSample {
        freq: state.freq,
        snr: signal * power / noise,
    })
}

/// `sin^2(Nθ/2) / sin^2(θ/2)`, with the series limit near `θ = 0`.
pub fn array_factor_power<T: Real>(theta: T, n: usize) -> T {
    let nf = T::count(n);
    if theta.abs() < T::lit(1e-7) {
        let n2 = nf * nf;
        return n2 - n2 * (n2 - T::one()) * theta * theta / T::lit(12.0);
    }
    let num = (nf * theta / T::lit(2.0)).sin();
    let den = (theta / T::lit(2.0)).sin();
    if den == T::zero() {
        // θ is a nonzero multiple of 2π: grating peak.
        return nf * nf;
    }
    (num * num) / (den * den)
}

/// Phase-controlled SNR of a weakly coupled array at `f` with weights designed at `band.center`.
pub fn snr_conv_wc_closed<T: Real>(
    freq: T,
    band: &BandSpec<T>,
    aoa: T,
    geometry: &ArrayGeometry<T>,
    scalars: &WeakScalars<T>,
) -> SnrSample<T> {
    let n = geometry.n_elements();
    let theta = T::two_pi() * geometry.spacing() / speed_of_light::<T>() * (freq - band.center) * aoa.sin();
    SnrSample {
        freq,
        snr: scalars.prefactor(band.power_per_tone) / T::count(n) * array_factor_power(theta, n),
    }
}

/// Squint-free weakly coupled SNR, `N` times the single-element SNR.
pub fn snr_ttd_wc<T: Real>(scalars: &WeakScalars<T>, n: usize, power: T) -> T {
    scalars.prefactor(power) * T::count(n)
}

/// Band average `(1/Δf) ∫ SNR(f) df` over `[f_c - Δf/2, f_c + Δf/2]`.
pub fn avg_snr_numeric<T: Real>(
    mut snr_fn: impl FnMut(T) -> Result<SnrSample<T>>,
    band: &BandSpec<T>,
    quad: &QuadratureSpec<T>,
) -> Result<T> {
    let [avg] = avg_snr_numeric_many(|f| Ok([snr_fn(f)?.snr]), band, quad)?;
    Ok(avg)
}

/// Band averages of several SNR curves sharing one set of frequency evaluations.
pub fn avg_snr_numeric_many<T: Real, const K: usize>(
    snr_fn: impl FnMut(T) -> Result<[T; K]>,
    band: &BandSpec<T>,
    quad: &QuadratureSpec<T>,
) -> Result<[T; K]> {
    if !(band.width > T::zero()) {
        return Err(Error::domain("band width", band.width.as_f64(), "must be > 0 for numeric averaging"));
    }
    average_over(band.lower(), band.upper(), quad, snr_fn)
}

/// Convention used for `sinc` in the band-averaged closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SincConvention {
    /// `sin(x)/x`, the correct choice here.
    #[default]
    Unnormalized,
    /// `sin(πx)/(πx)`; only useful to check that validation detects it.
    Normalized,
}

impl SincConvention {
    fn eval<T: Real>(self, x: T) -> T {
        match self {
            SincConvention::Unnormalized => sinc(x),
            SincConvention::Normalized => sinc(T::PI() * x),
        }
    }
}

/// Closed-form band-averaged phase-controlled SNR of a weakly coupled array.
pub fn avg_snr_theorem1<T: Real>(band: &BandSpec<T>, aoa: T, geometry: &ArrayGeometry<T>, scalars: &WeakScalars<T>) -> T {
    avg_snr_theorem1_with(band, aoa, geometry, scalars, SincConvention::Unnormalized)
}

pub fn avg_snr_theorem1_with<T: Real>(
    band: &BandSpec<T>,
    aoa: T,
    geometry: &ArrayGeometry<T>,
    scalars: &WeakScalars<T>,
    convention: SincConvention,
) -> T {
    let n = geometry.n_elements();
    let nf = T::count(n);
    let alpha = T::PI() * geometry.spacing() / speed_of_light::<T>() * band.width * aoa.sin();
    let mut sum = T::zero();
    for m in 1..n {
        let mf = T::count(m);
        sum = sum + (T::one() - mf / nf) * convention.eval(alpha * mf);
    }
    scalars.prefactor(band.power_per_tone) * (T::one() + T::lit(2.0) * sum)
}

/// Small-bandwidth quadratic approximation of [`avg_snr_theorem1`].
pub fn avg_snr_corollary1<T: Real>(
    eps: T,
    power: T,
    aoa: T,
    geometry: &ArrayGeometry<T>,
    scalars: &WeakScalars<T>,
) -> T {
    let nf = T::count(geometry.n_elements());
    let x = T::PI() * geometry.spacing() * eps * aoa.sin() / speed_of_light::<T>();
    nf * scalars.prefactor(power) * (T::one() - x * x * (nf - T::one()) * (nf + T::one()) / T::lit(36.0))
}

/// Normalized average-SNR shortfall relative to a squint-free baseline, percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquintLoss<T> {
    raw: T,
}

impl<T: Real> SquintLoss<T> {
    /// Magnitude below which a negative raw loss is reported as zero.
    pub fn tolerance() -> T {
        T::lit(1e-6)
    }

    pub fn raw(&self) -> T {
        self.raw
    }

    /// True when a slightly negative raw loss was clamped to zero.
    pub fn clamped(&self) -> bool {
        self.raw < T::zero() && self.raw >= -Self::tolerance()
    }

    pub fn reported(&self) -> T {
        if self.clamped() {
            T::zero()
        } else {
            self.raw
        }
    }
}

pub fn squint_loss<T: Real>(avg_td: T, avg_x: T) -> Result<SquintLoss<T>> {
    if !(avg_td > T::zero()) {
        return Err(Error::domain("baseline average SNR", avg_td.as_f64(), "must be > 0"));
    }
    Ok(SquintLoss {
        raw: (avg_td - avg_x) / avg_td * T::lit(100.0),
    })
}
