//! Receiver noise covariance from LNA noise and coupled antenna thermal noise.

use num_complex::Complex;

use crate::channel::{coupling_matrix, LinkConfig};
use crate::error::{Error, Result};
use crate::impedance::ImpedanceSet;
use crate::linalg::{CMatrix, Cholesky};
use crate::scalar::{Real, BOLTZMANN};

/// Relative tolerance on the Hermitian defect before symmetrization.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
/// Smallest admissible eigenvalue, relative to `trace / N`.
pub const PSD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig<T> {
    pub boltzmann: T,
    /// K.
    pub temperature: T,
    /// Per-tone noise bandwidth, Hz.
    pub noise_bandwidth: T,
    /// Linear noise factor, `>= 1`.
    pub noise_factor: T,
}

impl<T: Real> NoiseConfig<T> {
    pub fn new(temperature: T, noise_bandwidth: T, noise_factor_db: T) -> Result<Self> {
        let cfg = Self {
            boltzmann: T::lit(BOLTZMANN),
            temperature,
            noise_bandwidth,
            noise_factor: T::lit(10.0).powf(noise_factor_db / T::lit(10.0)),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > T::zero()) {
            return Err(Error::domain("temperature", self.temperature.as_f64(), "must be > 0"));
        }
        if !(self.noise_bandwidth > T::zero()) {
            return Err(Error::domain("noise_bandwidth", self.noise_bandwidth.as_f64(), "must be > 0"));
        }
        if !(self.noise_factor >= T::one()) {
            return Err(Error::domain("noise_factor", self.noise_factor.as_f64(), "must be >= 1 (0 dB)"));
        }
        Ok(())
    }

    /// `4 k_b T Δf`.
    pub fn thermal_scale(&self) -> T {
        T::lit(4.0) * self.boltzmann * self.temperature * self.noise_bandwidth
    }
}

/// Hermitian positive semidefinite noise covariance at one frequency.
#[derive(Debug, Clone)]
pub struct NoiseCovariance<T> {
    pub freq: T,
    matrix: CMatrix<T>,
    chol: Option<Cholesky<T>>,
}

impl<T: Real> NoiseCovariance<T> {
    /// Validates Hermitian symmetry and positive semidefiniteness, then symmetrizes.
    pub fn new(freq: T, raw: CMatrix<T>) -> Result<Self> {
        let n = raw.rows();
        let scale = raw.max_abs();
        let defect = raw.hermitian_defect();
        if defect > T::lit(HERMITIAN_TOLERANCE) * scale {
            return Err(Error::ModelInconsistency {
                what: "noise covariance is not Hermitian",
                measured: (defect / scale).as_f64(),
                tolerance: HERMITIAN_TOLERANCE,
            });
        }
        let matrix = raw.hermitian_part();
        if let Some(chol) = Cholesky::factor(&matrix) {
            return Ok(Self {
                freq,
                matrix,
                chol: Some(chol),
            });
        }
        let tau = T::lit(PSD_TOLERANCE) * matrix.trace().re.abs() / T::count(n.max(1));
        if Cholesky::factor(&matrix.add_diagonal(Complex::new(tau, T::zero()))).is_some() || scale == T::zero() {
            return Ok(Self { freq, matrix, chol: None });
        }
        Err(Error::ModelInconsistency {
            what: "noise covariance has an eigenvalue below -tol * trace / N",
            measured: f64::NAN,
            tolerance: PSD_TOLERANCE,
        })
    }

    /// White covariance `sigma2 * I`.
    pub fn white(freq: T, n: usize, sigma2: T) -> Result<Self> {
        Self::new(freq, CMatrix::identity(n).scale(Complex::new(sigma2, T::zero())))
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn is_definite(&self) -> bool {
        self.chol.is_some()
    }

    /// `R_n^{-1} b` via the Cholesky factor.
    pub fn solve(&self, b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let chol = self.chol.as_ref().ok_or(Error::SingularNoise)?;
        if b.len() != self.matrix.rows() {
            return Err(Error::Dimension {
                what: "noise solve rhs",
                got: b.len(),
                expected: self.matrix.rows(),
            });
        }
        Ok(chol.solve_vec(b))
    }
}

/// `4 k_b T Δf [Re{Z_LNA}(N_f - 1) I + ρ^2 |Z_LNA|^2 P Re{Z_R} P^H]` for a known `P`.
pub fn noise_covariance_with_coupling<T: Real>(
    freq: T,
    z_set: &ImpedanceSet<T>,
    coupling: &CMatrix<T>,
    link: &LinkConfig<T>,
    cfg: &NoiseConfig<T>,
) -> Result<NoiseCovariance<T>> {
    let n = coupling.rows();
    let amp = link.lna_gain * link.lna_gain * link.lna_impedance.norm_sqr();
    let thermal = coupling.matmul(&z_set.z_matrix.real_part()).matmul(&coupling.adjoint());
    let lna = link.lna_impedance.re * (cfg.noise_factor - T::one());
    let scale = cfg.thermal_scale();
    let raw = CMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { lna } else { T::zero() };
        (thermal[(i, j)] * amp + Complex::new(d, T::zero())) * scale
    });
    NoiseCovariance::new(freq, raw)
}

pub fn noise_covariance<T: Real>(
    freq: T,
    z_set: &ImpedanceSet<T>,
    link: &LinkConfig<T>,
    cfg: &NoiseConfig<T>,
) -> Result<NoiseCovariance<T>> {
    let p = coupling_matrix(z_set, link)?;
    noise_covariance_with_coupling(freq, z_set, &p, link, cfg)
}

/// `(σ_c^2, σ_n^2)`: the diagonal entries of `P(f)` and `R_n(f)`.
pub fn weakly_coupled_scalars<T: Real>(
    freq: T,
    z_set: &ImpedanceSet<T>,
    link: &LinkConfig<T>,
    cfg: &NoiseConfig<T>,
) -> Result<(Complex<T>, T)> {
    let p = coupling_matrix(z_set, link)?;
    let rn = noise_covariance_with_coupling(freq, z_set, &p, link, cfg)?;
    Ok((p[(0, 0)], rn.matrix()[(0, 0)].re))
}
