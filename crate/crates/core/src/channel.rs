//! Frequency-domain SIMO line-of-sight channel `h(f) = γ(f) P(f) a(f)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::impedance::{array_impedance_matrix, ArrayGeometry, ImpedanceModel, ImpedanceSet};
use crate::linalg::{CMatrix, Lu};
use crate::scalar::{cis, speed_of_light, Real};

/// Condition-number estimate above which the loaded impedance matrix is treated as singular.
pub const COUPLING_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConfig<T> {
    /// Transmitter-receiver distance, m.
    pub distance: T,
    pub path_loss_exponent: T,
    pub tx_gain: T,
    pub rx_gain: T,
    /// Angle of arrival from broadside, rad.
    pub aoa: T,
    /// Source impedance `Z_G`, Ω.
    pub source_impedance: Complex<T>,
    /// LNA voltage gain.
    pub lna_gain: T,
    /// LNA input impedance, Ω.
    pub lna_impedance: Complex<T>,
    /// Circuit phase `ψ`, rad. Every SNR is invariant to it.
    pub psi: T,
}

impl<T: Real> LinkConfig<T> {
    /// 90 m link, `η = 3.5`, `G_T = G_R = 1.5`, `ρ = 10`, 1 Ω source and LNA, AoA π/3.
    pub fn reference() -> Self {
        Self {
            distance: T::lit(90.0),
            path_loss_exponent: T::lit(3.5),
            tx_gain: T::lit(1.5),
            rx_gain: T::lit(1.5),
            aoa: T::FRAC_PI_3(),
            source_impedance: Complex::new(T::one(), T::zero()),
            lna_gain: T::lit(10.0),
            lna_impedance: Complex::new(T::one(), T::zero()),
            psi: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.distance > T::zero()) {
            return Err(Error::domain("distance", self.distance.as_f64(), "must be > 0"));
        }
        if !(self.path_loss_exponent > T::zero()) {
            return Err(Error::domain("path_loss_exponent", self.path_loss_exponent.as_f64(), "must be > 0"));
        }
        if !(self.tx_gain > T::zero()) || !(self.rx_gain > T::zero()) {
            return Err(Error::domain("antenna gain", self.tx_gain.min(self.rx_gain).as_f64(), "must be > 0"));
        }
        if !(self.aoa.abs() <= T::FRAC_PI_2()) {
            return Err(Error::domain("aoa", self.aoa.as_f64(), "must lie in [-pi/2, pi/2]"));
        }
        if !(self.lna_impedance.re > T::zero()) {
            return Err(Error::domain("Re{lna_impedance}", self.lna_impedance.re.as_f64(), "must be > 0"));
        }
        Ok(())
    }
}

/// Per-frequency channel quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState<T> {
    pub freq: T,
    pub gamma: Complex<T>,
    pub coupling: CMatrix<T>,
    pub steering: Vec<Complex<T>>,
    pub channel: Vec<Complex<T>>,
}

impl<T: Real> ChannelState<T> {
    /// Distorted steering vector `ã(f)`; identical to the channel by construction.
    pub fn distorted_steering(&self) -> &[Complex<T>] {
        &self.channel
    }

    pub fn n_elements(&self) -> usize {
        self.steering.len()
    }

    /// Assembles a state from its parts with `h = γ P a`.
    pub fn from_parts(freq: T, gamma: Complex<T>, coupling: CMatrix<T>, steering: Vec<Complex<T>>) -> Self {
        let channel = coupling.mul_vec(&steering).into_iter().map(|z| z * gamma).collect();
        Self {
            freq,
            gamma,
            coupling,
            steering,
            channel,
        }
    }
}

pub fn steering_vector<T: Real>(freq: T, aoa: T, geometry: &ArrayGeometry<T>) -> Vec<Complex<T>> {
    let step = T::two_pi() * freq * geometry.spacing() / speed_of_light::<T>() * aoa.sin();
    (0..geometry.n_elements()).map(|k| cis(step * T::count(k))).collect()
}

/// `β(f) = G_T G_R (c / (2π f d^{η/2}))^2`.
pub fn path_gain<T: Real>(freq: T, link: &LinkConfig<T>) -> Result<T> {
    if !(freq > T::zero()) {
        return Err(Error::domain("frequency", freq.as_f64(), "must be > 0"));
    }
    let amp = speed_of_light::<T>() / (T::two_pi() * freq * link.distance.powf(link.path_loss_exponent / T::lit(2.0)));
    Ok(link.tx_gain * link.rx_gain * amp * amp)
}

/// `γ(f) = ρ Z_LNA sqrt(Re{Z_T} Re{Z_R} β) / (Z_T + Z_G) e^{jψ}`.
pub fn gamma_scalar<T: Real>(freq: T, link: &LinkConfig<T>, z_tx: Complex<T>, z_rx_self: Complex<T>) -> Result<Complex<T>> {
    if z_tx.re < T::zero() {
        return Err(Error::domain("Re{z_tx}", z_tx.re.as_f64(), "must be >= 0"));
    }
    if z_rx_self.re < T::zero() {
        return Err(Error::domain("Re{z_rx_self}", z_rx_self.re.as_f64(), "must be >= 0"));
    }
    let source = z_tx + link.source_impedance;
    if source.norm_sqr() == T::zero() {
        return Err(Error::SingularSource);
    }
    let beta = path_gain(freq, link)?;
    let root = (z_tx.re * z_rx_self.re * beta).sqrt();
    Ok(link.lna_impedance * link.lna_gain * root / source * cis(link.psi))
}

/// `P(f) = (Z_R(f) + Z_LNA I)^{-1}` by LU solves against the identity.
pub fn coupling_matrix<T: Real>(z_set: &ImpedanceSet<T>, link: &LinkConfig<T>) -> Result<CMatrix<T>> {
    let loaded = z_set.z_matrix.add_diagonal(link.lna_impedance);
    let n = loaded.rows();
    let lu = Lu::factor(&loaded)?;
    let identity = CMatrix::identity(n);
    let p = lu.solve_mat(&identity);
    let condition = (loaded.norm_1() * p.norm_1()).as_f64();
    if !condition.is_finite() || condition > COUPLING_CONDITION_LIMIT {
        return Err(Error::SingularCoupling { condition });
    }
    let residual = loaded.matmul(&p).sub(&identity).norm_inf();
    // Backward-stable LU keeps the residual near machine precision times the condition.
    let allowed = T::lit(1e-10).max(T::epsilon() * T::lit(64.0) * T::lit(condition) * T::count(n));
    if !(residual <= allowed) {
        return Err(Error::SingularCoupling { condition });
    }
    Ok(p)
}

/// Channel state computed from an already assembled impedance set.
pub fn channel_state_from_impedance<T: Real>(
    freq: T,
    geometry: &ArrayGeometry<T>,
    z_set: &ImpedanceSet<T>,
    link: &LinkConfig<T>,
) -> Result<ChannelState<T>> {
    let gamma = gamma_scalar(freq, link, z_set.z_self_tx, z_set.z_self_rx)?;
    let coupling = coupling_matrix(z_set, link)?;
    let steering = steering_vector(freq, link.aoa, geometry);
    Ok(ChannelState::from_parts(freq, gamma, coupling, steering))
}

pub fn channel_state<T: Real>(
    freq: T,
    geometry: &ArrayGeometry<T>,
    model: &ImpedanceModel<T>,
    link: &LinkConfig<T>,
) -> Result<ChannelState<T>> {
    let z_set = array_impedance_matrix(geometry, model, freq)?;
    channel_state_from_impedance(freq, geometry, &z_set, link)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::impedance::{AntennaElement, MutualImpedanceModel};
    use crate::SPEED_OF_LIGHT;

    fn geometry(n: usize, spacing: f64) -> ArrayGeometry<f64> {
        ArrayGeometry::new(n, spacing, AntennaElement::new(spacing / 2.5).unwrap()).unwrap()
    }

    fn tight_model() -> ImpedanceModel<f64> {
        ImpedanceModel::new(MutualImpedanceModel::default(), 10e9)
    }

    #[test]
    fn steering_single_element_and_broadside() {
        assert_eq!(steering_vector(10e9, 0.7, &geometry(1, 0.005)), vec![Complex::new(1.0, 0.0)]);
        for z in steering_vector(13e9, 0.0, &geometry(4, 0.005)) {
            assert_eq!(z, Complex::new(1.0, 0.0));
        }
    }

    #[test]
    fn steering_half_wave_endfire_alternates() {
        let delta = 0.015;
        let f = SPEED_OF_LIGHT / (2.0 * delta);
        let a = steering_vector(f, std::f64::consts::FRAC_PI_2, &geometry(3, delta));
        let expect = [1.0, -1.0, 1.0];
        for (z, e) in a.iter().zip(expect) {
            assert!((z - Complex::new(e, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn path_gain_laws() {
        let link = LinkConfig::<f64>::reference();
        let b1 = path_gain(5e9, &link).unwrap();
        let b2 = path_gain(10e9, &link).unwrap();
        assert!((b1 / b2 - 4.0).abs() < 1e-12);
        let unit = LinkConfig {
            distance: 1.0,
            tx_gain: 1.0,
            rx_gain: 1.0,
            path_loss_exponent: 2.7,
            ..link
        };
        let f = 3e9;
        let expect = (SPEED_OF_LIGHT / (std::f64::consts::TAU * f)).powi(2);
        assert!((path_gain(f, &unit).unwrap() - expect).abs() < 1e-15 * expect.max(1.0));
        assert!(path_gain(0.0, &link).is_err());
        let farther = LinkConfig { distance: 100.0, ..link };
        assert!(path_gain(10e9, &farther).unwrap() < b2);
    }

    #[test]
    fn path_gain_reference_value() {
        // 1.5 * 1.5 * (c / (2 pi 1e10 90^1.75))^2 by hand.
        let c = 299_792_458.0_f64;
        let denom = 2.0 * std::f64::consts::PI * 1e10 * 90f64.powf(1.75);
        let expect = 2.25 * (c / denom) * (c / denom);
        let got = path_gain(1e10, &LinkConfig::reference()).unwrap();
        assert!(((got - expect) / expect).abs() < 1e-14);
        assert!(got > 0.0);
    }

    #[test]
    fn gamma_psi_is_pure_phase() {
        let link = LinkConfig::<f64>::reference();
        let zt = Complex::new(1.0, 0.3);
        let zr = Complex::new(1.0, -2.0);
        let g0 = gamma_scalar(10e9, &link, zt, zr).unwrap();
        let gpi = gamma_scalar(10e9, &LinkConfig { psi: std::f64::consts::PI, ..link }, zt, zr).unwrap();
        assert!((g0 + gpi).norm() < 1e-15 * g0.norm().max(1e-300) + 1e-30);
        assert!((g0.norm() - gpi.norm()).abs() <= 1e-15 * g0.norm());
    }

    #[test]
    fn gamma_vanishes_without_transmit_resistance() {
        let link = LinkConfig::<f64>::reference();
        let g = gamma_scalar(10e9, &link, Complex::new(0.0, 5.0), Complex::new(1.0, 0.0)).unwrap();
        assert_eq!(g.norm(), 0.0);
    }

    #[test]
    fn gamma_singular_source() {
        let link = LinkConfig::<f64>::reference();
        let err = gamma_scalar(10e9, &LinkConfig { source_impedance: Complex::new(0.0, -1.0), ..link }, Complex::new(0.0, 1.0), Complex::new(1.0, 0.0));
        assert!(matches!(err, Err(Error::SingularSource)));
    }

    #[test]
    fn gamma_reference_magnitude() {
        let link = LinkConfig::<f64>::reference();
        let g = geometry(4, 0.005);
        let set = array_impedance_matrix(&g, &tight_model(), 10e9).unwrap();
        let gamma = gamma_scalar(10e9, &link, set.z_self_tx, set.z_self_rx).unwrap();
        // At resonance Z_T = Z_R = 1 Ω, so |γ| = ρ sqrt(β) / 2.
        let expect = 10.0 * path_gain(10e9, &link).unwrap().sqrt() / 2.0;
        assert!(((gamma.norm() - expect) / expect).abs() < 1e-9);
    }

    #[test]
    fn zero_model_coupling_is_diagonal_inverse() {
        let link = LinkConfig::<f64>::reference();
        let g = geometry(3, 0.005);
        let model = ImpedanceModel::new(MutualImpedanceModel::Zero, 10e9);
        let set = array_impedance_matrix(&g, &model, 8e9).unwrap();
        let p = coupling_matrix(&set, &link).unwrap();
        let sigma = (set.z_self_rx + link.lna_impedance).inv();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { sigma } else { Complex::new(0.0, 0.0) };
                assert!((p[(i, j)] - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn n2_coupling_matches_adjugate() {
        let link = LinkConfig::<f64>::reference();
        let g = geometry(2, 0.005);
        let set = array_impedance_matrix(&g, &tight_model(), 9e9).unwrap();
        let p = coupling_matrix(&set, &link).unwrap();
        let a = set.z_matrix[(0, 0)] + link.lna_impedance;
        let b = set.z_matrix[(0, 1)];
        let det = a * a - b * b;
        let inv = [[a / det, -b / det], [-b / det, a / det]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((p[(i, j)] - inv[i][j]).norm() < 1e-13 * inv[i][j].norm().max(1.0));
            }
        }
    }

    #[test]
    fn state_invariants_and_reduction() {
        let link = LinkConfig::<f64>::reference();
        let g = geometry(4, 0.005);
        let zero = ImpedanceModel::new(MutualImpedanceModel::Zero, 10e9);
        let s = channel_state(9.5e9, &g, &zero, &link).unwrap();
        let set = array_impedance_matrix(&g, &zero, 9.5e9).unwrap();
        let sigma_c = (set.z_self_rx + link.lna_impedance).inv();
        for k in 0..4 {
            let expect = s.gamma * sigma_c * s.steering[k];
            assert!((s.channel[k] - expect).norm() < 1e-14 * expect.norm());
            assert!((s.steering[k].norm() - 1.0).abs() < 1e-15);
        }
        assert_eq!(s.distorted_steering(), &s.channel[..]);
    }

    #[test]
    fn tight_state_at_center_is_finite_and_nonzero() {
        let g = ArrayGeometry::with_coupling_factor(32, 0.005, 2.5).unwrap();
        let s = channel_state(10e9, &g, &tight_model(), &LinkConfig::reference()).unwrap();
        let norm = crate::linalg::norm2(&s.channel);
        assert!(norm.is_finite() && norm > 0.0);
    }

    #[test]
    fn single_element_channel() {
        let g = geometry(1, 0.005);
        let s = channel_state(10e9, &g, &tight_model(), &LinkConfig::reference()).unwrap();
        assert_eq!(s.channel.len(), 1);
        assert!((s.channel[0] - s.gamma * s.coupling[(0, 0)]).norm() < 1e-30);
    }

    #[test]
    fn link_validation() {
        let link = LinkConfig::<f64>::reference();
        assert!(link.validate().is_ok());
        assert!(LinkConfig { aoa: 2.0, ..link }.validate().is_err());
        assert!(LinkConfig { distance: 0.0, ..link }.validate().is_err());
        assert!(LinkConfig { lna_impedance: Complex::new(0.0, 1.0), ..link }.validate().is_err());
    }
}
