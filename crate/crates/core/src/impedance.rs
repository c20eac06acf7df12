//! Self and mutual impedances of Chu-limit CMS antennas, and the receive
//! array impedance matrix.
//!
//! Each element is a series RLC with `R = 1 Ω` whose quality factor at
//! resonance equals the Chu bound `Q = 1/(ka)^3 + 1/(ka)`. Mutual impedances
//! use the closed-form field of the lowest TM mode (which is the field of a
//! Hertzian dipole outside the enclosing sphere) for collinear elements,
//! normalized by the element radiation resistance:
//!
//! ```text
//! Z_mn = 3 R e^{-jkd} [ 1/(jkd)^2 + 1/(jkd)^3 ]
//! ```
//!
//! whose real part `3R [sin(kd)/(kd)^3 - cos(kd)/(kd)^2]` tends to `R` as the
//! separation vanishes.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{speed_of_light, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaElement<T> {
    radius: T,
}

impl<T: Real> AntennaElement<T> {
    pub fn new(radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::domain("element radius", radius.as_f64(), "must be > 0"));
        }
        Ok(Self { radius })
    }

    /// Radius of the sphere enclosing the antenna, m.
    pub fn radius(&self) -> T {
        self.radius
    }

    /// Element with the radius scaled by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.radius * factor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry<T> {
    n_elements: usize,
    spacing: T,
    element: AntennaElement<T>,
}

impl<T: Real> ArrayGeometry<T> {
    pub fn new(n_elements: usize, spacing: T, element: AntennaElement<T>) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::domain("n_elements", 0.0, "must be >= 1"));
        }
        if !(spacing > T::zero()) || !spacing.is_finite() {
            return Err(Error::domain("spacing", spacing.as_f64(), "must be > 0"));
        }
        Ok(Self {
            n_elements,
            spacing,
            element,
        })
    }

    /// Geometry with the element radius chosen from a coupling factor `spacing / radius`.
    pub fn with_coupling_factor(n_elements: usize, spacing: T, coupling_factor: T) -> Result<Self> {
        if !(coupling_factor > T::zero()) {
            return Err(Error::domain("coupling factor", coupling_factor.as_f64(), "must be > 0"));
        }
        Self::new(n_elements, spacing, AntennaElement::new(spacing / coupling_factor)?)
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn element(&self) -> &AntennaElement<T> {
        &self.element
    }

    /// `spacing / radius`.
    pub fn coupling_factor(&self) -> T {
        self.spacing / self.element.radius
    }
}

/// Impedances of one link at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceSet<T> {
    pub z_self_rx: Complex<T>,
    pub z_self_tx: Complex<T>,
    pub z_matrix: CMatrix<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MutualImpedanceModel<T> {
    /// Collinear Chu/CMS closed form scaled by the element radiation resistance.
    CmsClosedForm { radiation_resistance: T },
    /// Uncoupled elements.
    Zero,
}

impl<T: Real> Default for MutualImpedanceModel<T> {
    fn default() -> Self {
        MutualImpedanceModel::CmsClosedForm {
            radiation_resistance: T::one(),
        }
    }
}

impl<T: Real> MutualImpedanceModel<T> {
    pub fn name(&self) -> &'static str {
        match self {
            MutualImpedanceModel::CmsClosedForm { .. } => "cms-closed-form",
            MutualImpedanceModel::Zero => "zero",
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, MutualImpedanceModel::Zero)
    }

    pub fn evaluate(&self, freq: T, separation: T, _element: &AntennaElement<T>) -> Result<Complex<T>> {
        if !(freq > T::zero()) {
            return Err(Error::domain("frequency", freq.as_f64(), "must be > 0"));
        }
        if !(separation > T::zero()) {
            return Err(Error::domain("separation", separation.as_f64(), "must be > 0"));
        }
        match *self {
            MutualImpedanceModel::Zero => Ok(Complex::zero()),
            MutualImpedanceModel::CmsClosedForm { radiation_resistance } => {
                let x = T::two_pi() * freq / speed_of_light::<T>() * separation;
                let (s, c) = x.sin_cos();
                let x2 = x * x;
                let im = c / (x2 * x) + s / x2;
                Ok(Complex::new(mutual_resistance_ratio(x), im) * (T::lit(3.0) * radiation_resistance))
            }
        }
    }
}

/// `(sin x - x cos x) / x^3`, by series below `x = 1` where the closed form cancels.
fn mutual_resistance_ratio<T: Real>(x: T) -> T {
    if x >= T::one() {
        return (x.sin() - x * x.cos()) / (x * x * x);
    }
    // sum_{k>=1} (-1)^{k+1} 2k x^{2k-2} / (2k+1)!
    let x2 = x * x;
    let mut term = T::one() / T::lit(6.0);
    let mut sum = T::zero();
    for k in 1..=12 {
        let kf = T::count(k);
        sum = sum + term * T::lit(2.0) * kf;
        term = -term * x2 / ((T::lit(2.0) * kf + T::lit(2.0)) * (T::lit(2.0) * kf + T::lit(3.0)));
    }
    sum
}

pub fn mutual_impedance<T: Real>(
    model: &MutualImpedanceModel<T>,
    freq: T,
    separation: T,
    element: &AntennaElement<T>,
) -> Result<Complex<T>> {
    model.evaluate(freq, separation, element)
}

/// Series RLC equivalent of a Chu-limited element resonant at `resonance`.
pub fn chu_self_impedance<T: Real>(freq: T, element: &AntennaElement<T>, resonance: T) -> Result<Complex<T>> {
    if !(freq > T::zero()) {
        return Err(Error::domain("frequency", freq.as_f64(), "must be > 0"));
    }
    if !(resonance > T::zero()) {
        return Err(Error::domain("resonance", resonance.as_f64(), "must be > 0"));
    }
    let resistance = T::one();
    let ka = T::two_pi() * resonance / speed_of_light::<T>() * element.radius();
    let q = (ka * ka * ka).recip() + ka.recip();
    let w_res = T::two_pi() * resonance;
    let inductance = q * resistance / w_res;
    let capacitance = (w_res * w_res * inductance).recip();
    let w = T::two_pi() * freq;
    Ok(Complex::new(resistance, w * inductance - (w * capacitance).recip()))
}

/// Self-impedance rule and mutual-coupling model for a link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpedanceModel<T> {
    pub mutual: MutualImpedanceModel<T>,
    /// Resonance frequency of both the receive elements and the transmit antenna, Hz.
    pub resonance: T,
    /// Transmit antenna radius as a multiple of the receive element radius.
    pub tx_radius_factor: T,
}

impl<T: Real> ImpedanceModel<T> {
    pub fn new(mutual: MutualImpedanceModel<T>, resonance: T) -> Self {
        Self {
            mutual,
            resonance,
            tx_radius_factor: T::lit(100.0),
        }
    }
}

/// Receive array impedance matrix; `N - 1` distinct mutual terms fill a symmetric Toeplitz matrix.
pub fn array_impedance_matrix<T: Real>(
    geometry: &ArrayGeometry<T>,
    model: &ImpedanceModel<T>,
    freq: T,
) -> Result<ImpedanceSet<T>> {
    let element = geometry.element();
    let z_self_rx = chu_self_impedance(freq, element, model.resonance)?;
    let tx = element.scaled(model.tx_radius_factor)?;
    let z_self_tx = chu_self_impedance(freq, &tx, model.resonance)?;
    let n = geometry.n_elements();
    let mut first_row = Vec::with_capacity(n);
    first_row.push(z_self_rx);
    for m in 1..n {
        let sep = geometry.spacing() * T::count(m);
        first_row.push(model.mutual.evaluate(freq, sep, element)?);
    }
    Ok(ImpedanceSet {
        z_self_rx,
        z_self_tx,
        z_matrix: CMatrix::symmetric_toeplitz(&first_row),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::symmetric_eigenvalues;

    fn element() -> AntennaElement<f64> {
        AntennaElement::new(0.002).unwrap()
    }

    #[test]
    fn self_impedance_at_resonance_is_one_ohm() {
        let z = chu_self_impedance(10e9, &element(), 10e9).unwrap();
        assert!((z.re - 1.0).abs() < 1e-15);
        assert!(z.im.abs() < 1e-9);
        assert!((z.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn self_impedance_capacitive_below_resonance() {
        let z = chu_self_impedance(5e9, &element(), 10e9).unwrap();
        assert!(z.im < 0.0);
        assert!(chu_self_impedance(20e9, &element(), 10e9).unwrap().im > 0.0);
    }

    #[test]
    fn self_impedance_rejects_nonpositive_frequency() {
        assert!(chu_self_impedance(0.0, &element(), 10e9).is_err());
        assert!(chu_self_impedance(-1.0, &element(), 10e9).is_err());
        assert!(chu_self_impedance(1.0, &element(), 0.0).is_err());
    }

    #[test]
    fn zero_model_is_exactly_zero() {
        let z = MutualImpedanceModel::<f64>::Zero.evaluate(3e9, 0.01, &element()).unwrap();
        assert_eq!(z, Complex::new(0.0, 0.0));
    }

    #[test]
    fn mutual_rejects_colocated() {
        let m = MutualImpedanceModel::<f64>::default();
        assert!(m.evaluate(1e9, 0.0, &element()).is_err());
        assert!(m.evaluate(1e9, -0.01, &element()).is_err());
        assert!(m.evaluate(0.0, 0.01, &element()).is_err());
    }

    #[test]
    fn closed_form_mutual_resistance_matches_dipole_formula() {
        let m = MutualImpedanceModel::<f64>::default();
        for &x in &[0.05, 0.4, 1.0, 2.5, 7.0] {
            let f = 10e9;
            let d = x / (std::f64::consts::TAU * f / crate::SPEED_OF_LIGHT);
            let z = m.evaluate(f, d, &element()).unwrap();
            let expect = 3.0 * (x.sin() / x.powi(3) - x.cos() / x.powi(2));
            assert!((z.re - expect).abs() < 1e-9 * expect.abs().max(1.0), "kd = {x}");
        }
        // Small-separation limit of the real part is the radiation resistance.
        let d = 1e-4 / (std::f64::consts::TAU * 1e9 / crate::SPEED_OF_LIGHT);
        let z = m.evaluate(1e9, d, &element()).unwrap();
        assert!((z.re - 1.0).abs() < 1e-8);
        let x: f64 = 0.999;
        let closed = (x.sin() - x * x.cos()) / x.powi(3);
        assert!((mutual_resistance_ratio(x) - closed).abs() < 1e-13);
    }

    #[test]
    fn coupling_decays_with_separation() {
        // Envelope of |Z_mn| behaves like 3/(kd)^2 for kd >> 1.
        let m = MutualImpedanceModel::<f64>::default();
        let f = 10e9;
        let lambda = crate::SPEED_OF_LIGHT / f;
        let zs = chu_self_impedance(f, &element(), f).unwrap().norm();
        let mut prev = f64::INFINITY;
        for k in 1..40 {
            let sep = lambda * k as f64;
            let mag = m.evaluate(f, sep, &element()).unwrap().norm();
            assert!(mag < prev);
            prev = mag;
        }
        assert!(prev < 1e-3 * zs);
    }

    #[test]
    fn n1_matrix_is_self_impedance() {
        let g = ArrayGeometry::new(1, 0.005, element()).unwrap();
        let set = array_impedance_matrix(&g, &ImpedanceModel::new(Default::default(), 10e9), 7e9).unwrap();
        assert_eq!(set.z_matrix.rows(), 1);
        assert_eq!(set.z_matrix[(0, 0)], set.z_self_rx);
    }

    #[test]
    fn zero_model_matrix_is_diagonal() {
        let g = ArrayGeometry::new(4, 0.005, element()).unwrap();
        let set = array_impedance_matrix(&g, &ImpedanceModel::new(MutualImpedanceModel::Zero, 10e9), 8e9).unwrap();
        let expect = CMatrix::from_diagonal(&[set.z_self_rx; 4]);
        assert_eq!(set.z_matrix, expect);
    }

    #[test]
    fn n3_entry_matches_pairwise_evaluation() {
        let g = ArrayGeometry::new(3, 0.005, element()).unwrap();
        let model = ImpedanceModel::new(MutualImpedanceModel::default(), 10e9);
        let f = 12e9;
        let set = array_impedance_matrix(&g, &model, f).unwrap();
        let direct = model.mutual.evaluate(f, 0.010, &element()).unwrap();
        assert!((set.z_matrix[(0, 2)] - direct).norm() < 1e-15);
        assert_eq!(set.z_matrix, set.z_matrix.transpose());
    }

    #[test]
    fn transmit_antenna_uses_scaled_radius() {
        let g = ArrayGeometry::new(2, 0.005, element()).unwrap();
        let set = array_impedance_matrix(&g, &ImpedanceModel::new(MutualImpedanceModel::Zero, 10e9), 6e9).unwrap();
        let tx = chu_self_impedance(6e9, &AntennaElement::new(0.2).unwrap(), 10e9).unwrap();
        assert_eq!(set.z_self_tx, tx);
        // A much larger antenna has a much lower Q, hence a smaller detuning reactance.
        assert!(set.z_self_tx.im.abs() < set.z_self_rx.im.abs());
    }

    #[test]
    fn real_part_is_psd_over_band() {
        let g = ArrayGeometry::with_coupling_factor(16, 0.005, 2.5).unwrap();
        let model = ImpedanceModel::new(MutualImpedanceModel::default(), 10e9);
        for i in 0..13 {
            let f = 4e9 + 1e9 * i as f64;
            let z = array_impedance_matrix(&g, &model, f).unwrap().z_matrix;
            let n = z.rows();
            let re: Vec<f64> = (0..n * n).map(|k| z[(k / n, k % n)].re).collect();
            let min = symmetric_eigenvalues(re, n)[0];
            assert!(min >= -1e-9, "f = {f}, min eig = {min}");
        }
    }

    #[test]
    fn invalid_geometry_rejected() {
        assert!(ArrayGeometry::new(0, 0.005, element()).is_err());
        assert!(ArrayGeometry::new(2, 0.0, element()).is_err());
        assert!(AntennaElement::new(-1.0f64).is_err());
        assert!(ArrayGeometry::<f64>::with_coupling_factor(2, 0.005, 0.0).is_err());
    }
}
