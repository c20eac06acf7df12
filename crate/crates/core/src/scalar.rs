//! Scalar abstraction shared by every numerical kernel in the crate.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the models are generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into `Self`.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy conversion used for error payloads and reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn two_pi() -> Self {
        Self::TAU()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Speed of light in vacuum, m/s (exact by SI definition).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant, J/K (exact by SI definition).
pub const BOLTZMANN: f64 = 1.380_649e-23;

pub fn speed_of_light<T: Real>() -> T {
    T::lit(SPEED_OF_LIGHT)
}

/// `e^{j phase}`.
pub fn cis<T: Real>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}

/// Principal argument pinned to `(-pi, pi]`.
pub fn principal_arg<T: Real>(z: Complex<T>) -> T {
    let a = z.im.atan2(z.re);
    if a <= -T::PI() {
        T::PI()
    } else {
        a
    }
}

/// Unnormalized sinc, `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        // Taylor series through x^4 is exact to double precision here.
        let x2 = x * x;
        T::one() - x2 / T::lit(6.0) + x2 * x2 / T::lit(120.0)
    } else {
        x.sin() / x
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase<T: Real>(phase: T) -> T {
    let tau = T::two_pi();
    let mut p = phase - tau * (phase / tau).round();
    if p <= -T::PI() {
        p = p + tau;
    }
    if p > T::PI() {
        p = p - tau;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn principal_arg_branch() {
        assert_eq!(principal_arg(Complex::new(-1.0f64, -0.0)), std::f64::consts::PI);
        assert_eq!(principal_arg(Complex::new(-1.0f64, 0.0)), std::f64::consts::PI);
        assert!((principal_arg(Complex::new(0.0f64, -1.0)) + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn sinc_is_continuous_across_series_switch() {
        for &x in &[0.0, 1e-8, 9.9e-5, 1.01e-4, 0.3, 2.0] {
            let direct = if x == 0.0 { 1.0 } else { f64::sin(x) / x };
            assert!((sinc(x) - direct).abs() < 1e-15, "x = {x}");
        }
        assert!((sinc(std::f64::consts::PI)).abs() < 1e-15);
    }

    #[test]
    fn wrap_phase_range() {
        let pi = std::f64::consts::PI;
        assert!((wrap_phase(3.0 * pi) - pi).abs() < 1e-12);
        assert!((wrap_phase(-pi) - pi).abs() < 1e-12);
        assert!((wrap_phase(0.5) - 0.5).abs() < 1e-15);
        assert!(wrap_phase(7.0f32).abs() <= std::f32::consts::PI);
    }
}
