//! Scalar abstraction shared by every numerical routine.

use nalgebra::{Complex, RealField};
use num_traits::{Signed, ToPrimitive};
use std::fmt::{Debug, Display};

/// Complex number over a [`Real`] scalar.
pub type Cx<T> = Complex<T>;

/// Real floating-point scalar accepted by the solver.
pub trait Real: RealField + Copy + ToPrimitive + Send + Sync + Debug + Display + 'static {
    /// Converts an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self;

    /// Lossy conversion to `f64`, used for reporting.
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Converts a count into the scalar type.
    fn from_count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    /// Absolute value.
    fn mag(self) -> Self {
        Signed::abs(&self)
    }

    /// Machine epsilon of the scalar type.
    fn eps() -> Self;

    /// Positive infinity.
    fn infinity() -> Self {
        Self::lit(f64::INFINITY)
    }
}

impl Real for f32 {
    fn lit(x: f64) -> Self {
        x as f32
    }

    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn lit(x: f64) -> Self {
        x
    }

    fn eps() -> Self {
        f64::EPSILON
    }
}

/// Builds a complex number from its parts.
pub fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

/// Real number embedded in the complex plane.
pub fn cr<T: Real>(re: T) -> Cx<T> {
    Complex::new(re, T::zero())
}

/// `exp(i theta)`.
pub fn cis<T: Real>(theta: T) -> Cx<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Modulus of a complex number.
pub fn cabs<T: Real>(z: Cx<T>) -> T {
    z.re.hypot(z.im)
}

/// Argument of a complex number in `(-pi, pi]`.
pub fn carg<T: Real>(z: Cx<T>) -> T {
    z.im.atan2(z.re)
}

/// Reduces an angle to `[0, 2 pi)`.
pub fn wrap_angle<T: Real>(phi: T) -> T {
    let tau = T::two_pi();
    let mut r = phi % tau;
    if r < T::zero() {
        r += tau;
    }
    if r >= tau {
        r -= tau;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_stays_in_range() {
        for &phi in &[-7.0, -1e-17, 0.0, 3.0, std::f64::consts::TAU, 100.0] {
            let r = wrap_angle(phi);
            assert!((0.0..std::f64::consts::TAU).contains(&r), "{phi} -> {r}");
        }
    }

    #[test]
    fn literal_round_trip() {
        assert_eq!(f32::lit(0.5).as_f64(), 0.5);
        assert_eq!(f64::lit(-2.25).mag(), 2.25);
    }
}
