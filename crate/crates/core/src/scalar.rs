//! Real and complex field elements used by the ODE layer, so the common
//! real-λ case runs in plain `f64`.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

pub trait Scalar:
    Copy
    + Default
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
{
    fn from_real(x: f64) -> Self;
    fn to_complex(self) -> Complex64;
    fn modulus(self) -> f64;
    fn modulus_sq(self) -> f64;
    fn is_finite(self) -> bool;
    /// `(cos(x√λ), sin(x√λ)/√λ)`, independent of the branch of `√λ`.
    fn cos_sinc(lambda: Self, x: f64) -> (Self, Self);
    fn exp(self) -> Self;
}

const SERIES_CUTOFF: f64 = 1e-8;

impl Scalar for f64 {
    fn from_real(x: f64) -> Self {
        x
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn modulus_sq(self) -> f64 {
        self * self
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn cos_sinc(lambda: f64, x: f64) -> (f64, f64) {
        let t = lambda * x * x;
        if t.abs() < SERIES_CUTOFF {
            (1.0 - 0.5 * t, x * (1.0 - t / 6.0))
        } else if lambda > 0.0 {
            let k = lambda.sqrt();
            ((k * x).cos(), (k * x).sin() / k)
        } else {
            let k = (-lambda).sqrt();
            ((k * x).cosh(), (k * x).sinh() / k)
        }
    }
}

impl Scalar for Complex64 {
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn modulus_sq(self) -> f64 {
        self.norm_sqr()
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn cos_sinc(lambda: Complex64, x: f64) -> (Complex64, Complex64) {
        if lambda.im == 0.0 {
            let (c, s) = f64::cos_sinc(lambda.re, x);
            return (c.into(), s.into());
        }
        let t = lambda * x * x;
        if t.norm() < SERIES_CUTOFF {
            (1.0 - 0.5 * t, x * (1.0 - t / 6.0))
        } else {
            let w = lambda.sqrt();
            ((w * x).cos(), (w * x).sin() / w)
        }
    }
}

/// Euclidean norm of a 2-vector.
pub fn norm2<T: Scalar>(u: &[T; 2]) -> f64 {
    (u[0].modulus_sq() + u[1].modulus_sq()).sqrt()
}
