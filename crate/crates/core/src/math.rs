//! Scalar helpers: the phase `e(x) = exp(2 pi i x)` and libm wrappers.

use num_complex::Complex64;

pub const PI: f64 = core::f64::consts::PI;
pub const TWO_PI: f64 = 2.0 * PI;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `e(x) = exp(2 pi i x)`.
#[inline]
pub fn e(x: f64) -> Complex64 {
    let t = TWO_PI * x;
    Complex64::new(libm::cos(t), libm::sin(t))
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn atan(x: f64) -> f64 {
    libm::atan(x)
}

#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
