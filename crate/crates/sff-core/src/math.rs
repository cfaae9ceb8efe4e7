//! Thin wrappers so that every build (hosted or not) uses the same libm code paths.

use num_complex::Complex64;

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
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
pub fn asin(x: f64) -> f64 {
    libm::asin(x)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn abs(z: Complex64) -> f64 {
    hypot(z.re, z.im)
}

/// `e^{i x}`
#[inline]
pub fn cis(x: f64) -> Complex64 {
    let (s, c) = libm::sincos(x);
    Complex64::new(c, s)
}

/// Principal square root of a complex number.
pub fn csqrt(z: Complex64) -> Complex64 {
    if z.re == 0.0 && z.im == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let r = abs(z);
    let re = sqrt(0.5 * (r + z.re));
    let im = sqrt(0.5 * (r - z.re));
    Complex64::new(re, if z.im < 0.0 { -im } else { im })
}
