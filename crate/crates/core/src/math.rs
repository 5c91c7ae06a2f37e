//! Float helpers that work without `std`.

use crate::C64;

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn powf(x: f64, p: f64) -> f64 {
    libm::pow(x, p)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// Principal square root, exact on the positive real axis.
pub(crate) fn csqrt(z: C64) -> C64 {
    if z.im == 0.0 && z.re >= 0.0 {
        C64::new(sqrt(z.re), 0.0)
    } else {
        z.sqrt()
    }
}

/// Principal power `z^p`, computed in real arithmetic on the positive real axis.
pub(crate) fn cpowf(z: C64, p: f64) -> C64 {
    if z.im == 0.0 && z.re > 0.0 {
        C64::new(powf(z.re, p), 0.0)
    } else {
        z.powf(p)
    }
}
