// Thin wrappers over libm so the same code paths run with and without std.

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn sin_cos(x: f64) -> (f64, f64) {
    libm::sincos(x)
}

#[inline]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub(crate) fn cis(theta: f64) -> num_complex::Complex64 {
    let (s, c) = sin_cos(theta);
    num_complex::Complex64::new(c, s)
}

/// `exp(log_mag + i phase)` without forming the intermediate magnitude.
#[inline]
pub(crate) fn polar_exp(log_mag: f64, phase: f64) -> num_complex::Complex64 {
    cis(phase) * exp(log_mag)
}

pub(crate) const PI: f64 = core::f64::consts::PI;
pub(crate) const SQRT_2: f64 = core::f64::consts::SQRT_2;
