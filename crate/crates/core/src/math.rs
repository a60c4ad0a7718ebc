//! Thin wrappers over `libm` so the numeric code reads like `std`.

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn hypot(a: f64, b: f64) -> f64 {
    libm::hypot(a, b)
}

/// `x ln x` with the `0 ln 0 = 0` convention.
#[inline]
pub(crate) fn xlnx(x: f64) -> f64 {
    if x > 0.0 {
        x * ln(x)
    } else {
        0.0
    }
}
