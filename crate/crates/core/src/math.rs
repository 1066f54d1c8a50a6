// Thin wrappers so the crate builds without std.

pub(crate) use core::f64::consts::PI;

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
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// `sin(h) / h`, accurate near zero.
#[inline]
pub(crate) fn sinc(h: f64) -> f64 {
    if abs(h) < 1e-4 {
        let h2 = h * h;
        1.0 - h2 / 6.0 + h2 * h2 / 120.0
    } else {
        sin(h) / h
    }
}

/// Exact integral of `cos` over `[0, w]` when the argument runs linearly from `a` to `b`.
#[inline]
pub(crate) fn int_cos_linear(a: f64, b: f64, w: f64) -> f64 {
    let half = 0.5 * (b - a);
    w * cos(0.5 * (a + b)) * sinc(half)
}

/// Exact integral of `sin` over `[0, w]` when the argument runs linearly from `a` to `b`.
#[inline]
pub(crate) fn int_sin_linear(a: f64, b: f64, w: f64) -> f64 {
    let half = 0.5 * (b - a);
    w * sin(0.5 * (a + b)) * sinc(half)
}
