//! Bessel function of the first kind of order one and the sinc/jinc
//! shapes built from it.

use std::f64::consts::PI;

/// `J1(x)` for any real `x`; odd, with `J1(±∞) = 0`.
pub fn bessel_j1(x: f64) -> f64 {
    libm::j1(x)
}

/// Normalised sinc, `sin(πx)/(πx)` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    let px = PI * x;
    if px.abs() < 1e-5 {
        let z = px * px;
        1.0 - z / 6.0 + z * z / 120.0
    } else {
        px.sin() / px
    }
}

/// `J1(x)/x` with the removable singularity `jinc(0) = 1/2`.
pub fn jinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let z = x * x;
        0.5 - z / 16.0 + z * z / 384.0
    } else {
        bessel_j1(x) / x
    }
}
