//! Interpolation kernels of the 2D cardinal series.
//!
//! Every kernel is the inverse Fourier transform of the indicator of its
//! support, scaled by `|det Q|/(2π)²` of the lattice the support is paired
//! with. Closed forms are provided for the square, the disk and the ellipse;
//! [`kernel_oracle`] evaluates the defining integral numerically.

mod bessel;
mod oracle;

pub use bessel::{bessel_j1, jinc, sinc};
pub use oracle::{kernel_oracle, kernel_oracle_with, OracleOptions};

use std::f64::consts::PI;

use nalgebra::Vector2;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{EllipseShape, Position, SpectralSupport, Wavenumber};

/// Peak of the disk and ellipse kernels when paired with their hexagonal lattices.
pub const DISK_KERNEL_PEAK: f64 = PI / (2.0 * 1.732_050_807_568_877_2);

/// An interpolating function tied to a spectral support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kernel {
    support: SpectralSupport,
}

impl Kernel {
    pub fn for_support(support: SpectralSupport) -> Self {
        Self { support }
    }

    pub fn support(&self) -> &SpectralSupport {
        &self.support
    }

    pub fn eval(&self, r: Position) -> f64 {
        match self.support {
            SpectralSupport::Rect(kn) => {
                let scale = kn.kappa() / PI;
                sinc(scale * r.x) * sinc(scale * r.y)
            }
            SpectralSupport::Disk(kn) => disk_profile(kn, r.norm()),
            SpectralSupport::Ellipse(kn, e) => disk_profile(kn, ellipse_radius(&e, r)),
        }
    }
}

fn disk_profile(kn: Wavenumber, radius: f64) -> f64 {
    (PI / 3f64.sqrt()) * jinc(kn.kappa() * radius)
}

/// `‖D^{1/2} Rᵀ r‖`: the radius the elliptical kernel sees.
fn ellipse_radius(e: &EllipseShape, r: Position) -> f64 {
    let v = e.sqrt_g().transpose() * Vector2::new(r.x, r.y);
    v.norm()
}

/// Separable `sinc(2x/λ) sinc(2y/λ)` kernel of the half-wavelength lattice.
pub fn kernel_rect(kn: Wavenumber) -> Kernel {
    Kernel::for_support(SpectralSupport::Rect(kn))
}

/// `(π/√3) jinc(2π‖r‖/λ)`, the disk kernel paired with hexagonal sampling.
pub fn kernel_disk(kn: Wavenumber) -> Kernel {
    Kernel::for_support(SpectralSupport::Disk(kn))
}

/// Disk kernel evaluated at the stretched radius `‖D^{1/2} Rᵀ r‖`.
///
/// For an axis-aligned shape (`k_phi = 0`) or a circle this is
/// `(π/√3) jinc(2π‖D^{1/2} r‖/λ)`; a rotated anisotropic ellipse rotates the
/// kernel with it so that `f_E(Q_E n) = f_D(Q_D n)` on the elongated lattice.
pub fn kernel_ellipse(kn: Wavenumber, e: EllipseShape) -> Result<Kernel> {
    // EllipseShape already rejects degenerate axes; rebuild to surface that error here too
    let e = EllipseShape::new(e.a1(), e.a2(), e.k_phi())?;
    Ok(Kernel::for_support(SpectralSupport::Ellipse(kn, e)))
}
