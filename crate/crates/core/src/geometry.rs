//! Wavenumber-domain primitives: the propagating disk, rectangular and
//! elliptical supports, the vertical wavenumber and the migration filter.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Relative slack used for closed-set membership tests.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Horizontal wavevector `(kx, ky)` in rad/m.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WaveVector {
    pub kx: f64,
    pub ky: f64,
}

impl WaveVector {
    pub const fn new(kx: f64, ky: f64) -> Self {
        Self { kx, ky }
    }

    pub fn norm(&self) -> f64 {
        self.kx.hypot(self.ky)
    }

    pub fn to_vector(self) -> Vector2<f64> {
        Vector2::new(self.kx, self.ky)
    }

    pub fn from_vector(v: Vector2<f64>) -> Self {
        Self::new(v[0], v[1])
    }

    /// Inner product with a spatial position, in radians.
    pub fn phase(&self, r: Position) -> f64 {
        self.kx * r.x + self.ky * r.y
    }
}

/// A point (or displacement) in the observation plane, in metres.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn to_vector(self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }

    pub fn from_vector(v: Vector2<f64>) -> Self {
        Self::new(v[0], v[1])
    }
}

impl std::ops::Sub for Position {
    type Output = Position;

    fn sub(self, rhs: Position) -> Position {
        Position::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Neg for Position {
    type Output = Position;

    fn neg(self) -> Position {
        Position::new(-self.x, -self.y)
    }
}

/// Free-space wavenumber `κ = 2π/λ`, stored together with its wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wavenumber {
    kappa: f64,
    lambda: f64,
}

impl Wavenumber {
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(invalid(format!("wavelength must be positive, got {lambda}")));
        }
        Ok(Self {
            kappa: TAU / lambda,
            lambda,
        })
    }

    pub fn from_kappa(kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(invalid(format!("wavenumber must be positive, got {kappa}")));
        }
        Ok(Self {
            kappa,
            lambda: TAU / kappa,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The same geometry with the bandwidth scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_kappa(self.kappa * factor)
    }
}

/// Semi-axes (normalised to κ) and rotation of an elliptical support.
///
/// The map from the unit disk onto the ellipse is `G^{1/2} = R(k_phi) diag(a1, a2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseShape {
    a1: f64,
    a2: f64,
    k_phi: f64,
}

impl EllipseShape {
    /// Builds a shape with `0 < a2 <= a1 <= 1`; the rotation is wrapped into `[0, 2π)`.
    pub fn new(a1: f64, a2: f64, k_phi: f64) -> Result<Self> {
        if !(a1.is_finite() && a2.is_finite() && k_phi.is_finite()) {
            return Err(invalid("ellipse parameters must be finite"));
        }
        if a1 <= 0.0 || a2 <= 0.0 {
            return Err(invalid(format!(
                "degenerate ellipse: semi-axes must be positive, got ({a1}, {a2})"
            )));
        }
        if a2 > a1 {
            return Err(invalid(format!("semi-axes must satisfy a2 <= a1, got ({a1}, {a2})")));
        }
        if a1 > 1.0 + BOUNDARY_TOL {
            return Err(invalid(format!(
                "ellipse must lie inside the propagating disk, got a1 = {a1}"
            )));
        }
        let k_phi = k_phi.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        let k_phi = if k_phi >= TAU { 0.0 } else { k_phi };
        Ok(Self {
            a1: a1.min(1.0),
            a2,
            k_phi,
        })
    }

    pub fn circle(radius: f64) -> Result<Self> {
        Self::new(radius, radius, 0.0)
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn k_phi(&self) -> f64 {
        self.k_phi
    }

    /// Product of the semi-axes, i.e. the area ratio against the disk.
    pub fn axis_product(&self) -> f64 {
        self.a1 * self.a2
    }

    pub fn rotation(&self) -> Matrix2<f64> {
        rotation(self.k_phi)
    }

    /// `D^{1/2} = diag(a1, a2)`.
    pub fn scaling(&self) -> Matrix2<f64> {
        Matrix2::new(self.a1, 0.0, 0.0, self.a2)
    }

    /// `G^{1/2} = R D^{1/2}`.
    pub fn sqrt_g(&self) -> Matrix2<f64> {
        self.rotation() * self.scaling()
    }

    /// `G^{-1/2} = D^{-1/2} Rᵀ`.
    pub fn inv_sqrt_g(&self) -> Matrix2<f64> {
        Matrix2::new(1.0 / self.a1, 0.0, 0.0, 1.0 / self.a2) * self.rotation().transpose()
    }

    /// `G = R D Rᵀ`.
    pub fn g(&self) -> Matrix2<f64> {
        let s = self.sqrt_g();
        s * s.transpose()
    }
}

/// Counter-clockwise rotation matrix.
pub fn rotation(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportKind {
    Disk,
    Rect,
    Ellipse,
}

/// Centered wavenumber support of a bandlimited field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpectralSupport {
    /// `‖k‖ <= κ`.
    Disk(Wavenumber),
    /// The square `[-κ, κ]²`.
    Rect(Wavenumber),
    /// `kᵀ G⁻¹ k <= κ²`.
    Ellipse(Wavenumber, EllipseShape),
}

impl SpectralSupport {
    pub fn wavenumber(&self) -> Wavenumber {
        match *self {
            SpectralSupport::Disk(kn) | SpectralSupport::Rect(kn) => kn,
            SpectralSupport::Ellipse(kn, _) => kn,
        }
    }

    pub fn kind(&self) -> SupportKind {
        match self {
            SpectralSupport::Disk(_) => SupportKind::Disk,
            SpectralSupport::Rect(_) => SupportKind::Rect,
            SpectralSupport::Ellipse(..) => SupportKind::Ellipse,
        }
    }

    /// Lebesgue measure in (rad/m)².
    pub fn measure(&self) -> f64 {
        match *self {
            SpectralSupport::Disk(kn) => PI * kn.kappa * kn.kappa,
            SpectralSupport::Rect(kn) => 4.0 * kn.kappa * kn.kappa,
            SpectralSupport::Ellipse(kn, e) => PI * kn.kappa * kn.kappa * e.axis_product(),
        }
    }

    /// Closed-set membership (boundary included up to [`BOUNDARY_TOL`]).
    pub fn contains(&self, k: WaveVector) -> bool {
        self.gauge(k) <= 1.0 + BOUNDARY_TOL
    }

    /// Minkowski gauge: `<= 1` exactly on the support.
    pub fn gauge(&self, k: WaveVector) -> f64 {
        match *self {
            SpectralSupport::Disk(kn) => k.norm() / kn.kappa,
            SpectralSupport::Rect(kn) => k.kx.abs().max(k.ky.abs()) / kn.kappa,
            SpectralSupport::Ellipse(kn, e) => (e.inv_sqrt_g() * k.to_vector()).norm() / kn.kappa,
        }
    }
}

/// Square observation region `[-L/2, L/2]²` centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    side: f64,
}

impl Region {
    pub fn new(side: f64) -> Result<Self> {
        if !(side.is_finite() && side > 0.0) {
            return Err(invalid(format!("region side must be positive, got {side}")));
        }
        Ok(Self { side })
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn half(&self) -> f64 {
        0.5 * self.side
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    /// Closed membership with a relative slack of [`BOUNDARY_TOL`].
    pub fn contains(&self, r: Position) -> bool {
        let h = self.half() * (1.0 + BOUNDARY_TOL);
        r.x.abs() <= h && r.y.abs() <= h
    }

    pub fn contains_region(&self, other: &Region) -> bool {
        other.side <= self.side * (1.0 + BOUNDARY_TOL)
    }
}

/// Vertical wavenumber `k_z(k)`: real inside the disk, positive imaginary outside.
pub fn kz(k: WaveVector, kn: Wavenumber) -> Complex64 {
    let kappa = kn.kappa;
    let rho = k.norm();
    if rho <= kappa {
        // (κ - ρ)(κ + ρ) avoids cancellation next to the boundary
        Complex64::new(((kappa - rho) * (kappa + rho)).sqrt(), 0.0)
    } else {
        Complex64::new(0.0, ((rho - kappa) * (rho + kappa)).sqrt())
    }
}

/// Migration filter `H_z(k) = exp(i k_z(k) z)` from the plane `z = 0` to `z`.
pub fn migration_filter(k: WaveVector, z: f64, kn: Wavenumber) -> Result<Complex64> {
    if !(z.is_finite() && z >= 0.0) {
        return Err(invalid(format!("migration distance must be non-negative, got {z}")));
    }
    Ok((Complex64::i() * kz(k, kn) * z).exp())
}

/// Maps elevation/azimuth to the horizontal wavevector and `k_z`.
pub fn wavevector_from_angles(theta: f64, phi: f64, kn: Wavenumber) -> Result<(WaveVector, f64)> {
    check_angles(theta, phi)?;
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let kappa = kn.kappa;
    Ok((WaveVector::new(kappa * st * cp, kappa * st * sp), kappa * ct))
}

/// Inverse of [`wavevector_from_angles`] for `‖k‖ <= κ`; `None` outside the disk.
pub fn angles_from_wavevector(k: WaveVector, kn: Wavenumber) -> Option<(f64, f64)> {
    let s = k.norm() / kn.kappa;
    if s > 1.0 + BOUNDARY_TOL {
        return None;
    }
    let theta = s.min(1.0).asin();
    let phi = k.ky.atan2(k.kx).rem_euclid(TAU);
    let phi = if phi >= TAU { 0.0 } else { phi };
    Some((theta, phi))
}

pub(crate) fn check_angles(theta: f64, phi: f64) -> Result<()> {
    if !(0.0..=PI / 2.0).contains(&theta) {
        return Err(invalid(format!("elevation must lie in [0, π/2], got {theta}")));
    }
    if !(0.0..TAU).contains(&phi) {
        return Err(invalid(format!("azimuth must lie in [0, 2π), got {phi}")));
    }
    Ok(())
}
