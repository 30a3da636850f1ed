//! Nyquist sampling and periodicity matrices, sampling densities and
//! enumeration of the truncated lattice `Λ(A)` inside a square region.

use std::f64::consts::TAU;
use std::io::Write;

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::{EllipseShape, Position, Region, SpectralSupport, Wavenumber};

/// Generator of a spatial sampling lattice; columns are the basis vectors (m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingMatrix(Matrix2<f64>);

/// Generator of the wavenumber replication lattice (rad/m), `PᵀQ = 2πI`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicityMatrix(Matrix2<f64>);

fn check_nonsingular(m: &Matrix2<f64>) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(invalid("matrix entries must be finite"));
    }
    let det = m.determinant();
    if det.abs() <= 1e-15 * m.norm_squared() || det == 0.0 {
        return Err(Error::SingularMatrix { det });
    }
    Ok(())
}

impl SamplingMatrix {
    pub fn new(q: Matrix2<f64>) -> Result<Self> {
        check_nonsingular(&q)?;
        Ok(Self(q))
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.0
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    /// Position `Qn` of the lattice site with integer index `n`.
    pub fn site(&self, n: [i64; 2]) -> Position {
        let q = &self.0;
        let (a, b) = (n[0] as f64, n[1] as f64);
        Position::new(q[(0, 0)] * a + q[(0, 1)] * b, q[(1, 0)] * a + q[(1, 1)] * b)
    }

    pub fn column(&self, j: usize) -> Position {
        Position::new(self.0[(0, j)], self.0[(1, j)])
    }

    /// `R·Q`, the same lattice rotated about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        Self(crate::geometry::rotation(angle) * self.0)
    }

    pub fn as_rows(&self) -> [[f64; 2]; 2] {
        [[self.0[(0, 0)], self.0[(0, 1)]], [self.0[(1, 0)], self.0[(1, 1)]]]
    }
}

impl PeriodicityMatrix {
    pub fn new(p: Matrix2<f64>) -> Result<Self> {
        check_nonsingular(&p)?;
        Ok(Self(p))
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.0
    }

    /// Replica offset `P·l` for an integer vector `l`.
    pub fn offset(&self, l: [i64; 2]) -> Vector2<f64> {
        self.0 * Vector2::new(l[0] as f64, l[1] as f64)
    }

    pub fn as_rows(&self) -> [[f64; 2]; 2] {
        [[self.0[(0, 0)], self.0[(0, 1)]], [self.0[(1, 0)], self.0[(1, 1)]]]
    }
}

/// Half-wavelength square lattice, `Q = (λ/2) I`.
pub fn nyquist_rect(kn: Wavenumber) -> SamplingMatrix {
    let h = 0.5 * kn.lambda();
    SamplingMatrix(Matrix2::new(h, 0.0, 0.0, h))
}

/// Hexagonal lattice for the disk of radius κ.
pub fn nyquist_hex(kn: Wavenumber) -> SamplingMatrix {
    let lambda = kn.lambda();
    let a = lambda / (2.0 * 3f64.sqrt());
    let b = 0.5 * lambda;
    SamplingMatrix(Matrix2::new(a, a, b, -b))
}

/// Elongated hexagonal lattice `R(k_phi) D^{-1/2} Q_hex` for an elliptical support.
pub fn nyquist_ellipse(kn: Wavenumber, e: EllipseShape) -> SamplingMatrix {
    let d_inv = Matrix2::new(1.0 / e.a1(), 0.0, 0.0, 1.0 / e.a2());
    SamplingMatrix(e.rotation() * d_inv * nyquist_hex(kn).0)
}

/// Nyquist lattice paired with a support: square for `Rect`, hexagonal for
/// `Disk`, elongated hexagonal for `Ellipse`.
pub fn nyquist_for(support: &SpectralSupport) -> SamplingMatrix {
    match *support {
        SpectralSupport::Rect(kn) => nyquist_rect(kn),
        SpectralSupport::Disk(kn) => nyquist_hex(kn),
        SpectralSupport::Ellipse(kn, e) => nyquist_ellipse(kn, e),
    }
}

/// `P = 2π (Qᵀ)⁻¹`.
pub fn periodicity_from_sampling(q: &SamplingMatrix) -> Result<PeriodicityMatrix> {
    let inv =
        q.0.transpose()
            .try_inverse()
            .ok_or(Error::SingularMatrix { det: q.determinant() })?;
    PeriodicityMatrix::new(inv * TAU)
}

/// `Q = 2π (Pᵀ)⁻¹`.
pub fn sampling_from_periodicity(p: &PeriodicityMatrix) -> Result<SamplingMatrix> {
    let inv =
        p.0.transpose()
            .try_inverse()
            .ok_or(Error::SingularMatrix { det: p.0.determinant() })?;
    SamplingMatrix::new(inv * TAU)
}

/// Samples per unit area, `1/|det Q|`.
pub fn density(q: &SamplingMatrix) -> f64 {
    1.0 / q.determinant().abs()
}

/// Fraction of samples saved by density `mu_new` against `mu_ref`.
pub fn efficiency_gain(mu_new: f64, mu_ref: f64) -> Result<f64> {
    if !(mu_new > 0.0 && mu_ref > 0.0 && mu_new.is_finite() && mu_ref.is_finite()) {
        return Err(invalid(format!(
            "densities must be positive, got {mu_new} and {mu_ref}"
        )));
    }
    Ok(1.0 - mu_new / mu_ref)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticePoint {
    pub index: [i64; 2],
    pub position: Position,
}

/// Lattice sites `Qn` that fall inside a region, ordered by `(n_y, n_x)`.
#[derive(Debug, Clone)]
pub struct LatticePointSet {
    q: SamplingMatrix,
    region: Region,
    points: Vec<LatticePoint>,
}

impl LatticePointSet {
    pub fn sampling_matrix(&self) -> &SamplingMatrix {
        &self.q
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn positions(&self) -> Vec<Position> {
        self.points.iter().map(|p| p.position).collect()
    }

    /// Inclusive index bounding box `([min_nx, min_ny], [max_nx, max_ny])`.
    pub fn index_bounds(&self) -> Option<([i64; 2], [i64; 2])> {
        let first = self.points.first()?;
        let mut lo = first.index;
        let mut hi = first.index;
        for p in &self.points {
            for d in 0..2 {
                lo[d] = lo[d].min(p.index[d]);
                hi[d] = hi[d].max(p.index[d]);
            }
        }
        Some((lo, hi))
    }

    /// CSV with header `nx,ny,x,y`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["nx", "ny", "x", "y"])?;
        for p in &self.points {
            w.write_record([
                p.index[0].to_string(),
                p.index[1].to_string(),
                p.position.x.to_string(),
                p.position.y.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// All `n ∈ ℤ²` with `Qn ∈ [-L/2, L/2]²`.
///
/// The index range is the integer bounding box of the region corners mapped
/// through `Q⁻¹`, so no site can be missed.
pub fn enumerate_lattice(q: &SamplingMatrix, region: &Region) -> LatticePointSet {
    let inv = q.0.try_inverse().expect("sampling matrix is non-singular");
    let h = region.half();
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for &(cx, cy) in &[(-h, -h), (-h, h), (h, -h), (h, h)] {
        let n = inv * Vector2::new(cx, cy);
        for d in 0..2 {
            lo[d] = lo[d].min(n[d]);
            hi[d] = hi[d].max(n[d]);
        }
    }
    let lo = [lo[0].floor() as i64 - 1, lo[1].floor() as i64 - 1];
    let hi = [hi[0].ceil() as i64 + 1, hi[1].ceil() as i64 + 1];

    let mut points = Vec::new();
    for ny in lo[1]..=hi[1] {
        for nx in lo[0]..=hi[0] {
            let position = q.site([nx, ny]);
            if region.contains(position) {
                points.push(LatticePoint {
                    index: [nx, ny],
                    position,
                });
            }
        }
    }
    LatticePointSet {
        q: *q,
        region: *region,
        points,
    }
}
