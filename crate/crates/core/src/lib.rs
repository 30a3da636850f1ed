//! Sampling and reconstruction of spatially bandlimited scalar wave fields
//! on a plane: Nyquist lattices of disk, square and ellipse supports, their
//! interpolation kernels, scattering-driven random fields, and the
//! degrees-of-freedom and reconstruction-error analyses built on them.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod lattice;
pub mod quadrature;
pub mod scattering;
pub mod statfield;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use geometry::{EllipseShape, Position, Region, SpectralSupport, SupportKind, WaveVector, Wavenumber};
pub use kernels::Kernel;
pub use lattice::{LatticePoint, LatticePointSet, PeriodicityMatrix, SamplingMatrix};
pub use scattering::{ScatteringScenario, VmfCluster};
pub use statfield::{Acf, FieldRealization, PlaneWaveField};
