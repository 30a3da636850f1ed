use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Position;
use crate::kernels::Kernel;
use crate::lattice::{nyquist_for, LatticePointSet, SamplingMatrix};
use crate::statfield::{FieldRealization, PlaneWaveField};

const PAIRING_TOL: f64 = 1e-9;
const POSITION_TOL: f64 = 1e-12;

/// The kernel must be the one its support pairs with the lattice.
pub fn check_pairing(q: &SamplingMatrix, kern: &Kernel) -> Result<()> {
    let expected = nyquist_for(kern.support());
    let scale = expected.matrix().abs().max();
    let diff = (expected.matrix() - q.matrix()).abs().max();
    if diff <= PAIRING_TOL * scale {
        Ok(())
    } else {
        Err(Error::KernelMismatch(format!(
            "{:?} kernel expects sampling matrix {:?}, got {:?}",
            kern.support().kind(),
            expected.as_rows(),
            q.as_rows()
        )))
    }
}

/// `F[p][n] = f(r_p − Q n)` in lattice enumeration order.
pub fn interpolation_matrix(lattice: &LatticePointSet, kern: &Kernel, query: &[Position]) -> Array2<f64> {
    let sites = lattice.positions();
    let rows: Vec<f64> = query
        .par_iter()
        .flat_map_iter(|&r| sites.iter().map(move |&s| kern.eval(r - s)))
        .collect();
    Array2::from_shape_vec((query.len(), sites.len()), rows).expect("shape matches the collected rows")
}

fn check_samples(samples: &FieldRealization, lattice: &LatticePointSet) -> Result<()> {
    if samples.positions.len() != lattice.len() || samples.values.len() != lattice.len() {
        return Err(Error::LatticeMismatch(format!(
            "{} samples for {} lattice sites",
            samples.values.len(),
            lattice.len()
        )));
    }
    for (p, site) in samples.positions.iter().zip(lattice.points()) {
        let d = (*p - site.position).norm();
        if d > POSITION_TOL * (1.0 + site.position.norm()) {
            return Err(Error::LatticeMismatch(format!(
                "sample at ({}, {}) is not lattice site {:?}",
                p.x, p.y, site.index
            )));
        }
    }
    Ok(())
}

/// Truncated cardinal series `ê(r) = Σ_n e(Qn) f(r − Qn)`, summed in
/// enumeration order. `allow_mismatch` skips the kernel/lattice pairing check.
pub fn reconstruct(
    samples: &FieldRealization,
    lattice: &LatticePointSet,
    kern: &Kernel,
    query: &[Position],
    allow_mismatch: bool,
) -> Result<Vec<Complex64>> {
    if !allow_mismatch {
        check_pairing(lattice.sampling_matrix(), kern)?;
    }
    check_samples(samples, lattice)?;
    let sites = lattice.positions();
    Ok(query
        .par_iter()
        .map(|&r| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, v) in sites.iter().zip(&samples.values) {
                acc += v * kern.eval(r - *s);
            }
            acc
        })
        .collect())
}

/// Field values at every lattice site, via `exp(i kᵀQn) = u^{n0} v^{n1}`.
pub fn samples_on_lattice(field: &PlaneWaveField, lattice: &LatticePointSet) -> Vec<Complex64> {
    let Some((lo, hi)) = lattice.index_bounds() else {
        return Vec::new();
    };
    let q = lattice.sampling_matrix();
    let (c0, c1) = (q.column(0), q.column(1));
    let theta0: Vec<f64> = field.waves().iter().map(|k| k.phase(c0)).collect();
    let theta1: Vec<f64> = field.waves().iter().map(|k| k.phase(c1)).collect();
    let a = powers(&theta0, lo[0], hi[0], Some(field.gains()));
    let b = powers(&theta1, lo[1], hi[1], None);
    let table = complex_product(&a, &b);
    let width = (hi[1] - lo[1] + 1) as usize;
    lattice
        .points()
        .iter()
        .map(|p| {
            let i = (p.index[0] - lo[0]) as usize;
            let j = (p.index[1] - lo[1]) as usize;
            Complex64::new(table.0[i * width + j], table.1[i * width + j])
        })
        .collect()
}

/// Field on the tensor grid `xs × ys`, returned with `x` fastest.
pub(crate) fn samples_on_grid(field: &PlaneWaveField, xs: &[f64], ys: &[f64]) -> Vec<Complex64> {
    let kx: Vec<f64> = field.waves().iter().map(|k| k.kx).collect();
    let ky: Vec<f64> = field.waves().iter().map(|k| k.ky).collect();
    let a = phases(&ky, ys, Some(field.gains()));
    let b = phases(&kx, xs, None);
    let (re, im) = complex_product(&a, &b);
    re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)).collect()
}

type Split = (Array2<f64>, Array2<f64>);

/// `[n][m] = g_m exp(i n θ_m)` for `n ∈ [lo, hi]`.
fn powers(theta: &[f64], lo: i64, hi: i64, gains: Option<&[Complex64]>) -> Split {
    let coords: Vec<f64> = (lo..=hi).map(|n| n as f64).collect();
    phases(theta, &coords, gains)
}

/// `[n][m] = g_m exp(i t_n θ_m)`.
fn phases(theta: &[f64], coords: &[f64], gains: Option<&[Complex64]>) -> Split {
    let (rows, cols) = (coords.len(), theta.len());
    let mut re = Array2::zeros((rows, cols));
    let mut im = Array2::zeros((rows, cols));
    for (i, &t) in coords.iter().enumerate() {
        for (m, &th) in theta.iter().enumerate() {
            let (s, c) = (t * th).sin_cos();
            let v = match gains {
                Some(g) => g[m] * Complex64::new(c, s),
                None => Complex64::new(c, s),
            };
            re[(i, m)] = v.re;
            im[(i, m)] = v.im;
        }
    }
    (re, im)
}

/// Row-major `A Bᵀ` for complex matrices stored as real/imaginary parts.
fn complex_product(a: &Split, b: &Split) -> (Vec<f64>, Vec<f64>) {
    let (bre_t, bim_t) = (b.0.t(), b.1.t());
    let re = a.0.dot(&bre_t) - a.1.dot(&bim_t);
    let im = a.0.dot(&bim_t) + a.1.dot(&bre_t);
    (re.into_raw_vec_and_offset().0, im.into_raw_vec_and_offset().0)
}
