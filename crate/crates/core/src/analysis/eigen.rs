use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::Position;
use crate::lattice::LatticePointSet;
use crate::statfield::Acf;

/// Eigenvalues in `(-PSD_CLAMP·trace, 0)` are round-off and clamp to zero.
pub const PSD_CLAMP: f64 = 1e-8;

/// Imaginary parts this small (relative to the diagonal) are round-off.
const REAL_TOL: f64 = 1e-13;

/// `C[i][j] = c(r_i − r_j)` over a set of sites.
#[derive(Debug, Clone)]
pub struct AutocorrMatrix {
    entries: DMatrix<Complex64>,
}

impl AutocorrMatrix {
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.nrows() == 0
    }

    pub fn trace(&self) -> f64 {
        (0..self.len()).map(|i| self.entries[(i, i)].re).sum()
    }

    pub fn max_hermitian_defect(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    fn is_real(&self) -> bool {
        self.entries.iter().all(|c| c.im.abs() <= REAL_TOL)
    }
}

fn checked(acf: &Acf, r: Position) -> Result<Complex64> {
    let c = acf.eval(r);
    if c.re.is_finite() && c.im.is_finite() {
        Ok(c)
    } else {
        Err(Error::NonFiniteAcf { x: r.x, y: r.y })
    }
}

/// Lattice build: one ACF evaluation per index difference `n_i − n_j`.
pub fn build_autocorr_matrix(points: &LatticePointSet, acf: &Acf) -> Result<AutocorrMatrix> {
    let (lo, hi) = points
        .index_bounds()
        .ok_or_else(|| invalid("autocorrelation matrix needs at least one site"))?;
    let span = [hi[0] - lo[0], hi[1] - lo[1]];
    let width = (2 * span[1] + 1) as usize;
    let q = points.sampling_matrix();
    // row-major over d = (d0, d1) with d0 ∈ [0, span0], d1 ∈ [−span1, span1]
    let half: Vec<Complex64> = (0..=span[0])
        .into_par_iter()
        .flat_map_iter(|d0| (-span[1]..=span[1]).map(move |d1| [d0, d1]))
        .map(|d| {
            if d[0] == 0 && d[1] < 0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            checked(acf, q.site(d))
        })
        .collect::<Result<_>>()?;
    let lookup = |d0: i64, d1: i64| -> Complex64 {
        if d0 > 0 || (d0 == 0 && d1 >= 0) {
            half[d0 as usize * width + (d1 + span[1]) as usize]
        } else {
            half[(-d0) as usize * width + (span[1] - d1) as usize].conj()
        }
    };
    let pts = points.points();
    let n = pts.len();
    let entries = DMatrix::from_fn(n, n, |i, j| {
        let (a, b) = (pts[i].index, pts[j].index);
        lookup(a[0] - b[0], a[1] - b[1])
    });
    Ok(AutocorrMatrix { entries })
}

/// Direct build over arbitrary sites; Hermitian by mirroring the lower triangle.
pub fn build_autocorr_matrix_from_positions(positions: &[Position], acf: &Acf) -> Result<AutocorrMatrix> {
    let n = positions.len();
    if n == 0 {
        return Err(invalid("autocorrelation matrix needs at least one site"));
    }
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..=i)
                .map(|j| checked(acf, positions[i] - positions[j]))
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let entries = DMatrix::from_fn(n, n, |i, j| if j <= i { rows[i][j] } else { rows[j][i].conj() });
    Ok(AutocorrMatrix { entries })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSpectrum {
    /// Descending.
    pub values: Vec<f64>,
    pub total: f64,
}

impl EigenSpectrum {
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        let total = values.iter().sum();
        Self { values, total }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Columns `rank,eigenvalue,eigenvalue_db,cumulative_fraction`; rank is 1-based.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rank", "eigenvalue", "eigenvalue_db", "cumulative_fraction"])?;
        let mut acc = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            acc += v;
            w.write_record(&[
                (i + 1).to_string(),
                v.to_string(),
                (10.0 * v.log10()).to_string(),
                (acc / self.total).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Full spectrum of a Hermitian matrix, descending, round-off negatives clamped.
pub fn eigen_spectrum(c: &AutocorrMatrix) -> Result<EigenSpectrum> {
    let n = c.len();
    if n == 0 {
        return Err(invalid("empty matrix has no spectrum"));
    }
    let trace = c.trace();
    let failure = || {
        let diag = (0..n).map(|i| c.entries[(i, i)].re);
        Error::Eigen {
            n,
            max_offdiag: c
                .entries
                .iter()
                .enumerate()
                .filter(|(k, _)| k % n != k / n)
                .map(|(_, v)| v.norm())
                .fold(0.0, f64::max),
            min_diag: diag.clone().fold(f64::INFINITY, f64::min),
            max_diag: diag.fold(f64::NEG_INFINITY, f64::max),
        }
    };
    let raw: Vec<f64> = if c.is_real() {
        let m = c.entries.map(|v| v.re);
        SymmetricEigen::try_new(m, f64::EPSILON, 0)
            .ok_or_else(failure)?
            .eigenvalues
            .iter()
            .copied()
            .collect()
    } else {
        SymmetricEigen::try_new(c.entries.clone(), f64::EPSILON, 0)
            .ok_or_else(failure)?
            .eigenvalues
            .iter()
            .copied()
            .collect()
    };
    let tolerance = PSD_CLAMP * trace.abs();
    let mut values = Vec::with_capacity(n);
    for v in raw {
        if v >= 0.0 {
            values.push(v);
        } else if v > -tolerance {
            values.push(0.0);
        } else {
            return Err(Error::NotPositiveSemidefinite { value: v, tolerance });
        }
    }
    Ok(EigenSpectrum::from_values(values))
}

/// Smallest `n` whose leading eigenvalues carry `fraction` of the total.
pub fn power_capture_count(e: &EigenSpectrum, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(invalid(format!("capture fraction must lie in (0, 1], got {fraction}")));
    }
    if e.total.is_nan() || e.total <= 0.0 {
        return Err(invalid("spectrum carries no power"));
    }
    let mut acc = 0.0;
    for (i, &v) in e.values.iter().enumerate() {
        acc += v;
        if acc / e.total >= fraction {
            return Ok(i + 1);
        }
    }
    Ok(e.values.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Region, Wavenumber};
    use crate::lattice::{enumerate_lattice, nyquist_hex, nyquist_rect};
    use crate::scattering::ScatteringScenario;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn kn() -> Wavenumber {
        Wavenumber::from_lambda(1.0).unwrap()
    }

    fn matrix(rows: &[&[f64]]) -> AutocorrMatrix {
        let n = rows.len();
        AutocorrMatrix {
            entries: DMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0)),
        }
    }

    #[test]
    fn clarke_matrix_examples() {
        let acf = Acf::Clarke(kn());
        let set = enumerate_lattice(&nyquist_hex(kn()), &Region::new(4.0).unwrap());
        let c = build_autocorr_matrix(&set, &acf).unwrap();
        assert!((0..c.len()).all(|i| c.entries()[(i, i)] == Complex64::new(1.0, 0.0)));

        let pair = [Position::new(0.0, 0.0), Position::new(0.5, 0.0)];
        let c = build_autocorr_matrix_from_positions(&pair, &acf).unwrap();
        assert_eq!(c.entries()[(0, 0)].re, 1.0);
        assert!(c.entries()[(0, 1)].norm() < 1e-16);
        assert!(c.entries()[(1, 0)].norm() < 1e-16);
    }

    #[test]
    fn cached_build_matches_direct_build() {
        let s = ScatteringScenario::single(kn(), 0.4, 1.0, 20.0).unwrap();
        let acf = Acf::for_scenario(&s, 4.0, 1e-10).unwrap();
        let set = enumerate_lattice(&nyquist_hex(kn()), &Region::new(2.5).unwrap());
        let a = build_autocorr_matrix(&set, &acf).unwrap();
        let b = build_autocorr_matrix_from_positions(&set.positions(), &acf).unwrap();
        assert!((a.entries() - b.entries()).iter().all(|d| d.norm() < 1e-12));
        assert_eq!(a.max_hermitian_defect(), 0.0);
        assert!(!a.is_real());
        let e = eigen_spectrum(&a).unwrap();
        assert_abs_diff_eq!(e.total, a.trace(), epsilon = 1e-9 * a.trace());
    }

    #[test]
    fn spectrum_examples() {
        let id = matrix(&[
            &[1.0, 0.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0, 1.0],
        ]);
        let e = eigen_spectrum(&id).unwrap();
        assert!(e.values.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let e = eigen_spectrum(&matrix(&[&[1.0, 0.5], &[0.5, 1.0]])).unwrap();
        assert_abs_diff_eq!(e.values[0], 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 0.5, epsilon = 1e-14);
        let bad = matrix(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(
            eigen_spectrum(&bad),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
        // rank one: the zero eigenvalue may come back as −ε
        let e = eigen_spectrum(&matrix(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert!(e.values[1] >= 0.0);
    }

    #[test]
    fn complex_hermitian_spectrum() {
        // [[1, i/2], [−i/2, 1]] has eigenvalues 1 ± 1/2
        let entries = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.5),
                Complex64::new(0.0, -0.5),
                Complex64::new(1.0, 0.0),
            ],
        );
        let e = eigen_spectrum(&AutocorrMatrix { entries }).unwrap();
        assert_abs_diff_eq!(e.values[0], 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn capture_examples() {
        let e = EigenSpectrum::from_values(vec![0.1, 10.0, 1.0]);
        assert_eq!(e.values, vec![10.0, 1.0, 0.1]);
        assert_eq!(power_capture_count(&e, 0.997).unwrap(), 3);
        assert_eq!(power_capture_count(&e, 0.9).unwrap(), 1);
        assert_eq!(power_capture_count(&e, 0.95).unwrap(), 2);
        let z = EigenSpectrum::from_values(vec![3.0, 0.0, 2.0, 0.0]);
        assert_eq!(power_capture_count(&z, 1.0).unwrap(), 2);
        assert!(power_capture_count(&e, 0.0).is_err());
        assert!(power_capture_count(&e, 1.5).is_err());
    }

    #[test]
    fn rect_samples_are_correlated() {
        let set = enumerate_lattice(&nyquist_rect(kn()), &Region::new(10.0).unwrap());
        let c = build_autocorr_matrix(&set, &Acf::Clarke(kn())).unwrap();
        let n = c.len();
        let strong = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .any(|(i, j)| c.entries()[(i, j)].norm() > 0.05);
        assert!(strong);
    }

    #[test]
    fn csv_layout() {
        let e = EigenSpectrum::from_values(vec![2.0, 1.0, 1.0]);
        let mut buf = Vec::new();
        e.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "rank,eigenvalue,eigenvalue_db,cumulative_fraction");
        assert!(lines[1].starts_with("1,2,3.0102"));
        assert!(lines[3].ends_with(",1"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn capture_is_monotone(values in proptest::collection::vec(0.0f64..10.0, 1..30), f1 in 0.01f64..1.0, f2 in 0.01f64..1.0) {
            let e = EigenSpectrum::from_values(values);
            prop_assume!(e.total > 0.0);
            let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
            prop_assert!(power_capture_count(&e, lo).unwrap() <= power_capture_count(&e, hi).unwrap());
        }

        #[test]
        fn scenario_matrices_are_psd(theta in 0.0f64..1.5, phi in 0.0f64..std::f64::consts::TAU, alpha in 0.0f64..60.0) {
            let s = ScatteringScenario::single(kn(), theta, phi, alpha).unwrap();
            let acf = Acf::for_scenario(&s, 3.0, 1e-9).unwrap();
            let set = enumerate_lattice(&nyquist_hex(kn()), &Region::new(2.0).unwrap());
            let c = build_autocorr_matrix(&set, &acf).unwrap();
            let e = eigen_spectrum(&c).unwrap();
            prop_assert!(e.values.iter().all(|&v| v >= 0.0));
            prop_assert!((e.total - c.trace()).abs() <= 1e-9 * c.trace());
        }
    }
}
