use std::io::Write;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::reconstruct::{check_pairing, interpolation_matrix, samples_on_grid, samples_on_lattice};
use crate::error::{invalid, Result};
use crate::geometry::{EllipseShape, Position, Region, SpectralSupport, Wavenumber};
use crate::kernels::Kernel;
use crate::lattice::{enumerate_lattice, nyquist_for, SamplingMatrix};
use crate::scattering::ScatteringScenario;
use crate::statfield::{PlaneWaveField, DEFAULT_WAVES};

/// Sampling strategies compared by the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Elongated hexagonal lattice of the fitted ellipse.
    EllipseNyquist,
    /// Square lattice of the smallest square containing the fitted ellipse.
    RectMatched,
    /// Hexagonal lattice of the full disk.
    Hex,
    /// `λ/2` square lattice.
    RectHalfLambda,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::EllipseNyquist,
        Scheme::RectMatched,
        Scheme::Hex,
        Scheme::RectHalfLambda,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Scheme::EllipseNyquist => "ellipse-nyquist",
            Scheme::RectMatched => "rect-matched",
            Scheme::Hex => "hex",
            Scheme::RectHalfLambda => "rect-half-lambda",
        }
    }

    pub fn support(&self, kn: Wavenumber, shape: EllipseShape) -> Result<SpectralSupport> {
        Ok(match self {
            Scheme::EllipseNyquist => SpectralSupport::Ellipse(kn, shape),
            Scheme::RectMatched => {
                // half-widths of the ellipse along kx and ky are κ√G₁₁ and κ√G₂₂
                let g = shape.g();
                SpectralSupport::Rect(kn.scaled(g[(0, 0)].max(g[(1, 1)]).sqrt())?)
            }
            Scheme::Hex => SpectralSupport::Disk(kn),
            Scheme::RectHalfLambda => SpectralSupport::Rect(kn),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MseOptions {
    pub n_waves: usize,
    pub points_per_lambda: f64,
    /// Realizations reconstructed together in one matrix product.
    pub batch: usize,
    pub allow_mismatch: bool,
}

impl Default for MseOptions {
    fn default() -> Self {
        Self {
            n_waves: DEFAULT_WAVES,
            points_per_lambda: 8.0,
            batch: 32,
            allow_mismatch: false,
        }
    }
}

/// Tensor evaluation grid, `x` fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl EvalGrid {
    pub fn len(&self) -> usize {
        self.xs.len() * self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn positions(&self) -> Vec<Position> {
        self.ys
            .iter()
            .flat_map(|&y| self.xs.iter().map(move |&x| Position::new(x, y)))
            .collect()
    }
}

/// Grid over the closed region with at least `points_per_lambda` points per wavelength.
pub fn eval_grid(region: &Region, kn: Wavenumber, points_per_lambda: f64) -> Result<EvalGrid> {
    if !(points_per_lambda.is_finite() && points_per_lambda > 0.0) {
        return Err(invalid("evaluation density must be positive"));
    }
    let intervals = (region.side() / kn.lambda() * points_per_lambda).round().max(1.0) as usize;
    let h = region.side() / intervals as f64;
    let axis: Vec<f64> = (0..=intervals).map(|i| -region.half() + h * i as f64).collect();
    Ok(EvalGrid {
        xs: axis.clone(),
        ys: axis,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MseReport {
    pub grid: EvalGrid,
    /// `E{|e(r) − ê(r)|²}` at each grid point.
    pub pointwise: Vec<f64>,
    /// Spatial average of `pointwise`.
    pub average: f64,
    /// `average / σ²` with `σ² = 1`.
    pub normalized: f64,
    pub normalized_db: f64,
    /// Sample mean of `|e(r)|²` over grid and realizations.
    pub empirical_energy: f64,
    pub realizations: usize,
    pub lattice_points: usize,
}

/// Monte-Carlo reconstruction error of realizations `0..n_realizations` of `seed`.
#[allow(clippy::too_many_arguments)]
pub fn mse_experiment(
    s: &ScatteringScenario,
    q: &SamplingMatrix,
    kern: &Kernel,
    region: &Region,
    eval_region: &Region,
    n_realizations: usize,
    seed: u64,
    opts: &MseOptions,
) -> Result<MseReport> {
    if n_realizations == 0 {
        return Err(invalid("at least one realization is required"));
    }
    if !region.contains_region(eval_region) {
        return Err(invalid("evaluation region must lie inside the sampling region"));
    }
    if opts.batch == 0 {
        return Err(invalid("batch size must be positive"));
    }
    if !opts.allow_mismatch {
        check_pairing(q, kern)?;
    }
    let lattice = enumerate_lattice(q, region);
    let grid = eval_grid(eval_region, s.wavenumber(), opts.points_per_lambda)?;
    let f = interpolation_matrix(&lattice, kern, &grid.positions());
    let (n_eval, n_sites) = f.dim();

    let mut err = vec![0.0; n_eval];
    let mut energy = 0.0;
    let mut start = 0;
    while start < n_realizations {
        let end = (start + opts.batch).min(n_realizations);
        let fields: Vec<(Vec<Complex64>, Vec<Complex64>)> = (start..end)
            .into_par_iter()
            .map(|i| {
                let field = PlaneWaveField::realization(s, opts.n_waves, seed, i as u64)?;
                Ok((
                    samples_on_lattice(&field, &lattice),
                    samples_on_grid(&field, &grid.xs, &grid.ys),
                ))
            })
            .collect::<Result<_>>()?;
        let width = fields.len();
        let mut sre = Array2::zeros((n_sites, width));
        let mut sim = Array2::zeros((n_sites, width));
        for (c, (samples, _)) in fields.iter().enumerate() {
            for (n, v) in samples.iter().enumerate() {
                sre[(n, c)] = v.re;
                sim[(n, c)] = v.im;
            }
        }
        let (hre, him) = (f.dot(&sre), f.dot(&sim));
        for (c, (_, truth)) in fields.iter().enumerate() {
            for (p, t) in truth.iter().enumerate() {
                let d = Complex64::new(t.re - hre[(p, c)], t.im - him[(p, c)]);
                err[p] += d.norm_sqr();
                energy += t.norm_sqr();
            }
        }
        start = end;
    }
    let r = n_realizations as f64;
    err.iter_mut().for_each(|e| *e /= r);
    let average = err.iter().sum::<f64>() / n_eval as f64;
    Ok(MseReport {
        grid,
        pointwise: err,
        average,
        normalized: average,
        normalized_db: 10.0 * average.log10(),
        empirical_energy: energy / (r * n_eval as f64),
        realizations: n_realizations,
        lattice_points: lattice.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub l_over_lambda: f64,
    pub scheme: Scheme,
    pub normalized_mse: f64,
    pub normalized_mse_db: f64,
    pub lattice_points: usize,
}

/// Normalized MSE of every scheme at every `L/λ`, evaluated over the central
/// `L/2` square. The same realizations are used for every point of the sweep.
pub fn mse_sweep(
    s: &ScatteringScenario,
    shape: EllipseShape,
    schemes: &[Scheme],
    l_over_lambda: &[f64],
    n_realizations: usize,
    seed: u64,
    opts: &MseOptions,
) -> Result<Vec<SweepRow>> {
    if l_over_lambda.is_empty() || schemes.is_empty() {
        return Err(invalid("sweep needs at least one size and one scheme"));
    }
    let kn = s.wavenumber();
    let mut rows = Vec::new();
    for &l in l_over_lambda {
        let region = Region::new(l * kn.lambda())?;
        let eval = Region::new(0.5 * region.side())?;
        for &scheme in schemes {
            let support = scheme.support(kn, shape)?;
            let report = mse_experiment(
                s,
                &nyquist_for(&support),
                &Kernel::for_support(support),
                &region,
                &eval,
                n_realizations,
                seed,
                opts,
            )?;
            rows.push(SweepRow {
                l_over_lambda: l,
                scheme,
                normalized_mse: report.normalized,
                normalized_mse_db: report.normalized_db,
                lattice_points: report.lattice_points,
            });
        }
    }
    Ok(rows)
}

/// Columns `L_over_lambda,scheme,normalized_mse_db`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["L_over_lambda", "scheme", "normalized_mse_db"])?;
    for row in rows {
        w.write_record(&[
            row.l_over_lambda.to_string(),
            row.scheme.label().to_string(),
            row.normalized_mse_db.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::kernel_disk;
    use crate::lattice::nyquist_hex;

    fn kn() -> Wavenumber {
        Wavenumber::from_lambda(1.0).unwrap()
    }

    #[test]
    fn grid_spacing() {
        let g = eval_grid(&Region::new(2.0).unwrap(), kn(), 8.0).unwrap();
        assert_eq!(g.xs.len(), 17);
        assert_eq!(g.xs[0], -1.0);
        assert!((g.xs[16] - 1.0).abs() < 1e-15);
        assert_eq!(g.positions()[1], Position::new(g.xs[1], -1.0));
        assert!(eval_grid(&Region::new(2.0).unwrap(), kn(), 0.0).is_err());
    }

    #[test]
    fn rect_matched_embeds_the_ellipse() {
        let kn = kn();
        let circle = EllipseShape::circle(0.47).unwrap();
        let s = Scheme::RectMatched.support(kn, circle).unwrap();
        assert!((s.wavenumber().kappa() - 0.47 * kn.kappa()).abs() < 1e-12);
        let tilted = EllipseShape::new(0.8, 0.2, 0.6).unwrap();
        let s = Scheme::RectMatched.support(kn, tilted).unwrap();
        let e = SpectralSupport::Ellipse(kn, tilted);
        for i in 0..360 {
            let t = (i as f64).to_radians();
            // boundary point of the ellipse
            let v = tilted.sqrt_g() * nalgebra::Vector2::new(t.cos(), t.sin()) * kn.kappa();
            let k = crate::geometry::WaveVector::from_vector(v);
            assert!(e.gauge(k) <= 1.0 + 1e-12);
            assert!(s.contains(k));
        }
    }

    #[test]
    fn validation() {
        let kn = kn();
        let s = ScatteringScenario::isotropic(kn);
        let q = nyquist_hex(kn);
        let k = kernel_disk(kn);
        let big = Region::new(4.0).unwrap();
        let small = Region::new(2.0).unwrap();
        let o = MseOptions::default();
        assert!(mse_experiment(&s, &q, &k, &small, &big, 4, 1, &o).is_err());
        assert!(mse_experiment(&s, &q, &k, &big, &small, 0, 1, &o).is_err());
        let rect = crate::kernels::kernel_rect(kn);
        assert!(mse_experiment(&s, &q, &rect, &big, &small, 2, 1, &o).is_err());
    }

    #[test]
    fn batching_does_not_change_the_result() {
        let kn = kn();
        let s = ScatteringScenario::single(kn, 0.0, 0.0, 40.0).unwrap();
        let q = nyquist_hex(kn);
        let k = kernel_disk(kn);
        let region = Region::new(4.0).unwrap();
        let eval = Region::new(2.0).unwrap();
        let mut o = MseOptions {
            n_waves: 128,
            ..MseOptions::default()
        };
        let a = mse_experiment(&s, &q, &k, &region, &eval, 10, 3, &o).unwrap();
        o.batch = 3;
        let b = mse_experiment(&s, &q, &k, &region, &eval, 10, 3, &o).unwrap();
        assert_eq!(a.pointwise.len(), b.pointwise.len());
        for (x, y) in a.pointwise.iter().zip(&b.pointwise) {
            assert!((x - y).abs() <= 1e-12 * x.max(1e-300));
        }
        assert!(a.normalized >= 0.0 && a.normalized < 1.0);
        assert!((a.empirical_energy - 1.0).abs() < 0.5);
    }

    #[test]
    fn sweep_csv_layout() {
        let rows = vec![SweepRow {
            l_over_lambda: 2.0,
            scheme: Scheme::RectHalfLambda,
            normalized_mse: 0.1,
            normalized_mse_db: -10.0,
            lattice_points: 25,
        }];
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "L_over_lambda,scheme,normalized_mse_db\n2,rect-half-lambda,-10\n"
        );
    }
}
