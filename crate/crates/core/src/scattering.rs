//! Von Mises–Fisher mixtures of spectral factors on the upper hemisphere,
//! the wavenumber-domain PSD they induce and the ellipse embedding of their
//! thresholded support.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::geometry::{check_angles, kz, EllipseShape, WaveVector, Wavenumber};
use crate::quadrature::GaussLegendre;

/// Grid spacing of the support fit, in units of κ.
pub const SUPPORT_GRID_STEPS: i64 = 200;

const WEIGHT_TOL: f64 = 1e-9;

/// One scattering cluster: `A²_i(u) ∝ exp(α ξᵀu)` restricted to `u_z ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VmfCluster {
    weight: f64,
    theta_r: f64,
    phi_r: f64,
    alpha: f64,
    /// `1 / ∫_hemisphere exp(α(ξᵀu − 1)) dΩ`
    #[serde(skip)]
    norm: f64,
}

impl VmfCluster {
    /// Angles in radians; `phi_r` is wrapped into `[0, 2π)`.
    pub fn new(weight: f64, theta_r: f64, phi_r: f64, alpha: f64) -> Result<Self> {
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(invalid(format!("cluster weight must be non-negative, got {weight}")));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(invalid(format!(
                "cluster concentration must be non-negative, got {alpha}"
            )));
        }
        if !phi_r.is_finite() {
            return Err(invalid("cluster azimuth must be finite"));
        }
        let phi_r = phi_r.rem_euclid(TAU);
        check_angles(theta_r, phi_r)?;
        let norm = 1.0 / (TAU * hemisphere_mass(theta_r, alpha));
        Ok(Self {
            weight,
            theta_r,
            phi_r,
            alpha,
            norm,
        })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn theta_r(&self) -> f64 {
        self.theta_r
    }

    pub fn phi_r(&self) -> f64 {
        self.phi_r
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn modal_direction(&self) -> [f64; 3] {
        let (st, ct) = self.theta_r.sin_cos();
        let (sp, cp) = self.phi_r.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Unit-mass density on the upper hemisphere (without the weight).
    pub fn density(&self, u: [f64; 3]) -> f64 {
        let xi = self.modal_direction();
        let dot = xi[0] * u[0] + xi[1] * u[1] + xi[2] * u[2];
        self.norm * (self.alpha * (dot - 1.0)).exp()
    }

    /// Draws a direction from the hemisphere-restricted density.
    pub fn sample_direction<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 3] {
        let xi = self.modal_direction();
        let (e1, e2) = orthonormal_frame(xi);
        loop {
            let w = sample_cosine(self.alpha, rng.random::<f64>());
            let psi = TAU * rng.random::<f64>();
            let s = (1.0 - w * w).max(0.0).sqrt();
            let (sp, cp) = psi.sin_cos();
            let u = [
                w * xi[0] + s * (cp * e1[0] + sp * e2[0]),
                w * xi[1] + s * (cp * e1[1] + sp * e2[1]),
                w * xi[2] + s * (cp * e1[2] + sp * e2[2]),
            ];
            if u[2] >= 0.0 {
                return u;
            }
        }
    }
}

/// Inverse CDF of the density `∝ exp(α w)` on `[-1, 1]`.
fn sample_cosine(alpha: f64, uniform: f64) -> f64 {
    if alpha < 1e-12 {
        return 2.0 * uniform - 1.0;
    }
    let w = 1.0 + ((1.0 - uniform) * (-2.0 * alpha).exp_m1()).ln_1p() / alpha;
    w.clamp(-1.0, 1.0)
}

fn orthonormal_frame(xi: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    // any vector not parallel to ξ seeds Gram–Schmidt
    let seed = if xi[2].abs() < 0.9 {
        [0.0, 0.0, 1.0]
    } else {
        [1.0, 0.0, 0.0]
    };
    let d = seed[0] * xi[0] + seed[1] * xi[1] + seed[2] * xi[2];
    let mut e1 = [seed[0] - d * xi[0], seed[1] - d * xi[1], seed[2] - d * xi[2]];
    let n = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1.iter_mut().for_each(|c| *c /= n);
    let e2 = [
        xi[1] * e1[2] - xi[2] * e1[1],
        xi[2] * e1[0] - xi[0] * e1[2],
        xi[0] * e1[1] - xi[1] * e1[0],
    ];
    (e1, e2)
}

/// `(1/2π) ∫_{u_z ≥ 0} exp(α(ξᵀu − 1)) dΩ` for `ξ` at polar angle `theta_r`.
///
/// With `w = ξᵀu` the azimuthal fraction of the circle `{ξᵀu = w}` lying in
/// the upper hemisphere is 1 above `w = sin θ_r`, 0 below `−sin θ_r`, and
/// `arccos(−w cos θ_r / (√(1−w²) sin θ_r))/π` in between.
fn hemisphere_mass(theta_r: f64, alpha: f64) -> f64 {
    let (s, c) = theta_r.sin_cos();
    let c = c.max(0.0);
    let upper = exp_integral(alpha, s, 1.0);
    if s <= 0.0 {
        return upper;
    }
    // w = s cos ϑ absorbs the square-root behaviour at w = ±s
    let gl = GaussLegendre::new(16);
    let panels = 64 + (alpha.sqrt() as usize).min(4096);
    let middle = gl.integrate(0.0, PI, panels, |t| {
        let (st, ct) = t.sin_cos();
        let w = s * ct;
        let b = (1.0 - w * w).max(0.0).sqrt() * s;
        let ratio = if b > 0.0 {
            (-w * c / b).clamp(-1.0, 1.0)
        } else {
            -w.signum()
        };
        (alpha * (w - 1.0)).exp() * ratio.acos() / PI * s * st
    });
    upper + middle
}

/// `∫_a^b exp(α(w − 1)) dw`.
fn exp_integral(alpha: f64, a: f64, b: f64) -> f64 {
    if alpha == 0.0 {
        return b - a;
    }
    let hi = (alpha * (b - 1.0)).exp();
    // hi − lo = hi·(1 − exp(α(a − b)))
    -hi * (alpha * (a - b)).exp_m1() / alpha
}

/// Mixture `A² = Σ w_i A²_i` of hemisphere-normalized clusters at wavenumber κ.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringScenario {
    clusters: Vec<VmfCluster>,
    kn: Wavenumber,
    cumulative: Vec<f64>,
}

/// On-disk scenario with angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub lambda: f64,
    pub clusters: Vec<ClusterFile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterFile {
    pub weight: f64,
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub alpha: f64,
}

impl ScenarioFile {
    pub fn into_scenario(&self) -> Result<ScatteringScenario> {
        let kn = Wavenumber::from_lambda(self.lambda)?;
        let clusters = self
            .clusters
            .iter()
            .map(|c| VmfCluster::new(c.weight, c.theta_deg.to_radians(), c.phi_deg.to_radians(), c.alpha))
            .collect::<Result<Vec<_>>>()?;
        ScatteringScenario::new(clusters, kn)
    }
}

impl ScatteringScenario {
    pub fn new(clusters: Vec<VmfCluster>, kn: Wavenumber) -> Result<Self> {
        if clusters.is_empty() {
            return Err(invalid("a scenario needs at least one cluster"));
        }
        let total: f64 = clusters.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(invalid(format!("cluster weights must sum to 1, got {total}")));
        }
        let mut cumulative = Vec::with_capacity(clusters.len());
        let mut acc = 0.0;
        for c in &clusters {
            acc += c.weight;
            cumulative.push(acc / total);
        }
        Ok(Self {
            clusters,
            kn,
            cumulative,
        })
    }

    pub fn isotropic(kn: Wavenumber) -> Self {
        Self::single(kn, 0.0, 0.0, 0.0).expect("isotropic cluster is valid")
    }

    /// Single cluster with modal direction `(theta_r, phi_r)` in radians.
    pub fn single(kn: Wavenumber, theta_r: f64, phi_r: f64, alpha: f64) -> Result<Self> {
        Self::new(vec![VmfCluster::new(1.0, theta_r, phi_r, alpha)?], kn)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        file.into_scenario()
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            lambda: self.kn.lambda(),
            clusters: self
                .clusters
                .iter()
                .map(|c| ClusterFile {
                    weight: c.weight,
                    theta_deg: c.theta_r.to_degrees(),
                    phi_deg: c.phi_r.to_degrees(),
                    alpha: c.alpha,
                })
                .collect(),
        }
    }

    /// SHA-256 over the resolved parameters (radians, bit-exact).
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.kn.lambda().to_le_bytes());
        for c in &self.clusters {
            for v in [c.weight, c.theta_r, c.phi_r, c.alpha] {
                h.update(v.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    pub fn clusters(&self) -> &[VmfCluster] {
        &self.clusters
    }

    pub fn wavenumber(&self) -> Wavenumber {
        self.kn
    }

    /// Same scenario with every modal azimuth shifted by `delta`.
    pub fn rotated(&self, delta: f64) -> Result<Self> {
        let clusters = self
            .clusters
            .iter()
            .map(|c| VmfCluster::new(c.weight, c.theta_r, c.phi_r + delta, c.alpha))
            .collect::<Result<Vec<_>>>()?;
        Self::new(clusters, self.kn)
    }

    /// `A²(u)` for a unit vector `u` with `u_z ≥ 0`.
    pub fn spectral_factor_sq_dir(&self, u: [f64; 3]) -> f64 {
        self.clusters.iter().map(|c| c.weight * c.density(u)).sum()
    }

    pub fn spectral_factor_sq(&self, theta: f64, phi: f64) -> f64 {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        self.spectral_factor_sq_dir([st * cp, st * sp, ct])
    }

    /// `A²(k)/k_z(k)` inside the open disk, 0 elsewhere.
    pub fn psd(&self, k: WaveVector) -> f64 {
        let kappa = self.kn.kappa();
        let z = kz(k, self.kn);
        if k.norm() >= kappa || z.re <= 0.0 {
            return 0.0;
        }
        self.a_sq_at(k) / z.re
    }

    pub fn psd_sample(&self, k: WaveVector) -> PsdSample {
        PsdSample { k, value: self.psd(k) }
    }

    /// `A²` at the direction of an in-disk wavevector.
    fn a_sq_at(&self, k: WaveVector) -> f64 {
        let kappa = self.kn.kappa();
        let z = kz(k, self.kn).re;
        self.spectral_factor_sq_dir([k.kx / kappa, k.ky / kappa, z / kappa])
    }

    /// Picks a cluster by weight, then a direction from it.
    pub fn sample_direction<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 3] {
        let i = if self.clusters.len() == 1 {
            0
        } else {
            let v: f64 = rng.random();
            self.cumulative
                .iter()
                .position(|&c| v < c)
                .unwrap_or(self.clusters.len() - 1)
        };
        self.clusters[i].sample_direction(rng)
    }

    /// Ellipse embedding of the `threshold_db` support of `A²`.
    pub fn support_at_threshold(&self, threshold_db: f64) -> Result<EllipseShape> {
        Ok(self.support_fit(threshold_db)?.a_sq.shape)
    }

    /// Support fits under both thresholding conventions (`A²` and `S = A²/k_z`).
    pub fn support_fit(&self, threshold_db: f64) -> Result<SupportFit> {
        if !(threshold_db.is_finite() && threshold_db < 0.0) {
            return Err(invalid(format!("threshold must be negative dB, got {threshold_db}")));
        }
        let grid = self.support_grid();
        let a_sq = fit_on_grid(&grid, |g| g.a_sq, threshold_db)?;
        let psd = fit_on_grid(&grid, |g| g.psd, threshold_db)?;
        Ok(SupportFit {
            threshold_db,
            a_sq,
            psd,
        })
    }

    fn support_grid(&self) -> Vec<GridPoint> {
        let n = SUPPORT_GRID_STEPS;
        let kappa = self.kn.kappa();
        let mut out = Vec::new();
        for iy in -n..=n {
            for ix in -n..=n {
                if ix * ix + iy * iy > n * n {
                    continue;
                }
                let p = [ix as f64 / n as f64, iy as f64 / n as f64];
                let k = WaveVector::new(p[0] * kappa, p[1] * kappa);
                out.push(GridPoint {
                    p,
                    a_sq: self.a_sq_at(k),
                    psd: self.psd(k),
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdSample {
    pub k: WaveVector,
    pub value: f64,
}

struct GridPoint {
    /// wavevector in units of κ
    p: [f64; 2],
    a_sq: f64,
    psd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipseFit {
    pub shape: EllipseShape,
    /// Super-threshold grid points.
    pub points: usize,
    /// Directly measured `m(K)/m(D)` from the grid count.
    pub area_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportFit {
    pub threshold_db: f64,
    /// Threshold applied to `A²`.
    pub a_sq: EllipseFit,
    /// Threshold applied to the PSD `A²/k_z`.
    pub psd: EllipseFit,
}

fn fit_on_grid(grid: &[GridPoint], value: impl Fn(&GridPoint) -> f64, threshold_db: f64) -> Result<EllipseFit> {
    let max = grid.iter().map(&value).fold(0.0, f64::max);
    if max.is_nan() || max <= 0.0 {
        return Err(Error::EmptySupport { threshold_db });
    }
    let level = 10f64.powf(threshold_db / 10.0) * max;
    let points: Vec<[f64; 2]> = grid.iter().filter(|g| value(g) >= level).map(|g| g.p).collect();
    let n = SUPPORT_GRID_STEPS as f64;
    let area_fraction = points.len() as f64 / (n * n * PI);
    let shape = fit_ellipse(&points).ok_or(Error::EmptySupport { threshold_db })?;
    Ok(EllipseFit {
        shape,
        points: points.len(),
        area_fraction,
    })
}

/// Smallest centered ellipse, with axes along the principal directions of
/// the point cloud, containing every point.
fn fit_ellipse(points: &[[f64; 2]]) -> Option<EllipseShape> {
    let mut m = Matrix2::zeros();
    for p in points {
        let v = Vector2::new(p[0], p[1]);
        m += v * v.transpose();
    }
    let eig = SymmetricEigen::new(m);
    let (hi, lo) = if eig.eigenvalues[0] >= eig.eigenvalues[1] {
        (0, 1)
    } else {
        (1, 0)
    };
    let spread = eig.eigenvalues[hi];
    let k_phi = if spread <= 0.0 || (eig.eigenvalues[hi] - eig.eigenvalues[lo]) <= 1e-9 * spread {
        0.0
    } else {
        let v = eig.eigenvectors.column(hi);
        v[1].atan2(v[0])
    };
    let (s, c) = k_phi.sin_cos();
    let proj: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            let u = c * p[0] + s * p[1];
            let v = -s * p[0] + c * p[1];
            (u * u, v * v)
        })
        .collect();
    // with axes A = t√ρ, B = t/√ρ containment needs t² ≥ u²/ρ + v²ρ; minimise over ln ρ
    let cost = |x: f64| {
        let rho = x.exp();
        proj.iter().map(|&(uu, vv)| uu / rho + vv * rho).fold(0.0, f64::max)
    };
    let (mut a, mut b) = (-20.0f64, 20.0f64);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    for _ in 0..200 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = cost(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = cost(x2);
        }
    }
    let x = 0.5 * (a + b);
    let t = cost(x).sqrt();
    if t.is_nan() || t <= 0.0 {
        return None;
    }
    let rho = x.exp();
    let (ax_u, ax_v) = ((t * rho.sqrt()).min(1.0), (t / rho.sqrt()).min(1.0));
    if (ax_u - ax_v).abs() <= 1e-9 * ax_u.max(ax_v) {
        // a circle carries no orientation
        let r = ax_u.max(ax_v);
        EllipseShape::new(r, r, 0.0).ok()
    } else if ax_u > ax_v {
        EllipseShape::new(ax_u, ax_v, k_phi).ok()
    } else {
        EllipseShape::new(ax_v, ax_u, k_phi + PI / 2.0).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn kn() -> Wavenumber {
        Wavenumber::from_lambda(1.0).unwrap()
    }

    fn two_cluster() -> ScatteringScenario {
        ScatteringScenario::new(
            vec![
                VmfCluster::new(0.5, 0.0, PI, 200.0).unwrap(),
                VmfCluster::new(0.5, 10f64.to_radians(), 0.0, 100.0).unwrap(),
            ],
            kn(),
        )
        .unwrap()
    }

    /// Brute-force `∫∫ A² sinθ dθ dφ` with GL in θ and the trapezoid rule in φ.
    fn hemisphere_integral(s: &ScatteringScenario) -> f64 {
        let gl = GaussLegendre::new(16);
        let nphi = 720;
        gl.integrate(0.0, PI / 2.0, 200, |t| {
            let ring: f64 = (0..nphi)
                .map(|j| s.spectral_factor_sq(t, TAU * j as f64 / nphi as f64))
                .sum::<f64>()
                * TAU
                / nphi as f64;
            ring * t.sin()
        })
    }

    #[test]
    fn isotropic_is_flat() {
        let s = ScatteringScenario::isotropic(kn());
        for &(t, p) in &[(0.0, 0.0), (0.3, 1.0), (1.2, 4.0), (PI / 2.0, 6.0)] {
            assert_abs_diff_eq!(s.spectral_factor_sq(t, p), 1.0 / TAU, epsilon = 1e-15);
        }
    }

    #[test]
    fn broadside_peak_is_at_zenith() {
        let s = ScatteringScenario::single(kn(), 0.0, 0.0, 40.0).unwrap();
        let peak = s.spectral_factor_sq(0.0, 0.0);
        for i in 1..50 {
            let t = i as f64 * (PI / 2.0) / 50.0;
            assert!(s.spectral_factor_sq(t, 0.3 * i as f64) < peak);
        }
        // hemisphere mass of a broadside cluster: (1 − e^{−α})/α
        let c = VmfCluster::new(1.0, 0.0, 0.0, 40.0).unwrap();
        assert_abs_diff_eq!(c.norm, 40.0 / (TAU * -(-40f64).exp_m1()), epsilon = 1e-12);
    }

    #[test]
    fn clusters_have_unit_hemisphere_mass() {
        for s in [
            ScatteringScenario::isotropic(kn()),
            ScatteringScenario::single(kn(), 0.0, 0.0, 40.0).unwrap(),
            ScatteringScenario::single(kn(), 1.0, 2.0, 12.0).unwrap(),
            ScatteringScenario::single(kn(), PI / 2.0, 0.5, 30.0).unwrap(),
            ScatteringScenario::single(kn(), 1.4, 0.5, 0.7).unwrap(),
            two_cluster(),
        ] {
            let total = hemisphere_integral(&s);
            assert!((total - 1.0).abs() < 1e-6, "{s:?}: {total}");
        }
    }

    #[test]
    fn small_concentration_approaches_isotropic() {
        let a = ScatteringScenario::single(kn(), 0.4, 1.0, 1e-6).unwrap();
        let b = ScatteringScenario::single(kn(), 0.4, 1.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (t, p) = (rng.random_range(0.0..PI / 2.0), rng.random_range(0.0..TAU));
            assert!((a.spectral_factor_sq(t, p) - b.spectral_factor_sq(t, p)).abs() < 1e-4);
        }
    }

    #[test]
    fn psd_examples() {
        let kn = kn();
        let s = ScatteringScenario::isotropic(kn);
        assert_abs_diff_eq!(s.psd(WaveVector::default()), 1.0 / (4.0 * PI * PI), epsilon = 1e-15);
        assert_eq!(s.psd(WaveVector::new(1.01 * TAU, 0.0)), 0.0);
        assert_eq!(s.psd(WaveVector::new(TAU, 0.0)), 0.0);
        let a = s.psd(WaveVector::new(0.6 * TAU, 0.0));
        let b = s.psd(WaveVector::new(0.6 * TAU * 0.6, 0.6 * TAU * 0.8));
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        assert!(s.psd(WaveVector::new(0.999 * TAU, 0.0)) > 10.0 * a);
    }

    #[test]
    fn scenario_validation() {
        let kn = kn();
        assert!(VmfCluster::new(-0.1, 0.0, 0.0, 1.0).is_err());
        assert!(VmfCluster::new(1.0, 2.0, 0.0, 1.0).is_err());
        assert!(VmfCluster::new(1.0, 0.0, 0.0, -1.0).is_err());
        let half = VmfCluster::new(0.5, 0.0, 0.0, 1.0).unwrap();
        assert!(ScatteringScenario::new(vec![half], kn).is_err());
        assert!(ScatteringScenario::new(vec![], kn).is_err());
        assert!(ScatteringScenario::new(vec![half, half], kn).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"lambda": 1.0, "clusters": [
            {"weight": 0.5, "theta_deg": 0, "phi_deg": 180, "alpha": 200},
            {"weight": 0.5, "theta_deg": 10, "phi_deg": 0, "alpha": 100}]}"#;
        let s = ScatteringScenario::from_json(text).unwrap();
        assert_eq!(s, two_cluster());
        assert_eq!(s.hash(), two_cluster().hash());
        assert_ne!(s.hash(), ScatteringScenario::isotropic(kn()).hash());
        assert_eq!(s.hash().len(), 64);
        let again = s.to_file().into_scenario().unwrap();
        assert_eq!(again.clusters().len(), 2);
        assert!(ScatteringScenario::from_json(r#"{"lambda": 1.0}"#).is_err());
        assert!(ScatteringScenario::from_json(r#"{"lambda": -1.0, "clusters": []}"#).is_err());
    }

    #[test]
    fn sampled_cosines_follow_the_cluster() {
        // broadside: E{u_z} = ∫ w e^{αw} dw / ∫ e^{αw} dw over [0, 1]
        let alpha = 40.0;
        let c = VmfCluster::new(1.0, 0.0, 0.0, alpha).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 40_000;
        let mean = (0..n).map(|_| c.sample_direction(&mut rng)[2]).sum::<f64>() / n as f64;
        let expected = 1.0 / (1.0 - (-alpha).exp()) - 1.0 / alpha;
        let sd = 1.0 / alpha; // upper bound on the spread of w
        assert!(
            (mean - expected).abs() < 4.0 * sd / (n as f64).sqrt(),
            "{mean} vs {expected}"
        );

        // isotropic: u_z is uniform on [0, 1]
        let iso = VmfCluster::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let mean = (0..n).map(|_| iso.sample_direction(&mut rng)[2]).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 4.0 * (1.0f64 / 12.0).sqrt() / (n as f64).sqrt());
    }

    #[test]
    fn support_fit_examples() {
        let iso = ScatteringScenario::isotropic(kn()).support_at_threshold(-20.0).unwrap();
        assert_abs_diff_eq!(iso.a1(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(iso.a2(), 1.0, epsilon = 1e-9);

        let single = ScatteringScenario::single(kn(), 0.0, 0.0, 40.0).unwrap();
        let fit = single.support_fit(-20.0).unwrap();
        // A² ≥ 1% of its peak ⇔ cos θ ≥ 1 − ln(100)/40
        let exact = (1.0 - (1.0 - 100f64.ln() / 40.0).powi(2)).sqrt();
        assert_eq!(fit.a_sq.shape.k_phi(), 0.0);
        assert_eq!(fit.a_sq.shape.a1(), fit.a_sq.shape.a2());
        for a in [fit.a_sq.shape.a1(), fit.a_sq.shape.a2()] {
            assert!((a - 0.47).abs() <= 0.03, "{a}");
            assert!((a - exact).abs() <= 2.0 / SUPPORT_GRID_STEPS as f64, "{a} vs {exact}");
        }
        assert!((fit.a_sq.area_fraction - exact * exact).abs() < 0.01);

        let two = two_cluster().support_at_threshold(-20.0).unwrap();
        assert!((two.a1() - 0.5).abs() <= 0.05, "{two:?}");
        assert!((two.a2() - 0.35).abs() <= 0.05, "{two:?}");

        assert!(single.support_fit(0.0).is_err());
        assert!(single.support_fit(f64::NAN).is_err());
    }

    #[test]
    fn fitted_ellipse_contains_every_point() {
        let s = two_cluster();
        let shape = s.support_at_threshold(-20.0).unwrap();
        let grid = s.support_grid();
        let max = grid.iter().map(|g| g.a_sq).fold(0.0, f64::max);
        let support = crate::geometry::SpectralSupport::Ellipse(Wavenumber::from_kappa(1.0).unwrap(), shape);
        for g in grid.iter().filter(|g| g.a_sq >= 0.01 * max) {
            assert!(support.gauge(WaveVector::new(g.p[0], g.p[1])) <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn stricter_threshold_never_shrinks_the_fit() {
        let s = two_cluster();
        let mut prev = 0.0;
        for db in [-5.0, -10.0, -20.0, -30.0] {
            let e = s.support_at_threshold(db).unwrap();
            assert!(e.axis_product() >= prev - 1e-12);
            prev = e.axis_product();
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn psd_rotates_with_the_scenario(
            theta in 0.0f64..1.5, phi in 0.0f64..TAU, alpha in 0.0f64..60.0,
            delta in 0.0f64..TAU, kr in 0.0f64..0.99, ka in 0.0f64..TAU,
        ) {
            let kn = kn();
            let s = ScatteringScenario::single(kn, theta, phi, alpha).unwrap();
            let r = s.rotated(delta).unwrap();
            let k = WaveVector::new(kr * kn.kappa() * ka.cos(), kr * kn.kappa() * ka.sin());
            let kr_rot = WaveVector::new(
                k.kx * delta.cos() - k.ky * delta.sin(),
                k.kx * delta.sin() + k.ky * delta.cos(),
            );
            let (a, b) = (s.psd(k), r.psd(kr_rot));
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0), "{} vs {}", a, b);
            prop_assert!(a >= 0.0);
        }
    }
}
