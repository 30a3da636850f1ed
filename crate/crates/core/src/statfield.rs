//! Stationary Gaussian fields built from a scattering scenario: the ACF in
//! closed form and by angular quadrature, plane-wave synthesis and energy.
//!
//! Correlation convention: `c(r) = E{e(r' + r) e*(r')} = ∫ A² exp(i kᵀr) dΩ`,
//! normalized so that `c(0) = 1`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::{Position, WaveVector, Wavenumber};
use crate::kernels::sinc;
use crate::quadrature::GaussLegendre;
use crate::scattering::ScatteringScenario;

/// Default number of plane waves per realization.
pub const DEFAULT_WAVES: usize = 1024;

/// Finest angular rule: `4·2^ℓ` GL panels in θ and `16·2^ℓ` azimuths.
pub const MAX_ACF_LEVEL: u32 = 6;

/// Agreement between successive angular rules required by [`acf_numeric`].
pub const ACF_TOLERANCE: f64 = 1e-10;

const GL_ORDER: usize = 8;

/// Clarke's model `sinc(2‖r‖/λ)`.
pub fn acf_clarke(r: Position, kn: Wavenumber) -> f64 {
    sinc(2.0 * r.norm() / kn.lambda())
}

/// Angular quadrature rule for `∫ A²(θ,φ) exp(iκ sinθ (cosφ x + sinφ y)) sinθ dθ dφ`.
///
/// Weights are divided by their sum so that the rule returns exactly 1 at
/// the origin; they are all non-negative, hence any matrix built from the
/// rule is positive semidefinite.
#[derive(Debug, Clone)]
pub struct AngularAcf {
    level: u32,
    kx: Vec<f64>,
    ky: Vec<f64>,
    w: Vec<f64>,
    /// `Σ A² sinθ ΔθΔφ` before normalisation.
    mass: f64,
}

impl AngularAcf {
    pub fn at_level(s: &ScatteringScenario, level: u32) -> Self {
        let kappa = s.wavenumber().kappa();
        let gl = GaussLegendre::new(GL_ORDER);
        let thetas = gl.composite(0.0, PI / 2.0, 4 << level);
        let nphi = 16usize << level;
        let dphi = TAU / nphi as f64;
        let azimuths: Vec<(f64, f64)> = (0..nphi).map(|j| (dphi * j as f64).sin_cos()).collect();

        let mut raw = Vec::with_capacity(thetas.len() * nphi);
        for &(t, wt) in &thetas {
            let (st, ct) = t.sin_cos();
            for &(sp, cp) in &azimuths {
                let a = s.spectral_factor_sq_dir([st * cp, st * sp, ct]);
                raw.push((kappa * st * cp, kappa * st * sp, a * st * wt * dphi));
            }
        }
        let mass: f64 = raw.iter().map(|n| n.2).sum();
        let max = raw.iter().map(|n| n.2).fold(0.0, f64::max);
        let (mut kx, mut ky, mut w) = (Vec::new(), Vec::new(), Vec::new());
        for (x, y, v) in raw {
            // nodes this light cannot move the sum at double precision
            if v > 1e-18 * max {
                kx.push(x);
                ky.push(y);
                w.push(v / mass);
            }
        }
        Self { level, kx, ky, w, mass }
    }

    /// Coarsest level at which every probe agrees with the next level to `tol`.
    pub fn converged(s: &ScatteringScenario, probes: &[Position], tol: f64) -> Result<Self> {
        let mut coarse = Self::at_level(s, 0);
        let mut evaluations = 0;
        for level in 1..=MAX_ACF_LEVEL {
            let fine = Self::at_level(s, level);
            let worst = probes
                .iter()
                .map(|&r| (coarse.eval(r) - fine.eval(r)).norm())
                .fold(0.0, f64::max);
            evaluations += probes.len() * (coarse.len() + fine.len());
            if worst < tol {
                return Ok(coarse);
            }
            if level == MAX_ACF_LEVEL {
                return Err(Error::Quadrature {
                    achieved: worst,
                    target: tol,
                    evaluations,
                });
            }
            coarse = fine;
        }
        unreachable!("the loop returns at MAX_ACF_LEVEL")
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Hemisphere integral of `A²` under this rule.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn eval(&self, r: Position) -> Complex64 {
        let (mut re, mut im) = (0.0, 0.0);
        for ((&kx, &ky), &w) in self.kx.iter().zip(&self.ky).zip(&self.w) {
            let (s, c) = (kx * r.x + ky * r.y).sin_cos();
            re += w * c;
            im += w * s;
        }
        Complex64::new(re, im)
    }
}

/// Converged angular quadrature of the ACF at a single displacement.
pub fn acf_numeric(s: &ScatteringScenario, r: Position) -> Result<Complex64> {
    let mut previous = AngularAcf::at_level(s, 0).eval(r);
    for level in 1..=MAX_ACF_LEVEL {
        let current = AngularAcf::at_level(s, level).eval(r);
        let diff = (current - previous).norm();
        if diff < ACF_TOLERANCE {
            return Ok(current);
        }
        if level == MAX_ACF_LEVEL {
            return Err(Error::Quadrature {
                achieved: diff,
                target: ACF_TOLERANCE,
                evaluations: level as usize,
            });
        }
        previous = current;
    }
    unreachable!("the loop returns at MAX_ACF_LEVEL")
}

/// A normalized ACF ready for repeated evaluation.
#[derive(Debug, Clone)]
pub enum Acf {
    Clarke(Wavenumber),
    Angular(AngularAcf),
}

impl Acf {
    /// Clarke's model for purely isotropic scenarios, otherwise an angular
    /// rule converged to `tol` at displacements up to `r_max`.
    pub fn for_scenario(s: &ScatteringScenario, r_max: f64, tol: f64) -> Result<Self> {
        if s.clusters().iter().all(|c| c.alpha() == 0.0) {
            return Ok(Acf::Clarke(s.wavenumber()));
        }
        let mut probes = Vec::new();
        for i in 0..16 {
            let (sa, ca) = (PI * i as f64 / 16.0).sin_cos();
            for f in [0.25, 0.5, 1.0] {
                probes.push(Position::new(f * r_max * ca, f * r_max * sa));
            }
        }
        Ok(Acf::Angular(AngularAcf::converged(s, &probes, tol)?))
    }

    pub fn eval(&self, r: Position) -> Complex64 {
        match self {
            Acf::Clarke(kn) => Complex64::new(acf_clarke(r, *kn), 0.0),
            Acf::Angular(rule) => rule.eval(r),
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Acf::Clarke(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    /// Per-point energy `E{|e(r)|²}` (unit by the ACF normalization).
    pub sigma_sq: f64,
    /// Hemisphere integral of `A²` before normalization.
    pub spectral_mass: f64,
}

pub fn average_energy(s: &ScatteringScenario) -> Result<EnergyReport> {
    let rule = AngularAcf::converged(s, &[Position::ORIGIN], 1e-9)?;
    Ok(EnergyReport {
        sigma_sq: rule.eval(Position::ORIGIN).re,
        spectral_mass: rule.mass(),
    })
}

/// RNG of realization `index` under master seed `seed`.
pub fn realization_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `e(r) = M^{-1/2} Σ g_m exp(i k_mᵀ r)` with directions drawn from `A² sinθ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveField {
    waves: Vec<WaveVector>,
    gains: Vec<Complex64>,
}

impl PlaneWaveField {
    pub fn draw(s: &ScatteringScenario, n_waves: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        if n_waves == 0 {
            return Err(invalid("a field needs at least one plane wave"));
        }
        let kappa = s.wavenumber().kappa();
        let scale = FRAC_1_SQRT_2 / (n_waves as f64).sqrt();
        let mut waves = Vec::with_capacity(n_waves);
        let mut gains = Vec::with_capacity(n_waves);
        for _ in 0..n_waves {
            let u = s.sample_direction(rng);
            waves.push(WaveVector::new(kappa * u[0], kappa * u[1]));
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            gains.push(Complex64::new(re, im) * scale);
        }
        Ok(Self { waves, gains })
    }

    /// Realization `index` of the ensemble seeded by `seed`.
    pub fn realization(s: &ScatteringScenario, n_waves: usize, seed: u64, index: u64) -> Result<Self> {
        Self::draw(s, n_waves, &mut realization_rng(seed, index))
    }

    pub fn waves(&self) -> &[WaveVector] {
        &self.waves
    }

    /// Gains including the `M^{-1/2}` factor.
    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }

    pub fn eval(&self, r: Position) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, g) in self.waves.iter().zip(&self.gains) {
            let (s, c) = k.phase(r).sin_cos();
            acc += g * Complex64::new(c, s);
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldMetadata {
    pub seed: u64,
    pub realization: u64,
    pub n_waves: usize,
    pub scenario_hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldRealization {
    pub positions: Vec<Position>,
    pub values: Vec<Complex64>,
    pub metadata: FieldMetadata,
}

impl FieldRealization {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "re", "im"])?;
        for (p, v) in self.positions.iter().zip(&self.values) {
            w.write_record(&[p.x.to_string(), p.y.to_string(), v.re.to_string(), v.im.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Realization 0 of the ensemble seeded by `seed`, sampled at `positions`.
pub fn synthesize(
    s: &ScatteringScenario,
    positions: &[Position],
    seed: u64,
    n_waves: usize,
) -> Result<FieldRealization> {
    let field = PlaneWaveField::realization(s, n_waves, seed, 0)?;
    Ok(FieldRealization {
        positions: positions.to_vec(),
        values: positions.iter().map(|&r| field.eval(r)).collect(),
        metadata: FieldMetadata {
            seed,
            realization: 0,
            n_waves,
            scenario_hash: s.hash(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn kn() -> Wavenumber {
        Wavenumber::from_lambda(1.0).unwrap()
    }

    #[test]
    fn clarke_examples() {
        let kn = kn();
        assert_eq!(acf_clarke(Position::ORIGIN, kn), 1.0);
        assert!(acf_clarke(Position::new(0.5, 0.0), kn).abs() < 1e-16);
        assert_abs_diff_eq!(
            acf_clarke(Position::new(0.0, 0.75), kn),
            -2.0 / (3.0 * PI),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(acf_clarke(Position::new(0.0, 0.75), kn), -0.2122, epsilon = 1e-4);
    }

    #[test]
    fn isotropic_quadrature_matches_clarke() {
        let kn = kn();
        let s = ScatteringScenario::isotropic(kn);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let d = rng.random_range(0.0..3.0);
            let a = rng.random_range(0.0..TAU);
            let r = Position::new(d * a.cos(), d * a.sin());
            let c = acf_numeric(&s, r).unwrap();
            assert!((c.re - acf_clarke(r, kn)).abs() < 1e-9, "{r:?}");
            assert!(c.im.abs() < 1e-9);
        }
        assert_abs_diff_eq!(acf_numeric(&s, Position::ORIGIN).unwrap().re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn concentrated_cluster_widens_coherence() {
        let kn = kn();
        let s = ScatteringScenario::single(kn, 0.0, 0.0, 40.0).unwrap();
        let r = Position::new(0.5, 0.0);
        assert!(acf_numeric(&s, r).unwrap().norm() > acf_clarke(r, kn).abs() + 0.1);
        assert_abs_diff_eq!(acf_numeric(&s, Position::ORIGIN).unwrap().re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn energy_is_unit() {
        for s in [
            ScatteringScenario::isotropic(kn()),
            ScatteringScenario::single(kn(), 0.3, 1.0, 40.0).unwrap(),
        ] {
            let e = average_energy(&s).unwrap();
            assert_abs_diff_eq!(e.sigma_sq, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(e.spectral_mass, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn converged_rule_reports_failure() {
        let s = ScatteringScenario::single(kn(), 0.2, 0.0, 30.0).unwrap();
        let far = [Position::new(1e4, 3e3)];
        assert!(matches!(
            AngularAcf::converged(&s, &far, 1e-12),
            Err(Error::Quadrature { .. })
        ));
    }

    #[test]
    fn synthesis_is_deterministic_and_in_disk() {
        let s = ScatteringScenario::single(kn(), 0.5, 2.0, 10.0).unwrap();
        let pts = [Position::new(0.1, 0.2), Position::new(-3.0, 1.5)];
        let a = synthesize(&s, &pts, 7, 64).unwrap();
        let b = synthesize(&s, &pts, 7, 64).unwrap();
        assert_eq!(a, b);
        let c = synthesize(&s, &pts, 8, 64).unwrap();
        assert_ne!(a.values, c.values);
        let f = PlaneWaveField::realization(&s, 256, 7, 3).unwrap();
        assert!(f.waves().iter().all(|k| k.norm() <= kn().kappa() * (1.0 + 1e-12)));
        assert!(synthesize(&s, &pts, 7, 0).is_err());

        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,y,re,im\n"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn isotropic_field_statistics() {
        let kn = kn();
        let s = ScatteringScenario::isotropic(kn);
        let r = Position::new(0.5, 0.0);
        let n = 2000;
        let (mut var, mut corr) = (0.0, Complex64::new(0.0, 0.0));
        for i in 0..n {
            let f = PlaneWaveField::realization(&s, 512, 11, i).unwrap();
            let e0 = f.eval(Position::ORIGIN);
            var += e0.norm_sqr();
            corr += e0 * f.eval(r).conj();
        }
        var /= n as f64;
        corr /= n as f64;
        assert!((var - 1.0).abs() < 0.05, "{var}");
        assert!(corr.norm() < 0.05, "{corr}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn acf_is_hermitian_and_bounded(
            theta in 0.0f64..1.5, phi in 0.0f64..TAU, alpha in 0.0f64..50.0,
            x in -3.0f64..3.0, y in -3.0f64..3.0,
        ) {
            let s = ScatteringScenario::single(kn(), theta, phi, alpha).unwrap();
            let rule = AngularAcf::at_level(&s, 3);
            let r = Position::new(x, y);
            let (c, m) = (rule.eval(r), rule.eval(-r));
            prop_assert!((c - m.conj()).norm() < 1e-10);
            prop_assert!(c.norm() <= 1.0 + 1e-9);
        }

        #[test]
        fn isotropic_acf_is_radial(d in 0.0f64..3.0, a in 0.0f64..TAU, b in 0.0f64..TAU) {
            let rule = AngularAcf::at_level(&ScatteringScenario::isotropic(kn()), 3);
            let c1 = rule.eval(Position::new(d * a.cos(), d * a.sin()));
            let c2 = rule.eval(Position::new(d * b.cos(), d * b.sin()));
            prop_assert!((c1 - c2).norm() < 1e-9);
            prop_assert!(c1.im.abs() < 1e-9);
        }
    }
}
