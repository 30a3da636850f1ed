//! Direct quadrature of `|det Q|/(2π)² ∫_S exp(i kᵀ r) dk`.
//!
//! The rule is fitted to the support boundary rather than masking an
//! indicator on a box: for centered ellipses the outer variable is
//! `kx = X cos ϑ`, which removes the square-root behaviour of the chord
//! length at `kx = ±X`, and the inner variable runs over the exact chord.

use std::f64::consts::{PI, TAU};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Position, SpectralSupport};
use crate::lattice::SamplingMatrix;
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    /// Stop once two successive refinements differ by less than this.
    pub tolerance: f64,
    /// Panels per axis at which refinement gives up.
    pub max_panels: usize,
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_panels: 512,
            order: 8,
        }
    }
}

pub fn kernel_oracle(s: &SpectralSupport, q: &SamplingMatrix, r: Position) -> Result<f64> {
    kernel_oracle_with(s, q, r, OracleOptions::default())
}

pub fn kernel_oracle_with(s: &SpectralSupport, q: &SamplingMatrix, r: Position, opts: OracleOptions) -> Result<f64> {
    if opts.order == 0 || opts.max_panels == 0 {
        return Err(invalid("oracle needs a positive order and panel budget"));
    }
    let gl = GaussLegendre::new(opts.order);
    let scale = q.determinant().abs() / (TAU * TAU);

    let mut panels = 2;
    let mut evaluations = 0;
    let mut previous = integral(s, r, &gl, panels, &mut evaluations)?;
    loop {
        panels *= 2;
        let current = integral(s, r, &gl, panels, &mut evaluations)?;
        let diff = (current - previous).abs() * scale;
        if diff < opts.tolerance {
            return Ok(current * scale);
        }
        if panels >= opts.max_panels {
            return Err(Error::Quadrature {
                achieved: diff,
                target: opts.tolerance,
                evaluations,
            });
        }
        previous = current;
    }
}

/// `∫_S cos(kᵀ r) dk`; the sine part vanishes on centrally symmetric supports.
fn integral(
    s: &SpectralSupport,
    r: Position,
    gl: &GaussLegendre,
    panels: usize,
    evaluations: &mut usize,
) -> Result<f64> {
    let kappa = s.wavenumber().kappa();
    match *s {
        SpectralSupport::Rect(_) => {
            let nodes = gl.composite(-kappa, kappa, panels);
            let mut total = 0.0;
            for &(kx, wx) in &nodes {
                let mut inner = 0.0;
                for &(ky, wy) in &nodes {
                    inner += wy * (kx * r.x + ky * r.y).cos();
                }
                total += wx * inner;
            }
            *evaluations += nodes.len() * nodes.len();
            Ok(total)
        }
        SpectralSupport::Disk(_) => Ok(ellipse_integral([1.0, 0.0, 1.0], kappa, r, gl, panels, evaluations)),
        SpectralSupport::Ellipse(_, e) => {
            let g = e.g();
            let m = g.try_inverse().ok_or(Error::SingularMatrix { det: g.determinant() })?;
            Ok(ellipse_integral(
                [m[(0, 0)], m[(0, 1)], m[(1, 1)]],
                kappa,
                r,
                gl,
                panels,
                evaluations,
            ))
        }
    }
}

/// Integral over `{k : m00 kx² + 2 m01 kx ky + m11 ky² <= κ²}`.
fn ellipse_integral(
    m: [f64; 3],
    kappa: f64,
    r: Position,
    gl: &GaussLegendre,
    panels: usize,
    evaluations: &mut usize,
) -> f64 {
    let [m00, m01, m11] = m;
    let det = m00 * m11 - m01 * m01;
    // extent of the ellipse along kx
    let x_max = kappa * (m11 / det).sqrt();
    let outer = gl.composite(0.0, PI, panels);
    let inner = gl.composite(-1.0, 1.0, panels);
    let mut total = 0.0;
    for &(t, wt) in &outer {
        let (st, ct) = t.sin_cos();
        let kx = x_max * ct;
        // roots of m11 ky² + 2 m01 kx ky + (m00 kx² - κ²) = 0
        let disc = (m01 * m01 * kx * kx - m11 * (m00 * kx * kx - kappa * kappa)).max(0.0);
        let centre = -m01 * kx / m11;
        let half = disc.sqrt() / m11;
        let mut chord = 0.0;
        for &(u, wu) in &inner {
            let ky = centre + half * u;
            chord += wu * (kx * r.x + ky * r.y).cos();
        }
        total += wt * x_max * st * half * chord;
    }
    *evaluations += outer.len() * inner.len();
    total
}
