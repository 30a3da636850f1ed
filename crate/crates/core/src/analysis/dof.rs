use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::geometry::{Region, SpectralSupport, SupportKind, WaveVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DofReport {
    /// `m(A) m(S) / (2π)²`
    pub dof_real: f64,
    pub dof_count: u64,
    pub kind: SupportKind,
    pub side: f64,
}

/// Landau count of the support over a square region.
pub fn dof(support: &SpectralSupport, region: &Region) -> DofReport {
    let dof_real = region.area() * support.measure() / (TAU * TAU);
    // integer-valued formulas (e.g. rect = 400) must not round up past themselves
    let dof_count = (dof_real * (1.0 - 1e-12)).ceil().max(0.0) as u64;
    DofReport {
        dof_real,
        dof_count,
        kind: support.kind(),
        side: region.side(),
    }
}

/// Fraction of DoF lost by embedding the disk in its bounding square.
pub fn dof_loss_rect_vs_disk() -> f64 {
    1.0 - PI / 4.0
}

/// Number of `ℓ ∈ ℤ²` with `(2π/L) ℓ` in the support.
pub fn count_wavenumber_modes(support: &SpectralSupport, region: &Region) -> u64 {
    let step = TAU / region.side();
    // every support lies inside the disk of radius √2 κ
    let reach = (2f64.sqrt() * support.wavenumber().kappa() / step).ceil() as i64 + 1;
    let mut count = 0;
    for ly in -reach..=reach {
        for lx in -reach..=reach {
            if support.contains(WaveVector::new(step * lx as f64, step * ly as f64)) {
                count += 1;
            }
        }
    }
    count
}
