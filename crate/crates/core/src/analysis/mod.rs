//! DoF formulas, autocorrelation eigenanalysis, truncated cardinal-series
//! reconstruction and Monte-Carlo reconstruction error.

mod dof;
mod eigen;
mod mse;
mod reconstruct;

pub use dof::{count_wavenumber_modes, dof, dof_loss_rect_vs_disk, DofReport};
pub use eigen::{
    build_autocorr_matrix, build_autocorr_matrix_from_positions, eigen_spectrum, power_capture_count, AutocorrMatrix,
    EigenSpectrum, PSD_CLAMP,
};
pub use mse::{
    eval_grid, mse_experiment, mse_sweep, write_sweep_csv, EvalGrid, MseOptions, MseReport, Scheme, SweepRow,
};
pub use reconstruct::{check_pairing, interpolation_matrix, reconstruct, samples_on_lattice};
