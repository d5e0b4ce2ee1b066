//! Eigendecomposition and spectral statistics.

mod eigen;
mod goe;
mod kde;
mod pdf;
mod unfold;

pub use eigen::{eigendecompose, eigendecompose_dense, eigenvalues, SpectralData};
pub use goe::sample_goe;
pub use kde::{
    kernel_density, kernel_smooth, kernel_smooth_at, level_density, silverman_bandwidth,
    LevelDensity, SmoothedCurve,
};
pub use pdf::{
    log_porter_thomas_cdf, log_porter_thomas_pdf, poisson_cdf, reference_pdf, std_normal_cdf,
    std_normal_pdf, wigner_dyson_cdf, wigner_dyson_pdf, ReferenceKind, S0,
};
pub use unfold::{
    freedman_diaconis_histogram, interquartile_range, lsi, lsi_of, lsi_profile, quantile_sorted,
    spacing_histogram, unfold, unfold_spectrum, unfolded_spacings, Histogram, LsiProfile,
    SpacingSample, DEFAULT_LSI_WINDOW, DEFAULT_TRUNCATE,
};
