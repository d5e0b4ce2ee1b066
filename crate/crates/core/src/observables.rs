//! Eigenstate expectation values of local observables, their fluctuations
//! about the smooth energy trend, and concentration-of-measure scans.

use rayon::prelude::*;

use crate::eigvec::{central_window, DEFAULT_EDGE_FRACTION};
use crate::error::{Error, Result};
use crate::hamiltonian::{
    assemble_with, pair_sum_operator, Anisotropy, AssemblyOptions, ChainVariant, CouplingMatrix,
    SpinGeometry,
};
use crate::hilbert::{sector_with_parity, Parity};
use crate::operator::{in_sector, SectorOperator};
use crate::spectral::{
    eigendecompose, kernel_density, kernel_smooth, silverman_bandwidth, SpectralData,
};

/// Minimum number of eigenstates for [`detrend_and_rescale`].
pub const MIN_SERIES_LEN: usize = 200;

/// Default half-width of the `E/N` window used by [`concentration_scan`].
pub const DEFAULT_SCAN_WINDOW: f64 = 0.1;

/// Minimum eigenstates inside the scan window.
pub const MIN_WINDOW_STATES: usize = 50;

/// `σ_i^z` on `basis` (1-based site).
pub fn local_sigma_z(site: usize, basis: &crate::hilbert::SectorBasis) -> Result<SectorOperator> {
    let n = basis.n_spins();
    if site == 0 || site > n {
        return Err(Error::Argument(format!("site {site} outside 1..={n}")));
    }
    in_sector(basis, |b| {
        let states: Vec<_> = b.states().collect();
        Ok(SectorOperator::from_diagonal(b.clone(), |r| states[r].spin_z(site)))
    })
}

/// `H_ij = c_ij h_ij` on `basis`.
pub fn pair_energy_op(
    i: usize,
    j: usize,
    couplings: &CouplingMatrix,
    basis: &crate::hilbert::SectorBasis,
) -> Result<SectorOperator> {
    pair_energy_op_with(i, j, couplings, basis, Anisotropy::SECULAR)
}

pub fn pair_energy_op_with(
    i: usize,
    j: usize,
    couplings: &CouplingMatrix,
    basis: &crate::hilbert::SectorBasis,
    anisotropy: Anisotropy,
) -> Result<SectorOperator> {
    let n = basis.n_spins();
    if couplings.n_spins() != n {
        return Err(Error::Argument("coupling matrix and basis differ in N".into()));
    }
    if i >= j || i == 0 || j > n {
        return Err(Error::Argument(format!(
            "pair ({i}, {j}) must satisfy 1 <= i < j <= {n}"
        )));
    }
    let c = couplings.get(i, j);
    in_sector(basis, |b| Ok(pair_sum_operator(b, &[(i, j, c)], anisotropy)))
}

/// `H(m) = Σ_{i<j≤m} c_ij h_ij`.
pub fn subsystem_hamiltonian(
    m: usize,
    couplings: &CouplingMatrix,
    basis: &crate::hilbert::SectorBasis,
) -> Result<SectorOperator> {
    let n = basis.n_spins();
    if m == 0 || m > n {
        return Err(Error::Argument(format!("subsystem size {m} outside 1..={n}")));
    }
    if couplings.n_spins() != n {
        return Err(Error::Argument("coupling matrix and basis differ in N".into()));
    }
    let pairs: Vec<_> = couplings.pairs().into_iter().filter(|p| p.1 <= m).collect();
    in_sector(basis, |b| Ok(pair_sum_operator(b, &pairs, Anisotropy::SECULAR)))
}

/// Detrended and rescaled fluctuations of an [`ObservableSeries`].
#[derive(Clone, Debug, PartialEq)]
pub struct Fluctuations {
    /// Smoothed trend `g(E)`.
    pub trend: Vec<f64>,
    pub residual: Vec<f64>,
    /// Smoothed residual variance `w(E)`.
    pub variance: Vec<f64>,
    /// `residual / sqrt(w)`; NaN where `w` vanishes outside the sampled region.
    pub rescaled: Vec<f64>,
    /// False in the excluded edge region.
    pub sampled: Vec<bool>,
    pub bandwidth: f64,
}

/// `⟨A⟩_α` paired with `E_α`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSeries {
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
    pub fluctuations: Option<Fluctuations>,
}

impl ObservableSeries {
    pub fn new(energies: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if energies.len() != values.len() {
            return Err(Error::Argument("energies and values differ in length".into()));
        }
        Ok(Self {
            energies,
            values,
            fluctuations: None,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Rescaled fluctuations inside the sampled region.
    pub fn sampled_rescaled(&self) -> Vec<f64> {
        match &self.fluctuations {
            None => Vec::new(),
            Some(f) => f
                .rescaled
                .iter()
                .zip(&f.sampled)
                .filter(|(_, &s)| s)
                .map(|(&r, _)| r)
                .collect(),
        }
    }
}

/// `⟨E_α|A|E_α⟩` for every eigenvector.
pub fn eigen_expectations(op: &SectorOperator, spectrum: &SpectralData) -> Result<ObservableSeries> {
    if op.dim() != spectrum.dim() {
        return Err(Error::Argument(format!(
            "operator dimension {} does not match spectrum dimension {}",
            op.dim(),
            spectrum.dim()
        )));
    }
    let values = (0..spectrum.dim())
        .into_par_iter()
        .map(|a| op.quadratic_form(spectrum.vector(a)))
        .collect();
    ObservableSeries::new(spectrum.eigenvalues().to_vec(), values)
}

/// Subtracts the kernel-smoothed trend and divides by the smoothed local
/// standard deviation. The outer `edge_fraction` of the energy range on each
/// side is flagged as unsampled.
pub fn detrend_and_rescale(
    series: &ObservableSeries,
    bandwidth: Option<f64>,
    edge_fraction: f64,
) -> Result<ObservableSeries> {
    let n = series.len();
    if n < MIN_SERIES_LEN {
        return Err(Error::InsufficientData(format!(
            "detrending needs at least {MIN_SERIES_LEN} values, got {n}"
        )));
    }
    let e = &series.energies;
    let h = match bandwidth {
        Some(h) => h,
        None => silverman_bandwidth(e)?,
    };
    let trend = kernel_smooth(e, &series.values, Some(h))?.ordinates;
    let residual: Vec<f64> = series.values.iter().zip(&trend).map(|(v, g)| v - g).collect();
    let squares: Vec<f64> = residual.iter().map(|r| r * r).collect();
    let variance = kernel_smooth(e, &squares, Some(h))?.ordinates;
    let (lo, hi) = central_window(e, edge_fraction);
    let sampled: Vec<bool> = e.iter().map(|&x| x >= lo && x <= hi).collect();
    let mut rescaled = Vec::with_capacity(n);
    for k in 0..n {
        let w = variance[k];
        if w > 0.0 {
            rescaled.push(residual[k] / w.sqrt());
        } else if sampled[k] {
            return Err(Error::SmoothingFailure(format!(
                "local variance vanishes at E = {}",
                e[k]
            )));
        } else {
            rescaled.push(f64::NAN);
        }
    }
    Ok(ObservableSeries {
        energies: e.clone(),
        values: series.values.clone(),
        fluctuations: Some(Fluctuations {
            trend,
            residual,
            variance,
            rescaled,
            sampled,
            bandwidth: h,
        }),
    })
}

/// Detrending with Silverman's bandwidth and the default edge cut.
pub fn detrend_default(series: &ObservableSeries) -> Result<ObservableSeries> {
    detrend_and_rescale(series, None, DEFAULT_EDGE_FRACTION)
}

/// Ordinary least-squares line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
}

impl LinearFit {
    pub fn at(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return Err(Error::InsufficientData(
            "a line needs at least two paired points".into(),
        ));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateSupport);
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope_stderr = if n > 2 {
        (sse / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr,
        r_squared,
    })
}

/// Observable anchored to fixed sites, valid at every scanned size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ObservableSpec {
    SigmaZ(usize),
    PairEnergy(usize, usize),
}

impl ObservableSpec {
    pub fn build(
        &self,
        couplings: &CouplingMatrix,
        basis: &crate::hilbert::SectorBasis,
        anisotropy: Anisotropy,
    ) -> Result<SectorOperator> {
        match *self {
            ObservableSpec::SigmaZ(i) => local_sigma_z(i, basis),
            ObservableSpec::PairEnergy(i, j) => {
                pair_energy_op_with(i, j, couplings, basis, anisotropy)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScanSpec {
    pub variant: ChainVariant,
    pub exponent: f64,
    pub observable: ObservableSpec,
    /// Window center in units of `E/N`.
    pub e_star: f64,
    /// Window half-width in units of `E/N`.
    pub window: f64,
    pub parity: Parity,
    pub anisotropy: Anisotropy,
    /// Kernel width for `Ω(E*)`; Silverman's rule per size if unset.
    pub bandwidth: Option<f64>,
}

impl ScanSpec {
    pub fn chain(variant: ChainVariant, observable: ObservableSpec) -> Self {
        Self {
            variant,
            exponent: 3.0,
            observable,
            e_star: 0.0,
            window: DEFAULT_SCAN_WINDOW,
            parity: Parity::Symmetric,
            anisotropy: Anisotropy::SECULAR,
            bandwidth: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRecord {
    pub n_spins: usize,
    pub dim: usize,
    /// Eigenstates inside the window.
    pub window_states: usize,
    pub ln_variance: f64,
    pub ln_inv_density: f64,
    /// Window center in absolute energy, `E* · N`.
    pub e_star: f64,
}

#[derive(Clone, Debug)]
pub struct ConcentrationScan {
    pub records: Vec<ScanRecord>,
    pub variance_fit: LinearFit,
    pub density_fit: LinearFit,
}

impl ConcentrationScan {
    /// `|a - b| / |b|` between the variance and inverse-density slopes.
    pub fn slope_mismatch(&self) -> f64 {
        (self.variance_fit.slope - self.density_fit.slope).abs() / self.density_fit.slope.abs()
    }
}

/// Single-size measurement shared by [`concentration_scan`]: the variance
/// of `⟨A⟩_α` about a straight-line trend over the window, and the level
/// density at the window center.
pub fn scan_size(n_spins: usize, spec: &ScanSpec) -> Result<ScanRecord> {
    let geometry = match spec.variant {
        ChainVariant::LongRange => SpinGeometry::chain(n_spins),
        ChainVariant::NearestNeighbor => SpinGeometry::chain_nn(n_spins),
    }
    .with_exponent(spec.exponent)?;
    let couplings = geometry.couplings()?;
    let basis = sector_with_parity(n_spins, crate::hilbert::default_sz(n_spins), spec.parity)?;
    let options = AssemblyOptions {
        anisotropy: spec.anisotropy,
        ..AssemblyOptions::default()
    };
    let h = assemble_with(&couplings, &basis, &options)?;
    let spectrum = eigendecompose(&h)?;
    let op = spec.observable.build(&couplings, &basis, spec.anisotropy)?;
    let series = eigen_expectations(&op, &spectrum)?;
    let nf = n_spins as f64;
    let center = spec.e_star * nf;
    let (xs, ys): (Vec<f64>, Vec<f64>) = series
        .energies
        .iter()
        .zip(&series.values)
        .filter(|(e, _)| (*e / nf - spec.e_star).abs() <= spec.window)
        .map(|(e, v)| (*e, *v))
        .unzip();
    if xs.len() < MIN_WINDOW_STATES {
        return Err(Error::InsufficientData(format!(
            "N = {n_spins}: {} eigenstates in the window, need {MIN_WINDOW_STATES}",
            xs.len()
        )));
    }
    let fit = linear_fit(&xs, &ys)?;
    let variance = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - fit.at(*x)).powi(2))
        .sum::<f64>()
        / (xs.len() as f64 - 2.0);
    let eigs = spectrum.eigenvalues();
    let bw = match spec.bandwidth {
        Some(b) => b,
        None => silverman_bandwidth(eigs)?,
    };
    let ones = vec![1.0; eigs.len()];
    let density = kernel_density(eigs, &ones, bw, &[center])[0];
    if !(density > 0.0) {
        return Err(Error::SmoothingFailure(format!(
            "N = {n_spins}: level density vanishes at E = {center}"
        )));
    }
    log::info!(
        "N = {n_spins}: {} states in window, variance {variance:e}, density {density:e}",
        xs.len()
    );
    Ok(ScanRecord {
        n_spins,
        dim: basis.dim(),
        window_states: xs.len(),
        ln_variance: variance.ln(),
        ln_inv_density: -density.ln(),
        e_star: center,
    })
}

/// Variance of `⟨A⟩_α` near `E*` and `1/Ω(E*)` across system sizes, with
/// least-squares slopes of both logarithms against `N`.
pub fn concentration_scan(sizes: &[usize], spec: &ScanSpec) -> Result<ConcentrationScan> {
    if sizes.len() < 3 {
        return Err(Error::InsufficientData("a scan needs at least three sizes".into()));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument("sizes must be strictly increasing".into()));
    }
    if sizes.iter().any(|n| n % 2 != sizes[0] % 2) {
        return Err(Error::Argument("sizes must share the same parity".into()));
    }
    let records = sizes
        .par_iter()
        .map(|&n| scan_size(n, spec))
        .collect::<Result<Vec<_>>>()?;
    let ns: Vec<f64> = records.iter().map(|r| r.n_spins as f64).collect();
    let lv: Vec<f64> = records.iter().map(|r| r.ln_variance).collect();
    let ld: Vec<f64> = records.iter().map(|r| r.ln_inv_density).collect();
    Ok(ConcentrationScan {
        variance_fit: linear_fit(&ns, &lv)?,
        density_fit: linear_fit(&ns, &ld)?,
        records,
    })
}
