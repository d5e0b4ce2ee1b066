//! Eigenvector delocalization: number of principal components (NPC) and
//! unfolded component statistics.

use faer::Mat;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{silverman_bandwidth, SpectralData};

/// Norm tolerance accepted by [`npc`].
pub const NORM_TOLERANCE: f64 = 1e-8;

/// Fraction of the energy range excluded at each end when sampling.
pub const DEFAULT_EDGE_FRACTION: f64 = 0.1;

/// `ξ = 1 / Σ_n |v_n|⁴` of a unit vector.
pub fn npc(v: &[f64]) -> Result<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Contract(format!("vector norm {norm} is not 1")));
    }
    Ok(inverse_quartic(v.iter().copied()))
}

fn inverse_quartic(v: impl Iterator<Item = f64>) -> f64 {
    1.0 / v.map(|x| (x * x) * (x * x)).sum::<f64>()
}

/// GOE mean NPC, `(D + 2) / 3`.
pub fn goe_npc_reference(dim: usize) -> f64 {
    (dim as f64 + 2.0) / 3.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct NpcProfile {
    /// NPC of each eigenvector, in ascending energy order.
    pub columns: Vec<f64>,
    /// NPC of each basis state over the eigenbasis.
    pub rows: Vec<f64>,
    pub reference: f64,
}

/// Column- and row-wise NPC of the modal matrix.
pub fn npc_profile(spectrum: &SpectralData) -> NpcProfile {
    let v = spectrum.vectors();
    let d = spectrum.dim();
    let columns = (0..d)
        .into_par_iter()
        .map(|a| inverse_quartic(spectrum.vector(a).iter().copied()))
        .collect();
    let mut row_sums = vec![0.0; d];
    for a in 0..d {
        for (i, s) in row_sums.iter_mut().enumerate() {
            let x = v[(i, a)];
            *s += (x * x) * (x * x);
        }
    }
    NpcProfile {
        columns,
        rows: row_sums.iter().map(|s| 1.0 / s).collect(),
        reference: goe_npc_reference(d),
    }
}

/// Eigenvector columns and basis rows picked for component sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentSelection {
    /// Ascending column (energy) indices.
    pub columns: Vec<usize>,
    /// Ascending row indices.
    pub rows: Vec<usize>,
    pub row_min: f64,
}

impl ComponentSelection {
    /// Smallest and largest NPC among the selected columns.
    pub fn column_npc_range(&self, profile: &NpcProfile) -> (f64, f64) {
        self.columns.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
            (lo.min(profile.columns[c]), hi.max(profile.columns[c]))
        })
    }
}

/// The `n_vectors` columns whose NPC is closest to `(D + 2)/3` (ties go to
/// the lower energy) and every row with NPC above `row_min`.
pub fn select_components(
    profile: &NpcProfile,
    n_vectors: usize,
    row_min: f64,
) -> Result<ComponentSelection> {
    let d = profile.columns.len();
    if d <= n_vectors {
        return Err(Error::Argument(format!(
            "cannot select {n_vectors} of {d} eigenvectors"
        )));
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        let da = (profile.columns[a] - profile.reference).abs();
        let db = (profile.columns[b] - profile.reference).abs();
        da.total_cmp(&db).then(a.cmp(&b))
    });
    let mut columns: Vec<usize> = order.into_iter().take(n_vectors).collect();
    columns.sort_unstable();
    let rows: Vec<usize> = (0..profile.rows.len())
        .filter(|&i| profile.rows[i] > row_min)
        .collect();
    if rows.is_empty() {
        return Err(Error::SelectionEmpty(format!(
            "no basis state has NPC above {row_min}"
        )));
    }
    Ok(ComponentSelection {
        columns,
        rows,
        row_min,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct ComponentOptions {
    /// Kernel width in energy units; Silverman's rule on the spectrum if unset.
    pub bandwidth: Option<f64>,
    pub edge_fraction: f64,
}

impl Default for ComponentOptions {
    fn default() -> Self {
        Self {
            bandwidth: None,
            edge_fraction: DEFAULT_EDGE_FRACTION,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComponentRecord {
    pub row: usize,
    pub column: usize,
    pub energy: f64,
    pub component: f64,
    /// `c / sqrt(f_row(E))`
    pub rescaled: f64,
}

/// Rescaled eigenvector components with their provenance.
#[derive(Clone, Debug)]
pub struct ComponentSample {
    pub records: Vec<ComponentRecord>,
    pub rows: Vec<usize>,
    /// Selected columns that survived the edge cut.
    pub columns: Vec<usize>,
    /// Selected columns dropped because they sit in the edge region.
    pub excluded_columns: Vec<usize>,
    pub bandwidth: f64,
}

impl ComponentSample {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn rescaled(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.rescaled).collect()
    }

    pub fn mean_and_variance(&self) -> (f64, f64) {
        let n = self.len() as f64;
        let mean = self.records.iter().map(|r| r.rescaled).sum::<f64>() / n;
        let var = self
            .records
            .iter()
            .map(|r| (r.rescaled - mean).powi(2))
            .sum::<f64>()
            / n;
        (mean, var)
    }
}

/// Energy bounds of the central region kept for sampling.
pub fn central_window(eigs: &[f64], edge_fraction: f64) -> (f64, f64) {
    let lo = eigs[0];
    let hi = eigs[eigs.len() - 1];
    let cut = edge_fraction * (hi - lo);
    (lo + cut, hi - cut)
}

/// For every selected row `i`, smooths `|c_i^α|²` against `E_α` with a
/// Gaussian kernel to get the local variance `f_i(E)`, then emits
/// `c / sqrt(f_i(E))` for every selected column.
pub fn unfold_components(
    spectrum: &SpectralData,
    selection: &ComponentSelection,
    options: &ComponentOptions,
) -> Result<ComponentSample> {
    if selection.columns.is_empty() || selection.rows.is_empty() {
        return Err(Error::SelectionEmpty("no components selected".into()));
    }
    let eigs = spectrum.eigenvalues();
    let h = match options.bandwidth {
        Some(h) if h > 0.0 => h,
        Some(h) => return Err(Error::Argument(format!("bandwidth {h} must be positive"))),
        None => silverman_bandwidth(eigs)?,
    };
    let (lo, hi) = central_window(eigs, options.edge_fraction);
    let (columns, excluded_columns): (Vec<usize>, Vec<usize>) = selection
        .columns
        .iter()
        .partition(|&&a| eigs[a] >= lo && eigs[a] <= hi);
    if columns.is_empty() {
        return Err(Error::SelectionEmpty(
            "every selected eigenvector lies in the excluded edge region".into(),
        ));
    }
    let d = spectrum.dim();
    let v = spectrum.vectors();
    // Normalized kernel weights W[k, β] for each kept column k.
    let mut weights = Mat::<f64>::zeros(columns.len(), d);
    for (k, &a) in columns.iter().enumerate() {
        let mut total = 0.0;
        for b in 0..d {
            let u = (eigs[a] - eigs[b]) / h;
            let w = (-0.5 * u * u).exp();
            weights[(k, b)] = w;
            total += w;
        }
        for b in 0..d {
            weights[(k, b)] /= total;
        }
    }
    let squares = Mat::<f64>::from_fn(d, selection.rows.len(), |b, r| {
        let x = v[(selection.rows[r], b)];
        x * x
    });
    let local_variance = &weights * &squares;
    let mut records = Vec::with_capacity(columns.len() * selection.rows.len());
    for (r, &i) in selection.rows.iter().enumerate() {
        for (k, &a) in columns.iter().enumerate() {
            let f = local_variance[(k, r)];
            if !(f > 0.0) {
                return Err(Error::SmoothingFailure(format!(
                    "non-positive component variance at row {i}, E = {}; widen the bandwidth",
                    eigs[a]
                )));
            }
            let c = v[(i, a)];
            records.push(ComponentRecord {
                row: i,
                column: a,
                energy: eigs[a],
                component: c,
                rescaled: c / f.sqrt(),
            });
        }
    }
    log::info!(
        "sampled {} components ({} rows x {} columns)",
        records.len(),
        selection.rows.len(),
        columns.len()
    );
    Ok(ComponentSample {
        records,
        rows: selection.rows.clone(),
        columns,
        excluded_columns,
        bandwidth: h,
    })
}

/// Kolmogorov distance between the empirical CDF of `values` and `cdf`.
pub fn ks_distance(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = cdf(x);
            (f - k as f64 / n).abs().max(((k + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
