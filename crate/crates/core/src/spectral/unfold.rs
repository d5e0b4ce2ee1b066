//! Unfolding, spacing histograms and the level statistics indicator.

use crate::error::{Error, Result};

use super::kde::{kernel_smooth, level_density, SmoothedCurve};
use super::pdf::{poisson_cdf, wigner_dyson_cdf, S0};

/// Spacings dropped at each end of the spectrum by default.
pub const DEFAULT_TRUNCATE: usize = 10;

/// Default level count of a sliding LSI window.
pub const DEFAULT_LSI_WINDOW: usize = 400;

/// Unfolded nearest-neighbour spacings.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacingSample {
    pub spacings: Vec<f64>,
    /// Spacings removed from each end.
    pub truncated: usize,
}

impl SpacingSample {
    pub fn len(&self) -> usize {
        self.spacings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spacings.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.spacings.iter().sum::<f64>() / self.spacings.len() as f64
    }
}

/// `s'_i = (E_{i+1} - E_i)(Ω(E_i) + Ω(E_{i+1})) / 2` for every adjacent pair.
pub fn unfolded_spacings(eigs: &[f64], density: &[f64]) -> Result<Vec<f64>> {
    if eigs.len() != density.len() {
        return Err(Error::Argument(
            "density must be sampled at every eigenvalue".into(),
        ));
    }
    Ok(eigs
        .windows(2)
        .zip(density.windows(2))
        .map(|(e, d)| (e[1] - e[0]) * (d[0] + d[1]) / 2.0)
        .collect())
}

/// Unfolds an ascending spectrum with a level density sampled at every
/// eigenvalue and drops `truncate` spacings at each end.
pub fn unfold(eigs: &[f64], density: &SmoothedCurve, truncate: usize) -> Result<SpacingSample> {
    if eigs.len() < 2 * truncate + 50 {
        return Err(Error::InsufficientData(format!(
            "{} levels cannot be unfolded with truncation {truncate}",
            eigs.len()
        )));
    }
    let all = unfolded_spacings(eigs, &density.ordinates)?;
    let spacings = all[truncate..all.len() - truncate].to_vec();
    Ok(SpacingSample {
        spacings,
        truncated: truncate,
    })
}

/// Level density followed by [`unfold`].
pub fn unfold_spectrum(
    eigs: &[f64],
    bandwidth: Option<f64>,
    truncate: usize,
) -> Result<SpacingSample> {
    let density = level_density(eigs, bandwidth)?;
    unfold(eigs, &density.curve, truncate)
}

/// Equal-width histogram normalized to unit area.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub heights: Vec<f64>,
    /// The Freedman–Diaconis width was unusable and fixed bins were used.
    pub fallback: bool,
}

impl Histogram {
    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|e| (e[0] + e[1]) / 2.0).collect()
    }

    pub fn area(&self) -> f64 {
        self.edges
            .windows(2)
            .zip(&self.heights)
            .map(|(e, h)| (e[1] - e[0]) * h)
            .sum()
    }

    /// Largest deviation of a bar from the bin average of a reference law
    /// given by its CDF.
    pub fn sup_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        self.edges
            .windows(2)
            .zip(&self.heights)
            .map(|(e, h)| (h - (cdf(e[1]) - cdf(e[0])) / (e[1] - e[0])).abs())
            .fold(0.0, f64::max)
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn interquartile_range(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25)
}

/// Histogram with Freedman–Diaconis width `2 IQR n^(-1/3)` and bins
/// anchored at `origin`. Falls back to 30 equal bins when the IQR vanishes.
pub fn freedman_diaconis_histogram(values: &[f64], origin: f64) -> Histogram {
    let n = values.len();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let iqr = interquartile_range(values);
    let width = 2.0 * iqr * (n as f64).powf(-1.0 / 3.0);
    let span = (max - origin).max(f64::MIN_POSITIVE);
    let (width, bins, fallback) = if width > 0.0 && width.is_finite() {
        let bins = ((span / width).floor() as usize + 1).max(1);
        (width, bins, false)
    } else {
        (span / 30.0, 30, true)
    };
    let edges: Vec<f64> = (0..=bins).map(|k| origin + k as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = ((v - origin) / width).floor();
        if k >= 0.0 {
            counts[(k as usize).min(bins - 1)] += 1;
        }
    }
    let norm = 1.0 / (n as f64 * width);
    Histogram {
        edges,
        heights: counts.iter().map(|&c| c as f64 * norm).collect(),
        fallback,
    }
}

/// Spacing histogram over `[0, max]`.
pub fn spacing_histogram(sample: &SpacingSample) -> Result<Histogram> {
    if sample.len() < 100 {
        return Err(Error::InsufficientData(format!(
            "histogram needs at least 100 spacings, got {}",
            sample.len()
        )));
    }
    let h = freedman_diaconis_histogram(&sample.spacings, 0.0);
    if h.fallback {
        log::warn!("spacing IQR is zero; using 30 equal bins");
    }
    Ok(h)
}

/// `η` of a raw set of spacings, without size checks.
pub fn lsi_of(spacings: &[f64]) -> f64 {
    let below = spacings.iter().filter(|&&s| s <= S0).count() as f64;
    let fraction = below / spacings.len() as f64;
    let wd = wigner_dyson_cdf(S0);
    let poisson = poisson_cdf(S0);
    (fraction - wd) / (poisson - wd)
}

/// Level statistics indicator: 0 for Wigner–Dyson, 1 for Poisson spacings.
pub fn lsi(sample: &SpacingSample) -> Result<f64> {
    if sample.len() < 200 {
        return Err(Error::InsufficientData(format!(
            "LSI needs at least 200 spacings, got {}",
            sample.len()
        )));
    }
    Ok(lsi_of(&sample.spacings))
}

/// Energy-resolved LSI.
#[derive(Clone, Debug)]
pub struct LsiProfile {
    /// `η` per eigenvalue after Gaussian smoothing over energy.
    pub curve: SmoothedCurve,
    /// Unsmoothed per-window `η`.
    pub raw: Vec<f64>,
    /// False where the window had to be clamped at a spectrum edge.
    pub reliable: Vec<bool>,
    pub window_levels: usize,
}

/// Sliding-window LSI. Each window holds `window_levels` consecutive levels
/// centered on an eigenvalue; its spacings are unfolded with the global
/// level density and rescaled to unit mean inside the window before `η` is
/// taken. The per-level values are then smoothed over energy.
pub fn lsi_profile(
    eigs: &[f64],
    window_levels: usize,
    bandwidth: Option<f64>,
) -> Result<LsiProfile> {
    if window_levels < 100 {
        return Err(Error::Argument(format!(
            "LSI window of {window_levels} levels is below the minimum of 100"
        )));
    }
    if window_levels > eigs.len() {
        return Err(Error::Argument(format!(
            "LSI window of {window_levels} levels exceeds the spectrum ({})",
            eigs.len()
        )));
    }
    let density = level_density(eigs, bandwidth)?;
    let spacings = unfolded_spacings(eigs, &density.curve.ordinates)?;
    let n = eigs.len();
    let half = window_levels / 2;
    let mut raw = Vec::with_capacity(n);
    let mut reliable = Vec::with_capacity(n);
    let mut local = Vec::with_capacity(window_levels);
    for k in 0..n {
        let start = k.saturating_sub(half).min(n - window_levels);
        let end = start + window_levels - 1;
        reliable.push(k >= half && k + half < n);
        local.clear();
        local.extend_from_slice(&spacings[start..end]);
        let mean = local.iter().sum::<f64>() / local.len() as f64;
        local.iter_mut().for_each(|s| *s /= mean);
        raw.push(lsi_of(&local));
    }
    let curve = kernel_smooth(eigs, &raw, bandwidth)?;
    Ok(LsiProfile {
        curve,
        raw,
        reliable,
        window_levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::pdf::wigner_dyson_pdf;

    #[test]
    fn unit_density_gives_raw_spacings() {
        let s = unfolded_spacings(&[0.0, 1.0, 2.0, 3.0], &[1.0; 4]).unwrap();
        assert_eq!(s, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn endpoint_density_average() {
        let s = unfolded_spacings(&[0.0, 1.0, 3.0], &[1.0, 1.0, 0.5]).unwrap();
        assert_eq!(s, vec![1.0, 1.5]);
    }

    #[test]
    fn short_spectrum_is_rejected() {
        let eigs: Vec<f64> = (0..60).map(f64::from).collect();
        let curve = SmoothedCurve {
            abscissae: eigs.clone(),
            ordinates: vec![1.0; 60],
            bandwidth: 1.0,
        };
        assert!(unfold(&eigs, &curve, 10).is_err());
        assert_eq!(unfold(&eigs, &curve, 5).unwrap().len(), 49);
    }

    #[test]
    fn freedman_diaconis_width() {
        // 1000 points with IQR exactly 0.5
        let values: Vec<f64> = (0..1000).map(|i| i as f64 / 999.0 * (2.0 / 3.0) * 1.0).collect();
        let iqr = interquartile_range(&values);
        let values: Vec<f64> = values.iter().map(|v| v * 0.5 / iqr).collect();
        let sample = SpacingSample {
            spacings: values,
            truncated: 0,
        };
        let h = spacing_histogram(&sample).unwrap();
        assert!((h.bin_width() - 0.1).abs() < 1e-12);
        assert!((h.area() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_iqr_falls_back() {
        let mut values = vec![1.0; 150];
        values.push(2.0);
        let h = spacing_histogram(&SpacingSample {
            spacings: values,
            truncated: 0,
        })
        .unwrap();
        assert!(h.fallback);
        assert_eq!(h.heights.len(), 30);
        assert!((h.area() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lsi_endpoints_from_quantile_samples() {
        // deterministic quantile samples of each law
        let m = 20_000;
        let poisson: Vec<f64> = (0..m)
            .map(|k| -(1.0 - (k as f64 + 0.5) / m as f64).ln())
            .collect();
        let wd: Vec<f64> = (0..m)
            .map(|k| {
                let u = (k as f64 + 0.5) / m as f64;
                (-4.0 / std::f64::consts::PI * (1.0 - u).ln()).sqrt()
            })
            .collect();
        assert!((lsi_of(&poisson) - 1.0).abs() < 1e-3);
        assert!(lsi_of(&wd).abs() < 1e-3);
        // sanity: the quantile sample follows the density
        assert!(wigner_dyson_pdf(1.0) > 0.0);
    }

    #[test]
    fn lsi_needs_enough_spacings() {
        let s = SpacingSample {
            spacings: vec![1.0; 150],
            truncated: 0,
        };
        assert!(lsi(&s).is_err());
    }

    #[test]
    fn profile_window_bounds() {
        let eigs: Vec<f64> = (0..300).map(|i| i as f64 * 0.01).collect();
        assert!(lsi_profile(&eigs, 50, None).is_err());
        assert!(lsi_profile(&eigs, 301, None).is_err());
        let p = lsi_profile(&eigs, 100, None).unwrap();
        assert_eq!(p.raw.len(), 300);
        assert!(!p.reliable[0] && p.reliable[150] && !p.reliable[299]);
    }
}
