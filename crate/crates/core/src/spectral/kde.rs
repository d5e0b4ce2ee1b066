//! Gaussian kernel smoothing and level densities.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Kernel weights beyond this many bandwidths underflow to zero.
const KERNEL_CUTOFF: f64 = 38.0;

/// Sampled abscissae with smoothed ordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothedCurve {
    pub abscissae: Vec<f64>,
    pub ordinates: Vec<f64>,
    pub bandwidth: f64,
}

impl SmoothedCurve {
    pub fn len(&self) -> usize {
        self.abscissae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissae.is_empty()
    }

    /// Trapezoid integral over the sampled abscissae (assumed sorted).
    pub fn trapezoid(&self) -> f64 {
        self.abscissae
            .windows(2)
            .zip(self.ordinates.windows(2))
            .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) / 2.0)
            .sum()
    }

    /// Linear interpolation on sorted abscissae, clamped at the ends.
    pub fn interpolate(&self, x: f64) -> f64 {
        let xs = &self.abscissae;
        let ys = &self.ordinates;
        if x <= xs[0] {
            return ys[0];
        }
        if x >= xs[xs.len() - 1] {
            return ys[ys.len() - 1];
        }
        let k = xs.partition_point(|&a| a <= x);
        let (x0, x1) = (xs[k - 1], xs[k]);
        if x1 == x0 {
            return ys[k];
        }
        let t = (x - x0) / (x1 - x0);
        ys[k - 1] + t * (ys[k] - ys[k - 1])
    }
}

fn mean_and_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Silverman's rule `1.06 σ n^(-1/5)`.
pub fn silverman_bandwidth(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::InsufficientData("bandwidth needs at least two points".into()));
    }
    let (_, sd) = mean_and_std(xs);
    if !(sd > 0.0) {
        return Err(Error::DegenerateSupport);
    }
    Ok(1.06 * sd * (xs.len() as f64).powf(-0.2))
}

fn resolve_bandwidth(xs: &[f64], bandwidth: Option<f64>) -> Result<f64> {
    match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => Ok(h),
        Some(h) => Err(Error::Argument(format!("bandwidth {h} must be positive"))),
        None => silverman_bandwidth(xs),
    }
}

/// Sorted copy of `(x, y)` pairs for windowed kernel sums.
struct SortedSamples {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl SortedSamples {
    fn new(xs: &[f64], ys: &[f64]) -> Self {
        let mut idx: Vec<usize> = (0..xs.len()).collect();
        idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        Self {
            xs: idx.iter().map(|&i| xs[i]).collect(),
            ys: idx.iter().map(|&i| ys[i]).collect(),
        }
    }

    /// `(Σ K y, Σ K)` at `x` with `K = exp(-u²/2)`.
    fn sums(&self, x: f64, h: f64) -> (f64, f64) {
        let lo = self.xs.partition_point(|&a| a < x - KERNEL_CUTOFF * h);
        let hi = self.xs.partition_point(|&a| a <= x + KERNEL_CUTOFF * h);
        let mut num = 0.0;
        let mut den = 0.0;
        for k in lo..hi {
            let u = (x - self.xs[k]) / h;
            let w = (-0.5 * u * u).exp();
            num += w * self.ys[k];
            den += w;
        }
        (num, den)
    }
}

/// Nadaraya–Watson estimate `Σ K((x-x_i)/h) y_i / Σ K((x-x_i)/h)` with a
/// Gaussian kernel, evaluated at every `xs`.
pub fn kernel_smooth(xs: &[f64], ys: &[f64], bandwidth: Option<f64>) -> Result<SmoothedCurve> {
    let ordinates = kernel_smooth_at(xs, ys, bandwidth, xs)?;
    let h = resolve_bandwidth(xs, bandwidth)?;
    Ok(SmoothedCurve {
        abscissae: xs.to_vec(),
        ordinates,
        bandwidth: h,
    })
}

/// Nadaraya–Watson estimate evaluated at arbitrary points.
pub fn kernel_smooth_at(
    xs: &[f64],
    ys: &[f64],
    bandwidth: Option<f64>,
    at: &[f64],
) -> Result<Vec<f64>> {
    if xs.len() != ys.len() {
        return Err(Error::Argument("xs and ys differ in length".into()));
    }
    if xs.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "kernel smoothing needs at least 10 points, got {}",
            xs.len()
        )));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Argument("abscissae must be finite".into()));
    }
    if xs.iter().all(|&x| x == xs[0]) {
        return Err(Error::DegenerateSupport);
    }
    let h = resolve_bandwidth(xs, bandwidth)?;
    let samples = SortedSamples::new(xs, ys);
    at.par_iter()
        .map(|&x| {
            let (num, den) = samples.sums(x, h);
            if den > 0.0 {
                Ok(num / den)
            } else {
                Err(Error::SmoothingFailure(format!(
                    "no kernel support at {x} with bandwidth {h}"
                )))
            }
        })
        .collect()
}

/// Weighted Gaussian kernel density `Σ w_i φ((x - x_i)/h) / h`.
pub fn kernel_density(xs: &[f64], weights: &[f64], h: f64, at: &[f64]) -> Vec<f64> {
    assert_eq!(xs.len(), weights.len());
    let norm = 1.0 / (h * (2.0 * std::f64::consts::PI).sqrt());
    let samples = SortedSamples::new(xs, weights);
    at.par_iter()
        .map(|&x| samples.sums(x, h).0 * norm)
        .collect()
}

/// Smoothed level density and the σ-normalized spectrum.
#[derive(Clone, Debug)]
pub struct LevelDensity {
    /// `Ω(E)` at every eigenvalue, normalized to the number of levels.
    pub curve: SmoothedCurve,
    /// `E / E_σ`.
    pub normalized: Vec<f64>,
    /// Standard deviation of the spectrum.
    pub e_sigma: f64,
}

/// Gaussian KDE of the spectrum evaluated at each eigenvalue, scaled so that
/// `∫ Ω(E) dE` equals the number of levels.
pub fn level_density(eigs: &[f64], bandwidth: Option<f64>) -> Result<LevelDensity> {
    if eigs.len() < 50 {
        return Err(Error::InsufficientData(format!(
            "level density needs at least 50 eigenvalues, got {}",
            eigs.len()
        )));
    }
    if eigs.iter().all(|&x| x == eigs[0]) {
        return Err(Error::DegenerateSupport);
    }
    let h = resolve_bandwidth(eigs, bandwidth)?;
    let ones = vec![1.0; eigs.len()];
    let ordinates = kernel_density(eigs, &ones, h, eigs);
    let n = eigs.len() as f64;
    let mean = eigs.iter().sum::<f64>() / n;
    let e_sigma = (eigs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n).sqrt();
    Ok(LevelDensity {
        curve: SmoothedCurve {
            abscissae: eigs.to_vec(),
            ordinates,
            bandwidth: h,
        },
        normalized: eigs.iter().map(|e| e / e_sigma).collect(),
        e_sigma,
    })
}
