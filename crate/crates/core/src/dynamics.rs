//! Eigenbasis time evolution, support densities and equilibration metrics.

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::eigvec::npc;
use crate::error::{Error, Result};
use crate::hilbert::{BasisElement, BasisState, SectorBasis};
use crate::observables::local_sigma_z;
use crate::operator::SectorOperator;
use crate::spectral::{kernel_density, silverman_bandwidth, SmoothedCurve, SpectralData};

pub const DEFAULT_END_TIME: f64 = 100.0;
pub const DEFAULT_STEPS: usize = 1000;

/// Norm tolerance on initial and propagated states.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Time points evolved per dense block.
const TIME_CHUNK: usize = 64;

/// Uniform grid `0, T/(steps-1), ..., T` (both ends included).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    end: f64,
    steps: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            end: DEFAULT_END_TIME,
            steps: DEFAULT_STEPS,
        }
    }
}

impl TimeGrid {
    pub fn new(end: f64, steps: usize) -> Result<Self> {
        if !(end > 0.0 && end.is_finite()) || steps < 2 {
            return Err(Error::Argument(format!(
                "time grid needs T > 0 and at least 2 steps, got T = {end}, steps = {steps}"
            )));
        }
        Ok(Self { end, steps })
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.end / (self.steps - 1) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let dt = self.dt();
        (0..self.steps)
            .map(|k| if k + 1 == self.steps { self.end } else { k as f64 * dt })
            .collect()
    }
}

/// `sz / N`, the value every `⟨σ_i^z⟩` relaxes to in a thermalizing sector.
pub fn microcanonical_value(n_spins: usize, sz: i32) -> f64 {
    sz as f64 / n_spins as f64
}

/// Unit vector of a computational state. A desymmetrized basis only accepts
/// palindromes, since any other state mixes both parities.
pub fn computational_state(basis: &SectorBasis, state: BasisState) -> Result<Vec<f64>> {
    let (idx, coef) = basis.position(state).ok_or_else(|| {
        Error::Argument(format!(
            "{state} is not in the N = {}, sz = {} sector",
            basis.n_spins(),
            basis.sz()
        ))
    })?;
    if coef != 1.0 {
        return Err(Error::Contract(format!(
            "{state} is not parity-pure; evolve it in the full sz block"
        )));
    }
    let mut v = vec![0.0; basis.dim()];
    v[idx] = 1.0;
    Ok(v)
}

fn check_state(psi0: &[f64], spectrum: &SpectralData) -> Result<()> {
    if psi0.len() != spectrum.dim() {
        return Err(Error::Argument(format!(
            "state has {} entries, sector has {}",
            psi0.len(),
            spectrum.dim()
        )));
    }
    let norm = psi0.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Contract(format!("initial state norm {norm} is not 1")));
    }
    Ok(())
}

/// Eigenbasis amplitudes `a = Vᵀ ψ`.
pub fn project(psi: &[f64], spectrum: &SpectralData) -> Vec<f64> {
    (0..spectrum.dim())
        .into_par_iter()
        .map(|a| spectrum.vector(a).iter().zip(psi).map(|(v, p)| v * p).sum())
        .collect()
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    /// `⟨A(t)⟩`, one series per observable.
    pub values: Vec<Vec<f64>>,
    /// `‖ψ(t)‖` at every time.
    pub norms: Vec<f64>,
    /// NPC of the eigenbasis projection of the initial state.
    pub npc: f64,
}

impl EvolutionResult {
    pub fn series(&self, k: usize) -> &[f64] {
        &self.values[k]
    }
}

/// `⟨ψ(t)|A|ψ(t)⟩` with `ψ(t) = V e^{-iEt} Vᵀ ψ₀` for every observable.
/// Propagated states are formed in blocks of time points by one dense
/// product each, so the cost is dominated by `O(D² · steps)`.
pub fn evolve_many(
    psi0: &[f64],
    observables: &[&SectorOperator],
    spectrum: &SpectralData,
    grid: &TimeGrid,
) -> Result<EvolutionResult> {
    check_state(psi0, spectrum)?;
    let d = spectrum.dim();
    if let Some(op) = observables.iter().find(|op| op.dim() != d) {
        return Err(Error::Argument(format!(
            "observable dimension {} does not match sector dimension {d}",
            op.dim()
        )));
    }
    let amplitudes = project(psi0, spectrum);
    let proj_npc = npc(&amplitudes)?;
    let eigs = spectrum.eigenvalues();
    let v = spectrum.vectors();
    let times = grid.times();
    let mut values = vec![Vec::with_capacity(times.len()); observables.len()];
    let mut norms = Vec::with_capacity(times.len());
    for chunk in times.chunks(TIME_CHUNK) {
        let m = chunk.len();
        // Columns 0..m hold Re φ(t), columns m..2m hold Im φ(t).
        let phases = Mat::<f64>::from_fn(d, 2 * m, |a, c| {
            let (t, im) = if c < m { (chunk[c], false) } else { (chunk[c - m], true) };
            let arg = eigs[a] * t;
            if im {
                -amplitudes[a] * arg.sin()
            } else {
                amplitudes[a] * arg.cos()
            }
        });
        let psi = v * &phases;
        for c in 0..m {
            let re = psi.col_as_slice(c);
            let im = psi.col_as_slice(c + m);
            let n2: f64 = re.iter().chain(im).map(|x| x * x).sum();
            norms.push(n2.sqrt());
            for (k, op) in observables.iter().enumerate() {
                values[k].push(op.quadratic_form(re) + op.quadratic_form(im));
            }
        }
    }
    if let Some(bad) = norms.iter().find(|n| (*n - 1.0).abs() > NORM_TOLERANCE) {
        return Err(Error::Contract(format!("propagated norm drifted to {bad}")));
    }
    Ok(EvolutionResult {
        times,
        values,
        norms,
        npc: proj_npc,
    })
}

pub fn evolve_expectation(
    psi0: &[f64],
    observable: &SectorOperator,
    spectrum: &SpectralData,
    grid: &TimeGrid,
) -> Result<EvolutionResult> {
    evolve_many(psi0, &[observable], spectrum, grid)
}

/// `⟨σ_i^z(t)⟩` for each requested site.
pub fn evolve_local_spins(
    psi0: &[f64],
    sites: &[usize],
    basis: &SectorBasis,
    spectrum: &SpectralData,
    grid: &TimeGrid,
) -> Result<EvolutionResult> {
    let ops = sites
        .iter()
        .map(|&i| local_sigma_z(i, basis))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&SectorOperator> = ops.iter().collect();
    evolve_many(psi0, &refs, spectrum, grid)
}

/// `e^{-iHt} ψ` for a complex sector vector.
pub fn propagate(psi: &[Complex64], spectrum: &SpectralData, t: f64) -> Vec<Complex64> {
    let d = spectrum.dim();
    let eigs = spectrum.eigenvalues();
    let phased: Vec<Complex64> = (0..d)
        .into_par_iter()
        .map(|a| {
            let amp: Complex64 = spectrum.vector(a).iter().zip(psi).map(|(v, p)| p * v).sum();
            amp * Complex64::from_polar(1.0, -eigs[a] * t)
        })
        .collect();
    let v = spectrum.vectors();
    (0..d)
        .into_par_iter()
        .map(|i| (0..d).map(|a| phased[a] * v[(i, a)]).sum())
        .collect()
}

/// Real part of `⟨ψ|A|ψ⟩` for a complex state and a real symmetric `A`.
pub fn complex_expectation(op: &SectorOperator, psi: &[Complex64]) -> f64 {
    let re: Vec<f64> = psi.iter().map(|z| z.re).collect();
    let im: Vec<f64> = psi.iter().map(|z| z.im).collect();
    op.quadratic_form(&re) + op.quadratic_form(&im)
}

/// Energy distribution of an initial state.
#[derive(Clone, Debug)]
pub struct SupportDensity {
    /// `Σ_α |a_α|² K_h(E - E_α)` on a uniform energy grid.
    pub curve: SmoothedCurve,
    /// `|a_α|²` per eigenvalue.
    pub weights: Vec<f64>,
    pub npc: f64,
    /// `Σ |a_α|² E_α`.
    pub mean_energy: f64,
}

/// Grid points for [`support_density`].
const SUPPORT_GRID: usize = 1024;

pub fn support_density(
    psi0: &[f64],
    spectrum: &SpectralData,
    bandwidth: Option<f64>,
) -> Result<SupportDensity> {
    check_state(psi0, spectrum)?;
    let eigs = spectrum.eigenvalues();
    let amplitudes = project(psi0, spectrum);
    let weights: Vec<f64> = amplitudes.iter().map(|a| a * a).collect();
    let h = match bandwidth {
        Some(h) if h > 0.0 => h,
        Some(h) => return Err(Error::Argument(format!("bandwidth {h} must be positive"))),
        None => silverman_bandwidth(eigs)?,
    };
    let lo = eigs[0] - 5.0 * h;
    let hi = eigs[eigs.len() - 1] + 5.0 * h;
    let abscissae: Vec<f64> = (0..SUPPORT_GRID)
        .map(|k| lo + (hi - lo) * k as f64 / (SUPPORT_GRID - 1) as f64)
        .collect();
    let ordinates = kernel_density(eigs, &weights, h, &abscissae);
    let mean_energy = weights.iter().zip(eigs).map(|(w, e)| w * e).sum();
    Ok(SupportDensity {
        curve: SmoothedCurve {
            abscissae,
            ordinates,
            bandwidth: h,
        },
        npc: npc(&amplitudes)?,
        weights,
        mean_energy,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HighestNpc {
    pub index: usize,
    pub element: BasisElement,
    pub npc: f64,
}

/// Basis element whose eigenbasis projection is most delocalized; ties go
/// to the lower index.
pub fn highest_npc_state(basis: &SectorBasis, spectrum: &SpectralData) -> Result<HighestNpc> {
    if basis.dim() != spectrum.dim() {
        return Err(Error::Argument("basis and spectrum differ in dimension".into()));
    }
    let rows = crate::eigvec::npc_profile(spectrum).rows;
    // relative slack so reflection-paired rows with equal NPC resolve to the lower index
    let mut best = 0;
    for (i, &x) in rows.iter().enumerate() {
        if x > rows[best] * (1.0 + 1e-9) {
            best = i;
        }
    }
    Ok(HighestNpc {
        index: best,
        element: basis.elements()[best],
        npc: rows[best],
    })
}

/// Time average and rms fluctuation of a series over `t ≥ t_min`.
pub fn long_time_average(times: &[f64], values: &[f64], t_min: f64) -> Result<(f64, f64)> {
    let tail: Vec<f64> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= t_min)
        .map(|(_, v)| *v)
        .collect();
    if tail.is_empty() {
        return Err(Error::InsufficientData(format!("no samples at t >= {t_min}")));
    }
    let n = tail.len() as f64;
    let mean = tail.iter().sum::<f64>() / n;
    let rms = (tail.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok((mean, rms))
}
