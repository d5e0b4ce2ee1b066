//! Analysis pipelines.

use serde_json::{json, Value};
use spinchaos_core::dynamics::{
    computational_state, evolve_local_spins, highest_npc_state, long_time_average,
    microcanonical_value, support_density, TimeGrid,
};
use spinchaos_core::eigvec::{
    ks_distance, npc_profile, select_components, unfold_components, ComponentOptions, NpcProfile,
};
use spinchaos_core::hamiltonian::{
    assemble_with, Anisotropy, AssemblyOptions, ChainVariant, CouplingMatrix, SpinGeometry,
};
use spinchaos_core::hilbert::sector_with_parity;
use spinchaos_core::observables::{
    concentration_scan, detrend_and_rescale, eigen_expectations, linear_fit, local_sigma_z,
    pair_energy_op_with, ObservableSeries, ObservableSpec, ScanSpec,
};
use spinchaos_core::spectral::{
    eigendecompose, eigendecompose_dense, eigenvalues, level_density, log_porter_thomas_cdf, lsi,
    lsi_profile, sample_goe, spacing_histogram, std_normal_cdf, unfold, wigner_dyson_cdf,
    SpectralData, S0,
};
use spinchaos_core::{BasisState, SectorBasis, SectorOperator};

use crate::config::{Analysis, InitialState, ModelName, RunConfig};
use crate::error::{CliError, Within};
use crate::output::{num, num17, OutputDir};

/// Dense copies held at once by a full eigendecomposition.
const DENSE_COPIES: f64 = 3.0;

/// Largest dense dimension that fits the memory cap.
pub fn max_dense_dim(cap_gib: f64) -> usize {
    let bytes = cap_gib * 1024f64.powi(3);
    (bytes / (8.0 * DENSE_COPIES)).sqrt().floor() as usize
}

fn check_memory(dim: usize, cfg: &RunConfig) -> Result<(), CliError> {
    let cap = max_dense_dim(cfg.max_memory_gib);
    if dim > cap {
        let need = DENSE_COPIES * 8.0 * (dim as f64).powi(2) / 1024f64.powi(3);
        return Err(CliError::Memory(format!(
            "dimension {dim} needs about {need:.1} GiB for dense diagonalization, above the \
             {} GiB cap; raise max_memory_gib or pick a smaller sector",
            cfg.max_memory_gib
        )));
    }
    Ok(())
}

pub fn geometry(cfg: &RunConfig, n_spins: usize) -> Result<SpinGeometry, CliError> {
    let mut g = match cfg.model {
        ModelName::Chain => SpinGeometry::chain(n_spins),
        ModelName::ChainNn => SpinGeometry::chain_nn(n_spins),
        ModelName::Fcc => SpinGeometry::fcc(),
        ModelName::Custom => {
            let p = cfg.positions.clone().unwrap_or_default();
            SpinGeometry::custom(p).within("hamiltonian")?
        }
    };
    if cfg.model != ModelName::Custom {
        if let Some(p) = &cfg.positions {
            g = g.with_positions(p.clone()).within("hamiltonian")?;
        }
    }
    if let Some(axis) = cfg.field_axis {
        g = g.with_field_axis(axis).within("hamiltonian")?;
    }
    if let Some(p) = cfg.exponent {
        g = g.with_exponent(p).within("hamiltonian")?;
    }
    Ok(g.with_legacy_3d_scale(cfg.legacy_3d_scale))
}

fn anisotropy(cfg: &RunConfig) -> Anisotropy {
    if cfg.xx_model {
        Anisotropy::XX
    } else {
        Anisotropy::SECULAR
    }
}

struct System {
    couplings: CouplingMatrix,
    basis: SectorBasis,
    hamiltonian: SectorOperator,
}

fn build_system(cfg: &RunConfig, out: &mut OutputDir) -> Result<System, CliError> {
    let couplings = geometry(cfg, cfg.n_spins)?.couplings().within("hamiltonian")?;
    let basis = sector_with_parity(cfg.n_spins, cfg.sz, cfg.parity.into()).within("hilbert")?;
    check_memory(basis.dim(), cfg)?;
    log::info!(
        "N = {}, sz = {}, parity {}, dimension {}",
        cfg.n_spins,
        cfg.sz,
        basis.parity(),
        basis.dim()
    );
    let options = AssemblyOptions {
        anisotropy: anisotropy(cfg),
        max_dim: max_dense_dim(cfg.max_memory_gib),
    };
    let hamiltonian = assemble_with(&couplings, &basis, &options).within("hamiltonian")?;
    if cfg.export_basis {
        write_basis(out, &basis)?;
    }
    if cfg.export_operator {
        let text: String = hamiltonian
            .triplets()
            .map(|(r, c, v)| format!("{r} {c} {}\n", num17(v)))
            .collect();
        out.text("hamiltonian.coo", &text)?;
    }
    Ok(System {
        couplings,
        basis,
        hamiltonian,
    })
}

fn write_basis(out: &mut OutputDir, basis: &SectorBasis) -> Result<(), CliError> {
    out.csv(
        "basis.csv",
        &["index", "integer", "bitstring", "weight"],
        basis.elements().iter().enumerate().map(|(k, e)| {
            [
                k.to_string(),
                e.state.bits().to_string(),
                e.state.bitstring(),
                e.state.weight().to_string(),
            ]
        }),
    )
}

fn sector_summary(cfg: &RunConfig, dim: usize) -> Value {
    json!({
        "model": cfg.model,
        "N": cfg.n_spins,
        "sz": cfg.sz,
        "parity": cfg.parity,
        "dimension": dim,
    })
}

/// Writes spectrum, spacings and histogram files; returns the summary.
fn spectral_outputs(
    eigs: &[f64],
    cfg: &RunConfig,
    out: &mut OutputDir,
    require_lsi: bool,
) -> Result<Value, CliError> {
    let density = level_density(eigs, cfg.bandwidth).within("spectral")?;
    out.csv(
        "spectrum.csv",
        &["index", "E", "E_tilde", "Omega"],
        eigs.iter().enumerate().map(|(k, e)| {
            [
                k.to_string(),
                num(*e),
                num(density.normalized[k]),
                num(density.curve.ordinates[k]),
            ]
        }),
    )?;
    let sample = unfold(eigs, &density.curve, cfg.truncate).within("spectral")?;
    out.csv("spacings.csv", &["s"], sample.spacings.iter().map(|s| [num(*s)]))?;
    let (eta, sup) = match (lsi(&sample), spacing_histogram(&sample)) {
        (Ok(eta), Ok(hist)) => {
            out.csv(
                "histogram.csv",
                &["left_edge", "height"],
                hist.edges.iter().zip(&hist.heights).map(|(e, h)| [num(*e), num(*h)]),
            )?;
            (Some(eta), Some(hist.sup_distance(wigner_dyson_cdf)))
        }
        (Err(e), _) | (_, Err(e)) if require_lsi => return Err(e).within("spectral"),
        (Err(e), _) | (_, Err(e)) => {
            log::warn!("no spacing statistics: {e}");
            (None, None)
        }
    };
    Ok(json!({
        "lsi": eta,
        "s0": S0,
        "bandwidth": density.curve.bandwidth,
        "truncate": cfg.truncate,
        "spacings": sample.len(),
        "mean_spacing": sample.mean(),
        "histogram_sup_distance_wd": sup,
        "e_sigma": density.e_sigma,
    }))
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Some(a), Value::Object(b)) = (a.as_object_mut(), b) {
        a.extend(b);
    }
    a
}

fn stats(xs: &[f64]) -> Value {
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    json!({"min": min, "max": max, "mean": mean})
}

fn npc_outputs(
    profile: &NpcProfile,
    spectrum: &SpectralData,
    basis: Option<&SectorBasis>,
    out: &mut OutputDir,
) -> Result<Value, CliError> {
    let eigs = spectrum.eigenvalues();
    out.csv(
        "npc_columns.csv",
        &["alpha", "E", "npc"],
        profile
            .columns
            .iter()
            .enumerate()
            .map(|(a, x)| [a.to_string(), num(eigs[a]), num(*x)]),
    )?;
    let label = |i: usize| basis.map(|b| b.elements()[i].state.bitstring()).unwrap_or_default();
    out.csv(
        "npc_rows.csv",
        &["index", "bitstring", "npc"],
        profile
            .rows
            .iter()
            .enumerate()
            .map(|(i, x)| [i.to_string(), label(i), num(*x)]),
    )?;
    let mut summary = json!({
        "columns": stats(&profile.columns),
        "rows": stats(&profile.rows),
        "reference": profile.reference,
    });
    if let Some(b) = basis {
        let top = highest_npc_state(b, spectrum).within("dynamics")?;
        summary["highest_npc_state"] = json!({
            "index": top.index,
            "bitstring": top.element.state.bitstring(),
            "partner": top.element.partner.map(|p| p.bitstring()),
            "npc": top.npc,
        });
    }
    Ok(summary)
}

fn components_outputs(
    spectrum: &SpectralData,
    profile: &NpcProfile,
    cfg: &RunConfig,
    out: &mut OutputDir,
) -> Result<Value, CliError> {
    let selection = select_components(profile, cfg.n_vectors, cfg.row_min).within("eigvec")?;
    let options = ComponentOptions {
        bandwidth: cfg.bandwidth,
        edge_fraction: cfg.edge_fraction,
    };
    let sample = unfold_components(spectrum, &selection, &options).within("eigvec")?;
    out.csv(
        "components.csv",
        &["row", "col", "E", "c", "c_tilde"],
        sample.records.iter().map(|r| {
            [
                r.row.to_string(),
                r.column.to_string(),
                num(r.energy),
                num(r.component),
                num(r.rescaled),
            ]
        }),
    )?;
    let rescaled = sample.rescaled();
    let logs: Vec<f64> = rescaled.iter().map(|c| (c * c).ln()).collect();
    let (mean, variance) = sample.mean_and_variance();
    let (lo, hi) = selection.column_npc_range(profile);
    Ok(json!({
        "samples": sample.len(),
        "rows": sample.rows.len(),
        "columns": sample.columns.len(),
        "excluded_edge_columns": sample.excluded_columns.len(),
        "column_npc_range": [lo, hi],
        "bandwidth": sample.bandwidth,
        "mean": mean,
        "variance": variance,
        "ks_normal": ks_distance(&rescaled, std_normal_cdf),
        "ks_log_porter_thomas": ks_distance(&logs, log_porter_thomas_cdf),
    }))
}

fn run_spectral(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let sys = build_system(cfg, out)?;
    let eigs = eigenvalues(&sys.hamiltonian).within("spectral")?;
    let require = cfg.analysis == Analysis::Lsi;
    let summary = spectral_outputs(&eigs, cfg, out, require)?;
    Ok(merge(sector_summary(cfg, sys.basis.dim()), summary))
}

fn run_lsi_profile(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let sys = build_system(cfg, out)?;
    let eigs = eigenvalues(&sys.hamiltonian).within("spectral")?;
    let profile = lsi_profile(&eigs, cfg.window, cfg.bandwidth).within("spectral")?;
    out.csv(
        "lsi_profile.csv",
        &["E", "eta"],
        eigs.iter()
            .zip(&profile.curve.ordinates)
            .map(|(e, h)| [num(*e), num(*h)]),
    )?;
    let unreliable = profile.reliable.iter().filter(|r| !**r).count();
    Ok(merge(
        sector_summary(cfg, sys.basis.dim()),
        json!({
            "window_levels": profile.window_levels,
            "clamped_levels": unreliable,
            "bandwidth": profile.curve.bandwidth,
            "s0": S0,
        }),
    ))
}

fn run_npc(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let sys = build_system(cfg, out)?;
    let spectrum = eigendecompose(&sys.hamiltonian).within("spectral")?;
    let profile = npc_profile(&spectrum);
    let summary = npc_outputs(&profile, &spectrum, Some(&sys.basis), out)?;
    Ok(merge(sector_summary(cfg, sys.basis.dim()), summary))
}

fn run_components(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let sys = build_system(cfg, out)?;
    let spectrum = eigendecompose(&sys.hamiltonian).within("spectral")?;
    let profile = npc_profile(&spectrum);
    let summary = components_outputs(&spectrum, &profile, cfg, out)?;
    Ok(merge(sector_summary(cfg, sys.basis.dim()), summary))
}

fn series_outputs(
    name: &str,
    series: &ObservableSeries,
    out: &mut OutputDir,
) -> Result<Value, CliError> {
    let f = series
        .fluctuations
        .as_ref()
        .expect("detrended series carries fluctuations");
    out.csv(
        &format!("observable_{name}.csv"),
        &["alpha", "E", "value", "trend", "residual", "rescaled", "sampled_flag"],
        (0..series.len()).map(|a| {
            [
                a.to_string(),
                num(series.energies[a]),
                num(series.values[a]),
                num(f.trend[a]),
                num(f.residual[a]),
                num(f.rescaled[a]),
                u8::from(f.sampled[a]).to_string(),
            ]
        }),
    )?;
    let (xs, gs): (Vec<f64>, Vec<f64>) = (0..series.len())
        .filter(|&a| f.sampled[a])
        .map(|a| (series.energies[a], f.trend[a]))
        .unzip();
    let trend_fit = linear_fit(&xs, &gs).within("observables")?;
    let sampled = series.sampled_rescaled();
    let var = sampled.iter().map(|r| r * r).sum::<f64>() / sampled.len() as f64;
    Ok(json!({
        "observable": name,
        "trend_slope": trend_fit.slope,
        "trend_intercept": trend_fit.intercept,
        "trend_r_squared": trend_fit.r_squared,
        "trend_mean": gs.iter().sum::<f64>() / gs.len() as f64,
        "rescaled_variance": var,
        "sampled": sampled.len(),
        "bandwidth": f.bandwidth,
    }))
}

fn run_observables(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    if cfg.sites.is_empty() && cfg.pairs.is_empty() {
        return Err(CliError::Config(
            "sites/pairs: the observables analysis needs at least one site or pair".into(),
        ));
    }
    let sys = build_system(cfg, out)?;
    let spectrum = eigendecompose(&sys.hamiltonian).within("spectral")?;
    let mut ops: Vec<(String, SectorOperator)> = Vec::new();
    for &i in &cfg.sites {
        ops.push((format!("sigma_z_{i}"), local_sigma_z(i, &sys.basis).within("observables")?));
    }
    for &[i, j] in &cfg.pairs {
        let op = pair_energy_op_with(i, j, &sys.couplings, &sys.basis, anisotropy(cfg))
            .within("observables")?;
        ops.push((format!("H_{i}_{j}"), op));
    }
    let mut records = Vec::new();
    for (name, op) in &ops {
        let series = eigen_expectations(op, &spectrum).within("observables")?;
        let series =
            detrend_and_rescale(&series, cfg.bandwidth, cfg.edge_fraction).within("observables")?;
        records.push(series_outputs(name, &series, out)?);
    }
    Ok(merge(
        sector_summary(cfg, sys.basis.dim()),
        json!({
            "microcanonical_sigma_z": microcanonical_value(cfg.n_spins, cfg.sz),
            "observables": records,
        }),
    ))
}

fn run_concentration(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let variant = match cfg.model {
        ModelName::Chain => ChainVariant::LongRange,
        ModelName::ChainNn => ChainVariant::NearestNeighbor,
        _ => {
            return Err(CliError::Config(
                "model: the concentration scan needs a chain model".into(),
            ))
        }
    };
    let smallest = cfg.sizes.iter().copied().min().unwrap_or(0);
    let observable = match (cfg.pairs.first(), cfg.sites.first()) {
        (Some(&[i, j]), _) => ObservableSpec::PairEnergy(i, j),
        (None, Some(&i)) => ObservableSpec::SigmaZ(i),
        (None, None) => ObservableSpec::PairEnergy(4, 5),
    };
    let top = match observable {
        ObservableSpec::PairEnergy(_, j) => j,
        ObservableSpec::SigmaZ(i) => i,
    };
    if top > smallest {
        return Err(CliError::Config(format!(
            "sizes: site {top} does not exist at N = {smallest}"
        )));
    }
    let largest = cfg.sizes.iter().copied().max().unwrap_or(0);
    let biggest = sector_with_parity(
        largest,
        spinchaos_core::hilbert::default_sz(largest),
        cfg.parity.into(),
    )
    .within("hilbert")?;
    check_memory(biggest.dim(), cfg)?;
    let spec = ScanSpec {
        variant,
        exponent: cfg.exponent.unwrap_or(3.0),
        observable,
        e_star: cfg.e_star,
        window: cfg.scan_window,
        parity: cfg.parity.into(),
        anisotropy: anisotropy(cfg),
        bandwidth: cfg.bandwidth,
    };
    let scan = concentration_scan(&cfg.sizes, &spec).within("observables")?;
    out.csv(
        "scan.csv",
        &["N", "ln_var", "ln_inv_density", "E_star"],
        scan.records.iter().map(|r| {
            [
                r.n_spins.to_string(),
                num(r.ln_variance),
                num(r.ln_inv_density),
                num(r.e_star),
            ]
        }),
    )?;
    Ok(json!({
        "model": cfg.model,
        "parity": cfg.parity,
        "observable": format!("{observable:?}"),
        "e_star_per_site": cfg.e_star,
        "window": cfg.scan_window,
        "sizes": cfg.sizes,
        "window_states": scan.records.iter().map(|r| r.window_states).collect::<Vec<_>>(),
        "variance_slope": scan.variance_fit.slope,
        "variance_slope_stderr": scan.variance_fit.slope_stderr,
        "inv_density_slope": scan.density_fit.slope,
        "inv_density_slope_stderr": scan.density_fit.slope_stderr,
        "relative_slope_mismatch": scan.slope_mismatch(),
    }))
}

fn initial_vector(
    cfg: &RunConfig,
    basis: &SectorBasis,
    spectrum: &SpectralData,
) -> Result<(Vec<f64>, String), CliError> {
    match &cfg.initial_state {
        None => Err(CliError::Config("initial_state: missing".into())),
        Some(InitialState::Named(name)) if name == "highest_npc" => {
            let top = highest_npc_state(basis, spectrum).within("dynamics")?;
            let mut v = vec![0.0; basis.dim()];
            v[top.index] = 1.0;
            Ok((v, top.element.state.bitstring()))
        }
        Some(InitialState::Named(bits)) => {
            let state = BasisState::from_bitstring(bits)
                .map_err(|e| CliError::Config(format!("initial_state: {e}")))?;
            let v = computational_state(basis, state).within("dynamics")?;
            Ok((v, bits.clone()))
        }
        Some(InitialState::Vector(v)) => {
            if v.len() != basis.dim() {
                return Err(CliError::Config(format!(
                    "initial_state: vector has {} entries, sector has {}",
                    v.len(),
                    basis.dim()
                )));
            }
            Ok((v.clone(), "custom vector".into()))
        }
    }
}

fn run_evolve(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let sys = build_system(cfg, out)?;
    let spectrum = eigendecompose(&sys.hamiltonian).within("spectral")?;
    let (psi, label) = initial_vector(cfg, &sys.basis, &spectrum)?;
    let grid = TimeGrid::new(cfg.end_time, cfg.steps).within("dynamics")?;
    let sites: Vec<usize> = if cfg.sites.is_empty() {
        (1..=cfg.n_spins).collect()
    } else {
        cfg.sites.clone()
    };
    let result =
        evolve_local_spins(&psi, &sites, &sys.basis, &spectrum, &grid).within("dynamics")?;
    let mut long_time = Vec::new();
    for (k, &i) in sites.iter().enumerate() {
        let series = result.series(k);
        out.csv(
            &format!("evolve_sigma_z_{i}.csv"),
            &["t", "value"],
            result.times.iter().zip(series).map(|(t, v)| [num(*t), num(*v)]),
        )?;
        let (mean, rms) = long_time_average(&result.times, series, cfg.t_min).within("dynamics")?;
        long_time.push(json!({"site": i, "mean": mean, "rms": rms, "initial": series[0]}));
    }
    let mut header = vec!["t".to_string()];
    header.extend(sites.iter().map(|i| format!("sigma_z_{i}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    out.csv(
        "evolve_batch.csv",
        &header_refs,
        (0..result.times.len()).map(|t| {
            std::iter::once(num(result.times[t]))
                .chain((0..sites.len()).map(|k| num(result.series(k)[t])))
                .collect::<Vec<_>>()
        }),
    )?;
    let support = support_density(&psi, &spectrum, cfg.bandwidth).within("dynamics")?;
    out.csv(
        "support_density.csv",
        &["E", "P"],
        support
            .curve
            .abscissae
            .iter()
            .zip(&support.curve.ordinates)
            .map(|(e, p)| [num(*e), num(*p)]),
    )?;
    let max_norm_error = result.norms.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
    Ok(merge(
        sector_summary(cfg, sys.basis.dim()),
        json!({
            "initial_state": label,
            "npc": result.npc,
            "microcanonical_value": microcanonical_value(cfg.n_spins, cfg.sz),
            "support_mean_energy": support.mean_energy,
            "end_time": cfg.end_time,
            "steps": cfg.steps,
            "t_min": cfg.t_min,
            "max_norm_error": max_norm_error,
            "long_time": long_time,
            "xx_model": cfg.xx_model,
        }),
    ))
}

fn run_goe(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    check_memory(cfg.dim, cfg)?;
    let matrix = sample_goe(cfg.dim, cfg.seed).within("spectral")?;
    let spectrum = eigendecompose_dense(matrix).within("spectral")?;
    let summary = spectral_outputs(spectrum.eigenvalues(), cfg, out, true)?;
    let profile = npc_profile(&spectrum);
    let npc = npc_outputs(&profile, &spectrum, None, out)?;
    let comps = components_outputs(&spectrum, &profile, cfg, out)?;
    let mean_npc = profile.columns.iter().sum::<f64>() / profile.columns.len() as f64;
    Ok(merge(
        json!({"dimension": cfg.dim, "seed": cfg.seed}),
        merge(
            summary,
            json!({
                "npc": npc,
                "mean_npc_relative_error": mean_npc / profile.reference - 1.0,
                "components": comps,
            }),
        ),
    ))
}

/// Runs the configured analysis and returns its JSON summary. The summary
/// is also written as `summary.json`.
pub fn run(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let summary = match cfg.analysis {
        Analysis::Spectrum | Analysis::Lsi => run_spectral(cfg, out)?,
        Analysis::LsiProfile => run_lsi_profile(cfg, out)?,
        Analysis::Npc => run_npc(cfg, out)?,
        Analysis::Components => run_components(cfg, out)?,
        Analysis::Observables => run_observables(cfg, out)?,
        Analysis::Concentration => run_concentration(cfg, out)?,
        Analysis::Evolve => run_evolve(cfg, out)?,
        Analysis::GoeReference => run_goe(cfg, out)?,
    };
    out.json("summary.json", &summary)?;
    Ok(summary)
}
