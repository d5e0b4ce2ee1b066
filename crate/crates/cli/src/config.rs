//! Run configuration: JSON schema, defaults and validation.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use spinchaos_core::dynamics::{DEFAULT_END_TIME, DEFAULT_STEPS};
use spinchaos_core::eigvec::DEFAULT_EDGE_FRACTION;
use spinchaos_core::hilbert::default_sz;
use spinchaos_core::observables::DEFAULT_SCAN_WINDOW;
use spinchaos_core::spectral::{DEFAULT_LSI_WINDOW, DEFAULT_TRUNCATE};
use spinchaos_core::Parity;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Spectrum,
    Lsi,
    #[value(name = "lsi_profile")]
    LsiProfile,
    Npc,
    Components,
    Observables,
    Concentration,
    Evolve,
    #[value(name = "goe_reference")]
    GoeReference,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::Spectrum => "spectrum",
            Analysis::Lsi => "lsi",
            Analysis::LsiProfile => "lsi_profile",
            Analysis::Npc => "npc",
            Analysis::Components => "components",
            Analysis::Observables => "observables",
            Analysis::Concentration => "concentration",
            Analysis::Evolve => "evolve",
            Analysis::GoeReference => "goe_reference",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Chain,
    ChainNn,
    Fcc,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityName {
    None,
    Symmetric,
    Antisymmetric,
}

impl From<ParityName> for Parity {
    fn from(p: ParityName) -> Self {
        match p {
            ParityName::None => Parity::None,
            ParityName::Symmetric => Parity::Symmetric,
            ParityName::Antisymmetric => Parity::Antisymmetric,
        }
    }
}

/// A bit string, an explicit sector vector, or `"highest_npc"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Named(String),
    Vector(Vec<f64>),
}

/// The config file as written. Every key is optional; see [`RunConfig`]
/// for the defaults.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub model: Option<ModelName>,
    #[serde(rename = "N")]
    pub n_spins: Option<usize>,
    pub positions: Option<Vec<[f64; 3]>>,
    pub field_axis: Option<[f64; 3]>,
    pub exponent: Option<f64>,
    pub legacy_3d_scale: Option<bool>,
    /// Drop the Ising term (XX model).
    pub xx_model: Option<bool>,
    pub sz: Option<i32>,
    pub parity: Option<ParityName>,
    pub analysis: Option<Analysis>,
    pub bandwidth: Option<f64>,
    pub truncate: Option<usize>,
    /// Levels per window of the LSI profile.
    pub window: Option<usize>,
    pub edge_fraction: Option<f64>,
    pub n_vectors: Option<usize>,
    pub row_min: Option<f64>,
    pub end_time: Option<f64>,
    pub steps: Option<usize>,
    pub t_min: Option<f64>,
    pub initial_state: Option<InitialState>,
    pub sites: Option<Vec<usize>>,
    pub pairs: Option<Vec<[usize; 2]>>,
    pub sizes: Option<Vec<usize>>,
    pub e_star: Option<f64>,
    pub scan_window: Option<f64>,
    pub dim: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub max_memory_gib: Option<f64>,
    pub export_basis: Option<bool>,
    pub export_operator: Option<bool>,
}

/// Fully resolved configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub analysis: Analysis,
    pub model: ModelName,
    #[serde(rename = "N")]
    pub n_spins: usize,
    pub positions: Option<Vec<[f64; 3]>>,
    pub field_axis: Option<[f64; 3]>,
    pub exponent: Option<f64>,
    pub legacy_3d_scale: bool,
    pub xx_model: bool,
    pub sz: i32,
    pub parity: ParityName,
    pub bandwidth: Option<f64>,
    pub truncate: usize,
    pub window: usize,
    pub edge_fraction: f64,
    pub n_vectors: usize,
    pub row_min: f64,
    pub end_time: f64,
    pub steps: usize,
    pub t_min: f64,
    pub initial_state: Option<InitialState>,
    pub sites: Vec<usize>,
    pub pairs: Vec<[usize; 2]>,
    pub sizes: Vec<usize>,
    pub e_star: f64,
    pub scan_window: f64,
    pub dim: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub max_memory_gib: f64,
    pub export_basis: bool,
    pub export_operator: bool,
}

pub const DEFAULT_GOE_DIM: usize = 3000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_MEMORY_GIB: f64 = 4.0;
pub const DEFAULT_N_VECTORS: usize = 100;
pub const DEFAULT_ROW_MIN: f64 = 100.0;
pub const DEFAULT_SIZES: [usize; 4] = [9, 11, 13, 15];

/// Overrides given on the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub analysis: Option<Analysis>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses JSON text without applying defaults.
pub fn parse_raw(text: &str) -> Result<RawConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            config_error(inner.to_string())
        } else {
            config_error(format!("{path}: {inner}"))
        }
    })
}

/// Parses and validates a config, filling every default.
pub fn parse_config(text: &str, overrides: &Overrides) -> Result<RunConfig, CliError> {
    resolve(parse_raw(text)?, overrides)
}

pub fn resolve(raw: RawConfig, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let analysis = match (overrides.analysis, raw.analysis) {
        (Some(a), Some(b)) if a != b => {
            return Err(config_error(format!(
                "analysis: command line selects {} but the config says {}",
                a.name(),
                b.name()
            )))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(config_error("analysis: missing")),
    };
    let model = match (raw.model, analysis) {
        (Some(m), _) => m,
        (None, Analysis::GoeReference) => ModelName::Chain,
        (None, _) => return Err(config_error("model: missing")),
    };
    let n_spins = resolve_n(&raw, model, analysis)?;
    if let Some(p) = &raw.positions {
        if p.len() != n_spins {
            return Err(config_error(format!(
                "positions: {} sites given for N = {n_spins}",
                p.len()
            )));
        }
    }
    if model == ModelName::Custom && raw.positions.is_none() {
        return Err(config_error("positions: required for the custom model"));
    }
    let sz = raw.sz.unwrap_or_else(|| default_sz(n_spins));
    if (n_spins as i32 - sz) % 2 != 0 || sz.unsigned_abs() as usize > n_spins {
        return Err(config_error(format!("sz: {sz} is not a valid sector for N = {n_spins}")));
    }
    let parity = raw.parity.unwrap_or(match (model, analysis) {
        (_, Analysis::Evolve) => ParityName::None,
        (ModelName::Chain | ModelName::ChainNn, _) => ParityName::Symmetric,
        _ => ParityName::None,
    });
    if parity != ParityName::None && !matches!(model, ModelName::Chain | ModelName::ChainNn) {
        return Err(config_error(
            "parity: reflection sectors need a chain model on a line",
        ));
    }
    let sites = raw.sites.clone().unwrap_or_default();
    for (k, &s) in sites.iter().enumerate() {
        if s == 0 || s > n_spins {
            return Err(config_error(format!(
                "sites[{k}]: site {s} out of range 1..={n_spins}"
            )));
        }
    }
    let pairs = raw.pairs.clone().unwrap_or_default();
    for (k, &[i, j]) in pairs.iter().enumerate() {
        if !(1 <= i && i < j && j <= n_spins) {
            return Err(config_error(format!(
                "pairs[{k}]: ({i}, {j}) must satisfy 1 <= i < j <= {n_spins}"
            )));
        }
    }
    let positive = |name: &str, v: Option<f64>| -> Result<(), CliError> {
        match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => {
                Err(config_error(format!("{name}: must be positive, got {x}")))
            }
            _ => Ok(()),
        }
    };
    positive("bandwidth", raw.bandwidth)?;
    positive("end_time", raw.end_time)?;
    positive("scan_window", raw.scan_window)?;
    positive("max_memory_gib", raw.max_memory_gib)?;
    let edge_fraction = raw.edge_fraction.unwrap_or(DEFAULT_EDGE_FRACTION);
    if !(0.0..0.5).contains(&edge_fraction) {
        return Err(config_error("edge_fraction: must lie in [0, 0.5)"));
    }
    let end_time = raw.end_time.unwrap_or(DEFAULT_END_TIME);
    let t_min = raw.t_min.unwrap_or(end_time / 2.0);
    if !(t_min < end_time) {
        return Err(config_error(format!("t_min: {t_min} is not below end_time {end_time}")));
    }
    let sizes = raw.sizes.clone().unwrap_or_else(|| DEFAULT_SIZES.to_vec());
    if let Some(s) = raw.initial_state.as_ref() {
        if analysis != Analysis::Evolve {
            log::warn!("initial_state is ignored by the {} analysis", analysis.name());
        }
        if let InitialState::Named(name) = s {
            if name != "highest_npc" && name.len() != n_spins {
                return Err(config_error(format!(
                    "initial_state: \"{name}\" is not a {n_spins}-site bit string or \"highest_npc\""
                )));
            }
        }
    }
    Ok(RunConfig {
        analysis,
        model,
        n_spins,
        positions: raw.positions,
        field_axis: raw.field_axis,
        exponent: raw.exponent,
        legacy_3d_scale: raw.legacy_3d_scale.unwrap_or(false),
        xx_model: raw.xx_model.unwrap_or(false),
        sz,
        parity,
        bandwidth: raw.bandwidth,
        truncate: raw.truncate.unwrap_or(DEFAULT_TRUNCATE),
        window: raw.window.unwrap_or(DEFAULT_LSI_WINDOW),
        edge_fraction,
        n_vectors: raw.n_vectors.unwrap_or(DEFAULT_N_VECTORS),
        row_min: raw.row_min.unwrap_or(DEFAULT_ROW_MIN),
        end_time,
        steps: raw.steps.unwrap_or(DEFAULT_STEPS),
        t_min,
        initial_state: raw.initial_state,
        sites,
        pairs,
        sizes,
        e_star: raw.e_star.unwrap_or(0.0),
        scan_window: raw.scan_window.unwrap_or(DEFAULT_SCAN_WINDOW),
        dim: raw.dim.unwrap_or(DEFAULT_GOE_DIM),
        seed: overrides.seed.or(raw.seed).unwrap_or(DEFAULT_SEED),
        out: overrides
            .out
            .clone()
            .or(raw.out)
            .unwrap_or_else(|| PathBuf::from("out")),
        max_memory_gib: raw.max_memory_gib.unwrap_or(DEFAULT_MEMORY_GIB),
        export_basis: raw.export_basis.unwrap_or(false),
        export_operator: raw.export_operator.unwrap_or(false),
    })
}

fn resolve_n(raw: &RawConfig, model: ModelName, analysis: Analysis) -> Result<usize, CliError> {
    let n = match model {
        ModelName::Fcc => {
            let n = raw.n_spins.unwrap_or(14);
            if n != 14 {
                return Err(config_error(format!("N: the fcc cluster has 14 sites, got {n}")));
            }
            n
        }
        ModelName::Custom => match (&raw.positions, raw.n_spins) {
            (Some(p), _) => p.len(),
            (None, _) => return Err(config_error("positions: required for the custom model")),
        },
        ModelName::Chain | ModelName::ChainNn => match (raw.n_spins, analysis) {
            (Some(n), _) => n,
            (None, Analysis::Concentration) => *DEFAULT_SIZES.last().unwrap_or(&15),
            (None, Analysis::GoeReference) => 2,
            (None, _) => return Err(config_error("N: missing")),
        },
    };
    if !(2..=spinchaos_core::hilbert::MAX_SPINS).contains(&n) {
        return Err(config_error(format!(
            "N: {n} outside 2..={}",
            spinchaos_core::hilbert::MAX_SPINS
        )));
    }
    Ok(n)
}
