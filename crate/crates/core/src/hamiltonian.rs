//! Spin geometries, dipolar couplings and sector Hamiltonian assembly.
//!
//! The secular dipolar Hamiltonian is `H = Σ_{i<j} c_ij h_ij` with
//! `h_ij = σx_i σx_j + σy_i σy_j - 2 σz_i σz_j` and
//! `c_ij = (3 cos²θ_ij - 1) / (2 r_ij^p)`, `θ_ij` being the angle between the
//! pair axis and the field. Units: `d = 1`, `ħ = 1`; the uniform Zeeman
//! term only shifts a fixed-Sz block and is dropped.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{site_mask, SectorBasis};
use crate::operator::{in_sector, SectorOperator};

/// Lattice sites closer than this form near-isolated clusters.
pub const CLUSTER_WARNING_DISTANCE: f64 = 0.3;

/// Default cap on the sector dimension accepted by assembly.
pub const DEFAULT_MAX_DIM: usize = 13_000;

/// Face-centered cubic cell (8 corners + 6 face centers) with site 1 moved
/// off its corner to `(-0.15, -0.3, 0)` so that no lattice symmetry
/// survives. Transcribed from a published coordinate listing; override via
/// [`SpinGeometry::custom`] if a different placement is wanted.
pub const FCC_POSITIONS: [[f64; 3]; 14] = [
    [-0.15, -0.3, 0.0],
    [0.0, 0.0, 1.0],
    [0.0, 0.5, 0.5],
    [0.0, 1.0, 0.0],
    [0.0, 1.0, 1.0],
    [1.0, 0.0, 0.0],
    [1.0, 0.0, 1.0],
    [1.0, 0.5, 0.5],
    [1.0, 1.0, 0.0],
    [1.0, 1.0, 1.0],
    [0.5, 0.5, 0.0],
    [0.5, 0.5, 1.0],
    [0.5, 1.0, 0.5],
    [0.5, 0.0, 0.5],
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Open chain, all pairs coupled, field perpendicular to the chain.
    Chain,
    /// Open chain, nearest neighbours only.
    ChainNn,
    /// 14-site FCC cell with the displaced site.
    Fcc,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainVariant {
    LongRange,
    NearestNeighbor,
}

/// Site positions and field direction that determine the couplings.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinGeometry {
    positions: Vec<[f64; 3]>,
    field_axis: [f64; 3],
    exponent: f64,
    model: ModelKind,
    legacy_3d_scale: bool,
}

impl SpinGeometry {
    pub fn chain(n_spins: usize) -> Self {
        Self::on_line(n_spins, ModelKind::Chain)
    }

    pub fn chain_nn(n_spins: usize) -> Self {
        Self::on_line(n_spins, ModelKind::ChainNn)
    }

    fn on_line(n_spins: usize, model: ModelKind) -> Self {
        Self {
            positions: (0..n_spins).map(|i| [i as f64, 0.0, 0.0]).collect(),
            field_axis: [0.0, 0.0, 1.0],
            exponent: 3.0,
            model,
            legacy_3d_scale: false,
        }
    }

    pub fn fcc() -> Self {
        Self {
            positions: FCC_POSITIONS.to_vec(),
            field_axis: [0.0, 0.0, 1.0],
            exponent: 3.0,
            model: ModelKind::Fcc,
            legacy_3d_scale: false,
        }
    }

    pub fn custom(positions: Vec<[f64; 3]>) -> Result<Self> {
        let g = Self {
            positions,
            field_axis: [0.0, 0.0, 1.0],
            exponent: 3.0,
            model: ModelKind::Custom,
            legacy_3d_scale: false,
        };
        g.check_distinct()?;
        Ok(g)
    }

    /// Replaces the site positions while keeping the model tag.
    pub fn with_positions(mut self, positions: Vec<[f64; 3]>) -> Result<Self> {
        self.positions = positions;
        self.check_distinct()?;
        Ok(self)
    }

    /// Sets the field direction; the vector is normalized.
    pub fn with_field_axis(mut self, axis: [f64; 3]) -> Result<Self> {
        let norm = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Argument("field axis must be a nonzero vector".into()));
        }
        self.field_axis = axis.map(|a| a / norm);
        Ok(self)
    }

    pub fn with_exponent(mut self, p: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Argument(format!("coupling exponent {p} must be > 0")));
        }
        self.exponent = p;
        Ok(self)
    }

    /// Drops the factor 1/2 in the 3D coupling formula. Only raw energies
    /// change; all unfolded statistics are scale-free.
    pub fn with_legacy_3d_scale(mut self, legacy: bool) -> Self {
        self.legacy_3d_scale = legacy;
        self
    }

    pub fn n_spins(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn field_axis(&self) -> [f64; 3] {
        self.field_axis
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn model(&self) -> ModelKind {
        self.model
    }

    pub fn legacy_3d_scale(&self) -> bool {
        self.legacy_3d_scale
    }

    fn check_distinct(&self) -> Result<()> {
        for i in 0..self.positions.len() {
            for j in i + 1..self.positions.len() {
                if distance(&self.positions[i], &self.positions[j]) == 0.0 {
                    return Err(Error::DegenerateGeometry(i + 1, j + 1));
                }
            }
        }
        Ok(())
    }

    pub fn min_separation(&self) -> f64 {
        let mut min = f64::INFINITY;
        for i in 0..self.positions.len() {
            for j in i + 1..self.positions.len() {
                min = min.min(distance(&self.positions[i], &self.positions[j]));
            }
        }
        min
    }

    /// Couplings for this geometry.
    pub fn couplings(&self) -> Result<CouplingMatrix> {
        match self.model {
            ModelKind::Chain if self.is_unit_line() => {
                chain_couplings(self.n_spins(), ChainVariant::LongRange, self.exponent)
            }
            ModelKind::ChainNn if self.is_unit_line() => {
                chain_couplings(self.n_spins(), ChainVariant::NearestNeighbor, self.exponent)
            }
            ModelKind::ChainNn => {
                let full = fcc_couplings(self)?;
                let n = full.n_spins();
                let mut c = CouplingMatrix::zeros(n);
                for i in 1..n {
                    c.set(i, i + 1, full.get(i, i + 1));
                }
                Ok(c)
            }
            _ => fcc_couplings(self),
        }
    }

    fn is_unit_line(&self) -> bool {
        self.field_axis == [0.0, 0.0, 1.0]
            && self
                .positions
                .iter()
                .enumerate()
                .all(|(i, p)| *p == [i as f64, 0.0, 0.0])
    }
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Symmetric pair couplings with zero diagonal; sites are 1-based.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMatrix {
    n_spins: usize,
    values: Vec<f64>,
}

impl CouplingMatrix {
    pub fn zeros(n_spins: usize) -> Self {
        Self {
            n_spins,
            values: vec![0.0; n_spins * n_spins],
        }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i - 1) * self.n_spins + (j - 1)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(i != j, "coupling matrix has zero diagonal");
        self.values[(i - 1) * self.n_spins + (j - 1)] = value;
        self.values[(j - 1) * self.n_spins + (i - 1)] = value;
    }

    /// Nonzero `(i, j, c_ij)` with `i < j`.
    pub fn pairs(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 1..=self.n_spins {
            for j in i + 1..=self.n_spins {
                let c = self.get(i, j);
                if c != 0.0 {
                    out.push((i, j, c));
                }
            }
        }
        out
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            n_spins: self.n_spins,
            values: self.values.iter().map(|v| v * a).collect(),
        }
    }
}

/// Open chain at `x = 0..N-1` with the field perpendicular to it, so every
/// pair sits at the angle π/2 and `c_ij = -1 / (2 |i-j|^p)`.
pub fn chain_couplings(n_spins: usize, variant: ChainVariant, p: f64) -> Result<CouplingMatrix> {
    if n_spins < 2 {
        return Err(Error::Argument("a chain needs at least two spins".into()));
    }
    if !(p > 0.0) {
        return Err(Error::Argument(format!("coupling exponent {p} must be > 0")));
    }
    let mut c = CouplingMatrix::zeros(n_spins);
    for i in 1..=n_spins {
        for j in i + 1..=n_spins {
            if variant == ChainVariant::NearestNeighbor && j - i != 1 {
                continue;
            }
            let r = (j - i) as f64;
            c.set(i, j, -0.5 / r.powf(p));
        }
    }
    Ok(c)
}

/// General dipolar couplings from positions and field axis:
/// `cos θ_ij` is the projection of the unit pair vector on the field.
pub fn fcc_couplings(geometry: &SpinGeometry) -> Result<CouplingMatrix> {
    geometry.check_distinct()?;
    let n = geometry.n_spins();
    let axis = geometry.field_axis;
    let scale = if geometry.legacy_3d_scale { 1.0 } else { 0.5 };
    let min = geometry.min_separation();
    if min < CLUSTER_WARNING_DISTANCE {
        log::warn!(
            "closest pair separation {min:.3} is below {CLUSTER_WARNING_DISTANCE}; \
             clustered sites weaken the spectral statistics"
        );
    }
    let mut c = CouplingMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&geometry.positions[i], &geometry.positions[j]);
            let r = distance(a, b);
            let proj: f64 = (0..3).map(|k| (a[k] - b[k]) * axis[k]).sum();
            let cos = proj / r;
            c.set(i + 1, j + 1, scale * (3.0 * cos * cos - 1.0) / r.powf(geometry.exponent));
        }
    }
    Ok(c)
}

/// Coefficients of a two-body XXZ term
/// `hopping (σx σx + σy σy) + ising σz σz`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Anisotropy {
    pub hopping: f64,
    pub ising: f64,
}

impl Anisotropy {
    /// Secular dipolar term.
    pub const SECULAR: Self = Self {
        hopping: 1.0,
        ising: -2.0,
    };

    /// XX model: the Ising part switched off.
    pub const XX: Self = Self {
        hopping: 1.0,
        ising: 0.0,
    };
}

impl Default for Anisotropy {
    fn default() -> Self {
        Self::SECULAR
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AssemblyOptions {
    pub anisotropy: Anisotropy,
    /// Refuse sectors larger than this.
    pub max_dim: usize,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            anisotropy: Anisotropy::SECULAR,
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

/// `Σ coef · h_ij` over `pairs` on a computational block. Each row is
/// independent: the diagonal collects the Ising terms and every pair with
/// opposite spins contributes one hop of amplitude `2 · hopping · coef`.
pub(crate) fn pair_sum_operator(
    basis: &SectorBasis,
    pairs: &[(usize, usize, f64)],
    anisotropy: Anisotropy,
) -> SectorOperator {
    debug_assert!(!basis.is_desymmetrized());
    let n = basis.n_spins();
    let masks: Vec<(u32, u32, f64)> = pairs
        .iter()
        .map(|&(i, j, c)| (site_mask(n, i), site_mask(n, j), c))
        .collect();
    let states: Vec<u32> = basis.states().map(|s| s.bits()).collect();
    let rows: Vec<Vec<(usize, f64)>> = states
        .par_iter()
        .enumerate()
        .map(|(r, &bits)| {
            let mut row = Vec::new();
            let mut diag = 0.0;
            for &(mi, mj, c) in &masks {
                let di = bits & mi != 0;
                let dj = bits & mj != 0;
                let zz = if di == dj { 1.0 } else { -1.0 };
                diag += c * anisotropy.ising * zz;
                if di != dj && anisotropy.hopping != 0.0 {
                    let target = basis.parent_rank(bits ^ mi ^ mj);
                    row.push((target, 2.0 * anisotropy.hopping * c));
                }
            }
            row.push((r, diag));
            row
        })
        .collect();
    SectorOperator::from_rows(basis.clone(), rows)
}

fn check_pair(i: usize, j: usize, n: usize) -> Result<()> {
    if i >= j {
        return Err(Error::Argument(format!("pair ({i}, {j}) needs i < j")));
    }
    if i == 0 || j > n {
        return Err(Error::Argument(format!(
            "pair ({i}, {j}) outside sites 1..={n}"
        )));
    }
    Ok(())
}

/// Matrix of `h_ij` in `basis` (1-based sites).
pub fn two_body_term(i: usize, j: usize, basis: &SectorBasis) -> Result<SectorOperator> {
    two_body_term_with(i, j, basis, Anisotropy::SECULAR)
}

pub fn two_body_term_with(
    i: usize,
    j: usize,
    basis: &SectorBasis,
    anisotropy: Anisotropy,
) -> Result<SectorOperator> {
    check_pair(i, j, basis.n_spins())?;
    in_sector(basis, |b| Ok(pair_sum_operator(b, &[(i, j, 1.0)], anisotropy)))
}

/// `H = Σ_{i<j} c_ij h_ij` built directly inside the sector.
pub fn assemble_sector_hamiltonian(
    couplings: &CouplingMatrix,
    basis: &SectorBasis,
) -> Result<SectorOperator> {
    assemble_with(couplings, basis, &AssemblyOptions::default())
}

pub fn assemble_with(
    couplings: &CouplingMatrix,
    basis: &SectorBasis,
    options: &AssemblyOptions,
) -> Result<SectorOperator> {
    if couplings.n_spins() != basis.n_spins() {
        return Err(Error::Argument(format!(
            "couplings for {} spins, basis for {}",
            couplings.n_spins(),
            basis.n_spins()
        )));
    }
    if basis.dim() > options.max_dim {
        return Err(Error::Resource {
            dim: basis.dim(),
            cap: options.max_dim,
        });
    }
    let pairs = couplings.pairs();
    in_sector(basis, |b| Ok(pair_sum_operator(b, &pairs, options.anisotropy)))
}

/// Sign convention for σ_y. Only `σy ⊗ σy` enters the Hamiltonian, which is
/// the same under either choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaYConvention {
    /// `[[0, -i], [i, 0]]`
    Standard,
    /// `[[0, i], [-i, 0]]`
    Flipped,
}

pub type Matrix2 = [[Complex64; 2]; 2];
pub type Matrix4 = [[Complex64; 4]; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn sigma_x() -> Matrix2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn sigma_y(convention: SigmaYConvention) -> Matrix2 {
    match convention {
        SigmaYConvention::Standard => [[ZERO, -I], [I, ZERO]],
        SigmaYConvention::Flipped => [[ZERO, I], [-I, ZERO]],
    }
}

pub fn sigma_z() -> Matrix2 {
    [[ONE, ZERO], [ZERO, -ONE]]
}

/// Raises a down-spin: `|↑⟩⟨↓|` with `|0⟩ = |↑⟩`.
pub fn sigma_plus() -> Matrix2 {
    [[ZERO, ONE], [ZERO, ZERO]]
}

pub fn sigma_minus() -> Matrix2 {
    [[ZERO, ZERO], [ONE, ZERO]]
}

/// `a ⊗ b`, the left factor acting on spin 1.
pub fn kron2(a: &Matrix2, b: &Matrix2) -> Matrix4 {
    let mut out = [[ZERO; 4]; 4];
    for (r1, row_a) in a.iter().enumerate() {
        for (c1, &x) in row_a.iter().enumerate() {
            for (r2, row_b) in b.iter().enumerate() {
                for (c2, &y) in row_b.iter().enumerate() {
                    out[2 * r1 + r2][2 * c1 + c2] = x * y;
                }
            }
        }
    }
    out
}

fn add4(a: &Matrix4, b: &Matrix4) -> Matrix4 {
    let mut out = *a;
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] += b[r][c];
        }
    }
    out
}

fn scale4(a: &Matrix4, s: Complex64) -> Matrix4 {
    a.map(|row| row.map(|x| x * s))
}

/// The six operator terms of the unapproximated two-spin dipolar
/// interaction, each already multiplied by `1/r³` (`d = 1`), in the basis
/// `{↑↑, ↑↓, ↓↑, ↓↓}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoSpinDipolar {
    /// `σz σz (1 - 3cos²θ)`
    pub a: Matrix4,
    /// `(σ+ σ- + σ- σ+)(3cos²θ - 1)`
    pub b: Matrix4,
    /// `3 (σ+ σz + σz σ+) sinθ cosθ e^{-iφ}`
    pub c: Matrix4,
    /// `3 (σ- σz + σz σ-) sinθ cosθ e^{iφ}`
    pub d: Matrix4,
    /// `-3 σ+ σ+ sin²θ e^{-2iφ}`
    pub e: Matrix4,
    /// `-3 σ- σ- sin²θ e^{2iφ}`
    pub f: Matrix4,
}

impl TwoSpinDipolar {
    pub fn total(&self) -> Matrix4 {
        [&self.b, &self.c, &self.d, &self.e, &self.f]
            .into_iter()
            .fold(self.a, |acc, t| add4(&acc, t))
    }

    /// The Sz-conserving part `A + B`.
    pub fn secular(&self) -> Matrix4 {
        add4(&self.a, &self.b)
    }
}

/// Full dipolar interaction of two spins at separation `r`, polar angle
/// `theta` from the field and azimuth `phi`.
pub fn two_spin_full_dipolar(theta: f64, phi: f64, r: f64) -> Result<TwoSpinDipolar> {
    if !(r > 0.0) {
        return Err(Error::Argument(format!("separation {r} must be > 0")));
    }
    let pre = 1.0 / (r * r * r);
    let (s, c) = theta.sin_cos();
    let geom = 3.0 * c * c - 1.0;
    let (sp, sm, sz) = (sigma_plus(), sigma_minus(), sigma_z());
    let hop = add4(&kron2(&sp, &sm), &kron2(&sm, &sp));
    let up_z = add4(&kron2(&sp, &sz), &kron2(&sz, &sp));
    let down_z = add4(&kron2(&sm, &sz), &kron2(&sz, &sm));
    let re = |x: f64| Complex64::new(pre * x, 0.0);
    Ok(TwoSpinDipolar {
        a: scale4(&kron2(&sz, &sz), re(-geom)),
        b: scale4(&hop, re(geom)),
        c: scale4(&up_z, re(3.0 * s * c) * Complex64::from_polar(1.0, -phi)),
        d: scale4(&down_z, re(3.0 * s * c) * Complex64::from_polar(1.0, phi)),
        e: scale4(&kron2(&sp, &sp), re(-3.0 * s * s) * Complex64::from_polar(1.0, -2.0 * phi)),
        f: scale4(&kron2(&sm, &sm), re(-3.0 * s * s) * Complex64::from_polar(1.0, 2.0 * phi)),
    })
}
