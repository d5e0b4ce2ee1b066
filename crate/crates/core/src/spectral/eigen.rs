use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};
use crate::operator::SectorOperator;

/// Ascending eigenvalues and the modal matrix (eigenvectors as columns, in
/// the sector basis).
#[derive(Clone, Debug)]
pub struct SpectralData {
    eigenvalues: Vec<f64>,
    vectors: Mat<f64>,
}

impl SpectralData {
    /// Wraps precomputed data; eigenvalues must be non-decreasing.
    pub fn new(eigenvalues: Vec<f64>, vectors: Mat<f64>) -> Result<Self> {
        if vectors.nrows() != eigenvalues.len() || vectors.ncols() != eigenvalues.len() {
            return Err(Error::Argument("modal matrix must be square and match the spectrum".into()));
        }
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Contract("eigenvalues must be non-decreasing".into()));
        }
        Ok(Self {
            eigenvalues,
            vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> MatRef<'_, f64> {
        self.vectors.as_ref()
    }

    /// Eigenvector `alpha` as a slice over the basis.
    pub fn vector(&self, alpha: usize) -> &[f64] {
        self.vectors.col_as_slice(alpha)
    }

    /// `c_i^α = ⟨i|E_α⟩`.
    pub fn component(&self, i: usize, alpha: usize) -> f64 {
        self.vectors[(i, alpha)]
    }

    /// `max |VᵀV - I|`.
    pub fn orthonormality_deviation(&self) -> f64 {
        let gram = self.vectors.transpose() * &self.vectors;
        let mut worst = 0.0f64;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }

    pub fn into_parts(self) -> (Vec<f64>, Mat<f64>) {
        (self.eigenvalues, self.vectors)
    }
}

/// Symmetric-input tolerance, relative to the largest entry.
const SYMMETRY_TOLERANCE: f64 = 1e-12;

pub fn eigendecompose(h: &SectorOperator) -> Result<SpectralData> {
    let scale = h.max_abs().max(1.0);
    let dev = h.symmetry_deviation();
    if dev > SYMMETRY_TOLERANCE * scale {
        return Err(Error::Contract(format!(
            "operator is not symmetric (max |A - Aᵀ| = {dev:e})"
        )));
    }
    eigendecompose_dense(h.to_dense())
}

/// Dense real symmetric eigendecomposition.
pub fn eigendecompose_dense(m: Mat<f64>) -> Result<SpectralData> {
    if m.nrows() != m.ncols() {
        return Err(Error::Argument("matrix must be square".into()));
    }
    let n = m.nrows();
    let scale = (0..n)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .fold(1.0f64, |acc, (i, j)| acc.max(m[(i, j)].abs()));
    for j in 0..n {
        for i in j + 1..n {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOLERANCE * scale {
                return Err(Error::Contract(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let eigenvalues: Vec<f64> = (0..n).map(|i| s[i]).collect();
    let vectors = evd.U().to_owned();
    SpectralData::new(eigenvalues, vectors)
}

/// Eigenvalues only, ascending.
pub fn eigenvalues(h: &SectorOperator) -> Result<Vec<f64>> {
    let m = h.to_dense();
    let vals = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{assemble_sector_hamiltonian, SpinGeometry};
    use crate::hilbert::sector_basis;

    #[test]
    fn two_by_two_all_minus_one() {
        let m = Mat::from_fn(2, 2, |_, _| -1.0);
        let s = eigendecompose_dense(m).unwrap();
        assert!((s.eigenvalues()[0] + 2.0).abs() < 1e-14);
        assert!(s.eigenvalues()[1].abs() < 1e-14);
    }

    #[test]
    fn identity_spectrum() {
        let s = eigendecompose_dense(Mat::identity(5, 5)).unwrap();
        assert!(s.eigenvalues().iter().all(|&e| (e - 1.0).abs() < 1e-14));
        assert!(s.orthonormality_deviation() < 1e-14);
    }

    #[test]
    fn non_symmetric_input_is_rejected() {
        let m = Mat::from_fn(3, 3, |i, j| (i * 3 + j) as f64);
        assert!(matches!(eigendecompose_dense(m), Err(Error::Contract(_))));
    }

    #[test]
    fn reconstruction_on_a_chain_sector() {
        let basis = sector_basis(10, 2).unwrap();
        let h = assemble_sector_hamiltonian(&SpinGeometry::chain(10).couplings().unwrap(), &basis)
            .unwrap();
        let s = eigendecompose(&h).unwrap();
        let dense = h.to_dense();
        let norm = h.norm_inf();
        let v = s.vectors();
        let mut lambda_vt = v.transpose().to_owned();
        for a in 0..s.dim() {
            for j in 0..s.dim() {
                lambda_vt[(a, j)] *= s.eigenvalues()[a];
            }
        }
        let recon = v * &lambda_vt;
        let mut worst = 0.0f64;
        for j in 0..s.dim() {
            for i in 0..s.dim() {
                worst = worst.max((recon[(i, j)] - dense[(i, j)]).abs());
            }
        }
        assert!(worst <= 1e-9 * norm, "reconstruction error {worst}");
        assert!(s.orthonormality_deviation() <= 1e-10);
        // per-pair residual
        let hv = &dense * v;
        for a in 0..s.dim() {
            for i in 0..s.dim() {
                let r = hv[(i, a)] - s.eigenvalues()[a] * v[(i, a)];
                assert!(r.abs() <= 1e-8 * norm);
            }
        }
    }
}
