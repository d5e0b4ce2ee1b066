//! Exact diagonalization of secular dipolar spin Hamiltonians in fixed-`S_z`
//! and reflection-parity sectors, with spectral, eigenvector, observable and
//! dynamical diagnostics of quantum chaos.
//!
//! Site `k` (1-based) is the `k`-th character of a written bit string and
//! bit `N - k` of the integer; bit `0` is spin up.

pub mod dynamics;
pub mod eigvec;
pub mod error;
pub mod hamiltonian;
pub mod hilbert;
pub mod observables;
pub mod operator;
pub mod spectral;

pub use error::{Error, Result};
pub use faer;
pub use hilbert::{BasisState, Parity, SectorBasis};
pub use operator::SectorOperator;
pub use spectral::SpectralData;
