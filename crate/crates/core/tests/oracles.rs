//! Sector machinery checked against dense full-space constructions.

mod common;

use common::{
    choose, full_hamiltonian, one_site_z, palindromes, restrict, rk4_series, secular_chain,
    states_with_weight, Dense,
};
use num_complex::Complex64;
use spinchaos_core::dynamics::{computational_state, evolve_local_spins, propagate, TimeGrid};
use spinchaos_core::hamiltonian::{
    assemble_sector_hamiltonian, assemble_with, chain_couplings, Anisotropy, AssemblyOptions,
    ChainVariant,
};
use spinchaos_core::hilbert::{
    binomial, palindrome_count, sector_basis, sector_with_parity, BasisState, Parity, SectorBasis,
};
use spinchaos_core::observables::{eigen_expectations, local_sigma_z};
use spinchaos_core::spectral::eigendecompose;
use spinchaos_core::SectorOperator;

fn max_diff(op: &SectorOperator, dense: &Dense) -> f64 {
    let m = op.to_dense();
    let mut worst = 0.0f64;
    for (i, row) in dense.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            worst = worst.max((m[(i, j)] - v).abs());
        }
    }
    worst
}

/// `Pᵀ H P` with the columns of `P` taken from the basis expansion.
fn projected(full_block: &Dense, basis: &SectorBasis) -> Dense {
    let cols: Vec<Vec<f64>> = (0..basis.dim()).map(|a| basis.parent_vector(a)).collect();
    let d = full_block.len();
    cols.iter()
        .map(|u| {
            cols.iter()
                .map(|v| {
                    let mut s = 0.0;
                    for i in 0..d {
                        for j in 0..d {
                            s += u[i] * full_block[i][j] * v[j];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

#[test]
fn sector_sizes_match_counting() {
    for n in 1..=14usize {
        for k in 0..=n {
            let sz = n as i32 - 2 * k as i32;
            let basis = sector_basis(n, sz).unwrap();
            assert_eq!(basis.dim(), choose(n, k), "N={n} k={k}");
            assert_eq!(binomial(n as u64, k as u64) as usize, choose(n, k));
            assert_eq!(palindrome_count(n, k) as usize, palindromes(n, k as u32), "N={n} k={k}");
            let sym = sector_with_parity(n, sz, Parity::Symmetric).unwrap().dim();
            let anti = sector_with_parity(n, sz, Parity::Antisymmetric).unwrap().dim();
            assert_eq!(sym + anti, basis.dim());
            assert_eq!(sym - anti, palindromes(n, k as u32));
        }
    }
}

#[test]
fn sector_states_are_ascending_weight_k_integers() {
    for (n, sz) in [(6, 0), (7, 1), (8, 2), (9, -3)] {
        let basis = sector_basis(n, sz).unwrap();
        let k = ((n as i32 - sz) / 2) as u32;
        let got: Vec<usize> = basis.states().map(|s| s.bits() as usize).collect();
        assert_eq!(got, states_with_weight(n, k));
    }
}

#[test]
fn sector_hamiltonian_matches_full_space_restriction() {
    for n in [4usize, 5, 6, 7] {
        for (variant, nn) in [(ChainVariant::LongRange, false), (ChainVariant::NearestNeighbor, true)] {
            let full = secular_chain(n, nn);
            let c = chain_couplings(n, variant, 3.0).unwrap();
            for k in 0..=n {
                let sz = n as i32 - 2 * k as i32;
                let basis = sector_basis(n, sz).unwrap();
                let h = assemble_sector_hamiltonian(&c, &basis).unwrap();
                let block = restrict(&full, &states_with_weight(n, k as u32));
                assert!(max_diff(&h, &block) < 1e-13, "N={n} k={k} nn={nn}");
            }
        }
    }
}

#[test]
fn xx_model_matches_full_space_restriction() {
    let n = 6;
    let c = chain_couplings(n, ChainVariant::LongRange, 3.0).unwrap();
    let full = full_hamiltonian(n, |i, j| common::chain_coupling(i, j, false), 1.0, 0.0);
    let basis = sector_basis(n, 0).unwrap();
    let opts = AssemblyOptions {
        anisotropy: Anisotropy::XX,
        ..AssemblyOptions::default()
    };
    let h = assemble_with(&c, &basis, &opts).unwrap();
    assert!(max_diff(&h, &restrict(&full, &states_with_weight(n, 3))) < 1e-13);
}

#[test]
fn parity_blocks_are_projections_of_the_full_block() {
    for (n, sz) in [(6usize, 0i32), (7, 1), (8, 2)] {
        let k = ((n as i32 - sz) / 2) as u32;
        let c = chain_couplings(n, ChainVariant::LongRange, 3.0).unwrap();
        let block = restrict(&secular_chain(n, false), &states_with_weight(n, k));
        for parity in [Parity::Symmetric, Parity::Antisymmetric] {
            let basis = sector_with_parity(n, sz, parity).unwrap();
            let h = assemble_sector_hamiltonian(&c, &basis).unwrap();
            assert!(max_diff(&h, &projected(&block, &basis)) < 1e-13, "N={n} {parity:?}");
        }
    }
}

#[test]
fn local_sigma_z_matches_full_space() {
    let n = 7;
    let basis = sector_basis(n, 1).unwrap();
    let states = states_with_weight(n, 3);
    for site in 1..=n {
        let op = local_sigma_z(site, &basis).unwrap();
        assert!(max_diff(&op, &restrict(&one_site_z(n, site), &states)) < 1e-15);
    }
}

#[test]
fn bitstrings_follow_site_order() {
    let s = BasisState::from_bitstring("0011").unwrap();
    assert_eq!(s.bits(), 0b0011);
    assert_eq!(s.spin_z(1), 1.0);
    assert_eq!(s.spin_z(4), -1.0);
    assert_eq!(s.reflect().bitstring(), "1100");
}

#[test]
fn eigen_evolution_matches_rk4() {
    let n = 6;
    let basis = sector_basis(n, 0).unwrap();
    let c = chain_couplings(n, ChainVariant::LongRange, 3.0).unwrap();
    let spectrum = eigendecompose(&assemble_sector_hamiltonian(&c, &basis).unwrap()).unwrap();
    let start = BasisState::from_bitstring("000111").unwrap();
    let psi0 = computational_state(&basis, start).unwrap();
    let grid = TimeGrid::new(2.0, 21).unwrap();
    let sites = [1, 3, 6];
    let ours = evolve_local_spins(&psi0, &sites, &basis, &spectrum, &grid).unwrap();

    let states = states_with_weight(n, 3);
    let h = restrict(&secular_chain(n, false), &states);
    for (k, &site) in sites.iter().enumerate() {
        let a = restrict(&one_site_z(n, site), &states);
        let reference = rk4_series(&h, &a, &psi0, 1e-3, 2000, 100);
        assert_eq!(reference.len(), 21);
        for (t, (x, y)) in ours.series(k).iter().zip(&reference).enumerate() {
            assert!((x - y).abs() < 1e-9, "site {site} step {t}: {x} vs {y}");
        }
    }
}

#[test]
fn propagation_is_reversible_and_unitary() {
    let n = 8;
    let basis = sector_basis(n, 2).unwrap();
    let c = chain_couplings(n, ChainVariant::LongRange, 3.0).unwrap();
    let spectrum = eigendecompose(&assemble_sector_hamiltonian(&c, &basis).unwrap()).unwrap();
    let psi0: Vec<Complex64> = (0..basis.dim())
        .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
        .collect();
    let norm = psi0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let psi0: Vec<Complex64> = psi0.iter().map(|z| z / norm).collect();

    let forward = propagate(&psi0, &spectrum, 7.3);
    let n1: f64 = forward.iter().map(|z| z.norm_sqr()).sum();
    assert!((n1 - 1.0).abs() < 1e-12);
    let back = propagate(&forward, &spectrum, -7.3);
    let err = back.iter().zip(&psi0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
}

#[test]
fn symmetric_sector_expectations_are_mirror_invariant() {
    let n = 9;
    let basis = sector_with_parity(n, 1, Parity::Symmetric).unwrap();
    let c = chain_couplings(n, ChainVariant::LongRange, 3.0).unwrap();
    let spectrum = eigendecompose(&assemble_sector_hamiltonian(&c, &basis).unwrap()).unwrap();
    for site in 1..=n / 2 {
        let a = eigen_expectations(&local_sigma_z(site, &basis).unwrap(), &spectrum).unwrap();
        let b = eigen_expectations(&local_sigma_z(n + 1 - site, &basis).unwrap(), &spectrum)
            .unwrap();
        let worst = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-12, "site {site}: {worst}");
    }
}
