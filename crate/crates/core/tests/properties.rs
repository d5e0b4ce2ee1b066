use proptest::prelude::*;

use spinchaos_core::hilbert::{sector_basis, sector_with_parity, BasisState, Parity};

fn sector() -> impl Strategy<Value = (usize, i32)> {
    (2usize..=14).prop_flat_map(|n| (Just(n), 0..=n)).prop_map(|(n, k)| (n, n as i32 - 2 * k as i32))
}

proptest! {
    #[test]
    fn rank_locates_every_state((n, sz) in sector(), pick in any::<prop::sample::Index>()) {
        let basis = sector_basis(n, sz).unwrap();
        let i = pick.index(basis.dim());
        let state = basis.elements()[i].state;
        prop_assert_eq!(basis.position(state), Some((i, 1.0)));
    }

    #[test]
    fn reflection_is_an_involution(n in 1usize..=20, raw in any::<u32>()) {
        let bits = raw & ((1u32 << n) - 1);
        let s = BasisState::new(bits, n).unwrap();
        prop_assert_eq!(s.reflect().reflect(), s);
        prop_assert_eq!(s.reflect().sz(), s.sz());
        let text = s.bitstring();
        prop_assert_eq!(BasisState::from_bitstring(&text).unwrap(), s);
        let reversed: String = text.chars().rev().collect();
        prop_assert_eq!(s.reflect().bitstring(), reversed);
    }

    #[test]
    fn parity_elements_are_orthonormal((n, sz) in sector(), parity in prop_oneof![Just(Parity::Symmetric), Just(Parity::Antisymmetric)]) {
        let basis = sector_with_parity(n, sz, parity).unwrap();
        for a in 0..basis.dim().min(40) {
            let u = basis.parent_vector(a);
            let norm: f64 = u.iter().map(|x| x * x).sum();
            prop_assert!((norm - 1.0).abs() < 1e-14);
            for b in a + 1..basis.dim().min(40) {
                let v = basis.parent_vector(b);
                let dot: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum();
                prop_assert!(dot.abs() < 1e-14);
            }
            let rep = basis.elements()[a].state;
            prop_assert!(rep.bits() <= rep.reflect().bits());
        }
    }
}
