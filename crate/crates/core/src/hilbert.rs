//! Computational basis, total-Sz sectors and reflection desymmetrization.
//!
//! A basis state is an `N`-bit string. Bit value `0` is an up-spin and `1` a
//! down-spin; site `k` (1-based) is the `k`-th character of the written
//! string, i.e. bit `N - k` of the integer. A sector with total spin `sz`
//! (counted in units of one, `n_up - n_down`) therefore holds every string
//! with exactly `(N - sz) / 2` set bits, listed in ascending integer order.

use std::fmt;
use std::sync::Arc;

use faer::Mat;

use crate::error::{Error, Result};
use crate::operator::SectorOperator;

/// Largest spin count a [`BasisState`] can address.
pub const MAX_SPINS: usize = 24;

/// `1/sqrt(2)`, the weight of each member of a reflection pair.
pub const PAIR_WEIGHT: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// One computational basis state of `N` spins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    bits: u32,
    n_spins: u8,
}

impl BasisState {
    pub fn new(bits: u32, n_spins: usize) -> Result<Self> {
        if n_spins == 0 || n_spins > MAX_SPINS {
            return Err(Error::Argument(format!(
                "spin count {n_spins} outside 1..={MAX_SPINS}"
            )));
        }
        if u64::from(bits) >= 1u64 << n_spins {
            return Err(Error::Argument(format!(
                "bits {bits} do not fit in {n_spins} spins"
            )));
        }
        Ok(Self {
            bits,
            n_spins: n_spins as u8,
        })
    }

    /// Parses a written bit string such as `"000000001111111"`.
    pub fn from_bitstring(s: &str) -> Result<Self> {
        let s = s.trim();
        let bits = u32::from_str_radix(s, 2)
            .map_err(|_| Error::Argument(format!("`{s}` is not a bit string")))?;
        Self::new(bits, s.len())
    }

    pub(crate) fn new_unchecked(bits: u32, n_spins: usize) -> Self {
        Self {
            bits,
            n_spins: n_spins as u8,
        }
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn n_spins(self) -> usize {
        usize::from(self.n_spins)
    }

    /// Number of down-spins.
    pub fn weight(self) -> u32 {
        self.bits.count_ones()
    }

    /// Total spin `n_up - n_down`.
    pub fn sz(self) -> i32 {
        self.n_spins as i32 - 2 * self.weight() as i32
    }

    pub fn is_down(self, site: usize) -> bool {
        self.bits & site_mask(self.n_spins(), site) != 0
    }

    /// `+1` for an up-spin at `site`, `-1` for a down-spin.
    pub fn spin_z(self, site: usize) -> f64 {
        if self.is_down(site) {
            -1.0
        } else {
            1.0
        }
    }

    pub fn reflect(self) -> Self {
        reflect_bits(self)
    }

    pub fn bitstring(self) -> String {
        format!("{:0width$b}", self.bits, width = self.n_spins())
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}⟩", self.bitstring())
    }
}

/// Bit mask of the 1-based `site` in an `n_spins`-bit string.
#[inline]
pub(crate) fn site_mask(n_spins: usize, site: usize) -> u32 {
    debug_assert!((1..=n_spins).contains(&site));
    1u32 << (n_spins - site)
}

/// Mirror image of `b` about the center of the chain: site `k` goes to
/// site `N + 1 - k`.
pub fn reflect_bits(b: BasisState) -> BasisState {
    let n = b.n_spins() as u32;
    let bits = b.bits.reverse_bits() >> (32 - n);
    BasisState::new_unchecked(bits, b.n_spins())
}

/// Binomial coefficient, exact for the sizes used here.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Position of `bits` among all strings of the same popcount in ascending
/// integer order (combinatorial number system).
#[inline]
pub(crate) fn colex_rank(bits: u32, binom: &BinomialTable) -> usize {
    let mut rank = 0;
    let mut rest = bits;
    let mut t = 1;
    while rest != 0 {
        let p = rest.trailing_zeros() as usize;
        rank += binom.get(p, t);
        rest &= rest - 1;
        t += 1;
    }
    rank
}

/// Small Pascal triangle for fast ranking.
#[derive(Debug, Clone)]
pub(crate) struct BinomialTable {
    size: usize,
    table: Vec<usize>,
}

impl BinomialTable {
    pub(crate) fn new(n: usize) -> Self {
        let size = n + 2;
        let mut table = vec![0usize; size * size];
        for i in 0..size {
            table[i * size] = 1;
            for j in 1..=i {
                table[i * size + j] = table[(i - 1) * size + j - 1] + table[(i - 1) * size + j];
            }
        }
        Self { size, table }
    }

    #[inline]
    pub(crate) fn get(&self, n: usize, k: usize) -> usize {
        if k > n {
            0
        } else {
            self.table[n * self.size + k]
        }
    }
}

/// Reflection parity of a desymmetrized basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    /// Plain computational basis of the sector.
    None,
    Symmetric,
    Antisymmetric,
}

impl Parity {
    fn pair_sign(self) -> f64 {
        match self {
            Parity::Antisymmetric => -1.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::None => "none",
            Parity::Symmetric => "symmetric",
            Parity::Antisymmetric => "antisymmetric",
        })
    }
}

/// A basis vector: either a single computational state, or the combination
/// `(state ± partner)/sqrt(2)` of a reflection pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisElement {
    pub state: BasisState,
    pub partner: Option<BasisState>,
}

/// Ordered basis of one total-Sz block, optionally restricted to one
/// reflection parity.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    n_spins: usize,
    sz: i32,
    parity: Parity,
    elements: Vec<BasisElement>,
    /// For desymmetrized bases: element index of every parent state, or
    /// `u32::MAX` when the state does not contribute to this parity.
    lookup: Option<Arc<Vec<u32>>>,
    binom: Arc<BinomialTable>,
}

impl PartialEq for SectorBasis {
    fn eq(&self, other: &Self) -> bool {
        self.n_spins == other.n_spins
            && self.sz == other.sz
            && self.parity == other.parity
            && self.elements == other.elements
    }
}

/// Default block: `sz = +1` for odd `N`, `sz = +2` for even `N`.
pub fn default_sz(n_spins: usize) -> i32 {
    if n_spins % 2 == 1 {
        1
    } else {
        2
    }
}

/// Enumerates the total-Sz block `sz` of `n_spins` spins.
pub fn sector_basis(n_spins: usize, sz: i32) -> Result<SectorBasis> {
    let invalid = |reason| Error::InvalidSector { n_spins, sz, reason };
    if n_spins == 0 || n_spins > MAX_SPINS {
        return Err(invalid("spin count outside 1..=24"));
    }
    if sz.unsigned_abs() as usize > n_spins {
        return Err(invalid("|sz| exceeds N"));
    }
    if (n_spins as i32 - sz) % 2 != 0 {
        return Err(invalid("N - sz must be even"));
    }
    let downs = ((n_spins as i32 - sz) / 2) as u32;
    let dim = binomial(n_spins as u64, u64::from(downs)) as usize;
    let mut elements = Vec::with_capacity(dim);
    let mut bits: u32 = if downs == 0 { 0 } else { (1u32 << downs) - 1 };
    let limit = 1u64 << n_spins;
    loop {
        elements.push(BasisElement {
            state: BasisState::new_unchecked(bits, n_spins),
            partner: None,
        });
        if downs == 0 || elements.len() == dim {
            break;
        }
        bits = next_same_popcount(bits);
        debug_assert!(u64::from(bits) < limit);
    }
    Ok(SectorBasis {
        n_spins,
        sz,
        parity: Parity::None,
        elements,
        lookup: None,
        binom: Arc::new(BinomialTable::new(n_spins)),
    })
}

/// Next larger integer with the same popcount (Gosper's hack).
fn next_same_popcount(x: u32) -> u32 {
    let c = x & x.wrapping_neg();
    let r = x + c;
    (((r ^ x) >> 2) / c) | r
}

impl SectorBasis {
    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn sz(&self) -> i32 {
        self.sz
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// Number of down-spins in every state of the block.
    pub fn down_count(&self) -> usize {
        (self.n_spins as i32 - self.sz) as usize / 2
    }

    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    /// Representative computational state of every element.
    pub fn states(&self) -> impl ExactSizeIterator<Item = BasisState> + '_ {
        self.elements.iter().map(|e| e.state)
    }

    pub fn is_desymmetrized(&self) -> bool {
        self.parity != Parity::None
    }

    /// The plain computational basis of the same total-Sz block.
    pub fn parent(&self) -> SectorBasis {
        match self.parity {
            Parity::None => self.clone(),
            _ => sector_basis(self.n_spins, self.sz).expect("valid sector"),
        }
    }

    /// Index of a state of the parent block (ascending-integer rank).
    #[inline]
    pub(crate) fn parent_rank(&self, bits: u32) -> usize {
        colex_rank(bits, &self.binom)
    }

    /// Element index of a computational state together with its expansion
    /// coefficient, or `None` if the state has no overlap with this basis.
    pub fn position(&self, state: BasisState) -> Option<(usize, f64)> {
        if state.n_spins() != self.n_spins || state.sz() != self.sz {
            return None;
        }
        let rank = self.parent_rank(state.bits());
        match &self.lookup {
            None => Some((rank, 1.0)),
            Some(lookup) => {
                let idx = lookup[rank];
                if idx == u32::MAX {
                    return None;
                }
                let e = &self.elements[idx as usize];
                let coef = match e.partner {
                    None => 1.0,
                    Some(_) if e.state == state => PAIR_WEIGHT,
                    Some(_) => self.parity.pair_sign() * PAIR_WEIGHT,
                };
                Some((idx as usize, coef))
            }
        }
    }

    /// Expansion of element `idx` in computational states.
    pub fn components(&self, idx: usize) -> Components {
        let e = self.elements[idx];
        match e.partner {
            None => Components {
                items: [(e.state, 1.0), (e.state, 0.0)],
                len: 1,
            },
            Some(p) => Components {
                items: [
                    (e.state, PAIR_WEIGHT),
                    (p, self.parity.pair_sign() * PAIR_WEIGHT),
                ],
                len: 2,
            },
        }
    }

    /// Dense column vector of element `idx` over the parent basis.
    pub fn parent_vector(&self, idx: usize) -> Vec<f64> {
        let dim = binomial(self.n_spins as u64, self.down_count() as u64) as usize;
        let mut v = vec![0.0; dim];
        for (s, c) in self.components(idx) {
            v[self.parent_rank(s.bits())] = c;
        }
        v
    }
}

/// At most two `(state, coefficient)` pairs.
#[derive(Clone, Copy, Debug)]
pub struct Components {
    items: [(BasisState, f64); 2],
    len: usize,
}

impl IntoIterator for Components {
    type Item = (BasisState, f64);
    type IntoIter = std::iter::Take<std::array::IntoIter<(BasisState, f64), 2>>;

    fn into_iter(self) -> Self::IntoIter {
        self.items.into_iter().take(self.len)
    }
}

/// Orthogonal change of basis from a computational block to its symmetric
/// and antisymmetric reflection sub-blocks.
#[derive(Clone, Debug)]
pub struct SymmetrySectorTransform {
    source: SectorBasis,
    symmetric: SectorBasis,
    antisymmetric: SectorBasis,
}

impl SymmetrySectorTransform {
    /// Pairs each state with its mirror image. Walking the block in
    /// ascending order, a palindrome goes to the symmetric list; otherwise
    /// the first member seen becomes the representative of the pair.
    pub fn new(source: &SectorBasis) -> Result<Self> {
        if source.is_desymmetrized() {
            return Err(Error::Argument(
                "source basis is already desymmetrized".into(),
            ));
        }
        let dim = source.dim();
        let mut seen = vec![false; dim];
        let mut sym = Vec::with_capacity(dim / 2 + 1);
        let mut anti = Vec::with_capacity(dim / 2);
        let mut sym_lookup = vec![u32::MAX; dim];
        let mut anti_lookup = vec![u32::MAX; dim];
        for (k, b) in source.states().enumerate() {
            if seen[k] {
                continue;
            }
            let r = b.reflect();
            if r == b {
                sym_lookup[k] = sym.len() as u32;
                sym.push(BasisElement {
                    state: b,
                    partner: None,
                });
                seen[k] = true;
            } else {
                let kr = source.parent_rank(r.bits());
                seen[k] = true;
                seen[kr] = true;
                let element = BasisElement {
                    state: b,
                    partner: Some(r),
                };
                sym_lookup[k] = sym.len() as u32;
                sym_lookup[kr] = sym.len() as u32;
                anti_lookup[k] = anti.len() as u32;
                anti_lookup[kr] = anti.len() as u32;
                sym.push(element);
                anti.push(element);
            }
        }
        let make = |parity, elements, lookup| SectorBasis {
            n_spins: source.n_spins,
            sz: source.sz,
            parity,
            elements,
            lookup: Some(Arc::new(lookup)),
            binom: source.binom.clone(),
        };
        Ok(Self {
            source: source.clone(),
            symmetric: make(Parity::Symmetric, sym, sym_lookup),
            antisymmetric: make(Parity::Antisymmetric, anti, anti_lookup),
        })
    }

    pub fn source(&self) -> &SectorBasis {
        &self.source
    }

    pub fn symmetric(&self) -> &SectorBasis {
        &self.symmetric
    }

    pub fn antisymmetric(&self) -> &SectorBasis {
        &self.antisymmetric
    }

    pub fn block(&self, parity: Parity) -> &SectorBasis {
        match parity {
            Parity::None => &self.source,
            Parity::Symmetric => &self.symmetric,
            Parity::Antisymmetric => &self.antisymmetric,
        }
    }

    /// Dense orthogonal matrix `U` whose rows are the symmetric elements
    /// followed by the antisymmetric ones, expressed over the source basis.
    pub fn matrix(&self) -> Mat<f64> {
        let dim = self.source.dim();
        let mut u = Mat::<f64>::zeros(dim, dim);
        let blocks = [&self.symmetric, &self.antisymmetric];
        let mut row = 0;
        for block in blocks {
            for idx in 0..block.dim() {
                for (s, c) in block.components(idx) {
                    u[(row, self.source.parent_rank(s.bits()))] = c;
                }
                row += 1;
            }
        }
        u
    }

    /// Restriction `U_rows A U_colsᵀ` of an operator on the source basis.
    fn project_between(
        &self,
        op: &SectorOperator,
        rows: &SectorBasis,
        cols: &SectorBasis,
    ) -> Vec<Vec<(usize, f64)>> {
        let mut out = Vec::with_capacity(rows.dim());
        let mut acc: Vec<f64> = vec![0.0; cols.dim()];
        let mut marked = vec![false; cols.dim()];
        let mut touched: Vec<usize> = Vec::new();
        for a in 0..rows.dim() {
            for (s, ca) in rows.components(a) {
                let l = self.source.parent_rank(s.bits());
                for (k, v) in op.row(l) {
                    let state = self.source.elements[k].state;
                    if let Some((r, cr)) = cols.position(state) {
                        if !marked[r] {
                            marked[r] = true;
                            touched.push(r);
                        }
                        acc[r] += ca * v * cr;
                    }
                }
            }
            touched.sort_unstable();
            let row: Vec<(usize, f64)> = touched.iter().map(|&r| (r, acc[r])).collect();
            for &r in &touched {
                acc[r] = 0.0;
                marked[r] = false;
            }
            touched.clear();
            out.push(row);
        }
        out
    }

    /// Operator restricted to one parity block.
    pub fn project(&self, op: &SectorOperator, parity: Parity) -> Result<SectorOperator> {
        if op.basis() != &self.source {
            return Err(Error::Argument(
                "operator is not expressed in the transform's source basis".into(),
            ));
        }
        let block = self.block(parity);
        if parity == Parity::None {
            return Ok(op.clone());
        }
        let rows = self.project_between(op, block, block);
        Ok(SectorOperator::from_rows(block.clone(), rows))
    }

    /// Largest magnitude of the symmetric/antisymmetric cross block.
    pub fn cross_block_max(&self, op: &SectorOperator) -> f64 {
        self.project_between(op, &self.symmetric, &self.antisymmetric)
            .iter()
            .flatten()
            .fold(0.0f64, |m, &(_, v)| m.max(v.abs()))
    }
}

/// Largest `|A[k][l] - A[r(k)][r(l)]|` over the nonzero pattern, i.e. how far
/// `A` is from commuting with the reflection permutation.
pub fn reflection_deviation(op: &SectorOperator) -> f64 {
    let basis = op.basis();
    let mut worst = 0.0f64;
    for k in 0..op.dim() {
        let rk = basis.parent_rank(basis.elements[k].state.reflect().bits());
        for (l, v) in op.row(k) {
            let rl = basis.parent_rank(basis.elements[l].state.reflect().bits());
            worst = worst.max((v - op.get(rk, rl)).abs());
        }
    }
    worst
}

/// Tolerance on the reflection commutator accepted by [`desymmetrize`].
pub const REFLECTION_TOLERANCE: f64 = 1e-10;

/// Splits a reflection-invariant operator on a computational block into its
/// symmetric and antisymmetric blocks.
pub fn desymmetrize(op: &SectorOperator) -> Result<(SectorOperator, SectorOperator)> {
    let basis = op.basis();
    if basis.is_desymmetrized() {
        return Err(Error::Argument("basis is already desymmetrized".into()));
    }
    let deviation = reflection_deviation(op);
    if deviation > REFLECTION_TOLERANCE {
        return Err(Error::SymmetryViolation { deviation });
    }
    let transform = SymmetrySectorTransform::new(basis)?;
    let sym = transform.project(op, Parity::Symmetric)?;
    let anti = transform.project(op, Parity::Antisymmetric)?;
    Ok((sym, anti))
}

/// Restricts a basis to the given parity; `Parity::None` returns the block.
pub fn sector_with_parity(n_spins: usize, sz: i32, parity: Parity) -> Result<SectorBasis> {
    let block = sector_basis(n_spins, sz)?;
    match parity {
        Parity::None => Ok(block),
        p => Ok(SymmetrySectorTransform::new(&block)?.block(p).clone()),
    }
}

/// Number of reflection-invariant strings of length `n` with `k` set bits.
pub fn palindrome_count(n: usize, k: usize) -> u64 {
    let half = n / 2;
    if n % 2 == 0 {
        if k % 2 == 1 {
            0
        } else {
            binomial(half as u64, (k / 2) as u64)
        }
    } else {
        // the middle bit carries the parity of k
        binomial(half as u64, (k / 2) as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits_of(basis: &SectorBasis) -> Vec<u32> {
        basis.states().map(|s| s.bits()).collect()
    }

    #[test]
    fn four_spin_plus_two_block() {
        let b = sector_basis(4, 2).unwrap();
        assert_eq!(bits_of(&b), vec![1, 2, 4, 8]);
        let strings: Vec<String> = b.states().map(|s| s.bitstring()).collect();
        assert_eq!(strings, ["0001", "0010", "0100", "1000"]);
    }

    #[test]
    fn two_spin_balanced_block() {
        let b = sector_basis(2, 0).unwrap();
        assert_eq!(bits_of(&b), vec![1, 2]);
        assert_eq!(b.dim(), 2);
    }

    #[test]
    fn fifteen_spin_block_dimension() {
        assert_eq!(binomial(15, 7), 6435);
        assert_eq!(sector_basis(15, 1).unwrap().dim(), 6435);
    }

    #[test]
    fn parity_mismatch_is_rejected() {
        assert!(matches!(
            sector_basis(4, 1),
            Err(Error::InvalidSector { .. })
        ));
        assert!(sector_basis(3, 5).is_err());
    }

    #[test]
    fn extreme_sectors() {
        assert_eq!(bits_of(&sector_basis(5, 5).unwrap()), vec![0]);
        assert_eq!(bits_of(&sector_basis(5, -5).unwrap()), vec![31]);
    }

    #[test]
    fn reflection_examples() {
        let r = |s| reflect_bits(BasisState::from_bitstring(s).unwrap()).bitstring();
        assert_eq!(r("0011"), "1100");
        assert_eq!(r("0110"), "0110");
        assert_eq!(r("100"), "001");
    }

    #[test]
    fn site_addressing_is_left_to_right() {
        let s = BasisState::from_bitstring("1000").unwrap();
        assert!(s.is_down(1));
        assert!(!s.is_down(4));
        assert_eq!(s.spin_z(1), -1.0);
        assert_eq!(s.spin_z(2), 1.0);
    }

    #[test]
    fn rank_matches_enumeration_order() {
        let b = sector_basis(12, 2).unwrap();
        for (i, s) in b.states().enumerate() {
            assert_eq!(b.parent_rank(s.bits()), i);
            assert_eq!(b.position(s), Some((i, 1.0)));
        }
    }

    #[test]
    fn desymmetrized_four_spin_block() {
        let t = SymmetrySectorTransform::new(&sector_basis(4, 2).unwrap()).unwrap();
        assert_eq!(t.symmetric().dim(), 2);
        assert_eq!(t.antisymmetric().dim(), 2);
        let e = t.symmetric().elements()[0];
        assert_eq!(e.state.bitstring(), "0001");
        assert_eq!(e.partner.unwrap().bitstring(), "1000");
        let e = t.symmetric().elements()[1];
        assert_eq!(e.state.bitstring(), "0010");
        assert_eq!(e.partner.unwrap().bitstring(), "0100");
    }

    #[test]
    fn palindromes_join_the_symmetric_list_in_order() {
        let t = SymmetrySectorTransform::new(&sector_basis(4, 0).unwrap()).unwrap();
        // 0011 1100 | 0101 1010 | 0110 | 1001
        let sym: Vec<String> = t.symmetric().states().map(|s| s.bitstring()).collect();
        assert_eq!(sym, ["0011", "0101", "0110", "1001"]);
        assert_eq!(t.antisymmetric().dim(), 2);
    }

    #[test]
    fn transform_is_orthogonal() {
        let t = SymmetrySectorTransform::new(&sector_basis(9, 1).unwrap()).unwrap();
        let u = t.matrix();
        let d = u.nrows();
        let prod = &u * u.transpose();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - target).abs());
            }
        }
        assert!(worst <= 1e-12, "max |UUᵀ - I| = {worst}");
    }

    #[test]
    fn position_reports_signed_coefficients() {
        let t = SymmetrySectorTransform::new(&sector_basis(4, 2).unwrap()).unwrap();
        let s = BasisState::from_bitstring("1000").unwrap();
        assert_eq!(t.symmetric().position(s), Some((0, PAIR_WEIGHT)));
        assert_eq!(t.antisymmetric().position(s), Some((0, -PAIR_WEIGHT)));
    }

    #[test]
    fn palindrome_counts_match_enumeration() {
        for n in 1..=12usize {
            for k in 0..=n {
                let brute = (0u32..1 << n)
                    .filter(|b| b.count_ones() as usize == k)
                    .filter(|&b| {
                        let s = BasisState::new(b, n).unwrap();
                        s.reflect() == s
                    })
                    .count() as u64;
                assert_eq!(palindrome_count(n, k), brute, "n={n} k={k}");
            }
        }
    }
}
