//! Coordinate Riesz space ℝⁿ with the componentwise order.
//!
//! Vectors, lattice operations, components of a positive element,
//! positive and disjoint partitions, and band projections onto coordinate
//! supports.

use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{Scalar, Tolerance};

/// Largest dimension accepted by the component and partition generators.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Element of a coordinate lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeVector<S> {
    entries: Vec<S>,
}

impl<S: Scalar> LatticeVector<S> {
    pub fn new(entries: Vec<S>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyDimension);
        }
        Ok(Self { entries })
    }

    pub fn from_ints(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| S::from_int(v)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "zero-dimensional lattice");
        Self {
            entries: vec![S::zero(); dim],
        }
    }

    /// The all-ones strong unit.
    pub fn ones(dim: usize) -> Self {
        assert!(dim > 0, "zero-dimensional lattice");
        Self {
            entries: vec![S::one(); dim],
        }
    }

    pub fn unit(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut v = Self::zeros(dim);
        v.entries[index] = S::one();
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<S> {
        self.entries
    }

    pub fn get(&self, i: usize) -> &S {
        &self.entries[i]
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Self {
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.min_of(b))
    }

    pub fn join(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.max_of(b))
    }

    pub fn abs(&self) -> Self {
        self.map(|a| a.abs())
    }

    /// `u⁺ = u ∨ 0`
    pub fn pos_part(&self) -> Self {
        self.map(|a| a.max_of(&S::zero()))
    }

    /// `u⁻ = (−u) ∨ 0`
    pub fn neg_part(&self) -> Self {
        self.map(|a| (-a.clone()).max_of(&S::zero()))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|a| a.clone() * s.clone())
    }

    /// Inner product `⟨self, other⟩`.
    pub fn dot(&self, other: &Self) -> Result<S> {
        self.check_dim(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
    }

    pub fn sum(&self) -> S {
        self.entries
            .iter()
            .fold(S::zero(), |acc, a| acc + a.clone())
    }

    pub fn is_positive(&self, tol: Tolerance) -> bool {
        self.entries.iter().all(|a| a.is_nonneg(tol))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|a| a.is_zero())
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &Self, tol: Tolerance) -> Result<bool> {
        self.check_dim(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .all(|(a, b)| a.le_tol(b, tol)))
    }

    pub fn eq_tol(&self, other: &Self, tol: Tolerance) -> Result<bool> {
        self.check_dim(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .all(|(a, b)| a.eq_tol(b, tol)))
    }

    /// Indices of nonzero entries.
    pub fn support(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(i, _)| i)
            .collect()
    }

    /// Keeps the entries whose index is in `indices`.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let mut out = Self::zeros(self.dim());
        for &i in indices {
            out.entries[i] = self.entries[i].clone();
        }
        out
    }

    /// Largest absolute entrywise difference, as a float.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a.clone() - b.clone()).abs().to_f64())
            .fold(0.0, f64::max))
    }

    pub fn to_f64(&self) -> LatticeVector<f64> {
        LatticeVector {
            entries: self.entries.iter().map(Scalar::to_f64).collect(),
        }
    }
}

impl<S: Scalar> Add for &LatticeVector<S> {
    type Output = LatticeVector<S>;
    fn add(self, rhs: Self) -> LatticeVector<S> {
        self.try_add(rhs).expect("dimension mismatch in vector addition")
    }
}

impl<S: Scalar> Sub for &LatticeVector<S> {
    type Output = LatticeVector<S>;
    fn sub(self, rhs: Self) -> LatticeVector<S> {
        self.try_sub(rhs)
            .expect("dimension mismatch in vector subtraction")
    }
}

impl<S: Scalar> Neg for &LatticeVector<S> {
    type Output = LatticeVector<S>;
    fn neg(self) -> LatticeVector<S> {
        self.map(|a| -a.clone())
    }
}

/// A component `piece` of a positive `base`: `piece ∧ (base − piece) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Component<S> {
    pub base: LatticeVector<S>,
    pub piece: LatticeVector<S>,
}

impl<S: Scalar> Component<S> {
    /// Checks the component identity and `0 ≤ piece ≤ base`.
    pub fn is_valid(&self) -> bool {
        let rest = &self.base - &self.piece;
        let meet = self.piece.meet(&rest).expect("component dims");
        meet.is_zero()
            && self.piece.is_positive(Tolerance::EXACT)
            && rest.is_positive(Tolerance::EXACT)
    }
}

/// Lazily yields every component of `base`, one per subset of its support.
#[derive(Debug, Clone)]
pub struct Components<S> {
    base: LatticeVector<S>,
    support: Vec<usize>,
    next_mask: u64,
    end: u64,
}

impl<S: Scalar> Iterator for Components<S> {
    type Item = Component<S>;

    fn next(&mut self) -> Option<Component<S>> {
        if self.next_mask >= self.end {
            return None;
        }
        let mask = self.next_mask;
        self.next_mask += 1;
        let chosen: Vec<usize> = self
            .support
            .iter()
            .enumerate()
            .filter(|(bit, _)| mask >> bit & 1 == 1)
            .map(|(_, &i)| i)
            .collect();
        Some(Component {
            piece: self.base.restrict(&chosen),
            base: self.base.clone(),
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next_mask) as usize;
        (left, Some(left))
    }
}

pub fn enumerate_components<S: Scalar>(e: &LatticeVector<S>) -> Result<Components<S>> {
    enumerate_components_capped(e, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_components_capped<S: Scalar>(
    e: &LatticeVector<S>,
    cap: usize,
) -> Result<Components<S>> {
    if e.dim() > cap || e.dim() > 63 {
        return Err(Error::EnumerationLimit {
            dim: e.dim(),
            cap: cap.min(63),
        });
    }
    if !e.is_positive(Tolerance::EXACT) {
        return Err(Error::NotPositive("component base"));
    }
    let support = e.support();
    Ok(Components {
        end: 1u64 << support.len(),
        base: e.clone(),
        support,
        next_mask: 0,
    })
}

/// Finite positive decomposition of a positive target.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition<S> {
    target: LatticeVector<S>,
    pieces: Vec<LatticeVector<S>>,
}

impl<S: Scalar> Partition<S> {
    /// Validates positivity of every piece and `Σ pieces = target`.
    pub fn new(
        target: LatticeVector<S>,
        pieces: Vec<LatticeVector<S>>,
        tol: Tolerance,
    ) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidPartition("no pieces".into()));
        }
        if !target.is_positive(tol) {
            return Err(Error::NotPositive("partition target"));
        }
        let mut sum = LatticeVector::zeros(target.dim());
        for p in &pieces {
            if !p.is_positive(tol) {
                return Err(Error::InvalidPartition("negative piece".into()));
            }
            sum = sum.try_add(p)?;
        }
        if !sum.eq_tol(&target, tol)? {
            return Err(Error::InvalidPartition(
                "pieces do not sum to the target".into(),
            ));
        }
        Ok(Self { target, pieces })
    }

    /// The one-piece partition `{w}`.
    pub fn trivial(target: &LatticeVector<S>) -> Self {
        Self {
            target: target.clone(),
            pieces: vec![target.clone()],
        }
    }

    pub(crate) fn from_parts_unchecked(
        target: LatticeVector<S>,
        pieces: Vec<LatticeVector<S>>,
    ) -> Self {
        Self { target, pieces }
    }

    pub fn target(&self) -> &LatticeVector<S> {
        &self.target
    }

    pub fn pieces(&self) -> &[LatticeVector<S>] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn sums_to_target(&self, tol: Tolerance) -> bool {
        let sum = self
            .pieces
            .iter()
            .fold(LatticeVector::zeros(self.target.dim()), |acc, p| &acc + p);
        sum.eq_tol(&self.target, tol).unwrap_or(false)
    }

    pub fn is_pairwise_disjoint(&self) -> bool {
        for (j, a) in self.pieces.iter().enumerate() {
            for b in &self.pieces[j + 1..] {
                if !a.abs().meet(&b.abs()).map(|m| m.is_zero()).unwrap_or(false) {
                    return false;
                }
            }
        }
        true
    }
}

/// Splits `w` into its nonzero coordinate atoms.
///
/// A zero target yields the single zero piece.
pub fn atomic_partition<S: Scalar>(w: &LatticeVector<S>) -> Partition<S> {
    let support = w.support();
    if support.is_empty() {
        return Partition::trivial(w);
    }
    let pieces = support.iter().map(|&i| w.restrict(&[i])).collect();
    Partition::from_parts_unchecked(w.clone(), pieces)
}

/// Lazily yields the partitions of `e` into at most `max_parts` pairwise
/// disjoint components, one per set partition of its support.
#[derive(Debug, Clone)]
pub struct DisjointPartitions<S> {
    target: LatticeVector<S>,
    support: Vec<usize>,
    max_parts: usize,
    // restricted growth string over the support; None once exhausted
    rgs: Option<Vec<usize>>,
}

impl<S: Scalar> DisjointPartitions<S> {
    fn build(&self, rgs: &[usize]) -> Partition<S> {
        let blocks = rgs.iter().copied().max().map_or(0, |m| m + 1);
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); blocks];
        for (pos, &b) in rgs.iter().enumerate() {
            groups[b].push(self.support[pos]);
        }
        let pieces = groups.iter().map(|g| self.target.restrict(g)).collect();
        Partition::from_parts_unchecked(self.target.clone(), pieces)
    }

    /// Next restricted growth string with at most `max_parts` blocks.
    fn advance(rgs: &mut [usize], max_parts: usize) -> bool {
        let n = rgs.len();
        for i in (1..n).rev() {
            let prefix_max = rgs[..i].iter().copied().max().unwrap_or(0);
            if rgs[i] <= prefix_max && rgs[i] + 1 < max_parts {
                rgs[i] += 1;
                for r in rgs[i + 1..].iter_mut() {
                    *r = 0;
                }
                return true;
            }
        }
        false
    }
}

impl<S: Scalar> Iterator for DisjointPartitions<S> {
    type Item = Partition<S>;

    fn next(&mut self) -> Option<Partition<S>> {
        let rgs = self.rgs.as_mut()?;
        if self.support.is_empty() {
            self.rgs = None;
            return Some(Partition::trivial(&self.target));
        }
        let current = rgs.clone();
        if !Self::advance(rgs, self.max_parts) {
            self.rgs = None;
        }
        Some(self.build(&current))
    }
}

pub fn disjoint_partitions<S: Scalar>(
    e: &LatticeVector<S>,
    max_parts: usize,
) -> Result<DisjointPartitions<S>> {
    disjoint_partitions_capped(e, max_parts, DEFAULT_ENUMERATION_CAP)
}

pub fn disjoint_partitions_capped<S: Scalar>(
    e: &LatticeVector<S>,
    max_parts: usize,
    cap: usize,
) -> Result<DisjointPartitions<S>> {
    if e.dim() > cap {
        return Err(Error::EnumerationLimit { dim: e.dim(), cap });
    }
    if !e.is_positive(Tolerance::EXACT) {
        return Err(Error::NotPositive("partition target"));
    }
    let support = e.support();
    let rgs = if max_parts == 0 && !support.is_empty() {
        None
    } else {
        Some(vec![0; support.len()])
    };
    Ok(DisjointPartitions {
        target: e.clone(),
        support,
        max_parts: max_parts.max(1),
        rgs,
    })
}

/// Order projection onto the band of vectors supported on `support`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandProjection {
    dim: usize,
    support: Vec<usize>,
}

impl BandProjection {
    pub fn new(dim: usize, support: impl IntoIterator<Item = usize>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        let mut support: Vec<usize> = support.into_iter().collect();
        support.sort_unstable();
        support.dedup();
        if let Some(&bad) = support.iter().find(|&&i| i >= dim) {
            return Err(Error::IndexOutOfRange { index: bad, dim });
        }
        Ok(Self { dim, support })
    }

    /// Projection onto the band generated by `v⁺`.
    pub fn onto_positive_part<S: Scalar>(v: &LatticeVector<S>) -> Self {
        let support = v
            .entries()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_positive())
            .map(|(i, _)| i);
        Self::new(v.dim(), support).expect("indices within dim")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Projection onto the complementary band.
    pub fn complement(&self) -> Self {
        Self {
            dim: self.dim,
            support: (0..self.dim)
                .filter(|i| self.support.binary_search(i).is_err())
                .collect(),
        }
    }

    pub fn apply<S: Scalar>(&self, x: &LatticeVector<S>) -> Result<LatticeVector<S>> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(x.restrict(&self.support))
    }

    /// Diagonal 0/1 matrix of the projection, row-major.
    pub fn matrix_entries<S: Scalar>(&self) -> Vec<Vec<S>> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| {
                        if i == j && self.support.binary_search(&i).is_ok() {
                            S::one()
                        } else {
                            S::zero()
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type V = LatticeVector<Rational>;

    fn v(xs: &[i64]) -> V {
        V::from_ints(xs).unwrap()
    }

    #[test]
    fn meet_and_join_examples() {
        assert_eq!(v(&[1, -2]).meet(&v(&[0, 5])).unwrap(), v(&[0, -2]));
        let x = v(&[4, -1, 0]);
        assert_eq!(x.meet(&x).unwrap(), x);
        assert_eq!(v(&[1, 0]).meet(&v(&[0, 1])).unwrap(), v(&[0, 0]));
        assert_eq!(v(&[1, -2]).join(&v(&[0, 5])).unwrap(), v(&[1, 5]));
    }

    #[test]
    fn modulus_and_parts() {
        let u = v(&[1, -2]);
        assert_eq!(u.abs(), v(&[1, 2]));
        assert_eq!(u.pos_part(), v(&[1, 0]));
        assert_eq!(u.neg_part(), v(&[0, 2]));
        let u = v(&[3, -4]);
        assert_eq!(&u.pos_part() - &u.neg_part(), u);
        assert!(u.pos_part().meet(&u.neg_part()).unwrap().is_zero());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(matches!(
            v(&[1]).meet(&v(&[1, 2])),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        ));
        assert!(v(&[1]).join(&v(&[1, 2])).is_err());
        assert!(LatticeVector::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn components_of_small_units() {
        let got: Vec<V> = enumerate_components(&v(&[1, 1]))
            .unwrap()
            .map(|c| c.piece)
            .collect();
        assert_eq!(got, vec![v(&[0, 0]), v(&[1, 0]), v(&[0, 1]), v(&[1, 1])]);
        let got: Vec<V> = enumerate_components(&v(&[1, 0]))
            .unwrap()
            .map(|c| c.piece)
            .collect();
        assert_eq!(got, vec![v(&[0, 0]), v(&[1, 0])]);
    }

    #[test]
    fn components_match_grid_oracle() {
        // every integer grid point x with 0 ≤ x ≤ e and x ∧ (e − x) = 0
        let e = v(&[2, 3]);
        let mut oracle = Vec::new();
        for a in 0..=2 {
            for b in 0..=3 {
                let x = v(&[a, b]);
                if x.meet(&(&e - &x)).unwrap().is_zero() {
                    oracle.push(x);
                }
            }
        }
        let mut got: Vec<V> = enumerate_components(&e).unwrap().map(|c| c.piece).collect();
        let key = |x: &V| format!("{:?}", x);
        oracle.sort_by_key(key);
        got.sort_by_key(key);
        assert_eq!(got, oracle);
        assert_eq!(got.len(), 4);
    }

    #[test]
    fn component_cap_is_enforced() {
        let e = LatticeVector::<Rational>::ones(21);
        assert!(matches!(
            enumerate_components(&e),
            Err(Error::EnumerationLimit { dim: 21, cap: 20 })
        ));
        assert!(enumerate_components_capped(&v(&[1, 1, 1]), 2).is_err());
        assert!(enumerate_components(&v(&[1, -1])).is_err());
    }

    #[test]
    fn disjoint_partitions_small_cases() {
        let parts: Vec<Vec<V>> = disjoint_partitions(&v(&[1, 1]), 2)
            .unwrap()
            .map(|p| p.pieces().to_vec())
            .collect();
        assert_eq!(parts, vec![vec![v(&[1, 1])], vec![v(&[1, 0]), v(&[0, 1])]]);

        let atom: Vec<Vec<V>> = disjoint_partitions(&v(&[1]), 5)
            .unwrap()
            .map(|p| p.pieces().to_vec())
            .collect();
        assert_eq!(atom, vec![vec![v(&[1])]]);
    }

    /// Set partitions of {0..n} with at most k blocks, by recursive insertion.
    fn set_partition_count(n: usize, k: usize) -> usize {
        fn go(i: usize, n: usize, k: usize, blocks: usize) -> usize {
            if i == n {
                return 1;
            }
            let mut total = 0;
            for _ in 0..blocks {
                total += go(i + 1, n, k, blocks);
            }
            if blocks < k {
                total += go(i + 1, n, k, blocks + 1);
            }
            total
        }
        go(0, n, k, 0)
    }

    #[test]
    fn disjoint_partition_counts_match_oracle() {
        assert_eq!(set_partition_count(3, 3), 5);
        assert_eq!(disjoint_partitions(&v(&[1, 1, 1]), 3).unwrap().count(), 5);
        for n in 1..=6 {
            let e = LatticeVector::<Rational>::ones(n);
            for k in 1..=n {
                let got: Vec<_> = disjoint_partitions(&e, k).unwrap().collect();
                assert_eq!(got.len(), set_partition_count(n, k), "n={n} k={k}");
                for p in &got {
                    assert!(p.len() <= k);
                    assert!(p.sums_to_target(Tolerance::EXACT));
                    assert!(p.is_pairwise_disjoint());
                }
            }
        }
        // support skips zero coordinates
        assert_eq!(disjoint_partitions(&v(&[2, 0, 3]), 3).unwrap().count(), 2);
    }

    #[test]
    fn zero_target_gives_single_zero_piece() {
        let z = v(&[0, 0]);
        let p = atomic_partition(&z);
        assert_eq!(p.pieces(), std::slice::from_ref(&z));
        let ps: Vec<_> = disjoint_partitions(&z, 3).unwrap().collect();
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].pieces(), &[z]);
    }

    #[test]
    fn atomic_partition_examples() {
        let p = atomic_partition(&v(&[2, 0, 3]));
        assert_eq!(p.pieces(), &[v(&[2, 0, 0]), v(&[0, 0, 3])]);
        let p = atomic_partition(&v(&[1, 1]));
        assert_eq!(p.pieces(), &[v(&[1, 0]), v(&[0, 1])]);
        assert!(p.sums_to_target(Tolerance::EXACT));
    }

    #[test]
    fn partition_validation() {
        let w = v(&[1, 1]);
        assert!(Partition::new(w.clone(), vec![v(&[1, 0]), v(&[0, 1])], Tolerance::EXACT).is_ok());
        assert!(Partition::new(w.clone(), vec![v(&[1, 0])], Tolerance::EXACT).is_err());
        assert!(Partition::new(w.clone(), vec![v(&[2, 1]), v(&[-1, 0])], Tolerance::EXACT).is_err());
        assert!(Partition::new(w, vec![], Tolerance::EXACT).is_err());
        let wf = LatticeVector::<f64>::new(vec![1.0, 1.0]).unwrap();
        let near = LatticeVector::new(vec![1.0 + 1e-12, 1.0]).unwrap();
        assert!(Partition::new(wf, vec![near], Tolerance(1e-9)).is_ok());
    }

    #[test]
    fn band_projection_examples() {
        let p = BandProjection::new(2, [0]).unwrap();
        let q = p.complement();
        assert_eq!(p.apply(&v(&[3, 5])).unwrap(), v(&[3, 0]));
        assert_eq!(q.apply(&v(&[3, 5])).unwrap(), v(&[0, 5]));
        assert!(BandProjection::new(2, [2]).is_err());
        assert!(p.apply(&v(&[1, 2, 3])).is_err());
    }

    #[test]
    fn projection_onto_positive_part_recovers_pos_part() {
        let bw = v(&[3, -1, 0, 2, -7]);
        let p = BandProjection::onto_positive_part(&bw);
        assert_eq!(p.apply(&bw).unwrap(), bw.pos_part());
        let q = p.complement();
        // (P − Q)·Bw = |Bw|
        assert_eq!(&p.apply(&bw).unwrap() - &q.apply(&bw).unwrap(), bw.abs());
    }
}
