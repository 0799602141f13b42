//! Matrices as regular operators between coordinate lattices.
//!
//! Lattice operations on operators have entrywise closed forms in the
//! coordinate model. The Riesz–Kantorovich oracles recompute the modulus and
//! the meet from partitions of the argument, so the closed forms can be
//! checked against the order-theoretic definitions.

use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{atomic_partition, disjoint_partitions, LatticeVector, Partition};
use crate::scalar::{Scalar, Tolerance};

/// Dense `rows × cols` matrix acting from ℝ^cols to ℝ^rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularOperator<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> RegularOperator<S> {
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::EmptyDimension);
        }
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch {
                expected: c,
                found: bad.len(),
            });
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| S::from_int(v)).collect())
                .collect(),
        )
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> S) -> Self {
        assert!(rows > 0 && cols > 0, "empty operator shape");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| S::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { S::one() } else { S::zero() })
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| S::one())
    }

    /// Matrix unit `E_ij`.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Result<Self> {
        if i >= rows {
            return Err(Error::IndexOutOfRange { index: i, dim: rows });
        }
        if j >= cols {
            return Err(Error::IndexOutOfRange { index: j, dim: cols });
        }
        Ok(Self::from_fn(rows, cols, |a, b| {
            if a == i && b == j {
                S::one()
            } else {
                S::zero()
            }
        }))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        self.data.chunks(self.cols).map(<[S]>::to_vec).collect()
    }

    pub fn column(&self, j: usize) -> LatticeVector<S> {
        LatticeVector::new((0..self.rows).map(|i| self.get(i, j).clone()).collect())
            .expect("rows > 0")
    }

    fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    fn zip_with(&self, other: &Self, op: &'static str, f: impl Fn(&S, &S) -> S) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    /// Matrix-vector product.
    pub fn apply(&self, w: &LatticeVector<S>) -> Result<LatticeVector<S>> {
        if w.dim() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: w.dim(),
            });
        }
        let nonzero: Vec<usize> = (0..self.cols).filter(|&j| !w.get(j).is_zero()).collect();
        let out = (0..self.rows)
            .map(|i| {
                let row = self.row(i);
                nonzero.iter().fold(S::zero(), |acc, &j| {
                    if row[j].is_zero() {
                        acc
                    } else {
                        acc + row[j].clone() * w.get(j).clone()
                    }
                })
            })
            .collect();
        LatticeVector::new(out)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut data = vec![S::zero(); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let slot = &mut data[i * other.cols + j];
                        *slot = slot.clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a.clone() + b.clone())
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a.clone() - b.clone())
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|a| a.clone() * s.clone())
    }

    /// `|A|`, the entrywise absolute value.
    pub fn modulus_closed_form(&self) -> Self {
        self.map(|a| a.abs())
    }

    pub fn pos_part(&self) -> Self {
        self.map(|a| a.max_of(&S::zero()))
    }

    pub fn neg_part(&self) -> Self {
        self.map(|a| (-a.clone()).max_of(&S::zero()))
    }

    /// `S ∨ T`, the entrywise maximum.
    pub fn join_closed_form(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "join", |a, b| a.max_of(b))
    }

    /// `S ∧ T`, the entrywise minimum.
    pub fn meet_closed_form(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "meet", |a, b| a.min_of(b))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = other.shape();
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self.get(i / r2, j / c2).clone() * other.get(i % r2, j % c2).clone()
        })
    }

    /// Column-major stacking of the entries.
    pub fn vec_col_major(&self) -> LatticeVector<S> {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self.get(i, j).clone());
            }
        }
        LatticeVector::new(out).expect("nonempty operator")
    }

    /// Inverse of [`vec_col_major`](Self::vec_col_major).
    pub fn unvec_col_major(v: &LatticeVector<S>, rows: usize, cols: usize) -> Result<Self> {
        if v.dim() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: v.dim(),
            });
        }
        Ok(Self::from_fn(rows, cols, |i, j| v.get(j * rows + i).clone()))
    }

    pub fn is_positive(&self, tol: Tolerance) -> bool {
        self.data.iter().all(|a| a.is_nonneg(tol))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|a| a.is_zero())
    }

    /// Entrywise `self ≤ other`.
    pub fn le(&self, other: &Self, tol: Tolerance) -> Result<bool> {
        let d = self.zip_with(other, "compare", |a, b| {
            if a.le_tol(b, tol) {
                S::zero()
            } else {
                S::one()
            }
        })?;
        Ok(d.is_zero())
    }

    pub fn eq_tol(&self, other: &Self, tol: Tolerance) -> Result<bool> {
        Ok(self.le(other, tol)? && other.le(self, tol)?)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let d = self.try_sub(other)?;
        Ok(d.data.iter().map(|a| a.abs().to_f64()).fold(0.0, f64::max))
    }

    pub fn trace(&self) -> S {
        (0..self.rows.min(self.cols)).fold(S::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    pub fn to_f64(&self) -> RegularOperator<f64> {
        RegularOperator {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(Scalar::to_f64).collect(),
        }
    }
}

impl<S: Scalar> Add for &RegularOperator<S> {
    type Output = RegularOperator<S>;
    fn add(self, rhs: Self) -> RegularOperator<S> {
        self.try_add(rhs).expect("shape mismatch in operator addition")
    }
}

impl<S: Scalar> Sub for &RegularOperator<S> {
    type Output = RegularOperator<S>;
    fn sub(self, rhs: Self) -> RegularOperator<S> {
        self.try_sub(rhs)
            .expect("shape mismatch in operator subtraction")
    }
}

impl<S: Scalar> Mul for &RegularOperator<S> {
    type Output = RegularOperator<S>;
    fn mul(self, rhs: Self) -> RegularOperator<S> {
        self.matmul(rhs).expect("shape mismatch in operator product")
    }
}

impl<S: Scalar> Neg for &RegularOperator<S> {
    type Output = RegularOperator<S>;
    fn neg(self) -> RegularOperator<S> {
        self.map(|a| -a.clone())
    }
}

/// The rank-one operator `x′ ⊗ y : w ↦ ⟨x′, w⟩·y`, i.e. the matrix `y·x′ᵀ`.
pub fn rank_one<S: Scalar>(xprime: &LatticeVector<S>, y: &LatticeVector<S>) -> RegularOperator<S> {
    RegularOperator::from_fn(y.dim(), xprime.dim(), |i, j| {
        y.get(i).clone() * xprime.get(j).clone()
    })
}

/// Families of positive partitions of a vector fed to the oracles.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionStrategy {
    /// `{w}` only.
    Trivial,
    /// The nonzero coordinate atoms of `w`.
    Atomic,
    /// Recursive bisection of the support: level ℓ has up to 2^ℓ blocks,
    /// running from `{w}` down to the atoms.
    Dyadic,
    /// Every disjoint partition into at most `max_parts` components.
    Disjoint { max_parts: usize },
    /// Seeded random convex splits `w_i = λ_i ∘ w` with rational weights.
    RandomConvex { count: usize, parts: usize, seed: u64 },
}

impl PartitionStrategy {
    pub fn partitions<S: Scalar>(&self, w: &LatticeVector<S>) -> Result<Vec<Partition<S>>> {
        if !w.is_positive(Tolerance::default()) {
            return Err(Error::NotPositive("oracle argument"));
        }
        let out = match self {
            Self::Trivial => vec![Partition::trivial(w)],
            Self::Atomic => vec![atomic_partition(w)],
            Self::Dyadic => dyadic_chain(w),
            Self::Disjoint { max_parts } => disjoint_partitions(w, *max_parts)?.collect(),
            Self::RandomConvex { count, parts, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*count)
                    .map(|_| random_convex_split(w, (*parts).max(1), &mut rng))
                    .collect()
            }
        };
        if out.is_empty() {
            return Err(Error::EmptyStrategy);
        }
        Ok(out)
    }
}

/// Refinement chain from `{w}` to the atoms of `w` by bisecting the support.
pub fn dyadic_chain<S: Scalar>(w: &LatticeVector<S>) -> Vec<Partition<S>> {
    let support = w.support();
    let mut blocks = vec![support];
    let mut chain = Vec::new();
    loop {
        let pieces = if blocks.iter().all(Vec::is_empty) {
            vec![w.clone()]
        } else {
            blocks.iter().map(|b| w.restrict(b)).collect()
        };
        chain.push(Partition::from_parts_unchecked(w.clone(), pieces));
        if blocks.iter().all(|b| b.len() <= 1) {
            break;
        }
        blocks = blocks
            .into_iter()
            .flat_map(|b| {
                if b.len() <= 1 {
                    vec![b]
                } else {
                    let (l, r) = b.split_at(b.len() / 2);
                    vec![l.to_vec(), r.to_vec()]
                }
            })
            .collect();
    }
    chain
}

fn random_weights(parts: usize, rng: &mut ChaCha8Rng) -> Vec<i64> {
    loop {
        let ws: Vec<i64> = (0..parts).map(|_| rng.gen_range(0..=8)).collect();
        if ws.iter().any(|&x| x > 0) {
            return ws;
        }
    }
}

fn random_convex_split<S: Scalar>(
    w: &LatticeVector<S>,
    parts: usize,
    rng: &mut ChaCha8Rng,
) -> Partition<S> {
    let mut pieces = vec![Vec::with_capacity(w.dim()); parts];
    for x in w.entries() {
        let ws = random_weights(parts, rng);
        let total: i64 = ws.iter().sum();
        for (piece, &k) in pieces.iter_mut().zip(&ws) {
            piece.push(x.clone() * S::from_ratio(k, total));
        }
    }
    let pieces = pieces
        .into_iter()
        .map(|p| LatticeVector::new(p).expect("dim > 0"))
        .collect();
    Partition::from_parts_unchecked(w.clone(), pieces)
}

/// `Σᵢ |B wᵢ|` for one partition.
pub fn modulus_partition_value<S: Scalar>(
    b: &RegularOperator<S>,
    partition: &Partition<S>,
) -> Result<LatticeVector<S>> {
    let mut acc = LatticeVector::zeros(b.rows());
    for piece in partition.pieces() {
        acc = acc.try_add(&b.apply(piece)?.abs())?;
    }
    Ok(acc)
}

/// `Σᵢ S wᵢ ∧ T wᵢ` for one partition.
pub fn meet_partition_value<S: Scalar>(
    s: &RegularOperator<S>,
    t: &RegularOperator<S>,
    partition: &Partition<S>,
) -> Result<LatticeVector<S>> {
    let mut acc = LatticeVector::zeros(s.rows());
    for piece in partition.pieces() {
        acc = acc.try_add(&s.apply(piece)?.meet(&t.apply(piece)?)?)?;
    }
    Ok(acc)
}

fn fold_partitions<S: Scalar>(
    values: impl Iterator<Item = Result<LatticeVector<S>>>,
    combine: impl Fn(&LatticeVector<S>, &LatticeVector<S>) -> Result<LatticeVector<S>>,
) -> Result<LatticeVector<S>> {
    let mut best: Option<LatticeVector<S>> = None;
    for v in values {
        let v = v?;
        best = Some(match best {
            None => v,
            Some(b) => combine(&b, &v)?,
        });
    }
    best.ok_or(Error::EmptyStrategy)
}

/// Supremum of `Σᵢ |B wᵢ|` over the strategy's partitions of `w`.
///
/// Bounded above by `|B|·w`; the atomic partition attains that bound.
pub fn modulus_oracle<S: Scalar>(
    b: &RegularOperator<S>,
    w: &LatticeVector<S>,
    strategy: &PartitionStrategy,
) -> Result<LatticeVector<S>> {
    if w.dim() != b.cols() {
        return Err(Error::DimensionMismatch {
            expected: b.cols(),
            found: w.dim(),
        });
    }
    let parts = strategy.partitions(w)?;
    fold_partitions(parts.iter().map(|p| modulus_partition_value(b, p)), |a, v| {
        a.join(v)
    })
}

/// Infimum of `Σᵢ S wᵢ ∧ T wᵢ` over the strategy's partitions of `w`.
pub fn meet_oracle<S: Scalar>(
    s: &RegularOperator<S>,
    t: &RegularOperator<S>,
    w: &LatticeVector<S>,
    strategy: &PartitionStrategy,
) -> Result<LatticeVector<S>> {
    if s.shape() != t.shape() {
        return Err(Error::ShapeMismatch {
            op: "meet_oracle",
            left: s.shape(),
            right: t.shape(),
        });
    }
    if !s.is_positive(Tolerance::default()) || !t.is_positive(Tolerance::default()) {
        return Err(Error::NotPositive("meet oracle operands"));
    }
    if w.dim() != s.cols() {
        return Err(Error::DimensionMismatch {
            expected: s.cols(),
            found: w.dim(),
        });
    }
    let parts = strategy.partitions(w)?;
    fold_partitions(parts.iter().map(|p| meet_partition_value(s, t, p)), |a, v| {
        a.meet(v)
    })
}

/// Operators `T_j` with `Σ_j |T_j| = T` for a positive target `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorPartition<S> {
    target: RegularOperator<S>,
    pieces: Vec<RegularOperator<S>>,
}

impl<S: Scalar> OperatorPartition<S> {
    pub fn new(
        target: RegularOperator<S>,
        pieces: Vec<RegularOperator<S>>,
        tol: Tolerance,
    ) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidPartition("no operator pieces".into()));
        }
        if !target.is_positive(tol) {
            return Err(Error::NotPositive("operator partition target"));
        }
        let mut sum = RegularOperator::zeros(target.rows(), target.cols());
        for p in &pieces {
            sum = sum.try_add(&p.modulus_closed_form())?;
        }
        if !sum.eq_tol(&target, tol)? {
            return Err(Error::InvalidPartition(
                "moduli of the pieces do not sum to the target".into(),
            ));
        }
        Ok(Self { target, pieces })
    }

    pub fn target(&self) -> &RegularOperator<S> {
        &self.target
    }

    pub fn pieces(&self) -> &[RegularOperator<S>] {
        &self.pieces
    }
}

/// Generators of operator partitions.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorPartitionStrategy {
    /// `{T}`.
    Singleton,
    /// `{t_ij·E_ij}` over the nonzero entries.
    Atomic,
    /// Seeded splits `T_j = σ_j ∘ (λ_j ∘ T)` with random signs σ_j and
    /// rational convex weights λ_j.
    RandomSigned { count: usize, parts: usize, seed: u64 },
    /// Seeded positive splits `T_j = λ_j ∘ T`.
    RandomConvex { count: usize, parts: usize, seed: u64 },
}

impl OperatorPartitionStrategy {
    pub fn partitions<S: Scalar>(
        &self,
        t: &RegularOperator<S>,
    ) -> Result<Vec<OperatorPartition<S>>> {
        if !t.is_positive(Tolerance::default()) {
            return Err(Error::NotPositive("operator partition target"));
        }
        let wrap = |pieces| OperatorPartition {
            target: t.clone(),
            pieces,
        };
        let out = match self {
            Self::Singleton => vec![wrap(vec![t.clone()])],
            Self::Atomic => vec![wrap(atomic_operator_pieces(t))],
            Self::RandomSigned { count, parts, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*count)
                    .map(|_| wrap(random_operator_split(t, (*parts).max(1), true, &mut rng)))
                    .collect()
            }
            Self::RandomConvex { count, parts, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*count)
                    .map(|_| wrap(random_operator_split(t, (*parts).max(1), false, &mut rng)))
                    .collect()
            }
        };
        if out.is_empty() {
            return Err(Error::EmptyStrategy);
        }
        Ok(out)
    }
}

fn atomic_operator_pieces<S: Scalar>(t: &RegularOperator<S>) -> Vec<RegularOperator<S>> {
    let mut pieces = Vec::new();
    for i in 0..t.rows() {
        for j in 0..t.cols() {
            let v = t.get(i, j);
            if !v.is_zero() {
                pieces.push(RegularOperator::from_fn(t.rows(), t.cols(), |a, b| {
                    if a == i && b == j {
                        v.clone()
                    } else {
                        S::zero()
                    }
                }));
            }
        }
    }
    if pieces.is_empty() {
        pieces.push(t.clone());
    }
    pieces
}

pub(crate) fn random_operator_split<S: Scalar>(
    t: &RegularOperator<S>,
    parts: usize,
    signed: bool,
    rng: &mut ChaCha8Rng,
) -> Vec<RegularOperator<S>> {
    let mut data: Vec<Vec<S>> = vec![Vec::with_capacity(t.entries().len()); parts];
    for x in t.entries() {
        let ws = random_weights(parts, rng);
        let total: i64 = ws.iter().sum();
        for (piece, &k) in data.iter_mut().zip(&ws) {
            let mut v = x.clone() * S::from_ratio(k, total);
            if signed && rng.gen_bool(0.5) {
                v = -v;
            }
            piece.push(v);
        }
    }
    data.into_iter()
        .map(|d| RegularOperator {
            rows: t.rows(),
            cols: t.cols(),
            data: d,
        })
        .collect()
}
