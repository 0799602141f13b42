//! Two-sided multiplication operators `M_{A,B}(T) = ATB`.
//!
//! With `A : Y → Z` (a `z×y` matrix) and `B : W → X` (an `x×w` matrix),
//! `M_{A,B}` maps `y×x` matrices to `z×w` matrices. Matrices are stacked
//! column-major, so the representation matrix is `Bᵀ ⊗ A` of shape
//! `(z·w) × (y·x)`. The matrix lattices are coordinate lattices under this
//! stacking, and lattice operations on superoperators act entrywise on the
//! representation.

use serde_json::json;

use crate::error::{Error, Result};
use crate::io::matrix_to_json;
use crate::lattice::LatticeVector;
use crate::regular_op::{OperatorPartitionStrategy, RegularOperator};
use crate::report::{ClaimId, ReportBuilder, VerificationReport};
use crate::scalar::{Scalar, Tolerance};

/// Dimensions of the four spaces `W, X, Y, Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SuperDims {
    pub w: usize,
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl SuperDims {
    /// Shape `(rows, cols)` of the argument matrices `T : X → Y`.
    pub fn domain_shape(&self) -> (usize, usize) {
        (self.y, self.x)
    }

    /// Shape of the image matrices `W → Z`.
    pub fn codomain_shape(&self) -> (usize, usize) {
        (self.z, self.w)
    }

    pub fn rep_shape(&self) -> (usize, usize) {
        (self.z * self.w, self.y * self.x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator<S> {
    dims: SuperDims,
    rep: RegularOperator<S>,
    factors: Option<(RegularOperator<S>, RegularOperator<S>)>,
}

impl<S: Scalar> Superoperator<S> {
    /// `M_{A,B}`; dimensions are read off the factor shapes.
    pub fn build(a: &RegularOperator<S>, b: &RegularOperator<S>) -> Self {
        let dims = SuperDims {
            w: b.cols(),
            x: b.rows(),
            y: a.cols(),
            z: a.rows(),
        };
        Self {
            dims,
            rep: b.transpose().kron(a),
            factors: Some((a.clone(), b.clone())),
        }
    }

    pub fn from_rep(dims: SuperDims, rep: RegularOperator<S>) -> Result<Self> {
        if rep.shape() != dims.rep_shape() {
            return Err(Error::ShapeMismatch {
                op: "superoperator representation",
                left: dims.rep_shape(),
                right: rep.shape(),
            });
        }
        Ok(Self {
            dims,
            rep,
            factors: None,
        })
    }

    pub fn dims(&self) -> SuperDims {
        self.dims
    }

    pub fn rep(&self) -> &RegularOperator<S> {
        &self.rep
    }

    /// The factors `(A, B)`. Results of lattice operations carry none.
    pub fn factors(&self) -> Result<(&RegularOperator<S>, &RegularOperator<S>)> {
        self.factors
            .as_ref()
            .map(|(a, b)| (a, b))
            .ok_or(Error::NoFactorForm)
    }

    fn check_arg(&self, t: &RegularOperator<S>) -> Result<()> {
        if t.shape() != self.dims.domain_shape() {
            return Err(Error::ShapeMismatch {
                op: "superoperator apply",
                left: self.dims.domain_shape(),
                right: t.shape(),
            });
        }
        Ok(())
    }

    /// `ATB` when factors are present, otherwise through the representation.
    pub fn apply(&self, t: &RegularOperator<S>) -> Result<RegularOperator<S>> {
        self.check_arg(t)?;
        match &self.factors {
            Some((a, b)) => a.matmul(t)?.matmul(b),
            None => self.apply_via_rep(t),
        }
    }

    pub fn apply_via_rep(&self, t: &RegularOperator<S>) -> Result<RegularOperator<S>> {
        self.check_arg(t)?;
        let (rows, cols) = self.dims.codomain_shape();
        RegularOperator::unvec_col_major(&self.rep.apply(&t.vec_col_major())?, rows, cols)
    }

    fn lattice_op(
        &self,
        other: &Self,
        f: impl Fn(&RegularOperator<S>, &RegularOperator<S>) -> Result<RegularOperator<S>>,
    ) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::ShapeMismatch {
                op: "superoperator lattice operation",
                left: self.dims.rep_shape(),
                right: other.dims.rep_shape(),
            });
        }
        Self::from_rep(self.dims, f(&self.rep, &other.rep)?)
    }

    pub fn modulus(&self) -> Self {
        Self {
            dims: self.dims,
            rep: self.rep.modulus_closed_form(),
            factors: None,
        }
    }

    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.lattice_op(other, |a, b| a.meet_closed_form(b))
    }

    pub fn join(&self, other: &Self) -> Result<Self> {
        self.lattice_op(other, |a, b| a.join_closed_form(b))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.lattice_op(other, |a, b| a.try_add(b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.lattice_op(other, |a, b| a.try_sub(b))
    }

    /// `self ∘ inner`; factor form `M_{A,B} ∘ M_{C,D} = M_{AC, DB}` is kept.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if inner.dims.codomain_shape() != self.dims.domain_shape() {
            return Err(Error::ShapeMismatch {
                op: "superoperator composition",
                left: self.dims.domain_shape(),
                right: inner.dims.codomain_shape(),
            });
        }
        let dims = SuperDims {
            w: self.dims.w,
            x: inner.dims.x,
            y: inner.dims.y,
            z: self.dims.z,
        };
        let factors = match (&self.factors, &inner.factors) {
            (Some((a, b)), Some((c, d))) => Some((a.matmul(c)?, d.matmul(b)?)),
            _ => None,
        };
        Ok(Self {
            dims,
            rep: self.rep.matmul(&inner.rep)?,
            factors,
        })
    }

    pub fn is_positive(&self, tol: Tolerance) -> bool {
        self.rep.is_positive(tol)
    }

    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }
}

fn check_shape<S: Scalar>(
    op: &'static str,
    m: &RegularOperator<S>,
    expected: (usize, usize),
) -> Result<()> {
    if m.shape() != expected {
        return Err(Error::ShapeMismatch {
            op,
            left: expected,
            right: m.shape(),
        });
    }
    Ok(())
}

/// Supremum over the strategy's operator partitions `Σ_j |T_j| = T` of
/// `Σ_j |A₀ T_j B| w`.
///
/// The atomic partition `T_j = t_ij·E_ij` attains `A₀·T·|B|·w`.
pub fn operator_partition_sup<S: Scalar>(
    a0: &RegularOperator<S>,
    b: &RegularOperator<S>,
    t: &RegularOperator<S>,
    w: &LatticeVector<S>,
    strategy: &OperatorPartitionStrategy,
) -> Result<LatticeVector<S>> {
    check_shape("operator_partition_sup T", t, (a0.cols(), b.rows()))?;
    if w.dim() != b.cols() {
        return Err(Error::DimensionMismatch {
            expected: b.cols(),
            found: w.dim(),
        });
    }
    let mut best: Option<LatticeVector<S>> = None;
    for partition in strategy.partitions(t)? {
        let value = operator_partition_value(a0, b, partition.pieces(), w)?;
        best = Some(match best {
            None => value,
            Some(prev) => prev.join(&value)?,
        });
    }
    best.ok_or(Error::EmptyStrategy)
}

/// `Σ_j |A₀ T_j B| w` for one operator partition.
pub fn operator_partition_value<S: Scalar>(
    a0: &RegularOperator<S>,
    b: &RegularOperator<S>,
    pieces: &[RegularOperator<S>],
    w: &LatticeVector<S>,
) -> Result<LatticeVector<S>> {
    let mut acc = LatticeVector::zeros(a0.rows());
    for tj in pieces {
        let image = a0.matmul(tj)?.matmul(b)?.modulus_closed_form();
        acc = acc.try_add(&image.apply(w)?)?;
    }
    Ok(acc)
}

/// Options shared by the superoperator verifiers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub tol: Tolerance,
    pub seed: u64,
    /// Random signed operator splits tried against the atomic supremum.
    pub splits: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tol: Tolerance::default(),
            seed: 0,
            splits: 4,
        }
    }
}

/// Checks `|M_{A₀,B}|(T) = M_{A₀,|B|}(T)` and
/// `(M_{A₀,B} ∨ M_{A₀,D})(T) = M_{A₀,B∨D}(T)` for positive `A₀` and `T`,
/// and that the atomic operator partition attains `A₀T|B|w` while coarser
/// partitions stay below it.
pub fn verify_left_positive_modulus<S: Scalar>(
    a0: &RegularOperator<S>,
    b: &RegularOperator<S>,
    d: &RegularOperator<S>,
    t: &RegularOperator<S>,
    w: &LatticeVector<S>,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    check_shape("prop21 D", d, b.shape())?;
    check_shape("prop21 T", t, (a0.cols(), b.rows()))?;
    if w.dim() != b.cols() {
        return Err(Error::DimensionMismatch {
            expected: b.cols(),
            found: w.dim(),
        });
    }
    let tol = opts.tol;
    let mut rb = ReportBuilder::new(ClaimId::Prop21, S::EXACT);
    rb.flag(
        "hypotheses_positive",
        a0.is_positive(tol) && t.is_positive(tol) && w.is_positive(tol),
    );

    let m_b = Superoperator::build(a0, b);
    let lhs = m_b.modulus().apply(t)?;
    let rhs = Superoperator::build(a0, &b.modulus_closed_form()).apply(t)?;
    if !rb.matrices_equal("modulus_identity", &lhs, &rhs, tol) {
        rb.witness_matrix("modulus_lhs", &lhs);
        rb.witness_matrix("modulus_rhs", &rhs);
    }

    let join_lhs = m_b.join(&Superoperator::build(a0, d))?.apply(t)?;
    let join_rhs = Superoperator::build(a0, &b.join_closed_form(d)?).apply(t)?;
    if !rb.matrices_equal("join_identity", &join_lhs, &join_rhs, tol) {
        rb.witness_matrix("join_lhs", &join_lhs);
        rb.witness_matrix("join_rhs", &join_rhs);
    }

    let right_at_w = rhs.apply(w)?;
    rb.vectors_equal("modulus_at_w", &lhs.apply(w)?, &right_at_w, tol);

    if t.is_positive(tol) && w.is_positive(tol) {
        let atomic = operator_partition_sup(a0, b, t, w, &OperatorPartitionStrategy::Atomic)?;
        rb.vectors_equal("atomic_partition_attains", &atomic, &right_at_w, tol);
        let coarser = [
            OperatorPartitionStrategy::Singleton,
            OperatorPartitionStrategy::RandomSigned {
                count: opts.splits,
                parts: 3,
                seed: opts.seed,
            },
        ];
        for strategy in &coarser {
            for p in strategy.partitions(t)? {
                let value = operator_partition_value(a0, b, p.pieces(), w)?;
                rb.vector_le("coarser_partitions_below", &value, &right_at_w, tol);
            }
        }
        rb.witness_vector("sup_at_w", &atomic);
    }

    let inputs = json!({
        "A0": matrix_to_json(a0),
        "B": matrix_to_json(b),
        "D": matrix_to_json(d),
        "T": matrix_to_json(t),
        "w": crate::io::vector_to_json(w),
    });
    Ok(rb.finish(&inputs, Some(opts.seed)))
}

/// The four corners `M_{A^±, B^±}` in the order `(+,+), (+,−), (−,+), (−,−)`.
pub fn corners<S: Scalar>(a: &RegularOperator<S>, b: &RegularOperator<S>) -> [Superoperator<S>; 4] {
    let (ap, am) = (a.pos_part(), a.neg_part());
    let (bp, bm) = (b.pos_part(), b.neg_part());
    [
        Superoperator::build(&ap, &bp),
        Superoperator::build(&ap, &bm),
        Superoperator::build(&am, &bp),
        Superoperator::build(&am, &bm),
    ]
}

/// Checks `|M_{A,B}| = M_{|A|,|B|}` at the representation level, pairwise
/// disjointness of the four corners, and the signed corner expansion of
/// `M_{A,B}`.
pub fn verify_modulus_factorization<S: Scalar>(
    a: &RegularOperator<S>,
    b: &RegularOperator<S>,
    tol: Tolerance,
) -> VerificationReport {
    let mut rb = ReportBuilder::new(ClaimId::Cor22, S::EXACT);
    let m = Superoperator::build(a, b);
    let lhs = m.modulus();
    let rhs = Superoperator::build(&a.modulus_closed_form(), &b.modulus_closed_form());
    if !rb.matrices_equal("modulus_factorization", lhs.rep(), rhs.rep(), tol) {
        rb.witness_matrix("modulus_rep", lhs.rep());
        rb.witness_matrix("factored_rep", rhs.rep());
    }

    let cs = corners(a, b);
    let zero = RegularOperator::zeros(m.rep().rows(), m.rep().cols());
    for i in 0..4 {
        for j in i + 1..4 {
            let meet = cs[i].meet(&cs[j]).expect("corner dims agree");
            rb.matrices_equal("corners_disjoint", meet.rep(), &zero, tol);
        }
    }
    let signed = cs[0]
        .try_sub(&cs[1])
        .and_then(|s| s.try_sub(&cs[2]))
        .and_then(|s| s.try_add(&cs[3]))
        .expect("corner dims agree");
    rb.matrices_equal("signed_expansion", signed.rep(), m.rep(), tol);
    let sum = cs[1..]
        .iter()
        .try_fold(cs[0].clone(), |acc, c| acc.try_add(c))
        .expect("corner dims agree");
    rb.matrices_equal("corner_sum", sum.rep(), rhs.rep(), tol);

    let inputs = json!({ "A": matrix_to_json(a), "B": matrix_to_json(b) });
    rb.finish(&inputs, None)
}

/// For a positive right factor `B₀`: `|M_{A,B₀}| = M_{|A|,B₀}` and
/// `M_{A,B₀} ∨ M_{C,B₀} = M_{A∨C,B₀}`.
pub fn verify_positive_right_factor<S: Scalar>(
    a: &RegularOperator<S>,
    c: &RegularOperator<S>,
    b0: &RegularOperator<S>,
    tol: Tolerance,
) -> Result<VerificationReport> {
    check_shape("synnatzschke_a C", c, a.shape())?;
    let mut rb = ReportBuilder::new(ClaimId::SynnatzschkeA, S::EXACT);
    rb.flag("hypotheses_positive", b0.is_positive(tol));
    let m_a = Superoperator::build(a, b0);
    let rhs = Superoperator::build(&a.modulus_closed_form(), b0);
    rb.matrices_equal("modulus_identity", m_a.modulus().rep(), rhs.rep(), tol);
    let join = m_a.join(&Superoperator::build(c, b0))?;
    let join_rhs = Superoperator::build(&a.join_closed_form(c)?, b0);
    rb.matrices_equal("join_identity", join.rep(), join_rhs.rep(), tol);
    let inputs = json!({
        "A": matrix_to_json(a),
        "C": matrix_to_json(c),
        "B0": matrix_to_json(b0),
    });
    Ok(rb.finish(&inputs, None))
}
