//! Finite transcription of the rank-one meet counterexample.
//!
//! Here `f` is a coordinate functional `x ↦ x_k` on `ℝⁿ`, `e = (1,…,1)` and
//! `B = f ⊗ e`. Every step of the derivation of
//! `(M_{I,I} ∧ M_{I,B})(B)(e) = e` is evaluated exactly. Because `f` is
//! order continuous in finite dimensions, `I ∧ B = E_kk ≠ 0` and the meet
//! identity `M_{I,I} ∧ M_{I,B} = M_{I,I∧B}` holds; on ℓ∞ with a singular
//! `f` both of those fail. The report tabulates that contrast.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::corpus::{random_matrix, random_vector, EntryDistribution, SignMode};
use crate::error::{Error, Result};
use crate::lattice::{
    atomic_partition, disjoint_partitions_capped, enumerate_components, LatticeVector, Partition,
    DEFAULT_ENUMERATION_CAP,
};
use crate::regular_op::{
    meet_oracle, random_operator_split, PartitionStrategy, RegularOperator,
};
use crate::report::{ClaimId, ContrastRow, ReportBuilder, VerificationReport};
use crate::scalar::{Rational, Scalar, Tolerance};
use crate::superop::Superoperator;

/// `f(x) = x_k` on `ℝⁿ`, with a 0-based `index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoordinateFunctional {
    dim: usize,
    index: usize,
}

impl CoordinateFunctional {
    pub fn new(dim: usize, index: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        Ok(Self { dim, index })
    }

    /// `k` counted from 1, as on the command line.
    pub fn one_based(dim: usize, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::IndexOutOfRange { index: 0, dim });
        }
        Self::new(dim, k - 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn eval<S: Scalar>(&self, x: &LatticeVector<S>) -> Result<S> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(x.get(self.index).clone())
    }

    /// The representing vector `e_k`.
    pub fn as_vector<S: Scalar>(&self) -> LatticeVector<S> {
        LatticeVector::unit(self.dim, self.index).expect("index checked at construction")
    }

    /// `f(x∨y) = f(x)∨f(y)`, `f(x∧y) = f(x)∧f(y)` and `f(|x|) = |f(x)|`.
    pub fn preserves_lattice_ops<S: Scalar>(
        &self,
        x: &LatticeVector<S>,
        y: &LatticeVector<S>,
    ) -> Result<bool> {
        let (fx, fy) = (self.eval(x)?, self.eval(y)?);
        Ok(self.eval(&x.join(y)?)? == S::max_of(&fx, &fy)
            && self.eval(&x.meet(y)?)? == S::min_of(&fx, &fy)
            && self.eval(&x.abs())? == fx.abs())
    }
}

/// `B = f ⊗ e`: column `k` all ones, so `B·w = w_k·e`.
pub fn build_b<S: Scalar>(f: &CoordinateFunctional) -> RegularOperator<S> {
    let k = f.index;
    RegularOperator::from_fn(f.dim, f.dim, |_, j| if j == k { S::one() } else { S::zero() })
}

/// `I ∧ B`, which is `E_kk` in the finite model.
pub fn identity_meet_b<S: Scalar>(f: &CoordinateFunctional) -> RegularOperator<S> {
    RegularOperator::identity(f.dim)
        .meet_closed_form(&build_b(f))
        .expect("square operators of equal size")
}

/// `Λ = M_{I,I} ∧ M_{I,B}` on `n × n` operators.
pub fn lambda<S: Scalar>(f: &CoordinateFunctional) -> Superoperator<S> {
    let id = RegularOperator::identity(f.dim);
    Superoperator::build(&id, &id)
        .meet(&Superoperator::build(&id, &build_b(f)))
        .expect("same superoperator dimensions")
}

fn check_operand<S: Scalar>(t: &RegularOperator<S>, f: &CoordinateFunctional) -> Result<()> {
    if t.shape() != (f.dim, f.dim) {
        return Err(Error::ShapeMismatch {
            op: "counterexample operand",
            left: (f.dim, f.dim),
            right: t.shape(),
        });
    }
    if !t.is_positive(Tolerance::EXACT) {
        return Err(Error::NotPositive("counterexample operand"));
    }
    Ok(())
}

fn check_point<S: Scalar>(at: &LatticeVector<S>, f: &CoordinateFunctional) -> Result<()> {
    if at.dim() != f.dim {
        return Err(Error::DimensionMismatch {
            expected: f.dim,
            found: at.dim(),
        });
    }
    if !at.is_positive(Tolerance::EXACT) {
        return Err(Error::NotPositive("evaluation point"));
    }
    Ok(())
}

/// `inf{Tx : 0 ≤ x ≤ e, x ∧ (e−x) = 0, f(x) = 1}`.
pub fn meet_via_components<S: Scalar>(
    t: &RegularOperator<S>,
    f: &CoordinateFunctional,
) -> Result<LatticeVector<S>> {
    meet_via_components_at(t, f, &LatticeVector::ones(f.dim))
}

/// The same infimum over components `x` of a positive `at` with `f(x) = f(at)`.
pub fn meet_via_components_at<S: Scalar>(
    t: &RegularOperator<S>,
    f: &CoordinateFunctional,
    at: &LatticeVector<S>,
) -> Result<LatticeVector<S>> {
    check_operand(t, f)?;
    check_point(at, f)?;
    let target = f.eval(at)?;
    let mut best: Option<LatticeVector<S>> = None;
    for c in enumerate_components(at)? {
        if f.eval(&c.piece)? != target {
            continue;
        }
        let image = t.apply(&c.piece)?;
        best = Some(match best {
            None => image,
            Some(b) => b.meet(&image)?,
        });
    }
    best.ok_or_else(|| Error::Consistency("no admissible component".into()))
}

/// Limits for the `G″` infimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GBudget {
    /// Disjoint partitions of the evaluation point, taken in enumeration
    /// order. The atomic partition is always added.
    pub max_partitions: usize,
    /// Random convex operator splits besides the singleton and atomic ones.
    pub operator_splits: usize,
    /// Splits use between 2 and this many pieces.
    pub max_split_parts: usize,
    pub seed: u64,
}

impl Default for GBudget {
    fn default() -> Self {
        Self {
            max_partitions: 64,
            operator_splits: 16,
            max_split_parts: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GInfimum<S> {
    /// Componentwise infimum of all evaluated members.
    pub value: LatticeVector<S>,
    pub members: u64,
    pub operator_partitions: usize,
    pub disjoint_partitions: usize,
}

/// Infimum of `Σᵢ Σⱼ Tᵢxⱼ ∧ f(xⱼ)Tᵢe` over disjoint partitions `(xⱼ)` of `e`
/// and positive operator partitions `Σᵢ Tᵢ = T`.
pub fn inf_g_double_prime<S: Scalar>(
    t: &RegularOperator<S>,
    f: &CoordinateFunctional,
    budget: &GBudget,
) -> Result<GInfimum<S>> {
    inf_g_double_prime_at(t, f, &LatticeVector::ones(f.dim), budget)
}

pub fn inf_g_double_prime_at<S: Scalar>(
    t: &RegularOperator<S>,
    f: &CoordinateFunctional,
    at: &LatticeVector<S>,
    budget: &GBudget,
) -> Result<GInfimum<S>> {
    check_operand(t, f)?;
    check_point(at, f)?;
    let partitions = budgeted_partitions(at, budget.max_partitions)?;
    let masks: Vec<Vec<u64>> = partitions
        .iter()
        .map(|p| {
            p.pieces()
                .iter()
                .map(|x| x.support().iter().fold(0u64, |m, &i| m | 1 << i))
                .collect()
        })
        .collect();

    let mut splits = vec![vec![t.clone()], atomic_pieces(t)];
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    for _ in 0..budget.operator_splits {
        let parts = rng.gen_range(2..=budget.max_split_parts.max(2));
        splits.push(random_operator_split(t, parts, false, &mut rng));
    }

    let mut best: Option<LatticeVector<S>> = None;
    let mut members = 0u64;
    for pieces in &splits {
        let mut block = BlockSums::new(pieces, f, at)?;
        for blocks in &masks {
            let mut acc = LatticeVector::zeros(f.dim);
            for &mask in blocks {
                acc = acc.try_add(block.get(mask)?)?;
            }
            members += 1;
            best = Some(match best {
                None => acc,
                Some(b) => b.meet(&acc)?,
            });
        }
    }
    Ok(GInfimum {
        value: best.ok_or(Error::EmptyStrategy)?,
        members,
        operator_partitions: splits.len(),
        disjoint_partitions: partitions.len(),
    })
}

/// Per-block sums `Σᵢ Tᵢx ∧ f(x)Tᵢe`, cached by support mask.
///
/// `Tᵢx` for a block is built from the block without its lowest coordinate
/// plus one scaled column, so each new block costs one vector addition
/// per piece.
struct BlockSums<'a, S> {
    f: &'a CoordinateFunctional,
    at: &'a LatticeVector<S>,
    // columns[i][c] = at_c · Tᵢ e_c
    columns: Vec<Vec<LatticeVector<S>>>,
    piece_at_e: Vec<LatticeVector<S>>,
    images: Vec<HashMap<u64, LatticeVector<S>>>,
    sums: HashMap<u64, LatticeVector<S>>,
}

impl<'a, S: Scalar> BlockSums<'a, S> {
    fn new(
        pieces: &[RegularOperator<S>],
        f: &'a CoordinateFunctional,
        at: &'a LatticeVector<S>,
    ) -> Result<Self> {
        let e = LatticeVector::ones(f.dim);
        let piece_at_e = pieces.iter().map(|p| p.apply(&e)).collect::<Result<_>>()?;
        let columns = pieces
            .iter()
            .map(|p| (0..f.dim).map(|c| p.column(c).scale(at.get(c))).collect())
            .collect();
        Ok(Self {
            f,
            at,
            columns,
            piece_at_e,
            images: vec![HashMap::new(); pieces.len()],
            sums: HashMap::new(),
        })
    }

    fn image(&mut self, piece: usize, mask: u64) -> Result<&LatticeVector<S>> {
        if !self.images[piece].contains_key(&mask) {
            let v = if mask == 0 {
                LatticeVector::zeros(self.f.dim)
            } else {
                let low = mask.trailing_zeros() as usize;
                let rest = mask & (mask - 1);
                self.image(piece, rest)?;
                self.images[piece][&rest].try_add(&self.columns[piece][low])?
            };
            self.images[piece].insert(mask, v);
        }
        Ok(&self.images[piece][&mask])
    }

    fn get(&mut self, mask: u64) -> Result<&LatticeVector<S>> {
        if !self.sums.contains_key(&mask) {
            let coords: Vec<usize> = (0..self.f.dim).filter(|&i| mask >> i & 1 == 1).collect();
            let x = self.at.restrict(&coords);
            let fx = self.f.eval(&x)?;
            let mut sum = LatticeVector::zeros(self.f.dim);
            for i in 0..self.columns.len() {
                let rhs = self.piece_at_e[i].scale(&fx);
                sum = sum.try_add(&self.image(i, mask)?.meet(&rhs)?)?;
            }
            self.sums.insert(mask, sum);
        }
        Ok(&self.sums[&mask])
    }
}

fn atomic_pieces<S: Scalar>(t: &RegularOperator<S>) -> Vec<RegularOperator<S>> {
    let mut pieces = Vec::new();
    for i in 0..t.rows() {
        for j in 0..t.cols() {
            if !t.get(i, j).is_zero() {
                let v = t.get(i, j).clone();
                pieces.push(RegularOperator::from_fn(t.rows(), t.cols(), |a, b| {
                    if (a, b) == (i, j) {
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

fn budgeted_partitions<S: Scalar>(
    at: &LatticeVector<S>,
    max_partitions: usize,
) -> Result<Vec<Partition<S>>> {
    let atomic = atomic_partition(at);
    let mut out: Vec<Partition<S>> =
        disjoint_partitions_capped(at, usize::MAX, DEFAULT_ENUMERATION_CAP)?
            .take(max_partitions)
            .collect();
    if !out.iter().any(|p| p.len() == atomic.len()) {
        out.push(atomic);
    }
    Ok(out)
}

/// Index of the unique piece with `f(xⱼ) = f(e)`; every other piece must
/// have `f(xⱼ) = 0`.
pub fn single_support_check<S: Scalar>(
    f: &CoordinateFunctional,
    partition: &Partition<S>,
) -> Result<usize> {
    if !partition.is_pairwise_disjoint() || !partition.sums_to_target(Tolerance::EXACT) {
        return Err(Error::InvalidPartition(
            "single support check needs a disjoint partition".into(),
        ));
    }
    let total = f.eval(partition.target())?;
    let mut found = None;
    for (j, x) in partition.pieces().iter().enumerate() {
        let fx = f.eval(x)?;
        if fx.is_zero() {
            continue;
        }
        if fx != total || found.is_some() {
            return Err(Error::Consistency(format!(
                "piece {j} breaks the single-support dichotomy"
            )));
        }
        found = Some(j);
    }
    found.ok_or_else(|| Error::Consistency("no piece carries f".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleOptions {
    pub seed: u64,
    /// Random positive `T` compared against the superoperator evaluation.
    pub random_operators: usize,
    pub budget: GBudget,
    /// Extra positive evaluation point besides `e`.
    pub at: Option<LatticeVector<Rational>>,
}

impl Default for CounterexampleOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            random_operators: 20,
            budget: GBudget::default(),
            at: None,
        }
    }
}

/// Exact report for `n` and a 1-based coordinate `k`.
pub fn counterexample_report(
    n: usize,
    k: usize,
    opts: &CounterexampleOptions,
) -> Result<VerificationReport> {
    if n < 2 {
        return Err(Error::Parse(format!("n must be at least 2, got {n}")));
    }
    if n > DEFAULT_ENUMERATION_CAP {
        return Err(Error::EnumerationLimit {
            dim: n,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    let f = CoordinateFunctional::one_based(n, k)?;
    if let Some(at) = &opts.at {
        check_point(at, &f)?;
    }
    let e = LatticeVector::<Rational>::ones(n);
    let id = RegularOperator::<Rational>::identity(n);
    let b = build_b::<Rational>(&f);
    let ekk = RegularOperator::unit(n, n, f.index, f.index)?;
    let lam = lambda::<Rational>(&f);
    let eval = |t: &RegularOperator<Rational>| -> Result<LatticeVector<Rational>> {
        lam.apply(t)?.apply(&e)
    };
    let mut rb = ReportBuilder::new(ClaimId::Counterexample, true);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let dist = EntryDistribution::default();

    rb.flag(
        "b_is_rank_one_positive",
        b.is_positive(Tolerance::EXACT)
            && b == crate::regular_op::rank_one(&f.as_vector(), &e)
            && b.apply(&e)? == e,
    );
    let mut homomorphism = f.eval(&e)? == Rational::from_int(1);
    for _ in 0..8 {
        let x = random_vector::<Rational>(n, &dist, SignMode::Mixed, &mut rng);
        let y = random_vector::<Rational>(n, &dist, SignMode::Mixed, &mut rng);
        homomorphism &= f.preserves_lattice_ops(&x, &y)?;
    }
    rb.flag("riesz_homomorphism", homomorphism);

    let meet_ib = identity_meet_b::<Rational>(&f);
    rb.matrices_equal("identity_meet_b_is_unit", &meet_ib, &ekk, Tolerance::EXACT);
    rb.flag("identity_meet_b_trace_one", meet_ib.trace() == Rational::from_int(1));
    rb.flag("lambda_nonzero", !lam.is_zero());

    let lambda_b = eval(&b)?;
    rb.vectors_equal("lambda_at_b_equals_e", &lambda_b, &e, Tolerance::EXACT);
    rb.vectors_equal(
        "components_formula_at_b",
        &meet_via_components(&b, &f)?,
        &e,
        Tolerance::EXACT,
    );
    let mut budget = opts.budget;
    budget.seed = rng.gen();
    let g_b = inf_g_double_prime(&b, &f, &budget)?;
    rb.vectors_equal("g_double_prime_at_b", &g_b.value, &e, Tolerance::EXACT);
    rb.vectors_equal(
        "lambda_at_identity",
        &eval(&id)?,
        &f.as_vector(),
        Tolerance::EXACT,
    );

    let restored = Superoperator::build(&id, &meet_ib);
    rb.matrices_equal("finite_restoration", lam.rep(), restored.rep(), Tolerance::EXACT);

    let (m_ii, m_ib) = (Superoperator::build(&id, &id), Superoperator::build(&id, &b));
    let mut members = g_b.members;
    let mut splits = g_b.operator_partitions - 2;
    for _ in 0..opts.random_operators {
        let t = random_matrix::<Rational>(n, n, &dist, SignMode::Positive, &mut rng);
        let via_components = meet_via_components(&t, &f)?;
        let via_rep = eval(&t)?;
        rb.vectors_equal("components_formula_matches_rep", &via_components, &via_rep, Tolerance::EXACT);
        let oracle = meet_oracle(
            m_ii.rep(),
            m_ib.rep(),
            &t.vec_col_major(),
            &PartitionStrategy::Atomic,
        )?;
        rb.vectors_equal(
            "meet_oracle_consistency",
            &RegularOperator::unvec_col_major(&oracle, n, n)?.apply(&e)?,
            &via_rep,
            Tolerance::EXACT,
        );
        budget.seed = rng.gen();
        let g = inf_g_double_prime(&t, &f, &budget)?;
        rb.vector_le("g_double_prime_not_below", &via_components, &g.value, Tolerance::EXACT);
        rb.vectors_equal("g_double_prime_attains", &g.value, &via_components, Tolerance::EXACT);
        members += g.members;
        splits += g.operator_partitions - 2;
        if let Some(at) = &opts.at {
            let via_components = meet_via_components_at(&t, &f, at)?;
            let via_rep = lam.apply(&t)?.apply(at)?;
            rb.vectors_equal("components_formula_at_point", &via_components, &via_rep, Tolerance::EXACT);
            let g = inf_g_double_prime_at(&t, &f, at, &budget)?;
            rb.vectors_equal("g_double_prime_at_point", &g.value, &via_components, Tolerance::EXACT);
        }
    }

    let mut single_support = true;
    let mut partitions_checked = 0u64;
    for p in budgeted_partitions(&e, opts.budget.max_partitions)? {
        single_support &= single_support_check(&f, &p).is_ok();
        partitions_checked += 1;
    }
    rb.flag("single_support", single_support);

    rb.metric("n", n as f64);
    rb.metric("k", k as f64);
    rb.metric("random_operators", opts.random_operators as f64);
    rb.metric("operator_splits_sampled", splits as f64);
    rb.metric("g_double_prime_members", members as f64);
    rb.metric("disjoint_partitions_checked", partitions_checked as f64);

    rb.witness_matrix("B", &b);
    rb.witness_matrix("identity_meet_b", &meet_ib);
    rb.witness_vector("lambda_b_e", &lambda_b);

    let unit_name = format!("E_{k}{k}");
    rb.contrast(ContrastRow {
        quantity: "I ∧ B".into(),
        finite_value: format!("{unit_name} (trace 1)"),
        paper_linf_value: "0".into(),
        citation: "\"I∧B=0, where I is the identity operator\"".into(),
    });
    rb.contrast(ContrastRow {
        quantity: "(M_{I,I} ∧ M_{I,B})(B)(e)".into(),
        finite_value: "e".into(),
        paper_linf_value: "e".into(),
        citation: "\"(M_{I,I}∧M_{I,B})(f⊗e)(e)=e\"".into(),
    });
    rb.contrast(ContrastRow {
        quantity: "M_{I,I} ∧ M_{I,B} = M_{I,I∧B}".into(),
        finite_value: format!("holds: both equal M_{{I,{unit_name}}}"),
        paper_linf_value: "fails: M_{I,I∧B} = 0 while the meet is nonzero".into(),
        citation: "\"M_{I,I}∧M_{I,B} ≠ M_{I,I∧B}=0\"".into(),
    });

    let inputs = json!({
        "n": n,
        "k": k,
        "random_operators": opts.random_operators,
        "max_partitions": opts.budget.max_partitions,
        "operator_splits": opts.budget.operator_splits,
        "max_split_parts": opts.budget.max_split_parts,
        "at": opts.at.as_ref().map(crate::io::vector_to_json),
    });
    Ok(rb.finish(&inputs, Some(opts.seed)))
}
