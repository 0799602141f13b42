//! Lattice norms, p→q operator norms and regular norms.
//!
//! A [`LatticeNorm`] is a weighted ℓᵖ norm `(Σ wᵢ|xᵢ|ᵖ)^{1/p}` (for `p = ∞`,
//! `max wᵢ|xᵢ|`). Every weighted norm is an ℓᵖ norm after the diagonal change
//! of variables `x ↦ Dx`, so operator norms reduce to unweighted ℓᵖ→ℓ^q
//! norms of `D_to·A·D_from⁻¹`.
//!
//! Certified values come from closed forms or finite vertex enumeration.
//! Everything else is a multistart nonlinear power iteration, reported with
//! `certified = false` as a lower bound.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::io::matrix_to_json;
use crate::lattice::LatticeVector;
use crate::regular_op::{rank_one, RegularOperator};
use crate::report::{ClaimId, ReportBuilder, VerificationReport};
use crate::scalar::Scalar;
use crate::superop::Superoperator;

/// Largest dimension for which sign-vector enumeration is attempted.
const VERTEX_ENUMERATION_CAP: usize = 16;

/// Tolerance for closed-form float norm comparisons.
pub const FLOAT_TOL: f64 = 1e-9;

/// Relative tolerance for search-based norm comparisons.
pub const SEARCH_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeNorm {
    p: f64,
    weights: Option<Vec<f64>>,
}

impl LatticeNorm {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        Ok(Self { p, weights: None })
    }

    pub fn weighted(p: f64, weights: Vec<f64>) -> Result<Self> {
        let mut n = Self::new(p)?;
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::NotPositive("norm weights"));
        }
        n.weights = Some(weights);
        Ok(n)
    }

    pub fn l1() -> Self {
        Self { p: 1.0, weights: None }
    }

    pub fn l2() -> Self {
        Self { p: 2.0, weights: None }
    }

    pub fn linf() -> Self {
        Self { p: f64::INFINITY, weights: None }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    /// Diagonal of `D` with `‖x‖ = ‖Dx‖_p`.
    fn scaling(&self, dim: usize) -> Vec<f64> {
        (0..dim)
            .map(|i| {
                let w = self.weight(i);
                if self.p.is_infinite() {
                    w
                } else {
                    w.powf(1.0 / self.p)
                }
            })
            .collect()
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        match &self.weights {
            Some(w) if w.len() != dim => Err(Error::DimensionMismatch {
                expected: w.len(),
                found: dim,
            }),
            _ => Ok(()),
        }
    }

    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        let d = self.scaling(x.len());
        let scaled: Vec<f64> = x.iter().zip(&d).map(|(a, s)| a * s).collect();
        Ok(lp(&scaled, self.p))
    }

    /// The dual norm on the dual space, again a weighted ℓ^{p′} norm.
    pub fn dual(&self) -> Self {
        let q = conjugate(self.p);
        let weights = self.weights.as_ref().map(|ws| {
            ws.iter()
                .map(|&w| {
                    if self.p == 1.0 || self.p.is_infinite() {
                        1.0 / w
                    } else {
                        w.powf(-1.0 / (self.p - 1.0))
                    }
                })
                .collect()
        });
        Self { p: q, weights }
    }

    fn describe(&self) -> serde_json::Value {
        let p = if self.p.is_infinite() {
            json!("inf")
        } else {
            json!(self.p)
        };
        match &self.weights {
            Some(w) => json!({ "p": p, "weights": w }),
            None => json!({ "p": p }),
        }
    }
}

/// Norms on `W, X, Y, Z` for `A : Y → Z` and `B : W → X`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormAssignment {
    pub w: LatticeNorm,
    pub x: LatticeNorm,
    pub y: LatticeNorm,
    pub z: LatticeNorm,
}

impl NormAssignment {
    pub fn uniform(n: LatticeNorm) -> Self {
        Self {
            w: n.clone(),
            x: n.clone(),
            y: n.clone(),
            z: n,
        }
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "W": self.w.describe(),
            "X": self.x.describe(),
            "Y": self.y.describe(),
            "Z": self.z.describe(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    ColumnMax,
    RowDualMax,
    PositiveTopVector,
    SingularValue,
    VertexEnumeration,
    PowerIteration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormResult {
    pub value: f64,
    /// Unit vector attaining (or nearly attaining) the norm.
    pub witness: LatticeVector<f64>,
    pub certified: bool,
    pub method: NormMethod,
}

impl NormResult {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "value": self.value,
            "witness": crate::io::vector_to_json(&self.witness),
            "certified": self.certified,
            "method": self.method,
        })
    }
}

fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn lp(x: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        x.iter().fold(0.0, |m, a| m.max(a.abs()))
    } else if p == 1.0 {
        x.iter().map(|a| a.abs()).sum()
    } else if p == 2.0 {
        x.iter().map(|a| a * a).sum::<f64>().sqrt()
    } else {
        let m = x.iter().fold(0.0, |m: f64, a| m.max(a.abs()));
        if m == 0.0 {
            return 0.0;
        }
        m * x.iter().map(|a| (a.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// A vector `x` with `‖x‖_p = 1` and `⟨y, x⟩ = ‖y‖_{p′}`.
fn attaining(y: &[f64], p: f64) -> Vec<f64> {
    let n = y.len();
    let dual = lp(y, conjugate(p));
    if dual == 0.0 {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        return e;
    }
    if p == 1.0 {
        let (i, _) = y
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bv), (i, v)| {
                if v.abs() > bv {
                    (i, v.abs())
                } else {
                    (bi, bv)
                }
            });
        let mut e = vec![0.0; n];
        e[i] = y[i].signum();
        return e;
    }
    if p.is_infinite() {
        return y.iter().map(|v| if *v < 0.0 { -1.0 } else { 1.0 }).collect();
    }
    let q = conjugate(p);
    y.iter()
        .map(|v| v.signum() * (v.abs() / dual).powf(q - 1.0))
        .collect()
}

struct Dense {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Dense {
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    fn apply_t(&self, y: &[f64]) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j) * y[i]).sum())
            .collect()
    }

    fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn is_nonneg(&self) -> bool {
        self.data.iter().all(|a| *a >= 0.0)
    }
}

struct Unweighted {
    value: f64,
    x: Vec<f64>,
    certified: bool,
    method: NormMethod,
}

fn unweighted_norm(a: &Dense, p: f64, q: f64) -> Unweighted {
    let positive = a.is_nonneg();
    if p == 1.0 {
        let (j, value) = (0..a.cols)
            .map(|j| (j, lp(&a.column(j), q)))
            .fold((0, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        let mut x = vec![0.0; a.cols];
        x[j] = 1.0;
        return Unweighted { value, x, certified: true, method: NormMethod::ColumnMax };
    }
    if q.is_infinite() {
        let pd = conjugate(p);
        let (i, value) = (0..a.rows)
            .map(|i| (i, lp(a.row(i), pd)))
            .fold((0, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        let x = attaining(a.row(i), p);
        return Unweighted { value, x, certified: true, method: NormMethod::RowDualMax };
    }
    if p.is_infinite() && positive {
        let x = vec![1.0; a.cols];
        let value = lp(&a.apply(&x), q);
        return Unweighted { value, x, certified: true, method: NormMethod::PositiveTopVector };
    }
    if p == 2.0 && q == 2.0 {
        let m = DMatrix::from_row_slice(a.rows, a.cols, &a.data);
        let svd = m.svd(false, true);
        let (k, sigma) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, s)| if *s > best.1 { (i, *s) } else { best });
        let v_t = svd.v_t.expect("requested right singular vectors");
        let mut x: Vec<f64> = v_t.row(k).iter().copied().collect();
        if positive {
            x.iter_mut().for_each(|v| *v = v.abs());
        }
        return Unweighted { value: sigma, x, certified: true, method: NormMethod::SingularValue };
    }
    if p.is_infinite() && a.cols <= VERTEX_ENUMERATION_CAP {
        // convex objective: the maximum sits on a sign vertex of the cube
        let mut best = (-1.0, vec![1.0; a.cols]);
        for mask in 0u32..(1 << a.cols) {
            let x: Vec<f64> = (0..a.cols)
                .map(|j| if mask >> j & 1 == 1 { -1.0 } else { 1.0 })
                .collect();
            let v = lp(&a.apply(&x), q);
            if v > best.0 {
                best = (v, x);
            }
        }
        return Unweighted {
            value: best.0,
            x: best.1,
            certified: true,
            method: NormMethod::VertexEnumeration,
        };
    }
    if q == 1.0 && (positive || a.rows <= VERTEX_ENUMERATION_CAP) {
        // ‖A‖_{p→1} = max over sign vectors s of ‖Aᵀs‖_{p′}
        let signs: Vec<Vec<f64>> = if positive {
            vec![vec![1.0; a.rows]]
        } else {
            (0u32..(1 << a.rows))
                .map(|mask| {
                    (0..a.rows)
                        .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                        .collect()
                })
                .collect()
        };
        let pd = conjugate(p);
        let (value, s) = signs
            .into_iter()
            .map(|s| (lp(&a.apply_t(&s), pd), s))
            .fold((-1.0, Vec::new()), |best, c| if c.0 > best.0 { c } else { best });
        let x = attaining(&a.apply_t(&s), p);
        let method = if positive {
            NormMethod::PositiveTopVector
        } else {
            NormMethod::VertexEnumeration
        };
        return Unweighted { value, x, certified: true, method };
    }
    power_iteration(a, p, q, positive)
}

/// Multistart nonlinear power iteration for `max ‖Ax‖_q` over `‖x‖_p ≤ 1`.
fn power_iteration(a: &Dense, p: f64, q: f64, positive: bool) -> Unweighted {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut starts: Vec<Vec<f64>> = vec![vec![1.0; a.cols]];
    for j in 0..a.cols {
        let mut e = vec![0.0; a.cols];
        e[j] = 1.0;
        starts.push(e);
    }
    for _ in 0..8 {
        starts.push(
            (0..a.cols)
                .map(|_| {
                    if positive {
                        rng.gen_range(0.0..1.0)
                    } else {
                        rng.gen_range(-1.0..1.0)
                    }
                })
                .collect(),
        );
    }
    let qd = conjugate(q);
    let mut best = (-1.0, vec![0.0; a.cols]);
    for start in starts {
        let n = lp(&start, p);
        if n == 0.0 {
            continue;
        }
        let mut x: Vec<f64> = start.iter().map(|v| v / n).collect();
        let mut value = lp(&a.apply(&x), q);
        for _ in 0..500 {
            let ax = a.apply(&x);
            if lp(&ax, q) == 0.0 {
                break;
            }
            let z = attaining(&ax, qd);
            let next = attaining(&a.apply_t(&z), p);
            let next_value = lp(&a.apply(&next), q);
            let improved = next_value > value;
            if improved {
                x = next;
            }
            if !improved || next_value - value <= 1e-15 * next_value.max(1.0) {
                value = value.max(next_value);
                break;
            }
            value = next_value;
        }
        if value > best.0 {
            best = (value, x);
        }
    }
    Unweighted {
        value: best.0.max(0.0),
        x: best.1,
        certified: false,
        method: NormMethod::PowerIteration,
    }
}

pub fn vector_norm(x: &LatticeVector<f64>, n: &LatticeNorm) -> Result<f64> {
    n.norm(x.entries())
}

/// `‖A‖` from `(ℝ^cols, from)` to `(ℝ^rows, to)`.
pub fn operator_norm(
    a: &RegularOperator<f64>,
    from: &LatticeNorm,
    to: &LatticeNorm,
) -> Result<NormResult> {
    from.check_dim(a.cols())?;
    to.check_dim(a.rows())?;
    let d_from = from.scaling(a.cols());
    let d_to = to.scaling(a.rows());
    let scaled = Dense {
        rows: a.rows(),
        cols: a.cols(),
        data: (0..a.rows())
            .flat_map(|i| (0..a.cols()).map(move |j| (i, j)))
            .map(|(i, j)| d_to[i] * a.get(i, j) / d_from[j])
            .collect(),
    };
    let u = unweighted_norm(&scaled, from.p, to.p);
    let witness: Vec<f64> = u.x.iter().zip(&d_from).map(|(x, d)| x / d).collect();
    Ok(NormResult {
        value: u.value,
        witness: LatticeVector::new(witness)?,
        certified: u.certified,
        method: u.method,
    })
}

/// `‖A‖_r = ‖|A|‖`.
pub fn regular_norm(
    a: &RegularOperator<f64>,
    from: &LatticeNorm,
    to: &LatticeNorm,
) -> Result<NormResult> {
    operator_norm(&a.modulus_closed_form(), from, to)
}

/// Whether `operator_norm` has a closed form for positive operators between
/// these norms.
pub fn positive_pair_certified(from: &LatticeNorm, to: &LatticeNorm) -> bool {
    let (p, q) = (from.p, to.p);
    p == 1.0 || p.is_infinite() || q == 1.0 || q.is_infinite() || (p == 2.0 && q == 2.0)
}

/// Regular 1→1 norm: the largest column sum of `|A|`, in the scalar field
/// of `A`.
pub fn regular_norm_one<S: Scalar>(a: &RegularOperator<S>) -> S {
    let m = a.modulus_closed_form();
    (0..m.cols())
        .map(|j| m.column(j).sum())
        .fold(S::zero(), |acc, s| acc.max_of(&s))
}

/// Cap on `y^x`, the number of vertices visited by
/// [`superop_regular_norm_one`].
pub const SUPEROP_VERTEX_CAP: usize = 1 << 20;

/// Regular norm of `M_{A,B}` when all four spaces carry the ℓ¹ norm.
///
/// The positive part of the unit ball of `(L(X,Y), ‖·‖_r)` is a product of
/// simplices, one per column of `T`, so `‖|M_{A,B}|‖` is attained at a
/// matrix whose columns are unit vectors. All `y^x` such matrices are
/// visited; `|M_{A,B}|` is taken from the representation.
pub fn superop_regular_norm_one<S: Scalar>(
    a: &RegularOperator<S>,
    b: &RegularOperator<S>,
) -> Result<(S, RegularOperator<S>)> {
    let m = Superoperator::build(a, b).modulus();
    let (y, x) = m.dims().domain_shape();
    let count = (y as f64).powi(x as i32);
    if count > SUPEROP_VERTEX_CAP as f64 {
        return Err(Error::EnumerationLimit {
            dim: x * y,
            cap: SUPEROP_VERTEX_CAP,
        });
    }
    let mut choice = vec![0usize; x];
    let mut best: Option<(S, RegularOperator<S>)> = None;
    loop {
        let t = RegularOperator::from_fn(y, x, |i, j| {
            if choice[j] == i {
                S::one()
            } else {
                S::zero()
            }
        });
        let image = m.apply_via_rep(&t)?;
        let value = regular_norm_one(&image);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, t));
        }
        // odometer over column choices
        let mut k = 0;
        while k < x {
            choice[k] += 1;
            if choice[k] < y {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == x {
            break;
        }
    }
    Ok(best.expect("at least one vertex"))
}

/// Sampling parameters shared by the norm reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOptions {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            samples: 1000,
            seed: 0,
            tol: FLOAT_TOL,
        }
    }
}

fn random_matrix(rows: usize, cols: usize, positive: bool, rng: &mut ChaCha8Rng) -> RegularOperator<f64> {
    // a quarter of the entries are zeroed to reach sparse corners of the ball
    let data: Vec<Vec<f64>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    if rng.gen_bool(0.25) {
                        0.0
                    } else if positive {
                        rng.gen_range(0.0..1.0)
                    } else {
                        rng.gen_range(-1.0..1.0)
                    }
                })
                .collect()
        })
        .collect();
    RegularOperator::from_rows(data).expect("nonempty shape")
}

/// Checks `‖M_{A,B}‖_r = ‖A‖_r‖B‖_r`, where the matrix spaces carry their
/// regular norms.
///
/// The left side is probed from below by the rank-one witness
/// `x′ ⊗ y` built from the norm witnesses of `|B|ᵀ` and `|A|`, and from
/// above by random positive `T` of unit regular norm. With ℓ¹ norms on all
/// four spaces the left side is also computed exactly by vertex enumeration.
pub fn verify_regular_norm_product(
    a: &RegularOperator<f64>,
    b: &RegularOperator<f64>,
    norms: &NormAssignment,
    opts: &NormOptions,
) -> Result<VerificationReport> {
    let mut rb = ReportBuilder::new(ClaimId::Cor23, false);
    let tol = opts.tol;
    let na = regular_norm(a, &norms.y, &norms.z)?;
    let nb = regular_norm(b, &norms.w, &norms.x)?;
    let product = na.value * nb.value;
    let certified = na.certified && nb.certified;
    rb.metric("regular_norm_a", na.value);
    rb.metric("regular_norm_b", nb.value);
    rb.metric("product", product);
    rb.flag("factor_norms_certified", certified);
    let slack = if certified {
        tol
    } else {
        tol.max(SEARCH_REL_TOL * product)
    };

    let modulus = Superoperator::build(a, b).modulus();
    let (abs_a, abs_b) = (a.modulus_closed_form(), b.modulus_closed_form());

    // rank-one witness from below
    let y = na.witness.abs();
    let bt = operator_norm(&abs_b.transpose(), &norms.x.dual(), &norms.w.dual())?;
    let xprime = bt.witness.abs();
    let t_star = rank_one(&xprime, &y);
    let t_star_norm = operator_norm(&t_star, &norms.x, &norms.y)?;
    let factored = norms.x.dual().norm(xprime.entries())? * norms.y.norm(y.entries())?;
    if t_star_norm.certified {
        rb.floats_close("rank_one_norm_consistency", t_star_norm.value, factored, tol);
    }
    rb.float_le("rank_one_unit_ball", factored, 1.0, 1e-12);
    let image = modulus.apply_via_rep(&t_star)?;
    let image_factored =
        norms.w.dual().norm(abs_b.transpose().apply(&xprime)?.entries())?
            * norms.z.norm(abs_a.apply(&y)?.entries())?;
    let image_norm = operator_norm(&image, &norms.w, &norms.z)?;
    let witness_value = if image_norm.certified {
        image_norm.value
    } else {
        image_norm.value.max(image_factored)
    };
    rb.metric("witness_value", witness_value);
    rb.float_le("rank_one_witness_attains", product, witness_value, slack);
    rb.witness_matrix("rank_one_witness", &t_star);

    // random positive T of unit regular norm from above
    let domain_certified = positive_pair_certified(&norms.x, &norms.y);
    let codomain_certified = positive_pair_certified(&norms.w, &norms.z);
    rb.metric("samples", if domain_certified { opts.samples as f64 } else { 0.0 });
    let mut max_sample = 0.0f64;
    if domain_certified {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let (rows, cols) = modulus.dims().domain_shape();
        for _ in 0..opts.samples {
            let t = random_matrix(rows, cols, true, &mut rng);
            let n = operator_norm(&t, &norms.x, &norms.y)?.value;
            if n == 0.0 {
                continue;
            }
            let t = t.scale(&(1.0 / n));
            let value = operator_norm(&modulus.apply_via_rep(&t)?, &norms.w, &norms.z)?.value;
            max_sample = max_sample.max(value);
            if !rb.float_le("samples_bounded", value, product, slack) {
                rb.witness_matrix("violating_sample", &t);
            }
        }
        rb.metric("max_sample_value", max_sample);
    }
    if !codomain_certified {
        rb.metric("codomain_search_mode", 1.0);
    }

    let all_one = [&norms.w, &norms.x, &norms.y, &norms.z]
        .iter()
        .all(|n| n.p == 1.0 && n.weights.is_none());
    if all_one {
        let (left, vertex) = superop_regular_norm_one(a, b)?;
        rb.metric("left_vertex_enumeration", left);
        rb.floats_close("closed_form_equality", left, product, 1e-12);
        rb.witness_matrix("vertex_witness", &vertex);
    }

    let inputs = json!({
        "A": matrix_to_json(a),
        "B": matrix_to_json(b),
        "norms": norms.describe(),
        "samples": opts.samples,
    });
    Ok(rb.finish(&inputs, Some(opts.seed)))
}

/// `‖M_{A,B}‖_r = ‖A‖_r‖B‖_r` with ℓ¹ norms on all four spaces, in the
/// scalar field of the inputs.
///
/// Both regular norms are column sums of moduli; the left side comes from
/// vertex enumeration. The rank-one witness is `T = e_j·1ᵀ`, where `j` is a
/// heaviest column of `|A|`.
pub fn verify_regular_norm_one_exact<S: Scalar>(
    a: &RegularOperator<S>,
    b: &RegularOperator<S>,
) -> Result<VerificationReport> {
    let mut rb = ReportBuilder::new(ClaimId::Cor23, S::EXACT);
    let tol = crate::scalar::Tolerance(FLOAT_TOL);
    let abs_a = a.modulus_closed_form();
    let na = regular_norm_one(a);
    let nb = regular_norm_one(b);
    let product = na.clone() * nb.clone();
    rb.metric("regular_norm_a", na.to_f64());
    rb.metric("regular_norm_b", nb.to_f64());
    rb.metric("product", product.to_f64());

    let (left, vertex) = superop_regular_norm_one(a, b)?;
    rb.metric("left_vertex_enumeration", left.to_f64());
    let as_vec = |s: &S| LatticeVector::new(vec![s.clone()]).expect("dim 1");
    rb.vectors_equal("closed_form_equality", &as_vec(&left), &as_vec(&product), tol);
    rb.witness_matrix("vertex_witness", &vertex);

    let heaviest = (0..abs_a.cols())
        .max_by(|&i, &j| {
            let (si, sj) = (abs_a.column(i).sum(), abs_a.column(j).sum());
            si.partial_cmp(&sj).expect("ordered scalars").then(j.cmp(&i))
        })
        .expect("nonempty");
    let y = LatticeVector::unit(a.cols(), heaviest)?;
    let t_star = rank_one(&LatticeVector::ones(b.rows()), &y);
    rb.vectors_equal(
        "rank_one_norm_consistency",
        &as_vec(&regular_norm_one(&t_star)),
        &as_vec(&S::one()),
        tol,
    );
    let image = Superoperator::build(a, b).modulus().apply_via_rep(&t_star)?;
    rb.vectors_equal(
        "rank_one_witness_attains",
        &as_vec(&regular_norm_one(&image)),
        &as_vec(&product),
        tol,
    );
    rb.witness_matrix("rank_one_witness", &t_star);

    let inputs = json!({
        "A": matrix_to_json(a),
        "B": matrix_to_json(b),
        "norms": NormAssignment::uniform(LatticeNorm::l1()).describe(),
    });
    Ok(rb.finish(&inputs, None))
}

/// `H₂^{⊗m}` with `H₂ = [[1, 1], [1, −1]]`.
pub fn hadamard_power<S: Scalar>(m: u32) -> RegularOperator<S> {
    let h = RegularOperator::from_ints(&[&[1, 1], &[1, -1]]).expect("2x2");
    (1..m.max(1)).fold(h.clone(), |acc, _| acc.kron(&h))
}

/// Compares the operator norm of `M_{A,B}` (matrix spaces under operator
/// norms) with the regular-norm product `‖A‖_r‖B‖_r`.
///
/// The operator-norm side is sampled: the rank-one witness from the norm
/// witnesses of `A` and `Bᵀ`, plus random `T` of unit norm. It is bounded
/// above by `‖A‖‖B‖`. The report is informational.
pub fn gap_report(
    a: &RegularOperator<f64>,
    b: &RegularOperator<f64>,
    norms: &NormAssignment,
    opts: &NormOptions,
) -> Result<VerificationReport> {
    let mut rb = ReportBuilder::new(ClaimId::Gap, false);
    rb.informational();
    let tol = opts.tol;
    let ra = regular_norm(a, &norms.y, &norms.z)?;
    let rbn = regular_norm(b, &norms.w, &norms.x)?;
    let regular_side = ra.value * rbn.value;
    let oa = operator_norm(a, &norms.y, &norms.z)?;
    let ob = operator_norm(b, &norms.w, &norms.x)?;
    let upper = oa.value * ob.value;

    let m = Superoperator::build(a, b);
    // rank-one witness: ‖x′ ⊗ y‖ = ‖x′‖_* ‖y‖ and M(x′ ⊗ y) = (Bᵀx′) ⊗ (Ay)
    let y = &oa.witness;
    let bt = operator_norm(&b.transpose(), &norms.x.dual(), &norms.w.dual())?;
    let xprime = &bt.witness;
    let t_norm = norms.x.dual().norm(xprime.entries())? * norms.y.norm(y.entries())?;
    let mut sampled = 0.0f64;
    if t_norm > 0.0 {
        let value = norms.w.dual().norm(b.transpose().apply(xprime)?.entries())?
            * norms.z.norm(a.apply(y)?.entries())?;
        sampled = value / t_norm;
        rb.witness_matrix("rank_one_witness", &rank_one(xprime, y));
    }

    let (rows, cols) = m.dims().domain_shape();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut used = 0usize;
    for _ in 0..opts.samples {
        let t = random_matrix(rows, cols, false, &mut rng);
        let n = operator_norm(&t, &norms.x, &norms.y)?;
        if !n.certified || n.value == 0.0 {
            continue;
        }
        let t = t.scale(&(1.0 / n.value));
        let value = operator_norm(&m.apply(&t)?, &norms.w, &norms.z)?.value;
        sampled = sampled.max(value);
        used += 1;
    }

    let rho = sampled / regular_side;
    let rho_upper = upper / regular_side;
    rb.metric("regular_side", regular_side);
    rb.metric("operator_norm_sampled", sampled);
    rb.metric("operator_norm_upper", upper);
    rb.metric("rho", rho);
    rb.metric("rho_upper", rho_upper);
    rb.metric("samples_used", used as f64);
    rb.float_le("sampled_below_upper", sampled, upper, tol.max(1e-12 * upper));
    rb.float_le("operator_below_regular", upper, regular_side, tol.max(1e-12 * regular_side));

    let inputs = json!({
        "A": matrix_to_json(a),
        "B": matrix_to_json(b),
        "norms": norms.describe(),
        "samples": opts.samples,
    });
    Ok(rb.finish(&inputs, Some(opts.seed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;
    use crate::scalar::Rational;

    fn m(rows: &[&[i64]]) -> RegularOperator<f64> {
        RegularOperator::from_ints(rows).unwrap()
    }

    fn vf(xs: &[f64]) -> LatticeVector<f64> {
        LatticeVector::new(xs.to_vec()).unwrap()
    }

    fn all_norms() -> Vec<LatticeNorm> {
        vec![
            LatticeNorm::l1(),
            LatticeNorm::l2(),
            LatticeNorm::linf(),
            LatticeNorm::new(3.0).unwrap(),
            LatticeNorm::weighted(1.0, vec![1.0, 2.0]).unwrap(),
            LatticeNorm::weighted(f64::INFINITY, vec![0.5, 3.0]).unwrap(),
            LatticeNorm::weighted(2.0, vec![4.0, 1.0]).unwrap(),
        ]
    }

    #[test]
    fn vector_norm_examples() {
        assert_eq!(vector_norm(&vf(&[3.0, 4.0]), &LatticeNorm::l2()).unwrap(), 5.0);
        assert_eq!(vector_norm(&vf(&[1.0, -1.0]), &LatticeNorm::l1()).unwrap(), 2.0);
        assert_eq!(vector_norm(&vf(&[1.0, -2.0]), &LatticeNorm::linf()).unwrap(), 2.0);
        let w = LatticeNorm::weighted(2.0, vec![4.0, 1.0]).unwrap();
        assert!((vector_norm(&vf(&[1.0, 1.0]), &w).unwrap() - 5f64.sqrt()).abs() < 1e-15);
        assert!(LatticeNorm::new(0.5).is_err());
        assert!(LatticeNorm::weighted(2.0, vec![0.0]).is_err());
        assert!(vector_norm(&vf(&[1.0]), &w).is_err());
    }

    #[test]
    fn dual_norm_is_attained() {
        for n in all_norms() {
            let d = n.dual();
            let y = [0.7, -1.3];
            // sup ⟨y, x⟩ over the unit ball equals the dual norm
            let r = operator_norm(&RegularOperator::from_rows(vec![y.to_vec()]).unwrap(), &n, &LatticeNorm::l1())
                .unwrap();
            assert!((r.value - d.norm(&y).unwrap()).abs() < 1e-9, "{n:?}");
            assert!(n.norm(r.witness.entries()).unwrap() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn identity_has_unit_norm() {
        let i = m(&[&[1, 0], &[0, 1]]);
        for n in [LatticeNorm::l1(), LatticeNorm::l2(), LatticeNorm::linf()] {
            let r = operator_norm(&i, &n, &n).unwrap();
            assert!((r.value - 1.0).abs() < 1e-12);
            assert!(r.certified);
        }
    }

    /// Brute force over a fine grid of the ℓ¹ unit sphere's vertices.
    fn one_to_one_by_vertices(a: &RegularOperator<f64>) -> f64 {
        let mut best: f64 = 0.0;
        for j in 0..a.cols() {
            for s in [-1.0, 1.0] {
                let mut x = vec![0.0; a.cols()];
                x[j] = s;
                let y = a.apply(&vf(&x)).unwrap();
                best = best.max(y.entries().iter().map(|v| v.abs()).sum());
            }
        }
        best
    }

    #[test]
    fn closed_form_examples() {
        let a = m(&[&[1, 2], &[3, 4]]);
        let r = operator_norm(&a, &LatticeNorm::l1(), &LatticeNorm::l1()).unwrap();
        assert_eq!(r.value, 6.0);
        assert_eq!(r.value, one_to_one_by_vertices(&a));
        assert_eq!(r.method, NormMethod::ColumnMax);
        let ones = m(&[&[1, 1], &[1, 1]]);
        let r = operator_norm(&ones, &LatticeNorm::l2(), &LatticeNorm::l2()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn regular_norm_examples() {
        let p = m(&[&[1, 2], &[0, 3]]);
        for n in [LatticeNorm::l1(), LatticeNorm::l2(), LatticeNorm::linf()] {
            let a = operator_norm(&p, &n, &n).unwrap().value;
            let r = regular_norm(&p, &n, &n).unwrap().value;
            assert_eq!(a, r);
        }
        let a = m(&[&[1, -2], &[-3, 4]]);
        assert_eq!(regular_norm(&a, &LatticeNorm::l1(), &LatticeNorm::l1()).unwrap().value, 6.0);
        let h = hadamard_power::<f64>(1);
        let r = regular_norm(&h, &LatticeNorm::l2(), &LatticeNorm::l2()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        let o = operator_norm(&h, &LatticeNorm::l2(), &LatticeNorm::l2()).unwrap();
        assert!((o.value - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn norm_result_invariants_hold_for_all_pairs() {
        let mats = [
            m(&[&[1, -2], &[-3, 4]]),
            m(&[&[2, 1], &[0, 1]]),
            m(&[&[1, 1], &[1, -1]]),
            m(&[&[0, 5], &[-1, 2]]),
        ];
        for a in &mats {
            for from in all_norms() {
                for to in all_norms() {
                    let r = operator_norm(a, &from, &to).unwrap();
                    let wn = from.norm(r.witness.entries()).unwrap();
                    assert!(wn <= 1.0 + 1e-12, "{from:?} {to:?} {wn}");
                    let img = to.norm(a.apply(&r.witness).unwrap().entries()).unwrap();
                    assert!(img <= r.value + 1e-9);
                    if r.certified {
                        assert!((img - r.value).abs() <= 1e-9 * r.value.max(1.0), "{from:?} {to:?}");
                    }
                    // regular norm dominates
                    let reg = regular_norm(a, &from, &to).unwrap();
                    if reg.certified {
                        assert!(r.value <= reg.value + 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn power_iteration_on_positive_matrix_matches_dual_formula() {
        // ‖A‖_{3→3} of a positive matrix, checked against a dense scan of
        // the positive part of the unit sphere
        let a = m(&[&[2, 1], &[1, 3]]);
        let n = LatticeNorm::new(3.0).unwrap();
        let r = operator_norm(&a, &n, &n).unwrap();
        assert!(!r.certified);
        let mut best: f64 = 0.0;
        for k in 0..=20000 {
            let t = k as f64 / 20000.0 * std::f64::consts::FRAC_PI_2;
            let (c, s) = (t.cos(), t.sin());
            let nrm = (c.powi(3) + s.powi(3)).powf(1.0 / 3.0);
            let x = vf(&[c / nrm, s / nrm]);
            best = best.max(n.norm(a.apply(&x).unwrap().entries()).unwrap());
        }
        assert!((r.value - best).abs() < 1e-6 * best, "{} vs {best}", r.value);
    }

    #[test]
    fn superop_vertex_norm_is_exact() {
        let a = RegularOperator::<Rational>::from_ints(&[&[1, -2], &[-3, 4]]).unwrap();
        let b = RegularOperator::<Rational>::from_ints(&[&[0, 1], &[1, 0]]).unwrap();
        let (left, _) = superop_regular_norm_one(&a, &b).unwrap();
        assert_eq!(left, Rational::from_int(6));
        assert_eq!(regular_norm_one(&a) * regular_norm_one(&b), left);
    }

    #[test]
    fn cor23_examples() {
        let i = m(&[&[1, 0], &[0, 1]]);
        for n in [LatticeNorm::l1(), LatticeNorm::l2(), LatticeNorm::linf()] {
            let opts = NormOptions { samples: 50, ..Default::default() };
            let r = verify_regular_norm_product(&i, &i, &NormAssignment::uniform(n), &opts).unwrap();
            assert_eq!(r.status, Status::Pass, "{r:?}");
            assert!((r.metrics["product"] - 1.0).abs() < 1e-12);
        }
        let a = m(&[&[1, -2], &[-3, 4]]);
        let b = m(&[&[0, 1], &[1, 0]]);
        let opts = NormOptions { samples: 200, seed: 3, ..Default::default() };
        let r = verify_regular_norm_product(&a, &b, &NormAssignment::uniform(LatticeNorm::l1()), &opts)
            .unwrap();
        assert_eq!(r.status, Status::Pass, "{r:?}");
        assert_eq!(r.metrics["product"], 6.0);
        assert_eq!(r.metrics["witness_value"], 6.0);
        assert_eq!(r.metrics["left_vertex_enumeration"], 6.0);
    }

    #[test]
    fn cor23_exact_rational_path() {
        let a = RegularOperator::<Rational>::from_ints(&[&[1, -2], &[-3, 4]]).unwrap();
        let b = RegularOperator::<Rational>::from_ints(&[&[0, 1], &[1, 0]]).unwrap();
        let r = verify_regular_norm_one_exact(&a, &b).unwrap();
        assert_eq!(r.status, Status::Pass, "{:#?}", r.checks);
        assert!(r.exact && r.exact_zero);
        assert_eq!(r.metrics["product"], 6.0);
        let b = RegularOperator::<Rational>::from_rows(vec![vec![
            Rational::from_ratio(1, 3),
            Rational::from_ratio(-5, 7),
        ]])
        .unwrap();
        let a = RegularOperator::<Rational>::from_ints(&[&[2], &[-1], &[0]]).unwrap();
        let r = verify_regular_norm_one_exact(&a, &b).unwrap();
        assert_eq!(r.status, Status::Pass, "{:#?}", r.checks);
    }

    #[test]
    fn cor23_with_infinity_norms_and_weights() {
        let a = m(&[&[1, 2, 0], &[3, 1, 1]]);
        let b = m(&[&[2, 0], &[1, 1], &[0, 4]]);
        let linf = LatticeNorm::linf();
        let opts = NormOptions { samples: 200, seed: 11, ..Default::default() };
        let r = verify_regular_norm_product(&a, &b, &NormAssignment::uniform(linf), &opts).unwrap();
        assert_eq!(r.status, Status::Pass, "{r:?}");
        let norms = NormAssignment {
            w: LatticeNorm::weighted(1.0, vec![1.0, 3.0]).unwrap(),
            x: LatticeNorm::weighted(1.0, vec![2.0, 1.0, 0.5]).unwrap(),
            y: LatticeNorm::weighted(1.0, vec![1.0, 4.0, 2.0]).unwrap(),
            z: LatticeNorm::weighted(1.0, vec![0.25, 1.0]).unwrap(),
        };
        let a = m(&[&[1, -2, 0], &[3, 1, -1]]);
        let b = m(&[&[2, 0], &[-1, 1], &[0, 4]]);
        let r = verify_regular_norm_product(&a, &b, &norms, &opts).unwrap();
        assert_eq!(r.status, Status::Pass, "{r:?}");
    }

    #[test]
    fn gap_examples() {
        let i = m(&[&[1, 0], &[0, 1]]);
        let n2 = NormAssignment::uniform(LatticeNorm::l2());
        let opts = NormOptions { samples: 20, ..Default::default() };
        let r = gap_report(&i, &i, &n2, &opts).unwrap();
        assert_eq!(r.status, Status::Info);
        assert!((r.metrics["rho"] - 1.0).abs() < 1e-12);
        for mexp in 1..=2u32 {
            let h = hadamard_power::<f64>(mexp);
            let r = gap_report(&h, &h, &n2, &opts).unwrap();
            let bound = 0.5f64.powi(mexp as i32);
            assert!(r.metrics["rho"] <= bound + 1e-6);
            assert!((r.metrics["regular_side"] - 4f64.powi(mexp as i32)).abs() < 1e-6);
        }
    }
}
